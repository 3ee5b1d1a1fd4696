//! k-nearest-neighbour lists and the graphs built from them.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functionals::Functional;

pub(crate) fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Indices of the `k` nearest points to `point(l)` among `0..n`, `l`
/// excluded, nearest first. Ties are broken by index.
pub(crate) fn nearest<'a>(
    n: usize,
    l: usize,
    k: usize,
    point: impl Fn(usize) -> &'a [f64],
) -> Vec<(f64, usize)> {
    let p = point(l);
    let mut d: Vec<(f64, usize)> = (0..n)
        .filter(|&q| q != l)
        .map(|q| (dist2(p, point(q)), q))
        .collect();
    let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
    if k < d.len() {
        d.select_nth_unstable_by(k, cmp);
        d.truncate(k + 1);
    }
    d.sort_by(cmp);
    d
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnLists {
    pub k: usize,
    /// `neighbours[l]`: the `k` nearest other points, nearest first.
    pub neighbours: Vec<Vec<usize>>,
    /// Whether ties forced a deterministic perturbation of the input.
    pub tie_jittered: bool,
}

fn check_knn(points: &[Vec<f64>], k: usize) -> Result<()> {
    if points.len() <= k {
        return Err(Error::invalid(
            "k",
            format!("need more than k = {k} points, got {}", points.len()),
        ));
    }
    if k == 0 {
        return Err(Error::invalid("k", "must be at least 1"));
    }
    let m = points[0].len();
    if let Some(p) = points.iter().find(|p| p.len() != m) {
        return Err(Error::DimensionMismatch {
            expected: m,
            got: p.len(),
        });
    }
    Ok(())
}

/// `depth` nearest neighbours per point, and whether any membership was
/// decided by a tie.
fn lists(points: &[Vec<f64>], depth: usize) -> (Vec<Vec<usize>>, bool) {
    let n = points.len();
    let mut tied = false;
    let out = (0..n)
        .map(|l| {
            let d = nearest(n, l, depth, |q| &points[q]);
            if d[0].0 == 0.0 || (d.len() > depth && d[depth - 1].0 == d[depth].0) {
                tied = true;
            }
            d.iter().take(depth).map(|x| x.1).collect()
        })
        .collect();
    (out, tied)
}

fn jitter(points: &[Vec<f64>], scale: f64) -> Vec<Vec<f64>> {
    points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            p.iter()
                .enumerate()
                .map(|(c, x)| {
                    let t = (i as f64 + 1.0) * 2.399_963_229_728_653 + c as f64;
                    x + scale * (1.0 + x.abs()) * t.sin()
                })
                .collect()
        })
        .collect()
}

fn lists_untied(points: &[Vec<f64>], depth: usize) -> (Vec<Vec<usize>>, bool) {
    let (l, tied) = lists(points, depth);
    if !tied {
        return (l, false);
    }
    let mut scale = 1e-12;
    loop {
        let (l, tied) = lists(&jitter(points, scale), depth);
        if !tied || scale > 1e-6 {
            return (l, true);
        }
        scale *= 100.0;
    }
}

/// k-nearest-neighbour lists under Euclidean distance.
pub fn knn_graph(points: &[Vec<f64>], k: usize) -> Result<KnnLists> {
    check_knn(points, k)?;
    let (neighbours, tie_jittered) = lists_untied(points, k);
    Ok(KnnLists {
        k,
        neighbours,
        tie_jittered,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GraphRule {
    /// `{i, j}` iff one is among the other's `k` nearest neighbours.
    Union,
    /// `{i, j}` iff both lie in `{l} ∪ N_{k+1}(l)` for some `l`.
    CoMembership,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InteractionGraph {
    pub n_vertices: usize,
    /// Undirected edges `(i, j)` with `i < j`.
    pub edges: BTreeSet<(usize, usize)>,
    pub k: usize,
    pub rule: GraphRule,
    pub tie_jittered: bool,
}

impl InteractionGraph {
    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.edges.contains(&(i.min(j), i.max(j)))
    }

    pub fn degree(&self, v: usize) -> usize {
        self.edges.iter().filter(|(a, b)| *a == v || *b == v).count()
    }

    pub fn max_degree(&self) -> usize {
        let mut deg = vec![0usize; self.n_vertices];
        for &(a, b) in &self.edges {
            deg[a] += 1;
            deg[b] += 1;
        }
        deg.into_iter().max().unwrap_or(0)
    }
}

fn edge(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

/// The symmetrized k-NN graph.
pub fn knn_union_graph(points: &[Vec<f64>], k: usize) -> Result<InteractionGraph> {
    let lists = knn_graph(points, k)?;
    let mut edges = BTreeSet::new();
    for (l, nb) in lists.neighbours.iter().enumerate() {
        for &q in nb {
            edges.insert(edge(l, q));
        }
    }
    Ok(InteractionGraph {
        n_vertices: points.len(),
        edges,
        k,
        rule: GraphRule::Union,
        tie_jittered: lists.tie_jittered,
    })
}

/// Interaction rule for statistics `Σ_l f_l` where `f_l` depends on `x_l`
/// and its `k` nearest neighbours. Two points are joined when both belong to
/// some `{l} ∪ N_{k+1}(l)`. The extra neighbour is needed: moving `j` into
/// the `k`-neighbourhood of `l` can push `i` out of it, so `i` and `j`
/// interact through `f_l` although neither is a `k`-neighbour of the other.
pub fn interaction_rule_graph(points: &[Vec<f64>], k: usize) -> Result<InteractionGraph> {
    check_knn(points, k)?;
    let depth = (k + 1).min(points.len() - 1);
    let (lists, tie_jittered) = lists_untied(points, depth);
    let mut edges = BTreeSet::new();
    for (l, nb) in lists.iter().enumerate() {
        let mut group = nb.clone();
        group.push(l);
        for a in 0..group.len() {
            for b in a + 1..group.len() {
                edges.insert(edge(group[a], group[b]));
            }
        }
    }
    Ok(InteractionGraph {
        n_vertices: points.len(),
        edges,
        k,
        rule: GraphRule::CoMembership,
        tie_jittered,
    })
}

/// `1 +` degree of vertex 0 in the interaction graph of the extended sample.
pub fn delta_statistic(points_extended: &[Vec<f64>], k: usize) -> Result<usize> {
    let g = interaction_rule_graph(points_extended, k)?;
    Ok(1 + g.degree(0))
}

/// Whether `f(x) - f(x^j) == f(x^i) - f(x^{ij})` holds exactly, with both
/// sides computed through the functional's difference operator.
pub fn noninteracting<F: Functional<Vec<f64>> + ?Sized>(
    f: &F,
    x: &[Vec<f64>],
    x_prime: &[Vec<f64>],
    i: usize,
    j: usize,
) -> Result<bool> {
    let lhs = f.delta(x, j, &x_prime[j])?;
    let mut xi = x.to_vec();
    xi[i] = x_prime[i].clone();
    let rhs = f.delta(&xi, j, &x_prime[j])?;
    Ok(lhs.iter().zip(&rhs).all(|(a, b)| a.to_bits() == b.to_bits()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(xs: &[f64]) -> Vec<Vec<f64>> {
        xs.iter().map(|x| vec![*x]).collect()
    }

    #[test]
    fn collinear_example() {
        let pts = line(&[0.0, 1.0, 2.5, 4.5, 10.0]);
        let g = knn_graph(&pts, 1).unwrap();
        let first: Vec<usize> = g.neighbours.iter().map(|v| v[0] + 1).collect();
        assert_eq!(first, vec![2, 1, 2, 3, 4]);
        let u = knn_union_graph(&pts, 1).unwrap();
        let edges: Vec<(usize, usize)> = u.edges.iter().map(|(a, b)| (a + 1, b + 1)).collect();
        assert_eq!(edges, vec![(1, 2), (2, 3), (3, 4), (4, 5)]);
    }

    #[test]
    fn full_neighbourhoods_and_errors() {
        let pts = line(&[0.0, 1.0, 3.0, 7.0]);
        let g = knn_graph(&pts, 3).unwrap();
        for (l, nb) in g.neighbours.iter().enumerate() {
            assert_eq!(nb.len(), 3);
            assert!(!nb.contains(&l));
        }
        assert!(knn_graph(&pts, 4).is_err());
    }

    #[test]
    fn duplicates_are_flagged() {
        let pts = line(&[0.0, 0.0, 1.0, 3.0]);
        assert!(knn_graph(&pts, 1).unwrap().tie_jittered);
        assert!(!knn_graph(&line(&[0.0, 0.4, 1.0, 3.0]), 1).unwrap().tie_jittered);
    }

    #[test]
    fn delta_is_at_least_two() {
        let pts = line(&[100.0, 0.0, 1.0, 2.0, 3.0]);
        assert!(delta_statistic(&pts, 1).unwrap() >= 2);
    }

    #[test]
    fn small_grid_by_hand() {
        // 1x5 lattice with spacing 1 and an irrational offset on the right to break ties
        let pts = line(&[0.0, 1.0, 2.1, 3.3, 4.6]);
        // N_2 lists: 0:{1,2} 1:{0,2} 2:{1,3} 3:{2,4} 4:{3,2}
        let g = interaction_rule_graph(&pts, 1).unwrap();
        assert_eq!(g.degree(0), 2);
        assert_eq!(delta_statistic(&pts, 1).unwrap(), 3);
        assert_eq!(g.degree(2), 4);
    }
}
