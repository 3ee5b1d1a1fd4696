//! Unions and intersections of equal discs in the plane.
//!
//! The boundary of a union of discs is a cycle of circular arcs. For each
//! circle we remove the angular intervals covered by the other discs; what
//! remains are boundary arcs, traversed counter-clockwise about their own
//! centre so that the union lies on the left. Area follows from the
//! divergence theorem, perimeter from arc lengths, and the Euler
//! characteristic from Gauss-Bonnet: arc curvature plus the turning angles at
//! the vertices where one circle hands over to the next.

use std::collections::HashMap;
use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Point = [f64; 2];

/// Admissible Gauss-Bonnet residual.
pub const GAUSS_BONNET_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscVolumes {
    /// `(V_0, V_1, V_2)`: Euler characteristic, half perimeter, area.
    pub v: [f64; 3],
    /// Unrounded Gauss-Bonnet sum divided by `2π`.
    pub chi_raw: f64,
    pub residual: f64,
    /// Whether a deterministic perturbation was needed.
    pub jittered: bool,
}

#[derive(Debug, Clone, Copy)]
struct Arc {
    from: f64,
    to: f64,
    /// Circle on which the boundary continues after `to`.
    next: Option<usize>,
}

fn norm_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Half-width of the angular interval of circle `a` covered by a disc at distance `dist`.
fn half_width(dist: f64, r: f64) -> f64 {
    (dist / (2.0 * r)).clamp(-1.0, 1.0).acos()
}

/// Pairs closer than `2r`, by uniform grid hashing.
fn neighbour_lists(c: &[Point], r: f64) -> Vec<Vec<usize>> {
    let n = c.len();
    // slightly inflated so that tangent pairs are seen by the degeneracy check
    let reach = 2.0 * r + degeneracy_tol(r);
    let mut out = vec![vec![]; n];
    if n < 48 {
        for a in 0..n {
            for b in 0..n {
                if a != b && dist(c[a], c[b]) < reach {
                    out[a].push(b);
                }
            }
        }
        return out;
    }
    let key = |p: Point| ((p[0] / reach).floor() as i64, (p[1] / reach).floor() as i64);
    let mut grid: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    for (i, p) in c.iter().enumerate() {
        grid.entry(key(*p)).or_default().push(i);
    }
    for a in 0..n {
        let (kx, ky) = key(c[a]);
        for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(cell) = grid.get(&(kx + dx, ky + dy)) {
                    for &b in cell {
                        if b != a && dist(c[a], c[b]) < reach {
                            out[a].push(b);
                        }
                    }
                }
            }
        }
        out[a].sort_unstable();
    }
    out
}

fn dist(a: Point, b: Point) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

fn degeneracy_tol(r: f64) -> f64 {
    1e-13 * r.max(1.0)
}

fn degenerate_pair(c: &[Point], nb: &[Vec<usize>], r: f64) -> bool {
    let tol = degeneracy_tol(r);
    for (a, list) in nb.iter().enumerate() {
        for &b in list {
            let d = dist(c[a], c[b]);
            if d <= tol || (2.0 * r - d).abs() <= tol {
                return true;
            }
        }
    }
    false
}

/// Uncovered arcs of circle `a`.
fn boundary_arcs(a: usize, c: &[Point], nbrs: &[usize], r: f64) -> Vec<Arc> {
    if nbrs.is_empty() {
        return vec![Arc {
            from: 0.0,
            to: TAU,
            next: None,
        }];
    }
    // covered pieces on [0, 2π), each tagged with the disc whose interval starts there
    let mut pieces: Vec<(f64, f64, Option<usize>)> = Vec::with_capacity(nbrs.len() + 2);
    for &b in nbrs {
        let dx = c[b][0] - c[a][0];
        let dy = c[b][1] - c[a][1];
        let alpha = half_width((dx * dx + dy * dy).sqrt(), r);
        let s = norm_angle(dy.atan2(dx) - alpha);
        let e = s + 2.0 * alpha;
        if e <= TAU {
            pieces.push((s, e, Some(b)));
        } else {
            pieces.push((s, TAU, Some(b)));
            pieces.push((0.0, e - TAU, None));
        }
    }
    pieces.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.total_cmp(&y.1)));
    let mut merged: Vec<(f64, f64, Option<usize>)> = vec![];
    for p in pieces {
        match merged.last_mut() {
            Some(m) if p.0 <= m.1 => m.1 = m.1.max(p.1),
            _ => merged.push(p),
        }
    }
    let mut arcs = vec![];
    for w in merged.windows(2) {
        if w[1].0 > w[0].1 {
            arcs.push(Arc {
                from: w[0].1,
                to: w[1].0,
                next: w[1].2,
            });
        }
    }
    let first = merged[0];
    let last = merged[merged.len() - 1];
    if first.0 + TAU > last.1 && first.2.is_some() {
        arcs.push(Arc {
            from: last.1,
            to: first.0 + TAU,
            next: first.2,
        });
    }
    arcs
}

fn arc_area(cx: f64, cy: f64, r: f64, t1: f64, t2: f64) -> f64 {
    0.5 * (r * r * (t2 - t1) + r * (cx * (t2.sin() - t1.sin()) - cy * (t2.cos() - t1.cos())))
}

fn turning_angle(a: Point, b: Point, theta: f64, r: f64) -> f64 {
    let p = [a[0] + r * theta.cos(), a[1] + r * theta.sin()];
    let ta = [-theta.sin(), theta.cos()];
    let u = [(p[0] - b[0]) / r, (p[1] - b[1]) / r];
    let tb = [-u[1], u[0]];
    let cross = ta[0] * tb[1] - ta[1] * tb[0];
    let dot = ta[0] * tb[0] + ta[1] * tb[1];
    cross.atan2(dot)
}

fn union_once(c: &[Point], r: f64) -> (DiscVolumes, bool) {
    let nb = neighbour_lists(c, r);
    let degenerate = degenerate_pair(c, &nb, r);
    let mut area = 0.0;
    let mut arc_len = 0.0;
    let mut turning = 0.0;
    for a in 0..c.len() {
        for arc in boundary_arcs(a, c, &nb[a], r) {
            area += arc_area(c[a][0], c[a][1], r, arc.from, arc.to);
            arc_len += arc.to - arc.from;
            if let Some(b) = arc.next {
                turning += turning_angle(c[a], c[b], arc.to, r);
            }
        }
    }
    let chi_raw = (arc_len + turning) / TAU;
    let chi = chi_raw.round();
    let residual = (chi_raw - chi).abs();
    (
        DiscVolumes {
            v: [chi, r * arc_len / 2.0, area],
            chi_raw,
            residual,
            jittered: false,
        },
        degenerate,
    )
}

/// Deterministic perturbation of size `scale`, different for every index.
fn jitter(c: &[Point], scale: f64) -> Vec<Point> {
    c.iter()
        .enumerate()
        .map(|(i, p)| {
            let t = (i as f64 + 1.0) * 2.399_963_229_728_653; // golden angle
            [p[0] + scale * t.cos(), p[1] + scale * t.sin()]
        })
        .collect()
}

/// Intrinsic volumes of `∪ B(c_i, r)`.
pub fn union_volumes_2d(c: &[Point], r: f64) -> Result<DiscVolumes> {
    union_volumes_2d_seeded(c, r, None)
}

pub fn union_volumes_2d_seeded(c: &[Point], r: f64, seed: Option<u64>) -> Result<DiscVolumes> {
    if c.is_empty() {
        return Ok(DiscVolumes {
            v: [0.0; 3],
            chi_raw: 0.0,
            residual: 0.0,
            jittered: false,
        });
    }
    let (first, degenerate) = union_once(c, r);
    if !degenerate && first.residual < GAUSS_BONNET_TOL {
        return Ok(first);
    }
    let mut worst = first.residual;
    let mut scale = 1e-12 * r.max(1.0);
    for _ in 0..4 {
        let (mut v, degenerate) = union_once(&jitter(c, scale), r);
        if !degenerate && v.residual < GAUSS_BONNET_TOL {
            v.jittered = true;
            return Ok(v);
        }
        worst = worst.max(v.residual);
        scale *= 100.0;
    }
    Err(Error::DegenerateConfiguration {
        residual: worst,
        seed,
    })
}

/// Intrinsic volumes of `∩ B(c_i, r)`; zero when empty.
pub fn intersection_volumes_2d(c: &[Point], r: f64) -> [f64; 3] {
    if c.is_empty() {
        return [0.0; 3];
    }
    for a in 0..c.len() {
        for b in a + 1..c.len() {
            if dist(c[a], c[b]) >= 2.0 * r {
                return [0.0; 3];
            }
        }
    }
    let mut area = 0.0;
    let mut arc_len = 0.0;
    let mut any_distinct = false;
    for a in 0..c.len() {
        // current arc in coordinates unrolled from `base`
        let mut base = None;
        let mut lo: f64 = 0.0;
        let mut hi: f64 = TAU;
        let mut empty = false;
        for b in 0..c.len() {
            if b == a {
                continue;
            }
            let dx = c[b][0] - c[a][0];
            let dy = c[b][1] - c[a][1];
            let dd = (dx * dx + dy * dy).sqrt();
            if dd == 0.0 {
                continue;
            }
            any_distinct = true;
            let alpha = half_width(dd, r);
            let s = dy.atan2(dx) - alpha;
            match base {
                None => {
                    base = Some(s);
                    lo = 0.0;
                    hi = 2.0 * alpha;
                }
                Some(b0) => {
                    let rel = norm_angle(s - b0);
                    let mut best: Option<(f64, f64)> = None;
                    for shift in [rel, rel - TAU] {
                        let l = lo.max(shift);
                        let h = hi.min(shift + 2.0 * alpha);
                        if h > l {
                            best = Some((l, h));
                        }
                    }
                    match best {
                        Some((l, h)) => {
                            lo = l;
                            hi = h;
                        }
                        None => {
                            empty = true;
                            break;
                        }
                    }
                }
            }
        }
        if empty {
            continue;
        }
        let b0 = base.unwrap_or(0.0);
        area += arc_area(c[a][0], c[a][1], r, b0 + lo, b0 + hi);
        arc_len += hi - lo;
    }
    if !any_distinct {
        return [1.0, PI * r, PI * r * r];
    }
    if arc_len <= 0.0 {
        return [0.0; 3];
    }
    [1.0, r * arc_len / 2.0, area]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn single_disc() {
        let v = union_volumes_2d(&[[0.3, -0.2]], 1.0).unwrap();
        assert_eq!(v.v[0], 1.0);
        assert!(close(v.v[1], PI, 1e-12));
        assert!(close(v.v[2], PI, 1e-12));
    }

    #[test]
    fn disjoint_pair() {
        let v = union_volumes_2d(&[[0.0, 0.0], [3.0, 0.0]], 1.0).unwrap();
        assert_eq!(v.v[0], 2.0);
        assert!(close(v.v[1], TAU, 1e-12));
        assert!(close(v.v[2], TAU, 1e-12));
    }

    #[test]
    fn overlapping_pair() {
        let v = union_volumes_2d(&[[0.0, 0.0], [1.0, 0.0]], 1.0).unwrap();
        let lens = 2.0 * PI / 3.0 - 3f64.sqrt() / 2.0;
        assert_eq!(v.v[0], 1.0);
        assert!(close(v.v[1], 4.0 * PI / 3.0, 1e-12));
        assert!(close(v.v[2], TAU - lens, 1e-12));
        assert!(v.residual < 1e-12);
    }

    #[test]
    fn ring_has_a_hole() {
        let k = 12;
        let rad = 3.0;
        let c: Vec<Point> = (0..k)
            .map(|i| {
                let t = TAU * i as f64 / k as f64;
                [rad * t.cos(), rad * t.sin()]
            })
            .collect();
        let v = union_volumes_2d(&c, 1.0).unwrap();
        assert_eq!(v.v[0], 0.0);
    }

    #[test]
    fn tangent_discs_are_jittered() {
        let v = union_volumes_2d(&[[0.0, 0.0], [2.0, 0.0]], 1.0).unwrap();
        assert!(v.jittered);
        assert!(close(v.v[2], TAU, 1e-9));
    }

    #[test]
    fn lens_intersection() {
        let v = intersection_volumes_2d(&[[0.0, 0.0], [1.0, 0.0]], 1.0);
        assert!(close(v[2], 2.0 * PI / 3.0 - 3f64.sqrt() / 2.0, 1e-12));
        assert!(close(v[1], 2.0 * PI / 3.0, 1e-12));
        assert_eq!(v[0], 1.0);
        assert_eq!(intersection_volumes_2d(&[[0.0, 0.0], [2.5, 0.0]], 1.0), [0.0; 3]);
    }

    #[test]
    fn three_disc_intersection_can_be_empty_with_overlapping_pairs() {
        let s = 1.9;
        let c = [[0.0, 0.0], [s, 0.0], [s / 2.0, s * 3f64.sqrt() / 2.0]];
        // the circumradius s/√3 exceeds 1, so no point is within 1 of all centres
        assert_eq!(intersection_volumes_2d(&c, 1.0), [0.0; 3]);
    }
}
