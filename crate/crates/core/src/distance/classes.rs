//! Finite classes of convex sets and the proxy convex distance over them.

use nalgebra::DVector;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{sample_gaussian, GaussianTarget};
use crate::error::{Error, Result};
use crate::linalg::sym_inverse;
use crate::normal::{chi_square_cdf, chi_square_quantile, normal_cdf, std_normal_quantile};
use crate::rng::{derive_seed, rng_for, stream};

/// Parameters of the finite test class. Zero disables a family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassSpec {
    pub directions: usize,
    pub thresholds: usize,
    /// Corners per axis of the lower-orthant grid; used for `d <= 3` only.
    pub rect_grid: usize,
    /// Radii of centred Mahalanobis balls; skipped when `Σ` is singular.
    pub ball_radii: usize,
    /// Gaussian draws for rectangle probabilities when `Σ` is not diagonal.
    pub mc_samples: usize,
    /// Level of the uniform sampling envelope.
    pub alpha: f64,
}

impl Default for ClassSpec {
    fn default() -> Self {
        ClassSpec {
            directions: 64,
            thresholds: 256,
            rect_grid: 16,
            ball_radii: 0,
            mc_samples: 200_000,
            alpha: 0.05,
        }
    }
}

impl ClassSpec {
    pub fn half_spaces(directions: usize, thresholds: usize) -> Self {
        ClassSpec {
            directions,
            thresholds,
            rect_grid: 0,
            ball_radii: 0,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Member {
    /// `{x : ⟨u, x⟩ <= t}`.
    HalfSpace { direction: Vec<f64>, threshold: f64 },
    /// `{x : x <= corner}` coordinatewise.
    LowerOrthant { corner: Vec<f64> },
    /// `{x : xᵀ Σ⁻¹ x <= r²}`.
    Ball { radius_sq: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProxyDistance {
    /// Lower bound on the convex distance.
    pub value: f64,
    pub class_size: usize,
    pub argmax: Member,
    /// Monte Carlo error of the Gaussian probability at the argmax (0 if exact).
    pub mc_stderr: f64,
    /// Largest Gaussian-probability stderr over the class.
    pub max_mc_stderr: f64,
    /// `sqrt(ln(2·class_size/α) / 2N)`: with probability `1-α` every empirical
    /// probability in the class is within this of its mean.
    pub envelope: f64,
}

struct Scored {
    gap: f64,
    stderr: f64,
    member: Member,
}

fn directions(d: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    match d {
        1 => vec![vec![1.0], vec![-1.0]],
        2 => (0..count)
            .map(|i| {
                let a = std::f64::consts::TAU * i as f64 / count as f64;
                vec![a.cos(), a.sin()]
            })
            .collect(),
        _ => {
            let mut rng = rng_for(seed, stream::W_SAMPLES, u64::MAX);
            (0..count)
                .map(|_| loop {
                    let v: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut rng)).collect();
                    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                    if n > 1e-12 {
                        break v.into_iter().map(|x| x / n).collect();
                    }
                })
                .collect()
        }
    }
}

fn mid_quantiles(count: usize) -> impl Iterator<Item = f64> {
    (0..count).map(move |i| (i as f64 + 0.5) / count as f64)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn sorted_fraction_le(sorted: &[f64], t: f64) -> f64 {
    sorted.partition_point(|&v| v <= t) as f64 / sorted.len() as f64
}

fn score_half_spaces(w: &[Vec<f64>], target: &GaussianTarget, spec: &ClassSpec, seed: u64) -> Vec<Scored> {
    let d = target.dim();
    let dirs = directions(d, spec.directions, seed);
    dirs.into_par_iter()
        .flat_map_iter(|u| {
            let mut proj: Vec<f64> = w.iter().map(|x| dot(&u, x)).collect();
            proj.sort_by(f64::total_cmp);
            let var = target.projected_variance(&u);
            // degenerate projection: spread thresholds around the atom at 0
            let sd = if var > 0.0 { var.sqrt() } else { 1.0 };
            mid_quantiles(spec.thresholds)
                .map(|p| {
                    let t = sd * std_normal_quantile(p);
                    let emp = sorted_fraction_le(&proj, t);
                    Scored {
                        gap: (emp - normal_cdf(t, var)).abs(),
                        stderr: 0.0,
                        member: Member::HalfSpace { direction: u.clone(), threshold: t },
                    }
                })
                .collect::<Vec<_>>()
        })
        .collect()
}

/// Lower-orthant counts on a product grid: histogram of cell indices then a
/// cumulative sum along each axis.
fn orthant_fractions(rows: &[Vec<f64>], grid: &[Vec<f64>]) -> Vec<f64> {
    let d = grid.len();
    let g = grid[0].len();
    let side = g + 1;
    let mut hist = vec![0u64; side.pow(d as u32)];
    for x in rows {
        let mut idx = 0;
        for (i, &xi) in x.iter().enumerate() {
            // first corner with xi <= c
            let cell = grid[i].partition_point(|&c| c < xi);
            idx = idx * side + cell;
        }
        hist[idx] += 1;
    }
    let mut stride = 1;
    for _ in 0..d {
        for flat in 0..hist.len() {
            if (flat / stride) % side != 0 {
                hist[flat] += hist[flat - stride];
            }
        }
        stride *= side;
    }
    let total = rows.len() as f64;
    hist.into_iter().map(|c| c as f64 / total).collect()
}

fn unflatten(mut flat: usize, d: usize, side: usize) -> Vec<usize> {
    let mut out = vec![0; d];
    for slot in out.iter_mut().rev() {
        *slot = flat % side;
        flat /= side;
    }
    out
}

fn score_rectangles(w: &[Vec<f64>], target: &GaussianTarget, spec: &ClassSpec, seed: u64) -> Result<Vec<Scored>> {
    let d = target.dim();
    let g = spec.rect_grid;
    let grid: Vec<Vec<f64>> = (0..d)
        .map(|i| {
            let v = target.sigma[(i, i)];
            let sd = if v > 0.0 { v.sqrt() } else { 1.0 };
            mid_quantiles(g).map(|p| sd * std_normal_quantile(p)).collect()
        })
        .collect();
    let emp = orthant_fractions(w, &grid);
    let side = g + 1;
    let (gauss, mc_n) = if target.is_diagonal() {
        (None, 0)
    } else {
        let z = sample_gaussian(target, spec.mc_samples, derive_seed(seed, stream::GAUSSIAN, 1))?;
        (Some(orthant_fractions(&z, &grid)), spec.mc_samples)
    };
    let mut out = Vec::with_capacity(g.pow(d as u32));
    for flat in 0..emp.len() {
        let cell = unflatten(flat, d, side);
        // the last cell index on an axis is +∞, not a member
        if cell.iter().any(|&c| c == g) {
            continue;
        }
        let corner: Vec<f64> = cell.iter().enumerate().map(|(i, &c)| grid[i][c]).collect();
        let (p, se) = match &gauss {
            None => (
                corner.iter().enumerate().map(|(i, &c)| normal_cdf(c, target.sigma[(i, i)])).product(),
                0.0,
            ),
            Some(fr) => {
                let p = fr[flat];
                (p, (p * (1.0 - p) / mc_n as f64).sqrt())
            }
        };
        out.push(Scored { gap: (emp[flat] - p).abs(), stderr: se, member: Member::LowerOrthant { corner } });
    }
    Ok(out)
}

fn score_balls(w: &[Vec<f64>], target: &GaussianTarget, spec: &ClassSpec) -> Result<Vec<Scored>> {
    let d = target.dim();
    let inv = sym_inverse(&target.sigma)?;
    let mut q: Vec<f64> = w
        .iter()
        .map(|x| {
            let v = DVector::from_column_slice(x);
            (v.transpose() * &inv * &v)[(0, 0)]
        })
        .collect();
    q.sort_by(f64::total_cmp);
    Ok(mid_quantiles(spec.ball_radii)
        .map(|p| {
            let r2 = chi_square_quantile(p, d);
            Scored {
                gap: (sorted_fraction_le(&q, r2) - chi_square_cdf(r2, d)).abs(),
                stderr: 0.0,
                member: Member::Ball { radius_sq: r2 },
            }
        })
        .collect())
}

/// Max over the class of `|P̂(W ∈ C) − P(N_Σ ∈ C)|`. Ties go to the first
/// member in class order (half-spaces, orthants, balls).
pub fn proxy_convex_distance(
    w: &[Vec<f64>],
    target: &GaussianTarget,
    spec: &ClassSpec,
    seed: u64,
) -> Result<ProxyDistance> {
    if w.is_empty() {
        return Err(Error::invalid("samples", "need at least one sample"));
    }
    let d = target.dim();
    if let Some(x) = w.iter().find(|x| x.len() != d) {
        return Err(Error::DimensionMismatch { expected: d, got: x.len() });
    }
    let mut scored = Vec::new();
    if spec.directions > 0 && spec.thresholds > 0 {
        scored.extend(score_half_spaces(w, target, spec, seed));
    }
    if spec.rect_grid > 0 && d <= 3 {
        scored.extend(score_rectangles(w, target, spec, seed)?);
    }
    if spec.ball_radii > 0 && target.is_posdef() {
        scored.extend(score_balls(w, target, spec)?);
    }
    if scored.is_empty() {
        return Err(Error::invalid("test_class", "class is empty"));
    }
    let mut best = 0;
    for (i, s) in scored.iter().enumerate() {
        if s.gap > scored[best].gap {
            best = i;
        }
    }
    let class_size = scored.len();
    let max_mc_stderr = scored.iter().fold(0.0f64, |a, s| a.max(s.stderr));
    let envelope = ((2.0 * class_size as f64 / spec.alpha).ln() / (2.0 * w.len() as f64)).sqrt();
    let s = scored.swap_remove(best);
    Ok(ProxyDistance {
        value: s.gap.clamp(0.0, 1.0),
        class_size,
        argmax: s.member,
        mc_stderr: s.stderr,
        max_mc_stderr,
        envelope,
    })
}
