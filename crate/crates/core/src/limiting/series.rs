//! Series evaluation of `Σ` and its comparison with `Σ_n`.

use std::f64::consts::TAU;

use nalgebra::DMatrix;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::boolean::{intersection_volumes_2d, scene::check_dimension};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, par_replicates, stream};
use crate::stats::{loglog_fit, pairwise_sum, Estimate, LogLogFit};

use super::{factorial, kappa, p_coefficients};

/// Intrinsic volumes of `K ∩ (K + x_2) ∩ ... ∩ (K + x_k)`, `K = B(0, r)`.
pub fn intersection_intrinsic_volumes(d: usize, r: f64, offsets: &[Vec<f64>]) -> Result<Vec<f64>> {
    check_dimension(d)?;
    for x in offsets {
        if x.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: x.len(),
            });
        }
    }
    if d == 1 {
        let lo = offsets.iter().map(|x| x[0]).fold(0.0f64, f64::max) - r;
        let hi = offsets.iter().map(|x| x[0]).fold(0.0f64, f64::min) + r;
        return Ok(if hi >= lo {
            vec![1.0, hi - lo]
        } else {
            vec![0.0, 0.0]
        });
    }
    let mut c = vec![[0.0, 0.0]];
    c.extend(offsets.iter().map(|x| [x[0], x[1]]));
    Ok(intersection_volumes_2d(&c, r).to_vec())
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SeriesConfig {
    pub k_max: usize,
    pub mc_samples: usize,
    /// Stop once a term's largest entry falls below `eps_rel` times the
    /// largest entry of the running total.
    pub eps_rel: f64,
    /// From this `k` on, term magnitudes are expected to decrease.
    pub decay_onset: usize,
    pub seed: u64,
}

impl SeriesConfig {
    pub fn new(k_max: usize, mc_samples: usize, seed: u64) -> Self {
        SeriesConfig {
            k_max,
            mc_samples,
            eps_rel: 1e-3,
            decay_onset: 4,
            seed,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeriesTerm {
    pub k: usize,
    pub matrix: DMatrix<f64>,
    pub stderr: DMatrix<f64>,
    /// Largest absolute entry.
    pub magnitude: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SigmaSeries {
    pub d: usize,
    pub r: f64,
    pub sigma: DMatrix<f64>,
    pub stderr: DMatrix<f64>,
    pub k_max: usize,
    /// Last `k` included.
    pub k_used: usize,
    pub terms: Vec<SeriesTerm>,
    /// Magnitude of the last included term, a proxy for the truncation error.
    pub remainder: f64,
    /// Whether the relative stopping rule fired before `k_max`.
    pub converged: bool,
    /// False if some term past the onset is larger than its predecessor by
    /// more than three standard errors.
    pub decays: bool,
    pub seed: u64,
}

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0f64, |a, x| a.max(x.abs()))
}

const CHUNK: usize = 4096;

fn sample_offset(d: usize, r: f64, rng: &mut crate::rng::Rng) -> Vec<f64> {
    let reach = 2.0 * r;
    if d == 1 {
        vec![rng.random_range(-reach..reach)]
    } else {
        let rho = reach * rng.random::<f64>().sqrt();
        let th = TAU * rng.random::<f64>();
        vec![rho * th.cos(), rho * th.sin()]
    }
}

/// Monte-Carlo estimate of the `k`-th series term. Offsets are uniform on
/// the ball of radius `2R`, outside of which the intersection is empty.
fn mc_term(d: usize, r: f64, p: &DMatrix<f64>, k: usize, samples: usize, seed: u64) -> Result<SeriesTerm> {
    let dim = d + 1;
    let chunks = samples.div_ceil(CHUNK);
    let master = derive_seed(seed, stream::SIGMA_SERIES, k as u64);
    let blocks = par_replicates(master, stream::SIGMA_SERIES, chunks, |_, rng| {
        let mut out = vec![];
        for _ in 0..CHUNK {
            let offsets: Vec<Vec<f64>> = (1..k).map(|_| sample_offset(d, r, rng)).collect();
            let v = intersection_intrinsic_volumes(d, r, &offsets)?;
            let u: Vec<f64> = (0..dim).map(|i| (i..dim).map(|s| p[(i, s)] * v[s]).sum()).collect();
            let mut e = vec![0.0; dim * dim];
            for i in 0..dim {
                for j in 0..dim {
                    e[i * dim + j] = u[i] * u[j];
                }
            }
            out.push(e);
        }
        Ok(out)
    })?;
    let rows: Vec<Vec<f64>> = blocks.into_iter().flatten().take(samples).collect();
    let vol = kappa(d) * (2.0 * r).powi(d as i32);
    let factor = vol.powi(k as i32 - 1) / factorial(k);
    let mut matrix = DMatrix::zeros(dim, dim);
    let mut stderr = DMatrix::zeros(dim, dim);
    for i in 0..dim {
        for j in i..dim {
            let col: Vec<f64> = rows.iter().map(|e| e[i * dim + j]).collect();
            let est = Estimate::from_samples(&col).scaled(factor);
            matrix[(i, j)] = est.value;
            matrix[(j, i)] = est.value;
            stderr[(i, j)] = est.stderr;
            stderr[(j, i)] = est.stderr;
        }
    }
    Ok(SeriesTerm {
        k,
        magnitude: max_abs(&matrix),
        matrix,
        stderr,
        samples: rows.len(),
    })
}

fn assemble(d: usize, r: f64, cfg: &SeriesConfig, mut next: impl FnMut(usize) -> Result<SeriesTerm>) -> Result<SigmaSeries> {
    if cfg.k_max < 2 {
        return Err(Error::invalid("k_max", "must be at least 2"));
    }
    let dim = d + 1;
    let mut sigma = DMatrix::zeros(dim, dim);
    let mut var = DMatrix::zeros(dim, dim);
    let mut terms: Vec<SeriesTerm> = vec![];
    let mut converged = false;
    for k in 2..=cfg.k_max {
        let term = next(k)?;
        sigma += &term.matrix;
        var += term.stderr.map(|s| s * s);
        let small = term.magnitude < cfg.eps_rel * max_abs(&sigma);
        terms.push(term);
        if small {
            converged = true;
            break;
        }
    }
    let decays = terms.windows(2).all(|w| {
        w[1].k <= cfg.decay_onset || w[1].magnitude <= w[0].magnitude + 3.0 * max_abs(&w[1].stderr)
    });
    let last = terms.last().expect("at least one term");
    Ok(SigmaSeries {
        d,
        r,
        stderr: var.map(f64::sqrt),
        k_max: cfg.k_max,
        k_used: last.k,
        remainder: last.magnitude,
        converged,
        decays,
        seed: cfg.seed,
        sigma,
        terms,
    })
}

/// Truncated Monte-Carlo evaluation of the series for `Σ`.
pub fn sigma_series(d: usize, r: f64, cfg: &SeriesConfig) -> Result<SigmaSeries> {
    check_dimension(d)?;
    if cfg.mc_samples == 0 {
        return Err(Error::invalid("mc_samples", "must be positive"));
    }
    let p = p_coefficients(d, r)?;
    assemble(d, r, cfg, |k| mc_term(d, r, &p, k, cfg.mc_samples, cfg.seed))
}

/// `∫ V_s V_r dx_2..dx_k / k!` in `d = 1` with `m = s + r`: the span of the
/// `k` points has density `k(k-1) t^{k-2}`, giving `m! a^{k-1+m}/(k-1+m)!`
/// with `a = 2R`.
fn one_d_moment(m: usize, k: usize, a: f64) -> f64 {
    let e = k - 1 + m;
    factorial(m) * (e as f64 * a.ln() - ln_factorial(e)).exp()
}

fn ln_factorial(n: usize) -> f64 {
    (1..=n).map(|k| (k as f64).ln()).sum()
}

fn one_d_term(p: &DMatrix<f64>, k: usize, a: f64) -> DMatrix<f64> {
    let mut t = DMatrix::zeros(2, 2);
    for i in 0..2 {
        for j in 0..2 {
            let mut acc = 0.0;
            for s in i..2 {
                for q in j..2 {
                    acc += p[(i, s)] * p[(j, q)] * one_d_moment(s + q, k, a);
                }
            }
            t[(i, j)] = acc;
        }
    }
    t
}

/// Exact truncated series in `d = 1`, same stopping rule as [`sigma_series`].
pub fn exact_sigma_series_1d(r: f64, cfg: &SeriesConfig) -> Result<SigmaSeries> {
    let p = p_coefficients(1, r)?;
    let a = 2.0 * r;
    assemble(1, r, cfg, |k| {
        let matrix = one_d_term(&p, k, a);
        Ok(SeriesTerm {
            k,
            magnitude: max_abs(&matrix),
            matrix,
            stderr: DMatrix::zeros(2, 2),
            samples: 0,
        })
    })
}

/// `Σ_{j > m} a^j / j!`, summed directly so small `a` keeps full precision.
fn exp_tail(m: usize, a: f64) -> f64 {
    let mut term = (0..=m).fold(1.0, |t, j| if j == 0 { 1.0 } else { t * a / j as f64 });
    let mut parts = vec![];
    let mut j = m;
    loop {
        j += 1;
        term *= a / j as f64;
        parts.push(term);
        if term < 1e-18 * parts[0] && j > m + 2 || j > 10_000 {
            break;
        }
    }
    pairwise_sum(&parts)
}

/// The full series in `d = 1`, summed in closed form.
pub fn exact_sigma_1d(r: f64) -> Result<DMatrix<f64>> {
    let p = p_coefficients(1, r)?;
    let a = 2.0 * r;
    let total = |m: usize| factorial(m) * exp_tail(m, a);
    let mut t = DMatrix::zeros(2, 2);
    for i in 0..2 {
        for j in 0..2 {
            let mut acc = 0.0;
            for s in i..2 {
                for q in j..2 {
                    acc += p[(i, s)] * p[(j, q)] * total(s + q);
                }
            }
            t[(i, j)] = acc;
        }
    }
    Ok(t)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GapRecord {
    pub entries: DMatrix<f64>,
    pub max_gap: f64,
    pub argmax: (usize, usize),
}

/// Entrywise `|Σ_n - Σ|`.
pub fn covariance_gap_report(sigma_n: &DMatrix<f64>, sigma: &DMatrix<f64>) -> Result<GapRecord> {
    if sigma_n.shape() != sigma.shape() {
        return Err(Error::DimensionMismatch {
            expected: sigma.nrows(),
            got: sigma_n.nrows(),
        });
    }
    let entries = (sigma_n - sigma).map(f64::abs);
    let mut max_gap = 0.0;
    let mut argmax = (0, 0);
    for i in 0..entries.nrows() {
        for j in 0..entries.ncols() {
            if entries[(i, j)] > max_gap {
                max_gap = entries[(i, j)];
                argmax = (i, j);
            }
        }
    }
    Ok(GapRecord {
        entries,
        max_gap,
        argmax,
    })
}

/// Log-log slope of the max-entry gap across an `n`-grid.
pub fn fit_gap_exponent(ns: &[usize], gaps: &[GapRecord]) -> Option<LogLogFit> {
    let xs: Vec<f64> = ns.iter().map(|n| *n as f64).collect();
    let ys: Vec<f64> = gaps.iter().map(|g| g.max_gap).collect();
    loglog_fit(&xs, &ys)
}
