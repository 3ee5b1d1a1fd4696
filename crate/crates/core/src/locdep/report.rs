//! Bound reports for nearest-neighbour statistics.
//!
//! The universal constants of the local-dependence bounds are not known;
//! they enter as configured values (default 1), so only the rates of the
//! reported numbers are meaningful.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::bounds::{BoundReport, Formula, SmoothnessBudget, Term, TheoremTag};
use crate::error::{Error, Result};
use crate::linalg::matrix_norms;
use crate::resample::CoordLaw;
use crate::rng::{par_replicates, stream};
use crate::stats::{sample_covariance, Estimate};

use super::cones::alpha_cones;
use super::features::KnnBallFeatures;
use super::knn::delta_statistic;
use crate::functionals::Functional;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KnnReportConfig {
    /// Moment order used for `η_p`; at least 8, at least 12 for the convex bound.
    pub p: f64,
    pub reps: usize,
    /// Constant of the smooth bounds.
    pub c_const: f64,
    /// Constant of the convex bound.
    pub c_tilde: f64,
    pub budget: SmoothnessBudget,
    pub alpha_override: Option<usize>,
    pub seed: u64,
}

impl KnnReportConfig {
    pub fn new(p: f64, reps: usize, seed: u64) -> Self {
        KnnReportConfig {
            p,
            reps,
            c_const: 1.0,
            c_tilde: 1.0,
            budget: SmoothnessBudget {
                m1: 1.0,
                m2: 1.0,
                m3: 1.0,
                m2_tilde: 1.0,
            },
            alpha_override: None,
            seed,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LocalDependenceReport {
    pub n: usize,
    pub k: usize,
    pub p: f64,
    pub reps: usize,
    pub alpha: usize,
    pub delta_moment4: Estimate,
    /// `E M^8`, `E M^10`, `E M^12`.
    pub m_moments: [Estimate; 3],
    pub eta_p: Estimate,
    /// `Σ_j E‖Δ_j f‖³`, equal to `γ₁`.
    pub gamma1: Estimate,
    /// `(Σ_j E‖Δ_j f‖⁴)^{1/2}`.
    pub gamma2: Estimate,
    pub sigma: Vec<Vec<f64>>,
    pub sigma_inv_opnorm: Option<f64>,
    pub smooth_c3: BoundReport,
    pub smooth_c2: Option<BoundReport>,
    pub convex_general: Option<BoundReport>,
    pub knn_smooth: BoundReport,
    /// Absent when `p < 12` or `Σ` is singular.
    pub knn_convex: Option<BoundReport>,
    pub max_delta: usize,
    /// `α (k+1)(k+5) + 1`.
    pub delta_bound: usize,
    /// Replicates violating `M ≤ 4 n^{-1/2} α k M_f`.
    pub m_bound_violations: usize,
    /// Largest observed `M / (4 n^{-1/2} α k M_f)`.
    pub m_bound_ratio: f64,
    pub c_const: f64,
    pub c_tilde: f64,
}

struct Row {
    m: f64,
    sum3: f64,
    sum4: f64,
    delta: usize,
    eta: f64,
    w: Vec<f64>,
    m_f: f64,
}

fn nrm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

fn moment(rows: &[Row], g: impl Fn(&Row) -> f64) -> Estimate {
    Estimate::from_samples(&rows.iter().map(g).collect::<Vec<_>>())
}

/// Estimates the moments entering the local-dependence bounds for
/// `f = n^{-1/2} Σ_l f_l` and assembles them.
pub fn knn_bound_report<L: CoordLaw<Vec<f64>> + ?Sized>(
    f: &KnnBallFeatures,
    law: &L,
    cfg: &KnnReportConfig,
) -> Result<LocalDependenceReport> {
    if !(cfg.p >= 8.0) {
        return Err(Error::invalid(
            "p",
            format!("the nearest-neighbour bounds need p >= 8 (p >= 12 for the convex bound), got {}", cfg.p),
        ));
    }
    if cfg.reps < 2 {
        return Err(Error::invalid("reps", "need at least 2"));
    }
    let n = f.n;
    let k = f.k;
    let alpha = alpha_cones(f.m, cfg.alpha_override)?.count;
    let rows = par_replicates(cfg.seed, stream::KNN, cfg.reps, |_, rng| {
        let x = law.sample_n(n, rng);
        let xp = law.sample_n(n, rng);
        let mut ext = x.clone();
        ext.extend(law.sample_n(4, rng));
        let sweep = f.sweep(&x, &xp)?;
        let norms: Vec<f64> = sweep.deltas.iter().map(|d| nrm(d)).collect();
        Ok(Row {
            m: norms.iter().fold(0.0f64, |a, b| a.max(*b)),
            sum3: norms.iter().map(|v| v.powi(3)).sum(),
            sum4: norms.iter().map(|v| v.powi(4)).sum(),
            delta: delta_statistic(&ext, k)?,
            eta: sweep.point_norms.iter().map(|v| v.powf(cfg.p)).sum::<f64>() / n as f64,
            w: f.eval(&x)?,
            m_f: sweep.m_f,
        })
    })?;

    let delta4 = moment(&rows, |r| (r.delta as f64).powi(4));
    let m8 = moment(&rows, |r| r.m.powi(8));
    let m10 = moment(&rows, |r| r.m.powi(10));
    let m12 = moment(&rows, |r| r.m.powi(12));
    let eta = moment(&rows, |r| r.eta);
    let gamma1 = moment(&rows, |r| r.sum3);
    let (gamma2, _) = moment(&rows, |r| r.sum4).root(2.0);
    let sigma = sample_covariance(&rows.iter().map(|r| r.w.clone()).collect::<Vec<_>>());
    let norms = matrix_norms(&sigma)?;
    let inv = norms.inv_op.filter(|_| norms.posdef);

    let scale_m = 4.0 / (n as f64).sqrt() * alpha as f64 * k as f64;
    let mut violations = 0;
    let mut ratio = 0.0f64;
    for r in &rows {
        let cap = scale_m * r.m_f;
        if r.m > cap * (1.0 + 1e-12) {
            violations += 1;
        }
        if cap > 0.0 {
            ratio = ratio.max(r.m / cap);
        }
    }

    let nf = n as f64;
    let core = m8.value.max(0.0).powf(0.25) * delta4.value.powf(0.25) * nf.sqrt();
    let g3t = m10.value.max(0.0).powf(1.0 / 6.0) * delta4.value.powf(1.0 / 6.0) * nf.powf(1.0 / 3.0);
    let g4t = m12.value.max(0.0).powf(1.0 / 8.0) * delta4.value.powf(1.0 / 8.0) * nf.powf(0.25);
    let b = &cfg.budget;
    let c = cfg.c_const;

    let smooth_c3 = BoundReport::from_formula(
        TheoremTag::LocalSmooth,
        Formula::Sum(vec![
            Term::new("C m2_tilde * E[M^8]^1/4 E[delta^4]^1/4 n^1/2", c * b.m2_tilde, core),
            Term::new("m3/12 * sum_j E|D_j f|^3", b.m3 / 12.0, gamma1.value),
        ]),
    );
    let smooth_c2 = inv.map(|inv| {
        BoundReport::from_formula(
            TheoremTag::LocalSmooth,
            Formula::Sum(vec![
                Term::new("C m1 |Sigma^-1| * E[M^8]^1/4 E[delta^4]^1/4 n^1/2", c * b.m1 * inv, core),
                Term::new(
                    "m2 sqrt(2 pi)/16 |Sigma^-1| * sum_j E|D_j f|^3",
                    b.m2 * (2.0 * std::f64::consts::PI).sqrt() / 16.0 * inv,
                    gamma1.value,
                ),
            ]),
        )
    });
    let d = f.dim() as f64;
    let prefactor = |inv: f64, constant: f64| {
        vec![
            Term::new("constant", 1.0, constant),
            Term::new("d^4", 1.0, d.powi(4)),
            Term::new("max(1, |Sigma^-1|^2)", 1.0, (inv * inv).max(1.0)),
        ]
    };
    let convex_general = inv.map(|inv| {
        BoundReport::from_formula(
            TheoremTag::LocalConvex,
            Formula::PrefactorMax {
                factors: prefactor(inv, c),
                candidates: vec![
                    Term::new("E[M^8]^1/4 E[delta^4]^1/4 n^1/2", 1.0, core),
                    Term::new("gamma1", 1.0, gamma1.value),
                    Term::new("gamma2", 1.0, gamma2.value),
                    Term::new("gamma3_tilde", 1.0, g3t),
                    Term::new("gamma4_tilde", 1.0, g4t),
                ],
            },
        )
    });

    let p = cfg.p;
    let a = alpha as f64;
    let kf = k as f64;
    let e = eta.value.max(0.0);
    let knn_smooth = BoundReport::from_formula(
        TheoremTag::LocalSmooth,
        Formula::Sum(vec![
            Term::new(
                "C a^3 k^4 eta^(2/p) n^-(p-8)/(2p)",
                c * a.powi(3) * kf.powi(4),
                e.powf(2.0 / p) * nf.powf(-(p - 8.0) / (2.0 * p)),
            ),
            Term::new(
                "C a^3 k^3 eta^(3/p) n^-(p-6)/(2p)",
                c * a.powi(3) * kf.powi(3),
                e.powf(3.0 / p) * nf.powf(-(p - 6.0) / (2.0 * p)),
            ),
        ]),
    )
    .ingredient("alpha", a)
    .ingredient("eta_p", e);
    let knn_convex = match inv {
        Some(inv) if p >= 12.0 => Some(
            BoundReport::from_formula(
                TheoremTag::LocalConvex,
                Formula::PrefactorMax {
                    factors: prefactor(inv, cfg.c_tilde),
                    candidates: vec![
                        Term::new("a^3 k^4 eta^(2/p) n^-(p-8)/(2p)", a.powi(3) * kf.powi(4), e.powf(2.0 / p) * nf.powf(-(p - 8.0) / (2.0 * p))),
                        Term::new("a^3 k^3 eta^(3/p) n^-(p-6)/(2p)", a.powi(3) * kf.powi(3), e.powf(3.0 / p) * nf.powf(-(p - 6.0) / (2.0 * p))),
                        Term::new("a^2 k^2 eta^(2/p) n^-(p-4)/(2p)", a.powi(2) * kf.powi(2), e.powf(2.0 / p) * nf.powf(-(p - 4.0) / (2.0 * p))),
                        Term::new("a^(10/3) k^(4/3) eta^(5/(3p)) n^-(3p-20)/(6p)", a.powf(10.0 / 3.0) * kf.powf(4.0 / 3.0), e.powf(5.0 / (3.0 * p)) * nf.powf(-(3.0 * p - 20.0) / (6.0 * p))),
                        Term::new("a^2 k^(5/2) eta^(3/(2p)) n^-(p-6)/(2p)", a.powi(2) * kf.powf(2.5), e.powf(1.5 / p) * nf.powf(-(p - 6.0) / (2.0 * p))),
                    ],
                },
            )
            .ingredient("alpha", a)
            .ingredient("eta_p", e),
        ),
        _ => None,
    };

    Ok(LocalDependenceReport {
        n,
        k,
        p,
        reps: cfg.reps,
        alpha,
        delta_moment4: delta4,
        m_moments: [m8, m10, m12],
        eta_p: eta,
        gamma1,
        gamma2,
        sigma: matrix_rows(&sigma),
        sigma_inv_opnorm: inv,
        smooth_c3,
        smooth_c2,
        convex_general,
        knn_smooth,
        knn_convex,
        max_delta: rows.iter().map(|r| r.delta).max().unwrap_or(0),
        delta_bound: alpha * (k + 1) * (k + 5) + 1,
        m_bound_violations: violations,
        m_bound_ratio: ratio,
        c_const: cfg.c_const,
        c_tilde: cfg.c_tilde,
    })
}

fn matrix_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|r| m.row(r).iter().copied().collect()).collect()
}
