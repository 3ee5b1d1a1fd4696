//! The experiment kinds behind `run`.

use nalgebra::DMatrix;
use serde_json::{json, Value};

use super::config::{ExperimentConfig, ExperimentKind, LawKind};
use super::output::{fmt_f64, Table};
use crate::boolean::{empirical_covariance, exact_sigma_n_1d, BooleanFunctional, GermLaw};
use crate::bounds::{
    assemble_convex_bound, assemble_smooth_bound, estimate_gamma12, estimate_gamma34, estimate_sigma_term,
    GammaEstimates, Method, ZeroTest,
};
use crate::distance::{
    rate_study, sample_statistic, smooth_discrepancy, ClassSpec, GaussianBump, GaussianTarget, TestFunction,
};
use crate::error::Result;
use crate::functionals::LinearStatistic;
use crate::limiting::{covariance_gap_report, exact_sigma_1d, exact_sigma_series_1d, sigma_series, SeriesConfig};
use crate::locdep::{knn_bound_report, KnnBallFeatures, KnnReportConfig};
use crate::resample::{CoordLaw, CubeVertices, StandardNormalVec, UniformCube};
use crate::rng::derive_seed;
use crate::stats::{loglog_fit, Estimate};

/// Per-experiment stream tags for splitting the master seed by grid point.
const GRID_STREAM: u64 = 0x100;

pub struct Outcome {
    pub table: Table,
    pub json: Value,
    pub summary: String,
}

fn law_for(kind: LawKind, d: usize) -> Box<dyn CoordLaw<Vec<f64>>> {
    match kind {
        LawKind::UniformCube => Box::new(UniformCube::standardized(d)),
        LawKind::CubeVertices => Box::new(CubeVertices { d }),
        LawKind::Normal => Box::new(StandardNormalVec { d }),
    }
}

fn grid_seed(cfg: &ExperimentConfig, n: usize) -> u64 {
    derive_seed(cfg.seed, GRID_STREAM, n as u64)
}

fn est(row: &mut Table, n: usize, name: &str, e: Estimate) {
    row.push(vec![n.to_string(), name.into(), fmt_f64(e.value), fmt_f64(e.stderr)]);
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Outcome> {
    cfg.validate()?;
    match cfg.kind {
        ExperimentKind::Gamma => gamma(cfg),
        ExperimentKind::BooleanModel => boolean_model(cfg),
        ExperimentKind::SigmaSeries => series(cfg),
        ExperimentKind::Knn => knn(cfg),
        ExperimentKind::RateStudy => rates(cfg),
    }
}

/// Bound ingredients for the standardized sum, the assembled bounds and the
/// measured smooth discrepancy they should dominate.
fn gamma(cfg: &ExperimentConfig) -> Result<Outcome> {
    let (m, e) = (&cfg.model, &cfg.estimator);
    let d = m.d;
    let f = LinearStatistic::new(d);
    let law = law_for(m.law, d);
    let sigma = DMatrix::identity(d, d);
    let bump = GaussianBump::new(e.bump_width)?;
    let budget = bump.budget(d);
    let target = GaussianTarget::identity(d);
    let mut table = Table::new(&["n", "quantity", "value", "stderr"]);
    let mut per_n = Vec::new();
    let mut uncovered = Vec::new();
    for &n in &m.n_grid {
        let s = grid_seed(cfg, n);
        let g12 = estimate_gamma12(&f, law.as_ref(), n, e.reps, s)?;
        let g34 = estimate_gamma34(&f, law.as_ref(), n, e.reps, e.inner_reps, s, ZeroTest::Exact)?;
        let st = estimate_sigma_term(&f, &sigma, law.as_ref(), n, e.reps, e.inner_reps, s)?;
        let g = GammaEstimates::combine(&g12, &g34, &st, Method::NestedMc);
        let smooth = assemble_smooth_bound(&g, &budget, &sigma, true)?;
        let convex = assemble_convex_bound(&g, &sigma)?;
        let w = sample_statistic(&f, law.as_ref(), n, e.samples, s)?;
        let disc = smooth_discrepancy(&bump, &w, &target, s)?;
        for (name, v) in [
            ("gamma1", g.gamma1),
            ("gamma2", g.gamma2),
            ("gamma3", g.gamma3),
            ("gamma4", g.gamma4),
            ("sigma_term", g.sigma_term),
        ] {
            est(&mut table, n, name, v);
        }
        let exact = |v: f64| Estimate::exact(v);
        est(&mut table, n, "smooth_bound_c3", exact(smooth.nonneg.bound_value));
        if let Some(p) = &smooth.posdef {
            est(&mut table, n, "smooth_bound_c2", exact(p.bound_value));
        }
        est(&mut table, n, "convex_bound", exact(convex.bound_value));
        est(&mut table, n, "smooth_discrepancy", Estimate { value: disc.value, stderr: disc.stderr, reps: e.samples });
        if disc.value > smooth.nonneg.bound_value {
            uncovered.push(n);
        }
        per_n.push(json!({"n": n, "gammas": g, "smooth": smooth, "convex": convex, "discrepancy": disc}));
    }
    let summary = if uncovered.is_empty() {
        format!("gamma: {} grid points; smooth bound with C = 1 covers the measured discrepancy everywhere", m.n_grid.len())
    } else {
        format!("gamma: C_config too small, measured discrepancy exceeds the smooth bound at n = {uncovered:?}")
    };
    Ok(Outcome {
        table,
        json: json!({"budget": budget, "results": per_n, "uncovered": uncovered}),
        summary,
    })
}

fn boolean_model(cfg: &ExperimentConfig) -> Result<Outcome> {
    let (m, e) = (&cfg.model, &cfg.estimator);
    let d = m.d;
    let limit = if d == 1 {
        Some(exact_sigma_1d(m.r)?)
    } else {
        let sc = SeriesConfig::new(e.k_max, e.mc_samples, cfg.seed);
        Some(sigma_series(d, m.r, &sc)?.sigma)
    };
    let mut table = Table::new(&["n", "i", "j", "empirical", "stderr", "exact_n", "limit", "gap"]);
    let mut gaps = Vec::new();
    let mut per_n = Vec::new();
    for &n in &m.n_grid {
        let f = BooleanFunctional::uncentered(d, n, m.r)?;
        let cov = empirical_covariance(&f, &GermLaw::new(d, n), n, e.reps, grid_seed(cfg, n))?;
        let exact_n = (d == 1).then(|| exact_sigma_n_1d(n, m.r));
        let reference = exact_n.as_ref().unwrap_or(&cov.sigma);
        let gap = limit.as_ref().map(|l| covariance_gap_report(reference, l)).transpose()?;
        for i in 0..=d {
            for j in i..=d {
                table.push(vec![
                    n.to_string(),
                    i.to_string(),
                    j.to_string(),
                    fmt_f64(cov.sigma[(i, j)]),
                    fmt_f64(cov.stderr[(i, j)]),
                    exact_n.as_ref().map_or(String::new(), |x| fmt_f64(x[(i, j)])),
                    limit.as_ref().map_or(String::new(), |x| fmt_f64(x[(i, j)])),
                    gap.as_ref().map_or(String::new(), |g| fmt_f64(g.entries[(i, j)])),
                ]);
            }
        }
        if let Some(g) = &gap {
            gaps.push(g.clone());
        }
        per_n.push(json!({"n": n, "empirical": cov, "exact_n": exact_n, "gap": gap}));
    }
    let fit = crate::limiting::fit_gap_exponent(&m.n_grid, &gaps);
    let summary = match &fit {
        Some(f) => format!(
            "boolean-model d={d} R={}: gap exponent {:.3} ± {:.3} ({} vs limit)",
            m.r,
            f.slope,
            1.96 * f.slope_stderr,
            if d == 1 { "exact Σ_n" } else { "empirical Σ_n" }
        ),
        None => format!("boolean-model d={d} R={}: too few grid points for a gap fit", m.r),
    };
    Ok(Outcome {
        table,
        json: json!({"limit": limit, "results": per_n, "gap_fit": fit}),
        summary,
    })
}

fn series(cfg: &ExperimentConfig) -> Result<Outcome> {
    let (m, e) = (&cfg.model, &cfg.estimator);
    let sc = SeriesConfig::new(e.k_max, e.mc_samples, cfg.seed);
    let s = if m.d == 1 { exact_sigma_series_1d(m.r, &sc)? } else { sigma_series(m.d, m.r, &sc)? };
    let mut table = Table::new(&["k", "i", "j", "value", "stderr"]);
    let d = m.d;
    for t in &s.terms {
        for i in 0..=d {
            for j in i..=d {
                table.push(vec![
                    t.k.to_string(),
                    i.to_string(),
                    j.to_string(),
                    fmt_f64(t.matrix[(i, j)]),
                    fmt_f64(t.stderr[(i, j)]),
                ]);
            }
        }
    }
    for i in 0..=d {
        for j in i..=d {
            table.push(vec!["total".into(), i.to_string(), j.to_string(), fmt_f64(s.sigma[(i, j)]), fmt_f64(s.stderr[(i, j)])]);
        }
    }
    let min_eig = crate::linalg::matrix_norms(&s.sigma)?.min_eig;
    let summary = format!(
        "sigma-series d={d} R={}: {} terms, converged={}, remainder {:.3e}, min eigenvalue {:.4e}",
        m.r, s.k_used, s.converged, s.remainder, min_eig
    );
    Ok(Outcome { table, json: json!({"series": s, "min_eigenvalue": min_eig}), summary })
}

fn knn(cfg: &ExperimentConfig) -> Result<Outcome> {
    let (m, e) = (&cfg.model, &cfg.estimator);
    let d = m.d;
    let mut table = Table::new(&["n", "quantity", "value", "stderr"]);
    let mut per_n = Vec::new();
    let mut decay = Vec::new();
    for &n in &m.n_grid {
        let s = grid_seed(cfg, n);
        // unit intensity window
        let law = UniformCube { d, half_width: (n as f64).powf(1.0 / d as f64) / 2.0 };
        let probe = KnnBallFeatures::new(d, n, m.k, m.radii.clone(), vec![0.0; m.radii.len()])?;
        let center: Vec<f64> = probe.pilot_center(&law, e.pilot_reps, s)?.iter().map(|c| c.value).collect();
        let f = KnnBallFeatures::new(d, n, m.k, m.radii.clone(), center)?;
        let rc = KnnReportConfig::new(m.p, e.reps, s);
        let r = knn_bound_report(&f, &law, &rc)?;
        let main = r.knn_convex.as_ref().unwrap_or(&r.knn_smooth).bound_value;
        decay.push((n as f64, main));
        let exact = Estimate::exact;
        est(&mut table, n, "knn_smooth", exact(r.knn_smooth.bound_value));
        if let Some(c) = &r.knn_convex {
            est(&mut table, n, "knn_convex", exact(c.bound_value));
        }
        est(&mut table, n, "gamma1", r.gamma1);
        est(&mut table, n, "gamma2", r.gamma2);
        est(&mut table, n, "eta_p", r.eta_p);
        est(&mut table, n, "delta_moment4", r.delta_moment4);
        est(&mut table, n, "max_delta", exact(r.max_delta as f64));
        est(&mut table, n, "delta_bound", exact(r.delta_bound as f64));
        est(&mut table, n, "m_bound_violations", exact(r.m_bound_violations as f64));
        per_n.push(serde_json::to_value(&r)?);
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = decay.iter().copied().unzip();
    let fit = loglog_fit(&xs, &ys);
    let target = -(m.p - 8.0) / (2.0 * m.p);
    let summary = match &fit {
        Some(f) => format!("knn d={d} k={} p={}: report slope {:.3} (target {:.3})", m.k, m.p, f.slope, target),
        None => format!("knn d={d} k={} p={}: too few grid points for a slope", m.k, m.p),
    };
    Ok(Outcome {
        table,
        json: json!({"results": per_n, "slope_fit": fit, "target_slope": target}),
        summary,
    })
}

fn rates(cfg: &ExperimentConfig) -> Result<Outcome> {
    let (m, e) = (&cfg.model, &cfg.estimator);
    let d = m.d;
    let f = LinearStatistic::new(d);
    let law = law_for(m.law, d);
    let spec = ClassSpec {
        directions: e.directions,
        thresholds: e.thresholds,
        rect_grid: e.rect_grid,
        ball_radii: e.ball_radii,
        mc_samples: e.mc_samples,
        ..ClassSpec::default()
    };
    let study = rate_study(&f, law.as_ref(), &GaussianTarget::identity(d), &m.n_grid, e.samples, &spec, cfg.seed)?;
    let mut table = Table::new(&["n", "metric", "value", "stderr", "class_size", "envelope", "sample_seed"]);
    for r in &study.rows {
        table.push(vec![
            r.n.to_string(),
            "proxy_convex".into(),
            fmt_f64(r.value),
            fmt_f64(r.mc_stderr),
            r.class_size.to_string(),
            fmt_f64(r.envelope),
            r.seed.to_string(),
        ]);
    }
    let summary = match (&study.fit, &study.fit_error) {
        (Some(f), _) => format!("rate-study d={d}: slope {:.3} ± {:.3}", f.slope, f.half_width),
        (None, Some(err)) => format!("rate-study d={d}: no fit ({err})"),
        _ => unreachable!(),
    };
    Ok(Outcome { table, json: serde_json::to_value(&study)?, summary })
}
