//! Enumeration-oracle and geometry checks run by `selftest`.

use nalgebra::DMatrix;
use serde::Serialize;

use super::output::{fmt_f64, Table};
use crate::boolean::{intersection_volumes_2d, union_volumes, union_volumes_2d};
use crate::bounds::{exact_bn_terms, BnConfig};
use crate::error::Result;
use crate::functionals::{FnFunctional, LinearStatistic};
use crate::limiting::{exact_sigma_1d, exact_sigma_series_1d, pp_identity, KappaTable, SeriesConfig};
use crate::locdep::{interaction_rule_graph, noninteracting, KnnBallFeatures};
use crate::resample::enumerate::{covariance_exact, expected_t_exact, lemma_covariance_decomposition, EnumCaps};
use crate::resample::{CoordLaw, FiniteLaw, UniformCube};
use crate::rng::{par_replicates, rng_for, stream};

/// Deliberate corruptions, used to check that failures are reported by name.
#[derive(Debug, Clone, Default)]
pub struct Faults {
    /// Replaces the volume-of-unit-ball table under test.
    pub kappa_table: Option<KappaTable>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    /// Largest observed discrepancy, or a count for exact checks.
    pub observed: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelftestReport {
    pub checks: Vec<Check>,
}

impl SelftestReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> Vec<&'static str> {
        self.checks.iter().filter(|c| !c.passed).map(|c| c.name).collect()
    }

    pub fn table(&self) -> Table {
        let mut t = Table::new(&["check", "status", "observed", "tolerance"]);
        for c in &self.checks {
            t.push(vec![
                c.name.into(),
                if c.passed { "PASS" } else { "FAIL" }.into(),
                fmt_f64(c.observed),
                fmt_f64(c.tolerance),
            ]);
        }
        t
    }
}

fn within(name: &'static str, observed: f64, tolerance: f64) -> Check {
    Check { name, passed: observed <= tolerance, observed, tolerance }
}

fn errored(name: &'static str) -> Check {
    Check { name, passed: false, observed: f64::NAN, tolerance: 0.0 }
}

fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).abs().max()
}

fn lemma_check() -> Result<f64> {
    let law = FiniteLaw::new(vec![0.0, 1.0, 3.0], vec![0.2, 0.5, 0.3])?;
    let pairs: Vec<(FnFunctional<f64>, FnFunctional<f64>)> = vec![
        (FnFunctional::new(1, |x: &[f64]| vec![x[0] * x[1] + x[2]]), FnFunctional::new(1, |x: &[f64]| vec![x[1].max(x[2])])),
        (FnFunctional::new(1, |x: &[f64]| vec![(x[0] - x[2]).abs()]), FnFunctional::new(1, |x: &[f64]| vec![x.iter().sum::<f64>().powi(2)])),
    ];
    let mut worst = 0.0f64;
    for (g, h) in &pairs {
        let (lhs, rhs) = lemma_covariance_decomposition(g, h, &law, 3, EnumCaps::default())?;
        worst = worst.max((lhs - rhs).abs());
    }
    Ok(worst)
}

fn expected_t_check() -> Result<f64> {
    let law = FiniteLaw::uniform(vec![-1.0, 0.5, 2.0]);
    let f = FnFunctional::new(2, |x: &[f64]| vec![x[0] * x[1] + x[2], (x[0] + x[2]).sin()]);
    let cov = covariance_exact(&f, &law, 3, EnumCaps::default())?;
    let et = expected_t_exact(&f, &law, 3, EnumCaps::default())?;
    Ok(max_abs_diff(&cov, &et))
}

fn linear_structure_check() -> Result<f64> {
    let law = FiniteLaw::uniform(vec![-1.0, 0.0, 1.0]);
    let t = exact_bn_terms(&LinearStatistic::new(1), &law, 3, EnumCaps::default(), &BnConfig::new(64, 0))?;
    Ok(t.bn.value.abs().max(t.bn_prime.value.abs()))
}

fn kappa_check(table: &KappaTable) -> f64 {
    use statrs::function::gamma::gamma;
    (0..table.kappa.len())
        .map(|m| {
            let h = m as f64 / 2.0;
            let want = std::f64::consts::PI.powf(h) / gamma(h + 1.0);
            (table.get(m) - want).abs() / want
        })
        .fold(0.0, f64::max)
}

fn disc_check() -> Result<f64> {
    use std::f64::consts::PI;
    // two unit discs at distance 1: lens area 2π/3 − √3/2
    let lens = 2.0 * PI / 3.0 - 3f64.sqrt() / 2.0;
    let u = union_volumes_2d(&[[0.0, 0.0], [1.0, 0.0]], 1.0)?;
    let i = intersection_volumes_2d(&[[0.0, 0.0], [1.0, 0.0]], 1.0);
    let ring = union_volumes_2d(
        &(0..6).map(|k| {
            let a = k as f64 * PI / 3.0;
            [1.8 * a.cos(), 1.8 * a.sin()]
        }).collect::<Vec<_>>(),
        1.0,
    )?;
    Ok([
        (u.v[2] - (2.0 * PI - lens)).abs(),
        (i[2] - lens).abs(),
        (u.v[0] - 1.0).abs(),
        // six discs around an uncovered centre: one hole
        (ring.v[0] - 0.0).abs(),
        u.residual.abs(),
    ]
    .into_iter()
    .fold(0.0, f64::max))
}

fn interval_check() -> f64 {
    let v = union_volumes(&[(0.0, 1.0), (0.5, 2.0), (3.0, 4.0)]);
    (v[0] - 2.0).abs().max((v[1] - 3.0).abs())
}

fn pp_check() -> Result<f64> {
    let mut worst = 0.0f64;
    for (r, len) in [(0.3, 0.7), (0.8, 2.0), (1.5, 0.1)] {
        for i in 0..=1 {
            let (lhs, rhs) = pp_identity(1, r, &[1.0, len], i, 40)?;
            worst = worst.max((lhs - rhs).abs());
        }
    }
    Ok(worst)
}

fn series_check() -> Result<f64> {
    let r = 0.3;
    let cfg = SeriesConfig { eps_rel: 1e-16, ..SeriesConfig::new(40, 1, 0) };
    let s = exact_sigma_series_1d(r, &cfg)?;
    Ok(max_abs_diff(&s.sigma, &exact_sigma_1d(r)?))
}

fn knn_check() -> Result<f64> {
    let (n, k) = (24, 2);
    let law = UniformCube { d: 2, half_width: (n as f64).sqrt() / 2.0 };
    let f = KnnBallFeatures::new(2, n, k, vec![0.5, 0.9], vec![0.0, 0.0])?;
    let mut rng = rng_for(0, stream::SELFTEST, 1);
    let mut violations = 0;
    for _ in 0..200 {
        let x = law.sample_n(n, &mut rng);
        let xp = law.sample_n(n, &mut rng);
        let (i, j) = (0, 1);
        let swap = |base: &[Vec<f64>], idx: &[usize]| {
            let mut y = base.to_vec();
            for &t in idx {
                y[t] = xp[t].clone();
            }
            y
        };
        let configs = [x.clone(), swap(&x, &[i]), swap(&x, &[j]), swap(&x, &[i, j])];
        let mut absent = true;
        for c in &configs {
            absent &= !interaction_rule_graph(c, k)?.has_edge(i, j);
        }
        if absent && !noninteracting(&f, &x, &xp, i, j)? {
            violations += 1;
        }
    }
    Ok(violations as f64)
}

/// The same reduction under one worker and under several must agree bitwise.
fn determinism_check() -> Result<f64> {
    let work = || {
        par_replicates(11, stream::SELFTEST, 257, |_, rng| {
            let law = UniformCube::standardized(2);
            let x = law.sample_n(16, rng);
            Ok(x.iter().map(|p| p[0] * p[1]).sum::<f64>())
        })
    };
    let pool = |t: usize| rayon::ThreadPoolBuilder::new().num_threads(t).build().map_err(|e| crate::Error::invalid("threads", e.to_string()));
    let a = pool(1)?.install(work)?;
    let b = pool(4)?.install(work)?;
    Ok(a.iter().zip(&b).filter(|(x, y)| x.to_bits() != y.to_bits()).count() as f64)
}

pub fn selftest() -> SelftestReport {
    selftest_with(&Faults::default())
}

pub fn selftest_with(faults: &Faults) -> SelftestReport {
    let kappa = faults.kappa_table.clone().unwrap_or_else(|| KappaTable::new(8));
    let run = |name: &'static str, tol: f64, r: Result<f64>| match r {
        Ok(v) => within(name, v, tol),
        Err(_) => errored(name),
    };
    let checks = vec![
        run("covariance-decomposition", 1e-12, lemma_check()),
        run("expected-t-equals-covariance", 1e-12, expected_t_check()),
        run("linear-statistic-bn-vanishes", 0.0, linear_structure_check()),
        within("unit-ball-volumes", kappa_check(&kappa), 1e-12),
        run("disc-union-geometry", 1e-9, disc_check()),
        within("interval-union-geometry", interval_check(), 1e-15),
        run("p-coefficient-identity", 1e-8, pp_check()),
        run("limiting-covariance-series", 1e-12, series_check()),
        run("knn-noninteraction", 0.0, knn_check()),
        run("worker-count-determinism", 0.0, determinism_check()),
    ];
    SelftestReport { checks }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clean_run_passes() {
        let r = selftest();
        assert!(r.passed(), "{:?}", r.failures());
        assert_eq!(r, selftest());
    }

    #[test]
    fn corrupted_kappa_table_is_named() {
        let mut t = KappaTable::new(8);
        t.kappa[3] *= 1.001;
        let r = selftest_with(&Faults { kappa_table: Some(t) });
        assert_eq!(r.failures(), vec!["unit-ball-volumes"]);
    }
}
