//! Covariance of the Boolean-model functional: Monte Carlo over scenes, and
//! closed forms in `d = 1` from the spacings of uniform points.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functionals::{check_finite, Functional};
use crate::resample::CoordLaw;
use crate::rng::{par_replicates, stream};
use crate::stats::{pairwise_sum, sample_covariance, sample_covariance_stderr, Estimate};

use super::{union_intrinsic_volumes, GermLaw};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CovarianceEstimate {
    pub sigma: DMatrix<f64>,
    pub stderr: DMatrix<f64>,
    pub mean: Vec<Estimate>,
    pub reps: usize,
}

/// Sample covariance of `W = f(X)` over independent draws of `n` coordinates.
pub fn empirical_covariance<T, F, L>(
    f: &F,
    law: &L,
    n: usize,
    replicates: usize,
    seed: u64,
) -> Result<CovarianceEstimate>
where
    T: Clone + Send + Sync,
    F: Functional<T> + ?Sized,
    L: CoordLaw<T> + ?Sized,
{
    if replicates < 2 {
        return Err(Error::invalid("replicates", "need at least 2"));
    }
    let rows = par_replicates(seed, stream::SCENES, replicates, |s, rng| {
        let x = law.sample_n(n, rng);
        let w = f.eval(&x).map_err(|e| e.in_context(format!("scene seed {s:#x}")))?;
        check_finite(&w, s)?;
        Ok(w)
    })?;
    let d = f.dim();
    let mean = (0..d)
        .map(|k| Estimate::from_samples(&rows.iter().map(|r| r[k]).collect::<Vec<_>>()))
        .collect();
    Ok(CovarianceEstimate {
        sigma: sample_covariance(&rows),
        stderr: sample_covariance_stderr(&rows),
        mean,
        reps: replicates,
    })
}

/// Pilot-run mean of `V(F_n)`, used as the centering of the functional.
/// Draws from its own stream so it is independent of any later run with the
/// same master seed.
pub fn pilot_center(d: usize, n: usize, r: f64, reps: usize, seed: u64) -> Result<Vec<Estimate>> {
    super::scene::check_dimension(d)?;
    if reps < 2 {
        return Err(Error::invalid("pilot reps", "need at least 2"));
    }
    let law = GermLaw::new(d, n);
    let rows = par_replicates(seed, stream::PILOT, reps, |s, rng| {
        let x = law.sample_n(n, rng);
        Ok(union_intrinsic_volumes(d, &x, r, Some(s))?.v)
    })?;
    Ok((0..=d)
        .map(|k| Estimate::from_samples(&rows.iter().map(|v| v[k]).collect::<Vec<_>>()))
        .collect())
}

/// Spacing moments for `n` uniform points on an interval of length `n`, with
/// grain diameter `a = 2R`. `X = min(G, a)`, `Y = 1[G > a]` for an interior
/// spacing `G`; indices `i != j` refer to two distinct spacings.
struct Spacings {
    m: f64,
    ex: f64,
    ey: f64,
    ex2: f64,
    exy: f64,
    exi_xj: f64,
    exi_yj: f64,
    eyi_yj: f64,
}

fn spacings(n: usize, r: f64) -> Spacings {
    let l = n as f64;
    let a = 2.0 * r;
    let nf = n as f64;
    // survival function of a single spacing is (1 - t/L)_+^n; the pair has (1 - (s+t)/L)_+^n
    let q = (1.0 - a / l).max(0.0);
    let q2 = (1.0 - 2.0 * a / l).max(0.0);
    let p = |b: f64, k: f64| b.powf(k);
    let c1 = l / (nf + 1.0);
    let c2 = l * l / ((nf + 1.0) * (nf + 2.0));
    Spacings {
        m: nf - 1.0,
        ey: p(q, nf),
        ex: c1 * (1.0 - p(q, nf + 1.0)),
        ex2: -2.0 * a * c1 * p(q, nf + 1.0) + 2.0 * c2 * (1.0 - p(q, nf + 2.0)),
        exy: a * p(q, nf),
        exi_xj: c2 * (1.0 - 2.0 * p(q, nf + 2.0) + p(q2, nf + 2.0)),
        exi_yj: c1 * (p(q, nf + 1.0) - p(q2, nf + 1.0)),
        eyi_yj: p(q2, nf),
    }
}

/// Exact `(E V_0(F_n), E V_1(F_n))` for `d = 1`.
pub fn exact_mean_1d(n: usize, r: f64) -> [f64; 2] {
    if n == 0 {
        return [0.0, 0.0];
    }
    let s = spacings(n, r);
    [1.0 + s.m * s.ey, 2.0 * r + s.m * s.ex]
}

/// Exact covariance `Σ_n` of `n^{-1/2}(V_0, V_1)` for `d = 1`.
///
/// With germs sorted, `V_0 = 1 + Σ Y_k` and `V_1 = 2R + Σ X_k` over the
/// `n - 1` interior spacings, and the spacings are exchangeable.
pub fn exact_sigma_n_1d(n: usize, r: f64) -> DMatrix<f64> {
    if n < 2 {
        return DMatrix::zeros(2, 2);
    }
    let s = spacings(n, r);
    let m = s.m;
    let pairs = m * (m - 1.0);
    let v00 = m * (s.ey - s.ey * s.ey) + pairs * (s.eyi_yj - s.ey * s.ey);
    let v11 = m * (s.ex2 - s.ex * s.ex) + pairs * (s.exi_xj - s.ex * s.ex);
    let v01 = m * (s.exy - s.ex * s.ey) + pairs * (s.exi_yj - s.ex * s.ey);
    let nf = n as f64;
    DMatrix::from_row_slice(2, 2, &[v00 / nf, v01 / nf, v01 / nf, v11 / nf])
}

/// Mean of the row vectors, by pairwise summation.
pub fn column_means(rows: &[Vec<f64>]) -> Vec<f64> {
    let d = rows.first().map_or(0, |r| r.len());
    (0..d)
        .map(|k| pairwise_sum(&rows.iter().map(|r| r[k]).collect::<Vec<_>>()) / rows.len() as f64)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boolean::BooleanFunctional;
    use crate::functionals::Constant;

    #[test]
    fn exact_moments_match_monte_carlo() {
        let (n, r) = (20, 0.3);
        let f = BooleanFunctional::uncentered(1, n, r).unwrap();
        let est = empirical_covariance(&f, &GermLaw::new(1, n), n, 40_000, 9).unwrap();
        let exact = exact_sigma_n_1d(n, r);
        for a in 0..2 {
            for b in 0..2 {
                let z = (est.sigma[(a, b)] - exact[(a, b)]).abs() / est.stderr[(a, b)];
                assert!(z < 4.5, "entry ({a},{b}): z = {z}");
            }
        }
        let mean = exact_mean_1d(n, r);
        for k in 0..2 {
            let m = est.mean[k].scaled((n as f64).sqrt());
            assert!(m.z_score(mean[k]) < 4.5);
        }
    }

    #[test]
    fn large_radius_reduces_to_one_component() {
        // a > L: every spacing is covered
        let m = exact_mean_1d(3, 5.0);
        assert!((m[0] - 1.0).abs() < 1e-15);
        let s = exact_sigma_n_1d(3, 5.0);
        assert!(s[(0, 0)].abs() < 1e-14);
    }

    #[test]
    fn constant_functional_has_zero_covariance() {
        let f = Constant::new(vec![1.0, 2.0]);
        let est = empirical_covariance(&f, &GermLaw::new(1, 5), 5, 100, 1).unwrap();
        assert_eq!(est.sigma, DMatrix::zeros(2, 2));
    }

    #[test]
    fn pilot_centering_makes_the_mean_vanish() {
        let (n, r) = (50, 0.3);
        let pilot = pilot_center(1, n, r, 10_000, 21).unwrap();
        let center: Vec<f64> = pilot.iter().map(|e| e.value).collect();
        let f = BooleanFunctional::new(1, n, r, center).unwrap();
        let est = empirical_covariance(&f, &GermLaw::new(1, n), n, 10_000, 22).unwrap();
        for m in &est.mean {
            assert!(m.z_score(0.0) < 4.0 * 2f64.sqrt());
        }
    }
}
