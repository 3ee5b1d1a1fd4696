//! `√E‖E[T − Σ | X]‖²_HS`.
//!
//! Each replicate fixes `X` and builds two independent estimates of
//! `E[T | X]`, every subset draw using a fresh `X'`. The HS inner product of
//! the two centred estimates is unbiased for the squared norm.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functionals::{check_finite, Functional};
use crate::linalg::hs_inner;
use crate::resample::enumerate::{batch_from, for_each_config, EnumCaps};
use crate::resample::{sample_weighted_subset, CoordLaw, FiniteLaw, SampleBatch, TStrategy};
use crate::rng::{par_replicates, stream};
use crate::stats::Estimate;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SigmaTerm {
    /// Unbiased estimate of `E‖E[T − Σ | X]‖²_HS`.
    pub squared: Estimate,
    pub value: Estimate,
    pub clamped: bool,
}

fn check_sigma(d: usize, sigma: &DMatrix<f64>) -> Result<()> {
    if sigma.nrows() != d || sigma.ncols() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: sigma.nrows(),
        });
    }
    Ok(())
}

fn from_squared(squared: Estimate) -> SigmaTerm {
    let (value, clamped) = squared.root(2.0);
    SigmaTerm {
        squared,
        value,
        clamped,
    }
}

pub fn estimate_sigma_term<T, F, L>(
    f: &F,
    sigma: &DMatrix<f64>,
    law: &L,
    n: usize,
    reps_outer: usize,
    reps_inner: usize,
    seed: u64,
) -> Result<SigmaTerm>
where
    T: Clone + Send + Sync,
    F: Functional<T> + ?Sized,
    L: CoordLaw<T> + ?Sized,
{
    let d = f.dim();
    check_sigma(d, sigma)?;
    if reps_inner < 1 || reps_outer < 2 {
        return Err(Error::invalid(
            "reps",
            "need reps_inner >= 1 per half and reps_outer >= 2",
        ));
    }
    let half_n = 0.5 * n as f64;
    let rows = par_replicates(seed, stream::SIGMA_TERM, reps_outer, |rseed, rng| {
        let x = law.sample_n(n, rng);
        let mut est = [DMatrix::<f64>::zeros(d, d), DMatrix::<f64>::zeros(d, d)];
        for t in est.iter_mut() {
            for _ in 0..reps_inner {
                let xp = law.sample_n(n, rng);
                let draw = sample_weighted_subset(n, rng);
                let j = draw.j;
                let dx = f.delta(&x, j, &xp[j])?;
                let mut xa = x.clone();
                for &a in &draw.a_set {
                    xa[a] = xp[a].clone();
                }
                let da = f.delta(&xa, j, &xp[j])?;
                check_finite(&dx, rseed)?;
                check_finite(&da, rseed)?;
                for r in 0..d {
                    for c in 0..d {
                        t[(r, c)] += half_n * dx[r] * da[c];
                    }
                }
            }
            *t /= reps_inner as f64;
            *t -= sigma;
        }
        Ok(hs_inner(&est[0], &est[1]))
    })?;
    Ok(from_squared(Estimate::from_samples(&rows)))
}

/// Exact `E‖E[T | X] − Σ‖²_HS` by enumeration.
pub fn exact_sigma_term_sq<T, F>(
    f: &F,
    sigma: &DMatrix<f64>,
    law: &FiniteLaw<T>,
    n: usize,
    caps: EnumCaps,
) -> Result<SigmaTerm>
where
    T: Clone,
    F: Functional<T> + ?Sized,
{
    let d = f.dim();
    check_sigma(d, sigma)?;
    caps.check(law, n, 2)?;
    let mut total = 0.0;
    let mut rng = crate::rng::rng_from_seed(0);
    for_each_config(law, n, |x, px| {
        let mut cond = DMatrix::zeros(d, d);
        for_each_config(law, n, |xp, pp| {
            let mut v = x.to_vec();
            v.extend_from_slice(xp);
            let batch: SampleBatch<T> = batch_from(&v, n);
            let t = crate::resample::t_matrix(f, &batch, TStrategy::Exact { cap: caps.max_n }, &mut rng)?;
            cond += t.t * pp;
            Ok(())
        })?;
        let diff = cond - sigma;
        total += px * hs_inner(&diff, &diff);
        Ok(())
    })?;
    Ok(from_squared(Estimate::exact(total)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functionals::{Constant, LinearStatistic};

    #[test]
    fn single_bernoulli_matches_hand_computation() {
        // E[T | X] = ((X - 1/2)² + 1/4)/2 and (X - 1/2)² = 1/4, so E[T | X] = Σ.
        let law = FiniteLaw::bernoulli(0.5);
        let f = LinearStatistic::new(1);
        let sigma = DMatrix::from_element(1, 1, 0.25);
        let ex = exact_sigma_term_sq(&f, &sigma, &law, 1, EnumCaps::default()).unwrap();
        assert!(ex.squared.value.abs() < 1e-15);
        let biased = FiniteLaw::bernoulli(0.2);
        let s2 = DMatrix::from_element(1, 1, 0.16);
        let ex = exact_sigma_term_sq(&f, &s2, &biased, 1, EnumCaps::default()).unwrap();
        // E[T|X] = ((X - p)² + p(1-p))/2; Var of (X-p)²/2 with p = 0.2
        let vals = [(0.8, 0.04f64), (0.2, 0.64f64)];
        let m: f64 = vals.iter().map(|(p, v)| p * (v + 0.16) / 2.0).sum();
        let want: f64 = vals.iter().map(|(p, v)| p * ((v + 0.16) / 2.0 - m).powi(2)).sum();
        assert!((ex.squared.value - want).abs() < 1e-14);
        let mc = estimate_sigma_term(&f, &s2, &biased, 1, 50_000, 2, 9).unwrap();
        assert!(mc.squared.z_score(want) < 4.0);
    }

    #[test]
    fn constant_with_zero_sigma() {
        let f = Constant::new(vec![3.0]);
        let s = DMatrix::zeros(1, 1);
        let law = crate::resample::laws::StandardNormal;
        let r = estimate_sigma_term(&f, &s, &law, 4, 10, 2, 1).unwrap();
        assert_eq!(r.value.value, 0.0);
    }

    #[test]
    fn dimension_mismatch_is_refused() {
        let f = LinearStatistic::new(1);
        let s = DMatrix::zeros(2, 2);
        let law = crate::resample::laws::StandardNormal;
        assert!(estimate_sigma_term(&f, &s, &law, 4, 10, 2, 1).is_err());
    }
}
