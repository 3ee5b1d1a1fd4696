//! Proxy distance of a functional of i.i.d. inputs across a grid of `n`.

use serde::{Deserialize, Serialize};

use super::{proxy_convex_distance, rate_fit, ClassSpec, GaussianTarget, RateFit};
use crate::error::{Error, Result};
use crate::functionals::Functional;
use crate::resample::CoordLaw;
use crate::rng::{derive_seed, par_replicates, stream};

const BLOCK: usize = 1024;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateRow {
    pub n: usize,
    pub value: f64,
    pub class_size: usize,
    pub envelope: f64,
    pub mc_stderr: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateStudy {
    pub rows: Vec<RateRow>,
    pub samples: usize,
    /// `None` when the fit was refused, e.g. a zero distance.
    pub fit: Option<RateFit>,
    pub fit_error: Option<String>,
}

/// `count` independent draws of `f(X_1..X_n)`, generated in fixed blocks.
pub fn sample_statistic<T, F, L>(f: &F, law: &L, n: usize, count: usize, seed: u64) -> Result<Vec<Vec<f64>>>
where
    T: Clone,
    F: Functional<T> + ?Sized,
    L: CoordLaw<T> + ?Sized,
{
    let blocks = count.div_ceil(BLOCK);
    let out = par_replicates(seed, stream::W_SAMPLES, blocks, |_, rng| {
        (0..BLOCK)
            .map(|_| {
                let x = law.sample_n(n, rng);
                f.eval(&x)
            })
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(out.into_iter().flatten().take(count).collect())
}

/// For each `n`, draws `samples` values of the statistic and measures the
/// proxy convex distance to `target`; then fits the log-log slope.
pub fn rate_study<T, F, L>(
    f: &F,
    law: &L,
    target: &GaussianTarget,
    ns: &[usize],
    samples: usize,
    spec: &ClassSpec,
    seed: u64,
) -> Result<RateStudy>
where
    T: Clone,
    F: Functional<T> + ?Sized,
    L: CoordLaw<T> + ?Sized,
{
    if ns.is_empty() || ns.windows(2).any(|w| w[0] >= w[1]) || ns[0] == 0 {
        return Err(Error::invalid("n_grid", "must be nonempty, positive and strictly increasing"));
    }
    if samples == 0 {
        return Err(Error::invalid("samples", "must be positive"));
    }
    if f.dim() != target.dim() {
        return Err(Error::DimensionMismatch { expected: target.dim(), got: f.dim() });
    }
    let mut rows = Vec::with_capacity(ns.len());
    for &n in ns {
        let s = derive_seed(seed, stream::W_SAMPLES, n as u64);
        let w = sample_statistic(f, law, n, samples, s)?;
        let p = proxy_convex_distance(&w, target, spec, s)?;
        rows.push(RateRow {
            n,
            value: p.value,
            class_size: p.class_size,
            envelope: p.envelope,
            mc_stderr: p.max_mc_stderr,
            seed: s,
        });
    }
    let pairs: Vec<(f64, f64)> = rows.iter().map(|r| (r.n as f64, r.value)).collect();
    let (fit, fit_error) = match rate_fit(&pairs) {
        Ok(fit) => (Some(fit), None),
        Err(e) => (None, Some(e.to_string())),
    };
    Ok(RateStudy { rows, samples, fit, fit_error })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functionals::LinearStatistic;
    use crate::resample::CubeVertices;

    #[test]
    fn lattice_sums_show_the_square_root_rate() {
        // d = 1 Rademacher sums have atoms of mass ~ n^{-1/2} at zero.
        let f = LinearStatistic::new(1);
        let law = CubeVertices { d: 1 };
        let spec = ClassSpec::half_spaces(1, 4096);
        let study = rate_study(&f, &law, &GaussianTarget::identity(1), &[4, 16, 64, 256], 40_000, &spec, 1).unwrap();
        let fit = study.fit.unwrap();
        assert!((fit.slope + 0.5).abs() < 0.1, "{fit:?}");
    }

    #[test]
    fn blocks_do_not_depend_on_count_boundaries() {
        let f = LinearStatistic::new(2);
        let law = CubeVertices { d: 2 };
        let a = sample_statistic(&f, &law, 5, 3000, 9).unwrap();
        let b = sample_statistic(&f, &law, 5, 2000, 9).unwrap();
        assert_eq!(&a[..2000], &b[..]);
    }

    #[test]
    fn refuses_bad_grids() {
        let f = LinearStatistic::new(1);
        let law = CubeVertices { d: 1 };
        let t = GaussianTarget::identity(1);
        let spec = ClassSpec::default();
        assert!(rate_study(&f, &law, &t, &[4, 4], 10, &spec, 0).is_err());
        assert!(rate_study(&f, &law, &t, &[], 10, &spec, 0).is_err());
        assert!(rate_study(&f, &law, &GaussianTarget::identity(2), &[4], 10, &spec, 0).is_err());
    }
}
