//! Empirical distances to a Gaussian target and rate fitting.

pub mod classes;
pub mod smooth;
pub mod study;

use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{matrix_norms, sym_sqrt, symmetrize};
use crate::rng::{par_replicates, stream};
use crate::stats::loglog_fit;

pub use classes::{proxy_convex_distance, ClassSpec, Member, ProxyDistance};
pub use study::{rate_study, sample_statistic, RateRow, RateStudy};
pub use smooth::{smooth_discrepancy, two_sample_discrepancy, FnTest, GaussianBump, SmoothDiscrepancy, TestFunction};

/// `N(0, Σ)` with its spectral square root. Rank-deficient `Σ` is allowed.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GaussianTarget {
    pub sigma: DMatrix<f64>,
    pub sqrt_sigma: DMatrix<f64>,
}

impl GaussianTarget {
    pub fn new(sigma: &DMatrix<f64>) -> Result<Self> {
        let (sigma, _) = symmetrize(sigma)?;
        let sqrt_sigma = sym_sqrt(&sigma)?;
        Ok(GaussianTarget { sigma, sqrt_sigma })
    }

    pub fn identity(d: usize) -> Self {
        GaussianTarget {
            sigma: DMatrix::identity(d, d),
            sqrt_sigma: DMatrix::identity(d, d),
        }
    }

    pub fn dim(&self) -> usize {
        self.sigma.nrows()
    }

    /// Variance of `⟨u, N⟩`.
    pub fn projected_variance(&self, u: &[f64]) -> f64 {
        let v = DVector::from_column_slice(u);
        (v.transpose() * &self.sigma * &v)[(0, 0)].max(0.0)
    }

    pub fn is_diagonal(&self) -> bool {
        let d = self.dim();
        (0..d).all(|i| (0..d).all(|j| i == j || self.sigma[(i, j)] == 0.0))
    }

    pub fn is_posdef(&self) -> bool {
        matrix_norms(&self.sigma).map(|m| m.posdef).unwrap_or(false)
    }
}

const BLOCK: usize = 4096;

/// `count` draws `Σ^{1/2} Z`, generated in fixed blocks so the output does
/// not depend on the worker count.
pub fn sample_gaussian(target: &GaussianTarget, count: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    if count == 0 {
        return Err(Error::invalid("count", "must be positive"));
    }
    let d = target.dim();
    let blocks = count.div_ceil(BLOCK);
    let out = par_replicates(seed, stream::GAUSSIAN, blocks, |_, rng| {
        let mut rows = Vec::with_capacity(BLOCK);
        for _ in 0..BLOCK {
            let z: Vec<f64> = (0..d).map(|_| StandardNormal.sample(rng)).collect();
            let x = &target.sqrt_sigma * DVector::from_vec(z);
            rows.push(x.iter().copied().collect::<Vec<f64>>());
        }
        Ok(rows)
    })?;
    Ok(out.into_iter().flatten().take(count).collect())
}

/// Least-squares slope of `ln value` against `ln n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    /// 95% normal-theory half-width of the slope.
    pub half_width: f64,
}

pub fn rate_fit(pairs: &[(f64, f64)]) -> Result<RateFit> {
    if pairs.len() < 4 {
        return Err(Error::invalid("pairs", format!("need at least 4, got {}", pairs.len())));
    }
    if let Some(p) = pairs.iter().find(|p| !(p.0 > 0.0 && p.1 > 0.0)) {
        return Err(Error::invalid(
            "pairs",
            format!("log-log fit needs positive n and value, got ({}, {})", p.0, p.1),
        ));
    }
    let xs: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let fit = loglog_fit(&xs, &ys).ok_or_else(|| Error::invalid("pairs", "n values must differ"))?;
    Ok(RateFit {
        slope: fit.slope,
        intercept: fit.intercept,
        half_width: 1.96 * fit.slope_stderr,
    })
}
