//! Coordinate laws.

use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal as Gauss};

use crate::error::{Error, Result};
use crate::rng::Rng;

/// A law on the input space from which i.i.d. coordinates are drawn.
pub trait CoordLaw<T>: Send + Sync {
    fn sample(&self, rng: &mut Rng) -> T;

    fn sample_n(&self, n: usize, rng: &mut Rng) -> Vec<T> {
        (0..n).map(|_| self.sample(rng)).collect()
    }
}

impl<T, L: CoordLaw<T> + ?Sized> CoordLaw<T> for &L {
    fn sample(&self, rng: &mut Rng) -> T {
        (**self).sample(rng)
    }
}

/// A law with finite support, used by the enumeration oracles.
#[derive(Debug, Clone)]
pub struct FiniteLaw<T> {
    pub support: Vec<T>,
    pub probs: Vec<f64>,
}

impl<T: Clone> FiniteLaw<T> {
    pub fn new(support: Vec<T>, probs: Vec<f64>) -> Result<Self> {
        if support.is_empty() || support.len() != probs.len() {
            return Err(Error::invalid("probs", "must match a nonempty support"));
        }
        if probs.iter().any(|p| !(*p >= 0.0)) {
            return Err(Error::invalid("probs", "must be nonnegative"));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::invalid("probs", format!("sum to {total}, not 1")));
        }
        Ok(FiniteLaw { support, probs })
    }

    pub fn uniform(support: Vec<T>) -> Self {
        let p = 1.0 / support.len() as f64;
        let probs = vec![p; support.len()];
        FiniteLaw { support, probs }
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }
}

impl FiniteLaw<f64> {
    pub fn bernoulli(p: f64) -> Self {
        FiniteLaw {
            support: vec![0.0, 1.0],
            probs: vec![1.0 - p, p],
        }
    }

    pub fn mean(&self) -> f64 {
        self.support.iter().zip(&self.probs).map(|(x, p)| x * p).sum()
    }

    pub fn moment_abs(&self, k: i32) -> f64 {
        self.support
            .iter()
            .zip(&self.probs)
            .map(|(x, p)| x.abs().powi(k) * p)
            .sum()
    }
}

impl<T: Clone + Send + Sync> CoordLaw<T> for FiniteLaw<T> {
    fn sample(&self, rng: &mut Rng) -> T {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (x, p) in self.support.iter().zip(&self.probs) {
            acc += p;
            if u < acc {
                return x.clone();
            }
        }
        self.support[self.support.len() - 1].clone()
    }
}

/// Standard normal scalars.
#[derive(Debug, Clone, Copy, Default)]
pub struct StandardNormal;

impl CoordLaw<f64> for StandardNormal {
    fn sample(&self, rng: &mut Rng) -> f64 {
        Gauss.sample(rng)
    }
}

/// Standard normal vectors in `R^d`.
#[derive(Debug, Clone, Copy)]
pub struct StandardNormalVec {
    pub d: usize,
}

impl CoordLaw<Vec<f64>> for StandardNormalVec {
    fn sample(&self, rng: &mut Rng) -> Vec<f64> {
        (0..self.d).map(|_| Gauss.sample(rng)).collect()
    }
}

/// Uniform on `[-h, h]^d`.
#[derive(Debug, Clone, Copy)]
pub struct UniformCube {
    pub d: usize,
    pub half_width: f64,
}

impl UniformCube {
    /// Centred cube with identity covariance (`h = sqrt(3)`).
    pub fn standardized(d: usize) -> Self {
        UniformCube {
            d,
            half_width: 3f64.sqrt(),
        }
    }

    pub fn coordinate_variance(&self) -> f64 {
        self.half_width * self.half_width / 3.0
    }
}

impl CoordLaw<Vec<f64>> for UniformCube {
    fn sample(&self, rng: &mut Rng) -> Vec<f64> {
        (0..self.d)
            .map(|_| rng.random_range(-self.half_width..self.half_width))
            .collect()
    }
}

/// Uniform on the vertices `{-1, 1}^d` (identity covariance).
#[derive(Debug, Clone, Copy)]
pub struct CubeVertices {
    pub d: usize,
}

impl CoordLaw<Vec<f64>> for CubeVertices {
    fn sample(&self, rng: &mut Rng) -> Vec<f64> {
        (0..self.d)
            .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
            .collect()
    }
}
