//! The statistic contract and a few reference functionals.
//!
//! A [`Functional`] maps a length-`n` coordinate vector to a `d`-vector. The
//! difference operators only ever need `f(x) - f(x with x_j replaced)`, so
//! implementations may override [`Functional::delta`] with a local formula.
//! A local formula that touches only the coordinates `x_j` actually interacts
//! with makes second-order differences cancel exactly in floating point, which
//! the indicator terms of the bounds rely on.

use std::sync::Arc;

use crate::error::{Error, Result};

/// Coordinates that are points of some `R^m`.
pub trait VectorCoord: Clone + Send + Sync {
    fn as_slice(&self) -> &[f64];
}

impl VectorCoord for f64 {
    fn as_slice(&self) -> &[f64] {
        std::slice::from_ref(self)
    }
}

impl VectorCoord for Vec<f64> {
    fn as_slice(&self) -> &[f64] {
        self
    }
}

impl<const N: usize> VectorCoord for [f64; N] {
    fn as_slice(&self) -> &[f64] {
        self
    }
}

pub trait Functional<T: Clone>: Send + Sync {
    /// Output dimension `d`.
    fn dim(&self) -> usize;

    /// Evaluates the statistic. Must be deterministic.
    fn eval(&self, x: &[T]) -> Result<Vec<f64>>;

    /// `f(x) - f(x')` where `x'` equals `x` except `x'_j = replacement`.
    fn delta(&self, x: &[T], j: usize, replacement: &T) -> Result<Vec<f64>> {
        if j >= x.len() {
            return Err(Error::IndexOutOfRange {
                index: j,
                n: x.len(),
            });
        }
        let base = self.eval(x)?;
        let mut y = x.to_vec();
        y[j] = replacement.clone();
        let other = self.eval(&y)?;
        Ok(sub(&base, &other))
    }

    /// Whether the statistic is invariant under permutations of its input.
    fn is_symmetric(&self) -> bool {
        false
    }

    fn name(&self) -> String {
        "functional".to_string()
    }
}

impl<T: Clone, F: Functional<T> + ?Sized> Functional<T> for Arc<F> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn eval(&self, x: &[T]) -> Result<Vec<f64>> {
        (**self).eval(x)
    }
    fn delta(&self, x: &[T], j: usize, replacement: &T) -> Result<Vec<f64>> {
        (**self).delta(x, j, replacement)
    }
    fn is_symmetric(&self) -> bool {
        (**self).is_symmetric()
    }
    fn name(&self) -> String {
        (**self).name()
    }
}

impl<T: Clone, F: Functional<T> + ?Sized> Functional<T> for &F {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn eval(&self, x: &[T]) -> Result<Vec<f64>> {
        (**self).eval(x)
    }
    fn delta(&self, x: &[T], j: usize, replacement: &T) -> Result<Vec<f64>> {
        (**self).delta(x, j, replacement)
    }
    fn is_symmetric(&self) -> bool {
        (**self).is_symmetric()
    }
    fn name(&self) -> String {
        (**self).name()
    }
}

pub(crate) fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub(crate) fn check_finite(v: &[f64], seed: u64) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite { seed })
    }
}

/// `f(x) = c` for every input.
#[derive(Debug, Clone)]
pub struct Constant {
    pub value: Vec<f64>,
}

impl Constant {
    pub fn new(value: Vec<f64>) -> Self {
        Constant { value }
    }
}

impl<T: Clone> Functional<T> for Constant {
    fn dim(&self) -> usize {
        self.value.len()
    }
    fn eval(&self, _x: &[T]) -> Result<Vec<f64>> {
        Ok(self.value.clone())
    }
    fn delta(&self, _x: &[T], _j: usize, _r: &T) -> Result<Vec<f64>> {
        Ok(vec![0.0; self.value.len()])
    }
    fn is_symmetric(&self) -> bool {
        true
    }
    fn name(&self) -> String {
        "constant".into()
    }
}

/// The standardized sum `f(x) = n^{-1/2} sum_k x_k` of `R^d`-valued coordinates.
#[derive(Debug, Clone)]
pub struct LinearStatistic {
    pub d: usize,
    /// Extra multiplier, 1 by default.
    pub scale: f64,
}

impl LinearStatistic {
    pub fn new(d: usize) -> Self {
        LinearStatistic { d, scale: 1.0 }
    }

    pub fn scaled(d: usize, scale: f64) -> Self {
        LinearStatistic { d, scale }
    }

    fn factor(&self, n: usize) -> f64 {
        self.scale / (n as f64).sqrt()
    }
}

impl<T: VectorCoord> Functional<T> for LinearStatistic {
    fn dim(&self) -> usize {
        self.d
    }

    fn eval(&self, x: &[T]) -> Result<Vec<f64>> {
        let mut acc = vec![0.0; self.d];
        for p in x {
            let s = p.as_slice();
            if s.len() != self.d {
                return Err(Error::DimensionMismatch {
                    expected: self.d,
                    got: s.len(),
                });
            }
            for (a, v) in acc.iter_mut().zip(s) {
                *a += v;
            }
        }
        let c = self.factor(x.len());
        Ok(acc.into_iter().map(|a| a * c).collect())
    }

    fn delta(&self, x: &[T], j: usize, replacement: &T) -> Result<Vec<f64>> {
        let xj = x
            .get(j)
            .ok_or(Error::IndexOutOfRange { index: j, n: x.len() })?
            .as_slice();
        let c = self.factor(x.len());
        Ok(xj
            .iter()
            .zip(replacement.as_slice())
            .map(|(a, b)| c * (a - b))
            .collect())
    }

    fn is_symmetric(&self) -> bool {
        true
    }

    fn name(&self) -> String {
        format!("linear-statistic(d={})", self.d)
    }
}

type EvalFn<T> = dyn Fn(&[T]) -> Vec<f64> + Send + Sync;

/// Adapts a closure. Uses the generic two-evaluation difference.
pub struct FnFunctional<T> {
    dim: usize,
    symmetric: bool,
    name: String,
    f: Arc<EvalFn<T>>,
}

impl<T> FnFunctional<T> {
    pub fn new(dim: usize, f: impl Fn(&[T]) -> Vec<f64> + Send + Sync + 'static) -> Self {
        FnFunctional {
            dim,
            symmetric: false,
            name: "closure".into(),
            f: Arc::new(f),
        }
    }

    pub fn symmetric(mut self, flag: bool) -> Self {
        self.symmetric = flag;
        self
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }
}

impl<T> Clone for FnFunctional<T> {
    fn clone(&self) -> Self {
        FnFunctional {
            dim: self.dim,
            symmetric: self.symmetric,
            name: self.name.clone(),
            f: Arc::clone(&self.f),
        }
    }
}

impl<T: Clone + Send + Sync> Functional<T> for FnFunctional<T> {
    fn dim(&self) -> usize {
        self.dim
    }
    fn eval(&self, x: &[T]) -> Result<Vec<f64>> {
        let v = (self.f)(x);
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: v.len(),
            });
        }
        Ok(v)
    }
    fn is_symmetric(&self) -> bool {
        self.symmetric
    }
    fn name(&self) -> String {
        self.name.clone()
    }
}

/// `c · f`.
#[derive(Clone)]
pub struct Scaled<F> {
    pub inner: F,
    pub c: f64,
}

impl<T: Clone, F: Functional<T>> Functional<T> for Scaled<F> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn eval(&self, x: &[T]) -> Result<Vec<f64>> {
        Ok(self.inner.eval(x)?.into_iter().map(|v| v * self.c).collect())
    }
    fn delta(&self, x: &[T], j: usize, r: &T) -> Result<Vec<f64>> {
        Ok(self
            .inner
            .delta(x, j, r)?
            .into_iter()
            .map(|v| v * self.c)
            .collect())
    }
    fn is_symmetric(&self) -> bool {
        self.inner.is_symmetric()
    }
    fn name(&self) -> String {
        format!("{}*{}", self.c, self.inner.name())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_delta_matches_two_evaluations() {
        let f = LinearStatistic::new(1);
        let x = vec![1.0, 2.0];
        let d = f.delta(&x, 0, &3.0).unwrap();
        assert!((d[0] + 2f64.sqrt()).abs() < 1e-15);
        let generic = FnFunctional::new(1, |x: &[f64]| {
            vec![x.iter().sum::<f64>() / (x.len() as f64).sqrt()]
        });
        let g = generic.delta(&x, 0, &3.0).unwrap();
        assert!((d[0] - g[0]).abs() < 1e-15);
    }

    #[test]
    fn constant_has_zero_delta() {
        let f = Constant::new(vec![3.0, 4.0]);
        assert_eq!(
            Functional::<f64>::delta(&f, &[1.0, 2.0], 1, &9.0).unwrap(),
            vec![0.0, 0.0]
        );
    }

    #[test]
    fn max_functional_delta() {
        let f = FnFunctional::new(1, |x: &[f64]| vec![x.iter().cloned().fold(f64::MIN, f64::max)]);
        // X = (1, 5), X' = (2, 0): X^2 = (1, 0), so the difference is 5 - 1.
        assert_eq!(f.delta(&[1.0, 5.0], 1, &0.0).unwrap(), vec![4.0]);
    }

    #[test]
    fn closure_dimension_is_checked() {
        let f = FnFunctional::new(2, |_x: &[f64]| vec![1.0]);
        assert!(f.eval(&[0.0]).is_err());
    }
}
