//! Discrepancies `|E F(W) − E F(N_Σ)|` for smooth test functions.

use serde::{Deserialize, Serialize};

use super::{sample_gaussian, GaussianTarget};
use crate::bounds::SmoothnessBudget;
use crate::error::{Error, Result};
use crate::linalg::matrix_norms;
use crate::stats::Estimate;

pub trait TestFunction: Sync {
    fn eval(&self, x: &[f64]) -> f64;
    /// Upper bounds on the derivative sups in dimension `d`.
    fn budget(&self, d: usize) -> SmoothnessBudget;
    /// `E F(N_Σ)` in closed form, when known.
    fn gaussian_expectation(&self, _target: &GaussianTarget) -> Option<f64> {
        None
    }
}

/// `F_s(x) = exp(−‖x‖² / 2s²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianBump {
    pub s: f64,
}

const GRID_STEP: f64 = 1e-4;

impl GaussianBump {
    pub fn new(s: f64) -> Result<Self> {
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::invalid("s", "must be positive and finite"));
        }
        Ok(GaussianBump { s })
    }
}

/// Sup over `[0, hi]` of `g` sampled at `GRID_STEP`, plus `GRID_STEP · lip`
/// to cover the gaps between grid points.
fn grid_sup(hi: f64, lip: f64, g: impl Fn(f64) -> f64) -> f64 {
    let steps = (hi / GRID_STEP).ceil() as usize;
    let best = (0..=steps).map(|i| g(i as f64 * GRID_STEP)).fold(0.0f64, f64::max);
    best + GRID_STEP * lip
}

impl TestFunction for GaussianBump {
    fn eval(&self, x: &[f64]) -> f64 {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        (-r2 / (2.0 * self.s * self.s)).exp()
    }

    fn budget(&self, d: usize) -> SmoothnessBudget {
        let s = self.s;
        let rd = (d as f64).sqrt();
        // The third derivative along a unit u at x is e^{-|x⊥|²/2s²} φ'''(⟨x,u⟩),
        // so its sup is the one-dimensional sup of |a(3−a²)| e^{−a²/2} / s³.
        // |d/da| of that profile is at most 3; beyond a = 12 it is below 1e-28.
        let m3 = grid_sup(12.0, 3.0, |a| (a * (3.0 - a * a)).abs() * (-a * a / 2.0).exp()) / s.powi(3);
        // Hessian eigenvalues are F(u−1)/s² (radial) and −F/s² (d−1 times)
        // with u = r²/s²; the profile has slope at most 1 + √d.
        let hs = grid_sup(80.0, 1.0 + rd, |u| (-u / 2.0).exp() * ((u - 1.0).powi(2) + d as f64 - 1.0).sqrt());
        SmoothnessBudget {
            m1: (-0.5f64).exp() / s,
            m2: 1.0 / (s * s),
            m3,
            m2_tilde: hs.min(rd) / (s * s),
        }
    }

    fn gaussian_expectation(&self, target: &GaussianTarget) -> Option<f64> {
        let eig = nalgebra::SymmetricEigen::new(target.sigma.clone());
        let s2 = self.s * self.s;
        Some(eig.eigenvalues.iter().map(|l| (1.0 + l.max(0.0) / s2).powf(-0.5)).product())
    }
}

/// Wraps a closure with a caller-supplied budget.
pub struct FnTest<F> {
    pub f: F,
    pub budget: SmoothnessBudget,
}

impl<F: Fn(&[f64]) -> f64 + Sync> TestFunction for FnTest<F> {
    fn eval(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }
    fn budget(&self, _d: usize) -> SmoothnessBudget {
        self.budget
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoothDiscrepancy {
    pub value: f64,
    pub stderr: f64,
    /// Signed `E F(W) − E F(N_Σ)`.
    pub signed: f64,
    /// `E F(N_Σ)` came from a closed form rather than samples.
    pub exact_gaussian: bool,
    pub budget: SmoothnessBudget,
}

fn evaluate(f: &dyn TestFunction, rows: &[Vec<f64>]) -> Result<Estimate> {
    let vals: Vec<f64> = rows.iter().map(|x| f.eval(x)).collect();
    if vals.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("test_function", "nonfinite value"));
    }
    Ok(Estimate::from_samples(&vals))
}

/// Two-sample estimate from given draws of `W` and of `N_Σ`.
pub fn two_sample_discrepancy(f: &dyn TestFunction, w: &[Vec<f64>], z: &[Vec<f64>]) -> Result<SmoothDiscrepancy> {
    if w.is_empty() || z.is_empty() {
        return Err(Error::invalid("samples", "need at least one sample on each side"));
    }
    let a = evaluate(f, w)?;
    let b = evaluate(f, z)?;
    let signed = a.value - b.value;
    Ok(SmoothDiscrepancy {
        value: signed.abs(),
        stderr: a.stderr.hypot(b.stderr),
        signed,
        exact_gaussian: false,
        budget: f.budget(w[0].len()),
    })
}

/// Uses the closed-form Gaussian side when `f` has one, otherwise draws
/// `w.len()` Gaussian samples from `seed`.
pub fn smooth_discrepancy(
    f: &dyn TestFunction,
    w: &[Vec<f64>],
    target: &GaussianTarget,
    seed: u64,
) -> Result<SmoothDiscrepancy> {
    if w.is_empty() {
        return Err(Error::invalid("samples", "need at least one sample"));
    }
    let d = target.dim();
    if let Some(x) = w.iter().find(|x| x.len() != d) {
        return Err(Error::DimensionMismatch { expected: d, got: x.len() });
    }
    matrix_norms(&target.sigma)?;
    match f.gaussian_expectation(target) {
        Some(g) => {
            let a = evaluate(f, w)?;
            let signed = a.value - g;
            Ok(SmoothDiscrepancy {
                value: signed.abs(),
                stderr: a.stderr,
                signed,
                exact_gaussian: true,
                budget: f.budget(d),
            })
        }
        None => {
            let z = sample_gaussian(target, w.len(), seed)?;
            two_sample_discrepancy(f, w, &z)
        }
    }
}
