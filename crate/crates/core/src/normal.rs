//! Univariate normal and chi-square distribution functions.

use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};
use statrs::function::erf::erfc;

pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// `P(N(0, var) <= x)`; a point mass at zero when `var == 0`.
pub fn normal_cdf(x: f64, var: f64) -> f64 {
    if var <= 0.0 {
        return if x >= 0.0 { 1.0 } else { 0.0 };
    }
    std_normal_cdf(x / var.sqrt())
}

pub fn chi_square_cdf(x: f64, dof: usize) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    ChiSquared::new(dof as f64)
        .map(|c| c.cdf(x))
        .unwrap_or(f64::NAN)
}

/// Inverse of [`std_normal_cdf`] on `(0, 1)`.
pub fn std_normal_quantile(p: f64) -> f64 {
    Normal::standard().inverse_cdf(p)
}

pub fn chi_square_quantile(p: f64, dof: usize) -> f64 {
    ChiSquared::new(dof as f64)
        .map(|c| c.inverse_cdf(p))
        .unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_values() {
        assert!((std_normal_cdf(0.0) - 0.5).abs() < 1e-15);
        let v = std_normal_cdf(1.959963984540054);
        assert!((v - 0.975).abs() < 1e-10, "{v:e}");
        assert!((std_normal_cdf(-3.0) - 0.0013498980316301).abs() < 1e-10);
        assert_eq!(normal_cdf(-1e-9, 0.0), 0.0);
        assert!((chi_square_cdf(2.0, 2) - (1.0 - (-1.0f64).exp())).abs() < 1e-12);
    }
}
