//! Small statistical helpers shared by the estimators.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

/// Pairwise (cascade) summation. Order-independent up to the fixed split, so
/// the same slice always produces the same bits.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const BLOCK: usize = 32;
    if values.len() <= BLOCK {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// A Monte-Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
    pub reps: usize,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Estimate {
            value,
            stderr: 0.0,
            reps: 0,
        }
    }

    /// Sample mean and standard error of the mean.
    pub fn from_samples(samples: &[f64]) -> Self {
        let n = samples.len();
        if n == 0 {
            return Estimate {
                value: f64::NAN,
                stderr: f64::NAN,
                reps: 0,
            };
        }
        let mean = pairwise_sum(samples) / n as f64;
        let stderr = if n > 1 {
            let sq: Vec<f64> = samples.iter().map(|v| (v - mean).powi(2)).collect();
            (pairwise_sum(&sq) / (n as f64 - 1.0) / n as f64).sqrt()
        } else {
            f64::INFINITY
        };
        Estimate {
            value: mean,
            stderr,
            reps: n,
        }
    }

    pub fn scaled(self, c: f64) -> Self {
        Estimate {
            value: self.value * c,
            stderr: self.stderr * c.abs(),
            reps: self.reps,
        }
    }

    /// `value^(1/p)` with negative values clamped to zero. Returns the rooted
    /// estimate (delta-method stderr) and whether clamping happened.
    pub fn root(self, p: f64) -> (Self, bool) {
        if self.value <= 0.0 {
            let stderr = if self.stderr.is_finite() {
                self.stderr.max(0.0).powf(1.0 / p)
            } else {
                self.stderr
            };
            return (
                Estimate {
                    value: 0.0,
                    stderr,
                    reps: self.reps,
                },
                self.value < 0.0,
            );
        }
        let value = self.value.powf(1.0 / p);
        let stderr = self.stderr * value / (p * self.value);
        (
            Estimate {
                value,
                stderr,
                reps: self.reps,
            },
            false,
        )
    }

    /// Number of standard errors separating this estimate from `target`.
    pub fn z_score(&self, target: f64) -> f64 {
        if self.stderr == 0.0 {
            if self.value == target {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            (self.value - target).abs() / self.stderr
        }
    }
}

/// Unbiased sample covariance of the rows.
pub fn sample_covariance(rows: &[Vec<f64>]) -> DMatrix<f64> {
    let n = rows.len();
    let d = rows.first().map_or(0, |r| r.len());
    let mut mean = vec![0.0; d];
    for k in 0..d {
        let col: Vec<f64> = rows.iter().map(|r| r[k]).collect();
        mean[k] = pairwise_sum(&col) / n as f64;
    }
    let mut cov = DMatrix::zeros(d, d);
    if n < 2 {
        return cov;
    }
    for a in 0..d {
        for b in a..d {
            let prods: Vec<f64> = rows
                .iter()
                .map(|r| (r[a] - mean[a]) * (r[b] - mean[b]))
                .collect();
            let v = pairwise_sum(&prods) / (n as f64 - 1.0);
            cov[(a, b)] = v;
            cov[(b, a)] = v;
        }
    }
    cov
}

/// Standard errors of the entries of [`sample_covariance`], from the sample
/// variance of the centred products.
pub fn sample_covariance_stderr(rows: &[Vec<f64>]) -> DMatrix<f64> {
    let n = rows.len();
    let d = rows.first().map_or(0, |r| r.len());
    let mut se = DMatrix::zeros(d, d);
    if n < 3 {
        return se;
    }
    let mean: Vec<f64> = (0..d)
        .map(|k| pairwise_sum(&rows.iter().map(|r| r[k]).collect::<Vec<_>>()) / n as f64)
        .collect();
    for a in 0..d {
        for b in a..d {
            let prods: Vec<f64> = rows
                .iter()
                .map(|r| (r[a] - mean[a]) * (r[b] - mean[b]))
                .collect();
            let e = Estimate::from_samples(&prods);
            se[(a, b)] = e.stderr;
            se[(b, a)] = e.stderr;
        }
    }
    se
}

/// Least-squares line through `(ln x, ln y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogLogFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope (infinite with fewer than three points).
    pub slope_stderr: f64,
}

/// Fits `y ≈ C x^slope`. Points with nonpositive coordinates are skipped.
pub fn loglog_fit(xs: &[f64], ys: &[f64]) -> Option<LogLogFit> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > 0.0 && **y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    let m = pts.len();
    if m < 2 {
        return None;
    }
    let mf = m as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / mf;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / mf;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let slope_stderr = if m > 2 {
        let rss: f64 = pts
            .iter()
            .map(|p| (p.1 - intercept - slope * p.0).powi(2))
            .sum();
        (rss / (mf - 2.0) / sxx).sqrt()
    } else {
        f64::INFINITY
    };
    Some(LogLogFit {
        slope,
        intercept,
        slope_stderr,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_sum_matches_naive_on_small_and_large_inputs() {
        let v: Vec<f64> = (1..=1000).map(|k| k as f64).collect();
        assert_eq!(pairwise_sum(&v), 500500.0);
        assert_eq!(pairwise_sum(&[1.0, 2.0]), 3.0);
        assert_eq!(pairwise_sum(&[]), 0.0);
    }

    #[test]
    fn estimate_mean_and_stderr() {
        let e = Estimate::from_samples(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(e.value, 2.5);
        let var: f64 = 5.0 / 3.0;
        assert!((e.stderr - (var / 4.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn root_clamps_negative_values() {
        let (r, clamped) = Estimate {
            value: -0.1,
            stderr: 0.2,
            reps: 10,
        }
        .root(3.0);
        assert!(clamped);
        assert_eq!(r.value, 0.0);
        let (r, clamped) = Estimate::exact(8.0).root(3.0);
        assert!(!clamped);
        assert!((r.value - 2.0).abs() < 1e-15);
    }

    #[test]
    fn covariance_of_constant_rows_is_zero() {
        let rows = vec![vec![1.0, 2.0]; 10];
        assert_eq!(sample_covariance(&rows), DMatrix::zeros(2, 2));
    }

    #[test]
    fn loglog_fit_recovers_power_law() {
        let xs = [16.0, 32.0, 64.0, 128.0];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powf(-0.5)).collect();
        let fit = loglog_fit(&xs, &ys).unwrap();
        assert!((fit.slope + 0.5).abs() < 1e-12);
        assert!((fit.intercept - 3f64.ln()).abs() < 1e-12);
        assert!(loglog_fit(&[1.0], &[1.0]).is_none());
    }
}
