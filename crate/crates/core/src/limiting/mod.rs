//! The limiting covariance of the Boolean-model functional: unit-ball
//! constants, the Wills functional, the `P_{i,s}(d)` coefficients and the
//! series for `Σ`.

pub mod series;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use series::{
    covariance_gap_report, exact_sigma_1d, exact_sigma_series_1d, fit_gap_exponent,
    intersection_intrinsic_volumes, sigma_series, GapRecord, SeriesConfig, SeriesTerm,
    SigmaSeries,
};

/// Volume of the unit ball in `R^m`.
pub fn kappa(m: usize) -> f64 {
    match m {
        0 => 1.0,
        1 => 2.0,
        2 => std::f64::consts::PI,
        // κ_m = 2π κ_{m-2} / m, equivalent to π^{m/2} / Γ(m/2 + 1)
        _ => 2.0 * std::f64::consts::PI * kappa(m - 2) / m as f64,
    }
}

/// `κ_0, ..., κ_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KappaTable {
    pub kappa: Vec<f64>,
}

impl KappaTable {
    pub fn new(max: usize) -> Self {
        KappaTable {
            kappa: (0..=max).map(kappa).collect(),
        }
    }

    pub fn get(&self, m: usize) -> f64 {
        self.kappa.get(m).copied().unwrap_or_else(|| kappa(m))
    }

    /// `c_j^m = m! κ_m / (j! κ_j)`.
    pub fn c(&self, j: usize, m: usize) -> f64 {
        factorial(m) * self.get(m) / (factorial(j) * self.get(j))
    }
}

pub(crate) fn factorial(m: usize) -> f64 {
    (1..=m).map(|k| k as f64).product()
}

fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, t| acc * (n - t) as f64 / (t + 1) as f64)
}

/// `V_j(B(0, r))` in `R^d`: `C(d, j) κ_d / κ_{d-j} r^j`.
pub fn ball_intrinsic_volume(d: usize, j: usize, r: f64) -> f64 {
    if j > d {
        return 0.0;
    }
    binomial(d, j) * kappa(d) / kappa(d - j) * r.powi(j as i32)
}

pub fn ball_intrinsic_volumes(d: usize, r: f64) -> Vec<f64> {
    (0..=d).map(|j| ball_intrinsic_volume(d, j, r)).collect()
}

/// Convex bodies with known intrinsic volumes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ConvexBody {
    Empty { d: usize },
    Ball { d: usize, r: f64 },
    /// Intrinsic volumes `(V_0, ..., V_d)` supplied directly, e.g. from an
    /// intersection of balls.
    Volumes { d: usize, v: Vec<f64> },
}

impl ConvexBody {
    pub fn intrinsic_volumes(&self) -> Result<Vec<f64>> {
        match self {
            ConvexBody::Empty { d } => Ok(vec![0.0; d + 1]),
            ConvexBody::Ball { d, r } => Ok(ball_intrinsic_volumes(*d, *r)),
            ConvexBody::Volumes { d, v } => {
                if v.len() != d + 1 {
                    return Err(Error::DimensionMismatch {
                        expected: d + 1,
                        got: v.len(),
                    });
                }
                Ok(v.clone())
            }
        }
    }
}

/// `V̄(A) = Σ_l κ_{d-l} V_l(A)`.
pub fn wills_functional(body: &ConvexBody) -> Result<f64> {
    let v = body.intrinsic_volumes()?;
    let d = v.len() - 1;
    Ok(v.iter().enumerate().map(|(l, x)| kappa(d - l) * x).sum())
}

/// Calls `visit` with every tuple of `t` integers in `lo..=hi` summing to `total`.
fn for_each_composition(t: usize, total: i64, lo: i64, hi: i64, visit: &mut impl FnMut(&[i64])) {
    fn rec(
        buf: &mut Vec<i64>,
        t: usize,
        left: i64,
        lo: i64,
        hi: i64,
        visit: &mut impl FnMut(&[i64]),
    ) {
        if buf.len() == t {
            if left == 0 {
                visit(buf);
            }
            return;
        }
        let rest = (t - buf.len() - 1) as i64;
        for r in lo..=hi {
            let rem = left - r;
            if rem < rest * lo || rem > rest * hi {
                continue;
            }
            buf.push(r);
            rec(buf, t, rem, lo, hi, visit);
            buf.pop();
        }
    }
    if lo > hi {
        return;
    }
    rec(&mut Vec::with_capacity(t), t, total, lo, hi, visit);
}

/// Weights `w_r = r! κ_r / (d! κ_d) V_r(K)` for `K = B(0, R)` in `R^d`.
fn composition_weights(d: usize, r: f64) -> Vec<f64> {
    let kt = KappaTable::new(d);
    (0..=d)
        .map(|j| kt.c(d, j) * ball_intrinsic_volume(d, j, r))
        .collect()
}

/// `P_{i,s}(d)` for `K = B(0, R)`, as an upper-triangular `(d+1)×(d+1)` matrix.
///
/// The inner sum runs over compositions `r_1 + ... + r_t = td + i - s` with
/// `i ≤ r_m ≤ d - 1`.
pub fn p_coefficients(d: usize, r: f64) -> Result<DMatrix<f64>> {
    if d == 0 {
        return Err(Error::UnsupportedDimension(d));
    }
    let kt = KappaTable::new(d);
    let w = composition_weights(d, r);
    let e = (-ball_intrinsic_volume(d, d, r)).exp();
    let mut p = DMatrix::zeros(d + 1, d + 1);
    for i in 0..=d {
        for s in i..=d {
            let mut bracket = if s == i { 1.0 } else { 0.0 };
            if i != d {
                let mut sum_t = 0.0;
                for t in 1..=(s - i) {
                    let total = (t * d + i) as i64 - s as i64;
                    let mut inner = 0.0;
                    for_each_composition(t, total, i as i64, d as i64 - 1, &mut |rs| {
                        inner += rs.iter().map(|&k| w[k as usize]).product::<f64>();
                    });
                    sum_t += (-1f64).powi(t as i32) / factorial(t) * inner;
                }
                bracket += kt.c(i, s) * sum_t;
            }
            p[(i, s)] = e * bracket;
        }
    }
    Ok(p)
}

/// Both sides of the series identity linking `P` to the inclusion-exclusion
/// expansion: for a convex `L` with intrinsic volumes `vl`,
/// `Σ_{l=1}^{depth} (-1)^{l-1}/l! Σ_s P̃_{s,l,i} V_s(L) - V_i(L)` against
/// `-Σ_s V_s(L) P_{i,s}`. `P̃_{s,l,i}` sums over compositions of `ld - s + i`
/// into `l` parts in `0..=d`, computed as a coefficient of the `l`-th power of
/// the weight polynomial.
pub fn pp_identity(d: usize, r: f64, vl: &[f64], i: usize, depth: usize) -> Result<(f64, f64)> {
    if vl.len() != d + 1 {
        return Err(Error::DimensionMismatch {
            expected: d + 1,
            got: vl.len(),
        });
    }
    if i > d {
        return Err(Error::IndexOutOfRange { index: i, n: d + 1 });
    }
    let kt = KappaTable::new(d);
    let w = composition_weights(d, r);
    let mut poly = vec![1.0];
    let mut lhs_terms = Vec::with_capacity(depth);
    let mut log_fact = 0.0f64;
    for l in 1..=depth {
        let mut next = vec![0.0; poly.len() + d];
        for (a, pa) in poly.iter().enumerate() {
            for (b, wb) in w.iter().enumerate() {
                next[a + b] += pa * wb;
            }
        }
        poly = next;
        log_fact += (l as f64).ln();
        let mut inner = 0.0;
        for s in i..=d {
            let idx = l * d + i - s;
            inner += kt.c(i, s) * poly[idx] * vl[s];
        }
        let sign = if l % 2 == 1 { 1.0 } else { -1.0 };
        lhs_terms.push(sign * inner / log_fact.exp());
    }
    let lhs = lhs_terms.iter().sum::<f64>() - vl[i];
    let p = p_coefficients(d, r)?;
    let rhs = -(i..=d).map(|s| vl[s] * p[(i, s)]).sum::<f64>();
    Ok((lhs, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::function::gamma::gamma;
    use std::f64::consts::PI;

    #[test]
    fn kappa_matches_known_values() {
        assert_eq!(kappa(0), 1.0);
        assert_eq!(kappa(1), 2.0);
        assert!((kappa(3) - 4.0 * PI / 3.0).abs() < 1e-14);
        assert!((kappa(4) - PI * PI / 2.0).abs() < 1e-14);
        let t = KappaTable::new(10);
        for m in 0..=10 {
            let closed = PI.powf(m as f64 / 2.0) / gamma(m as f64 / 2.0 + 1.0);
            assert!((t.get(m) - closed).abs() < 1e-12);
        }
        assert!((t.c(0, 1) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn wills_functional_examples() {
        assert!((wills_functional(&ConvexBody::Ball { d: 1, r: 1.0 }).unwrap() - 4.0).abs() < 1e-14);
        assert!(
            (wills_functional(&ConvexBody::Ball { d: 2, r: 1.0 }).unwrap() - 4.0 * PI).abs()
                < 1e-13
        );
        assert_eq!(wills_functional(&ConvexBody::Empty { d: 2 }).unwrap(), 0.0);
        assert!(wills_functional(&ConvexBody::Volumes { d: 2, v: vec![1.0] }).is_err());
    }

    #[test]
    fn ball_volumes_in_the_plane() {
        let v = ball_intrinsic_volumes(2, 2.0);
        assert!((v[0] - 1.0).abs() < 1e-15);
        assert!((v[1] - 2.0 * PI).abs() < 1e-13);
        assert!((v[2] - 4.0 * PI).abs() < 1e-13);
    }

    #[test]
    fn p_coefficients_in_one_dimension() {
        let r = 0.7;
        let p = p_coefficients(1, r).unwrap();
        let e = (-2.0 * r).exp();
        assert!((p[(1, 1)] - e).abs() < 1e-15);
        assert!((p[(0, 0)] - e).abs() < 1e-15);
        assert!((p[(0, 1)] + e).abs() < 1e-15);
        assert_eq!(p[(1, 0)], 0.0);
    }

    #[test]
    fn compositions_are_counted() {
        let mut count = 0;
        for_each_composition(3, 4, 0, 2, &mut |_| count += 1);
        // coefficient of z^4 in (1 + z + z^2)^3
        assert_eq!(count, 6);
    }

    #[test]
    fn pp_identity_holds_in_one_and_two_dimensions() {
        for (d, r, vl) in [
            (1, 0.4, vec![1.0, 0.8]),
            (1, 1.3, vec![1.0, 2.5]),
            (2, 0.5, vec![1.0, 1.2, 0.9]),
        ] {
            for i in 0..=d {
                let (lhs, rhs) = pp_identity(d, r, &vl, i, 40).unwrap();
                assert!((lhs - rhs).abs() < 1e-10, "d={d} i={i}: {lhs} vs {rhs}");
            }
        }
    }
}
