//! Reference computations written independently of the library code paths.

#![allow(dead_code)]

use std::collections::HashMap;
use std::f64::consts::PI;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use steinlab::functionals::FnFunctional;

/// Every vector in `support^m` with its probability.
pub fn configs(support: &[f64], probs: &[f64], m: usize) -> Vec<(Vec<f64>, f64)> {
    let mut out = vec![(Vec::new(), 1.0)];
    for _ in 0..m {
        let mut next = Vec::with_capacity(out.len() * support.len());
        for (v, p) in &out {
            for (s, q) in support.iter().zip(probs) {
                let mut w = v.clone();
                w.push(*s);
                next.push((w, p * q));
            }
        }
        out = next;
    }
    out
}

/// An arbitrary function on `support^n`: independent uniform values in
/// `[-2, 2]^dim` for every configuration.
pub fn lookup_functional(support: &[f64], n: usize, dim: usize, seed: u64) -> FnFunctional<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let probs = vec![1.0; support.len()];
    let table: HashMap<Vec<u64>, Vec<f64>> = configs(support, &probs, n)
        .into_iter()
        .map(|(x, _)| {
            let key = x.iter().map(|v| v.to_bits()).collect();
            (key, (0..dim).map(|_| rng.random_range(-2.0..2.0)).collect())
        })
        .collect();
    FnFunctional::new(dim, move |x: &[f64]| {
        let key: Vec<u64> = x.iter().map(|v| v.to_bits()).collect();
        table[&key].clone()
    })
}

pub fn eval(f: &FnFunctional<f64>, x: &[f64]) -> Vec<f64> {
    use steinlab::functionals::Functional;
    f.eval(x).unwrap()
}

/// `Cov(f(X))` by direct enumeration.
pub fn covariance(f: &FnFunctional<f64>, support: &[f64], probs: &[f64], n: usize, dim: usize) -> DMatrix<f64> {
    let mut mean = vec![0.0; dim];
    let mut second = DMatrix::zeros(dim, dim);
    for (x, p) in configs(support, probs, n) {
        let v = eval(f, &x);
        for a in 0..dim {
            mean[a] += p * v[a];
            for b in 0..dim {
                second[(a, b)] += p * v[a] * v[b];
            }
        }
    }
    for a in 0..dim {
        for b in 0..dim {
            second[(a, b)] -= mean[a] * mean[b];
        }
    }
    second
}

/// `(Σ_j E‖f(X) − f(X^j)‖³, Σ_j E‖f(X) − f(X^j)‖⁴)` by enumerating `X` and
/// the single resampled coordinate.
pub fn gamma12_raw(f: &FnFunctional<f64>, support: &[f64], probs: &[f64], n: usize) -> (f64, f64) {
    let (mut s3, mut s4) = (0.0, 0.0);
    for (x, p) in configs(support, probs, n) {
        let fx = eval(f, &x);
        for j in 0..n {
            for (s, q) in support.iter().zip(probs) {
                let mut y = x.clone();
                y[j] = *s;
                let norm = fx.iter().zip(eval(f, &y)).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
                s3 += p * q * norm.powi(3);
                s4 += p * q * norm.powi(4);
            }
        }
    }
    (s3, s4)
}

/// `E|Z|^k` for a standard normal `Z`.
pub fn normal_abs_moment(k: u32) -> f64 {
    use statrs::function::gamma::gamma;
    2f64.powf(k as f64 / 2.0) * gamma((k as f64 + 1.0) / 2.0) / PI.sqrt()
}

/// Limit of `Cov(V_0, V_1)/n` for `n` segments of length `a = 2r` with
/// germs uniform on an interval of length `n`. The components count is
/// `1 + #{spacings > a}` and the length `a + Σ min(spacing, a)`. Spacings are
/// asymptotically i.i.d. Exp(1) conditioned on their sum, so for
/// `g, h` functions of one spacing the limit is
/// `Cov(g(E), h(E)) − Cov(g(E), E) Cov(h(E), E)`.
pub fn boolean_limit_covariance_1d(r: f64) -> DMatrix<f64> {
    let a = 2.0 * r;
    let q = (-a).exp();
    let var_g = q * (1.0 - q);
    let cov_g_e = a * q;
    let var_h = 1.0 - 2.0 * a * q - q * q;
    let cov_h_e = 1.0 - a * q - q;
    let cov_gh = a * q - q + q * q;
    DMatrix::from_row_slice(
        2,
        2,
        &[
            var_g - cov_g_e * cov_g_e,
            cov_gh - cov_g_e * cov_h_e,
            cov_gh - cov_g_e * cov_h_e,
            var_h - cov_h_e * cov_h_e,
        ],
    )
}

fn union_length(mut iv: Vec<(f64, f64)>) -> f64 {
    iv.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut total = 0.0;
    let mut cur: Option<(f64, f64)> = None;
    for (lo, hi) in iv {
        match cur {
            Some((a, b)) if lo <= b => cur = Some((a, b.max(hi))),
            Some((a, b)) => {
                total += b - a;
                cur = Some((lo, hi));
            }
            None => cur = Some((lo, hi)),
        }
    }
    total + cur.map_or(0.0, |(a, b)| b - a)
}

/// Area of a union of equal discs by the midpoint rule over vertical lines;
/// each line's covered length is exact.
pub fn disc_union_area(c: &[[f64; 2]], r: f64, lines: usize) -> f64 {
    let lo = c.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min) - r;
    let hi = c.iter().map(|p| p[0]).fold(f64::NEG_INFINITY, f64::max) + r;
    let h = (hi - lo) / lines as f64;
    (0..lines)
        .map(|i| {
            let x = lo + (i as f64 + 0.5) * h;
            let iv = c
                .iter()
                .filter_map(|p| {
                    let dx = x - p[0];
                    (dx.abs() < r).then(|| {
                        let w = (r * r - dx * dx).sqrt();
                        (p[1] - w, p[1] + w)
                    })
                })
                .collect();
            union_length(iv) * h
        })
        .sum()
}

/// Perimeter of a union of equal discs: for each circle, the fraction of
/// `samples` equally spaced boundary points not inside another disc.
pub fn disc_union_perimeter(c: &[[f64; 2]], r: f64, samples: usize) -> f64 {
    let mut total = 0.0;
    for (i, p) in c.iter().enumerate() {
        let free = (0..samples)
            .filter(|&k| {
                let t = 2.0 * PI * (k as f64 + 0.5) / samples as f64;
                let q = [p[0] + r * t.cos(), p[1] + r * t.sin()];
                c.iter()
                    .enumerate()
                    .all(|(j, o)| j == i || (q[0] - o[0]).powi(2) + (q[1] - o[1]).powi(2) > r * r)
            })
            .count();
        total += 2.0 * PI * r * free as f64 / samples as f64;
    }
    total
}

/// Ordinary least-squares slope of `ln y` on `ln x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}
