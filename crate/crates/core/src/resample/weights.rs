//! The weights `k_{n,A} = 1 / (C(n,|A|) (n - |A|))` and the `(A, j)` sampler.

use num_rational::Ratio;
use rand::seq::index::sample;
use rand::Rng as _;

use crate::rng::Rng;

/// Largest `n` handled in exact integer arithmetic.
pub const EXACT_WEIGHT_MAX_N: usize = 64;

pub fn binomial_u128(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // exact at each step: acc * (n - i) is divisible by (i + 1)
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// `k_{n,A}` for `|A| = size`, exact for `n <= 64`.
pub fn k_weight_exact(n: usize, size: usize) -> Option<Ratio<u128>> {
    if n > EXACT_WEIGHT_MAX_N || size >= n {
        return None;
    }
    Some(Ratio::new(1, binomial_u128(n, size) * (n - size) as u128))
}

fn ln_binomial(n: usize, k: usize) -> f64 {
    statrs::function::factorial::ln_binomial(n as u64, k as u64)
}

/// `k_{n,A}` as a float; log-space beyond the exact range.
pub fn k_weight(n: usize, size: usize) -> f64 {
    assert!(size < n, "A must be a strict subset of [n]");
    if n <= EXACT_WEIGHT_MAX_N {
        1.0 / (binomial_u128(n, size) as f64 * (n - size) as f64)
    } else {
        (-ln_binomial(n, size) - ((n - size) as f64).ln()).exp()
    }
}

/// A draw `(A, j)` with probability `k_{n,A} / n`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubsetDraw {
    /// Sorted, 0-based.
    pub a_set: Vec<usize>,
    pub j: usize,
    pub weight: f64,
}

/// `|A|` uniform on `0..n`, `A` uniform among subsets of that size, `j`
/// uniform on the complement.
pub fn sample_weighted_subset(n: usize, rng: &mut Rng) -> SubsetDraw {
    assert!(n >= 1, "sample size must be positive");
    let size = rng.random_range(0..n);
    let mut picked = sample(rng, n, size + 1).into_vec();
    // the first `size` picks form A, the last is j: uniform on the complement
    let j = picked.pop().expect("size + 1 >= 1 picks");
    picked.sort_unstable();
    SubsetDraw {
        a_set: picked,
        j,
        weight: k_weight(n, size),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;

    #[test]
    fn total_mass_is_n_exactly() {
        for n in 1..=20usize {
            let mut total: Ratio<u128> = Ratio::from_integer(0);
            for s in 0..n {
                let k = k_weight_exact(n, s).unwrap();
                total += k * Ratio::from_integer(binomial_u128(n, s) * (n - s) as u128);
            }
            assert_eq!(total, Ratio::from_integer(n as u128));
        }
    }

    #[test]
    fn float_weights_match_log_space() {
        let n = 64;
        for s in [0, 10, 32, 63] {
            let a = k_weight(n, s);
            let b = (-ln_binomial(n, s) - ((n - s) as f64).ln()).exp();
            assert!((a - b).abs() / a < 1e-10);
        }
    }

    #[test]
    fn n2_outcomes_are_uniform() {
        let mut rng = rng_from_seed(1);
        let mut counts = std::collections::HashMap::new();
        let reps = 200_000;
        for _ in 0..reps {
            let d = sample_weighted_subset(2, &mut rng);
            assert!(!d.a_set.contains(&d.j));
            *counts.entry((d.a_set.clone(), d.j)).or_insert(0usize) += 1;
        }
        assert_eq!(counts.len(), 4);
        let se = (0.25f64 * 0.75 / reps as f64).sqrt();
        for c in counts.values() {
            assert!((*c as f64 / reps as f64 - 0.25).abs() < 4.0 * se);
        }
    }
}
