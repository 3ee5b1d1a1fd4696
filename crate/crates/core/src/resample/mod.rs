//! Coordinate resampling calculus.
//!
//! Indices are 0-based throughout. `X^A` replaces the coordinates in `A` by
//! those of `X'`; `X_{(i)}` replaces coordinate `i` by `X̃_i`.

pub mod enumerate;
pub mod laws;
pub mod weights;

use nalgebra::DMatrix;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functionals::{sub, Functional};
use crate::rng::Rng;
use crate::stats::pairwise_sum;

pub use laws::{CoordLaw, CubeVertices, FiniteLaw, StandardNormal, StandardNormalVec, UniformCube};
pub use weights::{k_weight, k_weight_exact, sample_weighted_subset, SubsetDraw};

/// Default cap on `n` for exact subset enumeration.
pub const SUBSET_ENUMERATION_CAP: usize = 12;

/// Three independent copies `X`, `X'`, `X̃` of the input vector.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch<T> {
    pub x: Vec<T>,
    pub x_prime: Vec<T>,
    pub x_tilde: Vec<T>,
}

impl<T: Clone> SampleBatch<T> {
    pub fn new(x: Vec<T>, x_prime: Vec<T>, x_tilde: Vec<T>) -> Result<Self> {
        if x.is_empty() {
            return Err(Error::invalid("n", "must be positive"));
        }
        for other in [&x_prime, &x_tilde] {
            if other.len() != x.len() {
                return Err(Error::DimensionMismatch {
                    expected: x.len(),
                    got: other.len(),
                });
            }
        }
        Ok(SampleBatch {
            x,
            x_prime,
            x_tilde,
        })
    }

    /// Draws the three copies, in the order `X`, `X'`, `X̃`.
    pub fn draw<L: CoordLaw<T> + ?Sized>(law: &L, n: usize, rng: &mut Rng) -> Self {
        let x = law.sample_n(n, rng);
        let x_prime = law.sample_n(n, rng);
        let x_tilde = law.sample_n(n, rng);
        SampleBatch {
            x,
            x_prime,
            x_tilde,
        }
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    fn check(&self, index: usize) -> Result<()> {
        if index >= self.n() {
            Err(Error::IndexOutOfRange {
                index,
                n: self.n(),
            })
        } else {
            Ok(())
        }
    }

    /// `X^A`.
    pub fn resample_subset(&self, a_set: &[usize]) -> Result<Vec<T>> {
        self.resample_subset_of(&self.x, a_set)
    }

    /// `base` with the coordinates in `A` taken from `X'`.
    pub fn resample_subset_of(&self, base: &[T], a_set: &[usize]) -> Result<Vec<T>> {
        let mut v = base.to_vec();
        for &i in a_set {
            self.check(i)?;
            v[i] = self.x_prime[i].clone();
        }
        Ok(v)
    }

    /// `X^A` for a bitmask `A` (requires `n <= 64`).
    pub fn resample_mask(&self, mask: u64) -> Vec<T> {
        let mut v = self.x.clone();
        for (i, slot) in v.iter_mut().enumerate() {
            if mask >> i & 1 == 1 {
                *slot = self.x_prime[i].clone();
            }
        }
        v
    }

    /// `X_{(i)}`: `X` with coordinate `i` taken from `X̃`.
    pub fn tilde_at(&self, i: usize) -> Result<Vec<T>> {
        self.check(i)?;
        let mut v = self.x.clone();
        v[i] = self.x_tilde[i].clone();
        Ok(v)
    }

    /// Independent copy of the batch with `X` fixed and fresh `X'`, `X̃`.
    pub fn refresh_primes<L: CoordLaw<T> + ?Sized>(&self, law: &L, rng: &mut Rng) -> Self {
        SampleBatch {
            x: self.x.clone(),
            x_prime: law.sample_n(self.n(), rng),
            x_tilde: law.sample_n(self.n(), rng),
        }
    }
}

/// `Δ_j f(base) = f(base) - f(base with slot j taken from X')`.
pub fn delta_j_at<T: Clone, F: Functional<T> + ?Sized>(
    f: &F,
    batch: &SampleBatch<T>,
    base: &[T],
    j: usize,
) -> Result<Vec<f64>> {
    batch.check(j)?;
    f.delta(base, j, &batch.x_prime[j])
        .map_err(|e| e.in_context(format!("delta j={j}")))
}

/// `Δ_j f(X)`.
pub fn delta_j<T: Clone, F: Functional<T> + ?Sized>(
    f: &F,
    batch: &SampleBatch<T>,
    j: usize,
) -> Result<Vec<f64>> {
    delta_j_at(f, batch, &batch.x, j)
}

/// `Δ̃_i Δ_j f(X)`: the change of `Δ_j f(X)` when `X_i` is replaced by `X̃_i`
/// in the first argument. For `i == j` this is `f(X) - f(X_{(j)})`.
pub fn tilde_delta_i_delta_j<T: Clone, F: Functional<T> + ?Sized>(
    f: &F,
    batch: &SampleBatch<T>,
    i: usize,
    j: usize,
) -> Result<Vec<f64>> {
    tilde_delta_at(f, batch, &batch.x, &[], i, j)
}

/// `Δ̃_i Δ_j f(X^A)` where `base = X^A` and `a_set = A`. The substitution acts
/// on the first argument `X`, so it vanishes when `i ∈ A`.
pub fn tilde_delta_at<T: Clone, F: Functional<T> + ?Sized>(
    f: &F,
    batch: &SampleBatch<T>,
    base: &[T],
    a_set: &[usize],
    i: usize,
    j: usize,
) -> Result<Vec<f64>> {
    batch.check(i)?;
    batch.check(j)?;
    if a_set.contains(&i) {
        return Ok(vec![0.0; f.dim()]);
    }
    let first = delta_j_at(f, batch, base, j)?;
    let mut swapped = base.to_vec();
    swapped[i] = batch.x_tilde[i].clone();
    let second = delta_j_at(f, batch, &swapped, j)
        .map_err(|e| e.in_context(format!("tilde i={i}")))?;
    Ok(sub(&first, &second))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TMode {
    Exact,
    MonteCarlo,
}

/// `T = ½ Σ_A k_{n,A} T_A`, or an unbiased estimate of it.
#[derive(Debug, Clone)]
pub struct TMatrix {
    pub t: DMatrix<f64>,
    pub n_terms: usize,
    pub mode: TMode,
    /// Entrywise standard errors (Monte-Carlo mode only).
    pub stderr: Option<DMatrix<f64>>,
}

/// Evaluation strategy for [`t_matrix`].
#[derive(Debug, Clone, Copy)]
pub enum TStrategy {
    Exact { cap: usize },
    MonteCarlo { reps: usize },
}

impl TStrategy {
    pub fn exact() -> Self {
        TStrategy::Exact {
            cap: SUBSET_ENUMERATION_CAP,
        }
    }
}

pub fn t_matrix<T: Clone, F: Functional<T> + ?Sized>(
    f: &F,
    batch: &SampleBatch<T>,
    strategy: TStrategy,
    rng: &mut Rng,
) -> Result<TMatrix> {
    match strategy {
        TStrategy::Exact { cap } => t_matrix_exact(f, batch, cap),
        TStrategy::MonteCarlo { reps } => t_matrix_mc(f, batch, reps, rng),
    }
}

/// Values `f(X^B)` for every subset `B` of `[n]`, indexed by bitmask.
pub(crate) fn subset_table<T: Clone, F: Functional<T> + ?Sized>(
    f: &F,
    batch: &SampleBatch<T>,
) -> Result<Vec<Vec<f64>>> {
    let n = batch.n();
    (0..1u64 << n)
        .map(|mask| f.eval(&batch.resample_mask(mask)))
        .collect()
}

fn t_matrix_exact<T: Clone, F: Functional<T> + ?Sized>(
    f: &F,
    batch: &SampleBatch<T>,
    cap: usize,
) -> Result<TMatrix> {
    let n = batch.n();
    if n > cap || n > 63 {
        return Err(Error::CapExceeded {
            what: "sample size for exact T enumeration",
            value: n,
            cap: cap.min(63),
        });
    }
    let d = f.dim();
    let table = subset_table(f, batch)?;
    let full = (1u64 << n) - 1;
    let mut t = DMatrix::zeros(d, d);
    let mut n_terms = 0;
    for a in 0..full {
        let k = k_weight(n, a.count_ones() as usize);
        for j in 0..n {
            if a >> j & 1 == 1 {
                continue;
            }
            let dx = sub(&table[0], &table[1 << j]);
            let da = sub(&table[a as usize], &table[(a | 1 << j) as usize]);
            for r in 0..d {
                for c in 0..d {
                    t[(r, c)] += 0.5 * k * dx[r] * da[c];
                }
            }
            n_terms += 1;
        }
    }
    Ok(TMatrix {
        t,
        n_terms,
        mode: TMode::Exact,
        stderr: None,
    })
}

/// One draw of `(n/2) Δ_j f(X) Δ_j f(X^A)ᵀ` with `(A, j)` from the weighted sampler.
pub(crate) fn t_draw<T: Clone, F: Functional<T> + ?Sized>(
    f: &F,
    batch: &SampleBatch<T>,
    rng: &mut Rng,
) -> Result<Vec<f64>> {
    let n = batch.n();
    let draw = sample_weighted_subset(n, rng);
    let dx = delta_j(f, batch, draw.j)?;
    let xa = batch.resample_subset(&draw.a_set)?;
    let da = delta_j_at(f, batch, &xa, draw.j)?;
    let d = f.dim();
    let half_n = 0.5 * n as f64;
    let mut out = Vec::with_capacity(d * d);
    for r in 0..d {
        for c in 0..d {
            out.push(half_n * dx[r] * da[c]);
        }
    }
    Ok(out)
}

fn t_matrix_mc<T: Clone, F: Functional<T> + ?Sized>(
    f: &F,
    batch: &SampleBatch<T>,
    reps: usize,
    rng: &mut Rng,
) -> Result<TMatrix> {
    if reps == 0 {
        return Err(Error::invalid("reps", "must be at least 1"));
    }
    let d = f.dim();
    let draws: Vec<Vec<f64>> = (0..reps)
        .map(|_| t_draw(f, batch, rng))
        .collect::<Result<_>>()?;
    let mut t = DMatrix::zeros(d, d);
    let mut se = DMatrix::zeros(d, d);
    for e in 0..d * d {
        let col: Vec<f64> = draws.iter().map(|v| v[e]).collect();
        let mean = pairwise_sum(&col) / reps as f64;
        t[(e / d, e % d)] = mean;
        if reps > 1 {
            let sq: Vec<f64> = col.iter().map(|v| (v - mean).powi(2)).collect();
            se[(e / d, e % d)] = (pairwise_sum(&sq) / (reps as f64 - 1.0) / reps as f64).sqrt();
        } else {
            se[(e / d, e % d)] = f64::INFINITY;
        }
    }
    Ok(TMatrix {
        t,
        n_terms: reps,
        mode: TMode::MonteCarlo,
        stderr: Some(se),
    })
}

/// Uniform index in `0..n`.
pub(crate) fn uniform_index(n: usize, rng: &mut Rng) -> usize {
    rng.random_range(0..n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functionals::{Constant, FnFunctional, LinearStatistic};
    use crate::rng::rng_from_seed;

    fn abc() -> SampleBatch<f64> {
        SampleBatch::new(vec![1.0, 2.0, 3.0], vec![10.0, 20.0, 30.0], vec![-1.0, -2.0, -3.0])
            .unwrap()
    }

    #[test]
    fn subset_views() {
        let b = abc();
        assert_eq!(b.resample_subset(&[]).unwrap(), b.x);
        assert_eq!(b.resample_subset(&[0, 1, 2]).unwrap(), b.x_prime);
        assert_eq!(b.resample_subset(&[1]).unwrap(), vec![1.0, 20.0, 3.0]);
        assert!(b.resample_subset(&[3]).is_err());
        // the batch is untouched
        assert_eq!(b, abc());
    }

    #[test]
    fn second_difference_of_product() {
        let f = FnFunctional::new(1, |x: &[f64]| vec![x[0] * x[1]]);
        let b = SampleBatch::new(vec![2.0, 3.0], vec![0.0, 5.0], vec![7.0, 0.0]).unwrap();
        assert_eq!(tilde_delta_i_delta_j(&f, &b, 0, 1).unwrap(), vec![10.0]);
    }

    #[test]
    fn linear_second_differences() {
        let f = LinearStatistic::new(1);
        let b = abc();
        for i in 0..3 {
            for j in 0..3 {
                let v = tilde_delta_i_delta_j(&f, &b, i, j).unwrap()[0];
                if i == j {
                    let want = (b.x[j] - b.x_tilde[j]) / 3f64.sqrt();
                    assert!((v - want).abs() < 1e-12);
                } else {
                    assert_eq!(v, 0.0);
                }
            }
        }
    }

    #[test]
    fn single_coordinate_t() {
        let f = LinearStatistic::new(1);
        let b = SampleBatch::new(vec![0.3], vec![1.1], vec![0.0]).unwrap();
        let t = t_matrix(&f, &b, TStrategy::exact(), &mut rng_from_seed(0)).unwrap();
        assert!((t.t[(0, 0)] - 0.8f64.powi(2) / 2.0).abs() < 1e-15);
        assert_eq!(t.n_terms, 1);
    }

    #[test]
    fn exact_cap_is_enforced() {
        let f = Constant::new(vec![0.0]);
        let b = SampleBatch::new(vec![0.0; 13], vec![0.0; 13], vec![0.0; 13]).unwrap();
        let err = t_matrix(&f, &b, TStrategy::exact(), &mut rng_from_seed(0)).unwrap_err();
        assert!(err.to_string().contains("cap is 12"));
    }

    #[test]
    fn exact_and_mc_t_agree() {
        let f = LinearStatistic::new(1);
        let b = SampleBatch::new(vec![0.2, -1.0], vec![1.5, 0.4], vec![0.0, 0.0]).unwrap();
        let mut rng = rng_from_seed(5);
        let ex = t_matrix(&f, &b, TStrategy::exact(), &mut rng).unwrap();
        let mc = t_matrix(&f, &b, TStrategy::MonteCarlo { reps: 100_000 }, &mut rng).unwrap();
        let se = mc.stderr.unwrap()[(0, 0)];
        assert!((ex.t[(0, 0)] - mc.t[(0, 0)]).abs() < 3.0 * se + 1e-12);
    }
}
