//! Nearest-neighbour ball features: `f_l = (1[ρ_k(l) ≤ t_a] - c_a)_a`, with
//! `ρ_k(l)` the distance from `x_l` to its `k`-th nearest neighbour, and
//! `f = n^{-1/2} Σ_l f_l`. Summed over `l` this counts the points whose
//! `k`-NN ball is small, a degree-type statistic of the k-NN graph.

use crate::error::{Error, Result};
use crate::functionals::Functional;
use crate::resample::CoordLaw;
use crate::rng::{par_replicates, stream};
use crate::stats::Estimate;

use super::knn::{dist2, nearest};

#[derive(Debug, Clone)]
pub struct KnnBallFeatures {
    /// Dimension of the points.
    pub m: usize,
    pub n: usize,
    pub k: usize,
    pub thresholds: Vec<f64>,
    /// Per-point centering `c_a`, ideally `P(ρ_k ≤ t_a)`.
    pub center: Vec<f64>,
}

/// All first-order differences of one sample, and `M_f`.
#[derive(Debug, Clone)]
pub struct DeltaSweep {
    pub deltas: Vec<Vec<f64>>,
    /// `max_l ‖f_l(x)‖ ∨ max_{j,l} ‖f_l(x^j)‖`.
    pub m_f: f64,
    /// `‖f_l(x)‖` for every `l`.
    pub point_norms: Vec<f64>,
}

impl KnnBallFeatures {
    pub fn new(m: usize, n: usize, k: usize, thresholds: Vec<f64>, center: Vec<f64>) -> Result<Self> {
        if thresholds.is_empty() {
            return Err(Error::invalid("thresholds", "need at least one"));
        }
        if center.len() != thresholds.len() {
            return Err(Error::DimensionMismatch {
                expected: thresholds.len(),
                got: center.len(),
            });
        }
        if k == 0 || n <= k {
            return Err(Error::invalid("k", format!("need 1 <= k < n, got k = {k}, n = {n}")));
        }
        Ok(KnnBallFeatures {
            m,
            n,
            k,
            thresholds,
            center,
        })
    }

    fn check(&self, x: &[Vec<f64>]) -> Result<()> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: x.len(),
            });
        }
        if let Some(p) = x.iter().find(|p| p.len() != self.m) {
            return Err(Error::DimensionMismatch {
                expected: self.m,
                got: p.len(),
            });
        }
        Ok(())
    }

    fn indicators(&self, r2: f64) -> impl Iterator<Item = i64> + '_ {
        self.thresholds.iter().map(move |t| i64::from(*t >= 0.0 && r2 <= t * t))
    }

    fn point_feature(&self, r2: f64) -> Vec<f64> {
        self.indicators(r2)
            .zip(&self.center)
            .map(|(b, c)| b as f64 - c)
            .collect()
    }

    /// Squared `k`-th neighbour distance of every point.
    pub fn kth_dist2(&self, x: &[Vec<f64>]) -> Vec<f64> {
        (0..x.len())
            .map(|l| nearest(x.len(), l, self.k, |q| &x[q])[self.k - 1].0)
            .collect()
    }

    /// Points whose feature may change when `x_j` moves to `y`, together with
    /// their new squared `k`-th neighbour distance. All others keep their
    /// `k`-neighbourhood distance exactly.
    fn affected(&self, x: &[Vec<f64>], r2: &[f64], j: usize, y: &[f64]) -> Vec<(usize, f64)> {
        let n = x.len();
        let moved = |q: usize| if q == j { y } else { &x[q][..] };
        (0..n)
            .filter(|&l| l == j || dist2(&x[l], &x[j]) <= r2[l] || dist2(&x[l], y) < r2[l])
            .map(|l| (l, nearest(n, l, self.k, moved)[self.k - 1].0))
            .collect()
    }

    /// `count(x) - count(x^j)` per threshold, as integers.
    fn delta_counts(&self, x: &[Vec<f64>], r2: &[f64], j: usize, y: &[f64]) -> Vec<i64> {
        let mut out = vec![0i64; self.thresholds.len()];
        for (l, new_r2) in self.affected(x, r2, j, y) {
            for ((o, a), b) in out.iter_mut().zip(self.indicators(r2[l])).zip(self.indicators(new_r2)) {
                *o += a - b;
            }
        }
        out
    }

    fn scale(&self) -> f64 {
        1.0 / (self.n as f64).sqrt()
    }

    /// Per-threshold counts `Σ_l 1[ρ_k(l) ≤ t_a]`.
    pub fn counts(&self, x: &[Vec<f64>]) -> Result<Vec<i64>> {
        self.check(x)?;
        let mut c = vec![0i64; self.thresholds.len()];
        for r2 in self.kth_dist2(x) {
            for (o, b) in c.iter_mut().zip(self.indicators(r2)) {
                *o += b;
            }
        }
        Ok(c)
    }

    /// `f_l(x)` for every `l`.
    pub fn point_features(&self, x: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        self.check(x)?;
        Ok(self.kth_dist2(x).into_iter().map(|r2| self.point_feature(r2)).collect())
    }

    /// `Δ_j f(x)` for all `j` (replacement `x'_j`), sharing one neighbour pass.
    pub fn sweep(&self, x: &[Vec<f64>], x_prime: &[Vec<f64>]) -> Result<DeltaSweep> {
        self.check(x)?;
        self.check(x_prime)?;
        let r2 = self.kth_dist2(x);
        let norm = |v: &[f64]| v.iter().map(|a| a * a).sum::<f64>().sqrt();
        let point_norms: Vec<f64> = r2.iter().map(|r| norm(&self.point_feature(*r))).collect();
        let mut m_f = point_norms.iter().fold(0.0f64, |a, b| a.max(*b));
        let s = self.scale();
        let mut deltas = Vec::with_capacity(x.len());
        for j in 0..x.len() {
            let mut out = vec![0i64; self.thresholds.len()];
            for (l, new_r2) in self.affected(x, &r2, j, &x_prime[j]) {
                m_f = m_f.max(norm(&self.point_feature(new_r2)));
                for ((o, a), b) in out
                    .iter_mut()
                    .zip(self.indicators(r2[l]))
                    .zip(self.indicators(new_r2))
                {
                    *o += a - b;
                }
            }
            deltas.push(out.into_iter().map(|c| s * c as f64).collect());
        }
        Ok(DeltaSweep {
            deltas,
            m_f,
            point_norms,
        })
    }

    /// Estimates `P(ρ_k ≤ t_a)` from an independent pilot run.
    pub fn pilot_center<L: CoordLaw<Vec<f64>> + ?Sized>(
        &self,
        law: &L,
        reps: usize,
        seed: u64,
    ) -> Result<Vec<Estimate>> {
        let rows = par_replicates(seed, stream::PILOT, reps, |_, rng| {
            let x = law.sample_n(self.n, rng);
            let c = self.counts(&x)?;
            Ok(c.into_iter().map(|v| v as f64 / self.n as f64).collect::<Vec<f64>>())
        })?;
        Ok((0..self.thresholds.len())
            .map(|a| Estimate::from_samples(&rows.iter().map(|r| r[a]).collect::<Vec<_>>()))
            .collect())
    }
}

impl Functional<Vec<f64>> for KnnBallFeatures {
    fn dim(&self) -> usize {
        self.thresholds.len()
    }

    fn eval(&self, x: &[Vec<f64>]) -> Result<Vec<f64>> {
        let counts = self.counts(x)?;
        let s = self.scale();
        let n = self.n as f64;
        Ok(counts
            .iter()
            .zip(&self.center)
            .map(|(c, m)| s * (*c as f64 - n * m))
            .collect())
    }

    fn delta(&self, x: &[Vec<f64>], j: usize, replacement: &Vec<f64>) -> Result<Vec<f64>> {
        self.check(x)?;
        if j >= x.len() {
            return Err(Error::IndexOutOfRange {
                index: j,
                n: x.len(),
            });
        }
        let r2 = self.kth_dist2(x);
        let s = self.scale();
        Ok(self
            .delta_counts(x, &r2, j, replacement)
            .into_iter()
            .map(|c| s * c as f64)
            .collect())
    }

    fn is_symmetric(&self) -> bool {
        true
    }

    fn name(&self) -> String {
        format!("knn-ball(m={}, n={}, k={})", self.m, self.n, self.k)
    }
}
