//! `γ₁ … γ₄`.
//!
//! `γ₁` and `γ₂` average `n ‖Δ_j f(X)‖^p` over fresh `(X, X')` and uniform `j`.
//! `γ₃` and `γ₄` need squares of weighted subset sums
//! `S_i = Σ_A k_{n,A} Σ_{j∉A} g(i, A, j)`; each replicate estimates `S_i`
//! twice from independent `(A, j)` draws and uses the product.

use serde::{Deserialize, Serialize};

use super::ZeroTest;
use crate::error::{Error, Result};
use crate::functionals::{check_finite, Functional};
use crate::linalg::vec_norm;
use crate::resample::enumerate::{batch_from, for_each_config, EnumCaps};
use crate::resample::{
    delta_j, delta_j_at, k_weight, sample_weighted_subset, tilde_delta_at, uniform_index,
    CoordLaw, FiniteLaw, SampleBatch,
};
use crate::rng::{par_replicates, stream};
use crate::stats::Estimate;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Gamma12 {
    pub gamma1: Estimate,
    /// `Σ_j E‖Δ_j f‖⁴`, before the square root.
    pub gamma2_sq: Estimate,
    pub gamma2: Estimate,
}

/// The eight group totals, `Σ_i E[S_{g,i}²]`, and the assembled `γ₃`, `γ₄`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Gamma34 {
    /// Groups of `γ₃` (weight `√(‖D‖+‖E‖)`), in the order
    /// `1[E≠0]‖D_A‖‖D‖`, `‖E_A‖‖D‖`, `‖D_A‖‖E‖`, `‖E_A‖‖E‖`.
    pub groups3: [Estimate; 4],
    /// Same groups with weight `√(‖D‖²+‖E‖²)`.
    pub groups4: [Estimate; 4],
    pub gamma3_cubed: Estimate,
    pub gamma4_fourth: Estimate,
    pub gamma3: Estimate,
    pub gamma4: Estimate,
    pub clamped: Vec<String>,
}

pub const GAMMA3_COEFFS: [f64; 4] = [1.5, 9.0, 9.0, 9.0];
pub const GAMMA4_COEFFS: [f64; 4] = [1.5, 6.75, 6.75, 6.75];

fn gamma12_from(v3: &[f64], v4: &[f64]) -> Gamma12 {
    let gamma1 = Estimate::from_samples(v3);
    let gamma2_sq = Estimate::from_samples(v4);
    let (gamma2, _) = gamma2_sq.root(2.0);
    Gamma12 {
        gamma1,
        gamma2_sq,
        gamma2,
    }
}

pub fn estimate_gamma12<T, F, L>(f: &F, law: &L, n: usize, reps: usize, seed: u64) -> Result<Gamma12>
where
    T: Clone + Send + Sync,
    F: Functional<T> + ?Sized,
    L: CoordLaw<T> + ?Sized,
{
    if reps < 2 {
        return Err(Error::invalid("reps", "must be at least 2"));
    }
    if n == 0 {
        return Err(Error::invalid("n", "must be positive"));
    }
    let rows = par_replicates(seed, stream::GAMMA12, reps, |rseed, rng| {
        let x = law.sample_n(n, rng);
        let j = uniform_index(n, rng);
        let xp = law.sample(rng);
        let d = f.delta(&x, j, &xp)?;
        check_finite(&d, rseed)?;
        let norm = vec_norm(&d);
        Ok((n as f64 * norm.powi(3), n as f64 * norm.powi(4)))
    })?;
    let (v3, v4): (Vec<f64>, Vec<f64>) = rows.into_iter().unzip();
    Ok(gamma12_from(&v3, &v4))
}

/// Exact `γ₁`, `γ₂` by enumeration of `(X, X')`.
pub fn exact_gamma12<T, F>(f: &F, law: &FiniteLaw<T>, n: usize, caps: EnumCaps) -> Result<Gamma12>
where
    T: Clone,
    F: Functional<T> + ?Sized,
{
    caps.check(law, n, 2)?;
    let (mut s3, mut s4) = (0.0, 0.0);
    for_each_config(law, 2 * n, |v, p| {
        let batch = batch_from(v, n);
        for j in 0..n {
            let norm = vec_norm(&delta_j(f, &batch, j)?);
            s3 += p * norm.powi(3);
            s4 += p * norm.powi(4);
        }
        Ok(())
    })?;
    Ok(Gamma12 {
        gamma1: Estimate::exact(s3),
        gamma2_sq: Estimate::exact(s4),
        gamma2: Estimate::exact(s4.sqrt()),
    })
}

/// The eight per-`(i, A, j)` summands: four `γ₃` groups then four `γ₄` groups.
fn group_terms<T, F>(
    f: &F,
    batch: &SampleBatch<T>,
    a_set: &[usize],
    i: usize,
    j: usize,
    zero: ZeroTest,
) -> Result<[f64; 8]>
where
    T: Clone,
    F: Functional<T> + ?Sized,
{
    let xa = batch.resample_subset(a_set)?;
    let d = vec_norm(&delta_j(f, batch, j)?);
    let e_vec = tilde_delta_at(f, batch, &batch.x, &[], i, j)?;
    let e = vec_norm(&e_vec);
    let da = vec_norm(&delta_j_at(f, batch, &xa, j)?);
    let ea = vec_norm(&tilde_delta_at(f, batch, &xa, a_set, i, j)?);
    let ind = if zero.is_zero(&e_vec) { 0.0 } else { 1.0 };
    let w3 = (d + e).sqrt();
    let w4 = (d * d + e * e).sqrt();
    Ok([
        ind * w3 * da * d,
        w3 * ea * d,
        w3 * da * e,
        w3 * ea * e,
        ind * w4 * da * d,
        w4 * ea * d,
        w4 * da * e,
        w4 * ea * e,
    ])
}

fn assemble34(groups: [Estimate; 8], totals3: Estimate, totals4: Estimate) -> Gamma34 {
    let (gamma3, c3) = totals3.root(3.0);
    let (gamma4, c4) = totals4.root(4.0);
    let mut clamped = vec![];
    if c3 {
        clamped.push("gamma3".to_string());
    }
    if c4 {
        clamped.push("gamma4".to_string());
    }
    Gamma34 {
        groups3: [groups[0], groups[1], groups[2], groups[3]],
        groups4: [groups[4], groups[5], groups[6], groups[7]],
        gamma3_cubed: totals3,
        gamma4_fourth: totals4,
        gamma3,
        gamma4,
        clamped,
    }
}

fn combine(v: &[f64; 8]) -> (f64, f64) {
    let t3 = (0..4).map(|g| GAMMA3_COEFFS[g] * v[g]).sum();
    let t4 = (0..4).map(|g| GAMMA4_COEFFS[g] * v[4 + g]).sum();
    (t3, t4)
}

/// Nested Monte-Carlo `γ₃`, `γ₄`. `reps_inner` subset draws per replicate are
/// split into two independent halves.
pub fn estimate_gamma34<T, F, L>(
    f: &F,
    law: &L,
    n: usize,
    reps_outer: usize,
    reps_inner: usize,
    seed: u64,
    zero: ZeroTest,
) -> Result<Gamma34>
where
    T: Clone + Send + Sync,
    F: Functional<T> + ?Sized,
    L: CoordLaw<T> + ?Sized,
{
    if reps_inner < 2 {
        return Err(Error::invalid("reps_inner", "must be at least 2"));
    }
    if reps_outer < 2 {
        return Err(Error::invalid("reps_outer", "must be at least 2"));
    }
    let half = reps_inner / 2;
    let nf = n as f64;
    let rows = par_replicates(seed, stream::GAMMA34, reps_outer, |rseed, rng| {
        let batch = SampleBatch::draw(law, n, rng);
        let i = uniform_index(n, rng);
        let mut s = [[0.0f64; 8]; 2];
        for acc in s.iter_mut() {
            for _ in 0..half {
                let draw = sample_weighted_subset(n, rng);
                let g = group_terms(f, &batch, &draw.a_set, i, draw.j, zero)?;
                check_finite(&g, rseed)?;
                for (a, v) in acc.iter_mut().zip(g) {
                    *a += v;
                }
            }
            for a in acc.iter_mut() {
                *a *= nf / half as f64;
            }
        }
        let mut out = [0.0; 8];
        for g in 0..8 {
            out[g] = nf * s[0][g] * s[1][g];
        }
        Ok(out)
    })?;
    let groups: [Estimate; 8] = std::array::from_fn(|g| {
        Estimate::from_samples(&rows.iter().map(|r| r[g]).collect::<Vec<_>>())
    });
    let (t3, t4): (Vec<f64>, Vec<f64>) = rows.iter().map(combine).unzip();
    Ok(assemble34(
        groups,
        Estimate::from_samples(&t3),
        Estimate::from_samples(&t4),
    ))
}

/// Exact `γ₃`, `γ₄` by enumeration of `(X, X', X̃)` and all `(i, A, j)`.
pub fn exact_gamma34<T, F>(
    f: &F,
    law: &FiniteLaw<T>,
    n: usize,
    caps: EnumCaps,
    zero: ZeroTest,
) -> Result<Gamma34>
where
    T: Clone,
    F: Functional<T> + ?Sized,
{
    caps.check(law, n, 3)?;
    if n > 20 {
        return Err(Error::CapExceeded {
            what: "sample size for exact subset sums",
            value: n,
            cap: 20,
        });
    }
    let full = (1u32 << n) - 1;
    let mut totals = [0.0f64; 8];
    for_each_config(law, 3 * n, |v, p| {
        let batch = batch_from(v, n);
        for i in 0..n {
            let mut s = [0.0f64; 8];
            for a in 0..full {
                let a_set: Vec<usize> = (0..n).filter(|b| a >> b & 1 == 1).collect();
                let k = k_weight(n, a_set.len());
                for j in (0..n).filter(|b| a >> b & 1 == 0) {
                    let g = group_terms(f, &batch, &a_set, i, j, zero)?;
                    for (acc, val) in s.iter_mut().zip(g) {
                        *acc += k * val;
                    }
                }
            }
            for g in 0..8 {
                totals[g] += p * s[g] * s[g];
            }
        }
        Ok(())
    })?;
    let groups: [Estimate; 8] = std::array::from_fn(|g| Estimate::exact(totals[g]));
    let (t3, t4) = combine(&totals);
    Ok(assemble34(groups, Estimate::exact(t3), Estimate::exact(t4)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functionals::{Constant, LinearStatistic};
    use crate::resample::laws::StandardNormal;

    #[test]
    fn constant_functional_has_zero_gammas() {
        let f = Constant::new(vec![1.0]);
        let g = estimate_gamma12(&f, &StandardNormal, 5, 100, 1).unwrap();
        assert_eq!(g.gamma1.value, 0.0);
        assert_eq!(g.gamma2.value, 0.0);
        let g = estimate_gamma34(&f, &StandardNormal, 5, 10, 4, 1, ZeroTest::Exact).unwrap();
        assert_eq!(g.gamma3.value, 0.0);
        assert_eq!(g.gamma4.value, 0.0);
    }

    #[test]
    fn linear_gamma1_is_near_closed_form() {
        let n = 50;
        let f = LinearStatistic::new(1);
        let g = estimate_gamma12(&f, &StandardNormal, n, 200_000, 7).unwrap();
        let want = 2f64.powf(1.5) * 2.0 * (2.0 / std::f64::consts::PI).sqrt() / (n as f64).sqrt();
        assert!(g.gamma1.z_score(want) < 4.0, "{:?} vs {want}", g.gamma1);
    }

    #[test]
    fn reps_are_validated() {
        let f = LinearStatistic::new(1);
        assert!(estimate_gamma12(&f, &StandardNormal, 5, 1, 0).is_err());
        assert!(estimate_gamma34(&f, &StandardNormal, 5, 10, 1, 0, ZeroTest::Exact).is_err());
    }

    #[test]
    fn exact_and_mc_gamma34_agree_on_bernoulli() {
        let law = FiniteLaw::bernoulli(0.5);
        let f = LinearStatistic::new(1);
        let ex = exact_gamma34(&f, &law, 3, EnumCaps::default(), ZeroTest::Exact).unwrap();
        let mc = estimate_gamma34(&f, &law, 3, 40_000, 4, 3, ZeroTest::Exact).unwrap();
        assert!(mc.gamma3_cubed.z_score(ex.gamma3_cubed.value) < 4.0);
        assert!(mc.gamma4_fourth.z_score(ex.gamma4_fourth.value) < 4.0);
    }
}
