//! Exact expectations by enumeration of finite-support laws.

use nalgebra::DMatrix;

use super::{k_weight, subset_table, FiniteLaw, SampleBatch};
use crate::error::{Error, Result};
use crate::functionals::{sub, Functional};

/// Limits that keep enumeration oracles fast.
#[derive(Debug, Clone, Copy)]
pub struct EnumCaps {
    pub max_n: usize,
    pub max_support: usize,
    pub max_configs: usize,
}

impl Default for EnumCaps {
    fn default() -> Self {
        EnumCaps {
            max_n: super::SUBSET_ENUMERATION_CAP,
            max_support: 3,
            max_configs: 1 << 22,
        }
    }
}

impl EnumCaps {
    /// Checks that `copies` independent length-`n` vectors can be enumerated.
    pub fn check<T>(&self, law: &FiniteLaw<T>, n: usize, copies: usize) -> Result<usize> {
        if n > self.max_n {
            return Err(Error::CapExceeded {
                what: "sample size for enumeration",
                value: n,
                cap: self.max_n,
            });
        }
        if law.support.len() > self.max_support {
            return Err(Error::CapExceeded {
                what: "support size for enumeration",
                value: law.support.len(),
                cap: self.max_support,
            });
        }
        let slots = (n * copies) as u32;
        let configs = (law.support.len() as u128).checked_pow(slots);
        match configs {
            Some(c) if c <= self.max_configs as u128 => Ok(c as usize),
            _ => Err(Error::CapExceeded {
                what: "configuration count for enumeration",
                value: usize::MAX.min(configs.unwrap_or(u128::MAX) as usize),
                cap: self.max_configs,
            }),
        }
    }
}

/// Calls `visit(values, probability)` for every vector in `support^m`.
pub fn for_each_config<T: Clone>(
    law: &FiniteLaw<T>,
    m: usize,
    mut visit: impl FnMut(&[T], f64) -> Result<()>,
) -> Result<()> {
    let s = law.support.len();
    let mut idx = vec![0usize; m];
    let mut values: Vec<T> = vec![law.support[0].clone(); m];
    loop {
        let mut p = 1.0;
        for (k, &i) in idx.iter().enumerate() {
            values[k] = law.support[i].clone();
            p *= law.probs[i];
        }
        visit(&values, p)?;
        let mut k = 0;
        loop {
            if k == m {
                return Ok(());
            }
            idx[k] += 1;
            if idx[k] < s {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

/// Splits a length-`copies * n` configuration into a batch; missing copies
/// repeat `X`.
pub(crate) fn batch_from<T: Clone>(values: &[T], n: usize) -> SampleBatch<T> {
    let part = |c: usize| {
        if values.len() >= (c + 1) * n {
            values[c * n..(c + 1) * n].to_vec()
        } else {
            values[..n].to_vec()
        }
    };
    SampleBatch {
        x: part(0),
        x_prime: part(1),
        x_tilde: part(2),
    }
}

/// Exact `Cov(f(X))`.
pub fn covariance_exact<T: Clone, F: Functional<T> + ?Sized>(
    f: &F,
    law: &FiniteLaw<T>,
    n: usize,
    caps: EnumCaps,
) -> Result<DMatrix<f64>> {
    caps.check(law, n, 1)?;
    let d = f.dim();
    let mut mean = vec![0.0; d];
    let mut second = DMatrix::zeros(d, d);
    for_each_config(law, n, |x, p| {
        let v = f.eval(x)?;
        for r in 0..d {
            mean[r] += p * v[r];
            for c in 0..d {
                second[(r, c)] += p * v[r] * v[c];
            }
        }
        Ok(())
    })?;
    for r in 0..d {
        for c in 0..d {
            second[(r, c)] -= mean[r] * mean[c];
        }
    }
    Ok(second)
}

/// Exact `E[T]` over `(X, X')`, with `T` the full weighted subset sum.
pub fn expected_t_exact<T: Clone, F: Functional<T> + ?Sized>(
    f: &F,
    law: &FiniteLaw<T>,
    n: usize,
    caps: EnumCaps,
) -> Result<DMatrix<f64>> {
    caps.check(law, n, 2)?;
    let d = f.dim();
    let mut acc = DMatrix::zeros(d, d);
    for_each_config(law, 2 * n, |v, p| {
        let batch = batch_from(v, n);
        let t = super::t_matrix_exact(f, &batch, caps.max_n)?;
        acc += t.t * p;
        Ok(())
    })?;
    Ok(acc)
}

/// Both sides of the covariance decomposition
/// `Cov(g, h) = ½ Σ_A k_{n,A} Σ_{j∉A} E[Δ_j g(X) Δ_j h(X^A)]`
/// for scalar `g` and `h`, each computed by enumeration.
pub fn lemma_covariance_decomposition<T: Clone, G, H>(
    g: &G,
    h: &H,
    law: &FiniteLaw<T>,
    n: usize,
    caps: EnumCaps,
) -> Result<(f64, f64)>
where
    G: Functional<T> + ?Sized,
    H: Functional<T> + ?Sized,
{
    for dim in [g.dim(), h.dim()] {
        if dim != 1 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                got: dim,
            });
        }
    }
    caps.check(law, n, 2)?;

    let (mut eg, mut eh, mut egh) = (0.0, 0.0, 0.0);
    for_each_config(law, n, |x, p| {
        let a = g.eval(x)?[0];
        let b = h.eval(x)?[0];
        eg += p * a;
        eh += p * b;
        egh += p * a * b;
        Ok(())
    })?;
    let lhs = egh - eg * eh;

    let full = (1u64 << n) - 1;
    let mut rhs = 0.0;
    for_each_config(law, 2 * n, |v, p| {
        let batch = batch_from(v, n);
        let gt = subset_table(g, &batch)?;
        let ht = subset_table(h, &batch)?;
        let mut inner = 0.0;
        for a in 0..full {
            let k = k_weight(n, a.count_ones() as usize);
            for j in 0..n {
                if a >> j & 1 == 1 {
                    continue;
                }
                let dg = sub(&gt[0], &gt[1 << j])[0];
                let dh = sub(&ht[a as usize], &ht[(a | 1 << j) as usize])[0];
                inner += k * dg * dh;
            }
        }
        rhs += p * 0.5 * inner;
        Ok(())
    })?;
    Ok((lhs, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functionals::{Constant, FnFunctional, LinearStatistic};

    #[test]
    fn bernoulli_sum_decomposition() {
        let law = FiniteLaw::bernoulli(0.5);
        let g = FnFunctional::new(1, |x: &[f64]| vec![x[0] + x[1]]);
        let (lhs, rhs) = lemma_covariance_decomposition(&g, &g, &law, 2, EnumCaps::default()).unwrap();
        assert!((lhs - 0.5).abs() < 1e-12);
        assert!((rhs - 0.5).abs() < 1e-12);
    }

    #[test]
    fn constant_decomposition_is_zero() {
        let law = FiniteLaw::uniform(vec![0.0, 1.0, 2.0]);
        let g = Constant::new(vec![2.0]);
        let h = FnFunctional::new(1, |x: &[f64]| vec![x[1] + x[2]]);
        let (lhs, rhs) = lemma_covariance_decomposition(&g, &h, &law, 3, EnumCaps::default()).unwrap();
        assert!(lhs.abs() < 1e-12 && rhs.abs() < 1e-12);
    }

    #[test]
    fn three_point_product() {
        let law = FiniteLaw::uniform(vec![0.0, 1.0, 2.0]);
        let g = FnFunctional::new(1, |x: &[f64]| vec![x[0] * x[1]]);
        let h = FnFunctional::new(1, |x: &[f64]| vec![x[1] + x[2]]);
        let (lhs, rhs) = lemma_covariance_decomposition(&g, &h, &law, 3, EnumCaps::default()).unwrap();
        // Cov(X1 X2, X2 + X3) = E[X1] Var(X2) = 1 * 2/3
        assert!((lhs - 2.0 / 3.0).abs() < 1e-12);
        assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn expected_t_of_single_bernoulli() {
        let law = FiniteLaw::bernoulli(0.5);
        let f = LinearStatistic::new(1);
        let et = expected_t_exact(&f, &law, 1, EnumCaps::default()).unwrap();
        assert!((et[(0, 0)] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn caps_are_enforced() {
        let law = FiniteLaw::uniform(vec![0.0, 1.0, 2.0, 3.0]);
        let g = Constant::new(vec![0.0]);
        assert!(lemma_covariance_decomposition(&g, &g, &law, 2, EnumCaps::default()).is_err());
    }
}
