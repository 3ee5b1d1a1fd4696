//! The scaled intrinsic-volume functional of a Boolean model.

use crate::error::{Error, Result};
use crate::functionals::{sub, Functional};

use super::{scene, union_intrinsic_volumes};

/// `f(c_1, ..., c_n) = n^{-1/2} (V(∪ B(c_i, R)) - center)`.
///
/// Inputs are germ positions. Replacing one germ only changes the union near
/// the old and new positions, so [`Functional::delta`] evaluates the add-one
/// cost of each position against the grains within `2R` of it. Germs that
/// interact with neither position never enter the computation, which makes
/// second-order differences of non-interacting pairs exactly zero.
#[derive(Debug, Clone)]
pub struct BooleanFunctional {
    pub d: usize,
    pub n: usize,
    pub r: f64,
    pub center: Vec<f64>,
}

impl BooleanFunctional {
    pub fn new(d: usize, n: usize, r: f64, center: Vec<f64>) -> Result<Self> {
        scene::check_dimension(d)?;
        if center.len() != d + 1 {
            return Err(Error::DimensionMismatch {
                expected: d + 1,
                got: center.len(),
            });
        }
        if n == 0 || !(r > 0.0) {
            return Err(Error::invalid("n, R", "must be positive"));
        }
        Ok(BooleanFunctional { d, n, r, center })
    }

    /// Uncentred variant, for experiments where only differences matter.
    pub fn uncentered(d: usize, n: usize, r: f64) -> Result<Self> {
        Self::new(d, n, r, vec![0.0; d + 1])
    }

    fn scale(&self) -> f64 {
        1.0 / (self.n as f64).sqrt()
    }

    fn check_len(&self, x: &[Vec<f64>]) -> Result<()> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: x.len(),
            });
        }
        Ok(())
    }

    /// `V(B(c, R) ∪ U) - V(U)` where `U` is the union of the grains other than `skip`.
    fn add_one(&self, x: &[Vec<f64>], skip: usize, c: &[f64]) -> Result<Vec<f64>> {
        let reach2 = 4.0 * self.r * self.r;
        let near: Vec<Vec<f64>> = x
            .iter()
            .enumerate()
            .filter(|(k, g)| {
                *k != skip && g.iter().zip(c).map(|(a, b)| (a - b).powi(2)).sum::<f64>() <= reach2
            })
            .map(|(_, g)| g.clone())
            .collect();
        let without = if near.is_empty() {
            vec![0.0; self.d + 1]
        } else {
            union_intrinsic_volumes(self.d, &near, self.r, None)?.v
        };
        let mut with = near;
        with.push(c.to_vec());
        let with = union_intrinsic_volumes(self.d, &with, self.r, None)?.v;
        Ok(sub(&with, &without))
    }
}

impl Functional<Vec<f64>> for BooleanFunctional {
    fn dim(&self) -> usize {
        self.d + 1
    }

    fn eval(&self, x: &[Vec<f64>]) -> Result<Vec<f64>> {
        self.check_len(x)?;
        let v = union_intrinsic_volumes(self.d, x, self.r, None)?.v;
        let s = self.scale();
        Ok(v.iter().zip(&self.center).map(|(a, c)| s * (a - c)).collect())
    }

    fn delta(&self, x: &[Vec<f64>], j: usize, replacement: &Vec<f64>) -> Result<Vec<f64>> {
        self.check_len(x)?;
        if j >= x.len() {
            return Err(Error::IndexOutOfRange {
                index: j,
                n: x.len(),
            });
        }
        if replacement.len() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                got: replacement.len(),
            });
        }
        let old = self.add_one(x, j, &x[j])?;
        let new = self.add_one(x, j, replacement)?;
        let s = self.scale();
        Ok(old.iter().zip(&new).map(|(a, b)| s * (a - b)).collect())
    }

    fn is_symmetric(&self) -> bool {
        true
    }

    fn name(&self) -> String {
        format!("boolean(d={}, n={}, R={})", self.d, self.n, self.r)
    }
}
