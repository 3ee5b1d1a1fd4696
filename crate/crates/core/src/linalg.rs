//! Matrix norms and symmetric square roots.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const SYMMETRY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatrixNorms {
    pub hs: f64,
    pub op: f64,
    pub min_eig: f64,
    /// `1 / min_eig`; `None` when the matrix is not positive definite.
    pub inv_op: Option<f64>,
    pub posdef: bool,
    /// Set when the input had to be symmetrized.
    pub symmetrized: bool,
}

/// Returns `(m + mᵀ)/2` and whether the input was asymmetric beyond tolerance.
pub fn symmetrize(m: &DMatrix<f64>) -> Result<(DMatrix<f64>, bool)> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    let asym = (m - m.transpose()).abs().max();
    Ok(((m + m.transpose()) * 0.5, asym > SYMMETRY_TOL))
}

pub fn matrix_norms(sigma: &DMatrix<f64>) -> Result<MatrixNorms> {
    let (s, symmetrized) = symmetrize(sigma)?;
    let hs = s.norm();
    if s.nrows() == 0 {
        return Ok(MatrixNorms {
            hs,
            op: 0.0,
            min_eig: 0.0,
            inv_op: None,
            posdef: false,
            symmetrized,
        });
    }
    let eig = SymmetricEigen::new(s);
    let op = eig.eigenvalues.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let min_eig = eig.eigenvalues.min();
    let posdef = min_eig > 0.0;
    Ok(MatrixNorms {
        hs,
        op,
        min_eig,
        inv_op: posdef.then(|| 1.0 / min_eig),
        posdef,
        symmetrized,
    })
}

/// Symmetric positive semidefinite square root. Negative eigenvalues within
/// rounding are set to zero, so rank-deficient inputs are supported.
pub fn sym_sqrt(sigma: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let (s, _) = symmetrize(sigma)?;
    let scale = s.abs().max().max(1.0);
    let eig = SymmetricEigen::new(s);
    let mut vals = eig.eigenvalues.clone();
    for v in vals.iter_mut() {
        if *v < 0.0 {
            if *v < -1e-9 * scale {
                return Err(Error::NotPositiveDefinite { min_eig: *v });
            }
            *v = 0.0;
        }
        *v = v.sqrt();
    }
    let q = &eig.eigenvectors;
    Ok(q * DMatrix::from_diagonal(&vals) * q.transpose())
}

/// Inverse of a symmetric positive definite matrix.
pub fn sym_inverse(sigma: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let norms = matrix_norms(sigma)?;
    if !norms.posdef {
        return Err(Error::NotPositiveDefinite {
            min_eig: norms.min_eig,
        });
    }
    let (s, _) = symmetrize(sigma)?;
    let eig = SymmetricEigen::new(s);
    let inv = eig.eigenvalues.map(|v| 1.0 / v);
    let q = &eig.eigenvectors;
    Ok(q * DMatrix::from_diagonal(&inv) * q.transpose())
}

/// Hilbert-Schmidt inner product.
pub fn hs_inner(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.component_mul(b).sum()
}

pub fn vec_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}
