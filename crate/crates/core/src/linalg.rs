//! Dense complex matrix helpers for small hermitian problems.
//!
//! Every matrix function here goes through a hermitian eigendecomposition;
//! the systems handled by [`crate::hilbert`] are a few dozen levels at most.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

pub const I: Complex64 = Complex64::new(0.0, 1.0);

/// Largest dimension accepted for dense eigendecompositions.
pub const MAX_DIM: usize = 1024;

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    max_abs(&(a - b))
}

pub fn all_finite(m: &CMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

pub fn is_hermitian(m: &CMatrix, tol: f64) -> bool {
    m.is_square() && max_abs_diff(m, &m.adjoint()) <= tol
}

pub fn is_projector(m: &CMatrix, tol: f64) -> bool {
    is_hermitian(m, tol) && max_abs_diff(&(m * m), m) <= tol
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

pub fn trace(m: &CMatrix) -> Complex64 {
    m.diagonal().iter().sum()
}

pub fn identity(dim: usize) -> CMatrix {
    CMatrix::identity(dim, dim)
}

/// Eigendecomposition `H = V diag(λ) V†` of a hermitian matrix.
#[derive(Debug, Clone)]
pub struct Spectral {
    pub values: DVector<f64>,
    pub vectors: CMatrix,
}

impl Spectral {
    pub fn new(h: &CMatrix) -> Self {
        let eig = SymmetricEigen::new(hermitian_part(h));
        Spectral {
            values: eig.eigenvalues,
            vectors: eig.eigenvectors,
        }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// `V diag(f(λ)) V†`.
    pub fn apply(&self, f: impl Fn(f64) -> Complex64) -> CMatrix {
        let mut scaled = self.vectors.clone();
        for (k, mut col) in scaled.column_iter_mut().enumerate() {
            col *= f(self.values[k]);
        }
        &scaled * self.vectors.adjoint()
    }

    /// `e^{-iHt}`.
    pub fn propagator(&self, t: f64) -> CMatrix {
        self.apply(|e| Complex64::from_polar(1.0, -e * t))
    }

    /// `e^{-iHt} X`, computed in the eigenbasis so the cost is `dim² · cols(X)`.
    pub fn propagate(&self, t: f64, x: &CMatrix) -> CMatrix {
        let mut y = self.vectors.adjoint() * x;
        for (k, mut row) in y.row_iter_mut().enumerate() {
            row *= Complex64::from_polar(1.0, -self.values[k] * t);
        }
        &self.vectors * y
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Square root of a positive semidefinite matrix; eigenvalues down to `-tol`
/// are clamped to zero.
pub fn sqrt_psd(m: &CMatrix, tol: f64) -> Result<CMatrix> {
    let spec = Spectral::new(m);
    let min = spec.min_value();
    if min < -tol {
        return Err(Error::invariant(format!(
            "operator is not positive: eigenvalue {min:e} below -{tol:e}"
        )));
    }
    Ok(spec.apply(|e| Complex64::new(e.max(0.0).sqrt(), 0.0)))
}

/// Smallest eigenvalue of the hermitian part.
pub fn min_eigenvalue(m: &CMatrix) -> f64 {
    Spectral::new(m).min_value()
}

/// Orthonormal basis (as columns) of the range of a projector.
pub fn range_basis(projector: &CMatrix) -> CMatrix {
    let spec = Spectral::new(projector);
    let cols: Vec<usize> = (0..spec.dim()).filter(|&k| spec.values[k] > 0.5).collect();
    let dim = spec.dim();
    CMatrix::from_fn(dim, cols.len(), |r, c| spec.vectors[(r, cols[c])])
}

/// `m^n` by repeated squaring.
pub fn matrix_power(m: &CMatrix, mut n: usize) -> CMatrix {
    let mut result = identity(m.nrows());
    let mut base = m.clone();
    while n > 0 {
        if n & 1 == 1 {
            result = &result * &base;
        }
        n >>= 1;
        if n > 0 {
            base = &base * &base;
        }
    }
    result
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn propagator_of_pauli_x() {
        let sx = CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)]);
        let u = Spectral::new(&sx).propagator(0.3);
        let expected = CMatrix::from_row_slice(
            2,
            2,
            &[
                c(0.3f64.cos(), 0.),
                c(0., -(0.3f64.sin())),
                c(0., -(0.3f64.sin())),
                c(0.3f64.cos(), 0.),
            ],
        );
        assert!(max_abs_diff(&u, &expected) < 1e-14);
    }

    #[test]
    fn sqrt_rejects_negative_operator() {
        let m = CMatrix::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(-0.1, 0.)]);
        assert!(sqrt_psd(&m, 1e-12).is_err());
        let ok = CMatrix::from_row_slice(2, 2, &[c(4., 0.), c(0., 0.), c(0., 0.), c(0.25, 0.)]);
        let r = sqrt_psd(&ok, 1e-12).unwrap();
        assert!((r[(0, 0)].re - 2.0).abs() < 1e-14 && (r[(1, 1)].re - 0.5).abs() < 1e-14);
    }

    #[test]
    fn power_matches_repeated_product() {
        let m = CMatrix::from_row_slice(2, 2, &[c(0.9, 0.1), c(0.2, 0.), c(-0.1, 0.3), c(0.5, 0.)]);
        let mut direct = identity(2);
        for _ in 0..13 {
            direct = &direct * &m;
        }
        assert!(max_abs_diff(&matrix_power(&m, 13), &direct) < 1e-13);
        assert!(max_abs_diff(&matrix_power(&m, 0), &identity(2)) == 0.0);
    }

    #[test]
    fn propagate_agrees_with_full_propagator() {
        let h = CMatrix::from_row_slice(2, 2, &[c(1., 0.), c(0.5, -0.2), c(0.5, 0.2), c(-0.3, 0.)]);
        let x = CMatrix::from_row_slice(2, 1, &[c(0.3, 0.1), c(-0.7, 0.)]);
        let spec = Spectral::new(&h);
        let a = spec.propagate(1.7, &x);
        let b = spec.propagator(1.7) * &x;
        assert!(max_abs_diff(&a, &b) < 1e-14);
    }
}
