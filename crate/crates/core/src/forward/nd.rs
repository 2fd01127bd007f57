use std::io::Write;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::io::fmt_g17;

/// Matrix of an operator on the span of the orthonormal boundary basis,
/// `A[(i, j)] = <T f_i, f_j>`.
#[derive(Debug, Clone, PartialEq)]
pub struct NdMatrix(DMatrix<f64>);

impl NdMatrix {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::Dimension {
                expected: m.nrows(),
                got: m.ncols(),
            });
        }
        Ok(Self(m))
    }

    pub fn zeros(m: usize) -> Self {
        Self(DMatrix::zeros(m, m))
    }

    pub fn identity(m: usize) -> Self {
        Self(DMatrix::identity(m, m))
    }

    pub fn from_diagonal(d: &[f64]) -> Self {
        Self(DMatrix::from_diagonal(
            &nalgebra::DVector::from_column_slice(d),
        ))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    /// `(A + Aᵀ) / 2`.
    pub fn symmetrized(&self) -> Self {
        Self((&self.0 + self.0.transpose()) * 0.5)
    }

    /// `‖A − Aᵀ‖_F / ‖A‖_F` (zero for the zero matrix).
    pub fn asymmetry(&self) -> f64 {
        let norm = self.0.norm();
        if norm == 0.0 {
            0.0
        } else {
            (&self.0 - self.0.transpose()).norm() / norm
        }
    }

    fn check_finite(&self) -> Result<()> {
        if self.0.iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(Error::NonFinite)
        }
    }

    /// Eigenvalues of the symmetrized matrix in ascending order.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        self.check_finite()?;
        if self.dim() == 0 {
            return Ok(Vec::new());
        }
        let mut ev: Vec<f64> = SymmetricEigen::new(self.symmetrized().0)
            .eigenvalues
            .iter()
            .copied()
            .collect();
        ev.sort_by(f64::total_cmp);
        Ok(ev)
    }

    /// Smallest eigenvalue of the symmetrized matrix.
    pub fn min_eig(&self) -> Result<f64> {
        Ok(self.eigenvalues()?.first().copied().unwrap_or(0.0))
    }

    pub fn max_eig(&self) -> Result<f64> {
        Ok(self.eigenvalues()?.last().copied().unwrap_or(0.0))
    }

    /// Spectral norm of the symmetrized matrix.
    pub fn norm2(&self) -> Result<f64> {
        let ev = self.eigenvalues()?;
        Ok(ev.iter().fold(0.0f64, |m, v| m.max(v.abs())))
    }

    /// `min_eig(A) ≥ −eps`.
    pub fn is_psd(&self, eps: f64) -> Result<bool> {
        Ok(self.min_eig()? >= -eps)
    }

    /// `x ↦ xᵀ A x` for a coefficient vector.
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        let v = nalgebra::DVector::from_column_slice(x);
        (v.transpose() * &self.0 * &v)[(0, 0)]
    }

    /// `B A Bᵀ` for a rectangular `B`.
    pub fn congruence(&self, b: &DMatrix<f64>) -> Result<Self> {
        if b.ncols() != self.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                got: b.ncols(),
            });
        }
        Ok(Self(b * &self.0 * b.transpose()))
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self(&self.0 * c)
    }

    /// `self += c · other`.
    pub fn axpy(&mut self, c: f64, other: &NdMatrix) {
        self.0.zip_apply(&other.0, |a, b| *a += c * b);
    }

    /// Row-major CSV, every entry as `%.17g`.
    pub fn write_csv(&self, mut out: impl Write) -> Result<()> {
        for i in 0..self.dim() {
            let row: Vec<String> = (0..self.dim()).map(|j| fmt_g17(self.0[(i, j)])).collect();
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }
}

impl Add for &NdMatrix {
    type Output = NdMatrix;
    fn add(self, rhs: &NdMatrix) -> NdMatrix {
        NdMatrix(&self.0 + &rhs.0)
    }
}

impl Sub for &NdMatrix {
    type Output = NdMatrix;
    fn sub(self, rhs: &NdMatrix) -> NdMatrix {
        NdMatrix(&self.0 - &rhs.0)
    }
}

impl Neg for &NdMatrix {
    type Output = NdMatrix;
    fn neg(self) -> NdMatrix {
        NdMatrix(-&self.0)
    }
}

impl Mul<f64> for &NdMatrix {
    type Output = NdMatrix;
    fn mul(self, rhs: f64) -> NdMatrix {
        self.scaled(rhs)
    }
}

impl AddAssign<&NdMatrix> for NdMatrix {
    fn add_assign(&mut self, rhs: &NdMatrix) {
        self.0 += &rhs.0;
    }
}

impl SubAssign<&NdMatrix> for NdMatrix {
    fn sub_assign(&mut self, rhs: &NdMatrix) {
        self.0 -= &rhs.0;
    }
}
