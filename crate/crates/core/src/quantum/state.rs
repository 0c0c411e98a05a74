//! Dense pure and mixed states.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::basis::CompositeBasis;
use super::operator::{same_basis, SparseOperator, C64};
use crate::error::{Error, Result};

pub const NORM_TOL: f64 = 1e-12;
pub const EIGEN_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct StateVector {
    basis: Arc<CompositeBasis>,
    amps: DVector<C64>,
}

impl StateVector {
    /// Wraps amplitudes; the norm must be 1 within 1e-12.
    pub fn new(basis: Arc<CompositeBasis>, amps: DVector<C64>) -> Result<Self> {
        if amps.len() != basis.dim() {
            return Err(Error::Shape { expected: basis.dim(), got: amps.len() });
        }
        let norm = amps.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidState(format!("norm {norm} differs from 1")));
        }
        Ok(Self { basis, amps })
    }

    /// Normalizes arbitrary nonzero amplitudes.
    pub fn normalized(basis: Arc<CompositeBasis>, amps: DVector<C64>) -> Result<Self> {
        let norm = amps.norm();
        if norm == 0.0 {
            return Err(Error::InvalidState("zero vector".into()));
        }
        Self::new(basis, amps / C64::new(norm, 0.0))
    }

    /// Builds a state without checking normalization (integrator output).
    pub(crate) fn unchecked(basis: Arc<CompositeBasis>, amps: DVector<C64>) -> Self {
        Self { basis, amps }
    }

    pub fn basis_state(basis: Arc<CompositeBasis>, index: usize) -> Result<Self> {
        if index >= basis.dim() {
            return Err(Error::Shape { expected: basis.dim(), got: index + 1 });
        }
        let mut amps = DVector::from_element(basis.dim(), C64::new(0.0, 0.0));
        amps[index] = C64::new(1.0, 0.0);
        Ok(Self { basis, amps })
    }

    pub fn basis(&self) -> &Arc<CompositeBasis> {
        &self.basis
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.norm()
    }

    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        if !same_basis(&self.basis, &other.basis) {
            return Err(Error::IncompatibleBasis);
        }
        Ok(self.amps.dotc(&other.amps))
    }

    pub fn expectation(&self, op: &SparseOperator) -> Result<C64> {
        if !same_basis(&self.basis, op.basis()) {
            return Err(Error::IncompatibleBasis);
        }
        Ok(op.expectation_vector(self.amps.as_slice()))
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix { basis: self.basis.clone(), mat: &self.amps * self.amps.adjoint() }
    }

    /// Euclidean distance `||self - other||`.
    pub fn distance(&self, other: &StateVector) -> Result<f64> {
        if !same_basis(&self.basis, &other.basis) {
            return Err(Error::IncompatibleBasis);
        }
        Ok((&self.amps - &other.amps).norm())
    }
}

#[derive(Debug, Clone)]
pub struct DensityMatrix {
    basis: Arc<CompositeBasis>,
    mat: DMatrix<C64>,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(basis: Arc<CompositeBasis>, mat: DMatrix<C64>) -> Result<Self> {
        let dim = basis.dim();
        if mat.nrows() != dim || mat.ncols() != dim {
            return Err(Error::Shape { expected: dim, got: mat.nrows() });
        }
        let herm = hermiticity_error(&mat);
        if herm > NORM_TOL {
            return Err(Error::InvalidState(format!("not Hermitian (deviation {herm:e})")));
        }
        let tr = mat.trace();
        if (tr.re - 1.0).abs() > NORM_TOL || tr.im.abs() > NORM_TOL {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let rho = Self { basis, mat };
        let min = rho.min_eigenvalue();
        if min < -EIGEN_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:e}")));
        }
        Ok(rho)
    }

    pub(crate) fn unchecked(basis: Arc<CompositeBasis>, mat: DMatrix<C64>) -> Self {
        Self { basis, mat }
    }

    pub fn basis(&self) -> &Arc<CompositeBasis> {
        &self.basis
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.mat
    }

    pub fn trace(&self) -> C64 {
        self.mat.trace()
    }

    pub fn purity(&self) -> f64 {
        // tr(ρ²) = Σ |ρ_ij|² for Hermitian ρ
        self.mat.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        min_eigenvalue(&self.mat)
    }

    pub fn expectation(&self, op: &SparseOperator) -> Result<C64> {
        if !same_basis(&self.basis, op.basis()) {
            return Err(Error::IncompatibleBasis);
        }
        Ok(op.expectation_dense(&self.mat))
    }

    /// `<psi| rho |psi>`.
    pub fn overlap(&self, psi: &StateVector) -> Result<f64> {
        if !same_basis(&self.basis, psi.basis()) {
            return Err(Error::IncompatibleBasis);
        }
        let v = psi.amplitudes();
        Ok((v.adjoint() * &self.mat * v)[(0, 0)].re)
    }
}

pub(crate) fn hermiticity_error(m: &DMatrix<C64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for r in 0..n {
        for c in r..n {
            worst = worst.max((m[(r, c)] - m[(c, r)].conj()).norm());
        }
    }
    worst
}

pub(crate) fn min_eigenvalue(m: &DMatrix<C64>) -> f64 {
    let herm = (m + m.adjoint()) * C64::new(0.5, 0.0);
    herm.symmetric_eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min)
}
