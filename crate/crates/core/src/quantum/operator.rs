//! Sparse complex operators over a [`CompositeBasis`].
//!
//! Storage is CSR with column indices sorted inside each row and no duplicate
//! or explicitly-zero entries, so two operators are equal exactly when their
//! arrays are equal.

use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::basis::CompositeBasis;
use crate::error::{Error, Result};

pub type C64 = Complex64;

const ZERO: C64 = C64::new(0.0, 0.0);

#[derive(Debug, Clone)]
pub struct SparseOperator {
    basis: Arc<CompositeBasis>,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<C64>,
}

impl PartialEq for SparseOperator {
    fn eq(&self, other: &Self) -> bool {
        same_basis(&self.basis, &other.basis)
            && self.row_ptr == other.row_ptr
            && self.cols == other.cols
            && self.vals == other.vals
    }
}

pub(crate) fn same_basis(a: &Arc<CompositeBasis>, b: &Arc<CompositeBasis>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

impl SparseOperator {
    /// Builds an operator from triplets. Duplicates are summed and exact zeros
    /// dropped.
    pub fn from_triplets(basis: Arc<CompositeBasis>, triplets: impl IntoIterator<Item = (usize, usize, C64)>) -> Result<Self> {
        let dim = basis.dim();
        let mut rows: Vec<BTreeMap<usize, C64>> = vec![BTreeMap::new(); dim];
        for (r, c, v) in triplets {
            if r >= dim || c >= dim {
                return Err(Error::Shape { expected: dim, got: r.max(c) + 1 });
            }
            *rows[r].entry(c).or_insert(ZERO) += v;
        }
        Ok(Self::from_rows(basis, rows))
    }

    fn from_rows(basis: Arc<CompositeBasis>, rows: Vec<BTreeMap<usize, C64>>) -> Self {
        let mut row_ptr = Vec::with_capacity(rows.len() + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for row in rows {
            for (c, v) in row {
                if v != ZERO {
                    cols.push(c);
                    vals.push(v);
                }
            }
            row_ptr.push(cols.len());
        }
        Self { basis, row_ptr, cols, vals }
    }

    pub fn zero(basis: Arc<CompositeBasis>) -> Self {
        let dim = basis.dim();
        Self { basis, row_ptr: vec![0; dim + 1], cols: Vec::new(), vals: Vec::new() }
    }

    pub fn identity(basis: Arc<CompositeBasis>) -> Self {
        let dim = basis.dim();
        Self {
            basis,
            row_ptr: (0..=dim).collect(),
            cols: (0..dim).collect(),
            vals: vec![C64::new(1.0, 0.0); dim],
        }
    }

    /// Diagonal operator with the given real entries.
    pub fn diagonal(basis: Arc<CompositeBasis>, diag: &[f64]) -> Result<Self> {
        if diag.len() != basis.dim() {
            return Err(Error::Shape { expected: basis.dim(), got: diag.len() });
        }
        Self::from_triplets(basis, diag.iter().enumerate().map(|(i, &d)| (i, i, C64::new(d, 0.0))))
    }

    pub fn basis(&self) -> &Arc<CompositeBasis> {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn is_zero(&self) -> bool {
        self.vals.is_empty()
    }

    /// Iterates `(row, col, value)` in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.dim()).flat_map(move |r| {
            (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (r, self.cols[k], self.vals[k]))
        })
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (self.cols[k], self.vals[k]))
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        let span = &self.cols[self.row_ptr[r]..self.row_ptr[r + 1]];
        match span.binary_search(&c) {
            Ok(k) => self.vals[self.row_ptr[r] + k],
            Err(_) => ZERO,
        }
    }

    fn check(&self, other: &Self) -> Result<()> {
        if same_basis(&self.basis, &other.basis) {
            Ok(())
        } else {
            Err(Error::IncompatibleBasis)
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Self::from_triplets(self.basis.clone(), self.iter().chain(other.iter()))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Self::from_triplets(self.basis.clone(), self.iter().chain(other.iter().map(|(r, c, v)| (r, c, -v))))
    }

    pub fn scale(&self, c: C64) -> Self {
        if c == ZERO {
            return Self::zero(self.basis.clone());
        }
        let mut out = self.clone();
        out.vals.iter_mut().for_each(|v| *v *= c);
        out
    }

    /// Matrix product `self * other`. On a sector-restricted basis this is the
    /// product of the projected matrices.
    pub fn multiply(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let dim = self.dim();
        let mut rows: Vec<BTreeMap<usize, C64>> = vec![BTreeMap::new(); dim];
        for (r, row) in rows.iter_mut().enumerate() {
            for (k, a) in self.row(r) {
                for (c, b) in other.row(k) {
                    *row.entry(c).or_insert(ZERO) += a * b;
                }
            }
        }
        Ok(Self::from_rows(self.basis.clone(), rows))
    }

    pub fn adjoint(&self) -> Self {
        let dim = self.dim();
        let mut rows: Vec<BTreeMap<usize, C64>> = vec![BTreeMap::new(); dim];
        for (r, c, v) in self.iter() {
            rows[c].insert(r, v.conj());
        }
        Self::from_rows(self.basis.clone(), rows)
    }

    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.multiply(other)?.sub(&other.multiply(self)?)
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.vals.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise deviation from Hermiticity.
    pub fn hermiticity_error(&self) -> f64 {
        self.iter().map(|(r, c, v)| (v - self.get(c, r).conj()).norm()).fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_error() <= tol
    }

    /// `out = self * x`.
    pub fn apply(&self, x: &[C64], out: &mut [C64]) {
        for (r, o) in out.iter_mut().enumerate() {
            let mut acc = ZERO;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.vals[k] * x[self.cols[k]];
            }
            *o = acc;
        }
    }

    pub fn apply_vector(&self, x: &DVector<C64>) -> DVector<C64> {
        let mut out = DVector::from_element(self.dim(), ZERO);
        self.apply(x.as_slice(), out.as_mut_slice());
        out
    }

    /// `<psi| self |psi>` for a state-vector amplitude slice.
    pub fn expectation_vector(&self, psi: &[C64]) -> C64 {
        self.iter().map(|(r, c, v)| psi[r].conj() * v * psi[c]).sum()
    }

    /// `tr(self * rho)` for a dense column-major matrix.
    pub fn expectation_dense(&self, rho: &DMatrix<C64>) -> C64 {
        self.iter().map(|(r, c, v)| v * rho[(c, r)]).sum()
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::from_element(self.dim(), self.dim(), ZERO);
        for (r, c, v) in self.iter() {
            m[(r, c)] = v;
        }
        m
    }

    pub fn from_dense(basis: Arc<CompositeBasis>, m: &DMatrix<C64>) -> Result<Self> {
        let dim = basis.dim();
        if m.nrows() != dim || m.ncols() != dim {
            return Err(Error::Shape { expected: dim, got: m.nrows() });
        }
        let trip: Vec<_> = (0..dim)
            .flat_map(|r| (0..dim).map(move |c| (r, c)))
            .map(|(r, c)| (r, c, m[(r, c)]))
            .filter(|t| t.2 != ZERO)
            .collect();
        Self::from_triplets(basis, trip)
    }

    pub fn diagonal_values(&self) -> Vec<C64> {
        (0..self.dim()).map(|i| self.get(i, i)).collect()
    }

    pub fn is_diagonal(&self) -> bool {
        self.iter().all(|(r, c, _)| r == c)
    }

    /// Restriction to rows and columns whose basis weight is at most
    /// `emax`. Used to check sector closure on unrestricted bases.
    pub fn leaks_above(&self, emax: usize) -> f64 {
        self.iter()
            .filter(|&(r, c, _)| self.basis.weight_of(c) <= emax && self.basis.weight_of(r) > emax)
            .map(|(_, _, v)| v.norm())
            .fold(0.0, f64::max)
    }
}

/// Column-major dense matrix product `out = op * m` with `m` of size dim x dim.
pub(crate) fn sparse_times_dense(op: &SparseOperator, m: &[C64], dim: usize, out: &mut [C64]) {
    out.iter_mut().for_each(|x| *x = ZERO);
    for r in 0..dim {
        for k in op.row_ptr[r]..op.row_ptr[r + 1] {
            let c = op.cols[k];
            let v = op.vals[k];
            for col in 0..dim {
                out[r + col * dim] += v * m[c + col * dim];
            }
        }
    }
}
