//! Time-dependent Hamiltonians as sums of constant operators with phases.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::layout::Side;
use crate::quantum::operator::same_basis;
use crate::quantum::{CompositeBasis, SparseOperator, C64};

/// Which summand of the interaction Hamiltonian a term belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    /// `g (e^{iδt} a σ⁺ + h.c.)` for a qubit in its own cavity.
    Qubit(Side),
    /// Coupler `|0> ↔ |1>` with the cavities of one half.
    Coupler(Side),
    /// Qubit `|1> ↔ |2>` with its own cavity.
    QubitTwoPhoton(Side),
    /// Coupler `|1> ↔ |2>` with the cavities of one half.
    CouplerTwoPhoton(Side),
    /// Direct cavity-cavity coupling.
    Crosstalk,
    /// Time-independent operator, e.g. an effective Hamiltonian.
    Static,
}

impl Family {
    /// Terms outside the ideal Hamiltonian.
    pub fn is_unwanted(&self) -> bool {
        matches!(self, Family::QubitTwoPhoton(_) | Family::CouplerTwoPhoton(_) | Family::Crosstalk)
    }
}

/// One summand `coeff · e^{iνt} · op`.
#[derive(Debug, Clone)]
pub struct Term {
    pub family: Family,
    pub coeff: C64,
    pub op: SparseOperator,
    /// Angular frequency of the phase, rad/s.
    pub nu: f64,
    /// Index of the Hermitian-conjugate term (itself for Hermitian terms).
    pub partner: usize,
}

#[derive(Debug, Clone)]
pub struct TermSet {
    basis: Arc<CompositeBasis>,
    terms: Vec<Term>,
}

impl TermSet {
    pub fn new(basis: Arc<CompositeBasis>) -> Self {
        Self { basis, terms: Vec::new() }
    }

    /// A single static Hermitian operator.
    pub fn constant(op: SparseOperator) -> Result<Self> {
        if !op.is_hermitian(1e-12 * op.max_abs().max(1.0)) {
            return Err(Error::Domain("static Hamiltonian must be Hermitian".into()));
        }
        let mut set = Self::new(op.basis().clone());
        set.push_hermitian(Family::Static, 1.0, op)?;
        Ok(set)
    }

    pub fn basis(&self) -> &Arc<CompositeBasis> {
        &self.basis
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Adds `coeff e^{iνt} op + h.c.` as two terms.
    pub fn push_pair(&mut self, family: Family, coeff: C64, op: SparseOperator, nu: f64) -> Result<()> {
        if !same_basis(&self.basis, op.basis()) {
            return Err(Error::IncompatibleBasis);
        }
        let i = self.terms.len();
        let adj = op.adjoint();
        self.terms.push(Term { family, coeff, op, nu, partner: i + 1 });
        self.terms.push(Term { family, coeff: coeff.conj(), op: adj, nu: -nu, partner: i });
        Ok(())
    }

    /// Adds a static Hermitian term with real coefficient.
    pub fn push_hermitian(&mut self, family: Family, coeff: f64, op: SparseOperator) -> Result<()> {
        if !same_basis(&self.basis, op.basis()) {
            return Err(Error::IncompatibleBasis);
        }
        let i = self.terms.len();
        self.terms.push(Term { family, coeff: C64::new(coeff, 0.0), op, nu: 0.0, partner: i });
        Ok(())
    }

    /// Concatenation; partner indices of `other` are shifted.
    pub fn concat(&self, other: &TermSet) -> Result<TermSet> {
        if !same_basis(&self.basis, &other.basis) {
            return Err(Error::IncompatibleBasis);
        }
        let shift = self.terms.len();
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned().map(|mut t| {
            t.partner += shift;
            t
        }));
        Ok(TermSet { basis: self.basis.clone(), terms })
    }

    /// Keeps whole families selected by `keep`.
    pub fn filter_families(&self, keep: impl Fn(Family) -> bool) -> TermSet {
        let mut remap = vec![usize::MAX; self.terms.len()];
        let mut kept = Vec::new();
        for (i, t) in self.terms.iter().enumerate() {
            if keep(t.family) {
                remap[i] = kept.len();
                kept.push(t.clone());
            }
        }
        for t in &mut kept {
            t.partner = remap[t.partner];
        }
        TermSet { basis: self.basis.clone(), terms: kept }
    }

    pub fn count(&self, family: Family) -> usize {
        self.terms.iter().filter(|t| t.family == family).count()
    }

    /// Every term has a partner that is its adjoint at the opposite frequency.
    pub fn pairing_complete(&self) -> bool {
        self.terms.iter().enumerate().all(|(i, t)| {
            let p = match self.terms.get(t.partner) {
                Some(p) => p,
                None => return false,
            };
            p.partner == i && p.nu == -t.nu && p.coeff == t.coeff.conj() && p.op == t.op.adjoint()
        })
    }

    /// `Σ coeff e^{iνt} op` as a sparse matrix.
    pub fn evaluate(&self, t: f64) -> SparseOperator {
        let trip = self.terms.iter().flat_map(|term| {
            let phase = term.coeff * C64::from_polar(1.0, term.nu * t);
            term.op.iter().map(move |(r, c, v)| (r, c, phase * v))
        });
        SparseOperator::from_triplets(self.basis.clone(), trip).expect("terms share the basis")
    }

    /// Fixes the union sparsity pattern so evaluation only rewrites values.
    pub fn compile(&self) -> CompiledHamiltonian {
        CompiledHamiltonian::new(self)
    }
}

/// A [`TermSet`] with a fixed CSR pattern; per evaluation only the phases
/// `coeff·e^{iνt}` are recomputed and scattered into the value array.
#[derive(Debug, Clone)]
pub struct CompiledHamiltonian {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    phases: Vec<(C64, f64)>,
    /// For each term, `(slot, value)` pairs into the value array.
    scatter: Vec<Vec<(usize, C64)>>,
}

impl CompiledHamiltonian {
    fn new(set: &TermSet) -> Self {
        let dim = set.basis.dim();
        let mut rows: Vec<BTreeMap<usize, usize>> = vec![BTreeMap::new(); dim];
        for term in &set.terms {
            for (r, c, _) in term.op.iter() {
                rows[r].entry(c).or_insert(0);
            }
        }
        let mut row_ptr = vec![0];
        let mut cols = Vec::new();
        for row in rows.iter_mut() {
            for (c, slot) in row.iter_mut() {
                *slot = cols.len();
                cols.push(*c);
            }
            row_ptr.push(cols.len());
        }
        let scatter = set
            .terms
            .iter()
            .map(|term| term.op.iter().map(|(r, c, v)| (rows[r][&c], v)).collect())
            .collect();
        let phases = set.terms.iter().map(|t| (t.coeff, t.nu)).collect();
        Self { dim, row_ptr, cols, phases, scatter }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.cols.len()
    }

    pub fn values_at(&self, t: f64, vals: &mut Vec<C64>) {
        vals.clear();
        vals.resize(self.cols.len(), C64::new(0.0, 0.0));
        for ((coeff, nu), scatter) in self.phases.iter().zip(&self.scatter) {
            let phase = coeff * C64::from_polar(1.0, nu * t);
            for &(slot, v) in scatter {
                vals[slot] += phase * v;
            }
        }
    }

    /// `out = H x` for a vector, with values from [`Self::values_at`].
    pub fn apply_vector(&self, vals: &[C64], x: &[C64], out: &mut [C64]) {
        for r in 0..self.dim {
            let mut acc = C64::new(0.0, 0.0);
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += vals[k] * x[self.cols[k]];
            }
            out[r] = acc;
        }
    }

    /// Iterates `(row, col, slot)`.
    pub fn pattern(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        (0..self.dim).flat_map(move |r| (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (r, self.cols[k], k)))
    }

    pub fn to_dense(&self, vals: &[C64]) -> nalgebra::DMatrix<C64> {
        let mut m = nalgebra::DMatrix::from_element(self.dim, self.dim, C64::new(0.0, 0.0));
        for (r, c, k) in self.pattern() {
            m[(r, c)] = vals[k];
        }
        m
    }
}
