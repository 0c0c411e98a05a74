//! Single-mode matrices and their embedding into a composite basis.

use std::sync::Arc;

use nalgebra::DMatrix;

use super::basis::CompositeBasis;
use super::operator::{SparseOperator, C64};
use crate::error::{Error, Result};

/// `|to><from|` on a `levels`-dimensional mode.
pub fn transition(levels: usize, to: usize, from: usize) -> DMatrix<C64> {
    let mut m = DMatrix::from_element(levels, levels, C64::new(0.0, 0.0));
    m[(to, from)] = C64::new(1.0, 0.0);
    m
}

pub fn projector(levels: usize, k: usize) -> DMatrix<C64> {
    transition(levels, k, k)
}

/// `|1><0|`.
pub fn sigma_plus(levels: usize) -> DMatrix<C64> {
    transition(levels, 1, 0)
}

/// `|0><1|`.
pub fn sigma_minus(levels: usize) -> DMatrix<C64> {
    transition(levels, 0, 1)
}

/// Truncated bosonic annihilator, `a|k> = sqrt(k)|k-1>`.
pub fn lowering(levels: usize) -> DMatrix<C64> {
    let mut m = DMatrix::from_element(levels, levels, C64::new(0.0, 0.0));
    for k in 1..levels {
        m[(k - 1, k)] = C64::new((k as f64).sqrt(), 0.0);
    }
    m
}

pub fn identity(levels: usize) -> DMatrix<C64> {
    DMatrix::identity(levels, levels)
}

/// Embeds a single-mode matrix, acting as identity on all other modes. On a
/// restricted basis only matrix elements between retained states are kept.
pub fn embed(local: &DMatrix<C64>, label: &str, basis: &Arc<CompositeBasis>) -> Result<SparseOperator> {
    embed_product(&[(label, local)], basis)
}

/// Embeds a tensor product of single-mode matrices on distinct modes.
///
/// Every factor is applied to the full occupation tuple before projecting, so
/// the result is the sector projection of the full product. This differs from
/// multiplying individually projected factors when an intermediate state
/// leaves the sector (e.g. `a σ⁺` on a state at the sector bound).
pub fn embed_product(factors: &[(&str, &DMatrix<C64>)], basis: &Arc<CompositeBasis>) -> Result<SparseOperator> {
    let mut positions = Vec::with_capacity(factors.len());
    for (label, m) in factors {
        let idx = basis.mode_index(label)?;
        let levels = basis.modes()[idx].levels;
        if m.nrows() != levels || m.ncols() != levels {
            return Err(Error::Shape { expected: levels, got: m.nrows().max(m.ncols()) });
        }
        if positions.iter().any(|&(p, _)| p == idx) {
            return Err(Error::Config(format!("mode `{label}` appears twice in a product; multiply locally first")));
        }
        positions.push((idx, *m));
    }

    let zero = C64::new(0.0, 0.0);
    let mut triplets = Vec::new();
    let mut branch: Vec<(Vec<u8>, C64)> = Vec::new();
    let mut next: Vec<(Vec<u8>, C64)> = Vec::new();
    for col in 0..basis.dim() {
        branch.clear();
        branch.push((basis.occupation(col).to_vec(), C64::new(1.0, 0.0)));
        for &(idx, m) in &positions {
            next.clear();
            for (tuple, amp) in &branch {
                let from = tuple[idx] as usize;
                for to in 0..m.nrows() {
                    let v = m[(to, from)];
                    if v != zero {
                        let mut t = tuple.clone();
                        t[idx] = to as u8;
                        next.push((t, amp * v));
                    }
                }
            }
            std::mem::swap(&mut branch, &mut next);
        }
        for (tuple, amp) in &branch {
            if let Some(row) = basis.index_of(tuple) {
                triplets.push((row, col, *amp));
            }
        }
    }
    SparseOperator::from_triplets(basis.clone(), triplets)
}
