//! Mode naming and ordering for the 2n-cavity network.
//!
//! Qutrits `q1..qn` sit in cavities `c1..cn`, qutrits `q1'..qn'` in cavities
//! `c1'..cn'`, and the coupler `qA` talks to all 2n cavities. Cavities and
//! non-coupler qutrits are addressed by a flat site index `k in 0..2n`, with
//! the unprimed half first.

use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum::{local, CompositeBasis, ModeSpec, SparseOperator, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    Unprimed,
    Primed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Layout {
    pub n: usize,
    pub qutrit_levels: usize,
    pub cavity_levels: usize,
}

impl Layout {
    pub fn new(n: usize, qutrit_levels: usize, cavity_levels: usize) -> Result<Self> {
        if n < 1 {
            return Err(Error::Config("need at least one cavity pair".into()));
        }
        if !(2..=3).contains(&qutrit_levels) {
            return Err(Error::Config(format!("qutrit levels must be 2 or 3, got {qutrit_levels}")));
        }
        if cavity_levels < 2 {
            return Err(Error::Config(format!("cavity truncation must keep >= 2 levels, got {cavity_levels}")));
        }
        Ok(Self { n, qutrit_levels, cavity_levels })
    }

    /// Three-level qutrits and two-level cavities.
    pub fn standard(n: usize) -> Result<Self> {
        Self::new(n, 3, 2)
    }

    pub fn sites(&self) -> usize {
        2 * self.n
    }

    /// Site index of `(j, side)` with `j` 1-based.
    pub fn site(&self, j: usize, side: Side) -> usize {
        match side {
            Side::Unprimed => j - 1,
            Side::Primed => self.n + j - 1,
        }
    }

    pub fn side_of(&self, site: usize) -> (usize, Side) {
        if site < self.n {
            (site + 1, Side::Unprimed)
        } else {
            (site - self.n + 1, Side::Primed)
        }
    }

    pub fn qubit_label(&self, site: usize) -> String {
        let (j, side) = self.side_of(site);
        match side {
            Side::Unprimed => format!("q{j}"),
            Side::Primed => format!("q{j}'"),
        }
    }

    pub fn cavity_label(&self, site: usize) -> String {
        let (j, side) = self.side_of(site);
        match side {
            Side::Unprimed => format!("c{j}"),
            Side::Primed => format!("c{j}'"),
        }
    }

    pub fn coupler_label(&self) -> &'static str {
        "qA"
    }

    /// Declared order: q1..qn, q1'..qn', qA, c1..cn, c1'..cn'.
    pub fn modes(&self) -> Vec<ModeSpec> {
        let mut modes: Vec<ModeSpec> =
            (0..self.sites()).map(|k| ModeSpec::qutrit(self.qubit_label(k), self.qutrit_levels)).collect();
        modes.push(ModeSpec::qutrit(self.coupler_label(), self.qutrit_levels));
        modes.extend((0..self.sites()).map(|k| ModeSpec::cavity(self.cavity_label(k), self.cavity_levels)));
        modes
    }

    pub fn basis(&self, sector: Option<usize>) -> Result<Arc<CompositeBasis>> {
        Ok(Arc::new(CompositeBasis::new(self.modes(), sector)?))
    }
}

/// Total excitation number: photons plus qutrit level index, summed over all
/// modes of the basis.
pub fn excitation_number(basis: &Arc<CompositeBasis>) -> Result<SparseOperator> {
    let mut total = SparseOperator::zero(basis.clone());
    for mode in basis.modes() {
        let m = DMatrix::from_fn(mode.levels, mode.levels, |r, c| {
            if r == c { C64::new(r as f64, 0.0) } else { C64::new(0.0, 0.0) }
        });
        total = total.add(&local::embed(&m, &mode.label, basis)?)?;
    }
    Ok(total)
}
