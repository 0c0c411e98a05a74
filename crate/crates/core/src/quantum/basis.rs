//! Composite Hilbert spaces of qutrits and truncated cavity modes.
//!
//! States are occupation tuples, one entry per mode in declaration order. The
//! basis enumerates them lexicographically (first mode most significant), so a
//! flat index is a mixed-radix number when the basis is unrestricted. A sector
//! restriction keeps only tuples whose excitation weight (sum of all
//! occupations: photons plus qutrit level index) is at most `E_max`; the
//! retained tuples stay in lexicographic order and are located by binary
//! search.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModeKind {
    Qutrit,
    Cavity,
}

/// One tensor factor of the composite system.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModeSpec {
    pub kind: ModeKind,
    pub levels: usize,
    pub label: String,
}

impl ModeSpec {
    pub fn qutrit(label: impl Into<String>, levels: usize) -> Self {
        Self { kind: ModeKind::Qutrit, levels, label: label.into() }
    }

    pub fn cavity(label: impl Into<String>, levels: usize) -> Self {
        Self { kind: ModeKind::Cavity, levels, label: label.into() }
    }
}

#[derive(Clone, PartialEq, Eq)]
pub struct CompositeBasis {
    modes: Vec<ModeSpec>,
    sector: Option<usize>,
    /// Flattened occupation tuples, `modes.len()` entries per state.
    states: Vec<u8>,
    dim: usize,
}

impl fmt::Debug for CompositeBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CompositeBasis")
            .field("modes", &self.modes.iter().map(|m| m.label.as_str()).collect::<Vec<_>>())
            .field("sector", &self.sector)
            .field("dim", &self.dim)
            .finish()
    }
}

impl CompositeBasis {
    /// Enumerates the basis for `modes`, optionally restricted to the
    /// excitation sector `weight <= sector`.
    pub fn new(modes: Vec<ModeSpec>, sector: Option<usize>) -> Result<Self> {
        if modes.is_empty() {
            return Err(Error::Config("at least one mode is required".into()));
        }
        let mut seen = HashSet::new();
        for m in &modes {
            if m.levels < 2 {
                return Err(Error::Config(format!("mode `{}` has {} levels (need >= 2)", m.label, m.levels)));
            }
            if m.levels > u8::MAX as usize {
                return Err(Error::Config(format!("mode `{}` has too many levels", m.label)));
            }
            if !seen.insert(m.label.as_str()) {
                return Err(Error::Config(format!("duplicate mode label `{}`", m.label)));
            }
        }

        let width = modes.len();
        let mut states = Vec::new();
        let mut tuple = vec![0u8; width];
        let mut weight = 0usize;
        // Odometer over all tuples in lexicographic order; with a sector bound,
        // whole subtrees above the bound are skipped by carrying early.
        loop {
            if sector.map_or(true, |e| weight <= e) {
                states.extend_from_slice(&tuple);
            }
            let mut pos = width;
            loop {
                if pos == 0 {
                    break;
                }
                pos -= 1;
                let next = tuple[pos] as usize + 1;
                let fits = next < modes[pos].levels && sector.map_or(true, |e| weight + 1 <= e);
                if fits {
                    tuple[pos] += 1;
                    weight += 1;
                    break;
                }
                weight -= tuple[pos] as usize;
                tuple[pos] = 0;
                if pos == 0 {
                    pos = usize::MAX;
                    break;
                }
            }
            if pos == usize::MAX {
                break;
            }
        }

        let dim = states.len() / width;
        if dim == 0 {
            return Err(Error::EmptyBasis("no occupation tuple satisfies the sector bound".into()));
        }
        Ok(Self { modes, sector, states, dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn modes(&self) -> &[ModeSpec] {
        &self.modes
    }

    pub fn sector(&self) -> Option<usize> {
        self.sector
    }

    pub fn is_restricted(&self) -> bool {
        self.sector.is_some()
    }

    pub fn mode_index(&self, label: &str) -> Result<usize> {
        self.modes
            .iter()
            .position(|m| m.label == label)
            .ok_or_else(|| Error::UnknownMode(label.to_string()))
    }

    pub fn mode(&self, label: &str) -> Result<&ModeSpec> {
        Ok(&self.modes[self.mode_index(label)?])
    }

    /// Occupation tuple of basis state `index`.
    pub fn occupation(&self, index: usize) -> &[u8] {
        let w = self.modes.len();
        &self.states[index * w..(index + 1) * w]
    }

    /// Flat index of an occupation tuple, or `None` if it lies outside the
    /// basis (out of range or above the sector bound).
    pub fn index_of(&self, tuple: &[u8]) -> Option<usize> {
        if tuple.len() != self.modes.len() {
            return None;
        }
        if tuple.iter().zip(&self.modes).any(|(&k, m)| k as usize >= m.levels) {
            return None;
        }
        match self.sector {
            None => {
                let mut idx = 0usize;
                for (&k, m) in tuple.iter().zip(&self.modes) {
                    idx = idx * m.levels + k as usize;
                }
                Some(idx)
            }
            Some(e) => {
                if weight(tuple) > e {
                    return None;
                }
                let w = self.modes.len();
                let (mut lo, mut hi) = (0usize, self.dim);
                while lo < hi {
                    let mid = (lo + hi) / 2;
                    match self.states[mid * w..(mid + 1) * w].cmp(tuple) {
                        std::cmp::Ordering::Less => lo = mid + 1,
                        std::cmp::Ordering::Greater => hi = mid,
                        std::cmp::Ordering::Equal => return Some(mid),
                    }
                }
                None
            }
        }
    }

    /// Index of the state with the listed modes excited and everything else
    /// in its ground level.
    pub fn index_with(&self, occupied: &[(&str, u8)]) -> Result<Option<usize>> {
        let mut tuple = vec![0u8; self.modes.len()];
        for &(label, level) in occupied {
            tuple[self.mode_index(label)?] = level;
        }
        Ok(self.index_of(&tuple))
    }

    /// Excitation weight of basis state `index`.
    pub fn weight_of(&self, index: usize) -> usize {
        weight(self.occupation(index))
    }

    /// Index of the all-ground state (always present).
    pub fn ground_index(&self) -> usize {
        0
    }
}

pub fn weight(tuple: &[u8]) -> usize {
    tuple.iter().map(|&k| k as usize).sum()
}
