//! Exact reference solutions of the ideal (dispersive, lossless) transfer.
//!
//! In the single-excitation manifold the collective exchange only couples
//! three states: the W state on the unprimed qubits, the W state on the primed
//! qubits, and the excited coupler. The bright combination
//! `(|W> + |W'>)/sqrt(2)` Rabi-oscillates with the coupler at `Λ = sqrt(2n)|λ|`
//! while the dark combination is frozen, which gives the closed form below.
//! Every single-excitation state carries the same dispersive energy `χ` when
//! the matching conditions hold, so all three branches share the phase
//! `e^{−iχt}`.

use std::sync::Arc;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::device::EffectiveParams;
use crate::error::{Error, Result};
use crate::layout::{Layout, Side};
use crate::quantum::{CompositeBasis, StateVector, C64};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClosedFormState {
    pub t: f64,
    /// Amplitude on `|W>|0..0>'|0_A>`.
    pub c_w: C64,
    /// Amplitude on `|0..0>|W>'|0_A>`.
    pub c_w_primed: C64,
    /// Amplitude on `|0..0>|0..0>'|1_A>`.
    pub c_coupler: C64,
}

impl ClosedFormState {
    pub fn probabilities(&self) -> [f64; 3] {
        [self.c_w.norm_sqr(), self.c_w_primed.norm_sqr(), self.c_coupler.norm_sqr()]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.probabilities().iter().sum()
    }

    /// Embeds the three branches into `basis` (cavities in vacuum).
    pub fn to_state(&self, n: usize, basis: &Arc<CompositeBasis>) -> Result<StateVector> {
        let w = symmetric_excitation(n, basis, Side::Unprimed)?;
        let wp = symmetric_excitation(n, basis, Side::Primed)?;
        let coupler = basis
            .index_with(&[("qA", 1)])?
            .ok_or_else(|| Error::Config("basis does not contain the excited coupler".into()))?;
        let mut amps = w * self.c_w + wp * self.c_w_primed;
        amps[coupler] += self.c_coupler;
        StateVector::new(basis.clone(), amps)
    }
}

/// Amplitudes of the ideal evolution at time `t` starting from the W state on
/// the unprimed qubits.
pub fn closed_form_state(effective: &EffectiveParams, t: f64) -> Result<ClosedFormState> {
    if t < 0.0 {
        return Err(Error::Domain(format!("time must be non-negative, got {t}")));
    }
    let (s, c) = (effective.big_lambda * t).sin_cos();
    let phase = C64::from_polar(1.0, -effective.chi * t);
    // −i for positive λ, +i for negative λ
    let rabi = C64::new(0.0, -effective.lambda_common.signum());
    Ok(ClosedFormState {
        t,
        c_w: phase * (0.5 * (1.0 + c)),
        c_w_primed: phase * (0.5 * (c - 1.0)),
        c_coupler: rabi * phase * (s / std::f64::consts::SQRT_2),
    })
}

/// `π/Λ`.
pub fn transfer_time(effective: &EffectiveParams) -> Result<f64> {
    effective.transfer_time()
}

/// Equal superposition of single excitations on the `n` qubits of one half;
/// every other mode in its ground state. Needs `n >= 2`.
pub fn w_state(n: usize, basis: &Arc<CompositeBasis>, which: Side) -> Result<StateVector> {
    if n < 2 {
        return Err(Error::Domain(format!("a W state needs at least two qubits, got {n}")));
    }
    StateVector::new(basis.clone(), symmetric_excitation(n, basis, which)?)
}

/// W state on the unprimed qubits, primed qubits and coupler in `|0>`,
/// cavities in vacuum. For `n = 1` this is the single excited qubit.
pub fn transfer_initial_state(n: usize, basis: &Arc<CompositeBasis>) -> Result<StateVector> {
    StateVector::new(basis.clone(), symmetric_excitation(n, basis, Side::Unprimed)?)
}

/// Target of a perfect transfer: the W state on the primed qubits with
/// everything else in its ground state.
pub fn ideal_target(n: usize, basis: &Arc<CompositeBasis>) -> Result<StateVector> {
    StateVector::new(basis.clone(), symmetric_excitation(n, basis, Side::Primed)?)
}

fn symmetric_excitation(n: usize, basis: &Arc<CompositeBasis>, side: Side) -> Result<DVector<C64>> {
    if n < 1 {
        return Err(Error::Domain("need at least one qubit".into()));
    }
    let layout = Layout { n, qutrit_levels: 3, cavity_levels: 2 };
    let amp = C64::new(1.0 / (n as f64).sqrt(), 0.0);
    let mut v = DVector::from_element(basis.dim(), C64::new(0.0, 0.0));
    for j in 1..=n {
        let label = layout.qubit_label(layout.site(j, side));
        let idx = basis
            .index_with(&[(label.as_str(), 1)])?
            .ok_or_else(|| Error::Config(format!("basis does not contain |1> on {label}")))?;
        v[idx] = amp;
    }
    Ok(v)
}
