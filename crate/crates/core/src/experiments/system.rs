//! Device recipes and a single transfer run.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analytic::{ideal_target, transfer_initial_state};
use crate::device::{
    apply_breakage, check_conditions, derive_params, effective_params, ConditionReport, DecoherenceParams, DeviceParams,
    Thresholds,
};
use crate::dynamics::{
    build_lindblad_spec, evolve_lindblad, photon_operators, photon_summary, EvolveOptions, PhotonObservables, Probes,
    SimResult,
};
use crate::error::{Error, Result};
use crate::hamiltonians::full_interaction_hamiltonian;
use crate::layout::Layout;
use crate::quantum::{CompositeBasis, DensityMatrix};
use crate::units::{ghz, mhz};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum CouplingSpec {
    /// `b = |δ_1|/g_1`.
    B(f64),
    /// `g_1` in rad/s.
    G1(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum CrosstalkSpec {
    /// Uniform `g_kl = c · max_k g_Ak`.
    MultipleOfGmax(f64),
    /// Explicit symmetric `2n x 2n` matrix in rad/s with zero diagonal.
    Matrix(Vec<Vec<f64>>),
}

/// Everything needed to build a device: detunings of the unprimed half,
/// qutrit frequencies, coupling scale, crosstalk, the breakage ratio `r` of
/// the primed detunings and the truncation of the simulation basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemSpec {
    /// rad/s, one per cavity pair.
    pub detunings: Vec<f64>,
    pub omega10: f64,
    pub anharmonicity: f64,
    pub coupling: CouplingSpec,
    pub crosstalk: CrosstalkSpec,
    pub r: f64,
    pub qutrit_levels: usize,
    pub cavity_levels: usize,
    /// Maximum total excitation kept; `None` for the full product basis.
    pub sector: Option<usize>,
}

impl SystemSpec {
    /// Three pairs at `δ = −2π·{0.5, 1.0, 1.5}` GHz, `ω_10 = 2π·6.5` GHz,
    /// anharmonicity `−2π·400` MHz, single-excitation sector.
    pub fn reference(b: f64, crosstalk_multiple: f64) -> Self {
        Self {
            detunings: vec![ghz(-0.5), ghz(-1.0), ghz(-1.5)],
            omega10: ghz(6.5),
            anharmonicity: mhz(-400.0),
            coupling: CouplingSpec::B(b),
            crosstalk: CrosstalkSpec::MultipleOfGmax(crosstalk_multiple),
            r: 1.0,
            qutrit_levels: 3,
            cavity_levels: 2,
            sector: Some(1),
        }
    }

    pub fn n(&self) -> usize {
        self.detunings.len()
    }

    pub fn layout(&self) -> Result<Layout> {
        Layout::new(self.n(), self.qutrit_levels, self.cavity_levels)
    }

    pub fn basis(&self) -> Result<Arc<CompositeBasis>> {
        self.layout()?.basis(self.sector)
    }

    pub fn g1(&self) -> Result<f64> {
        let delta1 = self.detunings.first().ok_or_else(|| Error::Config("no detunings given".into()))?.abs();
        match self.coupling {
            CouplingSpec::B(b) if b > 0.0 && b.is_finite() => Ok(delta1 / b),
            CouplingSpec::G1(g) if g > 0.0 && g.is_finite() => Ok(g),
            other => Err(Error::Domain(format!("invalid coupling scale {other:?}"))),
        }
    }

    /// `|δ_1|/g_1`.
    pub fn b(&self) -> Result<f64> {
        Ok(self.detunings[0].abs() / self.g1()?)
    }

    /// The device with every matching condition satisfied (`r = 1`).
    pub fn matched_device(&self) -> Result<DeviceParams> {
        let mut params = derive_params(&self.detunings, self.g1()?, self.n(), self.omega10, self.anharmonicity)?;
        match &self.crosstalk {
            CrosstalkSpec::MultipleOfGmax(c) => {
                if !(*c >= 0.0 && c.is_finite()) {
                    return Err(Error::Domain(format!("crosstalk multiple must be non-negative, got {c}")));
                }
                params.set_uniform_crosstalk(c * params.g_max());
            }
            CrosstalkSpec::Matrix(m) => params.crosstalk = m.clone(),
        }
        params.validate()?;
        Ok(params)
    }

    /// The matched device with the primed detunings scaled by `r`.
    pub fn device(&self) -> Result<DeviceParams> {
        apply_breakage(&self.matched_device()?, self.r)
    }
}

/// Hex SHA-256 of the JSON serialization of `value`.
pub fn param_hash<T: Serialize>(value: &T) -> String {
    let json = serde_json::to_vec(value).expect("parameter types serialize to JSON");
    format!("{:x}", Sha256::digest(&json))
}

#[derive(Debug, Clone)]
pub struct TransferRun {
    pub params: DeviceParams,
    /// `π/Λ` of the matched device, seconds.
    pub t_transfer: f64,
    /// Time at which the fidelity was taken.
    pub horizon: f64,
    pub fidelity: f64,
    pub fidelity_sq: f64,
    pub photons: PhotonObservables,
    pub conditions: ConditionReport,
    pub result: SimResult<DensityMatrix>,
}

/// Evolves the master equation from the W state on the unprimed qubits and
/// scores the final state against the W state on the primed qubits.
/// `horizon` defaults to the ideal transfer time of the matched device.
pub fn run_transfer(
    system: &SystemSpec,
    decoherence: &DecoherenceParams,
    horizon: Option<f64>,
    options: &EvolveOptions,
) -> Result<TransferRun> {
    let layout = system.layout()?;
    let basis = system.basis()?;
    let params = system.device()?;
    let t_transfer = effective_params(&system.matched_device()?)?.transfer_time()?;
    let horizon = horizon.unwrap_or(t_transfer);

    let h = full_interaction_hamiltonian(&params, &basis)?;
    let spec = build_lindblad_spec(decoherence, &basis)?;
    let rho0 = transfer_initial_state(layout.n, &basis)?.to_density();
    let probes = Probes::fidelity(ideal_target(layout.n, &basis)?).with_observables(photon_operators(&layout, &basis)?);
    let mut result = evolve_lindblad(&h, &spec, &rho0, horizon, options, &probes)?;
    result.metadata.param_hash = Some(param_hash(&(&params, decoherence, options)));
    let photons = photon_summary(&result, &layout)?;
    let fidelity = result.final_fidelity().expect("fidelity is probed");
    Ok(TransferRun {
        conditions: check_conditions(&params, &Thresholds::default()),
        params,
        t_transfer,
        horizon,
        fidelity,
        fidelity_sq: fidelity * fidelity,
        photons,
        result,
    })
}
