//! Cross-checks between the full model, the effective model and a
//! brute-force propagator.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::analytic::{closed_form_state, ideal_target, transfer_initial_state};
use crate::device::{effective_params, DecoherenceParams, DeviceParams};
use crate::dynamics::{build_lindblad_spec, evolve_closed, evolve_lindblad, EvolveOptions, Probes};
use crate::error::{Error, Result};
use crate::hamiltonians::{full_interaction_hamiltonian, interaction_frame_residual, vacuum_split, TermSet};
use crate::layout::Layout;
use crate::quantum::{CompositeBasis, StateVector, C64};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectiveComparison {
    pub horizon: f64,
    /// `max_t |F_full(t) − F_closed_form(t)|` over the sample grid.
    pub max_fidelity_deviation: f64,
    pub final_fidelity_full: f64,
    pub final_fidelity_closed_form: f64,
    /// Relative change of the effective exchange under the `H₀` frame at the
    /// horizon.
    pub frame_residual: f64,
}

/// Lossless evolution under the full interaction Hamiltonian against the
/// closed-form ideal transfer, both scored against the ideal target.
pub fn compare_effective_vs_full(params: &DeviceParams, horizon: f64, options: &EvolveOptions) -> Result<EffectiveComparison> {
    let n = params.n;
    let basis = Layout::standard(n)?.basis(Some(1))?;
    let eff = effective_params(params)?;
    let h = full_interaction_hamiltonian(params, &basis)?;
    let psi0 = transfer_initial_state(n, &basis)?;
    let run = evolve_closed(&h, &psi0, horizon, options, &Probes::fidelity(ideal_target(n, &basis)?))?;
    let mut deviation = 0.0f64;
    let mut last = 0.0;
    for (t, f) in run.times.iter().zip(&run.fidelity) {
        last = closed_form_state(&eff, *t)?.c_w_primed.norm();
        deviation = deviation.max((f - last).abs());
    }
    let (h0, hint) = vacuum_split(params, &basis)?;
    Ok(EffectiveComparison {
        horizon,
        max_fidelity_deviation: deviation,
        final_fidelity_full: run.final_fidelity().expect("fidelity is probed"),
        final_fidelity_closed_form: last,
        frame_residual: interaction_frame_residual(&h0, &hint, horizon)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleOptions {
    /// Uniform steps of the time-ordered exponential product.
    pub micro_steps: usize,
    /// Comparison points, endpoints included; `micro_steps` must be a
    /// multiple of `samples − 1`.
    pub samples: usize,
    /// Integrator tolerance for the adaptive runs.
    pub tol: f64,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self { micro_steps: 10_000, samples: 101, tol: 1e-10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub horizon: f64,
    pub sector_dim: usize,
    pub full_dim: usize,
    /// Max state distance, sector-restricted vs full-basis closed evolution.
    pub closed_sector_vs_full: f64,
    /// Max fidelity difference of the same two runs.
    pub closed_fidelity_sector_vs_full: f64,
    /// Max state distance, adaptive integrator vs exponential product.
    pub integrator_vs_oracle: f64,
    /// Max fidelity difference, sector vs full-basis master equation.
    pub lindblad_sector_vs_full: f64,
}

pub const ORACLE_LIMIT: f64 = 1e-6;
pub const SECTOR_LIMIT: f64 = 1e-8;

impl OracleReport {
    pub fn verify(&self) -> Result<()> {
        let checks = [
            ("integrator vs exponential product", self.integrator_vs_oracle, ORACLE_LIMIT),
            ("closed sector vs full basis", self.closed_sector_vs_full, ORACLE_LIMIT),
            ("closed fidelity sector vs full basis", self.closed_fidelity_sector_vs_full, SECTOR_LIMIT),
            ("master equation sector vs full basis", self.lindblad_sector_vs_full, SECTOR_LIMIT),
        ];
        for (check, distance, limit) in checks {
            if !(distance < limit) {
                return Err(Error::Equivalence { check: check.into(), distance, limit });
            }
        }
        Ok(())
    }
}

/// Places a sector state into the unrestricted basis with the same modes.
fn lift(psi: &StateVector, full: &Arc<CompositeBasis>) -> Result<DVector<C64>> {
    let sector = psi.basis();
    let mut out = DVector::from_element(full.dim(), C64::new(0.0, 0.0));
    for (i, amp) in psi.amplitudes().iter().enumerate() {
        let j = full.index_of(sector.occupation(i)).ok_or(Error::IncompatibleBasis)?;
        out[j] = *amp;
    }
    Ok(out)
}

/// Time-ordered product of fourth-order Magnus steps,
/// `exp(h/2 (A₁ + A₂) + √3 h²/12 [A₂, A₁])` with `A = −iH` at the two Gauss
/// points. Returns the state at every `stride`-th step, starting with `psi0`.
pub fn exponential_product(h: &TermSet, psi0: &DVector<C64>, t_final: f64, steps: usize, stride: usize) -> Vec<DVector<C64>> {
    let compiled = h.compile();
    let dt = t_final / steps as f64;
    let offset = 3f64.sqrt() / 6.0;
    let mut vals = Vec::new();
    let mut generator = |t: f64| -> DMatrix<C64> {
        compiled.values_at(t, &mut vals);
        compiled.to_dense(&vals) * C64::new(0.0, -1.0)
    };
    let mut psi = psi0.clone();
    let mut out = vec![psi.clone()];
    for k in 0..steps {
        let t0 = k as f64 * dt;
        let a1 = generator(t0 + (0.5 - offset) * dt);
        let a2 = generator(t0 + (0.5 + offset) * dt);
        let comm = &a2 * &a1 - &a1 * &a2;
        let omega = (&a1 + &a2) * C64::new(0.5 * dt, 0.0) + comm * C64::new(3f64.sqrt() * dt * dt / 12.0, 0.0);
        psi = omega.exp() * psi;
        if (k + 1) % stride == 0 {
            out.push(psi.clone());
        }
    }
    out
}

/// Runs every equivalence check on a one-pair device without failing on
/// the result; see [`OracleReport::verify`].
pub fn oracle_report(
    params: &DeviceParams,
    decoherence: &DecoherenceParams,
    horizon: f64,
    options: &OracleOptions,
) -> Result<OracleReport> {
    if params.n != 1 {
        return Err(Error::Config(format!("oracle checks need a single cavity pair, got n = {}", params.n)));
    }
    if options.samples < 2 || options.micro_steps % (options.samples - 1) != 0 {
        return Err(Error::Config("micro steps must be a multiple of samples − 1".into()));
    }
    let layout = Layout::standard(1)?;
    let sector = layout.basis(Some(1))?;
    let full = layout.basis(None)?;
    let evolve = EvolveOptions { samples: options.samples, keep_snapshots: true, ..EvolveOptions::with_tolerance(options.tol) };

    let closed = |basis: &Arc<CompositeBasis>| -> Result<_> {
        let h = full_interaction_hamiltonian(params, basis)?;
        let psi0 = transfer_initial_state(1, basis)?;
        evolve_closed(&h, &psi0, horizon, &evolve, &Probes::fidelity(ideal_target(1, basis)?))
    };
    let small = closed(&sector)?;
    let large = closed(&full)?;
    let mut closed_distance = 0.0f64;
    for (a, b) in small.snapshots.iter().zip(&large.snapshots) {
        closed_distance = closed_distance.max((lift(a, &full)? - b.amplitudes()).norm());
    }
    let closed_fidelity = max_difference(&small.fidelity, &large.fidelity);

    let h = full_interaction_hamiltonian(params, &sector)?;
    let psi0 = transfer_initial_state(1, &sector)?;
    let stride = options.micro_steps / (options.samples - 1);
    let oracle = exponential_product(&h, psi0.amplitudes(), horizon, options.micro_steps, stride);
    let oracle_distance =
        small.snapshots.iter().zip(&oracle).map(|(a, b)| (a.amplitudes() - b).norm()).fold(0.0, f64::max);

    let open = |basis: &Arc<CompositeBasis>| -> Result<Vec<f64>> {
        let h = full_interaction_hamiltonian(params, basis)?;
        let spec = build_lindblad_spec(decoherence, basis)?;
        let rho0 = transfer_initial_state(1, basis)?.to_density();
        let o = EvolveOptions { samples: options.samples, positivity_stride: 10, ..EvolveOptions::default() };
        Ok(evolve_lindblad(&h, &spec, &rho0, horizon, &o, &Probes::fidelity(ideal_target(1, basis)?))?.fidelity)
    };
    let lindblad = max_difference(&open(&sector)?, &open(&full)?);

    Ok(OracleReport {
        horizon,
        sector_dim: sector.dim(),
        full_dim: full.dim(),
        closed_sector_vs_full: closed_distance,
        closed_fidelity_sector_vs_full: closed_fidelity,
        integrator_vs_oracle: oracle_distance,
        lindblad_sector_vs_full: lindblad,
    })
}

/// [`oracle_report`] followed by [`OracleReport::verify`].
pub fn oracle_equivalence(
    params: &DeviceParams,
    decoherence: &DecoherenceParams,
    horizon: f64,
    options: &OracleOptions,
) -> Result<OracleReport> {
    let report = oracle_report(params, decoherence, horizon, options)?;
    report.verify()?;
    Ok(report)
}

fn max_difference(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
