//! Master-equation and Schrödinger propagation on a uniform sample grid.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::integrator::{integrate, IntegratorConfig};
use super::lindblad::{Generator, LindbladSpec};
use crate::error::{Error, Result};
use crate::hamiltonians::TermSet;
use crate::quantum::operator::same_basis;
use crate::quantum::state::min_eigenvalue;
use crate::quantum::{DensityMatrix, SparseOperator, StateVector, C64};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvolveOptions {
    /// Relative and absolute integrator tolerance.
    pub tol: f64,
    /// Points of the uniform output grid, endpoints included.
    pub samples: usize,
    /// Seconds.
    pub initial_step: f64,
    pub max_steps: usize,
    pub keep_snapshots: bool,
    /// Check the smallest eigenvalue every this many samples; 0 disables.
    pub positivity_stride: usize,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self { tol: 1e-8, samples: 1000, initial_step: 1e-12, max_steps: 50_000_000, keep_snapshots: false, positivity_stride: 1 }
    }
}

impl EvolveOptions {
    pub fn with_tolerance(tol: f64) -> Self {
        Self { tol, ..Self::default() }
    }

    fn validate(&self, t_final: f64) -> Result<()> {
        if !(self.tol > 1e-14 && self.tol < 1e-3) {
            return Err(Error::Config(format!("tolerance {} outside (1e-14, 1e-3)", self.tol)));
        }
        if self.samples < 2 {
            return Err(Error::Config("need at least two samples".into()));
        }
        if !(t_final > 0.0 && t_final.is_finite()) {
            return Err(Error::Domain(format!("final time must be positive, got {t_final}")));
        }
        Ok(())
    }

    fn integrator(&self) -> IntegratorConfig {
        IntegratorConfig { initial_step: self.initial_step, max_steps: self.max_steps, ..IntegratorConfig::with_tolerance(self.tol) }
    }
}

/// Quantities recorded on the sample grid.
#[derive(Debug, Clone, Default)]
pub struct Probes {
    pub target: Option<StateVector>,
    pub observables: Vec<(String, SparseOperator)>,
}

impl Probes {
    pub fn fidelity(target: StateVector) -> Self {
        Self { target: Some(target), observables: Vec::new() }
    }

    pub fn with_observables(mut self, observables: Vec<(String, SparseOperator)>) -> Self {
        self.observables.extend(observables);
        self
    }

    fn check(&self, basis: &std::sync::Arc<crate::quantum::CompositeBasis>) -> Result<()> {
        let target_ok = self.target.as_ref().map_or(true, |t| same_basis(t.basis(), basis));
        if !target_ok || self.observables.iter().any(|(_, o)| !same_basis(o.basis(), basis)) {
            return Err(Error::IncompatibleBasis);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservableTrace {
    pub name: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct RunStats {
    pub steps: usize,
    pub rejected: usize,
    pub evaluations: usize,
    /// `|tr ρ − 1|`, or `|‖ψ‖² − 1|` for state vectors, maximised over samples.
    pub max_norm_drift: f64,
    /// Largest `‖ρ − ρ†‖_max` seen before symmetrization.
    pub max_hermiticity_drift: f64,
    /// Smallest sampled eigenvalue of ρ; `None` for state vectors or when
    /// positivity checks are disabled.
    pub min_eigenvalue: Option<f64>,
}

impl RunStats {
    /// Largest negative eigenvalue magnitude, zero if none was negative.
    pub fn max_positivity_violation(&self) -> f64 {
        self.min_eigenvalue.map_or(0.0, |m| (-m).max(0.0))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub dim: usize,
    pub tol: f64,
    pub channels: usize,
    pub param_hash: Option<String>,
}

#[derive(Debug, Clone)]
pub struct SimResult<S> {
    pub times: Vec<f64>,
    /// Empty unless a target was probed.
    pub fidelity: Vec<f64>,
    pub observables: Vec<ObservableTrace>,
    /// Every sampled state when requested, otherwise empty.
    pub snapshots: Vec<S>,
    pub final_state: S,
    pub stats: RunStats,
    pub metadata: RunMetadata,
}

impl<S> SimResult<S> {
    pub fn final_fidelity(&self) -> Option<f64> {
        self.fidelity.last().copied()
    }

    pub fn fidelity_squared(&self) -> Vec<f64> {
        self.fidelity.iter().map(|f| f * f).collect()
    }

    pub fn observable(&self, name: &str) -> Option<&ObservableTrace> {
        self.observables.iter().find(|o| o.name == name)
    }
}

/// `sqrt(<ψ|ρ|ψ>)`, clamped to `[0, 1]` against rounding.
pub fn fidelity(rho: &DensityMatrix, target: &StateVector) -> Result<f64> {
    Ok(rho.overlap(target)?.clamp(0.0, 1.0).sqrt())
}

fn traces(probes: &Probes, samples: usize) -> Vec<ObservableTrace> {
    probes.observables.iter().map(|(name, _)| ObservableTrace { name: name.clone(), values: Vec::with_capacity(samples) }).collect()
}

fn grid(t_final: f64, samples: usize) -> Vec<f64> {
    (0..samples).map(|i| t_final * i as f64 / (samples - 1) as f64).collect()
}

fn drift_limit(tol: f64, steps: usize) -> f64 {
    10.0 * tol * steps.max(1) as f64
}

/// Integrates `dρ/dt = −i[h(t), ρ] + Σ_c γ_c 𝓛[L_c]ρ` from `rho0` to
/// `t_final`, sampling `samples` equally spaced times.
pub fn evolve_lindblad(
    h: &TermSet,
    spec: &LindbladSpec,
    rho0: &DensityMatrix,
    t_final: f64,
    options: &EvolveOptions,
    probes: &Probes,
) -> Result<SimResult<DensityMatrix>> {
    options.validate(t_final)?;
    let basis = rho0.basis().clone();
    if !same_basis(h.basis(), &basis) || !same_basis(spec.basis(), &basis) {
        return Err(Error::IncompatibleBasis);
    }
    probes.check(&basis)?;
    let d = basis.dim();
    let mut generator = Generator::new(h.compile(), Some(spec))?;
    let mut y: Vec<C64> = rho0.matrix().as_slice().to_vec();

    let times = grid(t_final, options.samples);
    let mut stats = RunStats::default();
    let mut fid = Vec::with_capacity(options.samples);
    let mut obs = traces(probes, options.samples);
    let mut snapshots = Vec::new();
    let mut min_eig = f64::INFINITY;

    let mut record = |i: usize, rho: &[C64], stats: &mut RunStats| {
        let trace: C64 = (0..d).map(|k| rho[k + k * d]).sum();
        stats.max_norm_drift = stats.max_norm_drift.max((trace - 1.0).norm());
        if let Some(target) = &probes.target {
            let v = target.amplitudes();
            let mut acc = C64::new(0.0, 0.0);
            for c in 0..d {
                for r in 0..d {
                    acc += v[r].conj() * rho[r + c * d] * v[c];
                }
            }
            fid.push(acc.re.clamp(0.0, 1.0).sqrt());
        }
        for ((_, op), trace) in probes.observables.iter().zip(obs.iter_mut()) {
            trace.values.push(op.iter().map(|(r, c, v)| v * rho[c + r * d]).sum::<C64>().re);
        }
        if options.positivity_stride > 0 && (i % options.positivity_stride == 0 || i + 1 == options.samples) {
            min_eig = min_eig.min(min_eigenvalue(&DMatrix::from_column_slice(d, d, rho)));
        }
        if options.keep_snapshots {
            snapshots.push(DensityMatrix::unchecked(basis.clone(), DMatrix::from_column_slice(d, d, rho)));
        }
    };

    let mut herm_drift = 0.0f64;
    record(0, &y, &mut stats);
    let integ = integrate(
        &mut y,
        0.0,
        &times[1..],
        &options.integrator(),
        |t, rho, out| generator.lindblad(t, rho, out),
        |rho| {
            let mut worst = 0.0f64;
            for c in 0..d {
                for r in c + 1..d {
                    let (a, b) = (rho[r + c * d], rho[c + r * d]);
                    worst = worst.max((a - b.conj()).norm());
                    let avg = 0.5 * (a + b.conj());
                    rho[r + c * d] = avg;
                    rho[c + r * d] = avg.conj();
                }
                let diag = &mut rho[c + c * d];
                worst = worst.max(2.0 * diag.im.abs());
                diag.im = 0.0;
            }
            herm_drift = herm_drift.max(worst);
            worst > 0.0
        },
        |i, _, rho| {
            record(i + 1, rho, &mut stats);
            Ok(())
        },
    )?;
    stats.steps = integ.accepted;
    stats.rejected = integ.rejected;
    stats.evaluations = integ.evaluations;
    stats.max_hermiticity_drift = herm_drift;
    stats.min_eigenvalue = (options.positivity_stride > 0).then_some(min_eig);
    if herm_drift > 10.0 * options.tol {
        log::warn!("Hermiticity drift {herm_drift:e} before symmetrization exceeds 10·tol");
    }
    if stats.max_norm_drift > drift_limit(options.tol, stats.steps) {
        return Err(Error::Convergence(format!("trace drift {:e} after {} steps", stats.max_norm_drift, stats.steps)));
    }

    Ok(SimResult {
        times,
        fidelity: fid,
        observables: obs,
        snapshots,
        final_state: DensityMatrix::unchecked(basis, DMatrix::from_column_slice(d, d, &y)),
        stats,
        metadata: RunMetadata { dim: d, tol: options.tol, channels: spec.len(), param_hash: None },
    })
}

/// Integrates `i dψ/dt = h(t) ψ`; fidelity is `|<target|ψ>|`.
pub fn evolve_closed(
    h: &TermSet,
    psi0: &StateVector,
    t_final: f64,
    options: &EvolveOptions,
    probes: &Probes,
) -> Result<SimResult<StateVector>> {
    options.validate(t_final)?;
    let basis = psi0.basis().clone();
    if !same_basis(h.basis(), &basis) {
        return Err(Error::IncompatibleBasis);
    }
    probes.check(&basis)?;
    let mut generator = Generator::new(h.compile(), None)?;
    let mut y: Vec<C64> = psi0.amplitudes().as_slice().to_vec();

    let times = grid(t_final, options.samples);
    let mut stats = RunStats::default();
    let mut fid = Vec::with_capacity(options.samples);
    let mut obs = traces(probes, options.samples);
    let mut snapshots = Vec::new();

    let mut record = |psi: &[C64], stats: &mut RunStats| {
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        stats.max_norm_drift = stats.max_norm_drift.max((norm - 1.0).abs());
        if let Some(target) = &probes.target {
            let overlap: C64 = target.amplitudes().iter().zip(psi).map(|(a, b)| a.conj() * b).sum();
            fid.push(overlap.norm().min(1.0));
        }
        for ((_, op), trace) in probes.observables.iter().zip(obs.iter_mut()) {
            trace.values.push(op.expectation_vector(psi).re);
        }
        if options.keep_snapshots {
            snapshots.push(StateVector::unchecked(basis.clone(), DVector::from_column_slice(psi)));
        }
    };

    record(&y, &mut stats);
    let integ = integrate(
        &mut y,
        0.0,
        &times[1..],
        &options.integrator(),
        |t, psi, out| generator.schrodinger(t, psi, out),
        |_| false,
        |_, _, psi| {
            record(psi, &mut stats);
            Ok(())
        },
    )?;
    stats.steps = integ.accepted;
    stats.rejected = integ.rejected;
    stats.evaluations = integ.evaluations;
    if stats.max_norm_drift > drift_limit(options.tol, stats.steps) {
        return Err(Error::Convergence(format!("norm drift {:e} after {} steps", stats.max_norm_drift, stats.steps)));
    }

    Ok(SimResult {
        times,
        fidelity: fid,
        observables: obs,
        snapshots,
        final_state: StateVector::unchecked(basis, DVector::from_column_slice(&y)),
        stats,
        metadata: RunMetadata { dim: psi0.basis().dim(), tol: options.tol, channels: 0, param_hash: None },
    })
}
