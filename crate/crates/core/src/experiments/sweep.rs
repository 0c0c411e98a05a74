//! Fidelity sweeps over `b`, `r` or the crosstalk scale.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::system::{param_hash, run_transfer, CouplingSpec, CrosstalkSpec, SystemSpec};
use crate::device::{ConditionId, DecoherenceParams};
use crate::dynamics::EvolveOptions;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepVariable {
    /// Normalized detuning `|δ_1|/g_1`; couplings are re-derived per point.
    B,
    /// Breakage ratio of the primed detunings; couplings stay fixed.
    R,
    /// Uniform crosstalk as a multiple of `g_max`.
    CrosstalkScale,
}

impl SweepVariable {
    pub fn as_str(&self) -> &'static str {
        match self {
            SweepVariable::B => "b",
            SweepVariable::R => "r",
            SweepVariable::CrosstalkScale => "crosstalk",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPlan {
    pub variable: SweepVariable,
    pub values: Vec<f64>,
    pub base: SystemSpec,
    pub decoherence: DecoherenceParams,
    /// Curves as multiples of `g_max`; empty keeps the base crosstalk.
    /// Ignored for crosstalk-scale sweeps.
    pub crosstalk_levels: Vec<f64>,
    /// Fixed evolution time in seconds; `None` uses each point's transfer time.
    pub horizon: Option<f64>,
    pub options: EvolveOptions,
}

/// `start, start + step, ...` up to `stop` inclusive, each value rounded to
/// 12 decimals.
pub fn linear_grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !(stop >= start) || !start.is_finite() || !stop.is_finite() {
        return Err(Error::Config(format!("invalid grid {start}..{stop} step {step}")));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize;
    Ok((0..=count).map(|i| ((start + i as f64 * step) * 1e12).round() / 1e12).collect())
}

impl SweepPlan {
    /// Fidelity versus `b` from 5 to 15 for crosstalk `0`, `0.01` and `0.1 g_max`.
    pub fn fidelity_vs_b() -> Self {
        Self {
            variable: SweepVariable::B,
            values: linear_grid(5.0, 15.0, 0.5).expect("static grid"),
            base: SystemSpec::reference(9.0, 0.0),
            decoherence: DecoherenceParams::reference(3),
            crosstalk_levels: vec![0.0, 0.01, 0.1],
            horizon: None,
            options: EvolveOptions::default(),
        }
    }

    /// Fidelity versus `r` from 0.85 to 1.15 at `b = 9`, crosstalk `0.01 g_max`.
    pub fn fidelity_vs_r() -> Self {
        Self {
            variable: SweepVariable::R,
            values: linear_grid(0.85, 1.15, 0.01).expect("static grid"),
            base: SystemSpec::reference(9.0, 0.01),
            decoherence: DecoherenceParams::reference(3),
            crosstalk_levels: vec![0.01],
            horizon: None,
            options: EvolveOptions::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::Config("sweep grid is empty".into()));
        }
        if self.values.iter().any(|v| !v.is_finite()) || self.values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("sweep grid must be finite and strictly increasing".into()));
        }
        if self.crosstalk_levels.iter().any(|c| !(*c >= 0.0 && c.is_finite())) {
            return Err(Error::Config("crosstalk multiples must be non-negative".into()));
        }
        let lowest = self.values[0];
        match self.variable {
            SweepVariable::B if lowest <= 1.0 => Err(Error::InvalidRegime(format!("b = {lowest} is not dispersive (need b > 1)"))),
            SweepVariable::R if lowest <= 0.0 => Err(Error::Domain(format!("r must be positive, got {lowest}"))),
            SweepVariable::CrosstalkScale if lowest < 0.0 => Err(Error::Config("crosstalk multiples must be non-negative".into())),
            _ => Ok(()),
        }
    }

    /// `(crosstalk multiple, value)` pairs in output order: curve by curve,
    /// each along the grid.
    fn points(&self) -> Vec<(Option<f64>, f64)> {
        let levels: Vec<Option<f64>> = match self.variable {
            SweepVariable::CrosstalkScale => vec![None],
            _ if self.crosstalk_levels.is_empty() => vec![None],
            _ => self.crosstalk_levels.iter().map(|&c| Some(c)).collect(),
        };
        levels.into_iter().flat_map(|c| self.values.iter().map(move |&v| (c, v))).collect()
    }

    fn system_at(&self, level: Option<f64>, value: f64) -> SystemSpec {
        let mut s = self.base.clone();
        if let Some(c) = level {
            s.crosstalk = CrosstalkSpec::MultipleOfGmax(c);
        }
        match self.variable {
            SweepVariable::B => s.coupling = CouplingSpec::B(value),
            SweepVariable::R => s.r = value,
            SweepVariable::CrosstalkScale => s.crosstalk = CrosstalkSpec::MultipleOfGmax(value),
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionFlag {
    pub id: ConditionId,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub value: f64,
    /// Crosstalk multiple of `g_max`, when the curve sets one.
    pub crosstalk: Option<f64>,
    /// Qubit couplings `g_k`, rad/s.
    pub g: Vec<f64>,
    /// Coupler couplings `g_Ak`, rad/s.
    pub g_coupler: Vec<f64>,
    pub fidelity: f64,
    pub fidelity_sq: f64,
    pub t_transfer: f64,
    pub horizon: f64,
    /// Time-averaged photon number per cavity.
    pub photons: Vec<f64>,
    pub conditions: Vec<ConditionFlag>,
    /// Adjacent-cavity isolation ratio below 1.
    pub flagged: bool,
    pub wall_ms: f64,
}

impl SweepRecord {
    /// Equality of everything except the wall time.
    pub fn same_outcome(&self, other: &SweepRecord) -> bool {
        SweepRecord { wall_ms: 0.0, ..self.clone() } == SweepRecord { wall_ms: 0.0, ..other.clone() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub variable: SweepVariable,
    pub records: Vec<SweepRecord>,
    pub config_hash: String,
    pub note: String,
}

impl SweepResult {
    pub fn curve(&self, crosstalk: Option<f64>) -> Vec<&SweepRecord> {
        self.records.iter().filter(|r| r.crosstalk == crosstalk).collect()
    }

    pub fn same_outcome(&self, other: &SweepResult) -> bool {
        self.records.len() == other.records.len()
            && self.records.iter().zip(&other.records).all(|(a, b)| a.same_outcome(b))
    }
}

fn run_point(plan: &SweepPlan, level: Option<f64>, value: f64) -> Result<SweepRecord> {
    let start = Instant::now();
    let system = plan.system_at(level, value);
    let run = run_transfer(&system, &plan.decoherence, plan.horizon, &plan.options)?;
    let flagged = run.conditions.get(ConditionId::CavityIsolation).map_or(false, |e| e.worst < 1.0);
    Ok(SweepRecord {
        value,
        crosstalk: level.or(match plan.variable {
            SweepVariable::CrosstalkScale => Some(value),
            _ => None,
        }),
        g: run.params.g.clone(),
        g_coupler: run.params.g_coupler.clone(),
        fidelity: run.fidelity,
        fidelity_sq: run.fidelity_sq,
        t_transfer: run.t_transfer,
        horizon: run.horizon,
        photons: run.photons.averages.clone(),
        conditions: run.conditions.entries.iter().map(|e| ConditionFlag { id: e.id, pass: e.pass }).collect(),
        flagged,
        wall_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

/// Runs every point of `plan` on up to `workers` threads (0 picks the
/// machine default). Records come back in plan order regardless of workers.
pub fn run_sweep(plan: &SweepPlan, workers: usize) -> Result<SweepResult> {
    plan.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    let points = plan.points();
    let records = pool.install(|| points.par_iter().map(|&(c, v)| run_point(plan, c, v)).collect::<Result<Vec<_>>>())?;
    Ok(SweepResult {
        variable: plan.variable,
        records,
        config_hash: param_hash(plan),
        note: "deterministic: no random components; records depend only on the plan".into(),
    })
}

pub fn sweep_b(plan: &SweepPlan, workers: usize) -> Result<SweepResult> {
    if plan.variable != SweepVariable::B {
        return Err(Error::Config("plan does not sweep b".into()));
    }
    run_sweep(plan, workers)
}

pub fn sweep_r(plan: &SweepPlan, workers: usize) -> Result<SweepResult> {
    if plan.variable != SweepVariable::R {
        return Err(Error::Config("plan does not sweep r".into()));
    }
    run_sweep(plan, workers)
}
