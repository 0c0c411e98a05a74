//! JSON run configuration. Every dimensional key carries its unit as a
//! suffix; frequencies are ordinary frequencies and become angular
//! frequencies on resolution.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use cavityw_core::device::{DecoherenceParams, DecoherenceRates};
use cavityw_core::dynamics::EvolveOptions;
use cavityw_core::experiments::{linear_grid, CouplingSpec, CrosstalkSpec, OracleOptions, SystemSpec};
use cavityw_core::units::{ghz, mhz, rate_from_lifetime_us, us};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Check,
    Transfer,
    SweepB,
    SweepR,
    Oracle,
}

impl Command {
    pub fn as_str(&self) -> &'static str {
        match self {
            Command::Check => "check",
            Command::Transfer => "transfer",
            Command::SweepB => "sweep-b",
            Command::SweepR => "sweep-r",
            Command::Oracle => "oracle",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConfigFile {
    pub system: SystemSection,
    pub decoherence: DecoherenceSection,
    pub run: RunSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SystemSection {
    /// Cavity pairs.
    pub n: usize,
    /// Qubit-cavity detunings of the unprimed half; defaults to
    /// `-0.5, -1.0, ...` GHz.
    pub detunings_ghz: Option<Vec<f64>>,
    pub omega10_ghz: f64,
    pub anharmonicity_mhz: f64,
    /// `|δ_1|/g_1`; exclusive with `g1_mhz`.
    pub b: Option<f64>,
    pub g1_mhz: Option<f64>,
    /// Uniform crosstalk as a multiple of `g_max`; exclusive with
    /// `crosstalk_matrix_mhz`.
    pub crosstalk_gmax: Option<f64>,
    pub crosstalk_matrix_mhz: Option<Vec<Vec<f64>>>,
    pub r: f64,
    pub qutrit_levels: usize,
    pub cavity_levels: usize,
    /// Largest total excitation kept; `null` keeps the full product basis.
    pub sector_emax: Option<usize>,
}

impl Default for SystemSection {
    fn default() -> Self {
        Self {
            n: 3,
            detunings_ghz: None,
            omega10_ghz: 6.5,
            anharmonicity_mhz: -400.0,
            b: None,
            g1_mhz: None,
            crosstalk_gmax: None,
            crosstalk_matrix_mhz: None,
            r: 1.0,
            qutrit_levels: 3,
            cavity_levels: 2,
            sector_emax: Some(1),
        }
    }
}

/// A lifetime shared by every element or given per element.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Lifetime {
    Uniform(f64),
    PerElement(Vec<f64>),
}

/// Lifetimes in microseconds; `null` switches a channel off.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DecoherenceSection {
    pub enabled: bool,
    /// Per cavity, `2n` entries when given as a list.
    pub kappa_lifetime_us: Option<Lifetime>,
    /// Per qutrit, `2n + 1` entries (coupler last) when given as a list.
    pub gamma_lifetime_us: Option<Lifetime>,
    pub gamma21_lifetime_us: Option<Lifetime>,
    pub gamma20_lifetime_us: Option<Lifetime>,
    pub gamma_phi1_lifetime_us: Option<Lifetime>,
    pub gamma_phi2_lifetime_us: Option<Lifetime>,
}

impl Default for DecoherenceSection {
    fn default() -> Self {
        let l = |x: f64| Some(Lifetime::Uniform(x));
        Self {
            enabled: true,
            kappa_lifetime_us: l(5.0),
            gamma_lifetime_us: l(10.0),
            gamma21_lifetime_us: l(5.0),
            gamma20_lifetime_us: l(25.0),
            gamma_phi1_lifetime_us: l(5.0),
            gamma_phi2_lifetime_us: l(5.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSection {
    /// Informational; the command line decides what runs.
    pub command: Option<Command>,
    pub grid: Option<Grid>,
    pub crosstalk_levels_gmax: Option<Vec<f64>>,
    /// Fixed evolution time; defaults to the ideal transfer time.
    pub horizon_us: Option<f64>,
    pub tol: f64,
    pub samples: usize,
    pub out_dir: Option<PathBuf>,
    /// Sweep threads; 0 uses every core.
    pub workers: usize,
    pub keep_snapshots: bool,
    pub positivity_stride: usize,
    /// Exit with a threshold failure when any reported fidelity is lower.
    pub min_fidelity: Option<f64>,
    pub oracle_micro_steps: usize,
    pub oracle_samples: usize,
}

impl Default for RunSection {
    fn default() -> Self {
        let evolve = EvolveOptions::default();
        let oracle = OracleOptions::default();
        Self {
            command: None,
            grid: None,
            crosstalk_levels_gmax: None,
            horizon_us: None,
            tol: evolve.tol,
            samples: evolve.samples,
            out_dir: None,
            workers: 0,
            keep_snapshots: false,
            positivity_stride: evolve.positivity_stride,
            min_fidelity: None,
            oracle_micro_steps: oracle.micro_steps,
            oracle_samples: oracle.samples,
        }
    }
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
    pub tol: Option<f64>,
}

pub const OUT_ENV: &str = "CAVITYW_OUT";
const DEFAULT_OUT: &str = "cavityw-out";

/// A validated configuration in simulator units, with the fully resolved
/// file echo kept for the manifest.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    pub resolved: ConfigFile,
    pub system: SystemSpec,
    pub decoherence: DecoherenceParams,
    pub options: EvolveOptions,
    /// rad/s values for `b`/`r` sweeps.
    pub grid: Vec<f64>,
    pub crosstalk_levels: Vec<f64>,
    /// Seconds.
    pub horizon: Option<f64>,
    pub workers: usize,
    pub min_fidelity: Option<f64>,
    pub oracle: OracleOptions,
    pub out_dir: PathBuf,
}

pub fn read_config(path: &Path) -> Result<(ConfigFile, Vec<u8>), CliError> {
    let bytes = fs::read(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let text = std::str::from_utf8(&bytes).map_err(|_| CliError::Config(format!("{} is not UTF-8", path.display())))?;
    Ok((parse_config_str(text)?, bytes))
}

/// Deserializes a config; errors name the JSON path of the offending field.
pub fn parse_config_str(text: &str) -> Result<ConfigFile, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        CliError::Config(format!("{path}: {}", e.into_inner()))
    })
}

fn invalid(path: impl Into<String>, msg: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{}: {msg}", path.into()))
}

fn positive(path: &str, x: f64) -> Result<f64, CliError> {
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(invalid(path, format!("must be positive and finite, got {x}")))
    }
}

fn rates(path: &str, lifetime: &Option<Lifetime>, len: usize) -> Result<Vec<f64>, CliError> {
    match lifetime {
        None => Ok(vec![0.0; len]),
        Some(Lifetime::Uniform(t)) => Ok(vec![rate_from_lifetime_us(positive(path, *t)?); len]),
        Some(Lifetime::PerElement(v)) => {
            if v.len() != len {
                return Err(invalid(path, format!("expected {len} entries, got {}", v.len())));
            }
            v.iter().enumerate().map(|(i, t)| Ok(rate_from_lifetime_us(positive(&format!("{path}[{i}]"), *t)?))).collect()
        }
    }
}

impl DecoherenceSection {
    fn resolve(&self, n: usize) -> Result<DecoherenceParams, CliError> {
        if !self.enabled {
            return Ok(DecoherenceParams::none(n));
        }
        let q = 2 * n + 1;
        let gamma = rates("decoherence.gamma_lifetime_us", &self.gamma_lifetime_us, q)?;
        let gamma21 = rates("decoherence.gamma21_lifetime_us", &self.gamma21_lifetime_us, q)?;
        let gamma20 = rates("decoherence.gamma20_lifetime_us", &self.gamma20_lifetime_us, q)?;
        let phi1 = rates("decoherence.gamma_phi1_lifetime_us", &self.gamma_phi1_lifetime_us, q)?;
        let phi2 = rates("decoherence.gamma_phi2_lifetime_us", &self.gamma_phi2_lifetime_us, q)?;
        Ok(DecoherenceParams {
            kappa: rates("decoherence.kappa_lifetime_us", &self.kappa_lifetime_us, 2 * n)?,
            qutrits: (0..q)
                .map(|k| DecoherenceRates {
                    gamma: gamma[k],
                    gamma21: gamma21[k],
                    gamma20: gamma20[k],
                    gamma_phi1: phi1[k],
                    gamma_phi2: phi2[k],
                })
                .collect(),
        })
    }
}

impl SystemSection {
    /// Fills defaults in place and builds the simulator recipe.
    fn resolve(&mut self) -> Result<SystemSpec, CliError> {
        if self.n == 0 {
            return Err(invalid("system.n", "need at least one cavity pair"));
        }
        let n = self.n;
        let detunings = self.detunings_ghz.get_or_insert_with(|| (1..=n).map(|j| -0.5 * j as f64).collect());
        if detunings.len() != n {
            return Err(invalid("system.detunings_ghz", format!("expected {n} entries, got {}", detunings.len())));
        }
        for (i, d) in detunings.iter().enumerate() {
            if !(d.is_finite() && *d != 0.0) {
                return Err(invalid(format!("system.detunings_ghz[{i}]"), "must be finite and nonzero"));
            }
        }
        positive("system.omega10_ghz", self.omega10_ghz)?;
        if !self.anharmonicity_mhz.is_finite() {
            return Err(invalid("system.anharmonicity_mhz", "must be finite"));
        }
        let coupling = match (self.b, self.g1_mhz) {
            (Some(_), Some(_)) => return Err(invalid("system.g1_mhz", "give either b or g1_mhz, not both")),
            (Some(b), None) => CouplingSpec::B(positive("system.b", b)?),
            (None, Some(g)) => CouplingSpec::G1(mhz(positive("system.g1_mhz", g)?)),
            (None, None) => {
                self.b = Some(9.0);
                CouplingSpec::B(9.0)
            }
        };
        let crosstalk = match (&self.crosstalk_gmax, &self.crosstalk_matrix_mhz) {
            (Some(_), Some(_)) => {
                return Err(invalid("system.crosstalk_matrix_mhz", "give either crosstalk_gmax or crosstalk_matrix_mhz"))
            }
            (Some(c), None) => {
                if !(*c >= 0.0 && c.is_finite()) {
                    return Err(invalid("system.crosstalk_gmax", format!("must be non-negative, got {c}")));
                }
                CrosstalkSpec::MultipleOfGmax(*c)
            }
            (None, Some(m)) => CrosstalkSpec::Matrix(m.iter().map(|row| row.iter().map(|x| mhz(*x)).collect()).collect()),
            (None, None) => {
                self.crosstalk_gmax = Some(0.01);
                CrosstalkSpec::MultipleOfGmax(0.01)
            }
        };
        positive("system.r", self.r)?;
        if self.qutrit_levels < 2 {
            return Err(invalid("system.qutrit_levels", "need at least 2 levels"));
        }
        if self.cavity_levels < 2 {
            return Err(invalid("system.cavity_levels", "need at least 2 levels"));
        }
        if self.sector_emax == Some(0) {
            return Err(invalid("system.sector_emax", "the transfer needs at least one excitation"));
        }
        let spec = SystemSpec {
            detunings: detunings.iter().map(|d| ghz(*d)).collect(),
            omega10: ghz(self.omega10_ghz),
            anharmonicity: mhz(self.anharmonicity_mhz),
            coupling,
            crosstalk,
            r: self.r,
            qutrit_levels: self.qutrit_levels,
            cavity_levels: self.cavity_levels,
            sector: self.sector_emax,
        };
        // physical invariants of the derived device
        spec.device().map_err(|e| {
            let path = match &spec.crosstalk {
                CrosstalkSpec::Matrix(_) => "system.crosstalk_matrix_mhz",
                _ => "system",
            };
            invalid(path, e)
        })?;
        Ok(spec)
    }
}

fn resolve_grid(grid: &Grid, path: &str) -> Result<Vec<f64>, CliError> {
    let values = match (grid.values.as_ref(), grid.start, grid.stop, grid.step) {
        (Some(v), None, None, None) => v.clone(),
        (None, Some(a), Some(b), Some(s)) => linear_grid(a, b, s).map_err(|e| invalid(path, e))?,
        _ => return Err(invalid(path, "give either values or start, stop and step")),
    };
    if values.is_empty() {
        return Err(invalid(format!("{path}.values"), "sweep grid is empty"));
    }
    if values.iter().any(|v| !v.is_finite()) || values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid(path, "grid must be finite and strictly increasing"));
    }
    Ok(values)
}

/// Validates `file` for `command`, fills every default and applies the
/// command-line overrides.
pub fn resolve(mut file: ConfigFile, command: Command, overrides: &Overrides) -> Result<RunConfig, CliError> {
    if let Some(c) = file.run.command {
        if c != command {
            log::warn!("config names command `{}`; running `{}`", c.as_str(), command.as_str());
        }
    }
    file.run.command = Some(command);
    if let Some(tol) = overrides.tol {
        file.run.tol = tol;
    }
    if let Some(w) = overrides.workers {
        file.run.workers = w;
    }
    let system = file.system.resolve()?;
    let decoherence = file.decoherence.resolve(system.n())?;

    let run = &mut file.run;
    if !(run.tol > 1e-14 && run.tol < 1e-3) {
        return Err(invalid("run.tol", format!("must lie in (1e-14, 1e-3), got {}", run.tol)));
    }
    if run.samples < 2 {
        return Err(invalid("run.samples", "need at least 2 samples"));
    }
    let horizon = run.horizon_us.map(|t| positive("run.horizon_us", t).map(us)).transpose()?;
    if let Some(f) = run.min_fidelity {
        if !(0.0..=1.0).contains(&f) {
            return Err(invalid("run.min_fidelity", "must lie in [0, 1]"));
        }
    }
    if run.oracle_samples < 2 || run.oracle_micro_steps % (run.oracle_samples - 1) != 0 {
        return Err(invalid("run.oracle_micro_steps", "must be a multiple of oracle_samples - 1"));
    }

    let (grid, levels) = match command {
        Command::SweepB | Command::SweepR => {
            let g = run.grid.get_or_insert_with(|| match command {
                Command::SweepB => Grid { start: Some(5.0), stop: Some(15.0), step: Some(0.5), values: None },
                _ => Grid { start: Some(0.85), stop: Some(1.15), step: Some(0.01), values: None },
            });
            let values = resolve_grid(g, "run.grid")?;
            let base_level = file.system.crosstalk_gmax;
            let levels = run.crosstalk_levels_gmax.get_or_insert_with(|| match command {
                Command::SweepB => vec![0.0, 0.01, 0.1],
                _ => base_level.into_iter().collect(),
            });
            for (i, c) in levels.iter().enumerate() {
                if !(*c >= 0.0 && c.is_finite()) {
                    return Err(invalid(format!("run.crosstalk_levels_gmax[{i}]"), "must be non-negative"));
                }
            }
            let lowest = values[0];
            if command == Command::SweepB && lowest <= 1.0 {
                return Err(invalid("run.grid", format!("b = {lowest} is not dispersive (need b > 1)")));
            }
            if command == Command::SweepR && lowest <= 0.0 {
                return Err(invalid("run.grid", format!("r must be positive, got {lowest}")));
            }
            (values, levels.clone())
        }
        _ => (Vec::new(), Vec::new()),
    };

    let out_dir = overrides
        .out
        .clone()
        .or_else(|| run.out_dir.clone())
        .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    run.out_dir = Some(out_dir.clone());

    let options = EvolveOptions {
        samples: run.samples,
        keep_snapshots: run.keep_snapshots,
        positivity_stride: run.positivity_stride,
        ..EvolveOptions::with_tolerance(run.tol)
    };
    let oracle = OracleOptions { micro_steps: run.oracle_micro_steps, samples: run.oracle_samples, tol: run.tol.min(1e-10) };
    Ok(RunConfig {
        command,
        workers: run.workers,
        min_fidelity: run.min_fidelity,
        resolved: file,
        system,
        decoherence,
        options,
        grid,
        crosstalk_levels: levels,
        horizon,
        oracle,
        out_dir,
    })
}
