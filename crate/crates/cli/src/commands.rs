//! One function per subcommand. Each writes its artifacts and returns the
//! lines to print plus anything that should land in the manifest.

use serde_json::json;

use cavityw_core::device::{check_conditions, effective_params, DecoherenceParams, Thresholds};
use cavityw_core::experiments::{
    oracle_report, run_sweep, run_transfer, CrosstalkSpec, SweepPlan, SweepResult, SweepVariable, SystemSpec,
};
use cavityw_core::layout::Layout;

use crate::artifacts::{line_plot_svg, series_from_csv, sweep_csv, OutDir};
use crate::config::{Command, RunConfig};
use crate::error::CliError;

#[derive(Debug, Default)]
pub struct Outcome {
    pub lines: Vec<String>,
    pub diagnostics: serde_json::Value,
    /// Set when a threshold failed after all artifacts were written.
    pub threshold_failure: Option<String>,
}

pub fn execute(cfg: &RunConfig, out: &mut OutDir) -> Result<Outcome, CliError> {
    match cfg.command {
        Command::Check => check(cfg, out),
        Command::Transfer => transfer(cfg, out),
        Command::SweepB => sweep(cfg, out, SweepVariable::B),
        Command::SweepR => sweep(cfg, out, SweepVariable::R),
        Command::Oracle => oracle(cfg, out),
    }
}

fn cavity_labels(system: &SystemSpec) -> Result<Vec<String>, CliError> {
    let layout = system.layout()?;
    Ok((0..layout.sites()).map(|k| layout.cavity_label(k)).collect())
}

fn below(min: Option<f64>, what: &str, fidelities: impl IntoIterator<Item = f64>) -> Option<String> {
    let min = min?;
    let worst = fidelities.into_iter().fold(f64::INFINITY, f64::min);
    (worst < min).then(|| format!("{what} fidelity {worst:.5} is below the required {min}"))
}

fn check(cfg: &RunConfig, out: &mut OutDir) -> Result<Outcome, CliError> {
    let params = cfg.system.device()?;
    let report = check_conditions(&params, &Thresholds::default());
    let t_transfer = effective_params(&cfg.system.matched_device()?)?.transfer_time()?;
    let mut lines = vec![format!("{:<11} {:>12} {:>9} {:>10}  result", "condition", "worst", "criterion", "threshold")];
    for e in &report.entries {
        lines.push(format!(
            "{:<11} {:>12.4e} {:>9} {:>10.1e}  {}",
            e.id.as_str(),
            e.worst,
            format!("{:?}", e.criterion),
            e.threshold,
            if e.pass { "pass" } else { "FAIL" }
        ));
    }
    lines.push(format!("t_transfer = {:.4} us", t_transfer * 1e6));
    out.write_json("conditions.json", &json!({ "report": report, "t_transfer_us": t_transfer * 1e6 }))?;
    let failed = report.failed();
    Ok(Outcome {
        lines,
        diagnostics: json!({ "failed": failed }),
        threshold_failure: (!failed.is_empty()).then(|| {
            let ids: Vec<&str> = failed.iter().map(|id| id.as_str()).collect();
            format!("conditions failed: {}", ids.join(", "))
        }),
    })
}

fn transfer(cfg: &RunConfig, out: &mut OutDir) -> Result<Outcome, CliError> {
    let run = run_transfer(&cfg.system, &cfg.decoherence, cfg.horizon, &cfg.options)?;
    let labels = cavity_labels(&cfg.system)?;
    let traces: Vec<&[f64]> = labels
        .iter()
        .map(|l| run.result.observable(l).map(|o| o.values.as_slice()))
        .collect::<Option<_>>()
        .ok_or_else(|| CliError::Numeric("photon traces missing from result".into()))?;

    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["t_us".to_string(), "F".into(), "F2".into()];
    header.extend(labels.iter().map(|l| format!("n_{l}")));
    w.write_record(&header).map_err(|e| CliError::Io(e.to_string()))?;
    for (i, t) in run.result.times.iter().enumerate() {
        let f = run.result.fidelity[i];
        let mut row = vec![(t * 1e6).to_string(), f.to_string(), (f * f).to_string()];
        row.extend(traces.iter().map(|tr| tr[i].to_string()));
        w.write_record(&row).map_err(|e| CliError::Io(e.to_string()))?;
    }
    out.write("transfer.csv", &w.into_inner().map_err(|e| CliError::Io(e.to_string()))?)?;

    let summary = json!({
        "fidelity": run.fidelity,
        "fidelity_sq": run.fidelity_sq,
        "t_transfer_us": run.t_transfer * 1e6,
        "horizon_us": run.horizon * 1e6,
        "photon_average": run.photons.labels.iter().cloned().zip(run.photons.averages.iter().cloned()).collect::<std::collections::BTreeMap<_, _>>(),
        "conditions": run.conditions,
        "stats": run.result.stats,
        "metadata": run.result.metadata,
    });
    out.write_json("summary.json", &summary)?;

    let photons: Vec<String> = run.photons.labels.iter().zip(&run.photons.averages).map(|(l, v)| format!("{l}={v:.5}")).collect();
    let stats = run.result.stats;
    let lines = vec![
        format!("dimension {}, {} channels, {} steps ({} rejected)", run.result.metadata.dim, run.result.metadata.channels, stats.steps, stats.rejected),
        format!("time-averaged photons: {}", photons.join(" ")),
        format!("F = {:.5}  F^2 = {:.5}  t_transfer = {:.4} us", run.fidelity, run.fidelity_sq, run.t_transfer * 1e6),
    ];
    Ok(Outcome {
        lines,
        diagnostics: json!({ "stats": stats, "metadata": run.result.metadata }),
        threshold_failure: below(cfg.min_fidelity, "final", [run.fidelity]),
    })
}

fn sweep(cfg: &RunConfig, out: &mut OutDir, variable: SweepVariable) -> Result<Outcome, CliError> {
    let plan = SweepPlan {
        variable,
        values: cfg.grid.clone(),
        base: cfg.system.clone(),
        decoherence: cfg.decoherence.clone(),
        crosstalk_levels: cfg.crosstalk_levels.clone(),
        horizon: cfg.horizon,
        options: cfg.options,
    };
    let result: SweepResult = run_sweep(&plan, cfg.workers)?;
    let csv_text = sweep_csv(&result, &cavity_labels(&cfg.system)?)?;
    out.write("sweep.csv", csv_text.as_bytes())?;
    let svg = line_plot_svg(
        &series_from_csv(&csv_text)?,
        variable.as_str(),
        "F",
        &format!("fidelity versus {}", variable.as_str()),
    );
    out.write("sweep.svg", svg.as_bytes())?;
    out.write_json("sweep.json", &result)?;

    let mut lines = Vec::new();
    for r in &result.records {
        lines.push(format!(
            "{}={:<6} crosstalk={:<5} F={:.5} F^2={:.5} t_transfer={:.4} us{}",
            variable.as_str(),
            r.value,
            r.crosstalk.map_or("-".to_string(), |c| c.to_string()),
            r.fidelity,
            r.fidelity_sq,
            r.t_transfer * 1e6,
            if r.flagged { "  [flagged: adjacent-cavity isolation below 1]" } else { "" }
        ));
    }
    lines.push(format!("{} points written to {}", result.records.len(), out.root().display()));
    Ok(Outcome {
        lines,
        diagnostics: json!({ "config_hash": result.config_hash, "points": result.records.len() }),
        threshold_failure: below(cfg.min_fidelity, "minimum sweep", result.records.iter().map(|r| r.fidelity)),
    })
}

/// The first cavity pair of a larger system, with its own rates and
/// crosstalk entries.
fn first_pair(system: &SystemSpec, decoherence: &DecoherenceParams) -> (SystemSpec, DecoherenceParams) {
    let n = system.n();
    let mut s = system.clone();
    s.detunings.truncate(1);
    s.sector = Some(1);
    if let CrosstalkSpec::Matrix(m) = &system.crosstalk {
        s.crosstalk = CrosstalkSpec::Matrix(vec![vec![m[0][0], m[0][n]], vec![m[n][0], m[n][n]]]);
    }
    let d = DecoherenceParams {
        kappa: vec![decoherence.kappa[0], decoherence.kappa[n]],
        qutrits: vec![decoherence.qutrits[0], decoherence.qutrits[n], decoherence.qutrits[2 * n]],
    };
    (s, d)
}

fn oracle(cfg: &RunConfig, out: &mut OutDir) -> Result<Outcome, CliError> {
    let (system, decoherence) = first_pair(&cfg.system, &cfg.decoherence);
    let params = system.device()?;
    let horizon = match cfg.horizon {
        Some(t) => t,
        None => effective_params(&system.matched_device()?)?.transfer_time()?,
    };
    let layout = Layout::new(1, system.qutrit_levels, system.cavity_levels)?;
    let report = oracle_report(&params, &decoherence, horizon, &cfg.oracle)?;
    out.write_json("oracle.json", &report)?;
    let lines = vec![
        format!("single pair: sector dimension {}, full dimension {} ({} modes)", report.sector_dim, report.full_dim, layout.modes().len()),
        format!("integrator vs exponential product: {:.3e}", report.integrator_vs_oracle),
        format!("closed evolution, sector vs full basis: {:.3e}", report.closed_sector_vs_full),
        format!("master equation fidelity, sector vs full basis: {:.3e}", report.lindblad_sector_vs_full),
    ];
    let verdict = report.verify().err().map(|e| e.to_string());
    Ok(Outcome { lines, diagnostics: serde_json::to_value(&report).unwrap_or_default(), threshold_failure: verdict })
}
