//! Cavity photon numbers and their time averages.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::evolve::SimResult;
use crate::error::{Error, Result};
use crate::layout::Layout;
use crate::quantum::local::{embed, lowering};
use crate::quantum::{CompositeBasis, DensityMatrix, SparseOperator};

/// `a_k†a_k` for every cavity, named by the cavity label.
pub fn photon_operators(layout: &Layout, basis: &Arc<CompositeBasis>) -> Result<Vec<(String, SparseOperator)>> {
    (0..layout.sites())
        .map(|k| {
            let label = layout.cavity_label(k);
            let a = embed(&lowering(basis.mode(&label)?.levels), &label, basis)?;
            Ok((label, a.adjoint().multiply(&a)?))
        })
        .collect()
}

/// Trapezoidal mean of `values` over the span of `times`.
pub fn time_average(times: &[f64], values: &[f64]) -> Result<f64> {
    if times.len() != values.len() || times.len() < 2 {
        return Err(Error::Shape { expected: times.len().max(2), got: values.len() });
    }
    let span = times[times.len() - 1] - times[0];
    if span <= 0.0 {
        return Err(Error::Domain("time grid has zero span".into()));
    }
    let area: f64 = times.windows(2).zip(values.windows(2)).map(|(t, v)| 0.5 * (t[1] - t[0]) * (v[0] + v[1])).sum();
    Ok(area / span)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhotonObservables {
    pub labels: Vec<String>,
    /// `traces[k][i]` is `<a_k†a_k>` at the i-th sample.
    pub traces: Vec<Vec<f64>>,
    pub averages: Vec<f64>,
}

impl PhotonObservables {
    pub fn max_average(&self) -> f64 {
        self.averages.iter().cloned().fold(0.0, f64::max)
    }
}

/// Photon numbers from stored snapshots.
pub fn photon_observables(result: &SimResult<DensityMatrix>, layout: &Layout) -> Result<PhotonObservables> {
    let first = result
        .snapshots
        .first()
        .ok_or_else(|| Error::InvalidState("photon observables need density-matrix snapshots".into()))?;
    let ops = photon_operators(layout, first.basis())?;
    let mut out = PhotonObservables { labels: Vec::new(), traces: Vec::new(), averages: Vec::new() };
    for (label, op) in ops {
        let trace = result.snapshots.iter().map(|rho| Ok(rho.expectation(&op)?.re)).collect::<Result<Vec<f64>>>()?;
        out.averages.push(time_average(&result.times, &trace)?);
        out.traces.push(trace);
        out.labels.push(label);
    }
    Ok(out)
}

/// Photon numbers recorded during the run as observables named by cavity.
pub fn photon_summary(result: &SimResult<DensityMatrix>, layout: &Layout) -> Result<PhotonObservables> {
    let mut out = PhotonObservables { labels: Vec::new(), traces: Vec::new(), averages: Vec::new() };
    for k in 0..layout.sites() {
        let label = layout.cavity_label(k);
        let trace = result
            .observable(&label)
            .ok_or_else(|| Error::InvalidState(format!("no photon trace recorded for {label}")))?;
        out.averages.push(time_average(&result.times, &trace.values)?);
        out.traces.push(trace.values.clone());
        out.labels.push(label);
    }
    Ok(out)
}
