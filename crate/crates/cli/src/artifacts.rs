//! CSV tables, SVG plots and the run manifest.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use cavityw_core::experiments::SweepResult;

use crate::error::CliError;

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

/// Artifact directory that remembers what was written to it.
pub struct OutDir {
    root: PathBuf,
    written: Vec<ArtifactEntry>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ArtifactEntry {
    pub file: String,
    pub sha256: String,
}

impl OutDir {
    pub fn create(root: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(root).map_err(|e| CliError::Io(format!("cannot create {}: {e}", root.display())))?;
        Ok(Self { root: root.to_path_buf(), written: Vec::new() })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf, CliError> {
        let path = self.root.join(name);
        fs::write(&path, bytes).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
        self.written.retain(|a| a.file != name);
        self.written.push(ArtifactEntry { file: name.to_string(), sha256: sha256_hex(bytes) });
        Ok(path)
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<PathBuf, CliError> {
        let mut text = serde_json::to_vec_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
        text.push(b'\n');
        self.write(name, &text)
    }

    pub fn artifacts(&self) -> &[ArtifactEntry] {
        &self.written
    }
}

fn csv_error(e: csv::Error) -> CliError {
    CliError::Io(format!("csv: {e}"))
}

/// One row per sweep point: swept value, crosstalk level, `F`, `F²`,
/// transfer time, per-cavity photon averages, condition flags and wall time.
pub fn sweep_csv(result: &SweepResult, cavity_labels: &[String]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["value".to_string(), "crosstalk_gmax".into(), "F".into(), "F2".into(), "t_transfer_us".into()];
    header.extend(cavity_labels.iter().map(|l| format!("n_{l}")));
    if let Some(first) = result.records.first() {
        header.extend(first.conditions.iter().map(|c| format!("{}_pass", c.id.as_str().to_lowercase())));
    }
    header.extend(["flagged".into(), "wall_ms".into()]);
    w.write_record(&header).map_err(csv_error)?;
    for r in &result.records {
        let mut row = vec![
            r.value.to_string(),
            r.crosstalk.map_or(String::new(), |c| c.to_string()),
            r.fidelity.to_string(),
            r.fidelity_sq.to_string(),
            (r.t_transfer * 1e6).to_string(),
        ];
        row.extend(r.photons.iter().map(|p| p.to_string()));
        row.extend(r.conditions.iter().map(|c| c.pass.to_string()));
        row.push(r.flagged.to_string());
        row.push(format!("{:.3}", r.wall_ms));
        w.write_record(&row).map_err(csv_error)?;
    }
    String::from_utf8(w.into_inner().map_err(|e| CliError::Io(e.to_string()))?).map_err(|e| CliError::Io(e.to_string()))
}

/// A named `(x, y)` series.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

/// Reads the `value`/`F` columns of a sweep CSV, one series per crosstalk
/// level in order of first appearance.
pub fn series_from_csv(text: &str) -> Result<Vec<Series>, CliError> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let headers = r.headers().map_err(csv_error)?.clone();
    let col = |name: &str| {
        headers.iter().position(|h| h == name).ok_or_else(|| CliError::Io(format!("csv has no `{name}` column")))
    };
    let (xi, ci, fi) = (col("value")?, col("crosstalk_gmax")?, col("F")?);
    let number = |s: &str| s.parse::<f64>().map_err(|e| CliError::Io(format!("csv value `{s}`: {e}")));
    let mut out: Vec<Series> = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_error)?;
        let level = &rec[ci];
        let label = if level.is_empty() { "F".to_string() } else { format!("crosstalk {level} g_max") };
        let point = (number(&rec[xi])?, number(&rec[fi])?);
        match out.iter_mut().find(|s| s.label == label) {
            Some(s) => s.points.push(point),
            None => out.push(Series { label, points: vec![point] }),
        }
    }
    Ok(out)
}

/// Round tick spacing giving roughly `target` intervals over `span`.
fn tick_step(span: f64, target: usize) -> f64 {
    let raw = span / target as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let norm = raw / mag;
    let nice = if norm < 1.5 {
        1.0
    } else if norm < 3.0 {
        2.0
    } else if norm < 7.0 {
        5.0
    } else {
        10.0
    };
    nice * mag
}

fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let step = tick_step(hi - lo, 5);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

fn padded_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    let pad = if hi > lo { 0.05 * (hi - lo) } else { 0.5 * lo.abs().max(1e-3) };
    (lo - pad, hi + pad)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

/// Static line plot with axes, ticks and a legend.
pub fn line_plot_svg(series: &[Series], x_label: &str, y_label: &str, title: &str) -> String {
    let (w, h) = (640.0, 420.0);
    let (left, right, top, bottom) = (70.0, 20.0, 40.0, 55.0);
    let (pw, ph) = (w - left - right, h - top - bottom);
    let all = || series.iter().flat_map(|s| s.points.iter());
    let (x0, x1) = padded_range(all().map(|p| p.0));
    let (y0, y1) = padded_range(all().map(|p| p.1));
    let sx = |x: f64| left + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| top + (1.0 - (y - y0) / (y1 - y0)) * ph;

    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\" \
         font-family=\"sans-serif\" font-size=\"12\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    );
    s += &format!("<text x=\"{}\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n", w / 2.0, escape(title));
    s += &format!("<rect x=\"{left}\" y=\"{top}\" width=\"{pw}\" height=\"{ph}\" fill=\"none\" stroke=\"black\"/>\n");
    for t in ticks(x0, x1) {
        let x = sx(t);
        s += &format!("<line x1=\"{x:.2}\" y1=\"{}\" x2=\"{x:.2}\" y2=\"{}\" stroke=\"black\"/>\n", top + ph, top + ph + 5.0);
        s += &format!("<text x=\"{x:.2}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n", top + ph + 18.0, fmt_tick(t));
    }
    for t in ticks(y0, y1) {
        let y = sy(t);
        s += &format!("<line x1=\"{}\" y1=\"{y:.2}\" x2=\"{left}\" y2=\"{y:.2}\" stroke=\"black\"/>\n", left - 5.0);
        s += &format!("<line x1=\"{left}\" y1=\"{y:.2}\" x2=\"{}\" y2=\"{y:.2}\" stroke=\"#dddddd\"/>\n", left + pw);
        s += &format!("<text x=\"{}\" y=\"{:.2}\" text-anchor=\"end\">{}</text>\n", left - 8.0, y + 4.0, fmt_tick(t));
    }
    s += &format!("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n", left + pw / 2.0, h - 15.0, escape(x_label));
    s += &format!(
        "<text x=\"18\" y=\"{0}\" text-anchor=\"middle\" transform=\"rotate(-90 18 {0})\">{1}</text>\n",
        top + ph / 2.0,
        escape(y_label)
    );
    for (i, series) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let pts: Vec<String> = series.points.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
        s += &format!("<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>\n", pts.join(" "));
        for &(x, y) in &series.points {
            s += &format!("<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"2.5\" fill=\"{color}\"/>\n", sx(x), sy(y));
        }
        let ly = top + 14.0 + 16.0 * i as f64;
        let lx = left + pw - 170.0;
        s += &format!("<line x1=\"{lx}\" y1=\"{ly}\" x2=\"{}\" y2=\"{ly}\" stroke=\"{color}\" stroke-width=\"2\"/>\n", lx + 20.0);
        s += &format!("<text x=\"{}\" y=\"{}\">{}</text>\n", lx + 26.0, ly + 4.0, escape(&series.label));
    }
    s += "</svg>\n";
    s
}

fn fmt_tick(t: f64) -> String {
    let s = format!("{t:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.to_string()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest<'a, C: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub config_path: String,
    /// SHA-256 of the config file as read.
    pub input_sha256: String,
    pub resolved_config: &'a C,
    /// SHA-256 of the resolved config.
    pub resolved_sha256: String,
    pub artifacts: Vec<ArtifactEntry>,
    pub status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<crate::error::ErrorReport>,
    #[serde(skip_serializing_if = "serde_json::Value::is_null")]
    pub diagnostics: serde_json::Value,
}

#[cfg(test)]
mod tests {
    use super::*;

    const CSV: &str = "value,crosstalk_gmax,F,F2\n5,0,0.96,0.92\n6,0,0.97,0.94\n5,0.1,0.95,0.90\n6,0.1,0.96,0.92\n";

    #[test]
    fn series_follow_csv_rows() {
        let s = series_from_csv(CSV).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s[0].label, "crosstalk 0 g_max");
        assert_eq!(s[1].points, vec![(5.0, 0.95), (6.0, 0.96)]);
        assert!(series_from_csv("a,b\n1,2\n").is_err());
    }

    #[test]
    fn svg_has_one_line_per_series() {
        let svg = line_plot_svg(&series_from_csv(CSV).unwrap(), "b", "F", "F vs b");
        assert!(svg.starts_with("<svg"));
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert_eq!(svg.matches("<circle").count(), 4);
        assert!(svg.contains("crosstalk 0.1 g_max"));
    }

    #[test]
    fn ticks_are_round() {
        assert_eq!(ticks(0.0, 1.0), vec![0.0, 0.2, 0.4, 0.6000000000000001, 0.8, 1.0]);
        assert_eq!(fmt_tick(0.6000000000000001), "0.6");
        assert_eq!(tick_step(10.0, 5), 2.0);
    }
}
