//! JSON report and CSV emission with atomic writes.

use crate::cli::config::AnalysisConfig;
use crate::detector::BifurcationFinding;
use crate::error::{Error, Result};
use serde::Serialize;
use std::fs;
use std::path::Path;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize)]
pub struct Timing {
    pub total_seconds: f64,
}

/// Full analysis output. Everything except the timing block is a
/// deterministic function of the config and tool version.
#[derive(Debug, Clone, Serialize)]
pub struct AnalysisReport {
    pub schema_version: u32,
    pub tool_version: String,
    pub config: AnalysisConfig,
    pub findings: Vec<BifurcationFinding>,
    pub warnings: Vec<String>,
    pub timing: Timing,
}

/// Plot-ready data computed alongside the report.
#[derive(Debug, Clone)]
pub struct CsvData {
    /// (lambda, ascending eigenvalues of B_lambda(0)) over the sweep grid.
    pub trajectory: Vec<(f64, Vec<f64>)>,
}

/// Writes bytes to `path` atomically: temp file in the same directory, then
/// rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    let name = path
        .file_name()
        .ok_or_else(|| Error::Config(format!("not a file path: {}", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp", name.to_string_lossy()));
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Serializes the report as pretty JSON with a trailing newline.
pub fn render_report(report: &AnalysisReport) -> Result<String> {
    let mut s = serde_json::to_string_pretty(report)
        .map_err(|e| Error::InvariantViolation(format!("report serialization: {e}")))?;
    s.push('\n');
    Ok(s)
}

fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Emits trajectory.csv and one branch_<k>.csv per finding into `dir`.
/// Values use 17 significant digits for bit-stable round-trips.
pub fn emit_csv(report: &AnalysisReport, csv: &CsvData, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;

    let n = csv.trajectory.first().map_or(0, |(_, e)| e.len());
    let mut out = String::from("lambda");
    for i in 1..=n {
        out.push_str(&format!(",eig_{i}"));
    }
    out.push('\n');
    for (lam, eigs) in &csv.trajectory {
        out.push_str(&fmt17(*lam));
        for e in eigs {
            out.push(',');
            out.push_str(&fmt17(*e));
        }
        out.push('\n');
    }
    write_atomic(&dir.join("trajectory.csv"), out.as_bytes())?;

    for (k, finding) in report.findings.iter().enumerate() {
        let d = finding
            .branches
            .iter()
            .flat_map(|s| s.points.iter())
            .map(|p| p.z.len())
            .next()
            .unwrap_or(0);
        let mut out = String::from("lambda,branch_id");
        for i in 1..=d {
            out.push_str(&format!(",z_{i}"));
        }
        out.push_str(",lifted_norm\n");
        for sample in &finding.branches {
            for (id, p) in sample.points.iter().enumerate() {
                out.push_str(&fmt17(sample.lambda));
                out.push_str(&format!(",{id}"));
                for z in &p.z {
                    out.push(',');
                    out.push_str(&fmt17(*z));
                }
                let norm = p.lifted.iter().map(|x| x * x).sum::<f64>().sqrt();
                out.push(',');
                out.push_str(&fmt17(norm));
                out.push('\n');
            }
        }
        write_atomic(&dir.join(format!("branch_{k}.csv")), out.as_bytes())?;
    }
    Ok(())
}
