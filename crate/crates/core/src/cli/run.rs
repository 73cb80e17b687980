//! Analysis driver: sweep, per-candidate pipeline (optionally parallel),
//! report assembly, and output emission.

use crate::cli::config::{build_family, AnalysisConfig};
use crate::cli::report::{
    emit_csv, render_report, write_atomic, AnalysisReport, CsvData, Timing, SCHEMA_VERSION,
};
use crate::crossing::CrossingSettings;
use crate::detector::{
    analyze_candidate, assemble_report, gap_adjusted, pencil_from_family, sweep_candidates,
    BifurcationFinding, DetectorSettings,
};
use crate::error::Result;
use crate::spectral::{default_eps_null, eigendecompose};
use rayon::prelude::*;
use std::path::Path;
use std::time::Instant;

fn detector_settings(cfg: &AnalysisConfig) -> DetectorSettings {
    let mut crossing = CrossingSettings::default();
    crossing.eps_null = cfg.tolerances.eps_null;
    crossing.eps_track = cfg.tolerances.eps_track;
    DetectorSettings {
        eps_null: cfg.tolerances.eps_null,
        delta: cfg.classification.delta,
        rho: cfg.classification.rho,
        grid_m: cfg.classification.m,
        side_samples: 8,
        tau_psi: cfg.tolerances.tau_psi,
        crossing,
    }
}

/// Runs the full analysis and writes the report and CSV outputs named in the
/// config. `jobs` bounds the per-candidate parallelism; candidate order in
/// the report is independent of it.
pub fn run(cfg: &AnalysisConfig, jobs: Option<usize>) -> Result<AnalysisReport> {
    let start = Instant::now();
    let family = build_family(&cfg.problem)?;
    let settings = detector_settings(cfg);
    let [a, b] = cfg.lambda_range;

    let candidates = sweep_candidates(&family, a, b, cfg.steps, settings.eps_null)?;
    let pencil = pencil_from_family(&family)?;

    let analyze_all = || -> Result<Vec<(BifurcationFinding, Vec<String>)>> {
        candidates
            .par_iter()
            .enumerate()
            .map(|(i, &star)| {
                let s = gap_adjusted(&settings, &candidates, i);
                let mut warnings = Vec::new();
                let finding = analyze_candidate(&family, pencil.as_ref(), star, &s, &mut warnings)?;
                Ok((finding, warnings))
            })
            .collect()
    };
    let results = match jobs {
        Some(j) if j >= 1 => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(j)
                .build()
                .map_err(|e| crate::error::Error::Config(format!("--jobs: {e}")))?;
            pool.install(analyze_all)?
        }
        _ => analyze_all()?,
    };

    let mut findings = Vec::with_capacity(results.len());
    let mut warnings = Vec::new();
    for (f, w) in results {
        findings.push(f);
        warnings.extend(w);
    }
    let findings = assemble_report(findings)?;

    // Eigenvalue trajectories over the sweep grid for plotting.
    let mut trajectory = Vec::with_capacity(cfg.steps + 1);
    for i in 0..=cfg.steps {
        let lam = a + (b - a) * i as f64 / cfg.steps as f64;
        let bm = family.hessian_at_zero(&[lam])?;
        let eps = settings.eps_null.unwrap_or_else(|| default_eps_null(&bm));
        let sd = eigendecompose(&bm, eps)?;
        trajectory.push((lam, sd.eigenvalues));
    }
    let csv = CsvData { trajectory };

    let report = AnalysisReport {
        schema_version: SCHEMA_VERSION,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        config: cfg.clone(),
        findings,
        warnings,
        timing: Timing {
            total_seconds: start.elapsed().as_secs_f64(),
        },
    };

    if let Some(path) = &cfg.outputs.report {
        write_atomic(Path::new(path), render_report(&report)?.as_bytes())?;
    }
    if let Some(dir) = &cfg.outputs.csv_dir {
        emit_csv(&report, &csv, Path::new(dir))?;
    }
    Ok(report)
}
