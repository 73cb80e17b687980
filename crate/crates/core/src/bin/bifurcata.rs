//! Thin batch front door over the library: parse a TOML config, run the
//! analysis, and emit the JSON report and CSVs.
//!
//! Exit codes: 0 success (including zero findings), 2 invariant violation or
//! io failure, 3 config error.

use bifurcata::cli::{parse_config, run};
use bifurcata::detector::Flag;
use bifurcata::Error;
use clap::Parser;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(
    name = "bifurcata",
    version,
    about = "Bifurcation analysis for parameterized potential families"
)]
struct Args {
    /// TOML analysis config.
    #[arg(long)]
    config: PathBuf,

    /// JSON report destination (overrides outputs.report in the config).
    #[arg(long)]
    report: Option<PathBuf>,

    /// Directory for trajectory and branch CSVs (overrides outputs.csv_dir).
    #[arg(long)]
    csv_dir: Option<PathBuf>,

    /// Worker threads for per-candidate analysis.
    #[arg(long)]
    jobs: Option<usize>,

    /// Print per-finding detail.
    #[arg(long)]
    verbose: bool,
}

fn main() -> ExitCode {
    let args = Args::parse();
    // Reserved for future stochastic components; all current algorithms are
    // deterministic.
    let _ = std::env::var("BIFURCATA_SEED");

    let text = match std::fs::read_to_string(&args.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", args.config.display());
            return ExitCode::from(3);
        }
    };
    let mut cfg = match parse_config(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(3);
        }
    };
    if let Some(p) = &args.report {
        cfg.outputs.report = Some(p.display().to_string());
    }
    if let Some(p) = &args.csv_dir {
        cfg.outputs.csv_dir = Some(p.display().to_string());
    }
    let verbose = args.verbose || cfg.outputs.verbose;

    let report = match run(&cfg, args.jobs) {
        Ok(r) => r,
        Err(e @ Error::Config(_)) | Err(e @ Error::InvalidSpec(_)) => {
            eprintln!("error: {e}");
            return ExitCode::from(3);
        }
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };

    println!(
        "{} finding(s) in [{}, {}]",
        report.findings.len(),
        cfg.lambda_range[0],
        cfg.lambda_range[1]
    );
    for f in &report.findings {
        println!(
            "  lambda* = {:.9}  nullity = {}  alternative = {:?}",
            f.lambda_star[0], f.nullity, f.alternative
        );
        if verbose {
            println!(
                "    morse jump: left {:?} star {} right {:?} tag {:?}",
                f.morse_jump.mu_left, f.morse_jump.mu_star, f.morse_jump.mu_right, f.morse_jump.tag
            );
            for (name, flag) in [
                ("thm3_5", f.criteria.thm3_5),
                ("cor3_7_id", f.criteria.cor3_7_id),
                ("cor4_4_a", f.criteria.cor4_4_a),
                ("cor4_4_b", f.criteria.cor4_4_b),
                ("thm3_9_spd", f.criteria.thm3_9_spd),
                ("thm4_9_b", f.criteria.thm4_9_b),
                ("thm4_9_bprime", f.criteria.thm4_9_bprime),
            ] {
                if flag != Flag::Indeterminate {
                    println!("    {name}: {flag:?}");
                }
            }
            if let Some(z2) = &f.z2 {
                println!("    z2 orbits: n+ = {}, n- = {}", z2.n_plus, z2.n_minus);
            }
        }
    }
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    ExitCode::SUCCESS
}
