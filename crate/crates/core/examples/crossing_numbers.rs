//! Tracks near-zero eigenvalues of a Hessian path across a degenerate
//! parameter and reads off the crossing numbers r+ / r- and the parity sign.

use bifurcata::crossing::{check_theorem_3_5, CrossingSettings};
use bifurcata::model::builtin;

fn main() {
    let family = builtin::pitchfork();
    let path = |lam: f64| family.hessian_at_zero(&[lam]).expect("Hessian");
    let settings = CrossingSettings::default();

    let outcome = check_theorem_3_5(path, 1.0, &settings).expect("crossing scan");
    let report = outcome.report.expect("degenerate at lambda* = 1");

    println!("near-zero eigenvalues of B_lambda(0) around lambda* = 1:");
    for (lam, eigs) in &report.samples {
        println!("  lambda = {lam:+.4}  eig0 = {eigs:?}");
    }
    println!(
        "r+ = {}, r- = {}, parity = {}",
        report.r_plus, report.r_minus, report.parity
    );
    println!("conditions: {:?}", report.conditions);
    println!("bifurcation predicted: {}", outcome.verdict);
}
