//! End-to-end analysis of the canonical pitchfork: sweep, criteria, Morse
//! jump, trichotomy classification and Z2 orbit counts.

use bifurcata::detector::{analyze, DetectorSettings};
use bifurcata::model::builtin;

fn main() {
    let family = builtin::pitchfork();
    let (findings, warnings) =
        analyze(&family, 0.0, 2.0, 100, &DetectorSettings::default()).expect("analysis");

    for f in &findings {
        println!("lambda* = {:.9}", f.lambda_star[0]);
        println!("  nullity      = {}", f.nullity);
        println!(
            "  morse jump   = left {:?} star {} right {:?} ({:?})",
            f.morse_jump.mu_left, f.morse_jump.mu_star, f.morse_jump.mu_right, f.morse_jump.tag
        );
        println!("  criteria     = {:?}", f.criteria);
        println!("  alternative  = {:?}", f.alternative);
        if let Some(z2) = &f.z2 {
            println!("  z2 orbits    = n+ {} / n- {}", z2.n_plus, z2.n_minus);
        }
        println!("  branch samples (z vs +-sqrt(lambda - 1)):");
        for s in &f.branches {
            let want = (s.lambda - 1.0).sqrt();
            let zs: Vec<f64> = s.points.iter().map(|p| p.z[0]).collect();
            println!("    lambda = {:.6}  z = {zs:?}  exact |z| = {want:.6}", s.lambda);
        }
    }
    for w in &warnings {
        println!("warning: {w}");
    }
}
