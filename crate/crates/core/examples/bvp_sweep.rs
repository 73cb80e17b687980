//! Sweeps a discretized 1-D Dirichlet problem for bifurcation candidates and
//! compares them with the discrete Laplacian eigenvalues.

use bifurcata::detector::{analyze, DetectorSettings};
use bifurcata::model::{make_bvp_family, DensitySpec};

fn main() {
    // F = sum h W(du/h) - lambda sum h G(u) with W = s^2/2 + s^4/4 and
    // G = v^2/2 + v^4/4 on 8 interior points.
    let m = 8usize;
    let w = DensitySpec::new(vec![(2, 0.5), (4, 0.25)]).expect("W");
    let g = DensitySpec::new(vec![(2, 0.5), (4, 0.25)]).expect("G");
    let family = make_bvp_family(m, w, g).expect("family");

    let h = 1.0 / (m as f64 + 1.0);
    println!("discrete Laplacian eigenvalues (first three):");
    for k in 1..=3 {
        let lam = (2.0 - 2.0 * (k as f64 * std::f64::consts::PI * h).cos()) / (h * h);
        println!("  k = {k}: {lam:.6}");
    }

    let (findings, warnings) =
        analyze(&family, 0.0, 60.0, 600, &DetectorSettings::default()).expect("analysis");
    println!("candidates found in [0, 60]:");
    for f in &findings {
        println!(
            "  lambda* = {:>10.6}  nullity = {}  jump = {:?}  alternative = {:?}",
            f.lambda_star[0], f.nullity, f.morse_jump.tag, f.alternative
        );
    }
    for w in &warnings {
        println!("warning: {w}");
    }
}
