//! The multiparameter quadratic form Q on the kernel: its Morse index and
//! coindex decide bifurcation for families with several parameters, and the
//! form scales linearly along rays through lambda*.

use bifurcata::detector::pencil_from_family;
use bifurcata::model::{make_polynomial_family, PolyTerm};
use bifurcata::reduction::{build_reduced_model, parameter_form_q};

fn main() {
    // F = (1 - l1)/2 u1^2 + (1 - l2)/2 u2^2: both modes degenerate at (1, 1).
    let family = make_polynomial_family(
        "two-parameter",
        "decoupled modes driven by separate parameters",
        2,
        2,
        vec![
            PolyTerm::new(vec![0, 0], vec![2, 0], 0.5),
            PolyTerm::new(vec![1, 0], vec![2, 0], -0.5),
            PolyTerm::new(vec![0, 0], vec![0, 2], 0.5),
            PolyTerm::new(vec![0, 1], vec![0, 2], -0.5),
        ],
    )
    .expect("family");

    let pencil = pencil_from_family(&family).expect("probe").expect("affine");
    let model = build_reduced_model(&family, &[1.0, 1.0], 1e-9).expect("kernel at (1,1)");
    println!("kernel dimension at lambda* = (1, 1): {}", model.kernel_dim());

    for probe in [[2.0, 2.0], [2.0, 0.0], [0.0, 0.0], [1.0, 1.5]] {
        let pf = parameter_form_q(&pencil, &model, &probe).expect("Q form");
        println!(
            "lambda = {probe:?}  Q = {:?}  index = {}  coindex = {}",
            pf.q.matrix().as_slice(),
            pf.index,
            pf.coindex
        );
    }

    // Scaling along the ray through (1.7, 0.4) and antisymmetry through the
    // mirror point.
    let q1 = parameter_form_q(&pencil, &model, &[1.7, 0.4]).unwrap();
    let q_half = parameter_form_q(&pencil, &model, &[1.35, 0.7]).unwrap();
    let q_mirror = parameter_form_q(&pencil, &model, &[0.3, 1.6]).unwrap();
    println!(
        "scaling residual     = {:.3e}",
        (q_half.q.matrix() * 2.0 - q1.q.matrix()).norm()
    );
    println!(
        "antisymmetry residual = {:.3e}",
        (q_mirror.q.matrix() + q1.q.matrix()).norm()
    );
}
