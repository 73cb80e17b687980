//! Lyapunov-Schmidt reduction on a family with a closed-form complement
//! solution: F = (1-lambda)/2 u1^2 + 1/2 u2^2 + u1^2 u2 forces
//! psi(lambda, z) = -z^2 e2, so every quantity below can be cross-checked by
//! hand.

use bifurcata::reduction::{
    build_reduced_model, reduced_gradient, reduced_hessian_at_zero, reduced_value, solve_psi,
};
use bifurcata::model::builtin;
use nalgebra::DVector;

fn main() {
    let family = builtin::coupled();
    let model = build_reduced_model(&family, &[1.0], 1e-9).expect("degenerate at lambda* = 1");
    println!(
        "kernel dim = {}, trust radius = {:.3}",
        model.kernel_dim(),
        model.trust_radius()
    );

    for z in [0.05, 0.1, 0.2] {
        let zv = DVector::from_row_slice(&[z]);
        let sol = solve_psi(&model, &[1.0], &zv).expect("complement solve");
        let psi = model.complement_basis() * &sol.w;
        println!(
            "z = {z:<5} psi_2 = {:+.6e} (exact {:+.6e})  iters = {}",
            psi[1],
            -z * z,
            sol.iterations
        );
        let value = reduced_value(&model, &[1.0], &zv).unwrap();
        let grad = reduced_gradient(&model, &[1.0], &zv).unwrap();
        println!("        L(z) = {value:+.6e}  dL(z) = {:+.6e}", grad[0]);
    }

    for lam in [0.5, 0.9, 1.0, 1.1] {
        let h = reduced_hessian_at_zero(&model, &[lam]).unwrap();
        println!(
            "reduced Hessian at 0 for lambda = {lam}: {:+.6e} (exact {:+.6e})",
            h.matrix()[(0, 0)],
            1.0 - lam
        );
    }
}
