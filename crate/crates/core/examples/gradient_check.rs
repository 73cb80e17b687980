//! Defines a polynomial potential family and verifies its analytic gradient
//! and Hessian against central finite differences.

use bifurcata::model::{builtin, check_gradient_consistency};
use nalgebra::DVector;

fn main() {
    let u = DVector::from_row_slice(&[0.31, -0.17]);
    println!("finite-difference consistency at lambda = 0.7, u = {:?}", u.as_slice());
    for family in builtin::all() {
        let rep = check_gradient_consistency(&family, &[0.7], &u, 1e-5).expect("evaluation");
        println!(
            "{:<20} grad-vs-value {:.2e}   hess-vs-grad {:.2e}",
            family.name(),
            rep.gradient_vs_value,
            rep.hessian_vs_gradient
        );
    }
}
