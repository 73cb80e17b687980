//! Generalized eigenanalysis of a pencil and the closed-form Morse index:
//! for a positive definite base, the index at lambda is the total dimension
//! of the eigenspaces below lambda.

use bifurcata::model::SymmetricOperator;
use bifurcata::spectral::{
    default_eps_null, generalized_eigenvalues, morse_data, morse_index_spd, PencilFamily,
};

fn main() {
    let base = SymmetricOperator::from_diagonal(&[1.0, 2.0, 2.0, 5.0]);
    let hat = SymmetricOperator::identity(4);
    let pencil = PencilFamily::new(base, vec![hat]).expect("pencil");
    let eps = default_eps_null(pencil.base());

    let geig = generalized_eigenvalues(&pencil, eps).expect("spd route");
    println!("generalized eigenvalues of diag(1,2,2,5) v = lambda v:");
    for p in &geig.pairs {
        println!("  lambda_k = {:.6}  dim H_k = {}", p.value, p.dim());
    }

    for lambda in [0.5, 1.5, 3.0, 6.0] {
        let formula = morse_index_spd(&geig, lambda);
        let direct = morse_data(&pencil.at(&[lambda]).unwrap(), eps).unwrap().mu;
        println!(
            "lambda = {lambda:<4} index by formula = {formula}  by eigencount = {direct}"
        );
        assert_eq!(formula, direct);
    }
}
