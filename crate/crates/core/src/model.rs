//! Parameterized potential families F(lambda, u) on R^n with analytic
//! gradient and Hessian, plus builtin test problems.
//!
//! Every family carries the trivial solution u = 0: gradient(lambda, 0) = 0
//! for all lambda. Polynomial families enforce this at construction by
//! rejecting terms that are constant or linear in u.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};

/// Relative tolerance for the symmetry check on Hessians.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Dense real symmetric matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricOperator {
    mat: DMatrix<f64>,
}

impl SymmetricOperator {
    /// Wraps a dense matrix, checking max |H_ij - H_ji| <= 1e-12 * (1 + max|H|).
    pub fn new(mat: DMatrix<f64>) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(Error::DimensionMismatch {
                expected: mat.nrows(),
                got: mat.ncols(),
            });
        }
        let amax = mat.iter().fold(0.0f64, |a, &x| a.max(x.abs()));
        let mut skew = 0.0f64;
        for i in 0..mat.nrows() {
            for j in (i + 1)..mat.ncols() {
                skew = skew.max((mat[(i, j)] - mat[(j, i)]).abs());
            }
        }
        if skew > SYMMETRY_TOL * (1.0 + amax) {
            return Err(Error::Asymmetric { skew });
        }
        // Symmetrize exactly so downstream eigensolves see a symmetric matrix.
        let sym = (&mat + mat.transpose()) * 0.5;
        Ok(Self { mat: sym })
    }

    pub fn from_diagonal(d: &[f64]) -> Self {
        Self {
            mat: DMatrix::from_diagonal(&DVector::from_row_slice(d)),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            mat: DMatrix::identity(n, n),
        }
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            mat: DMatrix::zeros(n, n),
        }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.mat
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.mat
    }

    /// Frobenius norm; used as the scale in relative tolerances.
    pub fn norm(&self) -> f64 {
        self.mat.norm()
    }
}

type ValueFn = dyn Fn(&[f64], &DVector<f64>) -> f64 + Send + Sync;
type GradientFn = dyn Fn(&[f64], &DVector<f64>) -> DVector<f64> + Send + Sync;
type HessianFn = dyn Fn(&[f64], &DVector<f64>) -> DMatrix<f64> + Send + Sync;

/// A parameterized potential F: R^p x R^n -> R with analytic derivatives.
///
/// Evaluation is pure; instances are immutable and safe to share across
/// concurrent sweep workers.
pub struct PotentialFamily {
    dim_state: usize,
    dim_param: usize,
    value_fn: Box<ValueFn>,
    gradient_fn: Box<GradientFn>,
    hessian_fn: Box<HessianFn>,
    name: String,
    description: String,
}

impl std::fmt::Debug for PotentialFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PotentialFamily")
            .field("name", &self.name)
            .field("dim_state", &self.dim_state)
            .field("dim_param", &self.dim_param)
            .finish()
    }
}

impl PotentialFamily {
    pub fn new(
        dim_state: usize,
        dim_param: usize,
        value_fn: Box<ValueFn>,
        gradient_fn: Box<GradientFn>,
        hessian_fn: Box<HessianFn>,
        name: impl Into<String>,
        description: impl Into<String>,
    ) -> Self {
        assert!(dim_state >= 1 && dim_param >= 1);
        Self {
            dim_state,
            dim_param,
            value_fn,
            gradient_fn,
            hessian_fn,
            name: name.into(),
            description: description.into(),
        }
    }

    pub fn dim_state(&self) -> usize {
        self.dim_state
    }

    pub fn dim_param(&self) -> usize {
        self.dim_param
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    fn check_dims(&self, lambda: &[f64], u: &DVector<f64>) -> Result<()> {
        if lambda.len() != self.dim_param {
            return Err(Error::DimensionMismatch {
                expected: self.dim_param,
                got: lambda.len(),
            });
        }
        if u.len() != self.dim_state {
            return Err(Error::DimensionMismatch {
                expected: self.dim_state,
                got: u.len(),
            });
        }
        Ok(())
    }

    pub fn value(&self, lambda: &[f64], u: &DVector<f64>) -> Result<f64> {
        self.check_dims(lambda, u)?;
        Ok((self.value_fn)(lambda, u))
    }

    pub fn gradient(&self, lambda: &[f64], u: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_dims(lambda, u)?;
        Ok((self.gradient_fn)(lambda, u))
    }

    /// The Hessian B_lambda(u), checked for symmetry.
    pub fn hessian(&self, lambda: &[f64], u: &DVector<f64>) -> Result<SymmetricOperator> {
        self.check_dims(lambda, u)?;
        SymmetricOperator::new((self.hessian_fn)(lambda, u))
    }

    /// B_lambda(0), the Hessian along the trivial solution family.
    pub fn hessian_at_zero(&self, lambda: &[f64]) -> Result<SymmetricOperator> {
        self.hessian(lambda, &DVector::zeros(self.dim_state))
    }
}

/// Evaluates the Hessian of `family` at (lambda, u).
pub fn eval_hessian(
    family: &PotentialFamily,
    lambda: &[f64],
    u: &DVector<f64>,
) -> Result<SymmetricOperator> {
    family.hessian(lambda, u)
}

/// One monomial c * prod lambda_j^{a_j} * prod u_i^{b_i}.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyTerm {
    pub lambda_powers: Vec<u32>,
    pub u_powers: Vec<u32>,
    pub coeff: f64,
}

impl PolyTerm {
    pub fn new(lambda_powers: Vec<u32>, u_powers: Vec<u32>, coeff: f64) -> Self {
        Self {
            lambda_powers,
            u_powers,
            coeff,
        }
    }

    fn u_degree(&self) -> u32 {
        self.u_powers.iter().sum()
    }

    fn eval(&self, lambda: &[f64], u: &DVector<f64>) -> f64 {
        let mut v = self.coeff;
        for (j, &a) in self.lambda_powers.iter().enumerate() {
            v *= lambda[j].powi(a as i32);
        }
        for (i, &b) in self.u_powers.iter().enumerate() {
            v *= u[i].powi(b as i32);
        }
        v
    }

    /// d/du_i of the monomial.
    fn eval_du(&self, lambda: &[f64], u: &DVector<f64>, i: usize) -> f64 {
        let b = self.u_powers[i];
        if b == 0 {
            return 0.0;
        }
        let mut v = self.coeff * b as f64;
        for (j, &a) in self.lambda_powers.iter().enumerate() {
            v *= lambda[j].powi(a as i32);
        }
        for (k, &bk) in self.u_powers.iter().enumerate() {
            let p = if k == i { bk - 1 } else { bk };
            v *= u[k].powi(p as i32);
        }
        v
    }

    /// d^2/du_i du_j of the monomial.
    fn eval_du2(&self, lambda: &[f64], u: &DVector<f64>, i: usize, j: usize) -> f64 {
        let bi = self.u_powers[i];
        let factor = if i == j {
            if bi < 2 {
                return 0.0;
            }
            (bi * (bi - 1)) as f64
        } else {
            let bj = self.u_powers[j];
            if bi == 0 || bj == 0 {
                return 0.0;
            }
            (bi * bj) as f64
        };
        let mut v = self.coeff * factor;
        for (k, &a) in self.lambda_powers.iter().enumerate() {
            v *= lambda[k].powi(a as i32);
        }
        for (k, &bk) in self.u_powers.iter().enumerate() {
            let mut p = bk;
            if k == i {
                p -= 1;
            }
            if k == j {
                p -= 1;
            }
            v *= u[k].powi(p as i32);
        }
        v
    }
}

/// Builds a polynomial family by exact symbolic differentiation of the terms.
///
/// Terms that are constant or linear in u are rejected: they would break the
/// trivial-solution invariant gradient(lambda, 0) = 0.
pub fn make_polynomial_family(
    name: impl Into<String>,
    description: impl Into<String>,
    dim_param: usize,
    dim_state: usize,
    terms: Vec<PolyTerm>,
) -> Result<PotentialFamily> {
    if dim_param < 1 || dim_state < 1 {
        return Err(Error::InvalidSpec("dimensions must be positive".into()));
    }
    for (k, t) in terms.iter().enumerate() {
        if t.lambda_powers.len() != dim_param || t.u_powers.len() != dim_state {
            return Err(Error::InvalidSpec(format!(
                "term {k}: power vectors must have lengths {dim_param} and {dim_state}"
            )));
        }
        if t.u_degree() < 2 {
            return Err(Error::InvalidSpec(format!(
                "term {k} has degree {} in u; terms constant or linear in u are not allowed",
                t.u_degree()
            )));
        }
        if !t.coeff.is_finite() {
            return Err(Error::InvalidSpec(format!("term {k}: non-finite coefficient")));
        }
    }

    let terms_v = terms.clone();
    let terms_g = terms.clone();
    let terms_h = terms;
    let n = dim_state;

    Ok(PotentialFamily::new(
        dim_state,
        dim_param,
        Box::new(move |lam, u| terms_v.iter().map(|t| t.eval(lam, u)).sum()),
        Box::new(move |lam, u| {
            DVector::from_fn(n, |i, _| terms_g.iter().map(|t| t.eval_du(lam, u, i)).sum())
        }),
        Box::new(move |lam, u| {
            DMatrix::from_fn(n, n, |i, j| {
                terms_h.iter().map(|t| t.eval_du2(lam, u, i, j)).sum()
            })
        }),
        name,
        description,
    ))
}

/// Even polynomial density in one variable, sum of c_k * s^k with k >= 2.
#[derive(Debug, Clone, PartialEq)]
pub struct DensitySpec {
    terms: Vec<(u32, f64)>,
}

impl DensitySpec {
    pub fn new(terms: Vec<(u32, f64)>) -> Result<Self> {
        for &(p, c) in &terms {
            if p < 2 {
                return Err(Error::InvalidSpec(format!(
                    "density term s^{p}: powers below 2 are not allowed"
                )));
            }
            if !c.is_finite() {
                return Err(Error::InvalidSpec("non-finite density coefficient".into()));
            }
        }
        Ok(Self { terms })
    }

    pub fn terms(&self) -> &[(u32, f64)] {
        &self.terms
    }

    fn eval(&self, s: f64) -> f64 {
        self.terms.iter().map(|&(p, c)| c * s.powi(p as i32)).sum()
    }

    fn d1(&self, s: f64) -> f64 {
        self.terms
            .iter()
            .map(|&(p, c)| c * p as f64 * s.powi(p as i32 - 1))
            .sum()
    }

    fn d2(&self, s: f64) -> f64 {
        self.terms
            .iter()
            .map(|&(p, c)| c * (p * (p - 1)) as f64 * s.powi(p as i32 - 2))
            .sum()
    }
}

/// Discretized 1-D Dirichlet model on m interior grid points:
/// F_lambda(u) = sum_i h * W((u_{i+1} - u_i)/h) - lambda * sum_i h * G(u_i),
/// with u_0 = u_{m+1} = 0 and h = 1/(m+1).
pub fn make_bvp_family(m: usize, w: DensitySpec, g: DensitySpec) -> Result<PotentialFamily> {
    if m < 2 {
        return Err(Error::InvalidSpec("grid size m must be at least 2".into()));
    }
    // W''(0) > 0 is required so the pencil base is positive definite.
    if w.d2(0.0) <= 0.0 {
        return Err(Error::InvalidSpec(
            "W must have positive second derivative at 0".into(),
        ));
    }
    let h = 1.0 / (m as f64 + 1.0);

    // Pad with Dirichlet zeros at both ends.
    let diffs = move |u: &DVector<f64>| -> Vec<f64> {
        let mut d = Vec::with_capacity(m + 1);
        d.push(u[0] / h);
        for i in 0..m - 1 {
            d.push((u[i + 1] - u[i]) / h);
        }
        d.push(-u[m - 1] / h);
        d
    };

    let (wv, gv) = (w.clone(), g.clone());
    let (wg, gg) = (w.clone(), g.clone());
    let (wh, gh) = (w, g);

    Ok(PotentialFamily::new(
        m,
        1,
        Box::new(move |lam, u| {
            let d = diffs(u);
            let mut f: f64 = d.iter().map(|&s| h * wv.eval(s)).sum();
            f -= lam[0] * u.iter().map(|&x| h * gv.eval(x)).sum::<f64>();
            f
        }),
        Box::new(move |lam, u| {
            let d = diffs(u);
            DVector::from_fn(m, |j, _| {
                wg.d1(d[j]) - wg.d1(d[j + 1]) - lam[0] * h * gg.d1(u[j])
            })
        }),
        Box::new(move |lam, u| {
            let d = diffs(u);
            let mut hmat = DMatrix::zeros(m, m);
            for j in 0..m {
                hmat[(j, j)] = (wh.d2(d[j]) + wh.d2(d[j + 1])) / h - lam[0] * h * gh.d2(u[j]);
                if j + 1 < m {
                    let off = -wh.d2(d[j + 1]) / h;
                    hmat[(j, j + 1)] = off;
                    hmat[(j + 1, j)] = off;
                }
            }
            hmat
        }),
        format!("bvp-m{m}"),
        "discretized 1-D Dirichlet boundary value problem",
    ))
}

/// Max relative errors of the analytic derivatives against central finite
/// differences of the next-lower derivative.
#[derive(Debug, Clone, Copy)]
pub struct ConsistencyReport {
    pub gradient_vs_value: f64,
    pub hessian_vs_gradient: f64,
}

/// Central-difference check of gradient against value and Hessian against
/// gradient at (lambda, u) with step h. Report-only; never fails.
pub fn check_gradient_consistency(
    family: &PotentialFamily,
    lambda: &[f64],
    u: &DVector<f64>,
    h: f64,
) -> Result<ConsistencyReport> {
    let n = family.dim_state();
    let grad = family.gradient(lambda, u)?;
    let hess = family.hessian(lambda, u)?;
    let gscale = 1.0 + grad.amax();
    let hscale = 1.0 + hess.matrix().amax();

    let mut gerr = 0.0f64;
    let mut herr = 0.0f64;
    for i in 0..n {
        let mut up = u.clone();
        let mut um = u.clone();
        up[i] += h;
        um[i] -= h;
        let fd = (family.value(lambda, &up)? - family.value(lambda, &um)?) / (2.0 * h);
        gerr = gerr.max((fd - grad[i]).abs() / gscale);

        let gp = family.gradient(lambda, &up)?;
        let gm = family.gradient(lambda, &um)?;
        for j in 0..n {
            let fd = (gp[j] - gm[j]) / (2.0 * h);
            herr = herr.max((fd - hess.matrix()[(j, i)]).abs() / hscale);
        }
    }
    Ok(ConsistencyReport {
        gradient_vs_value: gerr,
        hessian_vs_gradient: herr,
    })
}

/// Builtin test problems exercised throughout the crate.
pub mod builtin {
    use super::*;

    /// F(lambda, u) = (1-lambda)/2 u1^2 + 1/2 u2^2 + 1/4 u1^4. Even; the
    /// canonical one-sided pair bifurcation at lambda* = 1.
    pub fn pitchfork() -> PotentialFamily {
        make_polynomial_family(
            "pitchfork",
            "supercritical pitchfork with branches +-sqrt(lambda-1)",
            1,
            2,
            vec![
                PolyTerm::new(vec![0], vec![2, 0], 0.5),
                PolyTerm::new(vec![1], vec![2, 0], -0.5),
                PolyTerm::new(vec![0], vec![0, 2], 0.5),
                PolyTerm::new(vec![0], vec![4, 0], 0.25),
            ],
        )
        .expect("builtin")
    }

    /// F(lambda, u) = (1-lambda)/2 u1^2 + 1/2 u2^2 + 1/3 u1^3. Not even; the
    /// nontrivial branch z = lambda - 1 exists on both sides.
    pub fn transcritical() -> PotentialFamily {
        make_polynomial_family(
            "transcritical",
            "transcritical bifurcation with branch z = lambda - 1",
            1,
            2,
            vec![
                PolyTerm::new(vec![0], vec![2, 0], 0.5),
                PolyTerm::new(vec![1], vec![2, 0], -0.5),
                PolyTerm::new(vec![0], vec![0, 2], 0.5),
                PolyTerm::new(vec![0], vec![3, 0], 1.0 / 3.0),
            ],
        )
        .expect("builtin")
    }

    /// F(lambda, u) = (1-lambda)/2 u1^2 + 1/2 u2^2 + u1^2 u2. The quadratic
    /// coupling forces psi(lambda, z) = -z^2 e2 in closed form.
    pub fn coupled() -> PotentialFamily {
        make_polynomial_family(
            "coupled",
            "kernel-complement coupling with closed-form psi = -z^2 e2",
            1,
            2,
            vec![
                PolyTerm::new(vec![0], vec![2, 0], 0.5),
                PolyTerm::new(vec![1], vec![2, 0], -0.5),
                PolyTerm::new(vec![0], vec![0, 2], 0.5),
                PolyTerm::new(vec![0], vec![2, 1], 1.0),
            ],
        )
        .expect("builtin")
    }

    /// F(lambda, u) = (1-lambda)/2 u1^2 + 1/2 u2^2. At lambda* = 1 the
    /// reduced functional vanishes identically.
    pub fn pure_quadratic() -> PotentialFamily {
        make_polynomial_family(
            "pure-quadratic",
            "quadratic family whose reduced functional vanishes at lambda* = 1",
            1,
            2,
            vec![
                PolyTerm::new(vec![0], vec![2, 0], 0.5),
                PolyTerm::new(vec![1], vec![2, 0], -0.5),
                PolyTerm::new(vec![0], vec![0, 2], 0.5),
            ],
        )
        .expect("builtin")
    }

    /// F(lambda, u) = 1/2 u^T diag(1,2) u - lambda/2 |u|^2 + 1/4 (u1^4 + u2^4).
    /// SPD base pencil diag(1,2)/I with candidates at lambda = 1 and 2.
    pub fn two_mode_quartic() -> PotentialFamily {
        make_polynomial_family(
            "two-mode-quartic",
            "diag(1,2)/identity pencil with quartic perturbation",
            1,
            2,
            vec![
                PolyTerm::new(vec![0], vec![2, 0], 0.5),
                PolyTerm::new(vec![0], vec![0, 2], 1.0),
                PolyTerm::new(vec![1], vec![2, 0], -0.5),
                PolyTerm::new(vec![1], vec![0, 2], -0.5),
                PolyTerm::new(vec![0], vec![4, 0], 0.25),
                PolyTerm::new(vec![0], vec![0, 4], 0.25),
            ],
        )
        .expect("builtin")
    }

    /// Two decoupled pitchforks sharing lambda* = 1; kernel dimension 2.
    pub fn double_pitchfork() -> PotentialFamily {
        make_polynomial_family(
            "double-pitchfork",
            "two decoupled pitchforks with a two-dimensional kernel at lambda* = 1",
            1,
            2,
            vec![
                PolyTerm::new(vec![0], vec![2, 0], 0.5),
                PolyTerm::new(vec![1], vec![2, 0], -0.5),
                PolyTerm::new(vec![0], vec![0, 2], 0.5),
                PolyTerm::new(vec![1], vec![0, 2], -0.5),
                PolyTerm::new(vec![0], vec![4, 0], 0.25),
                PolyTerm::new(vec![0], vec![0, 4], 0.25),
            ],
        )
        .expect("builtin")
    }

    /// Every builtin family, for property sweeps.
    pub fn all() -> Vec<PotentialFamily> {
        vec![
            pitchfork(),
            transcritical(),
            coupled(),
            pure_quadratic(),
            two_mode_quartic(),
            double_pitchfork(),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coupled() -> PotentialFamily {
        builtin::coupled()
    }

    #[test]
    fn hessian_of_coupled_family_at_origin() {
        let f = coupled();
        let h = f.hessian_at_zero(&[0.0]).unwrap();
        assert_eq!(h.matrix(), &DMatrix::from_diagonal(&DVector::from_row_slice(&[1.0, 1.0])));
        let h = f.hessian_at_zero(&[2.0]).unwrap();
        assert_eq!(h.matrix(), &DMatrix::from_diagonal(&DVector::from_row_slice(&[-1.0, 1.0])));
    }

    #[test]
    fn hessian_of_coupled_family_off_origin() {
        // H = [[1 - lambda + 2 u2, 2 u1], [2 u1, 1]]
        let f = coupled();
        let h = f
            .hessian(&[0.0], &DVector::from_row_slice(&[1.0, 0.0]))
            .unwrap();
        let expect = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!((h.matrix() - expect).norm() < 1e-14);
    }

    #[test]
    fn eval_hessian_rejects_dimension_mismatch() {
        let f = coupled();
        let err = f.hessian(&[0.0, 1.0], &DVector::zeros(2)).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
        let err = f.hessian(&[0.0], &DVector::zeros(3)).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
    }

    #[test]
    fn polynomial_family_gradient_closed_form() {
        // {u1^2: (1-lambda)/2, u2^2: 1/2, u1^4: 1/4} -> grad = ((1-lambda) z + z^3, 0)
        let f = builtin::pitchfork();
        for &(lam, z) in &[(0.0, 0.3), (1.5, -0.7), (2.0, 1.1)] {
            let g = f
                .gradient(&[lam], &DVector::from_row_slice(&[z, 0.0]))
                .unwrap();
            assert!((g[0] - ((1.0 - lam) * z + z * z * z)).abs() < 1e-14);
            assert_eq!(g[1], 0.0);
        }
    }

    #[test]
    fn one_dimensional_quadratic_family() {
        let f = make_polynomial_family(
            "q",
            "",
            1,
            1,
            vec![PolyTerm::new(vec![0], vec![2], 0.5)],
        )
        .unwrap();
        let g = f.gradient(&[3.0], &DVector::from_row_slice(&[1.25])).unwrap();
        assert_eq!(g[0], 1.25);
    }

    #[test]
    fn linear_term_rejected() {
        let err = make_polynomial_family(
            "bad",
            "",
            1,
            1,
            vec![PolyTerm::new(vec![0], vec![1], 1.0)],
        )
        .unwrap_err();
        assert!(matches!(err, Error::InvalidSpec(_)));
    }

    #[test]
    fn bvp_family_assembles_discrete_laplacian_pencil() {
        // m = 3, W = s^2/2, G = v^2/2, h = 1/4:
        // B_lambda(0) = (1/h) tridiag(-1, 2, -1) - lambda h I.
        let w = DensitySpec::new(vec![(2, 0.5)]).unwrap();
        let g = DensitySpec::new(vec![(2, 0.5)]).unwrap();
        let f = make_bvp_family(3, w, g).unwrap();
        let h = 0.25;
        for &lam in &[0.0, 1.0, 7.5] {
            let b = f.hessian_at_zero(&[lam]).unwrap();
            let mut expect = DMatrix::zeros(3, 3);
            for i in 0..3 {
                expect[(i, i)] = 2.0 / h - lam * h;
                if i + 1 < 3 {
                    expect[(i, i + 1)] = -1.0 / h;
                    expect[(i + 1, i)] = -1.0 / h;
                }
            }
            assert!((b.matrix() - expect).norm() < 1e-12);
        }
    }

    #[test]
    fn bvp_gradient_vanishes_at_zero() {
        let w = DensitySpec::new(vec![(2, 0.5), (4, 0.25)]).unwrap();
        let g = DensitySpec::new(vec![(2, 0.5), (4, -0.1)]).unwrap();
        let f = make_bvp_family(5, w, g).unwrap();
        let grad = f.gradient(&[2.0], &DVector::zeros(5)).unwrap();
        assert_eq!(grad.norm(), 0.0);
    }

    #[test]
    fn bvp_generalized_eigenvalues_match_discrete_laplacian() {
        // Pencil base (1/h) tridiag(-1,2,-1) vs hat = h I has generalized
        // eigenvalues (1/h^2)(2 - 2 cos(k pi / 4)), k = 1..3.
        use crate::spectral::{eigendecompose, default_eps_null};
        let w = DensitySpec::new(vec![(2, 0.5)]).unwrap();
        let g = DensitySpec::new(vec![(2, 0.5)]).unwrap();
        let f = make_bvp_family(3, w, g).unwrap();
        let base = f.hessian_at_zero(&[0.0]).unwrap();
        // hat = h I, so the generalized eigenvalues are eig(base)/h.
        let h = 0.25;
        let sd = eigendecompose(&base, default_eps_null(&base)).unwrap();
        let mut expect: Vec<f64> = (1..=3)
            .map(|k| (2.0 - 2.0 * (k as f64 * std::f64::consts::PI / 4.0).cos()) / (h * h))
            .collect();
        expect.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (got, want) in sd.eigenvalues.iter().zip(&expect) {
            assert!((got / h - want).abs() < 1e-9 * (1.0 + want.abs()));
        }
    }

    #[test]
    fn finite_difference_consistency_on_builtins() {
        let u = DVector::from_row_slice(&[0.31, -0.17]);
        for f in builtin::all() {
            let rep = check_gradient_consistency(&f, &[0.7], &u, 1e-5).unwrap();
            assert!(rep.gradient_vs_value <= 1e-6, "{}: {}", f.name(), rep.gradient_vs_value);
            assert!(rep.hessian_vs_gradient <= 1e-6, "{}: {}", f.name(), rep.hessian_vs_gradient);
        }
    }

    #[test]
    fn finite_difference_consistency_quadratic_exact() {
        let f = make_polynomial_family(
            "iso",
            "",
            1,
            2,
            vec![
                PolyTerm::new(vec![0], vec![2, 0], 0.5),
                PolyTerm::new(vec![0], vec![0, 2], 0.5),
            ],
        )
        .unwrap();
        let rep = check_gradient_consistency(
            &f,
            &[0.0],
            &DVector::from_row_slice(&[0.4, -0.9]),
            1e-5,
        )
        .unwrap();
        assert!(rep.hessian_vs_gradient <= 1e-10);
    }

    #[test]
    fn finite_difference_consistency_bvp() {
        let w = DensitySpec::new(vec![(2, 0.5), (4, 0.2)]).unwrap();
        let g = DensitySpec::new(vec![(2, 0.5), (4, 0.1)]).unwrap();
        let f = make_bvp_family(8, w, g).unwrap();
        let u = DVector::from_fn(8, |i, _| 0.05 * (i as f64 + 1.0).sin());
        let rep = check_gradient_consistency(&f, &[1.3], &u, 1e-5).unwrap();
        assert!(rep.gradient_vs_value <= 1e-6);
        assert!(rep.hessian_vs_gradient <= 1e-6);
    }

    #[test]
    fn symmetric_operator_rejects_asymmetry() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.1, 1.0]);
        assert!(matches!(SymmetricOperator::new(m), Err(Error::Asymmetric { .. })));
    }
}
