//! Parameterized Lyapunov-Schmidt reduction: the complement equation for
//! psi(lambda, z), the reduced functional and its derivatives, and the
//! multiparameter quadratic form Q.

use crate::error::{Error, Result};
use crate::model::{PotentialFamily, SymmetricOperator};
use crate::spectral::{eigendecompose, PencilFamily};
use nalgebra::{DMatrix, DVector};
use std::sync::Mutex;

/// Damped-Newton settings for the complement solve.
#[derive(Debug, Clone)]
pub struct NewtonSettings {
    /// Residual tolerance; default 1e-11 * (1 + ||grad F(lambda, Zz)||).
    pub tol: Option<f64>,
    pub max_iter: usize,
    pub max_halvings: usize,
}

impl Default for NewtonSettings {
    fn default() -> Self {
        Self {
            tol: None,
            max_iter: 50,
            max_halvings: 30,
        }
    }
}

struct CacheEntry {
    lambda: Vec<f64>,
    z: DVector<f64>,
    w: DVector<f64>,
}

/// Splitting data at a degenerate parameter lambda*: orthonormal kernel
/// basis Z, complement basis W, and the Newton solver state for psi.
pub struct ReducedModel<'a> {
    family: &'a PotentialFamily,
    lambda_star: Vec<f64>,
    z_basis: DMatrix<f64>,
    w_basis: DMatrix<f64>,
    eps_null: f64,
    pub newton: NewtonSettings,
    rho_z: f64,
    cache: Mutex<Vec<CacheEntry>>,
}

impl std::fmt::Debug for ReducedModel<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ReducedModel")
            .field("family", &self.family.name())
            .field("lambda_star", &self.lambda_star)
            .field("kernel_dim", &self.kernel_dim())
            .field("rho_z", &self.rho_z)
            .finish()
    }
}

/// A converged solution of the complement equation.
#[derive(Debug, Clone)]
pub struct PsiSolution {
    pub z: DVector<f64>,
    pub lambda: Vec<f64>,
    /// Coordinates of psi(lambda, z) in the complement basis W.
    pub w: DVector<f64>,
    pub residual: f64,
    pub iterations: usize,
}

/// Builds the splitting at lambda* from the eigenvectors of B_{lambda*}(0)
/// with |eigenvalue| <= eps_null.
pub fn build_reduced_model<'a>(
    family: &'a PotentialFamily,
    lambda_star: &[f64],
    eps_null: f64,
) -> Result<ReducedModel<'a>> {
    let b = family.hessian_at_zero(lambda_star)?;
    let sd = eigendecompose(&b, eps_null)?;
    let z_basis = sd.kernel_basis();
    if z_basis.ncols() == 0 {
        return Err(Error::Nondegenerate);
    }
    let w_basis = sd.complement_basis();

    // Trust radius: the complement solve needs W^T B W invertible, so bound
    // |z| by half the smallest nonzero |eigenvalue| over a probed local
    // Lipschitz constant of that block, clamped to [1e-3, 10].
    let smallest_nonzero = sd
        .eigenvalues
        .iter()
        .map(|e| e.abs())
        .filter(|a| *a > eps_null)
        .fold(f64::INFINITY, f64::min);
    let smallest_nonzero = if smallest_nonzero.is_finite() {
        smallest_nonzero
    } else {
        1.0
    };
    // Probe along the kernel directions: that is where the reduced iterates
    // move (the complement correction stays second order).
    let probe = 1e-2;
    let mut lipschitz = 0.0f64;
    if w_basis.ncols() > 0 {
        for i in 0..z_basis.ncols() {
            for sign in [-1.0, 1.0] {
                let u = z_basis.column(i) * (sign * probe);
                let bh = family.hessian(lambda_star, &u)?;
                let delta = w_basis.transpose() * (bh.matrix() - b.matrix()) * &w_basis;
                lipschitz = lipschitz.max(delta.norm() / probe);
            }
        }
    }
    let rho_z = (0.5 * smallest_nonzero / lipschitz.max(1e-6)).clamp(1e-3, 10.0);

    Ok(ReducedModel {
        family,
        lambda_star: lambda_star.to_vec(),
        z_basis,
        w_basis,
        eps_null,
        newton: NewtonSettings::default(),
        rho_z,
        cache: Mutex::new(Vec::new()),
    })
}

impl<'a> ReducedModel<'a> {
    pub fn family(&self) -> &'a PotentialFamily {
        self.family
    }

    pub fn lambda_star(&self) -> &[f64] {
        &self.lambda_star
    }

    /// Orthonormal basis of Ker B_{lambda*}(0), n x d.
    pub fn kernel_basis(&self) -> &DMatrix<f64> {
        &self.z_basis
    }

    /// Orthonormal basis of the complement, n x (n - d).
    pub fn complement_basis(&self) -> &DMatrix<f64> {
        &self.w_basis
    }

    pub fn kernel_dim(&self) -> usize {
        self.z_basis.ncols()
    }

    pub fn eps_null(&self) -> f64 {
        self.eps_null
    }

    pub fn trust_radius(&self) -> f64 {
        self.rho_z
    }

    /// Lifts reduced coordinates to the full space: Zz + Ww.
    pub fn lift(&self, z: &DVector<f64>, w: &DVector<f64>) -> DVector<f64> {
        if self.w_basis.ncols() == 0 {
            &self.z_basis * z
        } else {
            &self.z_basis * z + &self.w_basis * w
        }
    }

    fn nearest_cached(&self, lambda: &[f64], z: &DVector<f64>) -> Option<DVector<f64>> {
        let cache = self.cache.lock().unwrap();
        let mut best: Option<(f64, &CacheEntry)> = None;
        for e in cache.iter() {
            let mut d2: f64 = e
                .lambda
                .iter()
                .zip(lambda)
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            d2 += (&e.z - z).norm_squared();
            if best.as_ref().map_or(true, |(bd, _)| d2 < *bd) {
                best = Some((d2, e));
            }
        }
        best.and_then(|(d2, e)| {
            if d2.sqrt() <= 0.5 * self.rho_z {
                Some(e.w.clone())
            } else {
                None
            }
        })
    }

    fn remember(&self, lambda: &[f64], z: &DVector<f64>, w: DVector<f64>) {
        let quantize = |x: f64| (x / 1e-12).round();
        let mut cache = self.cache.lock().unwrap();
        let dup = cache.iter().any(|e| {
            e.lambda
                .iter()
                .zip(lambda)
                .all(|(a, b)| quantize(*a) == quantize(*b))
                && e.z.iter().zip(z.iter()).all(|(a, b)| quantize(*a) == quantize(*b))
        });
        if !dup {
            cache.push(CacheEntry {
                lambda: lambda.to_vec(),
                z: z.clone(),
                w,
            });
        }
    }
}

/// Solves the complement equation W^T grad F(lambda, Zz + Ww) = 0 by damped
/// Newton from w = 0, warm-started from the nearest cached solve.
pub fn solve_psi(model: &ReducedModel, lambda: &[f64], z: &DVector<f64>) -> Result<PsiSolution> {
    if z.len() != model.kernel_dim() {
        return Err(Error::DimensionMismatch {
            expected: model.kernel_dim(),
            got: z.len(),
        });
    }
    if z.norm() > model.rho_z {
        return Err(Error::OutsideValidity(format!(
            "|z| = {:.3e} exceeds the trust radius {:.3e}",
            z.norm(),
            model.rho_z
        )));
    }
    let nc = model.complement_basis().ncols();
    // psi(lambda, 0) = 0 exactly; and a trivial complement needs no solve.
    if nc == 0 || z.norm() == 0.0 {
        let w = DVector::zeros(nc);
        let x = model.lift(z, &w);
        let g = model.family().gradient(lambda, &x)?;
        let residual = if nc == 0 {
            0.0
        } else {
            (model.complement_basis().transpose() * g).norm()
        };
        return Ok(PsiSolution {
            z: z.clone(),
            lambda: lambda.to_vec(),
            w,
            residual,
            iterations: 0,
        });
    }

    let wb = model.complement_basis();
    let base_grad = model.family().gradient(lambda, &(model.kernel_basis() * z))?;
    let tol = model
        .newton
        .tol
        .unwrap_or(1e-11 * (1.0 + base_grad.norm()));

    let mut w = model
        .nearest_cached(lambda, z)
        .unwrap_or_else(|| DVector::zeros(nc));
    let mut trace = Vec::new();
    let mut residual = f64::INFINITY;

    for iter in 0..model.newton.max_iter {
        let x = model.lift(z, &w);
        let g = wb.transpose() * model.family().gradient(lambda, &x)?;
        residual = g.norm();
        trace.push(residual);
        if residual <= tol {
            model.remember(lambda, z, w.clone());
            return Ok(PsiSolution {
                z: z.clone(),
                lambda: lambda.to_vec(),
                w,
                residual,
                iterations: iter,
            });
        }
        let b = model.family().hessian(lambda, &x)?;
        let jac = wb.transpose() * b.matrix() * wb;
        let lu = jac.lu();
        let Some(step) = lu.solve(&(-&g)) else {
            return Err(Error::OutsideValidity(
                "singular complement Jacobian".into(),
            ));
        };
        // Step halving until the residual decreases.
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..=model.newton.max_halvings {
            let cand = &w + &step * t;
            let xc = model.lift(z, &cand);
            let gc = wb.transpose() * model.family().gradient(lambda, &xc)?;
            if gc.norm() < residual {
                w = cand;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            return Err(Error::ReductionFailed {
                iterations: iter,
                residual,
                trace,
            });
        }
    }

    // Final residual check after the iteration budget.
    let x = model.lift(z, &w);
    let g = wb.transpose() * model.family().gradient(lambda, &x)?;
    if g.norm() <= tol {
        model.remember(lambda, z, w.clone());
        return Ok(PsiSolution {
            z: z.clone(),
            lambda: lambda.to_vec(),
            w,
            residual: g.norm(),
            iterations: model.newton.max_iter,
        });
    }
    Err(Error::ReductionFailed {
        iterations: model.newton.max_iter,
        residual,
        trace,
    })
}

/// Reduced functional value: F(lambda, z + psi(lambda, z)).
pub fn reduced_value(model: &ReducedModel, lambda: &[f64], z: &DVector<f64>) -> Result<f64> {
    let psi = solve_psi(model, lambda, z)?;
    model.family().value(lambda, &model.lift(z, &psi.w))
}

/// Reduced gradient: Z^T grad F(lambda, z + psi(lambda, z)).
pub fn reduced_gradient(
    model: &ReducedModel,
    lambda: &[f64],
    z: &DVector<f64>,
) -> Result<DVector<f64>> {
    let psi = solve_psi(model, lambda, z)?;
    let g = model.family().gradient(lambda, &model.lift(z, &psi.w))?;
    Ok(model.kernel_basis().transpose() * g)
}

fn schur_on_kernel(model: &ReducedModel, b: &SymmetricOperator) -> Result<DMatrix<f64>> {
    let zb = model.kernel_basis();
    let wb = model.complement_basis();
    let bzz = zb.transpose() * b.matrix() * zb;
    if wb.ncols() == 0 {
        return Ok(bzz);
    }
    let bww = wb.transpose() * b.matrix() * wb;
    let bwz = wb.transpose() * b.matrix() * zb;
    let lu = bww.lu();
    let Some(solved) = lu.solve(&bwz) else {
        return Err(Error::OutsideValidity(
            "singular complement block W^T B W".into(),
        ));
    };
    let schur = bzz - bwz.transpose() * solved;
    // Symmetrize roundoff.
    Ok((&schur + schur.transpose()) * 0.5)
}

/// Hessian of the reduced functional at a general z: the Schur complement of
/// B(lambda, z + psi) on the kernel block.
pub fn reduced_hessian(
    model: &ReducedModel,
    lambda: &[f64],
    z: &DVector<f64>,
) -> Result<SymmetricOperator> {
    let psi = solve_psi(model, lambda, z)?;
    let b = model.family().hessian(lambda, &model.lift(z, &psi.w))?;
    SymmetricOperator::new(schur_on_kernel(model, &b)?)
}

/// Hessian of the reduced functional at z = 0 (vanishes at lambda = lambda*).
pub fn reduced_hessian_at_zero(model: &ReducedModel, lambda: &[f64]) -> Result<SymmetricOperator> {
    let b = model.family().hessian_at_zero(lambda)?;
    SymmetricOperator::new(schur_on_kernel(model, &b)?)
}

/// d_z psi(lambda, 0) = -(W^T B W)^{-1} (W^T B Z) with B = B_lambda(0).
pub fn dpsi_at_zero(model: &ReducedModel, lambda: &[f64]) -> Result<DMatrix<f64>> {
    let zb = model.kernel_basis();
    let wb = model.complement_basis();
    if wb.ncols() == 0 {
        return Ok(DMatrix::zeros(0, zb.ncols()));
    }
    let b = model.family().hessian_at_zero(lambda)?;
    let bww = wb.transpose() * b.matrix() * wb;
    let bwz = wb.transpose() * b.matrix() * zb;
    let lu = bww.lu();
    let Some(solved) = lu.solve(&bwz) else {
        return Err(Error::OutsideValidity(
            "singular complement block W^T B W".into(),
        ));
    };
    Ok(-solved)
}

/// The multiparameter form on the kernel with its Morse index and coindex.
#[derive(Debug, Clone)]
pub struct ParameterForm {
    pub q: SymmetricOperator,
    pub index: usize,
    pub coindex: usize,
    /// Whether the commuting route (no dpsi correction) was used.
    pub commuting: bool,
}

/// The quadratic form Q_lambda(z1, z2) = sum_j (lambda_j - lambda*_j)
/// (Bhat_j z1, z2) on the kernel, with the dpsi correction when the pencil
/// does not commute with the Hessian at lambda*.
pub fn parameter_form_q(
    pencil: &PencilFamily,
    model: &ReducedModel,
    lambda: &[f64],
) -> Result<ParameterForm> {
    let p = pencil.dim_param();
    if lambda.len() != p || model.lambda_star().len() != p {
        return Err(Error::DimensionMismatch {
            expected: p,
            got: lambda.len(),
        });
    }
    let zb = model.kernel_basis();
    let n = pencil.dim();
    let mut d = DMatrix::zeros(n, n);
    for (j, hat) in pencil.hats().iter().enumerate() {
        d += hat.matrix() * (lambda[j] - model.lambda_star()[j]);
    }

    let b_star = pencil.at(model.lambda_star())?;
    let mut commuting = true;
    for hat in pencil.hats() {
        let c = b_star.matrix() * hat.matrix() - hat.matrix() * b_star.matrix();
        if c.norm() > 1e-10 * (1.0 + b_star.norm()) * (1.0 + hat.norm()) {
            commuting = false;
            break;
        }
    }

    let q_raw = if commuting || model.complement_basis().ncols() == 0 {
        zb.transpose() * &d * zb
    } else {
        // dpsi correction of the pencil Hessian at the probe lambda.
        let wb = model.complement_basis();
        let b_lam = pencil.at(lambda)?;
        let bww = wb.transpose() * b_lam.matrix() * wb;
        let bwz = wb.transpose() * b_lam.matrix() * zb;
        let lu = bww.lu();
        let Some(solved) = lu.solve(&bwz) else {
            return Err(Error::OutsideValidity(
                "singular complement block in the pencil".into(),
            ));
        };
        let corrected = zb - wb * solved; // columns z + dpsi z, as n x d
        zb.transpose() * &d * corrected
    };
    let q = SymmetricOperator::new((&q_raw + q_raw.transpose()) * 0.5)?;
    let md = crate::spectral::morse_data(&q, model.eps_null())?;
    Ok(ParameterForm {
        q,
        index: md.mu,
        coindex: md.pi,
        commuting,
    })
}
