//! End-to-end analysis: sweep the parameter range for degenerate Hessians,
//! evaluate the bifurcation criteria, classify each candidate by the
//! trichotomy via critical-point search on the reduced space, and count Z2
//! orbits for even families.

use crate::crossing::{check_theorem_3_5, CrossingSettings};
use crate::error::{Error, Result};
use crate::model::PotentialFamily;
use crate::reduction::{
    build_reduced_model, parameter_form_q, reduced_gradient, reduced_hessian, reduced_value,
    solve_psi, ReducedModel,
};
use crate::spectral::{default_eps_null, eigendecompose, PencilFamily};
use nalgebra::DVector;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// Radius for the isolation heuristic: a candidate is non-isolated at
/// lambda* when a second critical point sits within this distance of 0.
pub const RHO_ISO: f64 = 1e-5;

/// Residual acceptance threshold for reduced critical points.
pub const CRITICAL_TOL: f64 = 1e-9;

/// Deduplication radius for reduced critical points.
pub const DEDUP_TOL: f64 = 1e-7;

/// Tunables for the candidate pipeline.
#[derive(Debug, Clone)]
pub struct DetectorSettings {
    /// Null tolerance; scale-aware default when unset.
    pub eps_null: Option<f64>,
    /// Half-width of the classification neighborhood.
    pub delta: f64,
    /// Search radius on the reduced space (clamped to the trust radius).
    pub rho: f64,
    /// Multistart grid parameter: (2m+1)^d starts.
    pub grid_m: usize,
    /// Geometric samples per side for classification.
    pub side_samples: usize,
    /// Complement Newton residual tolerance override.
    pub tau_psi: Option<f64>,
    pub crossing: CrossingSettings,
}

impl Default for DetectorSettings {
    fn default() -> Self {
        Self {
            eps_null: None,
            delta: 0.25,
            rho: 1.0,
            grid_m: 5,
            side_samples: 8,
            tau_psi: None,
            crossing: CrossingSettings::default(),
        }
    }
}

/// Three-valued criterion verdict: unsupported checks are reported as
/// indeterminate, never silently false.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Flag {
    True,
    False,
    Indeterminate,
}

impl Flag {
    fn from_bool(b: bool) -> Self {
        if b {
            Flag::True
        } else {
            Flag::False
        }
    }
}

/// Aggregated criteria verdicts for one candidate.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CriteriaFlags {
    /// Path conditions hold and the crossing numbers differ.
    pub thm3_5: Flag,
    /// r+ != r-.
    pub cor3_7_id: Flag,
    /// Base invertible and lambda* a generalized eigenvalue.
    pub cor4_4_a: Flag,
    /// Pencil commutes and the base is definite on the kernel at lambda*.
    pub cor4_4_b: Flag,
    /// Base positive definite and lambda* a generalized eigenvalue.
    pub thm3_9_spd: Flag,
    /// Odd kernel, or commuting pencil with a probe Q of unequal index and
    /// coindex.
    pub thm4_9_b: Flag,
    /// Commuting pencil with a definite probe Q.
    pub thm4_9_bprime: Flag,
}

/// Morse index jump pattern across lambda*.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MorseJumpTag {
    /// mu = mu* on the left, mu* + nu* on the right.
    LeftLowRightHigh,
    /// mu = mu* + nu* on the left, mu* on the right.
    LeftHighRightLow,
    Other,
}

#[derive(Debug, Clone, Serialize)]
pub struct MorseJumpPattern {
    /// Constant Morse index on the left deleted half-neighborhood, when it
    /// is constant.
    pub mu_left: Option<usize>,
    pub mu_right: Option<usize>,
    pub mu_star: usize,
    pub nu_star: usize,
    pub tag: MorseJumpTag,
    pub diagnostic: Option<String>,
}

/// Rabinowitz-style alternative for a classified candidate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Alternative {
    /// More than one critical point within RHO_ISO of 0 at lambda* itself.
    NonIsolatedAtStar,
    /// Every sampled lambda on both sides carries a nontrivial solution.
    BothSides,
    /// One side carries at least two nontrivial solutions, the other none.
    OneSidedTwo,
    Unclassified,
}

/// Nontrivial reduced critical points at one sampled lambda.
#[derive(Debug, Clone, Serialize)]
pub struct BranchSample {
    pub lambda: f64,
    pub points: Vec<BranchPoint>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BranchPoint {
    /// Reduced coordinates in the kernel basis.
    pub z: Vec<f64>,
    /// Lifted point Zz + W psi in the full space.
    pub lifted: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Z2Counts {
    /// Nontrivial orbits on the right side of lambda*.
    pub n_plus: usize,
    /// Nontrivial orbits on the left side.
    pub n_minus: usize,
}

/// One analyzed candidate.
#[derive(Debug, Clone, Serialize)]
pub struct BifurcationFinding {
    pub lambda_star: Vec<f64>,
    pub nullity: usize,
    pub criteria: CriteriaFlags,
    pub morse_jump: MorseJumpPattern,
    pub alternative: Alternative,
    pub branches: Vec<BranchSample>,
    /// Max nontrivial |z| shrinks monotonically toward lambda*.
    pub branches_converge: bool,
    /// Orbit counts when the family is even.
    pub z2: Option<Z2Counts>,
}

fn kth_eigenvalue(family: &PotentialFamily, lambda: f64, k: usize) -> Result<f64> {
    let b = family.hessian_at_zero(&[lambda])?;
    let sd = eigendecompose(&b, default_eps_null(&b))?;
    Ok(sd.eigenvalues[k])
}

/// Scans [a, b] for parameters where B_lambda(0) is degenerate.
///
/// Each sorted-index eigenvalue trajectory is tracked across the grid; sign
/// changes are localized by bisection well below the (b - a) / 1e6 width
/// bound, and grid points already inside the null tolerance are kept as-is.
pub fn sweep_candidates(
    family: &PotentialFamily,
    a: f64,
    b: f64,
    steps: usize,
    eps_null: Option<f64>,
) -> Result<Vec<f64>> {
    if family.dim_param() != 1 {
        return Err(Error::InvalidSpec(
            "sweeps require a scalar parameter".into(),
        ));
    }
    if !(a < b) {
        return Err(Error::InvalidSpec("sweep range must satisfy a < b".into()));
    }
    if steps < 2 {
        return Err(Error::InvalidSpec("sweep needs at least 2 steps".into()));
    }
    let n = family.dim_state();
    let width = (b - a) / 1e6;

    let mut grid_eigs: Vec<Vec<f64>> = Vec::with_capacity(steps + 1);
    let mut grid_lams: Vec<f64> = Vec::with_capacity(steps + 1);
    let mut eps = eps_null;
    for i in 0..=steps {
        let lam = a + (b - a) * i as f64 / steps as f64;
        let bm = family.hessian_at_zero(&[lam])?;
        let e = eps.get_or_insert_with(|| default_eps_null(&bm));
        let sd = eigendecompose(&bm, *e)?;
        grid_lams.push(lam);
        grid_eigs.push(sd.eigenvalues);
    }
    let eps = eps.unwrap();

    let mut raw: Vec<f64> = Vec::new();
    for k in 0..n {
        for i in 0..steps {
            let (e0, e1) = (grid_eigs[i][k], grid_eigs[i + 1][k]);
            if e0.abs() <= eps {
                raw.push(grid_lams[i]);
                continue;
            }
            if e0 * e1 < 0.0 {
                // Bisect the k-th sorted eigenvalue to machine-level width.
                let (mut lo, mut hi) = (grid_lams[i], grid_lams[i + 1]);
                let mut flo = e0;
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if hi - lo <= 4.0 * f64::EPSILON * (1.0 + mid.abs()) {
                        break;
                    }
                    let fm = kth_eigenvalue(family, mid, k)?;
                    if flo * fm <= 0.0 {
                        hi = mid;
                    } else {
                        lo = mid;
                        flo = fm;
                    }
                }
                raw.push(0.5 * (lo + hi));
            }
        }
        if grid_eigs[steps][k].abs() <= eps {
            raw.push(grid_lams[steps]);
        }
    }

    raw.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let mut out: Vec<f64> = Vec::new();
    for lam in raw {
        if out.last().map_or(true, |&prev| lam - prev > width) {
            out.push(lam);
        }
    }
    Ok(out)
}

/// Samples the Morse index on both deleted half-neighborhoods of lambda*.
/// A non-Other tag requires the index to be constant on each side.
pub fn morse_jump(
    family: &PotentialFamily,
    lambda_star: f64,
    delta: f64,
    samples: usize,
) -> Result<MorseJumpPattern> {
    if delta <= 0.0 || samples == 0 {
        return Err(Error::InvalidSpec(
            "morse_jump needs delta > 0 and samples >= 1".into(),
        ));
    }
    let b_star = family.hessian_at_zero(&[lambda_star])?;
    let eps = default_eps_null(&b_star);
    let star = eigendecompose(&b_star, eps)?.morse_data();
    if star.nu == 0 {
        return Err(Error::NoCandidate);
    }

    let side = |sign: f64| -> Result<Option<usize>> {
        let mut mu: Option<usize> = None;
        for k in 1..=samples {
            let lam = lambda_star + sign * delta * k as f64 / samples as f64;
            let b = family.hessian_at_zero(&[lam])?;
            let md = eigendecompose(&b, eps)?.morse_data();
            match mu {
                None => mu = Some(md.mu),
                Some(m) if m != md.mu => return Ok(None),
                _ => {}
            }
        }
        Ok(mu)
    };

    let mu_left = side(-1.0)?;
    let mu_right = side(1.0)?;
    let (tag, diagnostic) = match (mu_left, mu_right) {
        (Some(l), Some(r)) => {
            if l == star.mu && r == star.mu + star.nu {
                (MorseJumpTag::LeftLowRightHigh, None)
            } else if l == star.mu + star.nu && r == star.mu {
                (MorseJumpTag::LeftHighRightLow, None)
            } else {
                (
                    MorseJumpTag::Other,
                    Some(format!(
                        "indexes ({l}, {r}) do not match either jump pattern for (mu*, nu*) = ({}, {})",
                        star.mu, star.nu
                    )),
                )
            }
        }
        _ => (
            MorseJumpTag::Other,
            Some("Morse index is not constant on a side".into()),
        ),
    };
    Ok(MorseJumpPattern {
        mu_left,
        mu_right,
        mu_star: star.mu,
        nu_star: star.nu,
        tag,
        diagnostic,
    })
}

/// Extracts the linear pencil of B_lambda(0) when the Hessian along the
/// trivial branch is affine in lambda; returns None otherwise.
pub fn pencil_from_family(family: &PotentialFamily) -> Result<Option<PencilFamily>> {
    let p = family.dim_param();
    let zero = vec![0.0; p];
    let base = family.hessian_at_zero(&zero)?;
    let mut hats = Vec::with_capacity(p);
    for j in 0..p {
        let mut e = zero.clone();
        e[j] = 1.0;
        let bj = family.hessian_at_zero(&e)?;
        hats.push(crate::model::SymmetricOperator::new(
            base.matrix() - bj.matrix(),
        )?);
    }
    let pencil = PencilFamily::new(base.clone(), hats)?;

    // Affineness probes at off-grid parameter values.
    let mut probes: Vec<Vec<f64>> = vec![vec![0.37; p]];
    for j in 0..p {
        let mut v = vec![0.0; p];
        v[j] = -1.21;
        probes.push(v);
    }
    for lam in &probes {
        let direct = family.hessian_at_zero(lam)?;
        let linear = pencil.at(lam)?;
        let tol = 1e-9 * (1.0 + direct.norm());
        if (direct.matrix() - linear.matrix()).norm() > tol {
            return Ok(None);
        }
    }
    Ok(Some(pencil))
}

/// Evaluates the spectral and variational bifurcation criteria at lambda*,
/// delegating to the crossing, spectral and reduction modules.
pub fn evaluate_criteria(
    family: &PotentialFamily,
    pencil: Option<&PencilFamily>,
    lambda_star: &[f64],
    settings: &DetectorSettings,
) -> Result<CriteriaFlags> {
    let p = family.dim_param();
    let mut flags = CriteriaFlags {
        thm3_5: Flag::Indeterminate,
        cor3_7_id: Flag::Indeterminate,
        cor4_4_a: Flag::Indeterminate,
        cor4_4_b: Flag::Indeterminate,
        thm3_9_spd: Flag::Indeterminate,
        thm4_9_b: Flag::Indeterminate,
        thm4_9_bprime: Flag::Indeterminate,
    };

    // Path criteria are single-parameter.
    if p == 1 {
        let star = lambda_star[0];
        let path = |lam: f64| family.hessian_at_zero(&[lam]).expect("family Hessian");
        let mut cs = settings.crossing.clone();
        for shrink in [1.0, 0.25, 1.0 / 16.0] {
            cs.delta = settings.crossing.delta * shrink;
            match check_theorem_3_5(path, star, &cs) {
                Ok(rep) => {
                    flags.thm3_5 = Flag::from_bool(rep.verdict);
                    flags.cor3_7_id = Flag::from_bool(rep.conditions.crossing_numbers_differ);
                    break;
                }
                Err(Error::InconclusiveCrossing(_)) => continue,
                Err(e) => return Err(e),
            }
        }
    }

    let Some(pencil) = pencil else {
        return Ok(flags);
    };
    let eps = settings
        .eps_null
        .unwrap_or_else(|| default_eps_null(pencil.base()));

    // Base invertibility and definiteness.
    let base_sd = eigendecompose(pencil.base(), eps)?;
    let base_scale = 1.0 + base_sd.eigenvalues.iter().fold(0.0f64, |a, &e| a.max(e.abs()));
    let base_invertible = base_sd
        .eigenvalues
        .iter()
        .all(|e| e.abs() > eps * base_scale);
    let base_spd = base_sd.eigenvalues.iter().all(|&e| e > eps * base_scale);

    // Kernel of the pencil at lambda*.
    let b_star = pencil.at(lambda_star)?;
    let star_sd = eigendecompose(&b_star, eps)?;
    let kernel = star_sd.kernel_basis();
    let d = kernel.ncols();
    let is_eigenvalue = d >= 1;

    flags.cor4_4_a = Flag::from_bool(base_invertible && is_eigenvalue);
    flags.thm3_9_spd = Flag::from_bool(base_spd && is_eigenvalue);

    let commuting = pencil.hats().iter().all(|hat| {
        let c = b_star.matrix() * hat.matrix() - hat.matrix() * b_star.matrix();
        c.norm() <= 1e-10 * (1.0 + b_star.norm()) * (1.0 + hat.norm())
    });

    if d >= 1 {
        // Definiteness of the base restricted to the kernel at lambda*.
        let restricted = crate::model::SymmetricOperator::new(
            kernel.transpose() * pencil.base().matrix() * &kernel,
        )?;
        let rsd = eigendecompose(&restricted, eps)?;
        let definite = rsd.eigenvalues.iter().all(|&e| e > eps * base_scale)
            || rsd.eigenvalues.iter().all(|&e| e < -eps * base_scale);
        flags.cor4_4_b = Flag::from_bool(commuting && definite);
    }

    // Probe the parameter form Q along coordinate and diagonal directions.
    if d >= 1 {
        if d % 2 == 1 && !commuting {
            flags.thm4_9_b = Flag::True;
        }
        if commuting {
            match build_reduced_model(family, lambda_star, eps) {
                Ok(model) => {
                    let mut probes: Vec<Vec<f64>> = Vec::new();
                    for j in 0..p {
                        for sign in [1.0, -1.0] {
                            let mut v = lambda_star.to_vec();
                            v[j] += sign;
                            probes.push(v);
                        }
                    }
                    probes.push(lambda_star.iter().map(|x| x + 1.0).collect());
                    probes.push(lambda_star.iter().map(|x| x - 1.0).collect());

                    let mut unequal = d % 2 == 1;
                    let mut definite = false;
                    for probe in &probes {
                        let pf = parameter_form_q(pencil, &model, probe)?;
                        if pf.index != pf.coindex {
                            unequal = true;
                        }
                        let dk = model.kernel_dim();
                        if (pf.index == 0 && pf.coindex == dk)
                            || (pf.index == dk && pf.coindex == 0)
                        {
                            definite = true;
                        }
                    }
                    // The conditions are existential over probe directions, so
                    // only positive outcomes are conclusive.
                    if unequal {
                        flags.thm4_9_b = Flag::True;
                    }
                    if definite {
                        flags.thm4_9_bprime = Flag::True;
                    }
                }
                Err(Error::Nondegenerate) => {}
                Err(e) => return Err(e),
            }
        }
    }

    Ok(flags)
}

/// Multistart Newton search for critical points of the reduced functional in
/// the ball of radius rho, from a (2m+1)^d grid. Always includes z = 0.
pub fn find_reduced_critical_points(
    model: &ReducedModel,
    lambda: &[f64],
    rho: f64,
    m: usize,
) -> Result<Vec<DVector<f64>>> {
    let d = model.kernel_dim();
    if d > 3 {
        return Err(Error::UnsupportedDimension(d));
    }
    let rho = rho.min(model.trust_radius());
    if rho <= 0.0 {
        return Err(Error::InvalidSpec("search radius must be positive".into()));
    }

    let per_axis = 2 * m + 1;
    let total = per_axis.pow(d as u32);
    let mut found: Vec<DVector<f64>> = vec![DVector::zeros(d)];

    'starts: for flat in 0..total {
        let mut z = DVector::zeros(d);
        let mut rem = flat;
        for i in 0..d {
            let idx = rem % per_axis;
            rem /= per_axis;
            z[i] = rho * (idx as f64 - m as f64) / m as f64;
        }
        if z.norm() > rho {
            continue;
        }

        // Newton with step halving; iterate to step-size convergence so
        // plateau gradients collapse to the true critical point.
        for _ in 0..150 {
            let g = match reduced_gradient(model, lambda, &z) {
                Ok(g) => g,
                Err(Error::OutsideValidity(_)) => continue 'starts,
                Err(e) => return Err(e),
            };
            let h = match reduced_hessian(model, lambda, &z) {
                Ok(h) => h,
                Err(Error::OutsideValidity(_)) => continue 'starts,
                Err(e) => return Err(e),
            };
            let step = match h.matrix().clone().lu().solve(&(-&g)) {
                Some(s) => s,
                None => {
                    // Singular reduced Hessian: fall back to a least-squares
                    // Newton step. A genuinely flat reduced functional yields
                    // a negligible step and the point is accepted in place;
                    // a degenerate but isolated point still gets pulled in.
                    let svd = h.matrix().clone().svd(true, true);
                    match svd.solve(&(-&g), f64::EPSILON * (1.0 + h.matrix().norm())) {
                        Ok(s) => s,
                        Err(_) => break,
                    }
                }
            };
            let gn = g.norm();
            let mut t = 1.0;
            let mut advanced = false;
            for _ in 0..25 {
                let cand = &z + &step * t;
                if cand.norm() > 2.0 * rho {
                    t *= 0.5;
                    continue;
                }
                match reduced_gradient(model, lambda, &cand) {
                    Ok(gc) if gc.norm() <= gn => {
                        z = cand;
                        advanced = true;
                        break;
                    }
                    Ok(_) | Err(Error::OutsideValidity(_)) => t *= 0.5,
                    Err(e) => return Err(e),
                }
            }
            if !advanced {
                break;
            }
            if (step.norm() * t) <= 1e-13 * (1.0 + z.norm()) {
                break;
            }
        }

        if z.norm() > rho + 1e-9 {
            continue;
        }
        let g = match reduced_gradient(model, lambda, &z) {
            Ok(g) => g,
            Err(Error::OutsideValidity(_)) => continue,
            Err(e) => return Err(e),
        };
        if g.norm() > CRITICAL_TOL {
            continue;
        }
        if found.iter().all(|p| (p - &z).norm() > DEDUP_TOL) {
            found.push(z);
        }
    }

    // Deterministic ordering by coordinates.
    found.sort_by(|x, y| {
        x.iter()
            .zip(y.iter())
            .find_map(|(a, b)| a.partial_cmp(b).filter(|o| o.is_ne()))
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    Ok(found)
}

/// Classification outcome with branch data.
#[derive(Debug, Clone)]
pub struct Classification {
    pub alternative: Alternative,
    pub branches: Vec<BranchSample>,
    /// Max nontrivial |z| shrinks monotonically as lambda approaches
    /// lambda* through the sampled sequence.
    pub branches_converge: bool,
}

/// Classifies a scalar-parameter candidate by the trichotomy, sampling both
/// deleted half-neighborhoods geometrically.
pub fn classify_rabinowitz(
    model: &ReducedModel,
    lambda_star: f64,
    delta: f64,
    rho: f64,
    m: usize,
) -> Result<Classification> {
    // Alternative (i): a second critical point within RHO_ISO at lambda*.
    let at_star = find_reduced_critical_points(model, &[lambda_star], RHO_ISO, m)?;
    let near_zero = at_star.iter().filter(|z| z.norm() <= RHO_ISO).count();
    if near_zero >= 2 {
        return Ok(Classification {
            alternative: Alternative::NonIsolatedAtStar,
            branches: Vec::new(),
            branches_converge: true,
        });
    }

    let samples = 8usize;
    let mut branches: Vec<BranchSample> = Vec::new();
    let mut counts = [[0usize; 8], [0usize; 8]];
    for (side, sign) in [(0usize, -1.0f64), (1, 1.0)] {
        for k in 1..=samples {
            let lam = lambda_star + sign * delta * 0.5f64.powi(k as i32);
            let pts = find_reduced_critical_points(model, &[lam], rho, m)?;
            let nontrivial: Vec<&DVector<f64>> =
                pts.iter().filter(|z| z.norm() > DEDUP_TOL).collect();
            counts[side][k - 1] = nontrivial.len();
            if !nontrivial.is_empty() {
                let mut sample_pts = Vec::new();
                for z in nontrivial {
                    let sol = solve_psi(model, &[lam], z)?;
                    let lifted = model.lift(z, &sol.w);
                    sample_pts.push(BranchPoint {
                        z: z.iter().copied().collect(),
                        lifted: lifted.iter().copied().collect(),
                    });
                }
                branches.push(BranchSample {
                    lambda: lam,
                    points: sample_pts,
                });
            }
        }
    }

    let left = &counts[0];
    let right = &counts[1];
    let all_ge = |c: &[usize; 8], k: usize| c.iter().all(|&x| x >= k);
    let all_zero = |c: &[usize; 8]| c.iter().all(|&x| x == 0);

    let alternative = if (all_ge(right, 2) && all_zero(left)) || (all_ge(left, 2) && all_zero(right))
    {
        Alternative::OneSidedTwo
    } else if all_ge(left, 1) && all_ge(right, 1) {
        Alternative::BothSides
    } else {
        Alternative::Unclassified
    };

    // Convergence check: per side, max |z| must shrink as lambda -> lambda*.
    let mut converge = true;
    for sign in [-1.0f64, 1.0] {
        let mut maxima: Vec<f64> = Vec::new();
        for k in 1..=samples {
            let lam = lambda_star + sign * delta * 0.5f64.powi(k as i32);
            if let Some(s) = branches.iter().find(|b| (b.lambda - lam).abs() < 1e-15) {
                let mx = s
                    .points
                    .iter()
                    .map(|p| p.z.iter().map(|x| x * x).sum::<f64>().sqrt())
                    .fold(0.0f64, f64::max);
                maxima.push(mx);
            }
        }
        // Samples are ordered outermost first, so the sequence must decrease.
        if !maxima.windows(2).all(|w| w[1] <= w[0] + 1e-12) {
            converge = false;
        }
    }

    branches.sort_by(|x, y| x.lambda.partial_cmp(&y.lambda).unwrap());
    Ok(Classification {
        alternative,
        branches,
        branches_converge: converge,
    })
}

/// Checks F(lambda, u) = F(lambda, -u) at 50 seeded sample points.
pub fn check_even(family: &PotentialFamily, lambda: &[f64]) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_2bab);
    let n = family.dim_state();
    for _ in 0..50 {
        let u = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
        let fp = family.value(lambda, &u)?;
        let fm = family.value(lambda, &(-&u))?;
        let dev = (fp - fm).abs();
        if dev > 1e-10 * (1.0 + fp.abs()) {
            return Err(Error::NotEquivariant(dev));
        }
    }
    Ok(())
}

/// Counts nontrivial Z2 orbits {z, -z} in a critical set of an even family.
pub fn count_z2_orbits(
    family: &PotentialFamily,
    lambda: &[f64],
    points: &[DVector<f64>],
) -> Result<usize> {
    check_even(family, lambda)?;
    let mut remaining: Vec<&DVector<f64>> =
        points.iter().filter(|z| z.norm() > DEDUP_TOL).collect();
    let mut orbits = 0;
    while let Some(z) = remaining.pop() {
        orbits += 1;
        let neg = -z;
        remaining.retain(|w| (*w - &neg).norm() > DEDUP_TOL);
    }
    Ok(orbits)
}

/// Local extremum verdict from dense grid sampling of the reduced value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Extremum {
    StrictMin,
    StrictMax,
    Neither,
}

/// Certifies 0 as a strict local extremum of the reduced functional by
/// sampling a dense grid (41 points per axis) on the ball of the given
/// radius.
pub fn certify_extremum(model: &ReducedModel, lambda: &[f64], radius: f64) -> Result<Extremum> {
    let d = model.kernel_dim();
    if d > 3 {
        return Err(Error::UnsupportedDimension(d));
    }
    let per_axis = 41usize;
    let half = (per_axis / 2) as f64;
    let v0 = reduced_value(model, lambda, &DVector::zeros(d))?;
    let mut all_above = true;
    let mut all_below = true;
    let total = per_axis.pow(d as u32);
    for flat in 0..total {
        let mut z = DVector::zeros(d);
        let mut rem = flat;
        for i in 0..d {
            let idx = rem % per_axis;
            rem /= per_axis;
            z[i] = radius * (idx as f64 - half) / half;
        }
        if z.norm() <= 1e-12 || z.norm() > radius {
            continue;
        }
        let v = reduced_value(model, lambda, &z)?;
        if v <= v0 {
            all_above = false;
        }
        if v >= v0 {
            all_below = false;
        }
    }
    Ok(match (all_above, all_below) {
        (true, _) => Extremum::StrictMin,
        (_, true) => Extremum::StrictMax,
        _ => Extremum::Neither,
    })
}

/// Full per-candidate pipeline for a scalar-parameter family.
pub fn analyze_candidate(
    family: &PotentialFamily,
    pencil: Option<&PencilFamily>,
    lambda_star: f64,
    settings: &DetectorSettings,
    warnings: &mut Vec<String>,
) -> Result<BifurcationFinding> {
    let b_star = family.hessian_at_zero(&[lambda_star])?;
    let eps = settings.eps_null.unwrap_or_else(|| default_eps_null(&b_star));
    let nullity = eigendecompose(&b_star, eps)?.morse_data().nu;
    if nullity == 0 {
        return Err(Error::InvariantViolation(format!(
            "candidate {lambda_star} has a nondegenerate Hessian"
        )));
    }

    let jump = morse_jump(family, lambda_star, settings.delta, 6)?;
    let criteria = evaluate_criteria(family, pencil, &[lambda_star], settings)?;

    let mut model = build_reduced_model(family, &[lambda_star], eps)?;
    model.newton.tol = settings.tau_psi;
    let d = model.kernel_dim();
    let rho = settings.rho.min(model.trust_radius());

    let (alternative, branches, converge) = if d <= 3 {
        let c = classify_rabinowitz(&model, lambda_star, settings.delta, rho, settings.grid_m)?;
        (c.alternative, c.branches, c.branches_converge)
    } else {
        warnings.push(format!(
            "candidate {lambda_star}: kernel dimension {d} exceeds the classification limit"
        ));
        (Alternative::Unclassified, Vec::new(), true)
    };

    if alternative == Alternative::Unclassified {
        warnings.push(format!("candidate {lambda_star}: unclassified"));
    }
    for (name, f) in [
        ("thm3_5", criteria.thm3_5),
        ("cor3_7_id", criteria.cor3_7_id),
        ("cor4_4_a", criteria.cor4_4_a),
        ("cor4_4_b", criteria.cor4_4_b),
        ("thm3_9_spd", criteria.thm3_9_spd),
        ("thm4_9_b", criteria.thm4_9_b),
        ("thm4_9_bprime", criteria.thm4_9_bprime),
    ] {
        if f == Flag::Indeterminate {
            warnings.push(format!("candidate {lambda_star}: {name} indeterminate"));
        }
    }

    // Orbit counts for even families, from the classified branch samples:
    // per side, the largest orbit count over the sampled lambda values.
    let z2 = if d <= 3 && check_even(family, &[lambda_star]).is_ok() {
        let mut counts = [0usize; 2];
        for sample in &branches {
            let side = usize::from(sample.lambda > lambda_star);
            let pts: Vec<DVector<f64>> = sample
                .points
                .iter()
                .map(|p| DVector::from_row_slice(&p.z))
                .collect();
            let orbits = count_z2_orbits(family, &[sample.lambda], &pts)?;
            counts[side] = counts[side].max(orbits);
        }
        let z2 = Z2Counts {
            n_plus: counts[1],
            n_minus: counts[0],
        };
        // Desk-scale orbit bound. The non-isolated case carries its solution
        // family at lambda* itself, and an unclassified candidate means the
        // branch search was incomplete; a clean classification that still
        // violates the bound is an internal inconsistency.
        if z2.n_plus + z2.n_minus < d {
            match alternative {
                Alternative::BothSides | Alternative::OneSidedTwo => {
                    return Err(Error::InvariantViolation(format!(
                        "even family violates the orbit bound at {lambda_star}: {} + {} < {d}",
                        z2.n_plus, z2.n_minus
                    )));
                }
                Alternative::Unclassified => {
                    warnings.push(format!(
                        "candidate {lambda_star}: orbit bound {} + {} < {d} not confirmed",
                        z2.n_plus, z2.n_minus
                    ));
                }
                Alternative::NonIsolatedAtStar => {}
            }
        }
        Some(z2)
    } else {
        None
    };

    Ok(BifurcationFinding {
        lambda_star: vec![lambda_star],
        nullity,
        criteria,
        morse_jump: jump,
        alternative,
        branches,
        branches_converge: converge,
        z2,
    })
}

/// Sweeps the range, analyzes every candidate, and returns the findings with
/// accumulated warnings.
pub fn analyze(
    family: &PotentialFamily,
    a: f64,
    b: f64,
    steps: usize,
    settings: &DetectorSettings,
) -> Result<(Vec<BifurcationFinding>, Vec<String>)> {
    let candidates = sweep_candidates(family, a, b, steps, settings.eps_null)?;
    let pencil = pencil_from_family(family)?;
    let mut warnings = Vec::new();
    let mut findings = Vec::new();
    for (i, &star) in candidates.iter().enumerate() {
        let s = gap_adjusted(settings, &candidates, i);
        findings.push(analyze_candidate(family, pencil.as_ref(), star, &s, &mut warnings)?);
    }
    Ok((assemble_report(findings)?, warnings))
}

/// Shrinks the classification and crossing windows so they stay inside the
/// gap to the neighboring candidates.
pub fn gap_adjusted(
    settings: &DetectorSettings,
    candidates: &[f64],
    i: usize,
) -> DetectorSettings {
    let mut s = settings.clone();
    let star = candidates[i];
    let mut gap = f64::INFINITY;
    if i > 0 {
        gap = gap.min(star - candidates[i - 1]);
    }
    if i + 1 < candidates.len() {
        gap = gap.min(candidates[i + 1] - star);
    }
    if gap.is_finite() {
        s.delta = s.delta.min(0.45 * gap);
        s.crossing.delta = s.crossing.delta.min(0.45 * gap);
    }
    s
}

/// Validates aggregated findings before emission: the necessary degeneracy
/// condition must hold on every record.
pub fn assemble_report(findings: Vec<BifurcationFinding>) -> Result<Vec<BifurcationFinding>> {
    for f in &findings {
        if f.nullity == 0 {
            return Err(Error::InvariantViolation(format!(
                "finding at {:?} has zero nullity",
                f.lambda_star
            )));
        }
        if f.morse_jump.nu_star != f.nullity {
            return Err(Error::InvariantViolation(format!(
                "finding at {:?}: jump nullity {} disagrees with {}",
                f.lambda_star, f.morse_jump.nu_star, f.nullity
            )));
        }
    }
    Ok(findings)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{builtin, make_polynomial_family, PolyTerm};

    #[test]
    fn sweep_finds_both_pencil_eigenvalues() {
        let f = builtin::two_mode_quartic();
        let c = sweep_candidates(&f, 0.0, 3.0, 300, None).unwrap();
        assert_eq!(c.len(), 2);
        assert!((c[0] - 1.0).abs() < 3e-6);
        assert!((c[1] - 2.0).abs() < 3e-6);
    }

    #[test]
    fn sweep_empty_below_first_eigenvalue() {
        let f = builtin::two_mode_quartic();
        assert!(sweep_candidates(&f, 0.0, 0.5, 300, None).unwrap().is_empty());
    }

    #[test]
    fn sweep_pitchfork_single_candidate() {
        let f = builtin::pitchfork();
        let c = sweep_candidates(&f, 0.0, 2.0, 100, None).unwrap();
        assert_eq!(c.len(), 1);
        assert!((c[0] - 1.0).abs() < 2e-6);
    }

    #[test]
    fn sweep_merges_multiplicity_two_crossing() {
        let f = builtin::double_pitchfork();
        let c = sweep_candidates(&f, 0.0, 2.0, 100, None).unwrap();
        assert_eq!(c.len(), 1);
        assert!((c[0] - 1.0).abs() < 2e-6);
    }

    #[test]
    fn morse_jump_pitchfork() {
        let p = morse_jump(&builtin::pitchfork(), 1.0, 0.25, 6).unwrap();
        assert_eq!(p.mu_left, Some(0));
        assert_eq!(p.mu_right, Some(1));
        assert_eq!(p.nu_star, 1);
        assert_eq!(p.tag, MorseJumpTag::LeftLowRightHigh);
    }

    #[test]
    fn morse_jump_mirrored_family() {
        // F = (lambda-1)/2 u1^2 + 1/2 u2^2 flips the jump direction.
        let f = make_polynomial_family(
            "mirror",
            "",
            1,
            2,
            vec![
                PolyTerm::new(vec![0], vec![2, 0], -0.5),
                PolyTerm::new(vec![1], vec![2, 0], 0.5),
                PolyTerm::new(vec![0], vec![0, 2], 0.5),
            ],
        )
        .unwrap();
        let p = morse_jump(&f, 1.0, 0.25, 6).unwrap();
        assert_eq!(p.tag, MorseJumpTag::LeftHighRightLow);
    }

    #[test]
    fn morse_jump_constant_degenerate_is_other() {
        // Hessian diag(0, 1) for all lambda.
        let f = make_polynomial_family(
            "flat",
            "",
            1,
            2,
            vec![
                PolyTerm::new(vec![0], vec![0, 2], 0.5),
                PolyTerm::new(vec![0], vec![4, 0], 0.25),
            ],
        )
        .unwrap();
        let p = morse_jump(&f, 1.0, 0.25, 6).unwrap();
        assert_eq!(p.tag, MorseJumpTag::Other);
        assert!(p.diagnostic.is_some());
    }

    #[test]
    fn pencil_extraction_affine_and_not() {
        let p = pencil_from_family(&builtin::two_mode_quartic())
            .unwrap()
            .unwrap();
        assert_eq!(p.dim_param(), 1);
        assert!((p.base().matrix()[(0, 0)] - 1.0).abs() < 1e-12);
        assert!((p.base().matrix()[(1, 1)] - 2.0).abs() < 1e-12);
        assert!((p.hats()[0].matrix() - nalgebra::DMatrix::identity(2, 2)).norm() < 1e-12);

        // Quadratic dependence on lambda defeats the affine probe.
        let f = make_polynomial_family(
            "quad-lam",
            "",
            1,
            1,
            vec![
                PolyTerm::new(vec![0], vec![2], 0.5),
                PolyTerm::new(vec![2], vec![2], -0.5),
            ],
        )
        .unwrap();
        assert!(pencil_from_family(&f).unwrap().is_none());
    }

    #[test]
    fn criteria_on_spd_pencil() {
        let f = builtin::two_mode_quartic();
        let pencil = pencil_from_family(&f).unwrap().unwrap();
        let flags =
            evaluate_criteria(&f, Some(&pencil), &[1.0], &DetectorSettings::default()).unwrap();
        assert_eq!(flags.thm3_9_spd, Flag::True);
        assert_eq!(flags.cor4_4_a, Flag::True);
        assert_eq!(flags.cor4_4_b, Flag::True);
        assert_eq!(flags.thm3_5, Flag::True);
        assert_eq!(flags.cor3_7_id, Flag::True);
        assert_eq!(flags.thm4_9_b, Flag::True);
        assert_eq!(flags.thm4_9_bprime, Flag::True);
    }

    #[test]
    fn criteria_cancelled_crossing() {
        // Hessian diag(1-lambda, lambda-1, 1): r+ = r- = 1 at lambda* = 1.
        let f = make_polynomial_family(
            "cancel",
            "",
            1,
            3,
            vec![
                PolyTerm::new(vec![0], vec![2, 0, 0], 0.5),
                PolyTerm::new(vec![1], vec![2, 0, 0], -0.5),
                PolyTerm::new(vec![0], vec![0, 2, 0], -0.5),
                PolyTerm::new(vec![1], vec![0, 2, 0], 0.5),
                PolyTerm::new(vec![0], vec![0, 0, 2], 0.5),
            ],
        )
        .unwrap();
        let pencil = pencil_from_family(&f).unwrap().unwrap();
        let flags =
            evaluate_criteria(&f, Some(&pencil), &[1.0], &DetectorSettings::default()).unwrap();
        assert_eq!(flags.cor3_7_id, Flag::False);
        assert_eq!(flags.thm3_5, Flag::False);
        assert_eq!(flags.cor4_4_b, Flag::False);
        assert_eq!(flags.thm3_9_spd, Flag::False);
    }

    #[test]
    fn criteria_without_pencil_indeterminate() {
        let f = builtin::pitchfork();
        let flags = evaluate_criteria(&f, None, &[1.0], &DetectorSettings::default()).unwrap();
        assert_eq!(flags.cor4_4_a, Flag::Indeterminate);
        assert_eq!(flags.thm3_9_spd, Flag::Indeterminate);
        assert_eq!(flags.thm3_5, Flag::True);
    }

    #[test]
    fn criteria_two_parameter_q_form() {
        let fam = make_polynomial_family(
            "two-param",
            "",
            2,
            2,
            vec![
                PolyTerm::new(vec![0, 0], vec![2, 0], 0.5),
                PolyTerm::new(vec![1, 0], vec![2, 0], -0.5),
                PolyTerm::new(vec![0, 0], vec![0, 2], 0.5),
                PolyTerm::new(vec![0, 1], vec![0, 2], -0.5),
            ],
        )
        .unwrap();
        let pencil = pencil_from_family(&fam).unwrap().unwrap();
        let flags =
            evaluate_criteria(&fam, Some(&pencil), &[1.0, 1.0], &DetectorSettings::default())
                .unwrap();
        assert_eq!(flags.thm4_9_bprime, Flag::True);
        assert_eq!(flags.thm4_9_b, Flag::True);
        // Path criteria do not apply to p = 2.
        assert_eq!(flags.thm3_5, Flag::Indeterminate);
    }

    #[test]
    fn critical_points_pitchfork() {
        let f = builtin::pitchfork();
        let m = build_reduced_model(&f, &[1.0], 1e-9).unwrap();
        let pts = find_reduced_critical_points(&m, &[1.25], 1.0, 5).unwrap();
        assert_eq!(pts.len(), 3);
        assert!((pts[0][0] + 0.5).abs() < 1e-9);
        assert!(pts[1][0].abs() < 1e-9);
        assert!((pts[2][0] - 0.5).abs() < 1e-9);

        let pts = find_reduced_critical_points(&m, &[0.75], 1.0, 5).unwrap();
        assert_eq!(pts.len(), 1);
        assert!(pts[0][0].abs() < 1e-12);
    }

    #[test]
    fn critical_points_transcritical() {
        let f = builtin::transcritical();
        let m = build_reduced_model(&f, &[1.0], 1e-9).unwrap();
        let pts = find_reduced_critical_points(&m, &[1.2], 1.0, 5).unwrap();
        assert_eq!(pts.len(), 2);
        assert!(pts[0][0].abs() < 1e-12);
        assert!((pts[1][0] - 0.2).abs() < 1e-9);
    }

    #[test]
    fn critical_points_dimension_cap() {
        // Kernel dimension 4 at lambda = 1.
        let terms: Vec<PolyTerm> = (0..4)
            .flat_map(|i| {
                let mut q = vec![0u32; 4];
                q[i] = 2;
                let mut quartic = vec![0u32; 4];
                quartic[i] = 4;
                vec![
                    PolyTerm::new(vec![0], q.clone(), 0.5),
                    PolyTerm::new(vec![1], q, -0.5),
                    PolyTerm::new(vec![0], quartic, 0.25),
                ]
            })
            .collect();
        let f = make_polynomial_family("four", "", 1, 4, terms).unwrap();
        let m = build_reduced_model(&f, &[1.0], 1e-9).unwrap();
        assert!(matches!(
            find_reduced_critical_points(&m, &[1.1], 1.0, 2),
            Err(Error::UnsupportedDimension(4))
        ));
    }

    #[test]
    fn classify_pitchfork_one_sided() {
        let f = builtin::pitchfork();
        let m = build_reduced_model(&f, &[1.0], 1e-9).unwrap();
        let c = classify_rabinowitz(&m, 1.0, 0.25, 1.0, 5).unwrap();
        assert_eq!(c.alternative, Alternative::OneSidedTwo);
        assert!(c.branches_converge);
        for s in &c.branches {
            assert!(s.lambda > 1.0);
            let want = (s.lambda - 1.0).sqrt();
            for p in &s.points {
                let rel = (p.z[0].abs() - want).abs() / want;
                assert!(rel <= 1e-6, "z {} vs {}", p.z[0], want);
            }
        }
    }

    #[test]
    fn classify_transcritical_both_sides() {
        let f = builtin::transcritical();
        let m = build_reduced_model(&f, &[1.0], 1e-9).unwrap();
        let c = classify_rabinowitz(&m, 1.0, 0.25, 1.0, 5).unwrap();
        assert_eq!(c.alternative, Alternative::BothSides);
        for s in &c.branches {
            let want = s.lambda - 1.0;
            assert_eq!(s.points.len(), 1);
            assert!((s.points[0].z[0] - want).abs() <= 1e-8);
        }
    }

    #[test]
    fn classify_pure_quadratic_non_isolated() {
        let f = builtin::pure_quadratic();
        let m = build_reduced_model(&f, &[1.0], 1e-9).unwrap();
        let c = classify_rabinowitz(&m, 1.0, 0.25, 1.0, 5).unwrap();
        assert_eq!(c.alternative, Alternative::NonIsolatedAtStar);
    }

    #[test]
    fn z2_orbit_counting() {
        let f = builtin::pitchfork();
        let set = vec![
            DVector::from_row_slice(&[0.0]),
            DVector::from_row_slice(&[0.5]),
            DVector::from_row_slice(&[-0.5]),
        ];
        assert_eq!(count_z2_orbits(&f, &[1.25], &set).unwrap(), 1);
        assert_eq!(
            count_z2_orbits(&f, &[1.25], &[DVector::from_row_slice(&[0.0])]).unwrap(),
            0
        );
        assert!(matches!(
            count_z2_orbits(&builtin::transcritical(), &[1.25], &set),
            Err(Error::NotEquivariant(_))
        ));
    }

    #[test]
    fn extremum_certificates_across_the_candidate() {
        let f = builtin::pitchfork();
        let m = build_reduced_model(&f, &[1.0], 1e-9).unwrap();
        for lam in [0.9, 0.95] {
            assert_eq!(certify_extremum(&m, &[lam], 0.05).unwrap(), Extremum::StrictMin);
        }
        for lam in [1.05, 1.1] {
            assert_eq!(certify_extremum(&m, &[lam], 0.05).unwrap(), Extremum::StrictMax);
        }
    }

    #[test]
    fn analyze_pitchfork_end_to_end() {
        let f = builtin::pitchfork();
        let (findings, _warnings) =
            analyze(&f, 0.0, 2.0, 100, &DetectorSettings::default()).unwrap();
        assert_eq!(findings.len(), 1);
        let fd = &findings[0];
        assert!((fd.lambda_star[0] - 1.0).abs() < 2e-6);
        assert_eq!(fd.nullity, 1);
        assert_eq!(fd.alternative, Alternative::OneSidedTwo);
        assert_eq!(fd.morse_jump.tag, MorseJumpTag::LeftLowRightHigh);
        assert_eq!(fd.criteria.thm3_9_spd, Flag::True);
        let z2 = fd.z2.as_ref().unwrap();
        assert_eq!((z2.n_plus, z2.n_minus), (1, 0));
        assert!(fd.branches_converge);
    }

    #[test]
    fn analyze_two_mode_quartic_two_findings() {
        let f = builtin::two_mode_quartic();
        let (findings, _) = analyze(&f, 0.0, 3.0, 300, &DetectorSettings::default()).unwrap();
        assert_eq!(findings.len(), 2);
        assert!((findings[0].lambda_star[0] - 1.0).abs() < 3e-6);
        assert!((findings[1].lambda_star[0] - 2.0).abs() < 3e-6);
        for fd in &findings {
            assert_eq!(fd.criteria.thm3_9_spd, Flag::True);
            assert_eq!(fd.nullity, 1);
        }
    }

    #[test]
    fn analyze_double_pitchfork_orbit_bound() {
        let f = builtin::double_pitchfork();
        let (findings, _) = analyze(&f, 0.0, 2.0, 100, &DetectorSettings::default()).unwrap();
        assert_eq!(findings.len(), 1);
        let z2 = findings[0].z2.as_ref().unwrap();
        assert!(z2.n_plus + z2.n_minus >= 2, "{z2:?}");
    }

    #[test]
    fn assemble_rejects_zero_nullity() {
        let finding = BifurcationFinding {
            lambda_star: vec![1.0],
            nullity: 0,
            criteria: CriteriaFlags {
                thm3_5: Flag::False,
                cor3_7_id: Flag::False,
                cor4_4_a: Flag::False,
                cor4_4_b: Flag::False,
                thm3_9_spd: Flag::False,
                thm4_9_b: Flag::False,
                thm4_9_bprime: Flag::False,
            },
            morse_jump: MorseJumpPattern {
                mu_left: None,
                mu_right: None,
                mu_star: 0,
                nu_star: 0,
                tag: MorseJumpTag::Other,
                diagnostic: None,
            },
            alternative: Alternative::Unclassified,
            branches: Vec::new(),
            branches_converge: true,
            z2: None,
        };
        assert!(matches!(
            assemble_report(vec![finding]),
            Err(Error::InvariantViolation(_))
        ));
        assert!(assemble_report(Vec::new()).unwrap().is_empty());
    }

    #[test]
    fn sweep_localizes_below_null_tolerance() {
        // Polished candidates sit close enough to lambda* that the Hessian
        // kernel is visible under the default null tolerance.
        let f = builtin::pitchfork();
        let c = sweep_candidates(&f, 0.0, 2.0, 100, None).unwrap();
        let b = f.hessian_at_zero(&[c[0]]).unwrap();
        let eps = default_eps_null(&b);
        let nu = eigendecompose(&b, eps).unwrap().morse_data().nu;
        assert_eq!(nu, 1);
    }
}
