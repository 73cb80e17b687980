//! Eigenvalue tracking near zero along a parameter path: crossing numbers
//! r+/r-, the parity sign, and the spectral conditions of the sufficient
//! bifurcation criterion.

use crate::error::{Error, Result};
use crate::model::SymmetricOperator;
use crate::spectral::{default_eps_null, eigendecompose};

/// Settings for sampling a Hessian path around a candidate parameter.
#[derive(Debug, Clone)]
pub struct CrossingSettings {
    /// Half-width of the sampled window around lambda*.
    pub delta: f64,
    /// Samples per side.
    pub steps: usize,
    /// Window for the near-zero eigenvalue group; default is half the
    /// smallest nonzero |eigenvalue| of the Hessian at lambda*.
    pub eps_track: Option<f64>,
    /// Null tolerance; default is scale-aware.
    pub eps_null: Option<f64>,
}

impl CrossingSettings {
    pub fn new(delta: f64, steps: usize) -> Self {
        Self {
            delta,
            steps,
            eps_track: None,
            eps_null: None,
        }
    }
}

impl Default for CrossingSettings {
    fn default() -> Self {
        Self::new(0.1, 16)
    }
}

/// Spectral conditions evaluated on the sampled path.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct PathConditions {
    /// Ker B_lambda(0) = {0} at every sampled lambda != lambda*.
    pub kernel_trivial_off_star: bool,
    /// ||B_lambda - B_star|| shrinks monotonically toward lambda* on each side.
    pub continuous_at_star: bool,
    /// 0 lies in the spectrum of B_star (nullity >= 1).
    pub zero_in_spectrum: bool,
    /// r+ != r-.
    pub crossing_numbers_differ: bool,
}

/// Eigenvalue trajectories near zero around lambda*, with crossing counts.
#[derive(Debug, Clone)]
pub struct CrossingReport {
    pub lambda_star: f64,
    /// (lambda, eigenvalues of B_lambda with |e| < eps_track), ascending in
    /// lambda across both sides.
    pub samples: Vec<(f64, Vec<f64>)>,
    pub r_plus: usize,
    pub r_minus: usize,
    /// (-1)^(r+ + r-).
    pub parity: i32,
    pub conditions: PathConditions,
    pub eps_track: f64,
    /// Nullity of the Hessian at lambda*.
    pub nullity: usize,
}

/// Eigenvalues of S with absolute value below eps_track, ascending.
pub fn eig0_set(s: &SymmetricOperator, eps_track: f64) -> Result<Vec<f64>> {
    let sd = eigendecompose(s, default_eps_null(s))?;
    Ok(sd
        .eigenvalues
        .into_iter()
        .filter(|e| e.abs() < eps_track)
        .collect())
}

/// The parity sign (-1)^(r+ + r-).
pub fn parity_from_counts(r_plus: usize, r_minus: usize) -> i32 {
    if (r_plus + r_minus) % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Parity of the compact pencil K - lambda I at an eigenvalue lambda_0 of K:
/// (-1)^multiplicity. For symmetric K algebraic and geometric multiplicities
/// coincide.
pub fn parity_compact_pencil(k: &SymmetricOperator, lambda0: f64, eps_null: f64) -> Result<i32> {
    if lambda0.abs() <= eps_null {
        return Err(Error::NotAnEigenvalue(lambda0));
    }
    let sd = eigendecompose(k, eps_null)?;
    let mult = sd
        .eigenvalues
        .iter()
        .filter(|&&e| (e - lambda0).abs() <= eps_null * (1.0 + lambda0.abs()))
        .count();
    if mult == 0 {
        return Err(Error::NotAnEigenvalue(lambda0));
    }
    Ok(if mult % 2 == 0 { 1 } else { -1 })
}

struct SideScan {
    /// r(B_lambda) for each sampled offset, innermost first.
    counts: Vec<usize>,
    samples: Vec<(f64, Vec<f64>)>,
    kernel_trivial: bool,
    distances: Vec<f64>,
}

fn scan_side(
    path: &impl Fn(f64) -> SymmetricOperator,
    lambda_star: f64,
    delta: f64,
    steps: usize,
    sign: f64,
    eps_track: f64,
    eps_null: f64,
    b_star_norm: f64,
    b_star: &SymmetricOperator,
) -> Result<SideScan> {
    let mut counts = Vec::with_capacity(steps);
    let mut samples = Vec::with_capacity(steps);
    let mut kernel_trivial = true;
    let mut distances = Vec::with_capacity(steps);
    for k in 1..=steps {
        let offset = delta * k as f64 / steps as f64;
        let lam = lambda_star + sign * offset;
        let b = path(lam);
        let sd = eigendecompose(&b, eps_null)?;
        let min_abs = sd
            .eigenvalues
            .iter()
            .fold(f64::INFINITY, |a, &e| a.min(e.abs()));
        if min_abs <= eps_null * (1.0 + b_star_norm) {
            kernel_trivial = false;
        }
        let eig0: Vec<f64> = sd
            .eigenvalues
            .iter()
            .copied()
            .filter(|e| e.abs() < eps_track)
            .collect();
        counts.push(eig0.iter().filter(|&&e| e < 0.0).count());
        distances.push((b.matrix() - b_star.matrix()).norm());
        samples.push((lam, eig0));
    }
    Ok(SideScan {
        counts,
        samples,
        kernel_trivial,
        distances,
    })
}

/// Stabilized count: the three samples closest to lambda* must agree;
/// otherwise the limit cannot be read off at this delta.
fn stabilized(counts: &[usize]) -> Option<usize> {
    if counts.len() < 3 {
        return counts.first().copied();
    }
    let c = counts[0];
    if counts[1] == c && counts[2] == c {
        Some(c)
    } else {
        None
    }
}

/// Samples the Hessian path on both sides of lambda* and reads off the
/// crossing numbers r+ and r- together with the path conditions.
pub fn crossing_numbers(
    path: impl Fn(f64) -> SymmetricOperator,
    lambda_star: f64,
    settings: &CrossingSettings,
) -> Result<CrossingReport> {
    let b_star = path(lambda_star);
    let eps_null = settings.eps_null.unwrap_or_else(|| default_eps_null(&b_star));
    let star_sd = eigendecompose(&b_star, eps_null)?;
    let nullity = star_sd.morse_data().nu;
    if nullity == 0 {
        return Err(Error::NoCandidate);
    }
    let eps_track = settings.eps_track.unwrap_or_else(|| {
        let smallest_nonzero = star_sd
            .eigenvalues
            .iter()
            .map(|e| e.abs())
            .filter(|a| *a > eps_null)
            .fold(f64::INFINITY, f64::min);
        if smallest_nonzero.is_finite() {
            0.5 * smallest_nonzero
        } else {
            1.0
        }
    });
    let b_star_norm = b_star.norm();

    let right = scan_side(
        &path, lambda_star, settings.delta, settings.steps, 1.0, eps_track, eps_null,
        b_star_norm, &b_star,
    )?;
    let left = scan_side(
        &path, lambda_star, settings.delta, settings.steps, -1.0, eps_track, eps_null,
        b_star_norm, &b_star,
    )?;

    let r_plus = stabilized(&right.counts).ok_or_else(|| {
        Error::InconclusiveCrossing(format!(
            "right-side counts {:?} do not stabilize; shrink delta",
            right.counts
        ))
    })?;
    let r_minus = stabilized(&left.counts).ok_or_else(|| {
        Error::InconclusiveCrossing(format!(
            "left-side counts {:?} do not stabilize; shrink delta",
            left.counts
        ))
    })?;

    // Monotone trend of ||B_lambda - B_star|| toward lambda*, with slack for
    // roundoff. Distances are stored innermost-first.
    let slack = 1e-12 * (1.0 + b_star_norm);
    let monotone = |d: &[f64]| d.windows(2).all(|w| w[0] <= w[1] + slack);
    let continuous = monotone(&right.distances) && monotone(&left.distances);

    let mut samples = Vec::new();
    for s in left.samples.iter().rev() {
        samples.push(s.clone());
    }
    samples.extend(right.samples.iter().cloned());

    Ok(CrossingReport {
        lambda_star,
        samples,
        r_plus,
        r_minus,
        parity: parity_from_counts(r_plus, r_minus),
        conditions: PathConditions {
            kernel_trivial_off_star: right.kernel_trivial && left.kernel_trivial,
            continuous_at_star: continuous,
            zero_in_spectrum: true,
            crossing_numbers_differ: r_plus != r_minus,
        },
        eps_track,
        nullity,
    })
}

/// Outcome of the sufficient-criterion check on a Hessian path.
#[derive(Debug, Clone)]
pub struct Theorem35Report {
    pub report: Option<CrossingReport>,
    pub conditions: PathConditions,
    /// All four spectral conditions hold: bifurcation predicted at lambda*.
    pub verdict: bool,
}

/// Evaluates the four spectral conditions (kernel trivial off lambda*,
/// continuity, degenerate Hessian at lambda*, r+ != r-) on the path.
pub fn check_theorem_3_5(
    path: impl Fn(f64) -> SymmetricOperator,
    lambda_star: f64,
    settings: &CrossingSettings,
) -> Result<Theorem35Report> {
    match crossing_numbers(&path, lambda_star, settings) {
        Ok(report) => {
            let c = report.conditions;
            let verdict = c.kernel_trivial_off_star
                && c.continuous_at_star
                && c.zero_in_spectrum
                && c.crossing_numbers_differ;
            Ok(Theorem35Report {
                report: Some(report),
                conditions: c,
                verdict,
            })
        }
        Err(Error::NoCandidate) => Ok(Theorem35Report {
            report: None,
            conditions: PathConditions {
                kernel_trivial_off_star: true,
                continuous_at_star: true,
                zero_in_spectrum: false,
                crossing_numbers_differ: false,
            },
            verdict: false,
        }),
        Err(e) => Err(e),
    }
}
