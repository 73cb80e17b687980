//! Symmetric and generalized eigenanalysis, Morse index and nullity, and the
//! eigenspace decompositions used by the crossing and reduction modules.

use crate::error::{Error, Result};
use crate::model::SymmetricOperator;
use nalgebra::DMatrix;

/// Scale-aware default null tolerance: 1e-8 * (1 + spectral radius estimate).
pub fn default_eps_null(s: &SymmetricOperator) -> f64 {
    // Row-sum norm bounds the spectral radius.
    let m = s.matrix();
    let mut radius = 0.0f64;
    for i in 0..m.nrows() {
        radius = radius.max(m.row(i).iter().map(|x| x.abs()).sum());
    }
    1e-8 * (1.0 + radius)
}

/// Full ordered eigensystem of a symmetric operator.
#[derive(Debug, Clone)]
pub struct SpectralData {
    /// Eigenvalues in nondecreasing order.
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors; column i pairs with eigenvalue i.
    pub eigenvectors: DMatrix<f64>,
    /// Null tolerance used when partitioning the spectrum.
    pub null_tol: f64,
}

impl SpectralData {
    /// Columns whose eigenvalue satisfies |e| <= null_tol.
    pub fn kernel_basis(&self) -> DMatrix<f64> {
        self.select(|e| e.abs() <= self.null_tol)
    }

    /// Columns whose eigenvalue satisfies |e| > null_tol.
    pub fn complement_basis(&self) -> DMatrix<f64> {
        self.select(|e| e.abs() > self.null_tol)
    }

    fn select(&self, pred: impl Fn(f64) -> bool) -> DMatrix<f64> {
        let cols: Vec<usize> = (0..self.eigenvalues.len())
            .filter(|&i| pred(self.eigenvalues[i]))
            .collect();
        let n = self.eigenvectors.nrows();
        DMatrix::from_fn(n, cols.len(), |r, c| self.eigenvectors[(r, cols[c])])
    }

    pub fn morse_data(&self) -> MorseData {
        let mut md = MorseData { mu: 0, nu: 0, pi: 0 };
        for &e in &self.eigenvalues {
            if e < -self.null_tol {
                md.mu += 1;
            } else if e <= self.null_tol {
                md.nu += 1;
            } else {
                md.pi += 1;
            }
        }
        md
    }
}

/// Morse index, nullity and positive count of a symmetric operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MorseData {
    pub mu: usize,
    pub nu: usize,
    pub pi: usize,
}

/// Fixes the sign of each eigenvector column: the first component with
/// absolute value above 1e-8 is made positive.
fn fix_signs(v: &mut DMatrix<f64>) {
    for c in 0..v.ncols() {
        let mut sign = 1.0;
        for r in 0..v.nrows() {
            let x = v[(r, c)];
            if x.abs() > 1e-8 {
                if x < 0.0 {
                    sign = -1.0;
                }
                break;
            }
        }
        if sign < 0.0 {
            for r in 0..v.nrows() {
                v[(r, c)] = -v[(r, c)];
            }
        }
    }
}

/// Modified Gram-Schmidt on the given columns in place.
fn orthonormalize_columns(v: &mut DMatrix<f64>, cols: &[usize]) {
    for (k, &ck) in cols.iter().enumerate() {
        for &cj in cols.iter().take(k) {
            let dot = v.column(ck).dot(&v.column(cj));
            let proj = v.column(cj) * dot;
            let diff = v.column(ck) - proj;
            v.set_column(ck, &diff);
        }
        let norm = v.column(ck).norm();
        if norm > 0.0 {
            let scaled = v.column(ck) / norm;
            v.set_column(ck, &scaled);
        }
    }
}

/// Symmetric eigensolve with ascending eigenvalues, deterministic eigenvector
/// signs, and repeated eigenvalues re-orthonormalized per cluster.
pub fn eigendecompose(s: &SymmetricOperator, eps_null: f64) -> Result<SpectralData> {
    if eps_null <= 0.0 {
        return Err(Error::InvalidSpec("eps_null must be positive".into()));
    }
    let n = s.dim();
    let se = s.matrix().clone().symmetric_eigen();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| se.eigenvalues[a].partial_cmp(&se.eigenvalues[b]).unwrap());

    let eigenvalues: Vec<f64> = idx.iter().map(|&i| se.eigenvalues[i]).collect();
    let mut vectors = DMatrix::from_fn(n, n, |r, c| se.eigenvectors[(r, idx[c])]);

    // Cluster repeated eigenvalues within 1e-8 * (1 + |e|) and re-orthonormalize.
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n
            && (eigenvalues[end] - eigenvalues[end - 1]).abs()
                <= 1e-8 * (1.0 + eigenvalues[end].abs())
        {
            end += 1;
        }
        if end - start > 1 {
            let cols: Vec<usize> = (start..end).collect();
            orthonormalize_columns(&mut vectors, &cols);
        }
        start = end;
    }
    fix_signs(&mut vectors);

    Ok(SpectralData {
        eigenvalues,
        eigenvectors: vectors,
        null_tol: eps_null,
    })
}

/// Morse index / nullity / positive count of S under eps_null.
pub fn morse_data(s: &SymmetricOperator, eps_null: f64) -> Result<MorseData> {
    Ok(eigendecompose(s, eps_null)?.morse_data())
}

/// A linear pencil B(0) - sum_j lambda_j Bhat_j(0).
#[derive(Debug, Clone)]
pub struct PencilFamily {
    base: SymmetricOperator,
    hats: Vec<SymmetricOperator>,
}

impl PencilFamily {
    pub fn new(base: SymmetricOperator, hats: Vec<SymmetricOperator>) -> Result<Self> {
        if hats.is_empty() {
            return Err(Error::InvalidSpec("pencil needs at least one hat".into()));
        }
        let n = base.dim();
        for h in &hats {
            if h.dim() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: h.dim(),
                });
            }
        }
        Ok(Self { base, hats })
    }

    pub fn base(&self) -> &SymmetricOperator {
        &self.base
    }

    pub fn hats(&self) -> &[SymmetricOperator] {
        &self.hats
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    pub fn dim_param(&self) -> usize {
        self.hats.len()
    }

    /// The pencil matrix B(0) - sum_j lambda_j Bhat_j(0).
    pub fn at(&self, lambda: &[f64]) -> Result<SymmetricOperator> {
        if lambda.len() != self.hats.len() {
            return Err(Error::DimensionMismatch {
                expected: self.hats.len(),
                got: lambda.len(),
            });
        }
        let mut m = self.base.matrix().clone();
        for (j, h) in self.hats.iter().enumerate() {
            m -= h.matrix() * lambda[j];
        }
        SymmetricOperator::new(m)
    }
}

/// One generalized eigenvalue lambda_k with its eigenspace H_k and the
/// signature of the base restricted to H_k.
#[derive(Debug, Clone)]
pub struct GeneralizedPair {
    pub value: f64,
    /// Orthonormal basis of H_k = Ker(base - lambda_k * hat).
    pub basis: DMatrix<f64>,
    /// dim H_k^+ : positive count of base on H_k.
    pub positive: usize,
    /// dim H_k^- : negative count of base on H_k.
    pub negative: usize,
}

impl GeneralizedPair {
    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }
}

/// All finite generalized eigenvalues of a single-parameter pencil, with
/// H_0 = Ker(hat) recorded separately.
#[derive(Debug, Clone)]
pub struct GeneralizedEigenData {
    pub pairs: Vec<GeneralizedPair>,
    /// Orthonormal basis of H_0 = Ker(hat).
    pub kernel_of_hat: DMatrix<f64>,
    pub eps: f64,
}

impl GeneralizedEigenData {
    pub fn eigenvalues(&self) -> Vec<f64> {
        self.pairs.iter().map(|p| p.value).collect()
    }

    pub fn total_dim(&self) -> usize {
        self.pairs.iter().map(|p| p.dim()).sum::<usize>() + self.kernel_of_hat.ncols()
    }
}

fn cluster_tol(value: f64) -> f64 {
    1e-8 * (1.0 + value.abs())
}

/// Solves base v = lambda hat v for a single-parameter pencil.
///
/// Two routes are supported: a positive definite base (reduced to a standard
/// symmetric problem via its inverse square root) and an invertible base that
/// commutes with the hat (simultaneous diagonalization). Indefinite
/// non-commuting pencils are rejected.
pub fn generalized_eigenvalues(pencil: &PencilFamily, eps: f64) -> Result<GeneralizedEigenData> {
    if pencil.dim_param() != 1 {
        return Err(Error::UnsupportedPencil(
            "generalized eigensolve requires a single-parameter pencil".into(),
        ));
    }
    let n = pencil.dim();
    let base = pencil.base();
    let hat = &pencil.hats()[0];
    let base_sd = eigendecompose(base, eps)?;

    let min_abs = base_sd
        .eigenvalues
        .iter()
        .fold(f64::INFINITY, |a, &e| a.min(e.abs()));
    let scale = 1.0 + base_sd.eigenvalues.iter().fold(0.0f64, |a, &e| a.max(e.abs()));
    if min_abs <= eps * scale {
        return Err(Error::UnsupportedPencil(
            "base operator is not invertible".into(),
        ));
    }

    let spd = base_sd.eigenvalues[0] > 0.0;
    let comm = {
        let c = base.matrix() * hat.matrix() - hat.matrix() * base.matrix();
        c.norm() <= 1e-10 * (1.0 + base.norm()) * (1.0 + hat.norm())
    };

    // Common diagonalizing basis: columns v_i with base v_i = a_i v_i and
    // hat v_i = b_i v_i (exactly in the commuting route, through the
    // J-transformation otherwise).
    let (vectors, base_vals, hat_vals) = if spd {
        // J = base^{-1/2}; u - lambda L u = 0 with L = J hat J.
        let j = {
            let mut d = DMatrix::zeros(n, n);
            for (i, &e) in base_sd.eigenvalues.iter().enumerate() {
                d[(i, i)] = 1.0 / e.sqrt();
            }
            &base_sd.eigenvectors * d * base_sd.eigenvectors.transpose()
        };
        let l = SymmetricOperator::new(&j * hat.matrix() * &j)?;
        let l_sd = eigendecompose(&l, eps)?;
        // v = J u diagonalizes the pencil: base v = (1/theta) hat v when
        // theta != 0; theta = 0 maps into Ker(hat).
        let mut vectors = &j * &l_sd.eigenvectors;
        // Re-orthonormalize within theta-clusters so each H_k basis is
        // orthonormal (J distorts angles only across distinct clusters).
        let thetas = &l_sd.eigenvalues;
        let mut start = 0;
        while start < n {
            let mut end = start + 1;
            while end < n && (thetas[end] - thetas[end - 1]).abs() <= cluster_tol(thetas[end]) {
                end += 1;
            }
            let cols: Vec<usize> = (start..end).collect();
            orthonormalize_columns(&mut vectors, &cols);
            start = end;
        }
        fix_signs(&mut vectors);
        let base_vals: Vec<f64> = (0..n)
            .map(|i| vectors.column(i).dot(&(base.matrix() * vectors.column(i))))
            .collect();
        let hat_vals: Vec<f64> = (0..n)
            .map(|i| vectors.column(i).dot(&(hat.matrix() * vectors.column(i))))
            .collect();
        (vectors, base_vals, hat_vals)
    } else if comm {
        // Simultaneous diagonalization: diagonalize hat, then base within
        // each hat-eigenspace.
        let hat_sd = eigendecompose(hat, eps)?;
        let mut vectors = hat_sd.eigenvectors.clone();
        let hvals = hat_sd.eigenvalues.clone();
        let mut bvals = vec![0.0f64; n];
        let mut start = 0;
        while start < n {
            let mut end = start + 1;
            while end < n && (hvals[end] - hvals[end - 1]).abs() <= cluster_tol(hvals[end]) {
                end += 1;
            }
            let k = end - start;
            let sub = DMatrix::from_fn(n, k, |r, c| vectors[(r, start + c)]);
            let restricted = SymmetricOperator::new(sub.transpose() * base.matrix() * &sub)?;
            let rsd = eigendecompose(&restricted, eps)?;
            let rotated = &sub * &rsd.eigenvectors;
            for c in 0..k {
                vectors.set_column(start + c, &rotated.column(c));
                bvals[start + c] = rsd.eigenvalues[c];
            }
            start = end;
        }
        fix_signs(&mut vectors);
        (vectors, bvals, hvals)
    } else {
        return Err(Error::UnsupportedPencil(
            "indefinite base does not commute with the hat".into(),
        ));
    };

    // Partition the common eigenbasis into H_0 and the H_k spaces.
    let hat_scale = 1.0 + hat.norm();
    let mut kernel_cols: Vec<usize> = Vec::new();
    let mut finite: Vec<(f64, usize)> = Vec::new();
    for i in 0..n {
        if hat_vals[i].abs() <= eps * hat_scale {
            kernel_cols.push(i);
        } else {
            finite.push((base_vals[i] / hat_vals[i], i));
        }
    }
    finite.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());

    let mut pairs: Vec<GeneralizedPair> = Vec::new();
    let mut i = 0;
    while i < finite.len() {
        let mut j = i + 1;
        while j < finite.len() && (finite[j].0 - finite[j - 1].0).abs() <= cluster_tol(finite[j].0)
        {
            j += 1;
        }
        let cols: Vec<usize> = finite[i..j].iter().map(|&(_, c)| c).collect();
        let basis = DMatrix::from_fn(n, cols.len(), |r, c| vectors[(r, cols[c])]);
        let mut positive = 0;
        let mut negative = 0;
        for &c in &cols {
            if base_vals[c] > 0.0 {
                positive += 1;
            } else {
                negative += 1;
            }
        }
        let value = finite[i..j].iter().map(|&(v, _)| v).sum::<f64>() / (j - i) as f64;
        pairs.push(GeneralizedPair {
            value,
            basis,
            positive,
            negative,
        });
        i = j;
    }

    let kernel_of_hat = DMatrix::from_fn(n, kernel_cols.len(), |r, c| vectors[(r, kernel_cols[c])]);

    Ok(GeneralizedEigenData {
        pairs,
        kernel_of_hat,
        eps,
    })
}

/// Morse index formula for a positive definite base:
/// mu_lambda = sum over lambda_k < lambda of dim H_k.
pub fn morse_index_spd(geig: &GeneralizedEigenData, lambda: f64) -> usize {
    geig.pairs
        .iter()
        .filter(|p| p.value < lambda)
        .map(|p| p.dim())
        .sum()
}

/// Signed Morse index formula for a commuting invertible pencil:
/// sum over lambda_k < lambda of dim H_k^+ plus sum over lambda_k > lambda
/// of dim H_k^-.
pub fn morse_index_signed(geig: &GeneralizedEigenData, lambda: f64) -> usize {
    let below: usize = geig
        .pairs
        .iter()
        .filter(|p| p.value < lambda)
        .map(|p| p.positive)
        .sum();
    let above: usize = geig
        .pairs
        .iter()
        .filter(|p| p.value > lambda)
        .map(|p| p.negative)
        .sum();
    below + above
}

/// Whether lambda_star is isolated: no other lambda_k, and no spectral point
/// 0 when H_0 is nontrivial, within `gap`.
pub fn is_isolated_eigenvalue(
    geig: &GeneralizedEigenData,
    lambda_star: f64,
    gap: f64,
) -> Result<bool> {
    let hit = geig
        .pairs
        .iter()
        .position(|p| (p.value - lambda_star).abs() <= cluster_tol(lambda_star));
    let Some(hit) = hit else {
        return Err(Error::NotAnEigenvalue(lambda_star));
    };
    for (k, p) in geig.pairs.iter().enumerate() {
        if k != hit && (p.value - lambda_star).abs() < gap {
            return Ok(false);
        }
    }
    // 0 counts as the spectral point lambda_0 when Ker(hat) is nontrivial.
    if geig.kernel_of_hat.ncols() > 0 && lambda_star.abs() < gap {
        return Ok(false);
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(d: &[f64]) -> SymmetricOperator {
        SymmetricOperator::from_diagonal(d)
    }

    #[test]
    fn eigendecompose_diag_ascending() {
        let sd = eigendecompose(&diag(&[3.0, 1.0]), 1e-8).unwrap();
        assert_eq!(sd.eigenvalues, vec![1.0, 3.0]);
        // eigenvectors e2, e1 with positive leading entries
        assert!((sd.eigenvectors[(1, 0)] - 1.0).abs() < 1e-12);
        assert!((sd.eigenvectors[(0, 1)] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn eigendecompose_symmetric_coupling() {
        // [[1,2],[2,1]] has eigenvalues -1, 3 (characteristic poly l^2-2l-3).
        let s = SymmetricOperator::new(DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]))
            .unwrap();
        let sd = eigendecompose(&s, 1e-8).unwrap();
        assert!((sd.eigenvalues[0] + 1.0).abs() < 1e-12);
        assert!((sd.eigenvalues[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn eigendecompose_zero_matrix() {
        let sd = eigendecompose(&SymmetricOperator::zeros(3), 1e-8).unwrap();
        assert!(sd.eigenvalues.iter().all(|&e| e == 0.0));
    }

    #[test]
    fn morse_data_counts() {
        assert_eq!(
            morse_data(&diag(&[-1.0, 1.0]), 1e-8).unwrap(),
            MorseData { mu: 1, nu: 0, pi: 1 }
        );
        assert_eq!(
            morse_data(&diag(&[0.0, 3.0]), 1e-8).unwrap(),
            MorseData { mu: 0, nu: 1, pi: 1 }
        );
        let s = SymmetricOperator::new(DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]))
            .unwrap();
        assert_eq!(
            morse_data(&s, 1e-8).unwrap(),
            MorseData { mu: 1, nu: 0, pi: 1 }
        );
    }

    #[test]
    fn generalized_simple_spd() {
        let p = PencilFamily::new(diag(&[1.0, 2.0]), vec![SymmetricOperator::identity(2)])
            .unwrap();
        let g = generalized_eigenvalues(&p, 1e-10).unwrap();
        assert_eq!(g.eigenvalues().len(), 2);
        assert!((g.eigenvalues()[0] - 1.0).abs() < 1e-10);
        assert!((g.eigenvalues()[1] - 2.0).abs() < 1e-10);
        assert_eq!(g.kernel_of_hat.ncols(), 0);
        assert_eq!(g.total_dim(), 2);
    }

    #[test]
    fn generalized_with_hat_kernel() {
        // base = I, hat = diag(1, 0): lambda_1 = 1 with H_1 = span e1,
        // H_0 = span e2.
        let p = PencilFamily::new(SymmetricOperator::identity(2), vec![diag(&[1.0, 0.0])])
            .unwrap();
        let g = generalized_eigenvalues(&p, 1e-10).unwrap();
        assert_eq!(g.pairs.len(), 1);
        assert!((g.pairs[0].value - 1.0).abs() < 1e-10);
        assert!((g.pairs[0].basis[(0, 0)].abs() - 1.0).abs() < 1e-10);
        assert_eq!(g.kernel_of_hat.ncols(), 1);
        assert!((g.kernel_of_hat[(1, 0)].abs() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn generalized_multiplicity_two() {
        let p = PencilFamily::new(diag(&[1.0, 1.0]), vec![SymmetricOperator::identity(2)])
            .unwrap();
        let g = generalized_eigenvalues(&p, 1e-10).unwrap();
        assert_eq!(g.pairs.len(), 1);
        assert_eq!(g.pairs[0].dim(), 2);
    }

    #[test]
    fn generalized_rejects_singular_base() {
        let p = PencilFamily::new(diag(&[0.0, 1.0]), vec![SymmetricOperator::identity(2)])
            .unwrap();
        assert!(matches!(
            generalized_eigenvalues(&p, 1e-10),
            Err(Error::UnsupportedPencil(_))
        ));
    }

    #[test]
    fn generalized_rejects_noncommuting_indefinite() {
        let base = diag(&[-1.0, 2.0]);
        let hat = SymmetricOperator::new(DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 0.0]))
            .unwrap();
        let p = PencilFamily::new(base, vec![hat]).unwrap();
        assert!(matches!(
            generalized_eigenvalues(&p, 1e-10),
            Err(Error::UnsupportedPencil(_))
        ));
    }

    #[test]
    fn morse_index_formulas_on_spd_pencil() {
        let p = PencilFamily::new(diag(&[1.0, 2.0]), vec![SymmetricOperator::identity(2)])
            .unwrap();
        let g = generalized_eigenvalues(&p, 1e-10).unwrap();
        assert_eq!(morse_index_spd(&g, 1.5), 1);
        assert_eq!(morse_index_spd(&g, 0.5), 0);
        assert_eq!(morse_index_spd(&g, 3.0), 2);
        assert_eq!(morse_index_signed(&g, 1.5), 1);
        assert_eq!(morse_index_signed(&g, 0.5), 0);
        assert_eq!(morse_index_signed(&g, 3.0), 2);
    }

    #[test]
    fn isolation_check() {
        let p = PencilFamily::new(diag(&[1.0, 2.0]), vec![SymmetricOperator::identity(2)])
            .unwrap();
        let g = generalized_eigenvalues(&p, 1e-10).unwrap();
        assert!(is_isolated_eigenvalue(&g, 1.0, 0.5).unwrap());
        assert!(!is_isolated_eigenvalue(&g, 1.0, 1.5).unwrap());

        let close =
            PencilFamily::new(diag(&[1.0, 1.1]), vec![SymmetricOperator::identity(2)]).unwrap();
        let g = generalized_eigenvalues(&close, 1e-10).unwrap();
        assert!(!is_isolated_eigenvalue(&g, 1.0, 0.5).unwrap());

        // H_0 nontrivial: 0 counts as a spectral point.
        let p = PencilFamily::new(SymmetricOperator::identity(2), vec![diag(&[1.0, 0.0])])
            .unwrap();
        let g = generalized_eigenvalues(&p, 1e-10).unwrap();
        assert!(!is_isolated_eigenvalue(&g, 1.0, 2.0).unwrap());
        assert!(is_isolated_eigenvalue(&g, 1.0, 0.5).unwrap());

        assert!(matches!(
            is_isolated_eigenvalue(&g, 5.0, 0.5),
            Err(Error::NotAnEigenvalue(_))
        ));
    }

    #[test]
    fn generalized_residuals_small() {
        // Non-diagonal commuting pencil: polynomials in a common matrix.
        let q = {
            let m = DMatrix::from_row_slice(3, 3, &[2.0, 1.0, 0.0, 1.0, 3.0, 1.0, 0.0, 1.0, 2.0]);
            SymmetricOperator::new(m).unwrap()
        };
        let base = SymmetricOperator::new(
            q.matrix() * q.matrix() + DMatrix::identity(3, 3),
        )
        .unwrap();
        let hat = q.clone();
        let p = PencilFamily::new(base.clone(), vec![hat.clone()]).unwrap();
        let g = generalized_eigenvalues(&p, 1e-10).unwrap();
        assert_eq!(g.total_dim(), 3);
        for pair in &g.pairs {
            for c in 0..pair.basis.ncols() {
                let v = pair.basis.column(c);
                let r = base.matrix() * v - hat.matrix() * v * pair.value;
                let tol = 1e-8 * (1.0 + base.norm() + pair.value.abs() * hat.norm());
                assert!(r.norm() <= tol, "residual {}", r.norm());
            }
        }
    }
}
