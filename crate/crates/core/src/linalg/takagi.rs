//! Takagi factorization `gamma = U diag(sigma) U^T` of a complex symmetric matrix.
//!
//! The antilinear map `x -> gamma * conj(x)` is real-linear on `R^{2n}`. Writing
//! `gamma = A + iB` and `x = p + iq`, it acts as the real symmetric matrix
//!
//! ```text
//! [ A   B ]
//! [ B  -A ]
//! ```
//!
//! whose spectrum is `{+sigma_j, -sigma_j}`. An eigenvector `(p, q)` for
//! `sigma > 0` gives a Takagi vector `u = p + iq` with `gamma conj(u) = sigma u`.
//! Eigenvectors for distinct nonnegative eigenvalues are automatically
//! orthogonal in the Hermitian sense, because `i u` belongs to `-sigma`. For the
//! numerically-zero block any orthonormal completion works, since
//! `gamma conj(w) = 0` for every `w` orthogonal to the retained vectors.

use nalgebra::{DMatrix, SymmetricEigen};

use super::{c, frobenius, inner, rank_cutoff, vec_norm, CMat, CVec};
use crate::error::{Error, Result};

/// Symmetry tolerance used when the caller passes `tol <= 0`.
pub const DEFAULT_SYMMETRY_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct TakagiFactorization {
    /// `unitary * diag(sqrt(sigma))`.
    pub lambda: CMat,
    pub unitary: CMat,
    /// Descending, nonnegative.
    pub sigma: Vec<f64>,
    pub rank: usize,
    /// `||lambda lambda^T - gamma||_F`.
    pub residual: f64,
}

impl TakagiFactorization {
    /// The first `max(rank, 1)` columns of `lambda`. Still factorizes gamma.
    pub fn truncated_lambda(&self) -> CMat {
        let k = self.rank.max(1).min(self.lambda.ncols());
        self.lambda.columns(0, k).into_owned()
    }
}

pub fn takagi(gamma: &CMat, tol: f64) -> Result<TakagiFactorization> {
    let n = super::ensure_square(gamma)?;
    super::ensure_finite(gamma, "takagi input")?;
    let norm = frobenius(gamma);
    let sym_tol = if tol > 0.0 { tol } else { DEFAULT_SYMMETRY_TOL };
    let asym = frobenius(&(gamma - gamma.transpose()));
    if asym > sym_tol * norm.max(1.0) {
        return Err(Error::NotSymmetric { deviation: asym });
    }
    if n == 0 {
        return Ok(TakagiFactorization {
            lambda: CMat::zeros(0, 0),
            unitary: CMat::zeros(0, 0),
            sigma: Vec::new(),
            rank: 0,
            residual: 0.0,
        });
    }

    let g = (gamma + gamma.transpose()).scale(0.5);
    let embedding = DMatrix::<f64>::from_fn(2 * n, 2 * n, |i, j| {
        let (bi, ii) = (i / n, i % n);
        let (bj, jj) = (j / n, j % n);
        let z = g[(ii, jj)];
        match (bi, bj) {
            (0, 0) => z.re,
            (1, 1) => -z.re,
            _ => z.im,
        }
    });
    let eig = SymmetricEigen::try_new(embedding, f64::EPSILON, 10_000).ok_or_else(|| {
        Error::DecompositionFailed(format!("symmetric eigensolver failed for n = {n}"))
    })?;

    let mut order: Vec<usize> = (0..2 * n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .total_cmp(&eig.eigenvalues[a])
            .then(a.cmp(&b))
    });
    let sigma_max = eig.eigenvalues[order[0]].max(0.0);
    let cutoff = rank_cutoff(n, n, sigma_max, 0.0);
    let rank = order[..n]
        .iter()
        .take_while(|&&k| eig.eigenvalues[k] > cutoff)
        .count();

    let mut basis: Vec<CVec> = Vec::with_capacity(n);
    let mut sigma = Vec::with_capacity(n);
    for &k in &order[..rank] {
        let col = eig.eigenvectors.column(k);
        let u = CVec::from_fn(n, |i, _| c(col[i], col[i + n]));
        let u = orthonormalize_against(&basis, u)
            .ok_or_else(|| Error::DecompositionFailed("takagi vectors lost independence".into()))?;
        basis.push(u);
        sigma.push(eig.eigenvalues[k]);
    }
    // complete to a unitary basis with coordinate vectors, largest residual first
    while basis.len() < n {
        let best = (0..n)
            .filter_map(|k| {
                let e = super::basis_vector(n, k);
                let r = project_out(&basis, e);
                let norm = vec_norm(&r);
                (norm > 1e-8).then_some((norm, r))
            })
            .max_by(|a, b| a.0.total_cmp(&b.0))
            .ok_or_else(|| Error::DecompositionFailed("could not complete takagi basis".into()))?;
        let u = orthonormalize_against(&basis, best.1)
            .expect("completion candidate has a nonzero residual");
        basis.push(u);
        sigma.push(0.0);
    }

    let unitary = CMat::from_columns(&basis);
    let mut lambda = unitary.clone();
    for (j, s) in sigma.iter().enumerate() {
        lambda.column_mut(j).scale_mut(s.sqrt());
    }
    let residual = frobenius(&(&lambda * lambda.transpose() - gamma));
    let budget = 1e-8 * norm.max(1.0) + asym;
    if residual > budget {
        return Err(Error::DecompositionFailed(format!(
            "takagi residual {residual:e} exceeds {budget:e}"
        )));
    }
    Ok(TakagiFactorization {
        lambda,
        unitary,
        sigma,
        rank,
        residual,
    })
}

fn project_out(basis: &[CVec], mut v: CVec) -> CVec {
    // two passes of modified Gram-Schmidt
    for _ in 0..2 {
        for q in basis {
            let coeff = inner(&v, q);
            v -= q * coeff;
        }
    }
    v
}

fn orthonormalize_against(basis: &[CVec], v: CVec) -> Option<CVec> {
    let start = vec_norm(&v);
    let r = project_out(basis, v);
    let norm = vec_norm(&r);
    (norm > 1e-6 * start.max(f64::MIN_POSITIVE)).then(|| r.unscale(norm))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{cmat, random_unitary, rmat};

    fn check_contract(gamma: &CMat, f: &TakagiFactorization) {
        let n = gamma.nrows();
        let recon = &f.lambda * f.lambda.transpose();
        assert!(frobenius(&(recon - gamma)) <= 1e-10 * frobenius(gamma).max(1.0));
        let gram = f.lambda.adjoint() * &f.lambda;
        for i in 0..n {
            for j in 0..n {
                let expected = if i == j { f.sigma[i] } else { 0.0 };
                assert!((gram[(i, j)] - c(expected, 0.0)).norm() <= 1e-9);
            }
        }
        assert!(f.sigma.windows(2).all(|w| w[0] >= w[1]));
        assert!(f.sigma.iter().all(|&s| s >= 0.0));
    }

    #[test]
    fn identity() {
        let g = CMat::identity(2, 2);
        let f = takagi(&g, 0.0).unwrap();
        assert_eq!(f.rank, 2);
        check_contract(&g, &f);
    }

    #[test]
    fn swap_matrix() {
        let g = rmat(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let f = takagi(&g, 0.0).unwrap();
        assert!((f.sigma[0] - 1.0).abs() < 1e-14 && (f.sigma[1] - 1.0).abs() < 1e-14);
        check_contract(&g, &f);
        // the hand-derived factor is also valid
        let h = 1.0 / 2f64.sqrt();
        let hand = cmat(&[&[(h, 0.0), (0.0, h)], &[(h, 0.0), (0.0, -h)]]);
        assert!(frobenius(&(&hand * hand.transpose() - &g)) < 1e-15);
    }

    #[test]
    fn zero_matrix() {
        let g = CMat::zeros(3, 3);
        let f = takagi(&g, 0.0).unwrap();
        assert_eq!(f.rank, 0);
        assert_eq!(frobenius(&f.lambda), 0.0);
        assert_eq!(f.truncated_lambda().shape(), (3, 1));
    }

    #[test]
    fn rejects_non_symmetric() {
        let g = rmat(&[&[1.0, 2.0], &[3.0, 4.0]]);
        assert!(matches!(takagi(&g, 0.0), Err(Error::NotSymmetric { .. })));
    }

    #[test]
    fn recovers_prescribed_spectrum_with_repeats_and_zeros() {
        let u = random_unitary(6, 42);
        let spectrum = [3.0, 3.0, 1.5, 0.0, 0.0, 0.0];
        let d = CMat::from_diagonal(&CVec::from_iterator(6, spectrum.iter().map(|&s| c(s, 0.0))));
        let g = &u * d * u.transpose();
        let f = takagi(&g, 0.0).unwrap();
        assert_eq!(f.rank, 3);
        for (got, want) in f.sigma.iter().zip(spectrum) {
            assert!((got - want).abs() < 1e-12);
        }
        check_contract(&g, &f);
        let truncated = f.truncated_lambda();
        assert_eq!(truncated.ncols(), 3);
        assert!(frobenius(&(&truncated * truncated.transpose() - &g)) < 1e-12);
    }

    #[test]
    fn deterministic() {
        let u = random_unitary(4, 1);
        let g = &u * u.transpose();
        let a = takagi(&g, 0.0).unwrap();
        let b = takagi(&g, 0.0).unwrap();
        assert_eq!(a.lambda, b.lambda);
    }
}
