//! The model space built from a factorization `gamma = lambda lambda^T`.
//!
//! The space is `C^k` (`k` = columns of `lambda`) with the canonical
//! conjugation. Its vectors `x_n` are the rows of `lambda`, so `X = lambda^T`
//! holds them as columns and `[x_n, x_m] = (lambda lambda^T)[n][m]`. The
//! partial shift `x_n -> x_{n+1}` on `span{x_0, .., x_{d-1}}` is stored as a
//! `k x k` matrix that vanishes on the orthogonal complement of that span.

use crate::error::{Error, Result};
use crate::jspace::Conjugation;
use crate::linalg::{self, frobenius, CMat, CVec};
use crate::moments::{check_factorizes, check_kernel_inclusion};

#[derive(Debug, Clone)]
pub struct ModelSpace {
    pub dim: usize,
    pub degree: usize,
    /// Column `k` is `x_k`.
    pub x: CMat,
    /// Orthonormal basis of `span{x_0, .., x_{d-1}}`.
    pub domain_basis: CMat,
    /// Orthonormal basis of the orthogonal complement of the domain.
    pub complement_basis: CMat,
    /// Orthogonal projector onto the domain.
    pub p1: CMat,
    /// The shift, zero on the complement.
    pub a0: CMat,
    pub conj: Conjugation,
}

impl ModelSpace {
    pub fn x0(&self) -> CVec {
        self.x.column(0).into_owned()
    }

    pub fn defect(&self) -> usize {
        self.complement_basis.ncols()
    }
}

pub fn build_space(lambda: &CMat, gamma: &CMat, tol: f64) -> Result<ModelSpace> {
    check_factorizes(lambda, gamma, tol)?;
    if lambda.nrows() < 2 {
        return Err(Error::InvalidProblem("need degree >= 1".into()));
    }
    if lambda.ncols() == 0 {
        return Err(Error::InvalidProblem("factor has no columns".into()));
    }
    if !check_kernel_inclusion(lambda, tol)? {
        return Err(Error::IllDefinedOperator(
            "Ker L1^T is not contained in Ker L2^T".into(),
        ));
    }
    let degree = lambda.nrows() - 1;
    let dim = lambda.ncols();
    let x: CMat = lambda.transpose();
    let x_dom = x.columns(0, degree).into_owned();
    let x_shift = x.columns(1, degree).into_owned();

    let dec = linalg::svd(&x_dom)?;
    let r = dec.rank(0.0);
    let domain_basis = dec.u.columns(0, r).into_owned();
    let p1 = linalg::projector(&domain_basis)?;
    let (_, complement_basis) = linalg::rank_nullspace(&domain_basis.adjoint(), 0.0)?;

    let a0 = &x_shift * linalg::pseudoinverse(&x_dom, 0.0)? * &p1;

    let mapped = &a0 * &x_dom;
    let err = frobenius(&(&mapped - &x_shift));
    let scale = frobenius(lambda).max(1.0);
    if err > 1e-9 * scale {
        return Err(Error::IllDefinedOperator(format!(
            "shift reproduces x_(k+1) only up to {err:e}"
        )));
    }

    Ok(ModelSpace {
        dim,
        degree,
        x,
        domain_basis,
        complement_basis,
        p1,
        a0,
        conj: Conjugation::canonical(dim),
    })
}

/// Gram matrix `lambda lambda^*` of the vectors `x_n`.
pub fn gram(lambda: &CMat) -> CMat {
    lambda * lambda.adjoint()
}

/// `lambda * c` for `c c^T = I`; the product keeps `lambda lambda^T`.
pub fn refactor(lambda: &CMat, c_matrix: &CMat, tol: f64) -> Result<CMat> {
    if lambda.ncols() != c_matrix.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "lambda has {} columns, parameter has {} rows",
            lambda.ncols(),
            c_matrix.nrows()
        )));
    }
    linalg::ensure_finite(c_matrix, "refactor parameter")?;
    let k = c_matrix.nrows();
    let dev = frobenius(&(c_matrix * c_matrix.transpose() - CMat::identity(k, k)));
    if dev > tol * (k as f64).sqrt().max(1.0) {
        return Err(Error::InvalidParameter(format!(
            "parameter is not complex orthogonal (||c c^T - I|| = {dev:e})"
        )));
    }
    Ok(lambda * c_matrix)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jspace::{pairwise_check, ProblemKind};
    use crate::linalg::{cmat, random_structured, rmat, StructureKind};

    const TOL: f64 = 1e-9;

    #[test]
    fn identity_factor() {
        let s = build_space(&CMat::identity(2, 2), &CMat::identity(2, 2), TOL).unwrap();
        assert_eq!(s.dim, 2);
        assert_eq!(s.degree, 1);
        let expected = rmat(&[&[0.0, 0.0], &[1.0, 0.0]]);
        assert!(frobenius(&(&s.a0 - expected)) < 1e-14);
        assert_eq!(s.defect(), 1);
    }

    #[test]
    fn zero_model() {
        let s = build_space(&CMat::zeros(3, 1), &CMat::zeros(3, 3), TOL).unwrap();
        assert_eq!(s.dim, 1);
        assert_eq!(s.domain_basis.ncols(), 0);
        assert_eq!(frobenius(&s.a0), 0.0);
        assert_eq!(s.defect(), 1);
    }

    #[test]
    fn rejects_mismatch_and_ill_defined() {
        assert!(matches!(
            build_space(&CMat::identity(2, 2), &CMat::zeros(2, 2), TOL),
            Err(Error::InconsistentInput(_))
        ));
        let l = rmat(&[&[1.0, 0.0], &[0.0, 0.0], &[0.0, 1.0]]);
        let g = &l * l.transpose();
        assert!(matches!(
            build_space(&l, &g, TOL),
            Err(Error::IllDefinedOperator(_))
        ));
    }

    fn check_model(lambda: &CMat, kind: Option<ProblemKind>) {
        let gamma = lambda * lambda.transpose();
        let s = build_space(lambda, &gamma, TOL).unwrap();
        let d = s.degree;
        let scale = frobenius(lambda).max(1.0);
        for k in 0..d {
            let diff = &s.a0 * s.x.column(k) - s.x.column(k + 1);
            assert!(linalg::vec_norm(&diff) <= 1e-9 * scale);
        }
        assert!(frobenius(&(&s.a0 * &s.p1 - &s.a0)) <= 1e-12 * frobenius(&s.a0).max(1.0));
        let forms = s.conj.form_matrix(&s.x, &s.x).unwrap();
        assert!(frobenius(&(forms - &gamma)) <= 1e-9 * frobenius(&gamma).max(1.0));
        if let Some(kind) = kind {
            assert!(pairwise_check(&s.conj, &s.a0, &s.domain_basis, kind, 1e-9).unwrap());
        }
    }

    #[test]
    fn invertible_factor_gives_codimension_one_domain() {
        for seed in 0..20 {
            let n = 2 + seed as usize % 5;
            let l = linalg::random_unitary(n, seed)
                * random_structured(StructureKind::Symmetric, n, seed);
            let g = &l * l.transpose();
            let s = build_space(&l, &g, TOL).unwrap();
            assert_eq!(s.domain_basis.ncols(), n - 1);
            assert_eq!(s.defect(), 1);
            assert!(linalg::sigma_min(&(&s.a0 * &s.domain_basis)).unwrap() > 1e-10);
            check_model(&l, None);
        }
    }

    #[test]
    fn moment_reproduction_for_generated_kinds() {
        for (kind, structure) in [
            (ProblemKind::A, StructureKind::Symmetric),
            (ProblemKind::B, StructureKind::Skew),
            (ProblemKind::C, StructureKind::ComplexOrthogonal),
        ] {
            for seed in 0..10 {
                let n = 4;
                let d = 3;
                let a = random_structured(structure, n, seed);
                let x0 = linalg::random_unit_vector(n, seed + 99);
                let mut cols = vec![x0];
                for k in 0..d {
                    let next = &a * &cols[k];
                    cols.push(next);
                }
                let x = CMat::from_columns(&cols);
                let gamma = x.transpose() * &x;
                let lambda = linalg::takagi(&gamma, TOL).unwrap().lambda;
                check_model(&lambda, Some(kind));
            }
        }
    }

    #[test]
    fn gram_examples() {
        assert_eq!(gram(&CMat::identity(3, 3)), CMat::identity(3, 3));
        let h = 1.0 / 2f64.sqrt();
        let l = cmat(&[&[(h, 0.0), (0.0, h)], &[(h, 0.0), (0.0, -h)]]);
        assert!(frobenius(&(gram(&l) - CMat::identity(2, 2))) < 1e-15);
        let rank_one = rmat(&[&[1.0, 2.0], &[2.0, 4.0]]);
        assert_eq!(linalg::rank(&gram(&rank_one), 0.0).unwrap(), 1);
        let g = gram(&linalg::random_unitary(4, 3));
        assert!(frobenius(&(&g - g.adjoint())) < 1e-14);
    }

    #[test]
    fn refactor_keeps_gamma() {
        let l = linalg::random_unitary(3, 8);
        assert_eq!(refactor(&l, &CMat::identity(3, 3), 1e-10).unwrap(), l);
        let flip = rmat(&[&[1.0, 0.0, 0.0], &[0.0, -1.0, 0.0], &[0.0, 0.0, 1.0]]);
        let r = refactor(&l, &flip, 1e-10).unwrap();
        assert_eq!(r.column(1), -l.column(1));
        for seed in 0..100 {
            let c = random_structured(StructureKind::ComplexOrthogonal, 3, seed);
            let r = refactor(&l, &c, 1e-10).unwrap();
            let diff = &r * r.transpose() - &l * l.transpose();
            assert!(frobenius(&diff) <= 1e-10);
        }
        let bad = CMat::identity(3, 3).scale(2.0);
        assert!(matches!(
            refactor(&l, &bad, 1e-10),
            Err(Error::InvalidParameter(_))
        ));
    }
}
