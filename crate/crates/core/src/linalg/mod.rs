//! Dense complex matrix kernel.
//!
//! Matrices are `nalgebra` dynamic matrices over `Complex64`. Everything here
//! is a pure function of its inputs. Rank decisions share one convention: a
//! singular value counts as nonzero when it exceeds
//! `max(rows, cols) * sigma_max * factor`, with `factor = 1e-12` unless the
//! caller passes a positive `tol`, which then replaces the factor.

mod jacobi;
mod quadratic;
mod random;
mod takagi;

pub use quadratic::{solve_quadratic, RootSet, COEFF_ZERO_TOL};
pub use random::{random_structured, random_unit_vector, random_unitary, StructureKind};
pub use takagi::{takagi, TakagiFactorization};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CNum = Complex64;
pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

/// Relative factor of the default numerical-rank cutoff.
pub const DEFAULT_RANK_FACTOR: f64 = 1e-12;

const SVD_MAX_ITER: usize = 10_000;

pub fn c(re: f64, im: f64) -> CNum {
    Complex64::new(re, im)
}

/// Builds a matrix from row-major nested slices of `(re, im)` pairs.
pub fn cmat(rows: &[&[(f64, f64)]]) -> CMat {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, |r| r.len());
    CMat::from_fn(nrows, ncols, |i, j| {
        let (re, im) = rows[i][j];
        c(re, im)
    })
}

/// Builds a matrix from row-major nested slices of real entries.
pub fn rmat(rows: &[&[f64]]) -> CMat {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, |r| r.len());
    CMat::from_fn(nrows, ncols, |i, j| c(rows[i][j], 0.0))
}

pub fn cvec(entries: &[(f64, f64)]) -> CVec {
    CVec::from_iterator(entries.len(), entries.iter().map(|&(re, im)| c(re, im)))
}

pub fn basis_vector(n: usize, k: usize) -> CVec {
    let mut v = CVec::zeros(n);
    v[k] = c(1.0, 0.0);
    v
}

pub fn frobenius(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn vec_norm(v: &CVec) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn is_finite(m: &CMat) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

pub fn ensure_finite(m: &CMat, what: &'static str) -> Result<()> {
    if is_finite(m) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

pub fn ensure_square(m: &CMat) -> Result<usize> {
    if m.nrows() == m.ncols() {
        Ok(m.nrows())
    } else {
        Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        })
    }
}

/// Hermitian inner product `(x, y) = sum x_j conj(y_j)`, linear in `x`.
pub fn inner(x: &CVec, y: &CVec) -> CNum {
    x.iter().zip(y.iter()).map(|(a, b)| a * b.conj()).sum()
}

pub fn rank_cutoff(rows: usize, cols: usize, sigma_max: f64, tol: f64) -> f64 {
    let factor = if tol > 0.0 { tol } else { DEFAULT_RANK_FACTOR };
    rows.max(cols) as f64 * sigma_max * factor
}

/// Thin singular value decomposition `m = u * diag(sigma) * v^H`.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: CMat,
    pub sigma: Vec<f64>,
    pub v: CMat,
}

impl Svd {
    pub fn sigma_max(&self) -> f64 {
        self.sigma.first().copied().unwrap_or(0.0)
    }

    pub fn rank(&self, tol: f64) -> usize {
        let cutoff = rank_cutoff(self.u.nrows(), self.v.nrows(), self.sigma_max(), tol);
        self.sigma.iter().filter(|&&s| s > cutoff).count()
    }
}

/// Singular value decomposition with descending, nonnegative `sigma` and
/// orthonormal columns in `u` (rows x k) and `v` (cols x k), `k = min(rows, cols)`.
pub fn svd(m: &CMat) -> Result<Svd> {
    ensure_finite(m, "svd input")?;
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return Ok(Svd {
            u: CMat::zeros(rows, 0),
            sigma: Vec::new(),
            v: CMat::zeros(cols, 0),
        });
    }
    // The bidiagonal iteration occasionally returns an inaccurate factorization
    // for rank-deficient input. Check the reconstruction, retry with a looser
    // convergence threshold, and fall back to one-sided Jacobi.
    let scale = frobenius(m).max(f64::MIN_POSITIVE);
    let accurate = |u: &CMat, v: &CMat, s: &DVector<f64>| {
        let mut us = u.clone();
        for (k, sk) in s.iter().enumerate() {
            us.column_mut(k).scale_mut(*sk);
        }
        frobenius(&(us * v.adjoint() - m)) <= 1e-12 * scale * (rows.max(cols) as f64)
    };
    let (u_raw, v_raw, sv) = [5.0, 50.0]
        .iter()
        .find_map(|&factor| {
            let dec = nalgebra::SVD::try_new_unordered(
                m.clone(),
                true,
                true,
                factor * f64::EPSILON,
                SVD_MAX_ITER,
            )?;
            let u = dec.u.expect("u requested");
            let v = dec.v_t.expect("v requested").adjoint();
            let s = dec.singular_values;
            accurate(&u, &v, &s).then_some((u, v, s))
        })
        .or_else(|| {
            let (u, v, s) = jacobi::jacobi_svd(m);
            accurate(&u, &v, &s).then_some((u, v, s))
        })
        .ok_or_else(|| {
            Error::DecompositionFailed(format!("svd did not converge on {rows}x{cols} input"))
        })?;

    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|&a, &b| sv[b].total_cmp(&sv[a]).then(a.cmp(&b)));

    let k = order.len();
    let mut u = CMat::zeros(rows, k);
    let mut v = CMat::zeros(cols, k);
    let mut sigma = Vec::with_capacity(k);
    for (dst, &src) in order.iter().enumerate() {
        u.set_column(dst, &u_raw.column(src));
        v.set_column(dst, &v_raw.column(src));
        sigma.push(sv[src].max(0.0));
    }
    Ok(Svd { u, sigma, v })
}

/// Numerical rank and an orthonormal basis (as columns) of the nullspace.
pub fn rank_nullspace(m: &CMat, tol: f64) -> Result<(usize, CMat)> {
    let (rows, cols) = m.shape();
    if cols == 0 {
        return Ok((0, CMat::zeros(0, 0)));
    }
    // Pad to at least square so the right singular basis is complete.
    let padded;
    let target = if rows < cols {
        let mut p = CMat::zeros(cols, cols);
        p.view_mut((0, 0), (rows, cols)).copy_from(m);
        padded = p;
        &padded
    } else {
        m
    };
    let dec = svd(target)?;
    let cutoff = rank_cutoff(rows, cols, dec.sigma_max(), tol);
    let rank = dec.sigma.iter().filter(|&&s| s > cutoff).count();
    let null = dec.v.columns(rank, cols - rank).into_owned();
    Ok((rank, null))
}

pub fn rank(m: &CMat, tol: f64) -> Result<usize> {
    Ok(svd(m)?.rank(tol))
}

/// Orthonormal basis of the column space.
pub fn orthonormal_range(m: &CMat, tol: f64) -> Result<CMat> {
    let dec = svd(m)?;
    let r = dec.rank(tol);
    Ok(dec.u.columns(0, r).into_owned())
}

/// Orthogonal projector onto the span of the (independent) columns of `basis`.
pub fn projector(basis: &CMat) -> Result<CMat> {
    let n = basis.nrows();
    let cols = basis.ncols();
    if cols == 0 {
        return Ok(CMat::zeros(n, n));
    }
    let dec = svd(basis)?;
    let r = dec.rank(0.0);
    if r < cols {
        return Err(Error::InvalidBasis { rank: r, cols });
    }
    let q = dec.u.columns(0, r);
    let p = q * q.adjoint();
    Ok(hermitian_part(&p))
}

/// `(m + m^H) / 2`.
pub fn hermitian_part(m: &CMat) -> CMat {
    (m + m.adjoint()).scale(0.5)
}

/// Moore-Penrose pseudoinverse with the shared rank convention.
pub fn pseudoinverse(m: &CMat, tol: f64) -> Result<CMat> {
    let (rows, cols) = m.shape();
    let dec = svd(m)?;
    let r = dec.rank(tol);
    let mut out = CMat::zeros(cols, rows);
    for k in 0..r {
        let vk = dec.v.column(k);
        let uk = dec.u.column(k);
        out += (vk * uk.adjoint()).scale(1.0 / dec.sigma[k]);
    }
    Ok(out)
}

/// Smallest singular value; zero for empty input.
pub fn sigma_min(m: &CMat) -> Result<f64> {
    Ok(svd(m)?.sigma.last().copied().unwrap_or(0.0))
}
