//! Extensions of partially defined operators to the whole space.
//!
//! An operator on a subspace `D` is given as a square matrix `N` with
//! `N = N p1`, where `p1` is the orthogonal projector onto `D`; `p2 = I - p1`
//! projects onto the complement. With `Jx = c conj(x)` the identities
//! `J M^* J = c M^T conj(c)` and `J P_F J = P_{JF}` turn the operator formulas
//! into matrix expressions:
//!
//! * J-self-adjoint extension: `N p1 + (c N^T conj(c) + S) p2`
//! * J-skew-self-adjoint extension: `N p1 + (-c N^T conj(c) + S) p2`
//!
//! where `S` maps the complement into its J-image and is J-self-adjoint
//! (resp. J-skew-self-adjoint). Since `N = N p1`, `N^T = conj(p1) N^T`.
//!
//! For a J-isometric `V` with a one-dimensional complement spanned by `u`, the
//! J-isometric extensions are `W = N p1 + (lambda v + J t) u^H` with `v`
//! spanning the complement of `J R(V)`, `t = (V^{-1})^* p1 J u`, and `lambda` a
//! root of `[v,v] lambda^2 + 2 (v, t) lambda + conj([t,t]) - [u,u] = 0`.
//!
//! Naming: here "domain" is always the subspace where the input operator is
//! defined and "complement" its orthogonal complement, for all three kinds.

use crate::error::{Error, Result};
use crate::jspace::{self, Conjugation, ProblemKind, DEFAULT_STRUCTURE_TOL};
use crate::linalg::{self, frobenius, inner, CMat, CNum, CVec, RootSet};

#[derive(Debug, Clone)]
pub struct ExtensionInput {
    pub n_matrix: CMat,
    pub p1: CMat,
    pub conj: Conjugation,
}

impl ExtensionInput {
    pub fn new(n_matrix: CMat, p1: CMat, conj: Conjugation) -> Result<Self> {
        let n = linalg::ensure_square(&n_matrix)?;
        linalg::ensure_square(&p1)?;
        linalg::ensure_finite(&n_matrix, "operator")?;
        linalg::ensure_finite(&p1, "domain projector")?;
        if p1.nrows() != n || conj.dim() != n {
            return Err(Error::DimensionMismatch(format!(
                "operator is {n}x{n}, projector {}x{}, conjugation on C^{}",
                p1.nrows(),
                p1.ncols(),
                conj.dim()
            )));
        }
        let proj_err = frobenius(&(&p1 * &p1 - &p1)) + frobenius(&(&p1 - p1.adjoint()));
        if proj_err > 1e-10 {
            return Err(Error::InvalidParameter(format!(
                "domain matrix is not an orthogonal projector (deviation {proj_err:e})"
            )));
        }
        let off_domain = frobenius(&(&n_matrix * &p1 - &n_matrix));
        if off_domain > 1e-12 * (1.0 + frobenius(&n_matrix)) * n as f64 {
            return Err(Error::InvalidParameter(format!(
                "operator does not vanish off its domain (||N p1 - N|| = {off_domain:e})"
            )));
        }
        Ok(Self { n_matrix, p1, conj })
    }

    /// Builds the input from an operator sampled on domain basis vectors:
    /// `images` column `k` is the image of `domain_basis` column `k`.
    pub fn from_images(domain_basis: &CMat, images: &CMat, conj: Conjugation) -> Result<Self> {
        if domain_basis.shape() != images.shape() {
            return Err(Error::DimensionMismatch(
                "domain basis and images must have the same shape".into(),
            ));
        }
        let p1 = linalg::projector(domain_basis)?;
        let n_matrix = images * linalg::pseudoinverse(domain_basis, 0.0)? * &p1;
        Self::new(n_matrix, p1, conj)
    }

    pub fn dim(&self) -> usize {
        self.n_matrix.nrows()
    }

    pub fn p2(&self) -> CMat {
        CMat::identity(self.dim(), self.dim()) - &self.p1
    }

    pub fn domain_basis(&self) -> Result<CMat> {
        linalg::orthonormal_range(&self.p1, 0.0)
    }

    pub fn complement_basis(&self) -> Result<CMat> {
        Ok(linalg::rank_nullspace(&self.p1, 0.0)?.1)
    }

    /// `c conj(q) core q^H` for an orthonormal complement basis `q`: a map
    /// from the complement into its J-image. It is J-self-adjoint when `core`
    /// is symmetric and J-skew-self-adjoint when `core` is antisymmetric.
    pub fn parameter(&self, core: &CMat) -> Result<CMat> {
        let q = self.complement_basis()?;
        if core.shape() != (q.ncols(), q.ncols()) {
            return Err(Error::DimensionMismatch(format!(
                "parameter core must be {k}x{k}",
                k = q.ncols()
            )));
        }
        Ok(self.conj.apply_columns(&q)? * core * q.adjoint())
    }

    fn validate_parameter(&self, s: &CMat, kind: ProblemKind) -> Result<()> {
        let n = self.dim();
        if s.shape() != (n, n) {
            return Err(Error::DimensionMismatch(format!(
                "parameter must be {n}x{n}, got {}x{}",
                s.nrows(),
                s.ncols()
            )));
        }
        linalg::ensure_finite(s, "extension parameter")?;
        let tol = 1e-12 * (1.0 + frobenius(s)) * n as f64;
        let js = self.conj.j_adjoint(s)?;
        let class_dev = match kind {
            ProblemKind::A => frobenius(&(s - &js)),
            ProblemKind::B => frobenius(&(s + &js)),
            ProblemKind::C => unreachable!("no parameter for J-unitary extensions"),
        };
        if class_dev > tol {
            return Err(Error::InvalidParameter(format!(
                "S is not J-{}self-adjoint (deviation {class_dev:e})",
                if kind == ProblemKind::B { "skew-" } else { "" }
            )));
        }
        let p2 = self.p2();
        let jp2 = self.conj.j_adjoint(&p2)?;
        let support_dev = frobenius(&(&jp2 * s * &p2 - s));
        if support_dev > tol {
            return Err(Error::InvalidParameter(format!(
                "S must map the complement into its J-image (deviation {support_dev:e})"
            )));
        }
        Ok(())
    }

    fn require_restriction(&self, kind: ProblemKind) -> Result<CMat> {
        let basis = self.domain_basis()?;
        let dev = jspace::pairwise_deviation(&self.conj, &self.n_matrix, &basis, kind)?;
        if dev > DEFAULT_STRUCTURE_TOL {
            let class = match kind {
                ProblemKind::A => "J-symmetric",
                ProblemKind::B => "J-skew-symmetric",
                ProblemKind::C => "J-isometric",
            };
            return Err(Error::Precondition(format!(
                "operator is not {class} on its domain (deviation {dev:e})"
            )));
        }
        Ok(basis)
    }
}

fn extend_with_sign(inp: &ExtensionInput, s: Option<&CMat>, kind: ProblemKind) -> Result<CMat> {
    inp.require_restriction(kind)?;
    if let Some(s) = s {
        inp.validate_parameter(s, kind)?;
    }
    let sign = if kind == ProblemKind::B { -1.0 } else { 1.0 };
    let mut tail = inp.conj.j_adjoint(&inp.n_matrix)?.scale(sign);
    if let Some(s) = s {
        tail += s;
    }
    Ok(&inp.n_matrix * &inp.p1 + tail * inp.p2())
}

/// J-self-adjoint extension of a J-symmetric operator; `s = None` means `S = 0`.
pub fn extend_selfadjoint(inp: &ExtensionInput, s: Option<&CMat>) -> Result<CMat> {
    extend_with_sign(inp, s, ProblemKind::A)
}

/// J-skew-self-adjoint extension of a J-skew-symmetric operator.
pub fn extend_skew(inp: &ExtensionInput, s: Option<&CMat>) -> Result<CMat> {
    extend_with_sign(inp, s, ProblemKind::B)
}

/// Inverse of the parameter map: `(ext - ext_0) p2`, where `ext_0` is the `S = 0` extension.
pub fn recover_parameter(
    inp: &ExtensionInput,
    extension: &CMat,
    kind: ProblemKind,
) -> Result<CMat> {
    let base = match kind {
        ProblemKind::A => extend_selfadjoint(inp, None)?,
        ProblemKind::B => extend_skew(inp, None)?,
        ProblemKind::C => {
            return Err(Error::InvalidParameter(
                "J-unitary extensions are parametrized by roots, not S".into(),
            ))
        }
    };
    Ok((extension - base) * inp.p2())
}

#[derive(Debug, Clone)]
pub enum ExtensionSet {
    /// One extension per distinct root; empty when there is no root.
    Listed { extensions: Vec<CMat> },
    /// Every complex `lambda` works: `base + lambda * direction`.
    Pencil { base: CMat, direction: CMat },
}

#[derive(Debug, Clone)]
pub struct UnitaryExtensionFamily {
    pub a: CNum,
    pub b: CNum,
    pub c: CNum,
    pub u: CVec,
    pub v: CVec,
    pub t: CVec,
    pub roots: RootSet,
    pub double_root: bool,
    pub extensions: ExtensionSet,
    base_operator: CMat,
    jt: CVec,
}

impl UnitaryExtensionFamily {
    /// `N p1 + (lambda v + J t) u^H / |u|^2`.
    pub fn materialize(&self, lambda: CNum) -> CMat {
        let column = &self.v * lambda + &self.jt;
        let uu = inner(&self.u, &self.u).re;
        &self.base_operator + (column * self.u.adjoint()).unscale(uu)
    }

    /// Listed extensions, or the `lambda = 0` member of a pencil.
    pub fn representatives(&self) -> Vec<CMat> {
        match &self.extensions {
            ExtensionSet::Listed { extensions } => extensions.clone(),
            ExtensionSet::Pencil { base, .. } => vec![base.clone()],
        }
    }
}

/// The J-unitary extensions of a J-isometric operator with a one-dimensional
/// complement, using unit vectors from numerical nullspaces for `u` and `v`.
pub fn unitary_extension_family(inp: &ExtensionInput, tol: f64) -> Result<UnitaryExtensionFamily> {
    let n = inp.dim();
    let domain = inp.require_restriction(ProblemKind::C)?;
    let k = domain.ncols();
    let image_range = injective_range(&inp.n_matrix, &domain)?;
    if n - k != 1 {
        return Err(Error::UnsupportedDefect(n - k));
    }
    let u = inp.complement_basis()?.column(0).into_owned();
    let j_range = inp.conj.apply_columns(&image_range)?;
    let (_, v_space) = linalg::rank_nullspace(&j_range.adjoint(), 0.0)?;
    if v_space.ncols() != 1 {
        return Err(Error::DecompositionFailed(format!(
            "complement of J R(V) has dimension {}, expected 1",
            v_space.ncols()
        )));
    }
    let v = v_space.column(0).into_owned();
    family_for_vectors(inp, u, v, tol)
}

/// Same as [`unitary_extension_family`] with caller-chosen nonzero `u` in the
/// complement of the domain and `v` in the complement of `J R(V)`.
pub fn family_for_vectors(
    inp: &ExtensionInput,
    u: CVec,
    v: CVec,
    tol: f64,
) -> Result<UnitaryExtensionFamily> {
    let n = inp.dim();
    let domain = inp.require_restriction(ProblemKind::C)?;
    injective_range(&inp.n_matrix, &domain)?;
    if n - domain.ncols() != 1 {
        return Err(Error::UnsupportedDefect(n - domain.ncols()));
    }
    if u.len() != n || v.len() != n {
        return Err(Error::DimensionMismatch(
            "u and v must live in the operator space".into(),
        ));
    }
    let j = &inp.conj;
    let ju = j.apply(&u)?;
    let t = linalg::pseudoinverse(&inp.n_matrix, 0.0)?.adjoint() * (&inp.p1 * ju);
    let jt = j.apply(&t)?;

    let a = j.form(&v, &v)?;
    let b = inner(&v, &t) * 2.0;
    let c = j.form(&t, &t)?.conj() - j.form(&u, &u)?;
    let roots = linalg::solve_quadratic(a, b, c);

    let mut family = UnitaryExtensionFamily {
        a,
        b,
        c,
        u,
        v,
        t,
        roots,
        double_root: matches!(roots, RootSet::TwoRoots { double: true, .. }),
        extensions: ExtensionSet::Listed {
            extensions: Vec::new(),
        },
        base_operator: &inp.n_matrix * &inp.p1,
        jt,
    };
    family.extensions = match roots {
        RootSet::AllComplex => {
            let uu = inner(&family.u, &family.u).re;
            ExtensionSet::Pencil {
                base: family.materialize(CNum::new(0.0, 0.0)),
                direction: (&family.v * family.u.adjoint()).unscale(uu),
            }
        }
        _ => ExtensionSet::Listed {
            extensions: roots
                .distinct()
                .into_iter()
                .map(|r| family.materialize(r))
                .collect(),
        },
    };
    for w in family.representatives() {
        let dev = jspace::structure_deviation(j, &w, ProblemKind::C)?;
        if dev > tol.max(DEFAULT_STRUCTURE_TOL) {
            return Err(Error::DecompositionFailed(format!(
                "constructed extension misses J-unitarity by {dev:e}"
            )));
        }
    }
    Ok(family)
}

/// Orthonormal basis of `R(V)`, or `NotInvertible` when `V` is not injective.
fn injective_range(n_matrix: &CMat, domain: &CMat) -> Result<CMat> {
    let k = domain.ncols();
    if k == 0 {
        return Ok(CMat::zeros(n_matrix.nrows(), 0));
    }
    let image = n_matrix * domain;
    let dec = linalg::svd(&image)?;
    if dec.sigma_max() == 0.0 || dec.rank(0.0) < k {
        return Err(Error::NotInvertible);
    }
    Ok(dec.u.columns(0, k).into_owned())
}
