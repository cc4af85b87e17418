//! Conjugations on `C^n`, the bilinear J-form and the operator classes it defines.
//!
//! A conjugation is stored as a unitary symmetric matrix `c` acting by
//! `Jx = c conj(x)`. In coordinates:
//!
//! * `[x, y]_J = (x, Jy) = x^T conj(c) y`
//! * `J M^* J = c M^T conj(c)`
//!
//! so J-self-adjointness of a matrix `a` reads `a = c a^T conj(c)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, frobenius, CMat, CNum, CVec};

/// Relative tolerance of the structure predicates.
pub const DEFAULT_STRUCTURE_TOL: f64 = 1e-9;

const CONJUGATION_TOL: f64 = 1e-12;

/// The three moment problems and the matching operator classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ProblemKind {
    /// J-self-adjoint: `A = J A^* J`.
    A,
    /// J-skew-self-adjoint: `A = -J A^* J`.
    B,
    /// J-unitary: `A^{-1} = J A^* J`.
    C,
}

impl ProblemKind {
    pub const ALL: [ProblemKind; 3] = [ProblemKind::A, ProblemKind::B, ProblemKind::C];

    pub fn as_str(self) -> &'static str {
        match self {
            ProblemKind::A => "A",
            ProblemKind::B => "B",
            ProblemKind::C => "C",
        }
    }
}

impl std::fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for ProblemKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "A" | "a" => Ok(ProblemKind::A),
            "B" | "b" => Ok(ProblemKind::B),
            "C" | "c" => Ok(ProblemKind::C),
            other => Err(format!(
                "unknown problem kind {other:?}, expected A, B or C"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Conjugation {
    c: CMat,
}

impl Conjugation {
    /// Validates that `c` is unitary and symmetric.
    pub fn new(c: CMat) -> Result<Self> {
        let n = linalg::ensure_square(&c)?;
        linalg::ensure_finite(&c, "conjugation")?;
        let unitarity = frobenius(&(&c * c.adjoint() - CMat::identity(n, n)));
        if unitarity > CONJUGATION_TOL * (n.max(1) as f64) {
            return Err(Error::InvalidConjugation(format!(
                "matrix is not unitary (deviation {unitarity:e})"
            )));
        }
        let asym = frobenius(&(&c - c.transpose()));
        if asym > CONJUGATION_TOL * (n.max(1) as f64) {
            return Err(Error::InvalidConjugation(format!(
                "matrix is not symmetric (deviation {asym:e})"
            )));
        }
        Ok(Self { c })
    }

    /// Componentwise complex conjugation.
    pub fn canonical(n: usize) -> Self {
        Self {
            c: CMat::identity(n, n),
        }
    }

    /// `J(a e0 + b e1) = conj(b) e0 + conj(a) e1` on `C^2`.
    pub fn swap() -> Self {
        Self {
            c: linalg::rmat(&[&[0.0, 1.0], &[1.0, 0.0]]),
        }
    }

    /// `U U^T` for a seeded random unitary `U`.
    pub fn random(n: usize, seed: u64) -> Self {
        let u = linalg::random_unitary(n, seed);
        let c = &u * u.transpose();
        // exact symmetry; unitarity is preserved to rounding
        let c = (&c + c.transpose()).scale(0.5);
        Self { c }
    }

    pub fn dim(&self) -> usize {
        self.c.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.c
    }

    pub fn is_canonical(&self) -> bool {
        self.c == CMat::identity(self.dim(), self.dim())
    }

    fn check_dim(&self, n: usize, what: &str) -> Result<()> {
        if n == self.dim() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch(format!(
                "{what} has dimension {n}, conjugation acts on C^{}",
                self.dim()
            )))
        }
    }

    pub fn apply(&self, x: &CVec) -> Result<CVec> {
        self.check_dim(x.len(), "vector")?;
        Ok(&self.c * x.conjugate())
    }

    /// `J` applied to each column.
    pub fn apply_columns(&self, x: &CMat) -> Result<CMat> {
        self.check_dim(x.nrows(), "matrix")?;
        Ok(&self.c * x.conjugate())
    }

    /// `[x, y]_J`.
    pub fn form(&self, x: &CVec, y: &CVec) -> Result<CNum> {
        self.check_dim(x.len(), "left vector")?;
        self.check_dim(y.len(), "right vector")?;
        Ok((x.transpose() * self.c.conjugate() * y)[(0, 0)])
    }

    /// Matrix of J-form values `[x_i, y_j]` between the columns of `x` and `y`.
    pub fn form_matrix(&self, x: &CMat, y: &CMat) -> Result<CMat> {
        self.check_dim(x.nrows(), "left block")?;
        self.check_dim(y.nrows(), "right block")?;
        Ok(x.transpose() * self.c.conjugate() * y)
    }

    /// `J M^* J` in coordinates.
    pub fn j_adjoint(&self, m: &CMat) -> Result<CMat> {
        self.check_dim(m.nrows(), "operator")?;
        self.check_dim(m.ncols(), "operator")?;
        Ok(&self.c * m.transpose() * self.c.conjugate())
    }
}

pub fn apply_j(j: &Conjugation, x: &CVec) -> Result<CVec> {
    j.apply(x)
}

pub fn j_form(j: &Conjugation, x: &CVec, y: &CVec) -> Result<CNum> {
    j.form(x, y)
}

/// Relative Frobenius deviation from the class identity of `kind`:
/// `||lhs - rhs||_F / (1 + ||a||_F)`.
pub fn structure_deviation(j: &Conjugation, a: &CMat, kind: ProblemKind) -> Result<f64> {
    let n = linalg::ensure_square(a)?;
    let ja = j.j_adjoint(a)?;
    let diff = match kind {
        ProblemKind::A => a - ja,
        ProblemKind::B => a + ja,
        ProblemKind::C => ja * a - CMat::identity(n, n),
    };
    Ok(frobenius(&diff) / (1.0 + frobenius(a)))
}

pub fn structure_check(j: &Conjugation, a: &CMat, kind: ProblemKind, tol: f64) -> Result<bool> {
    Ok(structure_deviation(j, a, kind)? <= tol)
}

/// Checks J-symmetry (A), J-skew-symmetry (B) or J-isometry (C) of `a`
/// restricted to the span of the columns of `domain_basis`.
pub fn pairwise_check(
    j: &Conjugation,
    a: &CMat,
    domain_basis: &CMat,
    kind: ProblemKind,
    tol: f64,
) -> Result<bool> {
    Ok(pairwise_deviation(j, a, domain_basis, kind)? <= tol)
}

pub fn pairwise_deviation(
    j: &Conjugation,
    a: &CMat,
    domain_basis: &CMat,
    kind: ProblemKind,
) -> Result<f64> {
    linalg::ensure_square(a)?;
    if domain_basis.nrows() != a.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "domain basis has {} rows, operator is {}x{}",
            domain_basis.nrows(),
            a.nrows(),
            a.ncols()
        )));
    }
    if domain_basis.ncols() == 0 {
        return Ok(0.0);
    }
    let image = a * domain_basis;
    let basis_scale = frobenius(domain_basis).powi(2);
    let a_norm = frobenius(a);
    let (diff, scale) = match kind {
        ProblemKind::A => (
            j.form_matrix(&image, domain_basis)? - j.form_matrix(domain_basis, &image)?,
            1.0 + a_norm,
        ),
        ProblemKind::B => (
            j.form_matrix(&image, domain_basis)? + j.form_matrix(domain_basis, &image)?,
            1.0 + a_norm,
        ),
        ProblemKind::C => (
            j.form_matrix(&image, &image)? - j.form_matrix(domain_basis, domain_basis)?,
            (1.0 + a_norm).powi(2),
        ),
    };
    Ok(frobenius(&diff) / (scale * basis_scale))
}
