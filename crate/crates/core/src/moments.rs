//! Moment problems and the necessary-condition battery.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::jspace::ProblemKind;
use crate::linalg::{self, max_abs, CMat};

/// Relative tolerance of the feasibility checks.
pub const DEFAULT_MOMENT_TOL: f64 = 1e-9;

/// Moment table `gamma[(n, m)] = s_{n,m}` for `0 <= n, m <= degree`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentProblem {
    pub kind: ProblemKind,
    pub degree: usize,
    pub gamma: CMat,
}

impl MomentProblem {
    pub fn new(kind: ProblemKind, gamma: CMat) -> Result<Self> {
        let n = linalg::ensure_square(&gamma)?;
        linalg::ensure_finite(&gamma, "moment matrix")?;
        if n < 2 {
            return Err(Error::InvalidProblem(format!(
                "moment matrix must be at least 2x2 (degree >= 1), got {n}x{n}"
            )));
        }
        Ok(Self {
            kind,
            degree: n - 1,
            gamma,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Solvable,
    SolvableNondegenerate,
    NecessaryFailed,
    Undecided,
}

#[derive(Debug, Clone, Serialize)]
pub struct FeasibilityReport {
    pub symmetric: bool,
    pub shift_condition: bool,
    pub det_gamma_nonzero: bool,
    pub kernel_inclusion: Option<bool>,
    #[serde(skip)]
    pub lambda_used: Option<CMat>,
    pub verdict: Verdict,
}

impl FeasibilityReport {
    pub fn is_solvable(&self) -> bool {
        matches!(
            self.verdict,
            Verdict::Solvable | Verdict::SolvableNondegenerate
        )
    }
}

pub fn check_symmetric(gamma: &CMat, tol: f64) -> Result<bool> {
    linalg::ensure_square(gamma)?;
    let dev = max_abs(&(gamma - gamma.transpose()));
    Ok(dev <= tol * (1.0 + max_abs(gamma)))
}

/// The shift identity of `kind` over all `0 <= n, m <= d - 1`:
/// A: `s[n+1][m] = s[n][m+1]`, B: `s[n+1][m] = -s[n][m+1]`, C: `s[n+1][m+1] = s[n][m]`.
pub fn check_shift_condition(kind: ProblemKind, gamma: &CMat, tol: f64) -> Result<bool> {
    Ok(shift_violation(kind, gamma)? <= tol * (1.0 + max_abs(gamma)))
}

/// Largest absolute violation of the shift identity.
pub fn shift_violation(kind: ProblemKind, gamma: &CMat) -> Result<f64> {
    let size = linalg::ensure_square(gamma)?;
    if size < 2 {
        return Err(Error::InvalidProblem(
            "shift condition needs a moment matrix of size >= 2".into(),
        ));
    }
    let d = size - 1;
    let upper = gamma.view((1, 0), (d, d));
    let right = gamma.view((0, 1), (d, d));
    let diff = match kind {
        ProblemKind::A => upper - right,
        ProblemKind::B => upper + right,
        ProblemKind::C => gamma.view((1, 1), (d, d)) - gamma.view((0, 0), (d, d)),
    };
    Ok(max_abs(&diff))
}

/// `Ker L1^T ⊆ Ker L2^T`, with `L1` the first and `L2` the last `d` rows of `lambda`.
pub fn check_kernel_inclusion(lambda: &CMat, tol: f64) -> Result<bool> {
    let rows = lambda.nrows();
    if rows < 2 {
        return Err(Error::InvalidProblem(format!(
            "kernel inclusion needs at least 2 rows, got {rows}"
        )));
    }
    let d = rows - 1;
    let first = lambda.rows(0, d);
    let last = lambda.rows(1, d);
    let (_, null) = linalg::rank_nullspace(&first.transpose(), 0.0)?;
    let bound = tol * (1.0 + linalg::frobenius(&last.into_owned()));
    let image = last.transpose() * &null;
    Ok(image
        .column_iter()
        .all(|col| col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt() <= bound))
}

/// Runs the necessary conditions and, if they hold, tries to certify
/// sufficiency with a factorization satisfying kernel inclusion.
pub fn feasibility(
    p: &MomentProblem,
    user_lambda: Option<&CMat>,
    tol: f64,
) -> Result<FeasibilityReport> {
    let gamma = &p.gamma;
    let symmetric = check_symmetric(gamma, tol)?;
    let shift_condition = check_shift_condition(p.kind, gamma, tol)?;
    let dec = linalg::svd(gamma)?;
    let cutoff = linalg::rank_cutoff(gamma.nrows(), gamma.ncols(), dec.sigma_max(), 0.0);
    let det_gamma_nonzero = dec.sigma.last().is_some_and(|&s| s > cutoff);

    let mut report = FeasibilityReport {
        symmetric,
        shift_condition,
        det_gamma_nonzero,
        kernel_inclusion: None,
        lambda_used: None,
        verdict: Verdict::NecessaryFailed,
    };
    if !symmetric || !shift_condition {
        return Ok(report);
    }

    if det_gamma_nonzero {
        let lambda = match user_lambda {
            Some(l) => {
                check_factorizes(l, gamma, tol)?;
                l.clone()
            }
            None => linalg::takagi(gamma, tol)?.lambda,
        };
        // independent rows of lambda make L1^T injective
        report.kernel_inclusion = Some(true);
        report.lambda_used = Some(lambda);
        report.verdict = Verdict::SolvableNondegenerate;
        return Ok(report);
    }

    let lambda = match user_lambda {
        Some(l) => {
            check_factorizes(l, gamma, tol)?;
            l.clone()
        }
        None => linalg::takagi(gamma, tol)?.truncated_lambda(),
    };
    let inclusion = check_kernel_inclusion(&lambda, tol)?;
    report.kernel_inclusion = Some(inclusion);
    report.lambda_used = Some(lambda);
    report.verdict = if inclusion {
        Verdict::Solvable
    } else {
        Verdict::Undecided
    };
    Ok(report)
}

/// Errors unless `lambda lambda^T = gamma` within `tol` relative.
pub fn check_factorizes(lambda: &CMat, gamma: &CMat, tol: f64) -> Result<()> {
    if lambda.nrows() != gamma.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "factor has {} rows, moment matrix is {}x{}",
            lambda.nrows(),
            gamma.nrows(),
            gamma.ncols()
        )));
    }
    linalg::ensure_finite(lambda, "factor")?;
    let dev = linalg::frobenius(&(lambda * lambda.transpose() - gamma));
    let scale = linalg::frobenius(gamma).max(1.0);
    if dev > tol * scale {
        return Err(Error::InconsistentInput(format!(
            "lambda lambda^T differs from gamma by {dev:e}"
        )));
    }
    Ok(())
}
