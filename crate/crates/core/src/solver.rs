//! The solving pipeline, solution verification and the seeded instance generator.
//!
//! `solve` runs feasibility, factorizes the moment matrix, builds the model
//! space with its partial shift, extends the shift to an operator of the
//! requested class and verifies the result by recomputing the moments.

use serde::{Deserialize, Serialize};

use crate::construct::{build_space, ModelSpace};
use crate::error::{Error, Result};
use crate::extend::{
    extend_selfadjoint, extend_skew, unitary_extension_family, ExtensionInput, ExtensionSet,
};
use crate::jspace::{structure_deviation, Conjugation, ProblemKind};
use crate::linalg::{self, max_abs, CMat, CVec, StructureKind};
use crate::moments::{feasibility, MomentProblem, Verdict, DEFAULT_MOMENT_TOL};

/// Relative tolerance for recomputed moments and the structure check.
pub const DEFAULT_VERIFY_TOL: f64 = 1e-8;
/// Relative rank threshold for the Krylov spans used by `classify`.
pub const KRYLOV_RANK_TOL: f64 = 1e-10;
/// Attempts made by the generator before giving up.
pub const GENERATION_ATTEMPTS: usize = 20;
/// Smallest singular value required of nondegenerate generated moment matrices.
pub const NONDEGENERATE_SIGMA_MIN: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Classification {
    Canonical,
    AlmostCanonical,
    Neither,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub max_moment_error: f64,
    pub structure_error: f64,
    pub krylov_rank: usize,
    pub extended_krylov_rank: usize,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub kind: ProblemKind,
    pub dim: usize,
    pub a: CMat,
    pub x0: CVec,
    pub conj: Conjugation,
    pub classification: Classification,
    pub report: VerificationReport,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RootChoice {
    Index(usize),
    All,
}

#[derive(Debug, Clone)]
pub struct SolveOptions {
    /// Verification tolerance.
    pub tol: f64,
    /// Tolerance of the feasibility checks and factorization consistency.
    pub feasibility_tol: f64,
    pub user_lambda: Option<CMat>,
    /// Extension parameter for kinds A and B, in model-space coordinates.
    pub s_matrix: Option<CMat>,
    pub root: RootChoice,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_VERIFY_TOL,
            feasibility_tol: DEFAULT_MOMENT_TOL,
            user_lambda: None,
            s_matrix: None,
            root: RootChoice::Index(0),
        }
    }
}

/// `gamma[(n, m)] = [a^n x0, a^m x0]` for `0 <= n, m <= d`.
pub fn moments_of(a: &CMat, x0: &CVec, d: usize, conj: &Conjugation) -> Result<CMat> {
    let n = linalg::ensure_square(a)?;
    if x0.len() != n || conj.dim() != n {
        return Err(Error::DimensionMismatch(format!(
            "operator is {n}x{n}, vector has length {}, conjugation acts on C^{}",
            x0.len(),
            conj.dim()
        )));
    }
    if d == 0 {
        return Err(Error::InvalidProblem("degree must be at least 1".into()));
    }
    let krylov = krylov_columns(a, x0, d);
    conj.form_matrix(&krylov, &krylov)
}

fn krylov_columns(a: &CMat, x0: &CVec, d: usize) -> CMat {
    let mut cols = Vec::with_capacity(d + 1);
    cols.push(x0.clone());
    for k in 0..d {
        let next = a * &cols[k];
        cols.push(next);
    }
    CMat::from_columns(&cols)
}

fn krylov_ranks(
    a: &CMat,
    x0: &CVec,
    d: usize,
    conj: &Conjugation,
    tol: f64,
) -> Result<(usize, usize)> {
    let krylov = krylov_columns(a, x0, d);
    let images = conj.apply_columns(&krylov)?;
    let mut extended = CMat::zeros(krylov.nrows(), 2 * krylov.ncols());
    extended.columns_mut(0, krylov.ncols()).copy_from(&krylov);
    extended
        .columns_mut(krylov.ncols(), krylov.ncols())
        .copy_from(&images);
    Ok((linalg::rank(&krylov, tol)?, linalg::rank(&extended, tol)?))
}

/// Canonical when the Krylov vectors span the space, almost canonical when
/// they do together with their J-images. `tol` is a relative rank threshold.
pub fn classify(
    a: &CMat,
    x0: &CVec,
    d: usize,
    conj: &Conjugation,
    tol: f64,
) -> Result<Classification> {
    moments_of(a, x0, d, conj)?;
    let (plain, extended) = krylov_ranks(a, x0, d, conj, tol)?;
    let dim = a.nrows();
    Ok(if plain == dim {
        Classification::Canonical
    } else if extended == dim {
        Classification::AlmostCanonical
    } else {
        Classification::Neither
    })
}

/// Relative moment error: `max |gamma' - gamma| / max |gamma|`, absolute when `gamma = 0`.
pub fn moment_error(recomputed: &CMat, gamma: &CMat) -> f64 {
    let scale = max_abs(gamma);
    let err = max_abs(&(recomputed - gamma));
    if scale > 0.0 {
        err / scale
    } else {
        err
    }
}

/// Recomputes moments and the structure check from scratch.
pub fn verify(
    kind: ProblemKind,
    a: &CMat,
    x0: &CVec,
    conj: &Conjugation,
    gamma: &CMat,
    tol: f64,
) -> Result<VerificationReport> {
    let size = linalg::ensure_square(gamma)?;
    if size < 2 {
        return Err(Error::InvalidProblem(
            "moment matrix must be at least 2x2".into(),
        ));
    }
    let d = size - 1;
    let recomputed = moments_of(a, x0, d, conj)?;
    let max_moment_error = moment_error(&recomputed, gamma);
    let structure_error = structure_deviation(conj, a, kind)?;
    let (krylov_rank, extended_krylov_rank) = krylov_ranks(a, x0, d, conj, KRYLOV_RANK_TOL)?;
    Ok(VerificationReport {
        max_moment_error,
        structure_error,
        krylov_rank,
        extended_krylov_rank,
        passed: max_moment_error <= tol && structure_error <= tol,
    })
}

/// The model space certified by feasibility.
pub fn model_space(p: &MomentProblem, opts: &SolveOptions) -> Result<ModelSpace> {
    let report = feasibility(p, opts.user_lambda.as_ref(), opts.feasibility_tol)?;
    match report.verdict {
        Verdict::NecessaryFailed => return Err(Error::NecessaryFailed(Box::new(report))),
        Verdict::Undecided => return Err(Error::Undecided(Box::new(report))),
        Verdict::Solvable | Verdict::SolvableNondegenerate => {}
    }
    let lambda = report
        .lambda_used
        .as_ref()
        .expect("solvable verdicts carry their factor");
    build_space(lambda, &p.gamma, opts.feasibility_tol)
}

fn extension_input(space: &ModelSpace) -> Result<ExtensionInput> {
    ExtensionInput::new(space.a0.clone(), space.p1.clone(), space.conj.clone())
}

/// Candidate operators on the model space for the requested root choice.
fn operators(space: &ModelSpace, kind: ProblemKind, opts: &SolveOptions) -> Result<Vec<CMat>> {
    let inp = extension_input(space)?;
    match kind {
        ProblemKind::A => Ok(vec![extend_selfadjoint(&inp, opts.s_matrix.as_ref())?]),
        ProblemKind::B => Ok(vec![extend_skew(&inp, opts.s_matrix.as_ref())?]),
        ProblemKind::C => {
            if opts.s_matrix.is_some() {
                return Err(Error::InvalidParameter(
                    "kind C solutions are selected by root, not by S".into(),
                ));
            }
            let all = if space.defect() == 0 {
                // the shift is already defined everywhere
                vec![space.a0.clone()]
            } else {
                let family = unitary_extension_family(&inp, opts.tol)?;
                match family.extensions {
                    ExtensionSet::Listed { extensions } if extensions.is_empty() => {
                        return Err(Error::NoRoot)
                    }
                    ExtensionSet::Listed { extensions } => extensions,
                    ExtensionSet::Pencil { base, .. } => vec![base],
                }
            };
            match opts.root {
                RootChoice::All => Ok(all),
                RootChoice::Index(i) if i < all.len() => Ok(vec![all[i].clone()]),
                RootChoice::Index(i) => Err(Error::RootIndexOutOfRange {
                    index: i,
                    available: all.len(),
                }),
            }
        }
    }
}

fn finish(p: &MomentProblem, space: &ModelSpace, a: CMat, tol: f64) -> Result<Solution> {
    let x0 = space.x0();
    let report = verify(p.kind, &a, &x0, &space.conj, &p.gamma, tol)?;
    let classification = classify(&a, &x0, p.degree, &space.conj, KRYLOV_RANK_TOL)?;
    Ok(Solution {
        kind: p.kind,
        dim: space.dim,
        a,
        x0,
        conj: space.conj.clone(),
        classification,
        report,
    })
}

/// Solves the problem with the single root choice in `opts` (`All` acts as index 0).
pub fn solve(p: &MomentProblem, opts: &SolveOptions) -> Result<Solution> {
    let mut single = opts.clone();
    if single.root == RootChoice::All {
        single.root = RootChoice::Index(0);
    }
    let mut all = solve_all(p, &single)?;
    Ok(all.remove(0))
}

/// One solution per selected root; kinds A and B always give one.
pub fn solve_all(p: &MomentProblem, opts: &SolveOptions) -> Result<Vec<Solution>> {
    let space = model_space(p, opts)?;
    operators(&space, p.kind, opts)?
        .into_iter()
        .map(|a| finish(p, &space, a, opts.tol))
        .collect()
}

#[derive(Debug, Clone)]
pub struct Instance {
    pub kind: ProblemKind,
    pub a: CMat,
    pub x0: CVec,
    pub gamma: CMat,
    /// Seed of the accepted attempt.
    pub seed: u64,
}

impl Instance {
    pub fn problem(&self) -> MomentProblem {
        MomentProblem::new(self.kind, self.gamma.clone())
            .expect("generated moments are well formed")
    }
}

/// A random operator of the kind's class, a random unit vector and their moments.
pub fn generate_instance(kind: ProblemKind, n: usize, d: usize, seed: u64) -> Result<Instance> {
    generate(kind, n, d, seed, false)
}

/// As [`generate_instance`], additionally requiring an invertible moment matrix.
pub fn generate_nondegenerate_instance(
    kind: ProblemKind,
    n: usize,
    d: usize,
    seed: u64,
) -> Result<Instance> {
    generate(kind, n, d, seed, true)
}

fn generate(
    kind: ProblemKind,
    n: usize,
    d: usize,
    seed: u64,
    nondegenerate: bool,
) -> Result<Instance> {
    if n < 2 || !(1..=8).contains(&d) {
        return Err(Error::InvalidProblem(format!(
            "generator needs dim >= 2 and 1 <= degree <= 8, got dim {n}, degree {d}"
        )));
    }
    let structure = match kind {
        ProblemKind::A => StructureKind::Symmetric,
        ProblemKind::B => StructureKind::Skew,
        ProblemKind::C => StructureKind::ComplexOrthogonal,
    };
    let conj = Conjugation::canonical(n);
    for attempt in 0..GENERATION_ATTEMPTS as u64 {
        let s = seed.wrapping_add(attempt);
        let a = linalg::random_structured(structure, n, s);
        let x0 = linalg::random_unit_vector(n, s ^ 0x9e37_79b9_7f4a_7c15);
        let gamma = moments_of(&a, &x0, d, &conj)?;
        let p = MomentProblem::new(kind, gamma.clone())?;
        let report = feasibility(&p, None, DEFAULT_MOMENT_TOL)?;
        if report.verdict == Verdict::NecessaryFailed {
            continue;
        }
        if nondegenerate && linalg::sigma_min(&gamma)? <= NONDEGENERATE_SIGMA_MIN {
            continue;
        }
        return Ok(Instance {
            kind,
            a,
            x0,
            gamma,
            seed: s,
        });
    }
    Err(Error::GenerationFailed {
        attempts: GENERATION_ATTEMPTS,
    })
}
