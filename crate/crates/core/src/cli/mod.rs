//! The `jmoment` command-line interface.
//!
//! Exit codes:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success |
//! | 1 | unreadable or malformed input, invalid flags or parameters, I/O failure |
//! | 2 | a necessary condition fails (moment conditions, or the extension hypothesis on an operator) |
//! | 3 | undecided: degenerate moments and no tested factorization works |
//! | 4 | extension obstruction: not invertible, unsupported defect, no root, ill-defined shift |
//! | 5 | verification mismatch or numerical failure |
//! | 6 | instance generation failed |
//!
//! Reports go to standard output as one JSON document; errors go to standard
//! error as one JSON document.

pub mod format;

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::Error;
use crate::extend::{
    extend_selfadjoint, extend_skew, unitary_extension_family, ExtensionInput, ExtensionSet,
};
use crate::jspace::{Conjugation, ProblemKind, DEFAULT_STRUCTURE_TOL};
use crate::linalg::CMat;
use crate::moments::{feasibility, FeasibilityReport, MomentProblem, Verdict, DEFAULT_MOMENT_TOL};
use crate::solver::{
    self, generate_instance, moments_of, solve_all, RootChoice, SolveOptions, DEFAULT_VERIFY_TOL,
};
use format::{
    matrix_to_rows, vector_to_row, ConjugationFileV1, ExtensionFileV1, FormatError, MatrixFileV1,
    MomentFileV1, OperatorFileV1, PencilV1, SolutionDocument, SolutionFileV1, UnitaryDetailsV1,
    EXTENSION_SCHEMA,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_MALFORMED: i32 = 1;
pub const EXIT_NECESSARY: i32 = 2;
pub const EXIT_UNDECIDED: i32 = 3;
pub const EXIT_OBSTRUCTION: i32 = 4;
pub const EXIT_MISMATCH: i32 = 5;
pub const EXIT_GENERATION: i32 = 6;

/// Exit code of a library error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NecessaryFailed(_) | Error::Precondition(_) => EXIT_NECESSARY,
        Error::Undecided(_) => EXIT_UNDECIDED,
        Error::NotInvertible
        | Error::UnsupportedDefect(_)
        | Error::NoRoot
        | Error::IllDefinedOperator(_) => EXIT_OBSTRUCTION,
        Error::DecompositionFailed(_) => EXIT_MISMATCH,
        Error::GenerationFailed { .. } => EXIT_GENERATION,
        Error::DimensionMismatch(_)
        | Error::NotSquare { .. }
        | Error::NonFinite(_)
        | Error::InvalidBasis { .. }
        | Error::NotSymmetric { .. }
        | Error::InvalidConjugation(_)
        | Error::InconsistentInput(_)
        | Error::InvalidParameter(_)
        | Error::RootIndexOutOfRange { .. }
        | Error::InvalidProblem(_) => EXIT_MALFORMED,
    }
}

#[derive(Debug, thiserror::Error)]
enum Failure {
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error(transparent)]
    Core(#[from] Error),
    #[error("{message}")]
    Usage { message: String },
    /// Output already reported; carries the exit code and an error document.
    #[error("{message}")]
    Reported {
        code: i32,
        class: &'static str,
        message: String,
        detail: Value,
    },
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Format(_) | Failure::Usage { .. } => EXIT_MALFORMED,
            Failure::Core(e) => exit_code(e),
            Failure::Reported { code, .. } => *code,
        }
    }

    fn document(&self) -> Value {
        let mut doc = json!({
            "error": self.class(),
            "message": self.to_string(),
            "exit_code": self.code(),
        });
        let extra = match self {
            Failure::Format(f) => json!({ "file": f.file, "field": f.field }),
            Failure::Core(Error::NecessaryFailed(r)) | Failure::Core(Error::Undecided(r)) => {
                json!({ "report": r })
            }
            Failure::Reported { detail, .. } => detail.clone(),
            _ => Value::Null,
        };
        if let (Value::Object(d), Value::Object(e)) = (&mut doc, extra) {
            d.extend(e);
        }
        doc
    }

    fn class(&self) -> &'static str {
        match self {
            Failure::Format(_) => "malformed-input",
            Failure::Usage { .. } => "usage",
            Failure::Core(e) => e.class(),
            Failure::Reported { class, .. } => class,
        }
    }
}

type CmdResult = std::result::Result<i32, Failure>;

#[derive(Debug, Parser)]
#[command(
    name = "jmoment",
    version,
    about = "Truncated moment problems for J-structured operators"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the necessary conditions and the sufficiency test on a moment file.
    Check {
        input: PathBuf,
        #[arg(long, default_value_t = DEFAULT_MOMENT_TOL)]
        tol: f64,
        /// Factor `lambda` with `lambda lambda^T = gamma` to test instead of the canonical one.
        #[arg(long)]
        lambda: Option<PathBuf>,
    },
    /// Solve a moment problem and write the solution.
    Solve {
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Verification tolerance (relative).
        #[arg(long, default_value_t = DEFAULT_VERIFY_TOL)]
        tol: f64,
        /// Root of the J-unitary quadratic: an index or `all`.
        #[arg(long, default_value = "0", value_parser = parse_root)]
        root: RootChoice,
        /// Extension parameter S (matrix file, model-space coordinates).
        #[arg(long = "s-matrix")]
        s_matrix: Option<PathBuf>,
        #[arg(long)]
        lambda: Option<PathBuf>,
    },
    /// Recompute moments and the structure check of a solution.
    Verify {
        solution: PathBuf,
        moments: PathBuf,
        #[arg(long, default_value_t = DEFAULT_VERIFY_TOL)]
        tol: f64,
    },
    /// Write a seeded random moment problem with a known solution.
    Generate {
        #[arg(long)]
        kind: ProblemKind,
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        degree: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the generating operator and vector as `<out stem>.truth.json`.
        #[arg(long = "with-truth")]
        with_truth: bool,
    },
    /// Extend an operator given on a subspace.
    Extend {
        operator: PathBuf,
        #[arg(long)]
        kind: ProblemKind,
        /// Conjugation file; overrides the one in the operator file. Defaults to canonical.
        #[arg(long)]
        conjugation: Option<PathBuf>,
        #[arg(long = "s-matrix")]
        s_matrix: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_root(s: &str) -> std::result::Result<RootChoice, String> {
    if s == "all" {
        return Ok(RootChoice::All);
    }
    s.parse::<usize>()
        .map(RootChoice::Index)
        .map_err(|_| format!("expected a root index or `all`, got `{s}`"))
}

/// Runs the CLI on `args` (including the program name) with standard streams.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(args, &mut stdout.lock(), &mut stderr.lock())
}

/// As [`run`], writing reports to `out` and errors to `err`.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                return EXIT_OK;
            }
            let failure = Failure::Usage {
                message: e.to_string().trim().to_string(),
            };
            let _ = writeln!(err, "{}", failure.document());
            return failure.code();
        }
    };
    let result = match cli.command {
        Command::Check { input, tol, lambda } => cmd_check(&input, tol, lambda.as_deref(), out),
        Command::Solve {
            input,
            out: target,
            tol,
            root,
            s_matrix,
            lambda,
        } => cmd_solve(
            &input,
            target.as_deref(),
            tol,
            root,
            s_matrix.as_deref(),
            lambda.as_deref(),
            out,
        ),
        Command::Verify {
            solution,
            moments,
            tol,
        } => cmd_verify(&solution, &moments, tol, out),
        Command::Generate {
            kind,
            dim,
            degree,
            seed,
            out: target,
            with_truth,
        } => cmd_generate(kind, dim, degree, seed, target.as_deref(), with_truth, out),
        Command::Extend {
            operator,
            kind,
            conjugation,
            s_matrix,
            out: target,
        } => cmd_extend(
            &operator,
            kind,
            conjugation.as_deref(),
            s_matrix.as_deref(),
            target.as_deref(),
            out,
        ),
    };
    match result {
        Ok(code) => code,
        Err(failure) => {
            let _ = writeln!(err, "{}", failure.document());
            failure.code()
        }
    }
}

fn emit(out: &mut dyn Write, value: &impl Serialize) -> std::result::Result<(), Failure> {
    writeln!(
        out,
        "{}",
        serde_json::to_string(value).expect("reports serialize")
    )
    .map_err(|e| Failure::Usage {
        message: format!("cannot write to standard output: {e}"),
    })
}

fn write_file(path: &Path, text: &str) -> std::result::Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| {
        FormatError::new(
            &path.display().to_string(),
            None,
            format!("cannot write file: {e}"),
        )
        .into()
    })
}

fn name(path: &Path) -> String {
    path.display().to_string()
}

fn read_problem(path: &Path) -> std::result::Result<MomentProblem, Failure> {
    let file: MomentFileV1 = format::read(path)?;
    Ok(file.to_problem(&name(path))?)
}

fn read_matrix(path: &Path) -> std::result::Result<CMat, Failure> {
    let file: MatrixFileV1 = format::read(path)?;
    Ok(file.to_matrix(&name(path))?)
}

#[derive(Serialize)]
struct CheckOutput<'a> {
    kind: ProblemKind,
    degree: usize,
    #[serde(flatten)]
    report: &'a FeasibilityReport,
}

fn cmd_check(input: &Path, tol: f64, lambda: Option<&Path>, out: &mut dyn Write) -> CmdResult {
    let problem = read_problem(input)?;
    let lambda = lambda.map(read_matrix).transpose()?;
    let report = feasibility(&problem, lambda.as_ref(), tol)?;
    emit(
        out,
        &CheckOutput {
            kind: problem.kind,
            degree: problem.degree,
            report: &report,
        },
    )?;
    Ok(match report.verdict {
        Verdict::Solvable | Verdict::SolvableNondegenerate => EXIT_OK,
        Verdict::NecessaryFailed => EXIT_NECESSARY,
        Verdict::Undecided => EXIT_UNDECIDED,
    })
}

fn cmd_solve(
    input: &Path,
    target: Option<&Path>,
    tol: f64,
    root: RootChoice,
    s_matrix: Option<&Path>,
    lambda: Option<&Path>,
    out: &mut dyn Write,
) -> CmdResult {
    let problem = read_problem(input)?;
    let opts = SolveOptions {
        tol,
        user_lambda: lambda.map(read_matrix).transpose()?,
        s_matrix: s_matrix.map(read_matrix).transpose()?,
        root,
        ..Default::default()
    };
    let solutions = solve_all(&problem, &opts)?;
    let files: Vec<SolutionFileV1> = solutions
        .iter()
        .map(SolutionFileV1::from_solution)
        .collect();
    let document = match root {
        RootChoice::All => SolutionDocument::Many(files),
        RootChoice::Index(_) => {
            SolutionDocument::One(files.into_iter().next().expect("one solution"))
        }
    };
    let passed = solutions.iter().all(|s| s.report.passed);
    match target {
        Some(path) => {
            write_file(path, &format::to_json(&document))?;
            let summary: Vec<Value> = solutions
                .iter()
                .map(|s| json!({ "dim": s.dim, "classification": s.classification, "report": s.report }))
                .collect();
            emit(
                out,
                &json!({ "out": name(path), "passed": passed, "solutions": summary }),
            )?;
        }
        None => emit(out, &document)?,
    }
    if passed {
        Ok(EXIT_OK)
    } else {
        Err(Failure::Reported {
            code: EXIT_MISMATCH,
            class: "verification-failed",
            message: format!("solution does not verify at tolerance {tol:e}"),
            detail: json!({ "reports": solutions.iter().map(|s| &s.report).collect::<Vec<_>>() }),
        })
    }
}

fn cmd_verify(solution: &Path, moments: &Path, tol: f64, out: &mut dyn Write) -> CmdResult {
    let document: SolutionDocument = format::read(solution)?;
    let problem = read_problem(moments)?;
    let mut results = Vec::new();
    let mut worst_failure: Option<Value> = None;
    for entry in document.entries() {
        let parts = entry.parts(&name(solution))?;
        let n = parts.a.nrows();
        if parts.conj.dim() != n {
            return Err(FormatError::new(
                &name(solution),
                Some("conjugation"),
                "dimension differs from `a`",
            )
            .into());
        }
        let recomputed = moments_of(&parts.a, &parts.x0, problem.degree, &parts.conj)?;
        let report = solver::verify(
            problem.kind,
            &parts.a,
            &parts.x0,
            &parts.conj,
            &problem.gamma,
            tol,
        )?;
        let diff = &recomputed - &problem.gamma;
        let (mut wn, mut wm, mut wv) = (0, 0, -1.0);
        for i in 0..diff.nrows() {
            for j in 0..diff.ncols() {
                if diff[(i, j)].norm() > wv {
                    (wn, wm, wv) = (i, j, diff[(i, j)].norm());
                }
            }
        }
        let worst = json!({
            "n": wn,
            "m": wm,
            "expected": problem.gamma[(wn, wm)],
            "actual": recomputed[(wn, wm)],
        });
        if !report.passed && worst_failure.is_none() {
            worst_failure = Some(json!({
                "max_moment_error": report.max_moment_error,
                "structure_error": report.structure_error,
                "worst_entry": worst,
            }));
        }
        results.push(json!({
            "max_moment_error": report.max_moment_error,
            "structure_error": report.structure_error,
            "passed": report.passed,
            "worst_entry": worst,
        }));
    }
    let passed = worst_failure.is_none();
    emit(
        out,
        &json!({ "kind": problem.kind, "tol": tol, "passed": passed, "results": results }),
    )?;
    match worst_failure {
        None => Ok(EXIT_OK),
        Some(detail) => Err(Failure::Reported {
            code: EXIT_MISMATCH,
            class: "verification-failed",
            message: format!(
                "moments or structure differ beyond {tol:e}; worst entry (n, m) = ({}, {})",
                detail["worst_entry"]["n"], detail["worst_entry"]["m"]
            ),
            detail,
        }),
    }
}

/// `<dir>/<stem>.truth.json` next to the moment file.
pub fn truth_path(out: &Path) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    out.with_file_name(format!("{stem}.truth.json"))
}

fn cmd_generate(
    kind: ProblemKind,
    dim: usize,
    degree: usize,
    seed: u64,
    target: Option<&Path>,
    with_truth: bool,
    out: &mut dyn Write,
) -> CmdResult {
    if with_truth && target.is_none() {
        return Err(Failure::Usage {
            message: "--with-truth needs --out".into(),
        });
    }
    let inst = generate_instance(kind, dim, degree, seed)?;
    let problem = inst.problem();
    let moments = format::to_json(&MomentFileV1::from_problem(&problem));
    let Some(path) = target else {
        emit(out, &MomentFileV1::from_problem(&problem))?;
        return Ok(EXIT_OK);
    };
    write_file(path, &moments)?;
    let mut summary = json!({ "out": name(path), "kind": kind, "seed_used": inst.seed });
    if with_truth {
        let conj = Conjugation::canonical(dim);
        let report = solver::verify(
            kind,
            &inst.a,
            &inst.x0,
            &conj,
            &inst.gamma,
            DEFAULT_VERIFY_TOL,
        )?;
        let classification =
            solver::classify(&inst.a, &inst.x0, degree, &conj, solver::KRYLOV_RANK_TOL)?;
        let truth = SolutionFileV1 {
            schema: format::SOLUTION_SCHEMA.into(),
            kind,
            dim,
            a: matrix_to_rows(&inst.a),
            x0: vector_to_row(&inst.x0),
            conjugation: matrix_to_rows(conj.matrix()),
            classification,
            report,
        };
        let truth_file = truth_path(path);
        write_file(&truth_file, &format::to_json(&truth))?;
        summary["truth"] = json!(name(&truth_file));
    }
    emit(out, &summary)?;
    Ok(EXIT_OK)
}

fn cmd_extend(
    operator: &Path,
    kind: ProblemKind,
    conjugation: Option<&Path>,
    s_matrix: Option<&Path>,
    target: Option<&Path>,
    out: &mut dyn Write,
) -> CmdResult {
    let file: OperatorFileV1 = format::read(operator)?;
    let parts = file.parts(&name(operator))?;
    let n = parts.n_matrix.nrows();
    let conj = match conjugation {
        Some(path) => format::read::<ConjugationFileV1>(path)?.to_conjugation(&name(path), n)?,
        None => parts.conj.unwrap_or_else(|| Conjugation::canonical(n)),
    };
    let inp = ExtensionInput::new(parts.n_matrix, parts.p1, conj.clone())
        .map_err(|e| FormatError::new(&name(operator), None, e.to_string()))?;
    let s = s_matrix.map(read_matrix).transpose()?;

    let (extensions, unitary) = match kind {
        ProblemKind::A => (vec![extend_selfadjoint(&inp, s.as_ref())?], None),
        ProblemKind::B => (vec![extend_skew(&inp, s.as_ref())?], None),
        ProblemKind::C => {
            if s.is_some() {
                return Err(Failure::Usage {
                    message: "--s-matrix applies to kinds A and B only".into(),
                });
            }
            let family = unitary_extension_family(&inp, DEFAULT_STRUCTURE_TOL)?;
            let pencil = match &family.extensions {
                ExtensionSet::Pencil { base, direction } => Some(PencilV1 {
                    base: matrix_to_rows(base),
                    direction: matrix_to_rows(direction),
                }),
                ExtensionSet::Listed { .. } => None,
            };
            let details = UnitaryDetailsV1 {
                coefficients: [family.a, family.b, family.c],
                branch: family.roots.branch_name().to_string(),
                roots: family.roots.distinct(),
                double_root: family.double_root,
                u: vector_to_row(&family.u),
                v: vector_to_row(&family.v),
                t: vector_to_row(&family.t),
                pencil,
            };
            (family.representatives(), Some(details))
        }
    };
    let document = ExtensionFileV1 {
        schema: EXTENSION_SCHEMA.into(),
        kind,
        conjugation: matrix_to_rows(conj.matrix()),
        extensions: extensions.iter().map(matrix_to_rows).collect(),
        unitary,
    };
    match target {
        Some(path) => {
            write_file(path, &format::to_json(&document))?;
            let mut summary = json!({ "out": name(path), "kind": kind, "count": extensions.len() });
            if let Some(u) = &document.unitary {
                summary["coefficients"] = json!(u.coefficients);
                summary["branch"] = json!(u.branch);
                summary["roots"] = json!(u.roots);
            }
            emit(out, &summary)?;
        }
        None => emit(out, &document)?,
    }
    if extensions.is_empty() {
        return Err(Failure::Core(Error::NoRoot));
    }
    Ok(EXIT_OK)
}
