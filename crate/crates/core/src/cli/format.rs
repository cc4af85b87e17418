//! Versioned JSON file formats. Complex numbers are `[re, im]` arrays and
//! matrices are arrays of rows.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::jspace::{Conjugation, ProblemKind};
use crate::linalg::{CMat, CNum, CVec};
use crate::moments::MomentProblem;
use crate::solver::{Classification, Solution, VerificationReport};

pub const MOMENTS_SCHEMA: &str = "jmoment/moments/v1";
pub const SOLUTION_SCHEMA: &str = "jmoment/solution/v1";
pub const MATRIX_SCHEMA: &str = "jmoment/matrix/v1";
pub const CONJUGATION_SCHEMA: &str = "jmoment/conjugation/v1";
pub const OPERATOR_SCHEMA: &str = "jmoment/operator/v1";
pub const EXTENSION_SCHEMA: &str = "jmoment/extension/v1";

pub type Rows = Vec<Vec<CNum>>;

/// A file that could not be read or does not match its format.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{file}: {}{message}", field.as_ref().map(|f| format!("field `{f}`: ")).unwrap_or_default())]
pub struct FormatError {
    pub file: String,
    pub field: Option<String>,
    pub message: String,
}

impl FormatError {
    pub fn new(file: &str, field: Option<&str>, message: impl Into<String>) -> Self {
        Self {
            file: file.to_string(),
            field: field.map(str::to_string),
            message: message.into(),
        }
    }
}

pub fn matrix_to_rows(m: &CMat) -> Rows {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

pub fn vector_to_row(v: &CVec) -> Vec<CNum> {
    v.iter().copied().collect()
}

/// Parses a rectangular, finite matrix; `field` names it in diagnostics.
pub fn rows_to_matrix(rows: &Rows, file: &str, field: &str) -> Result<CMat, FormatError> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    for (i, row) in rows.iter().enumerate() {
        if row.len() != ncols {
            return Err(FormatError::new(
                file,
                Some(&format!("{field}[{i}]")),
                format!("row has {} entries, expected {ncols}", row.len()),
            ));
        }
        for (j, z) in row.iter().enumerate() {
            if !(z.re.is_finite() && z.im.is_finite()) {
                return Err(FormatError::new(
                    file,
                    Some(&format!("{field}[{i}][{j}]")),
                    "entry is not finite",
                ));
            }
        }
    }
    Ok(CMat::from_fn(nrows, ncols, |i, j| rows[i][j]))
}

pub fn row_to_vector(row: &[CNum], file: &str, field: &str) -> Result<CVec, FormatError> {
    if let Some(k) = row
        .iter()
        .position(|z| !(z.re.is_finite() && z.im.is_finite()))
    {
        return Err(FormatError::new(
            file,
            Some(&format!("{field}[{k}]")),
            "entry is not finite",
        ));
    }
    Ok(CVec::from_column_slice(row))
}

fn square(rows: &Rows, file: &str, field: &str, size: Option<usize>) -> Result<CMat, FormatError> {
    let m = rows_to_matrix(rows, file, field)?;
    if !m.is_square() {
        return Err(FormatError::new(
            file,
            Some(field),
            format!("matrix must be square, got {}x{}", m.nrows(), m.ncols()),
        ));
    }
    if let Some(n) = size {
        if m.nrows() != n {
            return Err(FormatError::new(
                file,
                Some(field),
                format!("expected {n}x{n}, got {}x{}", m.nrows(), m.ncols()),
            ));
        }
    }
    Ok(m)
}

fn conjugation(
    rows: &Rows,
    file: &str,
    field: &str,
    size: usize,
) -> Result<Conjugation, FormatError> {
    let c = square(rows, file, field, Some(size))?;
    Conjugation::new(c).map_err(|e| FormatError::new(file, Some(field), e.to_string()))
}

fn check_schema(found: &str, expected: &str, file: &str) -> Result<(), FormatError> {
    if found != expected {
        return Err(FormatError::new(
            file,
            Some("schema"),
            format!("expected \"{expected}\", found \"{found}\""),
        ));
    }
    Ok(())
}

/// Parses JSON text, naming the offending field on failure.
pub fn parse<T: DeserializeOwned>(text: &str, file: &str) -> Result<T, FormatError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let field = (path != ".").then_some(path);
        FormatError {
            file: file.to_string(),
            field,
            message: e.into_inner().to_string(),
        }
    })
}

pub fn read<T: DeserializeOwned>(path: &Path) -> Result<T, FormatError> {
    let file = path.display().to_string();
    let text = std::fs::read_to_string(path)
        .map_err(|e| FormatError::new(&file, None, format!("cannot read file: {e}")))?;
    parse(&text, &file)
}

/// Pretty JSON with a trailing newline; floats use shortest round-trip form.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("file types serialize");
    s.push('\n');
    s
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MomentFileV1 {
    pub schema: String,
    pub kind: ProblemKind,
    pub degree: usize,
    pub moments: Rows,
}

impl MomentFileV1 {
    pub fn from_problem(p: &MomentProblem) -> Self {
        Self {
            schema: MOMENTS_SCHEMA.into(),
            kind: p.kind,
            degree: p.degree,
            moments: matrix_to_rows(&p.gamma),
        }
    }

    pub fn to_problem(&self, file: &str) -> Result<MomentProblem, FormatError> {
        check_schema(&self.schema, MOMENTS_SCHEMA, file)?;
        if self.degree == 0 {
            return Err(FormatError::new(
                file,
                Some("degree"),
                "degree must be at least 1",
            ));
        }
        let size = self.degree + 1;
        if self.moments.len() != size {
            return Err(FormatError::new(
                file,
                Some("moments"),
                format!(
                    "expected {size} rows for degree {}, got {}",
                    self.degree,
                    self.moments.len()
                ),
            ));
        }
        let gamma = square(&self.moments, file, "moments", Some(size))?;
        MomentProblem::new(self.kind, gamma)
            .map_err(|e| FormatError::new(file, Some("moments"), e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolutionFileV1 {
    pub schema: String,
    pub kind: ProblemKind,
    pub dim: usize,
    pub a: Rows,
    pub x0: Vec<CNum>,
    pub conjugation: Rows,
    pub classification: Classification,
    pub report: VerificationReport,
}

/// The operator, vector and conjugation of a solution file.
#[derive(Debug, Clone)]
pub struct SolutionParts {
    pub kind: ProblemKind,
    pub a: CMat,
    pub x0: CVec,
    pub conj: Conjugation,
}

impl SolutionFileV1 {
    pub fn from_solution(s: &Solution) -> Self {
        Self {
            schema: SOLUTION_SCHEMA.into(),
            kind: s.kind,
            dim: s.dim,
            a: matrix_to_rows(&s.a),
            x0: vector_to_row(&s.x0),
            conjugation: matrix_to_rows(s.conj.matrix()),
            classification: s.classification,
            report: s.report.clone(),
        }
    }

    pub fn parts(&self, file: &str) -> Result<SolutionParts, FormatError> {
        check_schema(&self.schema, SOLUTION_SCHEMA, file)?;
        let a = square(&self.a, file, "a", Some(self.dim))?;
        if self.x0.len() != self.dim {
            return Err(FormatError::new(
                file,
                Some("x0"),
                format!("expected {} entries, got {}", self.dim, self.x0.len()),
            ));
        }
        let x0 = row_to_vector(&self.x0, file, "x0")?;
        let conj = conjugation(&self.conjugation, file, "conjugation", self.dim)?;
        Ok(SolutionParts {
            kind: self.kind,
            a,
            x0,
            conj,
        })
    }
}

/// A single solution or the list written by `solve --root all`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SolutionDocument {
    One(SolutionFileV1),
    Many(Vec<SolutionFileV1>),
}

impl SolutionDocument {
    pub fn entries(&self) -> Vec<&SolutionFileV1> {
        match self {
            SolutionDocument::One(s) => vec![s],
            SolutionDocument::Many(v) => v.iter().collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixFileV1 {
    pub schema: String,
    pub matrix: Rows,
}

impl MatrixFileV1 {
    pub fn new(m: &CMat) -> Self {
        Self {
            schema: MATRIX_SCHEMA.into(),
            matrix: matrix_to_rows(m),
        }
    }

    pub fn to_matrix(&self, file: &str) -> Result<CMat, FormatError> {
        check_schema(&self.schema, MATRIX_SCHEMA, file)?;
        rows_to_matrix(&self.matrix, file, "matrix")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConjugationFileV1 {
    pub schema: String,
    pub c: Rows,
}

impl ConjugationFileV1 {
    pub fn new(conj: &Conjugation) -> Self {
        Self {
            schema: CONJUGATION_SCHEMA.into(),
            c: matrix_to_rows(conj.matrix()),
        }
    }

    pub fn to_conjugation(&self, file: &str, size: usize) -> Result<Conjugation, FormatError> {
        check_schema(&self.schema, CONJUGATION_SCHEMA, file)?;
        conjugation(&self.c, file, "c", size)
    }
}

/// An operator `N` on `C^n`, zero off its domain, with the domain given as
/// an orthogonal projector or as a basis (columns).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorFileV1 {
    pub schema: String,
    pub operator: Rows,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain_projector: Option<Rows>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain_basis: Option<Rows>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conjugation: Option<Rows>,
}

#[derive(Debug, Clone)]
pub struct OperatorParts {
    pub n_matrix: CMat,
    pub p1: CMat,
    pub conj: Option<Conjugation>,
}

impl OperatorFileV1 {
    pub fn parts(&self, file: &str) -> Result<OperatorParts, FormatError> {
        check_schema(&self.schema, OPERATOR_SCHEMA, file)?;
        let n_matrix = square(&self.operator, file, "operator", None)?;
        let n = n_matrix.nrows();
        let p1 = match (&self.domain_projector, &self.domain_basis) {
            (Some(p), None) => square(p, file, "domain_projector", Some(n))?,
            (None, Some(b)) => {
                let basis = rows_to_matrix(b, file, "domain_basis")?;
                if basis.nrows() != n && !(basis.nrows() == 0 && n > 0) {
                    return Err(FormatError::new(
                        file,
                        Some("domain_basis"),
                        format!("basis vectors must have {n} entries"),
                    ));
                }
                let basis = if basis.nrows() == 0 {
                    CMat::zeros(n, 0)
                } else {
                    basis
                };
                crate::linalg::projector(&basis)
                    .map_err(|e| FormatError::new(file, Some("domain_basis"), e.to_string()))?
            }
            _ => {
                return Err(FormatError::new(
                    file,
                    None,
                    "exactly one of `domain_projector` and `domain_basis` is required",
                ))
            }
        };
        let conj = self
            .conjugation
            .as_ref()
            .map(|c| conjugation(c, file, "conjugation", n))
            .transpose()?;
        Ok(OperatorParts { n_matrix, p1, conj })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PencilV1 {
    pub base: Rows,
    pub direction: Rows,
}

/// Details of a J-unitary extension family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitaryDetailsV1 {
    /// `[a, b, c]` of `a lambda^2 + b lambda + c = 0`.
    pub coefficients: [CNum; 3],
    pub branch: String,
    pub roots: Vec<CNum>,
    pub double_root: bool,
    pub u: Vec<CNum>,
    pub v: Vec<CNum>,
    pub t: Vec<CNum>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pencil: Option<PencilV1>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtensionFileV1 {
    pub schema: String,
    pub kind: ProblemKind,
    pub conjugation: Rows,
    pub extensions: Vec<Rows>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unitary: Option<UnitaryDetailsV1>,
}
