//! File formats and command implementations behind the `quadsym` binary.
//!
//! A problem file is a JSON document:
//!
//! ```json
//! {
//!   "n": 2,
//!   "objective": [[1.0, 0.0], [0.0, 0.8]],
//!   "constraints": [[[0.5, 2.0], [2.0, 0.5]], [[0.5, -2.0], [-2.0, 0.5]]],
//!   "tolerances": { "residual_tol": 1e-8 },
//!   "search": { "restarts": 64, "seed": 7 }
//! }
//! ```
//!
//! `tolerances` and `search` are optional, as is every field inside them.
//! Matrices are row-major and symmetrized on load.

use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::apply::{breaking_cut, orbit};
use crate::discrete::SearchOptions;
use crate::error::Error;
use crate::group::{analyze, SymmetryReport};
use crate::linalg::{rows, Matrix, Tolerances};
use crate::problem::{build_problem, QcqpProblem};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub n: usize,
    pub objective: Vec<Vec<f64>>,
    pub constraints: Vec<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<Tolerances>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub search: Option<SearchOptions>,
}

impl ProblemFile {
    pub fn from_problem(p: &QcqpProblem) -> Self {
        ProblemFile {
            n: p.dim(),
            objective: rows::to_rows(&p.objective().to_dense()),
            constraints: p
                .constraints()
                .iter()
                .map(|b| rows::to_rows(&b.to_dense()))
                .collect(),
            tolerances: None,
            search: None,
        }
    }

    pub fn tolerances(&self) -> Tolerances {
        self.tolerances.unwrap_or_default()
    }

    /// Checks the shapes and builds the problem.
    pub fn to_problem(&self) -> Result<QcqpProblem, CliError> {
        let matrix = |name: String, rows: &[Vec<f64>]| -> Result<Matrix, CliError> {
            if rows.len() != self.n || rows.iter().any(|r| r.len() != self.n) {
                return Err(CliError::Malformed(format!(
                    "{name} must be a {n}x{n} array",
                    n = self.n
                )));
            }
            rows::from_rows(rows).ok_or_else(|| CliError::Malformed(format!("{name} is ragged")))
        };
        if self.n == 0 {
            return Err(CliError::Malformed("n must be positive".into()));
        }
        let a = matrix("objective".into(), &self.objective)?;
        let bs = self
            .constraints
            .iter()
            .enumerate()
            .map(|(i, b)| matrix(format!("constraint {i}"), b))
            .collect::<Result<Vec<_>, _>>()?;
        build_problem(&a, &bs, &self.tolerances()).map_err(CliError::from)
    }
}

/// Failure of a command, carrying its process exit status.
#[derive(Debug)]
pub enum CliError {
    Io(String),
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },
    Malformed(String),
    Assumption(String),
    Budget(String),
    DigestMismatch {
        report: String,
        problem: String,
    },
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) | CliError::Failed(_) => 1,
            CliError::Parse { .. } | CliError::Malformed(_) => 2,
            CliError::Assumption(_) => 3,
            CliError::Budget(_) => 4,
            CliError::DigestMismatch { .. } => 5,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Io(m)
            | CliError::Malformed(m)
            | CliError::Budget(m)
            | CliError::Failed(m) => f.write_str(m),
            CliError::Assumption(m) => write!(f, "assumption violated: {m}"),
            CliError::Parse {
                path,
                line,
                column,
                message,
            } => write!(f, "{}:{line}:{column}: {message}", path.display()),
            CliError::DigestMismatch { report, problem } => write!(
                f,
                "report was computed for problem {report}, but the file has digest {problem}"
            ),
        }
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::AssumptionViolated { .. } => CliError::Assumption(e.to_string()),
            Error::SearchBudgetExceeded { .. } => CliError::Budget(e.to_string()),
            Error::Dimension(_)
            | Error::NonFinite
            | Error::InvalidTolerance { .. }
            | Error::InvalidSearchOption { .. }
            | Error::InvalidPermutation(_) => CliError::Malformed(e.to_string()),
            _ => CliError::Failed(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn parse<T: serde::de::DeserializeOwned>(path: &Path, text: &str) -> Result<T, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

pub fn load_problem_file(path: &Path) -> Result<ProblemFile, CliError> {
    parse(path, &read(path)?)
}

pub fn load_problem(path: &Path) -> Result<(ProblemFile, QcqpProblem), CliError> {
    let file = load_problem_file(path)?;
    let problem = file.to_problem()?;
    Ok((file, problem))
}

pub fn load_report(path: &Path) -> Result<SymmetryReport, CliError> {
    parse(path, &read(path)?)
}

/// `validate`: loads the problem and reports its size and smallest pivot.
pub fn cmd_validate(path: &Path, out: &mut dyn Write) -> Result<(), CliError> {
    let (_, p) = load_problem(path)?;
    writeln!(out, "n={} M={}", p.dim(), p.num_constraints())?;
    writeln!(out, "B_Σ positive definite, min pivot {:?}", p.min_pivot())?;
    writeln!(out, "digest {}", p.digest())?;
    Ok(())
}

/// Overrides for `analyze`; unset fields fall back to the problem file and
/// then to the defaults.
#[derive(Debug, Clone, Default)]
pub struct AnalyzeArgs {
    pub constraints_only: bool,
    pub seed: Option<u64>,
    pub restarts: Option<usize>,
    pub tol_residual: Option<f64>,
    pub tol_rank: Option<f64>,
    pub max_perms: Option<usize>,
    pub json: Option<PathBuf>,
}

pub fn analyze_file(path: &Path, args: &AnalyzeArgs) -> Result<SymmetryReport, CliError> {
    let file = load_problem_file(path)?;
    let mut tol = file.tolerances();
    if let Some(v) = args.tol_residual {
        tol.residual_tol = v;
    }
    if let Some(v) = args.tol_rank {
        tol.rank_tol = v;
    }
    tol.validate()?;
    let file = ProblemFile {
        tolerances: Some(tol),
        ..file
    };
    let problem = file.to_problem()?;

    let mut opts = file.search.clone().unwrap_or_default();
    if let Some(v) = args.seed {
        opts.seed = v;
    }
    if let Some(v) = args.restarts {
        opts.restarts = v;
    }
    if let Some(v) = args.max_perms {
        opts.max_permutations = v;
    }
    Ok(analyze(&problem, &opts, &tol, args.constraints_only)?)
}

/// `analyze`: prints the summary and the cosets, and writes the JSON report
/// when requested.
pub fn cmd_analyze(path: &Path, args: &AnalyzeArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let report = analyze_file(path, args)?;
    writeln!(out, "{}", report.summary())?;
    for rc in &report.cosets {
        writeln!(
            out,
            "coset {}: permutation {} det {} residual {:.3e}",
            rc.id,
            rc.permutation(),
            rc.det_sign(),
            rc.original_residual
        )?;
    }
    if let Some(json) = &args.json {
        let mut text = report.to_json();
        text.push('\n');
        std::fs::write(json, text).map_err(|e| CliError::Io(format!("{}: {e}", json.display())))?;
    }
    Ok(())
}

fn matching_report(
    path: &Path,
    report_path: &Path,
) -> Result<(QcqpProblem, SymmetryReport), CliError> {
    let (_, problem) = load_problem(path)?;
    let report = load_report(report_path)?;
    if !report.matches(&problem) {
        return Err(CliError::DigestMismatch {
            report: report.problem_digest.clone(),
            problem: problem.digest(),
        });
    }
    Ok((problem, report))
}

/// Parses `"0.3,0.1"`.
pub fn parse_point(text: &str) -> Result<Vec<f64>, CliError> {
    text.split(',')
        .map(|t| {
            let t = t.trim();
            t.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| CliError::Malformed(format!("not a finite number: {t:?}")))
        })
        .collect()
}

fn format_vector(v: &[f64]) -> String {
    // adding zero turns -0 into 0
    v.iter()
        .map(|x| (x + 0.0).to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

/// `orbit`: one line per orbit point, followed by the group element used.
pub fn cmd_orbit(
    path: &Path,
    report_path: &Path,
    point: &str,
    samples: usize,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let (_, report) = matching_report(path, report_path)?;
    let x = parse_point(point)?;
    let o = orbit(&x, &report, samples)?;
    for (p, tag) in o.points.iter().zip(&o.generator_tags) {
        writeln!(out, "{}\t{tag}", format_vector(p))?;
    }
    Ok(())
}

/// `cuts`: one unit normal per representative with an eigenvalue `−1`.
pub fn cmd_cuts(path: &Path, report_path: &Path, out: &mut dyn Write) -> Result<(), CliError> {
    let (_, report) = matching_report(path, report_path)?;
    for rc in &report.cosets {
        if let Some(cut) = breaking_cut(&rc.original, &report.tolerances) {
            writeln!(out, "coset {}: {} >= 0", rc.id, format_vector(&cut.normal))?;
        }
    }
    Ok(())
}
