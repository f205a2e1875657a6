//! Experiment configuration, read from a single JSON document.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use stochkit::solvers::Method;
use stochkit::{PartialOptions, SubMode};

use crate::error::{HarnessError, Result};

/// Environment variable holding the lowest-precedence seed.
pub const SEED_ENV: &str = "STOCHKIT_SEED";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemKind {
    LinearRegression,
    LogisticRegression,
    SoftmaxRegression,
    LinearSvm,
    L1LinearRegression,
    L1LogisticRegression,
}

impl ProblemKind {
    pub const ALL: [ProblemKind; 6] = [
        ProblemKind::LinearRegression,
        ProblemKind::LogisticRegression,
        ProblemKind::SoftmaxRegression,
        ProblemKind::LinearSvm,
        ProblemKind::L1LinearRegression,
        ProblemKind::L1LogisticRegression,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ProblemKind::LinearRegression => "linear_regression",
            ProblemKind::LogisticRegression => "logistic_regression",
            ProblemKind::SoftmaxRegression => "softmax_regression",
            ProblemKind::LinearSvm => "linear_svm",
            ProblemKind::L1LinearRegression => "l1_linear_regression",
            ProblemKind::L1LogisticRegression => "l1_logistic_regression",
        }
    }

    pub fn labels(self) -> LabelKind {
        match self {
            ProblemKind::LinearRegression | ProblemKind::L1LinearRegression => LabelKind::Real,
            ProblemKind::LogisticRegression | ProblemKind::LinearSvm | ProblemKind::L1LogisticRegression => {
                LabelKind::Binary
            }
            ProblemKind::SoftmaxRegression => LabelKind::Class,
        }
    }
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProblemKind {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        ProblemKind::ALL.into_iter().find(|k| k.name() == key).ok_or_else(|| {
            let valid: Vec<&str> = ProblemKind::ALL.iter().map(|k| k.name()).collect();
            HarnessError::Usage(format!("unknown problem `{s}`; valid problems: {}", valid.join(", ")))
        })
    }
}

/// How labels of a loaded file are interpreted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LabelKind {
    Real,
    /// ±1; files with 0/1 labels are mapped to −1/+1.
    Binary,
    /// 0-based class indices; files with 1-based indices are shifted.
    Class,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FileFormat {
    Csv,
    Libsvm,
}

impl FromStr for FileFormat {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(FileFormat::Csv),
            "libsvm" | "svmlight" => Ok(FileFormat::Libsvm),
            _ => Err(HarnessError::Usage(format!(
                "unknown data format `{s}`; valid formats: csv, libsvm"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum DataSource {
    Generate {
        n: usize,
        d: usize,
        #[serde(default)]
        seed: u64,
        /// Noise level of generated regression targets.
        #[serde(default = "default_sigma")]
        sigma: f64,
        /// Class count of generated multiclass data.
        #[serde(default = "default_classes")]
        classes: usize,
    },
    File {
        path: PathBuf,
        format: FileFormat,
        /// Feature count for LIBSVM files; inferred from the largest index if absent.
        #[serde(default)]
        features: Option<usize>,
        /// Optional held-out file in the same format, used for scores and the scatter plot.
        #[serde(default)]
        test_path: Option<PathBuf>,
    },
}

fn default_sigma() -> f64 {
    0.1
}

fn default_classes() -> usize {
    3
}

fn default_lambda() -> f64 {
    0.01
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub kind: String,
    #[serde(default = "default_lambda")]
    pub lambda: f64,
    pub data: DataSource,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSpec {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sub_mode: Option<SubMode>,
    /// Per-solver overrides; these win over the shared options.
    #[serde(default)]
    pub options: PartialOptions,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlotToggles {
    pub cost: bool,
    pub optgap: bool,
    pub classification: bool,
    pub trajectory: bool,
}

impl Default for PlotToggles {
    fn default() -> Self {
        PlotToggles {
            cost: true,
            optgap: true,
            classification: false,
            trajectory: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: ProblemSpec,
    pub solvers: Vec<SolverSpec>,
    /// Options shared by every solver.
    #[serde(default)]
    pub options: PartialOptions,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default = "default_out")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub plots: PlotToggles,
    /// Compute the reference optimum so that optimality gaps are available.
    #[serde(default = "yes")]
    pub calc_solution: bool,
}

fn default_out() -> PathBuf {
    PathBuf::from("stochkit-out")
}

fn yes() -> bool {
    true
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| HarnessError::Usage(format!("invalid config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn kind(&self) -> Result<ProblemKind> {
        self.problem.kind.parse()
    }

    pub fn methods(&self) -> Result<Vec<Method>> {
        self.solvers
            .iter()
            .map(|s| s.name.parse::<Method>().map_err(|e| HarnessError::Usage(e.to_string())))
            .collect()
    }

    /// Checks everything that can be checked before any file is written.
    pub fn validate(&self) -> Result<()> {
        if self.solvers.is_empty() {
            return Err(HarnessError::Usage("config lists no solvers".into()));
        }
        let kind = self.kind()?;
        self.methods()?;
        let lambda = self.problem.lambda;
        if !(lambda.is_finite() && lambda >= 0.0) {
            return Err(HarnessError::Usage(format!(
                "lambda must be finite and non-negative, got {lambda}"
            )));
        }
        if matches!(
            kind,
            ProblemKind::L1LinearRegression | ProblemKind::L1LogisticRegression
        ) && lambda == 0.0
        {
            return Err(HarnessError::Usage(format!("{kind} needs a positive lambda")));
        }
        match &self.problem.data {
            DataSource::Generate { n, d, .. } => {
                if *n < 2 || *d < 1 {
                    return Err(HarnessError::Usage(format!(
                        "generated data needs n >= 2 and d >= 1, got n={n}, d={d}"
                    )));
                }
            }
            DataSource::File { path, test_path, .. } => {
                for p in std::iter::once(path).chain(test_path) {
                    if !p.is_file() {
                        return Err(HarnessError::Usage(format!("data file {} does not exist", p.display())));
                    }
                }
            }
        }
        Ok(())
    }

    /// Seed precedence: command-line flag, then config, then `STOCHKIT_SEED`, then 0.
    pub fn resolve_seed(&self, flag: Option<u64>) -> Result<u64> {
        if let Some(s) = flag.or(self.seed) {
            return Ok(s);
        }
        match std::env::var(SEED_ENV) {
            Ok(v) => v
                .trim()
                .parse()
                .map_err(|_| HarnessError::Usage(format!("{SEED_ENV}={v} is not an unsigned integer"))),
            Err(_) => Ok(0),
        }
    }
}

/// A single config file, or every `*.json` in a directory in name order.
pub fn config_paths(path: &Path) -> Result<Vec<PathBuf>> {
    if !path.is_dir() {
        return Ok(vec![path.to_path_buf()]);
    }
    let entries = std::fs::read_dir(path).map_err(|e| HarnessError::io(path, e))?;
    let mut paths = Vec::new();
    for entry in entries {
        let p = entry.map_err(|e| HarnessError::io(path, e))?.path();
        if p.extension().is_some_and(|x| x == "json") {
            paths.push(p);
        }
    }
    if paths.is_empty() {
        return Err(HarnessError::Usage(format!("no .json configs in {}", path.display())));
    }
    paths.sort();
    Ok(paths)
}
