//! Builds the problem, runs every configured solver and writes the outputs.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use stochkit::problems::{
    attach_l1, calc_solution, generate_linear_data, generate_logistic_data, generate_multiclass_data,
    make_linear_regression, make_linear_svm, make_logistic_regression, make_softmax_regression, predict_and_score,
    Dataset, ScoreReport, SOLUTION_MAX_ITER,
};
use stochkit::solvers::Method;
use stochkit::{Diagnostics, Error as SolverError, PartialOptions, Problem, SolverOptions, SolverResult};

use crate::config::{DataSource, ExperimentConfig, ProblemKind, ProblemSpec};
use crate::dataset_io::load_dataset;
use crate::error::{HarnessError, Result};
use crate::plot;
use crate::records::{self, CSV_COLUMNS, CSV_SCHEMA_VERSION};

pub const SUMMARY_SCHEMA_VERSION: u32 = 1;

/// Command-line overrides; they take precedence over the config.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProblemSummary {
    pub kind: ProblemKind,
    pub lambda: f64,
    pub n_train: usize,
    pub n_test: usize,
    pub dim: usize,
    pub features: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub classes: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Ok,
    Diverged,
    Error,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolverSummary {
    pub name: String,
    pub method: String,
    pub seed: u64,
    pub status: RunStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub csv: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub termination: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub epochs: usize,
    pub final_cost: Option<f64>,
    pub final_optgap: Option<f64>,
    pub final_gnorm: Option<f64>,
    pub grad_calc_count: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub score: Option<ScoreReport>,
    /// Which split the score was computed on.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub score_split: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagnostics: Option<Diagnostics>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub schema_version: u32,
    pub csv_schema_version: u32,
    pub csv_columns: [&'static str; 8],
    pub stochkit_version: &'static str,
    pub seed: u64,
    pub problem: ProblemSummary,
    pub f_opt: Option<f64>,
    pub solvers: Vec<SolverSummary>,
    pub plots: Vec<String>,
    pub warnings: Vec<String>,
    pub config: ExperimentConfig,
}

#[derive(Debug)]
pub struct Outcome {
    pub out_dir: PathBuf,
    pub summary: Summary,
    /// Solver results in config order; `None` for solvers that failed without a partial run.
    pub results: Vec<Option<SolverResult>>,
}

impl Outcome {
    /// True iff every solver finished without error.
    pub fn succeeded(&self) -> bool {
        self.summary.solvers.iter().all(|s| s.status == RunStatus::Ok)
    }
}

/// Generated or loaded data, with the held-out split when one exists.
pub fn load_data(kind: ProblemKind, source: &DataSource) -> Result<Dataset> {
    match source {
        DataSource::Generate {
            n,
            d,
            seed,
            sigma,
            classes,
        } => Ok(match kind {
            ProblemKind::LinearRegression | ProblemKind::L1LinearRegression => {
                generate_linear_data(*n, *d, *sigma, *seed)?
            }
            ProblemKind::SoftmaxRegression => generate_multiclass_data(*n, *d, *classes, *seed)?,
            _ => generate_logistic_data(*n, *d, *seed)?,
        }),
        DataSource::File {
            path,
            format,
            features,
            test_path,
        } => {
            let mut data = load_dataset(path, *format, kind.labels(), *features)?;
            if let Some(tp) = test_path {
                let test = load_dataset(tp, *format, kind.labels(), Some(data.n_features()))?;
                if test.n_features() != data.n_features() {
                    return Err(HarnessError::Usage(format!(
                        "test file has {} features, training file {}",
                        test.n_features(),
                        data.n_features()
                    )));
                }
                data.classes = match (data.classes, test.classes) {
                    (Some(a), Some(b)) => Some(a.max(b)),
                    (a, b) => a.or(b),
                };
                data.x_test = Some(test.x_train);
                data.y_test = Some(test.y_train);
            }
            Ok(data)
        }
    }
}

pub fn build_problem(kind: ProblemKind, lambda: f64, data: &Dataset) -> Result<Box<dyn Problem>> {
    let (x, y) = (data.x_train.clone(), data.y_train.clone());
    Ok(match kind {
        ProblemKind::LinearRegression => Box::new(make_linear_regression(x, y, lambda)?),
        ProblemKind::LogisticRegression => Box::new(make_logistic_regression(x, y, lambda)?),
        ProblemKind::SoftmaxRegression => {
            let classes = data.classes.unwrap_or_else(|| data.y_train.max() as usize + 1);
            Box::new(make_softmax_regression(x, y, classes, lambda)?)
        }
        ProblemKind::LinearSvm => Box::new(make_linear_svm(x, y, lambda)?),
        ProblemKind::L1LinearRegression => Box::new(attach_l1(make_linear_regression(x, y, 0.0)?, lambda)?),
        ProblemKind::L1LogisticRegression => Box::new(attach_l1(make_logistic_regression(x, y, 0.0)?, lambda)?),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ReferenceSolution {
    pub problem: ProblemSummary,
    pub f_opt: f64,
    pub gnorm: f64,
    pub w: Vec<f64>,
    pub score: ScoreReport,
    pub score_split: &'static str,
}

/// The reference optimum of a problem built from `spec`, without running any
/// stochastic solver.
pub fn reference_solution(spec: &ProblemSpec) -> Result<ReferenceSolution> {
    let kind: ProblemKind = spec.kind.parse()?;
    if !(spec.lambda.is_finite() && spec.lambda >= 0.0) {
        return Err(HarnessError::Usage(format!(
            "lambda must be finite and non-negative, got {}",
            spec.lambda
        )));
    }
    let data = load_data(kind, &spec.data)?;
    let problem = build_problem(kind, spec.lambda, &data)?;
    let (w, f_opt) = calc_solution(problem.as_ref(), SOLUTION_MAX_ITER)?;
    let (x, y, split) = match (&data.x_test, &data.y_test) {
        (Some(x), Some(y)) => (x, y, "test"),
        _ => (&data.x_train, &data.y_train, "train"),
    };
    Ok(ReferenceSolution {
        problem: summarize(kind, spec.lambda, &data, problem.dim()),
        f_opt,
        gnorm: problem.full_grad(&w).norm(),
        score: predict_and_score(problem.as_ref(), &w, x, y)?,
        score_split: split,
        w: w.iter().copied().collect(),
    })
}

fn summarize(kind: ProblemKind, lambda: f64, data: &Dataset, dim: usize) -> ProblemSummary {
    ProblemSummary {
        kind,
        lambda,
        n_train: data.n_train(),
        n_test: data.y_test.as_ref().map_or(0, |y| y.len()),
        dim,
        features: data.n_features(),
        classes: data.classes,
    }
}

/// `top` wins field by field over `base`.
pub fn overlay(base: &PartialOptions, top: &PartialOptions) -> PartialOptions {
    let mut merged = serde_json::to_value(base).expect("options serialize");
    let over = serde_json::to_value(top).expect("options serialize");
    if let (Some(m), Some(o)) = (merged.as_object_mut(), over.as_object()) {
        for (k, v) in o {
            m.insert(k.clone(), v.clone());
        }
    }
    let mut out: PartialOptions = serde_json::from_value(merged).expect("merged options deserialize");
    out.custom_step = top.custom_step.clone().or_else(|| base.custom_step.clone());
    out
}

fn file_stem(name: &str) -> String {
    name.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || "-_.".contains(c) {
                c
            } else {
                '_'
            }
        })
        .collect()
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| HarnessError::io(path, e))
}

struct Job {
    name: String,
    method: Method,
    seed: u64,
    user: PartialOptions,
}

/// Runs the experiment. Validation failures return `Err` before any file is
/// written; solver failures are reported in the summary and by
/// [`Outcome::succeeded`].
pub fn run_experiment(config: &ExperimentConfig, overrides: &Overrides) -> Result<Outcome> {
    config.validate()?;
    let kind = config.kind()?;
    let methods = config.methods()?;
    let seed = config.resolve_seed(overrides.seed)?;
    let out_dir = overrides.out.clone().unwrap_or_else(|| config.output_dir.clone());

    let data = load_data(kind, &config.problem.data)?;
    let problem = build_problem(kind, config.problem.lambda, &data)?;
    if config.plots.trajectory && problem.dim() != 2 {
        return Err(HarnessError::UnsupportedDimension {
            kind: "trajectory",
            needs: "a 2-dimensional iterate",
            found: problem.dim(),
        });
    }
    if config.plots.classification {
        if kind.labels() == crate::config::LabelKind::Real {
            return Err(HarnessError::Usage(
                "classification plot needs a classification problem".into(),
            ));
        }
        if !(2..=3).contains(&data.n_features()) {
            return Err(HarnessError::UnsupportedDimension {
                kind: "classification",
                needs: "2 or 3 features",
                found: data.n_features(),
            });
        }
    }

    let mut warnings = Vec::new();
    let f_opt = if config.calc_solution {
        match calc_solution(problem.as_ref(), SOLUTION_MAX_ITER) {
            Ok((_, f)) => Some(f),
            Err(e) => {
                warnings.push(format!("reference optimum unavailable: {e}"));
                None
            }
        }
    } else {
        None
    };

    let global = SolverOptions {
        w_init: (data.w_init.len() == problem.dim()).then(|| data.w_init.clone()),
        f_opt,
        store_w: config.plots.trajectory,
        ..Default::default()
    };
    let mut seen: HashMap<&str, usize> = HashMap::new();
    let jobs: Vec<Job> = config
        .solvers
        .iter()
        .zip(&methods)
        .enumerate()
        .map(|(k, (spec, &method))| {
            let mut user = overlay(&config.options, &spec.options);
            if spec.sub_mode.is_some() {
                user.sub_mode = spec.sub_mode;
            }
            let solver_seed = user.seed.unwrap_or(seed.wrapping_add(k as u64));
            user.seed = Some(solver_seed);
            let count = seen.entry(method.name()).or_insert(0);
            *count += 1;
            let name = if *count == 1 {
                method.name().to_string()
            } else {
                format!("{}-{}", method.name(), count)
            };
            Job {
                name,
                method,
                seed: solver_seed,
                user,
            }
        })
        .collect();

    let problem_ref: &dyn Problem = problem.as_ref();
    let started = Instant::now();
    let results: Vec<std::result::Result<SolverResult, SolverError>> = std::thread::scope(|scope| {
        let handles: Vec<_> = jobs
            .iter()
            .map(|job| scope.spawn(|| job.method.solve(problem_ref, &global, &job.user)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("solver thread panicked"))
            .collect()
    });
    let _elapsed = started.elapsed();

    // all file writes happen here, after every solver has finished
    std::fs::create_dir_all(&out_dir).map_err(|e| HarnessError::io(&out_dir, e))?;
    let (score_x, score_y, split) = match (&data.x_test, &data.y_test) {
        (Some(x), Some(y)) => (x, y, "test"),
        _ => (&data.x_train, &data.y_train, "train"),
    };
    let mut summaries = Vec::new();
    let mut kept = Vec::new();
    for (job, res) in jobs.iter().zip(results) {
        let (status, result, error) = match res {
            Ok(r) => (RunStatus::Ok, Some(r), None),
            Err(SolverError::Diverged { partial, .. }) => {
                let msg = format!("{} diverged", job.name);
                (RunStatus::Diverged, Some(*partial), Some(msg))
            }
            Err(e) => (RunStatus::Error, None, Some(e.to_string())),
        };
        let mut s = SolverSummary {
            name: job.name.clone(),
            method: job.method.name().to_string(),
            seed: job.seed,
            status,
            csv: None,
            termination: None,
            error,
            epochs: 0,
            final_cost: None,
            final_optgap: None,
            final_gnorm: None,
            grad_calc_count: None,
            score: None,
            score_split: None,
            diagnostics: None,
        };
        if let Some(r) = &result {
            let file = format!("{}.csv", file_stem(&job.name));
            write_file(&out_dir.join(&file), &records::record_to_string(&r.record))?;
            s.csv = Some(file);
            if status == RunStatus::Ok {
                s.termination = Some(r.termination.as_str().to_string());
            }
            s.epochs = r.record.epoch();
            s.final_cost = r.record.cost.last().copied();
            s.final_optgap = r.record.optgap.last().copied().filter(|g| g.is_finite());
            s.final_gnorm = r.record.gnorm.last().copied();
            s.grad_calc_count = r.record.grad_calc_count.last().copied();
            if r.w.iter().all(|v| v.is_finite()) {
                s.score = predict_and_score(problem_ref, &r.w, score_x, score_y).ok();
                s.score_split = s.score.map(|_| split);
            }
            s.diagnostics = Some(r.diagnostics.clone());
        }
        summaries.push(s);
        kept.push(result);
    }

    let named: Vec<(String, &stochkit::RunRecord)> = jobs
        .iter()
        .zip(&kept)
        .filter_map(|(j, r)| r.as_ref().map(|r| (j.name.clone(), &r.record)))
        .collect();
    let mut plots = Vec::new();
    if config.plots.cost && !named.is_empty() {
        write_file(&out_dir.join("cost.svg"), &plot::cost_plot(&named))?;
        plots.push("cost.svg".to_string());
    }
    if config.plots.optgap && !named.is_empty() {
        match plot::optgap_plot(&named) {
            Some(svg) => {
                write_file(&out_dir.join("optgap.svg"), &svg)?;
                plots.push("optgap.svg".to_string());
            }
            None => warnings.push("optgap plot skipped: no reference optimum, every gap is infinite".into()),
        }
    }
    if config.plots.classification {
        // the solver with the lowest final cost
        let best = jobs
            .iter()
            .zip(&kept)
            .filter_map(|(j, r)| {
                r.as_ref()
                    .filter(|r| r.record.last_cost().is_some_and(f64::is_finite))
                    .map(|r| (j, r))
            })
            .min_by(|a, b| {
                a.1.record
                    .last_cost()
                    .unwrap()
                    .total_cmp(&b.1.record.last_cost().unwrap())
            });
        if let Some((job, r)) = best {
            let svg = plot::classification_plot(problem_ref, &job.name, &r.w, score_x, score_y)?;
            write_file(&out_dir.join("classification.svg"), &svg)?;
            plots.push("classification.svg".to_string());
        } else {
            warnings.push("classification plot skipped: no solver finished".into());
        }
    }
    if config.plots.trajectory {
        let paths: Vec<(String, &[stochkit::Vector])> = jobs
            .iter()
            .zip(&kept)
            .filter_map(|(j, r)| r.as_ref().map(|r| (j.name.clone(), r.record.w_hist.as_slice())))
            .collect();
        match plot::trajectory_plot(problem_ref, &paths) {
            Ok(svg) => {
                write_file(&out_dir.join("trajectory.svg"), &svg)?;
                plots.push("trajectory.svg".to_string());
            }
            Err(HarnessError::Usage(msg)) => warnings.push(format!("trajectory plot skipped: {msg}")),
            Err(e) => return Err(e),
        }
    }

    let summary = Summary {
        schema_version: SUMMARY_SCHEMA_VERSION,
        csv_schema_version: CSV_SCHEMA_VERSION,
        csv_columns: CSV_COLUMNS,
        stochkit_version: env!("CARGO_PKG_VERSION"),
        seed,
        problem: summarize(kind, config.problem.lambda, &data, problem.dim()),
        f_opt,
        solvers: summaries,
        plots,
        warnings,
        config: config.clone(),
    };
    write_file(&out_dir.join("summary.json"), &serde_json::to_string_pretty(&summary)?)?;
    Ok(Outcome {
        out_dir,
        summary,
        results: kept,
    })
}
