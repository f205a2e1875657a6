use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use stochkit::problems::gradcheck::{builtin_suite, check_problem};
use stochkit_harness::config::{config_paths, DataSource, FileFormat, ProblemSpec};
use stochkit_harness::experiment::{reference_solution, RunStatus};
use stochkit_harness::{demo_config, run_experiment, ExperimentConfig, HarnessError, Outcome, Overrides, ProblemKind};

#[derive(Parser)]
#[command(name = "stochkit", version, about = "Run stochastic optimization experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a JSON config, or every config in a directory.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory, overriding the config. With a directory of configs,
        /// each one writes to a subdirectory named after its file.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Base seed, overriding the config and STOCHKIT_SEED.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// SGD against SVRG on a small generated logistic regression.
    Demo {
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Check analytic gradients and Hessians of the built-in problems against finite differences.
    Gradcheck {
        /// Restrict to one problem kind.
        #[arg(long)]
        problem: Option<String>,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Compute the reference optimum of one problem on a data file.
    Solve {
        #[arg(long)]
        problem: String,
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value = "csv")]
        format: String,
        /// Feature count of a LIBSVM file; inferred when absent.
        #[arg(long)]
        features: Option<usize>,
        #[arg(long, default_value_t = 0.01)]
        lambda: f64,
        /// Also write the solution as JSON to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn report(outcome: &Outcome) -> ExitCode {
    for s in &outcome.summary.solvers {
        let cost = s.final_cost.map_or("-".to_string(), |c| format!("{c:.6e}"));
        let gap = s.final_optgap.map_or("-".to_string(), |g| format!("{g:.3e}"));
        let status = s.termination.as_deref().unwrap_or(match s.status {
            RunStatus::Diverged => "diverged",
            _ => "error",
        });
        println!(
            "{:<16} epochs {:>4}  cost {cost}  optgap {gap}  [{status}]",
            s.name, s.epochs
        );
        if let Some(e) = &s.error {
            eprintln!("{}: {e}", s.name);
        }
    }
    for w in &outcome.summary.warnings {
        eprintln!("warning: {w}");
    }
    println!("results written to {}", outcome.out_dir.display());
    if outcome.succeeded() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn gradcheck(problem: Option<String>, trials: usize, seed: u64) -> Result<ExitCode, HarnessError> {
    let only = problem.map(|p| p.parse::<ProblemKind>()).transpose()?;
    let mut ok = true;
    for (kind, p) in ProblemKind::ALL.into_iter().zip(builtin_suite(seed)?) {
        if only.is_some_and(|o| o != kind) {
            continue;
        }
        let r = check_problem(p.as_ref(), trials, seed);
        ok &= r.passed();
        println!(
            "{:<24} grad {:.2e}  hess_vec {:.2e}  asym {:.2e}  {}",
            kind,
            r.max_grad_error,
            r.max_hess_vec_error,
            r.max_hess_asymmetry,
            if r.passed() { "ok" } else { "FAILED" }
        );
    }
    Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn dispatch(cli: Cli) -> Result<ExitCode, HarnessError> {
    match cli.command {
        Command::Run { config, out, seed } => {
            let paths = config_paths(&config)?;
            let configs = paths
                .iter()
                .map(|p| ExperimentConfig::load(p))
                .collect::<Result<Vec<_>, _>>()?;
            for cfg in &configs {
                cfg.validate()?;
            }
            if configs.len() == 1 {
                return Ok(report(&run_experiment(&configs[0], &Overrides { out, seed })?));
            }
            let root = out.unwrap_or_else(|| PathBuf::from("stochkit-out"));
            let mut code = ExitCode::SUCCESS;
            for (path, cfg) in paths.iter().zip(&configs) {
                let stem = path
                    .file_stem()
                    .map_or("config".into(), |s| s.to_string_lossy().into_owned());
                println!("== {stem}");
                let outcome = run_experiment(
                    cfg,
                    &Overrides {
                        out: Some(root.join(&stem)),
                        seed,
                    },
                )?;
                if report(&outcome) != ExitCode::SUCCESS {
                    code = ExitCode::from(1);
                }
            }
            Ok(code)
        }
        Command::Demo { out, seed } => Ok(report(&run_experiment(&demo_config(), &Overrides { out, seed })?)),
        Command::Gradcheck { problem, trials, seed } => gradcheck(problem, trials, seed),
        Command::Solve {
            problem,
            data,
            format,
            features,
            lambda,
            out,
        } => {
            let spec = ProblemSpec {
                kind: problem,
                lambda,
                data: DataSource::File {
                    path: data,
                    format: format.parse::<FileFormat>()?,
                    features,
                    test_path: None,
                },
            };
            if let DataSource::File { path, .. } = &spec.data {
                if !path.is_file() {
                    return Err(HarnessError::Usage(format!(
                        "data file {} does not exist",
                        path.display()
                    )));
                }
            }
            let sol = reference_solution(&spec)?;
            println!("f_opt {:?}", sol.f_opt);
            println!("gnorm {:e}", sol.gnorm);
            println!("{:?} ({}) {}", sol.score.kind, sol.score_split, sol.score.value);
            println!("w {:?}", sol.w);
            if let Some(path) = out {
                let text = serde_json::to_string_pretty(&sol)?;
                std::fs::write(&path, text).map_err(|e| HarnessError::io(&path, e))?;
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
