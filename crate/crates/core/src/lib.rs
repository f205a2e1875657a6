//! Stochastic optimization solvers for regularized finite-sum problems
//!
//! ```text
//! min_w f(w) = (1/n) Σ_i L(w, x_i, y_i) + λ R(w)
//! ```
//!
//! Problems implement [`Problem`]; solvers take a problem and merged
//! [`SolverOptions`] and return a [`SolverResult`] whose [`RunRecord`] holds
//! one row of statistics per epoch.
//!
//! ```
//! use stochkit::problems::{generate_logistic_data, make_logistic_regression};
//! use stochkit::solvers::svrg;
//! use stochkit::SolverOptions;
//!
//! let data = generate_logistic_data(100, 3, 7).unwrap();
//! let problem = make_logistic_regression(data.x_train, data.y_train, 0.01).unwrap();
//! let opts = SolverOptions { max_epoch: 5, ..Default::default() };
//! let result = svrg(&problem, &opts).unwrap();
//! assert_eq!(result.record.len(), 6);
//! ```

pub mod error;
pub mod linalg;
pub mod options;
pub mod problem;
pub mod problems;
pub mod quasi_newton;
pub mod record;
pub mod refopt;
mod run;
pub mod solvers;

pub use error::{Error, Result};
pub use linalg::{Matrix, Vector};
pub use options::{
    eval_stepsize, merge_options, PartialOptions, Sampling, SolverOptions, StepAlg, StepFn, StepHook, StepSchedule,
    SubMode,
};
pub use problem::{Problem, Task};
pub use record::{check_stop, record_epoch, Counters, Diagnostics, RunRecord, SolverResult, Termination};
