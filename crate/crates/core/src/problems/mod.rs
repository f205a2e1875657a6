//! Built-in problem descriptors, data generators and scoring.

mod data;
pub mod gradcheck;
mod l1;
mod linear;
mod logistic;
mod score;
mod softmax;
mod svm;

pub use data::{generate_linear_data, generate_logistic_data, generate_multiclass_data, Dataset};
pub use l1::{attach_l1, soft_threshold, L1Regularized};
pub use linear::{make_linear_regression, LinearRegression};
pub use logistic::{make_logistic_regression, LogisticRegression};
pub use score::{predict_and_score, ScoreKind, ScoreReport};
pub use softmax::{make_softmax_regression, SoftmaxRegression};
pub use svm::{make_linear_svm, LinearSvm};

use crate::error::{Error, Result};
use crate::linalg::gram_spectral_bound;
use crate::refopt;
use crate::{Matrix, Problem, Vector};

/// Training samples stored column-wise (`d × n`) so each sample is a contiguous column.
#[derive(Debug, Clone)]
pub(crate) struct Samples {
    pub xt: Matrix,
    pub y: Vector,
    /// Largest eigenvalue of `XᵀX / n`.
    pub gram_bound: f64,
}

impl Samples {
    pub fn new(x: Matrix, y: Vector) -> Result<Self> {
        if x.nrows() != y.len() {
            return Err(Error::Dimension {
                what: "label count",
                expected: x.nrows(),
                found: y.len(),
            });
        }
        if x.nrows() == 0 || x.ncols() == 0 {
            return Err(Error::Argument(
                "dataset must have at least one sample and one feature".into(),
            ));
        }
        if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Argument("dataset contains non-finite values".into()));
        }
        let gram_bound = gram_spectral_bound(&x);
        Ok(Samples {
            xt: x.transpose(),
            y,
            gram_bound,
        })
    }

    pub fn n(&self) -> usize {
        self.xt.ncols()
    }

    pub fn d(&self) -> usize {
        self.xt.nrows()
    }

    pub fn require_binary(&self) -> Result<()> {
        for (i, &v) in self.y.iter().enumerate() {
            if v != 1.0 && v != -1.0 {
                return Err(Error::Label {
                    index: i,
                    value: v,
                    reason: "binary labels must be -1 or +1",
                });
            }
        }
        Ok(())
    }
}

pub(crate) fn check_lambda(lambda: f64) -> Result<()> {
    if lambda.is_finite() && lambda >= 0.0 {
        Ok(())
    } else {
        Err(Error::config("lambda", "must be finite and non-negative"))
    }
}

pub(crate) fn check_dim(what: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::Dimension { what, expected, found })
    }
}

/// Tolerance used by [`calc_solution`] on the gradient norm (or prox-gradient mapping).
pub const SOLUTION_TOL: f64 = 1e-10;
pub const SOLUTION_MAX_ITER: usize = 1000;
/// Proximal gradient descent converges only linearly, so the L1 path gets a larger budget.
const PROX_ITER_FACTOR: usize = 50;

/// Reference optimum `(w*, f(w*))`.
///
/// Smooth problems use L-BFGS; problems with a proximal term use proximal
/// gradient descent with the fixed step `1/L`.
pub fn calc_solution(problem: &dyn Problem, max_iter: usize) -> Result<(Vector, f64)> {
    let w0 = Vector::zeros(problem.dim());
    let result = if problem.has_prox() {
        let step = 1.0 / problem.smoothness();
        refopt::gradient_descent(
            problem,
            &w0,
            refopt::LineSearch::Fixed(step),
            max_iter * PROX_ITER_FACTOR,
            SOLUTION_TOL,
        )?
    } else {
        refopt::lbfgs(problem, &w0, refopt::DEFAULT_MEMORY, max_iter, SOLUTION_TOL)?
    };
    let f = problem.cost(&result.w);
    if !f.is_finite() {
        return Err(Error::Optimization("reference objective is not finite".into()));
    }
    Ok((result.w, f))
}

pub(crate) fn ridge_term(w: &Vector, lambda: f64) -> f64 {
    0.5 * lambda * w.norm_squared()
}

pub(crate) fn smooth_bound(samples: &Samples, curvature: f64, lambda: f64) -> f64 {
    curvature * samples.gram_bound + lambda
}

pub(crate) fn sign_labels(scores: Vector) -> Vector {
    scores.map(|s| if s >= 0.0 { 1.0 } else { -1.0 })
}

pub(crate) fn check_features(x: &Matrix, d: usize) {
    assert_eq!(
        x.ncols(),
        d,
        "prediction input has {} features, problem expects {d}",
        x.ncols()
    );
}
