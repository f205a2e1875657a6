use serde::{Deserialize, Serialize};

use super::check_dim;
use crate::error::{Error, Result};
use crate::{Matrix, Problem, Task, Vector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreKind {
    Accuracy,
    Mse,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub kind: ScoreKind,
    pub value: f64,
}

/// Number of input features a problem's iterate acts on.
pub(crate) fn feature_count(problem: &dyn Problem) -> usize {
    match problem.task() {
        Task::Multiclass { classes } => problem.dim() / classes,
        _ => problem.dim(),
    }
}

/// Mean squared error for regression problems, accuracy for classifiers.
pub fn predict_and_score(problem: &dyn Problem, w: &Vector, x: &Matrix, y: &Vector) -> Result<ScoreReport> {
    check_dim("iterate", problem.dim(), w.len())?;
    check_dim("test features", feature_count(problem), x.ncols())?;
    check_dim("test labels", x.nrows(), y.len())?;
    if y.is_empty() {
        return Err(Error::Argument("cannot score an empty test set".into()));
    }
    let pred = problem.predict(w, x);
    Ok(match problem.task() {
        Task::Regression => ScoreReport {
            kind: ScoreKind::Mse,
            value: mse(&pred, y),
        },
        Task::Binary | Task::Multiclass { .. } => ScoreReport {
            kind: ScoreKind::Accuracy,
            value: accuracy(&pred, y),
        },
    })
}

pub fn accuracy(pred: &Vector, truth: &Vector) -> f64 {
    let correct = pred.iter().zip(truth.iter()).filter(|(p, t)| p == t).count();
    correct as f64 / truth.len() as f64
}

pub fn mse(pred: &Vector, truth: &Vector) -> f64 {
    (pred - truth).norm_squared() / truth.len() as f64
}
