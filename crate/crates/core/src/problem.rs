//! The problem descriptor contract.
//!
//! Every built-in objective has the finite-sum form
//!
//! ```text
//! f(w) = (1/n) Σ_i L(w, x_i, y_i) + λ R(w)
//! ```
//!
//! and exposes the mini-batch oracles solvers need: the averaged gradient,
//! Hessian and Hessian-vector product over an index set. Solvers only see
//! this trait, so problems and solvers can be combined freely.

use serde::{Deserialize, Serialize};

use crate::{Matrix, Vector};

/// What kind of predictions a problem makes, which decides how it is scored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Regression,
    /// Binary labels in {-1, +1}.
    Binary,
    /// Class indices `0..classes`.
    Multiclass {
        classes: usize,
    },
}

pub trait Problem: Send + Sync {
    fn name(&self) -> &str;

    /// Number of samples `n`.
    fn samples(&self) -> usize;

    /// Length of the (flattened) iterate.
    fn dim(&self) -> usize;

    /// Regularization weight. For L1 variants this is the L1 weight.
    fn lambda(&self) -> f64;

    /// Full objective `f(w)`, including every regularizer.
    fn cost(&self, w: &Vector) -> f64;

    /// Smooth part of the objective averaged over `indices`.
    ///
    /// `grad(w, S)` is the exact gradient of `batch_cost(w, S)`.
    fn batch_cost(&self, w: &Vector, indices: &[usize]) -> f64;

    /// Mini-batch stochastic gradient `(1/|S|) Σ_{i∈S} ∇f_i(w)` of the smooth part.
    fn grad(&self, w: &Vector, indices: &[usize]) -> Vector;

    fn full_grad(&self, w: &Vector) -> Vector {
        let all: Vec<usize> = (0..self.samples()).collect();
        self.grad(w, &all)
    }

    /// Per-sample gradients for every index of the batch, in order.
    fn sample_grads(&self, w: &Vector, indices: &[usize]) -> Vec<Vector> {
        indices.iter().map(|&i| self.grad(w, &[i])).collect()
    }

    fn hess(&self, w: &Vector, indices: &[usize]) -> Matrix;

    fn hess_vec(&self, w: &Vector, v: &Vector, indices: &[usize]) -> Vector;

    /// Value of the regularization term `λR(w)`.
    fn reg(&self, w: &Vector) -> f64;

    /// Whether the regularizer is non-smooth and handled by [`Problem::prox`].
    fn has_prox(&self) -> bool {
        false
    }

    /// Proximal map of `step · λR`. Identity for smooth problems.
    fn prox(&self, w: &Vector, _step: f64) -> Vector {
        w.clone()
    }

    /// Upper bound on the smoothness constant of the averaged smooth part.
    fn smoothness(&self) -> f64;

    fn task(&self) -> Task;

    /// Predicted values (regression) or labels (classification) for the rows of `x`.
    fn predict(&self, w: &Vector, x: &Matrix) -> Vector;
}

impl<P: Problem + ?Sized> Problem for Box<P> {
    fn name(&self) -> &str {
        (**self).name()
    }
    fn samples(&self) -> usize {
        (**self).samples()
    }
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn lambda(&self) -> f64 {
        (**self).lambda()
    }
    fn cost(&self, w: &Vector) -> f64 {
        (**self).cost(w)
    }
    fn batch_cost(&self, w: &Vector, indices: &[usize]) -> f64 {
        (**self).batch_cost(w, indices)
    }
    fn grad(&self, w: &Vector, indices: &[usize]) -> Vector {
        (**self).grad(w, indices)
    }
    fn full_grad(&self, w: &Vector) -> Vector {
        (**self).full_grad(w)
    }
    fn sample_grads(&self, w: &Vector, indices: &[usize]) -> Vec<Vector> {
        (**self).sample_grads(w, indices)
    }
    fn hess(&self, w: &Vector, indices: &[usize]) -> Matrix {
        (**self).hess(w, indices)
    }
    fn hess_vec(&self, w: &Vector, v: &Vector, indices: &[usize]) -> Vector {
        (**self).hess_vec(w, v, indices)
    }
    fn reg(&self, w: &Vector) -> f64 {
        (**self).reg(w)
    }
    fn has_prox(&self) -> bool {
        (**self).has_prox()
    }
    fn prox(&self, w: &Vector, step: f64) -> Vector {
        (**self).prox(w, step)
    }
    fn smoothness(&self) -> f64 {
        (**self).smoothness()
    }
    fn task(&self) -> Task {
        (**self).task()
    }
    fn predict(&self, w: &Vector, x: &Matrix) -> Vector {
        (**self).predict(w, x)
    }
}
