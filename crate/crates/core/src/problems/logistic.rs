use super::{check_features, check_lambda, ridge_term, sign_labels, smooth_bound, Samples};
use crate::error::Result;
use crate::{Matrix, Problem, Task, Vector};

/// Binary logistic regression: `(1/n) Σ log(1 + exp(−y_i wᵀx_i)) + (λ/2)‖w‖²`.
#[derive(Debug, Clone)]
pub struct LogisticRegression {
    data: Samples,
    lambda: f64,
}

pub fn make_logistic_regression(x: Matrix, y: Vector, lambda: f64) -> Result<LogisticRegression> {
    check_lambda(lambda)?;
    let data = Samples::new(x, y)?;
    data.require_binary()?;
    Ok(LogisticRegression { data, lambda })
}

pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + exp(z))` without overflow.
pub(crate) fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

impl LogisticRegression {
    fn margin(&self, w: &Vector, i: usize) -> f64 {
        self.data.y[i] * self.data.xt.column(i).dot(w)
    }
}

impl Problem for LogisticRegression {
    fn name(&self) -> &str {
        "logistic_regression"
    }

    fn samples(&self) -> usize {
        self.data.n()
    }

    fn dim(&self) -> usize {
        self.data.d()
    }

    fn lambda(&self) -> f64 {
        self.lambda
    }

    fn cost(&self, w: &Vector) -> f64 {
        let all: Vec<usize> = (0..self.samples()).collect();
        self.batch_cost(w, &all)
    }

    fn batch_cost(&self, w: &Vector, indices: &[usize]) -> f64 {
        let loss: f64 = indices.iter().map(|&i| softplus(-self.margin(w, i))).sum();
        loss / indices.len().max(1) as f64 + ridge_term(w, self.lambda)
    }

    fn grad(&self, w: &Vector, indices: &[usize]) -> Vector {
        let mut g = Vector::zeros(self.dim());
        for &i in indices {
            let coef = -self.data.y[i] * sigmoid(-self.margin(w, i));
            g.axpy(coef, &self.data.xt.column(i), 1.0);
        }
        g /= indices.len().max(1) as f64;
        g.axpy(self.lambda, w, 1.0);
        g
    }

    fn hess(&self, w: &Vector, indices: &[usize]) -> Matrix {
        let d = self.dim();
        let mut h = Matrix::zeros(d, d);
        for &i in indices {
            let m = self.margin(w, i);
            let x = self.data.xt.column(i);
            h.ger(sigmoid(m) * sigmoid(-m), &x, &x, 1.0);
        }
        h /= indices.len().max(1) as f64;
        for j in 0..d {
            h[(j, j)] += self.lambda;
        }
        h
    }

    fn hess_vec(&self, w: &Vector, v: &Vector, indices: &[usize]) -> Vector {
        let mut out = Vector::zeros(self.dim());
        for &i in indices {
            let m = self.margin(w, i);
            let x = self.data.xt.column(i);
            out.axpy(sigmoid(m) * sigmoid(-m) * x.dot(v), &x, 1.0);
        }
        out /= indices.len().max(1) as f64;
        out.axpy(self.lambda, v, 1.0);
        out
    }

    fn reg(&self, w: &Vector) -> f64 {
        ridge_term(w, self.lambda)
    }

    fn smoothness(&self) -> f64 {
        smooth_bound(&self.data, 0.25, self.lambda)
    }

    fn task(&self) -> Task {
        Task::Binary
    }

    fn predict(&self, w: &Vector, x: &Matrix) -> Vector {
        check_features(x, self.dim());
        sign_labels(x * w)
    }
}
