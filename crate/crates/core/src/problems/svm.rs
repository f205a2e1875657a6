use super::{check_features, check_lambda, ridge_term, sign_labels, smooth_bound, Samples};
use crate::error::Result;
use crate::{Matrix, Problem, Task, Vector};

/// Linear SVM with the squared hinge loss:
/// `(1/2n) Σ max(0, 1 − y_i wᵀx_i)² + (λ/2)‖w‖²`.
#[derive(Debug, Clone)]
pub struct LinearSvm {
    data: Samples,
    lambda: f64,
}

pub fn make_linear_svm(x: Matrix, y: Vector, lambda: f64) -> Result<LinearSvm> {
    check_lambda(lambda)?;
    let data = Samples::new(x, y)?;
    data.require_binary()?;
    Ok(LinearSvm { data, lambda })
}

impl LinearSvm {
    /// `max(0, 1 − y_i wᵀx_i)`
    fn slack(&self, w: &Vector, i: usize) -> f64 {
        (1.0 - self.data.y[i] * self.data.xt.column(i).dot(w)).max(0.0)
    }
}

impl Problem for LinearSvm {
    fn name(&self) -> &str {
        "linear_svm"
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
        let sq: f64 = indices.iter().map(|&i| self.slack(w, i).powi(2)).sum();
        0.5 * sq / indices.len().max(1) as f64 + ridge_term(w, self.lambda)
    }

    fn grad(&self, w: &Vector, indices: &[usize]) -> Vector {
        let mut g = Vector::zeros(self.dim());
        for &i in indices {
            let s = self.slack(w, i);
            if s > 0.0 {
                g.axpy(-self.data.y[i] * s, &self.data.xt.column(i), 1.0);
            }
        }
        g /= indices.len().max(1) as f64;
        g.axpy(self.lambda, w, 1.0);
        g
    }

    /// Generalized Hessian: samples with an active hinge contribute `x xᵀ`.
    fn hess(&self, w: &Vector, indices: &[usize]) -> Matrix {
        let d = self.dim();
        let mut h = Matrix::zeros(d, d);
        for &i in indices {
            if self.slack(w, i) > 0.0 {
                let x = self.data.xt.column(i);
                h.ger(1.0, &x, &x, 1.0);
            }
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
            if self.slack(w, i) > 0.0 {
                let x = self.data.xt.column(i);
                out.axpy(x.dot(v), &x, 1.0);
            }
        }
        out /= indices.len().max(1) as f64;
        out.axpy(self.lambda, v, 1.0);
        out
    }

    fn reg(&self, w: &Vector) -> f64 {
        ridge_term(w, self.lambda)
    }

    fn smoothness(&self) -> f64 {
        smooth_bound(&self.data, 1.0, self.lambda)
    }

    fn task(&self) -> Task {
        Task::Binary
    }

    fn predict(&self, w: &Vector, x: &Matrix) -> Vector {
        check_features(x, self.dim());
        sign_labels(x * w)
    }
}
