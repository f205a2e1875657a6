use super::{check_features, check_lambda, ridge_term, smooth_bound, Samples};
use crate::error::Result;
use crate::{Matrix, Problem, Task, Vector};

/// Ridge regression: `(1/2n) Σ (wᵀx_i − y_i)² + (λ/2)‖w‖²`.
#[derive(Debug, Clone)]
pub struct LinearRegression {
    data: Samples,
    lambda: f64,
}

pub fn make_linear_regression(x: Matrix, y: Vector, lambda: f64) -> Result<LinearRegression> {
    check_lambda(lambda)?;
    Ok(LinearRegression {
        data: Samples::new(x, y)?,
        lambda,
    })
}

impl LinearRegression {
    fn residual(&self, w: &Vector, i: usize) -> f64 {
        self.data.xt.column(i).dot(w) - self.data.y[i]
    }
}

impl Problem for LinearRegression {
    fn name(&self) -> &str {
        "linear_regression"
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
        let sq: f64 = indices.iter().map(|&i| self.residual(w, i).powi(2)).sum();
        0.5 * sq / indices.len().max(1) as f64 + ridge_term(w, self.lambda)
    }

    fn grad(&self, w: &Vector, indices: &[usize]) -> Vector {
        let mut g = Vector::zeros(self.dim());
        for &i in indices {
            g.axpy(self.residual(w, i), &self.data.xt.column(i), 1.0);
        }
        g /= indices.len().max(1) as f64;
        g.axpy(self.lambda, w, 1.0);
        g
    }

    fn hess(&self, _w: &Vector, indices: &[usize]) -> Matrix {
        let d = self.dim();
        let mut h = Matrix::zeros(d, d);
        for &i in indices {
            let x = self.data.xt.column(i);
            h.ger(1.0, &x, &x, 1.0);
        }
        h /= indices.len().max(1) as f64;
        for j in 0..d {
            h[(j, j)] += self.lambda;
        }
        h
    }

    fn hess_vec(&self, _w: &Vector, v: &Vector, indices: &[usize]) -> Vector {
        let mut out = Vector::zeros(self.dim());
        for &i in indices {
            let x = self.data.xt.column(i);
            out.axpy(x.dot(v), &x, 1.0);
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
        Task::Regression
    }

    fn predict(&self, w: &Vector, x: &Matrix) -> Vector {
        check_features(x, self.dim());
        x * w
    }
}
