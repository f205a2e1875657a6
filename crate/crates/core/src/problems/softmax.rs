use nalgebra::DMatrixView;

use super::{check_features, check_lambda, ridge_term, smooth_bound, Samples};
use crate::error::{Error, Result};
use crate::{Matrix, Problem, Task, Vector};

/// Multinomial logistic regression with weights `W ∈ R^{d×C}`.
///
/// The iterate is `W` flattened class-major: entry `(j, c)` lives at `c·d + j`,
/// so each class occupies one contiguous block of length `d`.
#[derive(Debug, Clone)]
pub struct SoftmaxRegression {
    data: Samples,
    classes: usize,
    labels: Vec<usize>,
    lambda: f64,
}

pub fn make_softmax_regression(x: Matrix, y: Vector, classes: usize, lambda: f64) -> Result<SoftmaxRegression> {
    check_lambda(lambda)?;
    if classes < 2 {
        return Err(Error::config("classes", "softmax needs at least two classes"));
    }
    let data = Samples::new(x, y)?;
    let mut labels = Vec::with_capacity(data.n());
    for (i, &v) in data.y.iter().enumerate() {
        if v < 0.0 || v.fract() != 0.0 || v >= classes as f64 {
            return Err(Error::Label {
                index: i,
                value: v,
                reason: "class index must be an integer in 0..classes",
            });
        }
        labels.push(v as usize);
    }
    Ok(SoftmaxRegression {
        data,
        classes,
        labels,
        lambda,
    })
}

impl SoftmaxRegression {
    pub fn classes(&self) -> usize {
        self.classes
    }

    fn weights<'a>(&self, w: &'a Vector) -> DMatrixView<'a, f64> {
        DMatrixView::from_slice(w.as_slice(), self.data.d(), self.classes)
    }

    fn logits(&self, w: &Vector, i: usize) -> Vector {
        self.weights(w).tr_mul(&self.data.xt.column(i))
    }

    /// Class probabilities of sample `i`.
    pub fn probabilities(&self, w: &Vector, i: usize) -> Vector {
        softmax(&self.logits(w, i))
    }
}

fn log_sum_exp(z: &Vector) -> f64 {
    let m = z.max();
    m + z.iter().map(|&v| (v - m).exp()).sum::<f64>().ln()
}

fn softmax(z: &Vector) -> Vector {
    let m = z.max();
    let e = z.map(|v| (v - m).exp());
    let s = e.sum();
    e / s
}

impl Problem for SoftmaxRegression {
    fn name(&self) -> &str {
        "softmax_regression"
    }

    fn samples(&self) -> usize {
        self.data.n()
    }

    fn dim(&self) -> usize {
        self.data.d() * self.classes
    }

    fn lambda(&self) -> f64 {
        self.lambda
    }

    fn cost(&self, w: &Vector) -> f64 {
        let all: Vec<usize> = (0..self.samples()).collect();
        self.batch_cost(w, &all)
    }

    fn batch_cost(&self, w: &Vector, indices: &[usize]) -> f64 {
        let loss: f64 = indices
            .iter()
            .map(|&i| {
                let z = self.logits(w, i);
                log_sum_exp(&z) - z[self.labels[i]]
            })
            .sum();
        loss / indices.len().max(1) as f64 + ridge_term(w, self.lambda)
    }

    fn grad(&self, w: &Vector, indices: &[usize]) -> Vector {
        let d = self.data.d();
        let mut g = Vector::zeros(self.dim());
        for &i in indices {
            let mut p = self.probabilities(w, i);
            p[self.labels[i]] -= 1.0;
            let x = self.data.xt.column(i);
            for c in 0..self.classes {
                g.rows_mut(c * d, d).axpy(p[c], &x, 1.0);
            }
        }
        g /= indices.len().max(1) as f64;
        g.axpy(self.lambda, w, 1.0);
        g
    }

    fn hess(&self, w: &Vector, indices: &[usize]) -> Matrix {
        let d = self.data.d();
        let k = self.classes;
        let mut h = Matrix::zeros(d * k, d * k);
        for &i in indices {
            let p = self.probabilities(w, i);
            let x = self.data.xt.column(i);
            let xx = x * x.transpose();
            for a in 0..k {
                for b in 0..k {
                    let coef = if a == b { p[a] - p[a] * p[b] } else { -p[a] * p[b] };
                    let mut block = h.view_mut((a * d, b * d), (d, d));
                    block += &xx * coef;
                }
            }
        }
        h /= indices.len().max(1) as f64;
        for j in 0..d * k {
            h[(j, j)] += self.lambda;
        }
        h
    }

    fn hess_vec(&self, w: &Vector, v: &Vector, indices: &[usize]) -> Vector {
        let d = self.data.d();
        let vm = self.weights(v);
        let mut out = Vector::zeros(self.dim());
        for &i in indices {
            let p = self.probabilities(w, i);
            let x = self.data.xt.column(i);
            let a = vm.tr_mul(&x);
            let pa = p.dot(&a);
            for c in 0..self.classes {
                out.rows_mut(c * d, d).axpy(p[c] * (a[c] - pa), &x, 1.0);
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
        smooth_bound(&self.data, 0.5, self.lambda)
    }

    fn task(&self) -> Task {
        Task::Multiclass { classes: self.classes }
    }

    fn predict(&self, w: &Vector, x: &Matrix) -> Vector {
        check_features(x, self.data.d());
        let scores = x * self.weights(w);
        Vector::from_fn(x.nrows(), |r, _| scores.row(r).transpose().argmax().0 as f64)
    }
}
