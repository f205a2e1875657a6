use crate::error::{Error, Result};
use crate::{Matrix, Problem, Task, Vector};

/// Componentwise `sign(w_j) · max(|w_j| − thr, 0)`, the proximal map of `thr‖·‖₁`.
pub fn soft_threshold(w: &Vector, thr: f64) -> Result<Vector> {
    if thr.is_nan() || thr < 0.0 {
        return Err(Error::Argument(format!(
            "soft-threshold level must be non-negative, got {thr}"
        )));
    }
    Ok(w.map(|v| shrink(v, thr)))
}

fn shrink(v: f64, thr: f64) -> f64 {
    if v > thr {
        v - thr
    } else if v < -thr {
        v + thr
    } else {
        0.0
    }
}

/// Adds `λ‖w‖₁` to a smooth problem. Gradients and Hessians stay those of the
/// smooth part; solvers reach the L1 term through [`Problem::prox`].
#[derive(Debug, Clone)]
pub struct L1Regularized<P> {
    inner: P,
    lambda: f64,
    name: String,
}

pub fn attach_l1<P: Problem>(problem: P, lambda: f64) -> Result<L1Regularized<P>> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::config("lambda", "L1 weight must be positive"));
    }
    let name = format!("l1_{}", problem.name());
    Ok(L1Regularized {
        inner: problem,
        lambda,
        name,
    })
}

impl<P> L1Regularized<P> {
    pub fn inner(&self) -> &P {
        &self.inner
    }
}

impl<P: Problem> Problem for L1Regularized<P> {
    fn name(&self) -> &str {
        &self.name
    }

    fn samples(&self) -> usize {
        self.inner.samples()
    }

    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn lambda(&self) -> f64 {
        self.lambda
    }

    fn cost(&self, w: &Vector) -> f64 {
        self.inner.cost(w) + self.lambda * w.lp_norm(1)
    }

    fn batch_cost(&self, w: &Vector, indices: &[usize]) -> f64 {
        self.inner.batch_cost(w, indices)
    }

    fn grad(&self, w: &Vector, indices: &[usize]) -> Vector {
        self.inner.grad(w, indices)
    }

    fn full_grad(&self, w: &Vector) -> Vector {
        self.inner.full_grad(w)
    }

    fn hess(&self, w: &Vector, indices: &[usize]) -> Matrix {
        self.inner.hess(w, indices)
    }

    fn hess_vec(&self, w: &Vector, v: &Vector, indices: &[usize]) -> Vector {
        self.inner.hess_vec(w, v, indices)
    }

    fn reg(&self, w: &Vector) -> f64 {
        self.inner.reg(w) + self.lambda * w.lp_norm(1)
    }

    fn has_prox(&self) -> bool {
        true
    }

    fn prox(&self, w: &Vector, step: f64) -> Vector {
        w.map(|v| shrink(v, step * self.lambda))
    }

    fn smoothness(&self) -> f64 {
        self.inner.smoothness()
    }

    fn task(&self) -> Task {
        self.inner.task()
    }

    fn predict(&self, w: &Vector, x: &Matrix) -> Vector {
        self.inner.predict(w, x)
    }
}
