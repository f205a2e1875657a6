//! Finite-difference consistency checks for problem descriptors.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use super::{
    attach_l1, generate_linear_data, generate_logistic_data, generate_multiclass_data, make_linear_regression,
    make_linear_svm, make_logistic_regression, make_softmax_regression,
};
use crate::error::Result;
use crate::linalg::relative_error;
use crate::{Problem, Vector};

pub const FD_STEP: f64 = 1e-6;
pub const GRAD_TOL: f64 = 1e-5;
pub const HESS_VEC_TOL: f64 = 1e-10;

/// Central differences `(f(w + h e_j) − f(w − h e_j)) / 2h`.
pub fn central_difference<F: Fn(&Vector) -> f64>(f: F, w: &Vector, h: f64) -> Vector {
    let mut probe = w.clone();
    Vector::from_fn(w.len(), |j, _| {
        let orig = probe[j];
        probe[j] = orig + h;
        let up = f(&probe);
        probe[j] = orig - h;
        let down = f(&probe);
        probe[j] = orig;
        (up - down) / (2.0 * h)
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct GradCheckReport {
    pub problem: String,
    pub trials: usize,
    pub max_grad_error: f64,
    pub max_hess_vec_error: f64,
    pub max_hess_asymmetry: f64,
}

impl GradCheckReport {
    pub fn passed(&self) -> bool {
        self.max_grad_error <= GRAD_TOL && self.max_hess_vec_error <= HESS_VEC_TOL && self.max_hess_asymmetry <= 1e-12
    }
}

/// Compares `grad` with central differences of `batch_cost` and `hess_vec` with
/// the explicit `hess` on `trials` random (iterate, batch, direction) triples.
pub fn check_problem(problem: &dyn Problem, trials: usize, seed: u64) -> GradCheckReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = problem.samples();
    let d = problem.dim();
    let mut report = GradCheckReport {
        problem: problem.name().to_string(),
        trials,
        max_grad_error: 0.0,
        max_hess_vec_error: 0.0,
        max_hess_asymmetry: 0.0,
    };
    for _ in 0..trials {
        let w = Vector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal));
        let v = Vector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal));
        let size = rng.random_range(1..=n);
        let batch = sample(&mut rng, n, size).into_vec();

        let analytic = problem.grad(&w, &batch);
        let numeric = central_difference(|x| problem.batch_cost(x, &batch), &w, FD_STEP);
        report.max_grad_error = report.max_grad_error.max(relative_error(&analytic, &numeric));

        let h = problem.hess(&w, &batch);
        let hv = problem.hess_vec(&w, &v, &batch);
        report.max_hess_vec_error = report.max_hess_vec_error.max(relative_error(&hv, &(&h * &v)));
        let asym = (&h - h.transpose()).amax() / h.amax().max(f64::MIN_POSITIVE);
        report.max_hess_asymmetry = report.max_hess_asymmetry.max(asym);
    }
    report
}

/// The six built-in problems on small generated instances.
pub fn builtin_suite(seed: u64) -> Result<Vec<Box<dyn Problem>>> {
    let lin = generate_linear_data(40, 5, 0.1, seed)?;
    let log = generate_logistic_data(40, 4, seed.wrapping_add(1))?;
    let multi = generate_multiclass_data(40, 3, 3, seed.wrapping_add(2))?;
    Ok(vec![
        Box::new(make_linear_regression(lin.x_train.clone(), lin.y_train.clone(), 0.1)?),
        Box::new(make_logistic_regression(log.x_train.clone(), log.y_train.clone(), 0.1)?),
        Box::new(make_softmax_regression(
            multi.x_train.clone(),
            multi.y_train.clone(),
            3,
            0.1,
        )?),
        Box::new(make_linear_svm(log.x_train.clone(), log.y_train.clone(), 0.1)?),
        Box::new(attach_l1(make_linear_regression(lin.x_train, lin.y_train, 0.0)?, 0.1)?),
        Box::new(attach_l1(
            make_logistic_regression(log.x_train, log.y_train, 0.0)?,
            0.1,
        )?),
    ])
}
