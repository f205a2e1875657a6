#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use stochkit::problems::{
    generate_logistic_data, make_linear_regression, make_logistic_regression, LinearRegression, LogisticRegression,
};
use stochkit::{Matrix, Vector};

/// Training split of the demo data: 300 generated samples, d = 3, seed 2.
pub fn demo(lambda: f64) -> (LogisticRegression, Vector) {
    let data = generate_logistic_data(300, 3, 2).unwrap();
    (
        make_logistic_regression(data.x_train, data.y_train, lambda).unwrap(),
        data.w_init,
    )
}

pub fn gaussian_matrix(n: usize, d: usize, seed: u64) -> Matrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Matrix::from_fn(n, d, |_, _| rng.sample(StandardNormal))
}

/// Ridge regression on Gaussian features with noisy targets.
pub fn ridge(n: usize, d: usize, lambda: f64, seed: u64) -> (LinearRegression, Matrix, Vector) {
    let x = gaussian_matrix(n, d, seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed + 1000);
    let y = Vector::from_fn(n, |i, _| x.row(i).sum() + 0.3 * rng.sample::<f64, _>(StandardNormal));
    (make_linear_regression(x.clone(), y.clone(), lambda).unwrap(), x, y)
}

/// Closed-form ridge optimum of `(1/2n)‖Xw − y‖² + (λ/2)‖w‖²` and its value.
pub fn ridge_optimum(x: &Matrix, y: &Vector, lambda: f64) -> (Vector, f64) {
    let n = x.nrows() as f64;
    let d = x.ncols();
    let a = x.transpose() * x / n + Matrix::identity(d, d) * lambda;
    let b = x.transpose() * y / n;
    let w = a.lu().solve(&b).unwrap();
    let r = x * &w - y;
    let f = r.norm_squared() / (2.0 * n) + 0.5 * lambda * w.norm_squared();
    (w, f)
}

/// Two features with scales 1 and 100 and noiseless targets: Hessian condition number near 1e4.
pub fn ill_ridge() -> LinearRegression {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let x = Matrix::from_fn(100, 2, |_, j| {
        let z: f64 = rng.sample(StandardNormal);
        if j == 0 {
            z
        } else {
            100.0 * z
        }
    });
    let y = &x * Vector::from_vec(vec![1.0, -0.02]);
    make_linear_regression(x, y, 0.0).unwrap()
}

pub fn all(n: usize) -> Vec<usize> {
    (0..n).collect()
}
