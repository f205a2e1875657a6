//! Small dense linear-algebra helpers shared by problems and solvers.

use nalgebra::{DMatrix, DVector};

pub type Vector = DVector<f64>;
pub type Matrix = DMatrix<f64>;

/// Largest eigenvalue of a symmetric positive semidefinite operator by power iteration.
pub fn power_iteration<F>(dim: usize, apply: F, iters: usize) -> f64
where
    F: Fn(&Vector) -> Vector,
{
    if dim == 0 {
        return 0.0;
    }
    // deterministic start with no special alignment to the axes
    let mut v = Vector::from_fn(dim, |i, _| 1.0 + 0.1 * ((i * 7 + 3) % 11) as f64);
    v /= v.norm();
    let mut estimate = 0.0;
    for _ in 0..iters {
        let av = apply(&v);
        let norm = av.norm();
        if norm == 0.0 {
            return 0.0;
        }
        estimate = v.dot(&av);
        v = av / norm;
    }
    estimate.max(0.0)
}

/// Largest eigenvalue of `XᵀX / n`, padded slightly so it is an upper bound in practice.
pub fn gram_spectral_bound(x: &Matrix) -> f64 {
    let n = x.nrows().max(1) as f64;
    let top = power_iteration(x.ncols(), |v| x.tr_mul(&(x * v)) / n, 200);
    top * (1.0 + 1e-6)
}

/// `‖a − b‖ / max(‖a‖, ‖b‖)`, zero when both vanish.
pub fn relative_error(a: &Vector, b: &Vector) -> f64 {
    let scale = a.norm().max(b.norm());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).norm() / scale
    }
}
