//! Seeded synthetic datasets.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::{Matrix, Vector};

/// Fraction of generated samples held out for scoring.
const TEST_FRACTION: f64 = 0.2;
/// Standard deviation of the generated logistic starting point. Large on purpose:
/// the demo starts far from the optimum.
pub const LOGISTIC_INIT_SCALE: f64 = 5.0;

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    /// Samples as rows, `n × d`.
    pub x_train: Matrix,
    /// Real targets, ±1 labels or class indices, depending on the problem.
    pub y_train: Vector,
    pub x_test: Option<Matrix>,
    pub y_test: Option<Vector>,
    /// Starting point, flattened class-major for multiclass problems.
    pub w_init: Vector,
    /// Ground-truth parameter when the generator knows it.
    pub w_true: Option<Vector>,
    pub classes: Option<usize>,
}

impl Dataset {
    pub fn n_train(&self) -> usize {
        self.x_train.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.x_train.ncols()
    }

    pub fn has_test(&self) -> bool {
        self.x_test.is_some() && self.y_test.is_some()
    }

    /// Builds a dataset from rows and labels, using the training split for both.
    pub fn from_samples(x: Matrix, y: Vector) -> Result<Self> {
        if x.nrows() != y.len() {
            return Err(Error::Dimension {
                what: "label count",
                expected: x.nrows(),
                found: y.len(),
            });
        }
        let d = x.ncols();
        Ok(Dataset {
            x_train: x,
            y_train: y,
            x_test: None,
            y_test: None,
            w_init: Vector::zeros(d),
            w_true: None,
            classes: None,
        })
    }

    /// Splits the first `1 − TEST_FRACTION` rows into training and the rest into test.
    fn split(x: Matrix, y: Vector, w_init: Vector) -> Self {
        let n = x.nrows();
        let n_test = ((n as f64 * TEST_FRACTION).round() as usize).min(n - 1);
        let n_train = n - n_test;
        let (x_test, y_test) = if n_test > 0 {
            (
                Some(x.rows(n_train, n_test).into_owned()),
                Some(y.rows(n_train, n_test).into_owned()),
            )
        } else {
            (None, None)
        };
        Dataset {
            x_train: x.rows(0, n_train).into_owned(),
            y_train: y.rows(0, n_train).into_owned(),
            x_test,
            y_test,
            w_init,
            w_true: None,
            classes: None,
        }
    }
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

fn check_sizes(n: usize, d: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::config("n", "need at least two samples"));
    }
    if d < 1 {
        return Err(Error::config("d", "need at least one feature"));
    }
    Ok(())
}

/// Two Gaussian clusters with unit covariance and means `±(2/√d)·1`, labels ±1.
pub fn generate_logistic_data(n: usize, d: usize, seed: u64) -> Result<Dataset> {
    check_sizes(n, d)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let offset = 2.0 / (d as f64).sqrt();
    let mut x = Matrix::zeros(n, d);
    let mut y = Vector::zeros(n);
    for i in 0..n {
        let label = if rng.random::<bool>() { 1.0 } else { -1.0 };
        y[i] = label;
        for j in 0..d {
            x[(i, j)] = label * offset + normal(&mut rng);
        }
    }
    let w_init = Vector::from_fn(d, |_, _| LOGISTIC_INIT_SCALE * normal(&mut rng));
    Ok(Dataset::split(x, y, w_init))
}

/// `y = w_trueᵀx + ε` with standard normal features and `ε ~ N(0, noise_sigma²)`.
pub fn generate_linear_data(n: usize, d: usize, noise_sigma: f64, seed: u64) -> Result<Dataset> {
    check_sizes(n, d)?;
    if noise_sigma.is_nan() || noise_sigma < 0.0 {
        return Err(Error::config("noise_sigma", "must be non-negative"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w_true = Vector::from_fn(d, |_, _| normal(&mut rng));
    let x = Matrix::from_fn(n, d, |_, _| normal(&mut rng));
    let noise = Vector::from_fn(n, |_, _| noise_sigma * normal(&mut rng));
    let y = &x * &w_true + noise;
    let w_init = Vector::from_fn(d, |_, _| normal(&mut rng));
    let mut data = Dataset::split(x, y, w_init);
    data.w_true = Some(w_true);
    Ok(data)
}

/// `classes` Gaussian clusters with unit covariance around random centers of norm 2.
pub fn generate_multiclass_data(n: usize, d: usize, classes: usize, seed: u64) -> Result<Dataset> {
    check_sizes(n, d)?;
    if classes < 2 {
        return Err(Error::config("classes", "need at least two classes"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let centers: Vec<Vector> = (0..classes)
        .map(|_| {
            let c = Vector::from_fn(d, |_, _| normal(&mut rng));
            let norm = c.norm();
            if norm > 0.0 {
                c * (2.0 / norm)
            } else {
                c
            }
        })
        .collect();
    let mut x = Matrix::zeros(n, d);
    let mut y = Vector::zeros(n);
    for i in 0..n {
        let c = rng.random_range(0..classes);
        y[i] = c as f64;
        for j in 0..d {
            x[(i, j)] = centers[c][j] + normal(&mut rng);
        }
    }
    let w_init = Vector::from_fn(d * classes, |_, _| normal(&mut rng));
    let mut data = Dataset::split(x, y, w_init);
    data.classes = Some(classes);
    Ok(data)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn logistic_shapes_and_labels() {
        let data = generate_logistic_data(300, 3, 7).unwrap();
        let test = data.x_test.as_ref().unwrap();
        assert_eq!(data.n_train() + test.nrows(), 300);
        assert_eq!(data.n_train(), 240);
        assert_eq!(data.x_train.ncols(), 3);
        assert_eq!(test.ncols(), 3);
        assert_eq!(data.w_init.len(), 3);
        let y_test = data.y_test.as_ref().unwrap();
        assert!(data.y_train.iter().chain(y_test.iter()).all(|&v| v == 1.0 || v == -1.0));
    }

    #[test]
    fn generators_are_deterministic() {
        assert_eq!(
            generate_logistic_data(50, 4, 11).unwrap(),
            generate_logistic_data(50, 4, 11).unwrap()
        );
        assert_ne!(
            generate_logistic_data(50, 4, 11).unwrap(),
            generate_logistic_data(50, 4, 12).unwrap()
        );
        assert_eq!(
            generate_linear_data(40, 3, 0.5, 3).unwrap(),
            generate_linear_data(40, 3, 0.5, 3).unwrap()
        );
        assert_eq!(
            generate_multiclass_data(40, 3, 4, 3).unwrap(),
            generate_multiclass_data(40, 3, 4, 3).unwrap()
        );
    }

    #[test]
    fn noiseless_linear_data_is_exact() {
        let data = generate_linear_data(20, 4, 0.0, 5).unwrap();
        let w = data.w_true.as_ref().unwrap();
        let residual = &data.x_train * w - &data.y_train;
        assert!(residual.amax() < 1e-15);
    }

    #[test]
    fn multiclass_labels_in_range() {
        let data = generate_multiclass_data(100, 2, 3, 1).unwrap();
        assert_eq!(data.classes, Some(3));
        assert_eq!(data.w_init.len(), 6);
        assert!(data.y_train.iter().all(|&c| c == 0.0 || c == 1.0 || c == 2.0));
    }

    #[test]
    fn rejects_degenerate_sizes() {
        assert!(generate_logistic_data(1, 3, 0).is_err());
        assert!(generate_logistic_data(10, 0, 0).is_err());
        assert!(generate_linear_data(10, 2, -1.0, 0).is_err());
    }
}
