//! Curvature-pair storage and inverse-Hessian approximations shared by the
//! reference L-BFGS and the stochastic quasi-Newton solvers.

use std::collections::VecDeque;

use crate::{Matrix, Vector};

/// A curvature pair with its cached `1 / sᵀy`.
#[derive(Debug, Clone, PartialEq)]
pub struct Pair {
    pub s: Vector,
    pub y: Vector,
    rho: f64,
}

impl Pair {
    pub fn curvature(&self) -> f64 {
        1.0 / self.rho
    }
}

/// Bounded ring buffer of `(s, y)` pairs. Only pairs with `sᵀy > 0` are kept.
#[derive(Debug, Clone)]
pub struct CurvaturePairs {
    capacity: usize,
    pairs: VecDeque<Pair>,
    skipped: usize,
    gamma: Option<f64>,
}

impl CurvaturePairs {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity >= 1, "curvature memory needs at least one slot");
        CurvaturePairs {
            capacity,
            pairs: VecDeque::with_capacity(capacity),
            skipped: 0,
            gamma: None,
        }
    }

    /// Stores the pair if `sᵀy > 0`, evicting the oldest when full.
    pub fn push(&mut self, s: Vector, y: Vector) -> bool {
        let sy = s.dot(&y);
        if !(sy > 0.0 && sy.is_finite()) {
            self.skipped += 1;
            return false;
        }
        if self.pairs.len() == self.capacity {
            self.pairs.pop_front();
        }
        self.gamma.get_or_insert(sy / y.norm_squared());
        self.pairs.push_back(Pair { s, y, rho: 1.0 / sy });
        true
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn skipped(&self) -> usize {
        self.skipped
    }

    /// Drops every pair and the initial scaling.
    pub fn clear(&mut self) {
        self.pairs.clear();
        self.gamma = None;
    }

    pub fn iter(&self) -> impl DoubleEndedIterator<Item = &Pair> {
        self.pairs.iter()
    }

    /// Initial scaling `sᵀy / yᵀy` taken from the first accepted pair, 1 before it.
    /// Using the same `H₀` as [`DenseInverseHessian`] makes both agree while the
    /// memory still holds the full history.
    pub fn gamma(&self) -> f64 {
        self.gamma.unwrap_or(1.0)
    }

    /// Two-loop recursion: returns `H g` for the limited-memory inverse Hessian.
    pub fn apply(&self, g: &Vector) -> Vector {
        let mut q = g.clone();
        let mut alpha = Vec::with_capacity(self.pairs.len());
        for p in self.pairs.iter().rev() {
            let a = p.rho * p.s.dot(&q);
            q.axpy(-a, &p.y, 1.0);
            alpha.push(a);
        }
        q *= self.gamma();
        for (p, a) in self.pairs.iter().zip(alpha.into_iter().rev()) {
            let b = p.rho * p.y.dot(&q);
            q.axpy(a - b, &p.s, 1.0);
        }
        q
    }
}

/// Dense BFGS estimate. `B` is updated by the direct formula and `H` is the
/// inverse of `B + δI`. With `δ = 0`, `H` is updated by the inverse formula.
///
/// With `δ > 0` the pair fed to the update is expected to be the shifted
/// `y − δs`, so that `(B⁺ + δI) s = y` and `B + δI ⪰ δI` whatever the curvature.
#[derive(Debug, Clone)]
pub struct DenseInverseHessian {
    h: Matrix,
    b: Matrix,
    shift: f64,
    updates: usize,
}

impl DenseInverseHessian {
    pub fn new(dim: usize) -> Self {
        Self::with_shift(dim, 0.0)
    }

    pub fn with_shift(dim: usize, shift: f64) -> Self {
        DenseInverseHessian {
            h: Matrix::identity(dim, dim),
            b: Matrix::identity(dim, dim),
            shift,
            updates: 0,
        }
    }

    pub fn matrix(&self) -> &Matrix {
        &self.h
    }

    pub fn updates(&self) -> usize {
        self.updates
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    pub fn apply(&self, g: &Vector) -> Vector {
        &self.h * g
    }

    /// `(B + δI) s`, the Hessian estimate the steps actually use.
    pub fn hessian_apply(&self, s: &Vector) -> Vector {
        &self.b * s + s * self.shift
    }

    /// The unshifted part `B`.
    pub fn hessian(&self) -> &Matrix {
        &self.b
    }

    /// BFGS update of `B` with `(s, y)` and the matching update of `H`; rejects
    /// pairs with `sᵀy ≤ 0`. Before the first update `B` is rescaled to
    /// `(yᵀy / sᵀy) I`.
    pub fn update(&mut self, s: &Vector, y: &Vector) -> bool {
        let sy = s.dot(y);
        if !(sy > 0.0 && sy.is_finite()) {
            return false;
        }
        let dim = self.h.nrows();
        if self.updates == 0 {
            let gamma = sy / y.norm_squared();
            self.h = Matrix::identity(dim, dim) * gamma;
            self.b = Matrix::identity(dim, dim) / gamma;
        }
        let bs = &self.b * s;
        let sbs = s.dot(&bs);
        self.b.ger(-1.0 / sbs, &bs, &bs, 1.0);
        self.b.ger(1.0 / sy, y, y, 1.0);
        self.b = (&self.b + self.b.transpose()) * 0.5;
        if self.shift > 0.0 {
            let shifted = &self.b + Matrix::identity(dim, dim) * self.shift;
            match shifted.cholesky() {
                Some(c) => self.h = c.inverse(),
                None => return false,
            }
        } else {
            let rho = 1.0 / sy;
            let hy = &self.h * y;
            let yhy = y.dot(&hy);
            self.h.ger(-rho, s, &hy, 1.0);
            self.h.ger(-rho, &hy, s, 1.0);
            self.h.ger(rho * rho * yhy + rho, s, s, 1.0);
        }
        // symmetrize away rounding
        let sym = (&self.h + self.h.transpose()) * 0.5;
        self.h = sym;
        self.updates += 1;
        true
    }
}

/// Powell damping threshold: damped pairs satisfy `sᵀy ≥ POWELL_RATIO · sᵀBs`.
pub const POWELL_RATIO: f64 = 0.2;

/// Replaces `y` by `θy + (1 − θ)Bs` with θ chosen so that `sᵀy ≥ 0.2 sᵀBs`.
/// Returns the damped vector and θ.
pub fn powell_damping(s: &Vector, y: &Vector, bs: &Vector) -> (Vector, f64) {
    let sbs = s.dot(bs);
    let sy = s.dot(y);
    if sy >= POWELL_RATIO * sbs {
        return (y.clone(), 1.0);
    }
    let theta = (1.0 - POWELL_RATIO) * sbs / (sbs - sy);
    let mut damped = y * theta + bs * (1.0 - theta);
    // the combination cancels badly when sᵀy ≪ 0; put sᵀy back on the threshold
    let miss = POWELL_RATIO * sbs - s.dot(&damped);
    damped.axpy(miss / s.norm_squared(), s, 1.0);
    (damped, theta)
}
