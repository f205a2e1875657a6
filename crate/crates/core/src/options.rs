//! Solver options, three-level option merging and step-size schedules.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Vector;

/// Closed-form step-size schedules selected by `step_alg`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum StepAlg {
    /// `η = η₀`
    #[default]
    #[serde(rename = "fix")]
    Fix,
    /// `η = η₀ / (1 + η₀ λ k)`
    #[serde(rename = "decay")]
    Decay,
    /// `η = η₀ / (1 + k)`
    #[serde(rename = "decay-2")]
    Decay2,
    /// `η = η₀ / (λ + k)`
    #[serde(rename = "decay-3")]
    Decay3,
    /// Delegates to [`SolverOptions::custom_step`].
    #[serde(rename = "custom")]
    Custom,
}

impl StepAlg {
    pub fn as_str(self) -> &'static str {
        match self {
            StepAlg::Fix => "fix",
            StepAlg::Decay => "decay",
            StepAlg::Decay2 => "decay-2",
            StepAlg::Decay3 => "decay-3",
            StepAlg::Custom => "custom",
        }
    }
}

/// User-supplied schedule: receives the total inner-iteration counter and the schedule.
pub type StepFn = Arc<dyn Fn(usize, &StepSchedule) -> f64 + Send + Sync>;

/// A fully resolved step-size schedule.
#[derive(Clone)]
pub struct StepSchedule {
    pub kind: StepAlg,
    pub step_init: f64,
    pub step_lambda: f64,
    pub custom: Option<StepFn>,
}

impl fmt::Debug for StepSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("StepSchedule")
            .field("kind", &self.kind)
            .field("step_init", &self.step_init)
            .field("step_lambda", &self.step_lambda)
            .field("custom", &self.custom.is_some())
            .finish()
    }
}

impl StepSchedule {
    pub fn fixed(step_init: f64) -> Self {
        StepSchedule {
            kind: StepAlg::Fix,
            step_init,
            step_lambda: 0.0,
            custom: None,
        }
    }
}

/// Evaluates the schedule at total inner-iteration count `k`.
pub fn eval_stepsize(k: usize, sched: &StepSchedule) -> Result<f64> {
    let eta0 = sched.step_init;
    let lam = sched.step_lambda;
    let kf = k as f64;
    let step = match sched.kind {
        StepAlg::Fix => eta0,
        StepAlg::Decay => eta0 / (1.0 + eta0 * lam * kf),
        StepAlg::Decay2 => eta0 / (1.0 + kf),
        StepAlg::Decay3 => {
            let denom = lam + kf;
            if denom == 0.0 {
                return Err(Error::DivisionByZero);
            }
            eta0 / denom
        }
        StepAlg::Custom => match &sched.custom {
            Some(f) => f(k, sched),
            None => {
                return Err(Error::config(
                    "custom_step",
                    "step_alg is custom but no function was supplied",
                ))
            }
        },
    };
    if step.is_finite() && step > 0.0 {
        Ok(step)
    } else {
        Err(Error::InvalidStep(step))
    }
}

/// Solver variant tag, named after the `sub_mode` values of the solver roster.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SubMode {
    #[serde(rename = "CM")]
    Cm,
    #[serde(rename = "CM-NAG")]
    CmNag,
    AdaGrad,
    RMSProp,
    AdaDelta,
    Adam,
    AdaMax,
    #[serde(rename = "SAG")]
    Sag,
    #[serde(rename = "SAGA")]
    Saga,
    Plus,
    #[serde(rename = "Inf-mem")]
    InfMem,
    #[serde(rename = "Lim-mem")]
    LimMem,
    #[serde(rename = "SQN")]
    Sqn,
    #[serde(rename = "SVRG-SQN")]
    SvrgSqn,
    #[serde(rename = "SVRG-LBFGS")]
    SvrgLbfgs,
}

impl SubMode {
    pub fn as_str(self) -> &'static str {
        match self {
            SubMode::Cm => "CM",
            SubMode::CmNag => "CM-NAG",
            SubMode::AdaGrad => "AdaGrad",
            SubMode::RMSProp => "RMSProp",
            SubMode::AdaDelta => "AdaDelta",
            SubMode::Adam => "Adam",
            SubMode::AdaMax => "AdaMax",
            SubMode::Sag => "SAG",
            SubMode::Saga => "SAGA",
            SubMode::Plus => "Plus",
            SubMode::InfMem => "Inf-mem",
            SubMode::LimMem => "Lim-mem",
            SubMode::Sqn => "SQN",
            SubMode::SvrgSqn => "SVRG-SQN",
            SubMode::SvrgLbfgs => "SVRG-LBFGS",
        }
    }
}

/// How mini-batches are drawn within an epoch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sampling {
    /// Shuffle once per epoch and cut the permutation into batches.
    #[default]
    Permutation,
    /// Draw every index independently with replacement.
    Iid,
}

/// Fully merged solver configuration.
#[derive(Clone)]
pub struct SolverOptions {
    pub max_epoch: usize,
    pub batch_size: usize,
    pub step_init: f64,
    pub step_alg: StepAlg,
    /// Decay parameter of the schedules; unrelated to the problem's λ.
    pub step_lambda: f64,
    pub custom_step: Option<StepFn>,
    pub tol_optgap: f64,
    pub tol_gnorm: f64,
    pub f_opt: Option<f64>,
    pub sub_mode: Option<SubMode>,
    pub sampling: Sampling,
    pub seed: u64,
    pub store_w: bool,
    pub w_init: Option<Vector>,

    /// Momentum coefficient ρ for SGD-CM and SGD-CM-NAG.
    pub momentum: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    /// Accumulator decay of RMSProp and AdaDelta.
    pub decay_rate: f64,

    /// SARAH+ early exit ratio γ.
    pub sarah_gamma: f64,
    /// Descent-confidence constant θ of BB-SGD.
    pub bb_theta: f64,

    /// δ-shift of the regularized oBFGS.
    pub delta: f64,
    pub damped: bool,
    pub mem_size: usize,
    /// Curvature-pair cadence L of the SQN family.
    pub update_period: usize,
    /// Hessian batch size; `None` means twice the batch size.
    pub hess_batch_size: Option<usize>,
    /// Eigenvalue floor of SS-SVRG relative to the largest eigenvalue.
    pub ss_floor_ratio: f64,
    /// Absolute eigenvalue floor of SS-SVRG, overriding the ratio.
    pub ss_floor: Option<f64>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            max_epoch: 100,
            batch_size: 10,
            step_init: 0.1,
            step_alg: StepAlg::Fix,
            step_lambda: 0.1,
            custom_step: None,
            tol_optgap: 1e-12,
            tol_gnorm: 1e-12,
            f_opt: None,
            sub_mode: None,
            sampling: Sampling::Permutation,
            seed: 0,
            store_w: false,
            w_init: None,
            momentum: 0.9,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            decay_rate: 0.9,
            sarah_gamma: 0.125,
            bb_theta: 1.0,
            delta: 0.0,
            damped: false,
            mem_size: 10,
            update_period: 10,
            hess_batch_size: None,
            ss_floor_ratio: 1e-6,
            ss_floor: None,
        }
    }
}

impl fmt::Debug for SolverOptions {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SolverOptions")
            .field("max_epoch", &self.max_epoch)
            .field("batch_size", &self.batch_size)
            .field("step_init", &self.step_init)
            .field("step_alg", &self.step_alg)
            .field("step_lambda", &self.step_lambda)
            .field("sub_mode", &self.sub_mode)
            .field("seed", &self.seed)
            .finish_non_exhaustive()
    }
}

impl PartialEq for SolverOptions {
    fn eq(&self, other: &Self) -> bool {
        PartialOptions::from(self) == PartialOptions::from(other)
    }
}

impl SolverOptions {
    pub fn schedule(&self) -> StepSchedule {
        StepSchedule {
            kind: self.step_alg,
            step_init: self.step_init,
            step_lambda: self.step_lambda,
            custom: self.custom_step.clone(),
        }
    }

    pub fn step(&self, k: usize) -> Result<f64> {
        eval_stepsize(k, &self.schedule())
    }

    pub fn hess_batch(&self) -> usize {
        self.hess_batch_size.unwrap_or(2 * self.batch_size)
    }

    /// Checks every field against its admissible range.
    pub fn validate(&self) -> Result<()> {
        fn check(ok: bool, field: &'static str, reason: &str) -> Result<()> {
            if ok {
                Ok(())
            } else {
                Err(Error::config(field, reason))
            }
        }
        let unit = |x: f64| (0.0..1.0).contains(&x);
        check(self.max_epoch >= 1, "max_epoch", "must be positive")?;
        check(self.batch_size >= 1, "batch_size", "must be positive")?;
        check(
            self.step_init.is_finite() && self.step_init > 0.0,
            "step_init",
            "must be positive and finite",
        )?;
        check(
            self.step_lambda.is_finite() && self.step_lambda >= 0.0,
            "step_lambda",
            "must be non-negative",
        )?;
        check(
            self.step_alg != StepAlg::Custom || self.custom_step.is_some(),
            "custom_step",
            "step_alg is custom but no function was supplied",
        )?;
        check(self.tol_optgap >= 0.0, "tol_optgap", "must be non-negative")?;
        check(self.tol_gnorm >= 0.0, "tol_gnorm", "must be non-negative")?;
        check(self.f_opt.is_none_or(f64::is_finite), "f_opt", "must be finite")?;
        check(unit(self.momentum), "momentum", "must lie in [0, 1)")?;
        check(unit(self.beta1), "beta1", "must lie in [0, 1)")?;
        check(unit(self.beta2), "beta2", "must lie in [0, 1)")?;
        check(self.epsilon > 0.0, "epsilon", "must be positive")?;
        check(
            self.decay_rate > 0.0 && self.decay_rate < 1.0,
            "decay_rate",
            "must lie in (0, 1)",
        )?;
        check(
            self.sarah_gamma > 0.0 && self.sarah_gamma <= 1.0,
            "sarah_gamma",
            "must lie in (0, 1]",
        )?;
        check(self.bb_theta > 0.0, "bb_theta", "must be positive")?;
        check(
            self.delta.is_finite() && self.delta >= 0.0,
            "delta",
            "must be non-negative",
        )?;
        check(self.mem_size >= 1, "mem_size", "must be positive")?;
        check(self.update_period >= 1, "update_period", "must be positive")?;
        check(
            self.hess_batch_size.is_none_or(|b| b >= 1),
            "hess_batch_size",
            "must be positive",
        )?;
        check(self.ss_floor_ratio > 0.0, "ss_floor_ratio", "must be positive")?;
        check(self.ss_floor.is_none_or(|s| s > 0.0), "ss_floor", "must be positive")?;
        if let Some(w) = &self.w_init {
            check(w.iter().all(|x| x.is_finite()), "w_init", "must be finite")?;
        }
        Ok(())
    }
}

/// A caller-supplied schedule inside [`PartialOptions`], compared by identity.
#[derive(Clone)]
pub struct StepHook(pub StepFn);

impl fmt::Debug for StepHook {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("StepHook(..)")
    }
}

impl PartialEq for StepHook {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }
}

macro_rules! partial_options {
    ($($(#[$meta:meta])* $field:ident : $ty:ty),* $(,)?) => {
        /// Sparse set of option overrides; absent fields fall through to the next layer.
        #[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
        #[serde(default, deny_unknown_fields)]
        pub struct PartialOptions {
            $($(#[$meta])* #[serde(skip_serializing_if = "Option::is_none")] pub $field: Option<$ty>,)*
            #[serde(skip)]
            pub custom_step: Option<StepHook>,
        }

        impl From<&SolverOptions> for PartialOptions {
            fn from(o: &SolverOptions) -> Self {
                PartialOptions {
                    $($field: partial_options!(@lift o.$field, $ty),)*
                    custom_step: o.custom_step.clone().map(StepHook),
                }
            }
        }

        /// Merges three option layers with precedence `user > local > global`.
        pub fn merge_options(
            global: &SolverOptions,
            local: &PartialOptions,
            user: &PartialOptions,
        ) -> Result<SolverOptions> {
            let mut out = global.clone();
            $(partial_options!(@merge out, local, user, $field);)*
            out.custom_step = user
                .custom_step
                .as_ref()
                .or(local.custom_step.as_ref())
                .map(|h| h.0.clone())
                .or_else(|| global.custom_step.clone());
            out.validate()?;
            Ok(out)
        }
    };
    (@lift $e:expr, $ty:ty) => { lift(&$e) };
    (@merge $out:ident, $l:ident, $u:ident, $field:ident) => {
        if let Some(v) = $u.$field.clone().or_else(|| $l.$field.clone()) {
            set(&mut $out.$field, v);
        }
    };
}

// Fields that are themselves optional in `SolverOptions` are stored as the inner
// type in `PartialOptions`; `lift`/`set` bridge the two shapes.
trait Layer<T> {
    fn lift(&self) -> Option<T>;
    fn put(&mut self, v: T);
}

impl<T: Clone> Layer<T> for T {
    fn lift(&self) -> Option<T> {
        Some(self.clone())
    }
    fn put(&mut self, v: T) {
        *self = v;
    }
}

impl<T: Clone> Layer<T> for Option<T> {
    fn lift(&self) -> Option<T> {
        self.clone()
    }
    fn put(&mut self, v: T) {
        *self = Some(v);
    }
}

fn lift<S: Layer<T>, T>(s: &S) -> Option<T> {
    s.lift()
}

fn set<S: Layer<T>, T>(s: &mut S, v: T) {
    s.put(v)
}

mod vector_list {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::Vector;

    pub fn serialize<S: Serializer>(v: &Option<Vector>, s: S) -> Result<S::Ok, S::Error> {
        v.as_ref().map(|v| v.as_slice().to_vec()).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Vector>, D::Error> {
        Ok(Option::<Vec<f64>>::deserialize(d)?.map(Vector::from_vec))
    }
}

partial_options! {
    max_epoch: usize,
    batch_size: usize,
    step_init: f64,
    step_alg: StepAlg,
    step_lambda: f64,
    tol_optgap: f64,
    tol_gnorm: f64,
    f_opt: f64,
    sub_mode: SubMode,
    sampling: Sampling,
    seed: u64,
    store_w: bool,
    /// Written as a plain JSON array.
    #[serde(with = "vector_list")]
    w_init: Vector,
    momentum: f64,
    beta1: f64,
    beta2: f64,
    epsilon: f64,
    decay_rate: f64,
    sarah_gamma: f64,
    bb_theta: f64,
    delta: f64,
    damped: bool,
    mem_size: usize,
    update_period: usize,
    hess_batch_size: usize,
    ss_floor_ratio: f64,
    ss_floor: f64,
}
