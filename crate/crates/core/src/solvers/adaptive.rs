use crate::error::{Error, Result};
use crate::options::SubMode;
use crate::record::SolverResult;
use crate::run::Run;
use crate::{Problem, SolverOptions, Vector};

/// Per-coordinate accumulators of the adaptive methods.
#[derive(Debug, Clone, PartialEq)]
pub struct AdaptiveState {
    /// First moment (Adam, AdaMax).
    pub m: Vector,
    /// Second moment; the ∞-norm accumulator for AdaMax.
    pub v: Vector,
    /// Squared-update accumulator (AdaDelta).
    pub delta_acc: Vector,
    pub t: u64,
}

impl AdaptiveState {
    pub fn new(dim: usize) -> Self {
        AdaptiveState {
            m: Vector::zeros(dim),
            v: Vector::zeros(dim),
            delta_acc: Vector::zeros(dim),
            t: 0,
        }
    }

    /// Update `Δ` for gradient `g` with scheduled step `eta`; advances `t` by one.
    pub fn update(&mut self, mode: SubMode, g: &Vector, eta: f64, opts: &SolverOptions) -> Vector {
        self.t += 1;
        let eps = opts.epsilon;
        match mode {
            SubMode::AdaGrad => {
                self.v += g.component_mul(g);
                g.zip_map(&self.v, |gi, vi| -eta * gi / (vi.sqrt() + eps))
            }
            SubMode::RMSProp => {
                let beta = opts.decay_rate;
                self.v.zip_apply(g, |vi, gi| *vi = beta * *vi + (1.0 - beta) * gi * gi);
                g.zip_map(&self.v, |gi, vi| -eta * gi / (vi.sqrt() + eps))
            }
            SubMode::AdaDelta => {
                let rho = opts.decay_rate;
                self.v.zip_apply(g, |vi, gi| *vi = rho * *vi + (1.0 - rho) * gi * gi);
                let step = Vector::from_fn(g.len(), |j, _| {
                    -((self.delta_acc[j] + eps).sqrt() / (self.v[j] + eps).sqrt()) * g[j]
                });
                self.delta_acc
                    .zip_apply(&step, |ai, di| *ai = rho * *ai + (1.0 - rho) * di * di);
                step
            }
            SubMode::Adam => {
                let (b1, b2) = (opts.beta1, opts.beta2);
                self.m.zip_apply(g, |mi, gi| *mi = b1 * *mi + (1.0 - b1) * gi);
                self.v.zip_apply(g, |vi, gi| *vi = b2 * *vi + (1.0 - b2) * gi * gi);
                let c1 = 1.0 - b1.powi(self.t as i32);
                let c2 = 1.0 - b2.powi(self.t as i32);
                self.m
                    .zip_map(&self.v, |mi, vi| -eta * (mi / c1) / ((vi / c2).sqrt() + eps))
            }
            SubMode::AdaMax => {
                let (b1, b2) = (opts.beta1, opts.beta2);
                self.m.zip_apply(g, |mi, gi| *mi = b1 * *mi + (1.0 - b1) * gi);
                self.v.zip_apply(g, |ui, gi| *ui = (b2 * *ui).max(gi.abs()));
                let scale = eta / (1.0 - b1.powi(self.t as i32));
                self.m.zip_map(&self.v, |mi, ui| -scale * mi / (ui + eps))
            }
            other => unreachable!("{} is not an adaptive mode", other.as_str()),
        }
    }
}

fn run_adaptive(
    name: &'static str,
    mode: SubMode,
    problem: &dyn Problem,
    opts: &SolverOptions,
) -> Result<SolverResult> {
    let run = Run::new(name, problem, opts)?;
    let w0 = run.initial_w();
    let mut state = AdaptiveState::new(problem.dim());
    run.drive(w0, |run, w| {
        for batch in run.batches(opts.batch_size) {
            let g = run.grad(w, &batch);
            let eta = run.step()?;
            *w += state.update(mode, &g, eta, opts);
            run.prox(w, eta);
            run.iter += 1;
        }
        Ok(())
    })
}

/// AdaGrad, RMSProp or AdaDelta, selected by `sub_mode` (AdaGrad when unset).
/// AdaDelta ignores the step schedule except for the proximal map.
pub fn adagrad_family(problem: &dyn Problem, opts: &SolverOptions) -> Result<SolverResult> {
    let (name, mode) = match opts.sub_mode {
        None | Some(SubMode::AdaGrad) => ("AdaGrad", SubMode::AdaGrad),
        Some(SubMode::RMSProp) => ("RMSProp", SubMode::RMSProp),
        Some(SubMode::AdaDelta) => ("AdaDelta", SubMode::AdaDelta),
        Some(other) => {
            return Err(Error::config(
                "sub_mode",
                format!("{} is not an AdaGrad-family mode", other.as_str()),
            ))
        }
    };
    run_adaptive(name, mode, problem, opts)
}

/// Adam or AdaMax, selected by `sub_mode` (Adam when unset).
pub fn adam_family(problem: &dyn Problem, opts: &SolverOptions) -> Result<SolverResult> {
    let (name, mode) = match opts.sub_mode {
        None | Some(SubMode::Adam) => ("Adam", SubMode::Adam),
        Some(SubMode::AdaMax) => ("AdaMax", SubMode::AdaMax),
        Some(other) => {
            return Err(Error::config(
                "sub_mode",
                format!("{} is not an Adam-family mode", other.as_str()),
            ))
        }
    };
    run_adaptive(name, mode, problem, opts)
}
