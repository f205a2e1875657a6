use crate::error::Result;
use crate::record::SolverResult;
use crate::run::Run;
use crate::{Problem, SolverOptions, Vector};

/// Snapshot iterate and its full gradient.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub w: Vector,
    pub mu: Vector,
}

impl Snapshot {
    /// SVRG estimator `grad(w, S) − grad(w̃, S) + μ̃`.
    pub fn estimate(&self, problem: &dyn Problem, w: &Vector, batch: &[usize]) -> Vector {
        problem.grad(w, batch) - problem.grad(&self.w, batch) + &self.mu
    }
}

pub(crate) fn take_snapshot(run: &mut Run, w: &Vector) -> Snapshot {
    Snapshot {
        w: w.clone(),
        mu: run.full_grad(w),
    }
}

/// One SVRG inner pass of `⌈n/b⌉` steps with step sizes from `eta`.
fn inner_pass(run: &mut Run, w: &mut Vector, snap: &Snapshot, mut eta: impl FnMut(&Run) -> Result<f64>) -> Result<()> {
    for batch in run.full_batches(run.opts.batch_size) {
        run.count(2 * batch.len());
        let v = snap.estimate(run.problem, w, &batch);
        let step = eta(run)?;
        w.axpy(-step, &v, 1.0);
        run.prox(w, step);
        run.iter += 1;
    }
    Ok(())
}

/// SVRG with the last inner iterate as the next snapshot and `⌈n/b⌉` inner steps.
pub fn svrg(problem: &dyn Problem, opts: &SolverOptions) -> Result<SolverResult> {
    let run = Run::new("SVRG", problem, opts)?;
    let w0 = run.initial_w();
    run.drive(w0, |run, w| {
        let snap = take_snapshot(run, w);
        inner_pass(run, w, &snap, |run| run.step())
    })
}

/// Barzilai-Borwein step `‖s‖² / (m sᵀy)`, or `None` when the curvature is not positive.
pub fn bb_step(s: &Vector, y: &Vector, m: usize) -> Option<f64> {
    let sy = s.dot(y);
    let eta = s.norm_squared() / (m as f64 * sy);
    (sy > 0.0 && eta.is_finite() && eta > 0.0).then_some(eta)
}

/// SVRG whose step is re-estimated from consecutive snapshots from the second epoch on.
pub fn svrg_bb(problem: &dyn Problem, opts: &SolverOptions) -> Result<SolverResult> {
    let run = Run::new("SVRG-BB", problem, opts)?;
    let w0 = run.initial_w();
    let m = run.n().div_ceil(opts.batch_size);
    let (lo, hi) = (1e-10 * opts.step_init, 1e10 * opts.step_init);
    let mut eta = opts.step_init;
    let mut prev: Option<Snapshot> = None;
    run.drive(w0, |run, w| {
        let snap = take_snapshot(run, w);
        if let Some(old) = &prev {
            let s = &snap.w - &old.w;
            let y = &snap.mu - &old.mu;
            if let Some(bb) = bb_step(&s, &y, m) {
                eta = bb.clamp(lo, hi);
            }
        }
        run.diagnostics.step_sizes.push(eta);
        inner_pass(run, w, &snap, |_| Ok(eta))?;
        prev = Some(snap);
        Ok(())
    })
}
