use crate::error::{Error, Result};
use crate::options::SubMode;
use crate::record::SolverResult;
use crate::run::Run;
use crate::{Problem, SolverOptions, Vector};

/// SARAH recursion `grad(w, S) − grad(w_prev, S) + v_prev`.
pub fn sarah_estimate(problem: &dyn Problem, w: &Vector, w_prev: &Vector, v_prev: &Vector, batch: &[usize]) -> Vector {
    problem.grad(w, batch) - problem.grad(w_prev, batch) + v_prev
}

/// SARAH, or SARAH+ with `sub_mode = Plus`.
///
/// Each epoch starts from `v₀ = ∇f(w₀)` and takes up to `m = ⌈n/b⌉` steps;
/// SARAH+ leaves the inner loop once `‖v_t‖² ≤ γ‖v₀‖²`. The last inner
/// iterate starts the next epoch.
pub fn sarah(problem: &dyn Problem, opts: &SolverOptions) -> Result<SolverResult> {
    let plus = match opts.sub_mode {
        None => false,
        Some(SubMode::Plus) => true,
        Some(other) => {
            return Err(Error::config(
                "sub_mode",
                format!("{} is not a SARAH mode", other.as_str()),
            ))
        }
    };
    let run = Run::new(if plus { "SARAH-Plus" } else { "SARAH" }, problem, opts)?;
    run.require_smooth()?;
    let w0 = run.initial_w();
    run.drive(w0, |run, w| {
        let mut v = run.full_grad(w);
        let threshold = opts.sarah_gamma * v.norm_squared();
        let mut w_prev = w.clone();
        w.axpy(-run.step()?, &v, 1.0);
        run.iter += 1;
        let mut steps = 1;
        let batches = run.batches(opts.batch_size);
        // the full-gradient step above is the first of the m inner steps
        for batch in batches.iter().skip(1) {
            if plus && v.norm_squared() <= threshold {
                break;
            }
            run.count(2 * batch.len());
            v = sarah_estimate(problem, w, &w_prev, &v, batch);
            w_prev.copy_from(w);
            w.axpy(-run.step()?, &v, 1.0);
            run.iter += 1;
            steps += 1;
        }
        run.diagnostics.inner_lengths.push(steps);
        Ok(())
    })
}
