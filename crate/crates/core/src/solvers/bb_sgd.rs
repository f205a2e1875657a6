use crate::error::Result;
use crate::record::SolverResult;
use crate::run::Run;
use crate::{Problem, SolverOptions, Vector};

/// Whether the batch mean is trusted as a descent direction:
/// `‖ḡ‖² ≥ θ V̂ / b`, with `V̂` the sample variance of the per-sample gradients
/// (zero for a single sample).
pub fn descent_test(grads: &[Vector], theta: f64) -> (Vector, bool) {
    let b = grads.len();
    let mean = grads.iter().fold(Vector::zeros(grads[0].len()), |a, g| a + g) / b as f64;
    let var = if b > 1 {
        grads.iter().map(|g| (g - &mean).norm_squared()).sum::<f64>() / (b - 1) as f64
    } else {
        0.0
    };
    let ok = mean.norm_squared() >= theta * var / b as f64;
    (mean, ok)
}

/// Big-batch SGD: the batch doubles (up to `n`) whenever the descent test fails
/// and never shrinks. An epoch ends once `n` per-sample gradients were spent.
pub fn bb_sgd(problem: &dyn Problem, opts: &SolverOptions) -> Result<SolverResult> {
    let run = Run::new("BB-SGD", problem, opts)?;
    let w0 = run.initial_w();
    let n = problem.samples();
    let mut b = opts.batch_size;
    run.drive(w0, |run, w| {
        let mut spent = 0;
        while spent < n {
            let batch = run.sample(b);
            run.count(batch.len());
            spent += batch.len();
            let grads = problem.sample_grads(w, &batch);
            let (g, ok) = descent_test(&grads, opts.bb_theta);
            if !ok {
                b = (2 * b).min(n);
            }
            let eta = run.step()?;
            w.axpy(-eta, &g, 1.0);
            run.prox(w, eta);
            run.iter += 1;
        }
        run.diagnostics.batch_sizes.push(b);
        Ok(())
    })
}
