use crate::error::{Error, Result};
use crate::options::SubMode;
use crate::record::SolverResult;
use crate::run::Run;
use crate::{Problem, SolverOptions};

/// Mini-batch SGD: `w ← prox(w − η grad(w, S), η)` for every batch of the epoch.
pub fn sgd(problem: &dyn Problem, opts: &SolverOptions) -> Result<SolverResult> {
    let run = Run::new("SGD", problem, opts)?;
    let w0 = run.initial_w();
    run.drive(w0, |run, w| {
        for batch in run.batches(opts.batch_size) {
            let g = run.grad(w, &batch);
            let eta = run.step()?;
            w.axpy(-eta, &g, 1.0);
            run.prox(w, eta);
            run.iter += 1;
        }
        Ok(())
    })
}

/// SGD with classical (`CM`) or Nesterov (`CM-NAG`) momentum:
/// `u ← ρu − η g; w ← w + u`, with `g` taken at `w + ρu` for Nesterov.
pub fn sgd_momentum(problem: &dyn Problem, opts: &SolverOptions) -> Result<SolverResult> {
    let nesterov = match opts.sub_mode {
        None | Some(SubMode::Cm) => false,
        Some(SubMode::CmNag) => true,
        Some(other) => {
            return Err(Error::config(
                "sub_mode",
                format!("{} is not a momentum mode", other.as_str()),
            ))
        }
    };
    let run = Run::new(if nesterov { "SGD-CM-NAG" } else { "SGD-CM" }, problem, opts)?;
    let w0 = run.initial_w();
    let rho = opts.momentum;
    let mut u = w0.map(|_| 0.0);
    run.drive(w0, |run, w| {
        for batch in run.batches(opts.batch_size) {
            let g = if nesterov {
                let ahead = &*w + &u * rho;
                run.grad(&ahead, &batch)
            } else {
                run.grad(w, &batch)
            };
            let eta = run.step()?;
            u *= rho;
            u.axpy(-eta, &g, 1.0);
            *w += &u;
            run.prox(w, eta);
            run.iter += 1;
        }
        Ok(())
    })
}
