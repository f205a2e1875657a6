use crate::error::{Error, Result};
use crate::options::SubMode;
use crate::quasi_newton::CurvaturePairs;
use crate::record::SolverResult;
use crate::run::Run;
use crate::solvers::svrg::{take_snapshot, Snapshot};
use crate::{Problem, SolverOptions, Vector};

/// Stochastic L-BFGS family.
///
/// * `SQN`: plain stochastic gradients; every `L` steps a pair is formed from
///   the difference of consecutive averaged iterates, with `y` a Hessian-vector
///   product on an independent batch of `b_H` samples.
/// * `SVRG-SQN`: the same pairs, with SVRG gradient estimates.
/// * `SVRG-LBFGS`: SVRG gradient estimates, with pairs formed from consecutive
///   snapshots and their full gradients.
///
/// The direction is the two-loop product with the stored pairs, the plain
/// gradient while none exist.
pub fn slbfgs(problem: &dyn Problem, opts: &SolverOptions) -> Result<SolverResult> {
    let mode = match opts.sub_mode {
        None | Some(SubMode::Sqn) => SubMode::Sqn,
        Some(m @ (SubMode::SvrgSqn | SubMode::SvrgLbfgs)) => m,
        Some(other) => {
            return Err(Error::config(
                "sub_mode",
                format!("{} is not an SQN mode", other.as_str()),
            ))
        }
    };
    let run = Run::new(mode.as_str(), problem, opts)?;
    run.require_smooth()?;
    let w0 = run.initial_w();
    let period = opts.update_period;
    let hess_batch = opts.hess_batch();
    let mut pairs = CurvaturePairs::new(opts.mem_size);
    let mut avg = Vector::zeros(problem.dim());
    let mut avg_len = 0;
    let mut avg_prev: Option<Vector> = None;
    let mut snap_prev: Option<Snapshot> = None;

    run.drive(w0, |run, w| {
        let snap = (mode != SubMode::Sqn).then(|| take_snapshot(run, w));
        if mode == SubMode::SvrgLbfgs {
            let snap = snap.as_ref().expect("SVRG modes take snapshots");
            if let Some(old) = &snap_prev {
                let accepted = pairs.push(&snap.w - &old.w, &snap.mu - &old.mu);
                tally(run, accepted);
            }
            snap_prev = Some(snap.clone());
        }
        let batches = if snap.is_some() {
            run.full_batches(opts.batch_size)
        } else {
            run.batches(opts.batch_size)
        };
        for batch in batches {
            let g = match &snap {
                Some(sn) => {
                    run.count(2 * batch.len());
                    sn.estimate(problem, w, &batch)
                }
                None => run.grad(w, &batch),
            };
            let dir = pairs.apply(&g);
            if !dir.iter().all(|x| x.is_finite()) {
                return Err(Error::Optimization(format!(
                    "{}: search direction is not finite",
                    mode.as_str()
                )));
            }
            w.axpy(-run.step()?, &dir, 1.0);
            run.iter += 1;
            if mode == SubMode::SvrgLbfgs {
                continue;
            }
            avg += &*w;
            avg_len += 1;
            if avg_len == period {
                let current = &avg / period as f64;
                if let Some(prev) = &avg_prev {
                    let s = &current - prev;
                    let hb = run.sample_aux(hess_batch);
                    run.count(hb.len());
                    let y = problem.hess_vec(&current, &s, &hb);
                    let accepted = pairs.push(s, y);
                    tally(run, accepted);
                }
                avg_prev = Some(current);
                avg.fill(0.0);
                avg_len = 0;
            }
        }
        Ok(())
    })
}

fn tally(run: &mut Run, accepted: bool) {
    if accepted {
        run.diagnostics.accepted_pairs += 1;
    } else {
        run.diagnostics.skipped_pairs += 1;
    }
}
