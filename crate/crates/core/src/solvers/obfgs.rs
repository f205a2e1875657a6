use crate::error::{Error, Result};
use crate::options::SubMode;
use crate::quasi_newton::{powell_damping, CurvaturePairs, DenseInverseHessian};
use crate::record::SolverResult;
use crate::run::Run;
use crate::{Problem, SolverOptions};

/// Online BFGS with a dense (`Inf-mem`) or limited-memory (`Lim-mem`) inverse
/// Hessian. Both gradients of a curvature pair are taken on the same batch.
///
/// `delta > 0` shifts `y ← y − δs`. In `Inf-mem` the shift is added back as
/// `δI` to the estimate, so `(B + δI)⁻¹` stays bounded by `1/δ`. `damped` then
/// applies Powell damping against the dense `B + δI = H⁻¹`, which is why damping requires
/// `Inf-mem`.
pub fn obfgs(problem: &dyn Problem, opts: &SolverOptions) -> Result<SolverResult> {
    let limited = match opts.sub_mode {
        None | Some(SubMode::InfMem) => false,
        Some(SubMode::LimMem) => true,
        Some(other) => {
            return Err(Error::config(
                "sub_mode",
                format!("{} is not an oBFGS mode", other.as_str()),
            ))
        }
    };
    if limited && opts.damped {
        return Err(Error::config(
            "damped",
            "Powell damping needs the dense estimate of Inf-mem",
        ));
    }
    let name = match (limited, opts.damped, opts.delta > 0.0) {
        (true, _, _) => "oLBFGS-Lim",
        (false, true, _) => "Damp-oBFGS-Inf",
        (false, false, true) => "Reg-oBFGS-Inf",
        (false, false, false) => "oBFGS-Inf",
    };
    let run = Run::new(name, problem, opts)?;
    run.require_smooth()?;
    let w0 = run.initial_w();
    let mut dense = DenseInverseHessian::with_shift(problem.dim(), opts.delta);
    let mut pairs = CurvaturePairs::new(opts.mem_size);
    run.drive(w0, |run, w| {
        for batch in run.batches(opts.batch_size) {
            let g = run.grad(w, &batch);
            let dir = if limited { pairs.apply(&g) } else { dense.apply(&g) };
            if !dir.iter().all(|x| x.is_finite()) {
                return Err(Error::Optimization(format!("{name}: search direction is not finite")));
            }
            let eta = run.step()?;
            let w_next = &*w - &dir * eta;
            let g_next = run.grad(&w_next, &batch);
            let s = &w_next - &*w;
            let mut y = g_next - g;
            if opts.delta > 0.0 {
                y.axpy(-opts.delta, &s, 1.0);
            }
            if opts.damped {
                let bs = dense.hessian_apply(&s);
                let (damped, _) = powell_damping(&s, &y, &bs);
                let ratio = s.dot(&damped) / s.dot(&bs);
                let d = &mut run.diagnostics;
                d.min_damped_ratio = Some(d.min_damped_ratio.map_or(ratio, |r| r.min(ratio)));
                y = damped;
            }
            let accepted = if limited {
                pairs.push(s.clone(), y.clone())
            } else {
                dense.update(&s, &y)
            };
            let d = &mut run.diagnostics;
            if accepted {
                d.accepted_pairs += 1;
                if !limited {
                    let raw = &y + &s * opts.delta;
                    let residual = (dense.apply(&raw) - &s).norm() / s.norm();
                    d.max_secant_residual = d.max_secant_residual.max(residual);
                }
            } else {
                d.skipped_pairs += 1;
            }
            *w = w_next;
            run.iter += 1;
        }
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::power_iteration;
    use crate::problems::calc_solution;
    use crate::quasi_newton::POWELL_RATIO;
    use crate::solvers::{fixtures, sgd};
    use crate::Vector;

    fn ill_opts(f_opt: f64) -> SolverOptions {
        SolverOptions {
            max_epoch: 50,
            f_opt: Some(f_opt),
            tol_optgap: 0.0,
            w_init: Some(Vector::zeros(2)),
            ..Default::default()
        }
    }

    #[test]
    fn dense_secant_holds_over_long_run() {
        let (p, w0) = fixtures::logistic(100, 4, 3, 0.05);
        let opts = SolverOptions {
            max_epoch: 30,
            w_init: Some(w0),
            step_init: 0.5,
            ..Default::default()
        };
        let r = obfgs(&p, &opts).unwrap();
        assert!(r.diagnostics.accepted_pairs >= 200);
        assert!(r.diagnostics.max_secant_residual <= 1e-8);
    }

    #[test]
    fn regularized_obfgs_handles_ill_conditioning() {
        let p = fixtures::ill_ridge();
        let (_, f_opt) = calc_solution(&p, 1000).unwrap();
        let reg = obfgs(
            &p,
            &SolverOptions {
                delta: 0.1,
                step_init: 1.0,
                ..ill_opts(f_opt)
            },
        )
        .unwrap();
        let gap = reg.record.optgap.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(gap <= 1e-8, "Reg-oBFGS optgap {gap}");

        let all: Vec<usize> = (0..p.samples()).collect();
        let l = power_iteration(2, |v| p.hess_vec(&Vector::zeros(2), v, &all), 500);
        let plain = sgd(
            &p,
            &SolverOptions {
                step_init: 1.0 / l,
                ..ill_opts(f_opt)
            },
        )
        .unwrap();
        assert!(*plain.record.optgap.last().unwrap() > 1e-4);
    }

    #[test]
    fn damping_reaches_ratio() {
        let (p, w0) = fixtures::logistic(100, 4, 3, 0.01);
        let opts = SolverOptions {
            max_epoch: 10,
            w_init: Some(w0),
            damped: true,
            delta: 0.1,
            ..Default::default()
        };
        let r = obfgs(&p, &opts).unwrap();
        let ratio = r.diagnostics.min_damped_ratio.unwrap();
        assert!(ratio >= POWELL_RATIO - 1e-12, "{ratio}");
        assert_eq!(r.diagnostics.skipped_pairs, 0);
    }

    #[test]
    fn limited_memory_with_damping_is_rejected() {
        let p = fixtures::half_square();
        let opts = SolverOptions {
            batch_size: 1,
            sub_mode: Some(SubMode::LimMem),
            damped: true,
            ..Default::default()
        };
        assert!(matches!(obfgs(&p, &opts), Err(Error::Config { field: "damped", .. })));
    }

    #[test]
    fn limited_memory_matches_dense_while_memory_covers_history() {
        let (p, w0) = fixtures::logistic(40, 3, 9, 0.05);
        let base = SolverOptions {
            max_epoch: 2,
            batch_size: 10,
            mem_size: 100,
            w_init: Some(w0),
            store_w: true,
            step_init: 0.2,
            ..Default::default()
        };
        let dense = obfgs(&p, &base).unwrap();
        let lim = obfgs(
            &p,
            &SolverOptions {
                sub_mode: Some(SubMode::LimMem),
                ..base
            },
        )
        .unwrap();
        for (a, b) in dense.record.w_hist.iter().zip(&lim.record.w_hist) {
            assert!((a - b).amax() <= 1e-8 * a.amax().max(1.0));
        }
    }
}
