//! Deterministic full-gradient reference solvers.
//!
//! Both solvers log one record row per iteration and charge `n` gradient
//! evaluations per full gradient, so their records line up with the
//! stochastic solvers when plotted against `grad_calc_count`.

use std::time::Instant;

use crate::error::{Error, Result};
use crate::options::SolverOptions;
use crate::quasi_newton::CurvaturePairs;
use crate::record::{record_epoch, Counters, Diagnostics, RunRecord, SolverResult, Termination};
use crate::{Problem, Vector};

pub const DEFAULT_MEMORY: usize = 10;
pub const DEFAULT_MAX_ITER: usize = 1000;
pub const DEFAULT_TOL: f64 = 1e-10;

/// Backtracking parameters for the Armijo condition
/// `f(w + αp) ≤ f(w) + c₁ α gᵀp`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Armijo {
    pub c1: f64,
    pub shrink: f64,
    pub max_trials: usize,
    /// First trial step.
    pub initial: f64,
}

impl Default for Armijo {
    fn default() -> Self {
        Armijo {
            c1: 1e-4,
            shrink: 0.5,
            max_trials: 50,
            initial: 1.0,
        }
    }
}

impl Armijo {
    pub fn validate(&self) -> Result<()> {
        if !(self.c1 > 0.0 && self.c1 < 1.0) {
            return Err(Error::config("c1", "must lie in (0, 1)"));
        }
        if !(self.shrink > 0.0 && self.shrink < 1.0) {
            return Err(Error::config("shrink", "must lie in (0, 1)"));
        }
        if self.max_trials == 0 {
            return Err(Error::config("max_trials", "must be positive"));
        }
        if !(self.initial > 0.0 && self.initial.is_finite()) {
            return Err(Error::config("initial", "must be positive and finite"));
        }
        Ok(())
    }

    /// Largest `initial · shrinkᵏ` satisfying the Armijo condition along `p`,
    /// together with the accepted point and its cost.
    pub fn search(
        &self,
        f: impl Fn(&Vector) -> f64,
        w: &Vector,
        fw: f64,
        g: &Vector,
        p: &Vector,
    ) -> Option<(f64, Vector, f64)> {
        let slope = g.dot(p);
        let mut alpha = self.initial;
        for _ in 0..self.max_trials {
            let trial = w + p * alpha;
            let ft = f(&trial);
            if ft <= fw + self.c1 * alpha * slope {
                return Some((alpha, trial, ft));
            }
            alpha *= self.shrink;
        }
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LineSearch {
    Fixed(f64),
    Backtracking(Armijo),
}

impl LineSearch {
    pub fn backtracking() -> Self {
        LineSearch::Backtracking(Armijo::default())
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            LineSearch::Fixed(step) if !(*step > 0.0 && step.is_finite()) => {
                Err(Error::config("step", "fixed step must be positive and finite"))
            }
            LineSearch::Fixed(_) => Ok(()),
            LineSearch::Backtracking(a) => a.validate(),
        }
    }
}

struct Log<'a> {
    problem: &'a dyn Problem,
    opts: SolverOptions,
    record: RunRecord,
    start: Instant,
    grads: u64,
}

impl<'a> Log<'a> {
    fn new(problem: &'a dyn Problem) -> Self {
        Log {
            problem,
            opts: SolverOptions::default(),
            record: RunRecord::default(),
            start: Instant::now(),
            grads: 0,
        }
    }

    fn row(&mut self, iter: usize, w: &Vector) {
        let counters = Counters {
            iter: iter as u64,
            grad_calc_count: self.grads,
            elapsed: self.start.elapsed().as_secs_f64(),
        };
        record_epoch(&mut self.record, self.problem, w, counters, &self.opts);
    }

    fn grad(&mut self, w: &Vector) -> Vector {
        self.grads += self.problem.samples() as u64;
        self.problem.full_grad(w)
    }

    fn finish(self, solver: &str, w: Vector, termination: Termination) -> SolverResult {
        SolverResult {
            solver: solver.to_string(),
            w,
            record: self.record,
            termination,
            diagnostics: Diagnostics::default(),
        }
    }
}

fn check_start(problem: &dyn Problem, w0: &Vector) -> Result<()> {
    if w0.len() != problem.dim() {
        return Err(Error::Dimension {
            what: "initial iterate",
            expected: problem.dim(),
            found: w0.len(),
        });
    }
    Ok(())
}

fn check_finite(problem: &dyn Problem, iter: usize, f: f64) -> Result<()> {
    if f.is_finite() {
        Ok(())
    } else {
        Err(Error::Optimization(format!(
            "{}: objective became non-finite at iteration {iter}",
            problem.name()
        )))
    }
}

/// Full (proximal) gradient descent.
///
/// With a proximal term the update is `prox(w − η∇f(w), η)`, the stopping
/// measure is the gradient mapping `‖w − w⁺‖ / η`, and backtracking uses the
/// quadratic upper-bound test instead of Armijo.
pub fn gradient_descent(
    problem: &dyn Problem,
    w0: &Vector,
    search: LineSearch,
    max_iter: usize,
    tol_gnorm: f64,
) -> Result<SolverResult> {
    check_start(problem, w0)?;
    search.validate()?;
    let prox = problem.has_prox();
    let mut log = Log::new(problem);
    let mut w = w0.clone();
    log.row(0, &w);
    let mut g = log.grad(&w);

    for k in 0..max_iter {
        if !prox && g.norm() <= tol_gnorm {
            return Ok(log.finish("gd", w, Termination::GnormTol));
        }
        let next = match search {
            LineSearch::Fixed(step) => {
                let trial = &w - &g * step;
                (step, if prox { problem.prox(&trial, step) } else { trial })
            }
            LineSearch::Backtracking(armijo) if !prox => {
                let fw = problem.cost(&w);
                let p = -&g;
                match armijo.search(|x| problem.cost(x), &w, fw, &g, &p) {
                    Some((alpha, trial, _)) => (alpha, trial),
                    None => {
                        return Err(Error::Stagnation {
                            iter: k,
                            trials: armijo.max_trials,
                            w,
                        })
                    }
                }
            }
            LineSearch::Backtracking(armijo) => {
                prox_backtrack(problem, &w, &g, &armijo).ok_or_else(|| Error::Stagnation {
                    iter: k,
                    trials: armijo.max_trials,
                    w: w.clone(),
                })?
            }
        };
        let (step, w_next) = next;
        let mapping = (&w - &w_next).norm() / step;
        w = w_next;
        g = log.grad(&w);
        log.row(k + 1, &w);
        check_finite(problem, k + 1, *log.record.cost.last().unwrap_or(&f64::NAN))?;
        if prox && mapping <= tol_gnorm {
            return Ok(log.finish("gd", w, Termination::GnormTol));
        }
    }
    let termination = if !prox && g.norm() <= tol_gnorm {
        Termination::GnormTol
    } else {
        Termination::MaxEpoch
    };
    Ok(log.finish("gd", w, termination))
}

/// Backtracking for the proximal step: shrink η until
/// `f_s(w⁺) ≤ f_s(w) + gᵀ(w⁺ − w) + ‖w⁺ − w‖² / 2η` on the smooth part `f_s`.
fn prox_backtrack(problem: &dyn Problem, w: &Vector, g: &Vector, armijo: &Armijo) -> Option<(f64, Vector)> {
    let all: Vec<usize> = (0..problem.samples()).collect();
    let smooth = |x: &Vector| problem.batch_cost(x, &all);
    let fw = smooth(w);
    let mut step = armijo.initial;
    for _ in 0..armijo.max_trials {
        let trial = problem.prox(&(w - g * step), step);
        let diff = &trial - w;
        if smooth(&trial) <= fw + g.dot(&diff) + diff.norm_squared() / (2.0 * step) {
            return Some((step, trial));
        }
        step *= armijo.shrink;
    }
    None
}

/// Limited-memory BFGS with backtracking Armijo line search.
///
/// Close to the optimum the Armijo test can fail only because `f(w)` and
/// `f(w + αp)` agree to machine precision. The unit step is then accepted
/// when it reduces the gradient norm.
/// L-BFGS gives up after this many iterations without a new smallest gradient norm.
pub const STALL_ITERS: usize = 50;

pub fn lbfgs(problem: &dyn Problem, w0: &Vector, mem: usize, max_iter: usize, tol_gnorm: f64) -> Result<SolverResult> {
    check_start(problem, w0)?;
    if mem == 0 {
        return Err(Error::config("mem_size", "must be at least 1"));
    }
    if problem.has_prox() {
        return Err(Error::Argument(format!(
            "{} has a non-smooth term; use proximal gradient descent",
            problem.name()
        )));
    }
    let armijo = Armijo::default();
    let mut log = Log::new(problem);
    let mut pairs = CurvaturePairs::new(mem);
    let mut w = w0.clone();
    log.row(0, &w);
    let mut g = log.grad(&w);
    let mut fw = problem.cost(&w);
    check_finite(problem, 0, fw)?;
    let (mut best_gnorm, mut since_best) = (f64::INFINITY, 0);

    for k in 0..max_iter {
        let gnorm = g.norm();
        if gnorm <= tol_gnorm {
            return Ok(log.finish("lbfgs", w, Termination::GnormTol));
        }
        if gnorm < best_gnorm {
            (best_gnorm, since_best) = (gnorm, 0);
        } else {
            since_best += 1;
            if since_best >= STALL_ITERS {
                return Ok(log.finish("lbfgs", w, Termination::Stalled));
            }
        }
        let mut p = -pairs.apply(&g);
        if g.dot(&p) >= 0.0 {
            pairs.clear();
            p = -&g;
        }
        let mut search = armijo;
        if pairs.is_empty() {
            search.initial = (1.0 / gnorm).min(1.0);
        }
        let (w_next, f_next) = match search.search(|x| problem.cost(x), &w, fw, &g, &p) {
            Some((_, trial, ft)) => (trial, ft),
            None => {
                let trial = &w + &p;
                let negligible = (armijo.c1 * g.dot(&p)).abs() <= 1e3 * f64::EPSILON * fw.abs().max(1.0);
                let ft = problem.cost(&trial);
                if negligible && problem.full_grad(&trial).norm() < gnorm {
                    (trial, ft)
                } else {
                    return Err(Error::Stagnation {
                        iter: k,
                        trials: armijo.max_trials,
                        w,
                    });
                }
            }
        };
        let g_next = log.grad(&w_next);
        pairs.push(&w_next - &w, &g_next - &g);
        w = w_next;
        g = g_next;
        fw = f_next;
        log.row(k + 1, &w);
        check_finite(problem, k + 1, fw)?;
    }
    let termination = if g.norm() <= tol_gnorm {
        Termination::GnormTol
    } else {
        Termination::MaxEpoch
    };
    Ok(log.finish("lbfgs", w, termination))
}
