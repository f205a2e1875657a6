use crate::error::{Error, Result};
use crate::record::SolverResult;
use crate::run::Run;
use crate::{Matrix, Problem, SolverOptions, Vector};

/// Relative shift added to each initial per-sample Hessian so every `B_i`
/// starts positive definite.
const INIT_SHIFT: f64 = 1e-6;

/// Per-sample memory of the incremental quasi-Newton method and its aggregates
/// `B̄ = Σ B_i`, `u = Σ B_i z_i`, `ḡ = Σ g_i`.
#[derive(Debug, Clone)]
pub struct IqnState {
    pub z: Vec<Vector>,
    pub g: Vec<Vector>,
    pub b: Vec<Matrix>,
    pub b_sum: Matrix,
    pub u: Vector,
    pub g_sum: Vector,
}

impl IqnState {
    /// All samples anchored at `w0` with `B_i = ∇²f_i(w0) + τI`, `τ = 1e-6 · L`.
    pub fn new(problem: &dyn Problem, w0: &Vector) -> Self {
        let n = problem.samples();
        let d = problem.dim();
        let shift = Matrix::identity(d, d) * (INIT_SHIFT * problem.smoothness().max(f64::MIN_POSITIVE));
        let z = vec![w0.clone(); n];
        let g: Vec<Vector> = (0..n).map(|i| problem.grad(w0, &[i])).collect();
        let b: Vec<Matrix> = (0..n).map(|i| problem.hess(w0, &[i]) + &shift).collect();
        let mut state = IqnState {
            z,
            g,
            b,
            b_sum: Matrix::zeros(d, d),
            u: Vector::zeros(d),
            g_sum: Vector::zeros(d),
        };
        let (b_sum, u, g_sum) = state.exact_sums();
        state.b_sum = b_sum;
        state.u = u;
        state.g_sum = g_sum;
        state
    }

    pub fn exact_sums(&self) -> (Matrix, Vector, Vector) {
        let d = self.u.len();
        let mut b_sum = Matrix::zeros(d, d);
        let mut u = Vector::zeros(d);
        let mut g_sum = Vector::zeros(d);
        for ((b, z), g) in self.b.iter().zip(&self.z).zip(&self.g) {
            b_sum += b;
            u += b * z;
            g_sum += g;
        }
        (b_sum, u, g_sum)
    }

    /// Largest relative gap between maintained and recomputed aggregates.
    pub fn drift(&self) -> f64 {
        fn rel(a: f64, scale: f64) -> f64 {
            if scale == 0.0 {
                a
            } else {
                a / scale
            }
        }
        let (b_sum, u, g_sum) = self.exact_sums();
        let gb = rel((&self.b_sum - &b_sum).amax(), b_sum.amax());
        let gu = rel(
            (&self.u - &u).amax(),
            u.amax().max(self.b.iter().map(|b| b.amax()).fold(0.0, f64::max)),
        );
        let gg = rel(
            (&self.g_sum - &g_sum).amax(),
            self.g.iter().map(|g| g.amax()).fold(0.0, f64::max),
        );
        gb.max(gu).max(gg)
    }

    /// Minimizer `B̄⁻¹(u − ḡ)` of the aggregated quadratic model.
    pub fn solve(&self) -> Result<Vector> {
        let chol = self
            .b_sum
            .clone()
            .cholesky()
            .ok_or_else(|| Error::Singular("IQN aggregated Hessian is not positive definite".into()))?;
        Ok(chol.solve(&(&self.u - &self.g_sum)))
    }

    /// Moves sample `i` to `w` with fresh gradient `g_new`, applies the BFGS
    /// update to `B_i` and refreshes the aggregates. Returns whether the pair
    /// was accepted.
    pub fn update(&mut self, i: usize, w: &Vector, g_new: Vector) -> bool {
        let s = w - &self.z[i];
        let y = &g_new - &self.g[i];
        let old_b = self.b[i].clone();
        let sy = s.dot(&y);
        let bs = &old_b * &s;
        let sbs = s.dot(&bs);
        let accepted = sy > 0.0 && sbs > 0.0 && sy.is_finite();
        if accepted {
            let mut nb = old_b.clone();
            nb.ger(1.0 / sy, &y, &y, 1.0);
            nb.ger(-1.0 / sbs, &bs, &bs, 1.0);
            self.b[i] = (&nb + nb.transpose()) * 0.5;
        }
        let new_b = &self.b[i];
        self.b_sum += new_b - &old_b;
        self.u += new_b * w - &old_b * &self.z[i];
        self.g_sum += &g_new - &self.g[i];
        self.z[i] = w.clone();
        self.g[i] = g_new;
        accepted
    }
}

/// Incremental quasi-Newton: samples are visited cyclically, and each step
/// jumps to the minimizer of the aggregated per-sample quadratic models
/// (unit step, no schedule). One epoch is one cycle of `n` steps.
pub fn iqn(problem: &dyn Problem, opts: &SolverOptions) -> Result<SolverResult> {
    let run = Run::new("IQN", problem, opts)?;
    run.require_smooth()?;
    let w0 = run.initial_w();
    let n = problem.samples();
    let mut state: Option<IqnState> = None;
    run.drive(w0, |run, w| {
        let st = match &mut state {
            Some(st) => st,
            None => {
                run.count(n);
                state.insert(IqnState::new(problem, w))
            }
        };
        for _ in 0..n {
            let i = (run.iter % n as u64) as usize;
            let w_next = st.solve()?;
            let g = run.grad(&w_next, &[i]);
            if st.update(i, &w_next, g) {
                run.diagnostics.accepted_pairs += 1;
            } else {
                run.diagnostics.skipped_pairs += 1;
            }
            *w = w_next;
            run.iter += 1;
        }
        let drift = st.drift();
        run.diagnostics.max_aggregate_drift = run.diagnostics.max_aggregate_drift.max(drift);
        Ok(())
    })
}
