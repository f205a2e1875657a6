use crate::error::{Error, Result};
use crate::options::SubMode;
use crate::record::SolverResult;
use crate::run::Run;
use crate::{Problem, SolverOptions, Vector};

/// Stored per-sample gradients with a running sum of the rows.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientTable {
    rows: Vec<Vector>,
    sum: Vector,
}

impl GradientTable {
    /// Table of `n` zero rows.
    pub fn zeros(n: usize, dim: usize) -> Self {
        GradientTable {
            rows: vec![Vector::zeros(dim); n],
            sum: Vector::zeros(dim),
        }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn row(&self, i: usize) -> &Vector {
        &self.rows[i]
    }

    pub fn sum(&self) -> &Vector {
        &self.sum
    }

    /// `sum / n`.
    pub fn mean(&self) -> Vector {
        &self.sum / self.rows.len() as f64
    }

    /// Stores `g` as row `i`, keeps the running sum in step and returns the old row.
    pub fn replace(&mut self, i: usize, g: Vector) -> Vector {
        self.sum += &g;
        self.sum -= &self.rows[i];
        std::mem::replace(&mut self.rows[i], g)
    }

    /// Sum of the rows recomputed from scratch.
    pub fn exact_sum(&self) -> Vector {
        self.rows.iter().fold(Vector::zeros(self.sum.len()), |acc, r| acc + r)
    }

    /// Relative gap between the running and the recomputed sum.
    pub fn drift(&self) -> f64 {
        let exact = self.exact_sum();
        let scale = exact.amax().max(self.rows.iter().map(|r| r.amax()).fold(0.0, f64::max));
        if scale == 0.0 {
            self.sum.amax()
        } else {
            (&self.sum - exact).amax() / scale
        }
    }

    /// Measures the drift, then replaces the running sum by the recomputed one.
    pub fn resync(&mut self) -> f64 {
        let drift = self.drift();
        self.sum = self.exact_sum();
        drift
    }

    /// SAGA estimator for sample `i` with fresh gradient `g_new`: `g_new − g_i + sum/n`.
    pub fn saga_estimate(&self, i: usize, g_new: &Vector) -> Vector {
        g_new - &self.rows[i] + self.mean()
    }
}

/// SAG or SAGA (`sub_mode`, SAG when unset). The table starts at zero and
/// every estimate divides by `n`, so the first pass is biased towards zero.
/// Only SAGA supports a proximal term.
pub fn sag_saga(problem: &dyn Problem, opts: &SolverOptions) -> Result<SolverResult> {
    let saga = match opts.sub_mode {
        None | Some(SubMode::Sag) => false,
        Some(SubMode::Saga) => true,
        Some(other) => {
            return Err(Error::config(
                "sub_mode",
                format!("{} is not SAG or SAGA", other.as_str()),
            ))
        }
    };
    let run = Run::new(if saga { "SAGA" } else { "SAG" }, problem, opts)?;
    if !saga {
        run.require_smooth()?;
    }
    let w0 = run.initial_w();
    let mut table = GradientTable::zeros(problem.samples(), problem.dim());
    run.drive(w0, |run, w| {
        for batch in run.batches(opts.batch_size) {
            run.count(batch.len());
            let fresh = problem.sample_grads(w, &batch);
            let v = if saga {
                let before = table.mean();
                let mut corr = Vector::zeros(w.len());
                for (&i, g) in batch.iter().zip(&fresh) {
                    corr += g - table.row(i);
                }
                for (&i, g) in batch.iter().zip(fresh) {
                    table.replace(i, g);
                }
                corr / batch.len() as f64 + before
            } else {
                for (&i, g) in batch.iter().zip(fresh) {
                    table.replace(i, g);
                }
                table.mean()
            };
            let eta = run.step()?;
            w.axpy(-eta, &v, 1.0);
            run.prox(w, eta);
            run.iter += 1;
        }
        let drift = table.resync();
        run.diagnostics.max_aggregate_drift = run.diagnostics.max_aggregate_drift.max(drift);
        Ok(())
    })
}
