//! Per-epoch run statistics and stopping rules.

use serde::{Deserialize, Serialize};

use crate::options::SolverOptions;
use crate::problem::Problem;
use crate::Vector;

/// Append-only per-epoch statistics. Row `e` describes the iterate after epoch `e`;
/// row 0 is the initial iterate.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub iter: Vec<u64>,
    pub time: Vec<f64>,
    pub grad_calc_count: Vec<u64>,
    /// `cost − f_opt`, or `+∞` when no reference optimum is known.
    pub optgap: Vec<f64>,
    pub cost: Vec<f64>,
    pub gnorm: Vec<f64>,
    pub reg: Vec<f64>,
    /// Iterate history, only filled when `store_w` is set.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub w_hist: Vec<Vector>,
}

impl RunRecord {
    pub fn len(&self) -> usize {
        self.cost.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cost.is_empty()
    }

    /// Index of the last recorded epoch.
    pub fn epoch(&self) -> usize {
        self.len().saturating_sub(1)
    }

    pub fn last_cost(&self) -> Option<f64> {
        self.cost.last().copied()
    }

    /// True when all columns share one length and the counters never decrease.
    pub fn is_consistent(&self) -> bool {
        let n = self.len();
        let same_len = [
            self.iter.len(),
            self.time.len(),
            self.grad_calc_count.len(),
            self.optgap.len(),
            self.gnorm.len(),
            self.reg.len(),
        ]
        .iter()
        .all(|&l| l == n)
            && (self.w_hist.is_empty() || self.w_hist.len() == n);
        same_len
            && self.iter.windows(2).all(|p| p[0] <= p[1])
            && self.grad_calc_count.windows(2).all(|p| p[0] <= p[1])
            && self.time.windows(2).all(|p| p[0] <= p[1])
    }
}

/// Cumulative counters at the end of an epoch.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Counters {
    pub iter: u64,
    pub grad_calc_count: u64,
    pub elapsed: f64,
}

/// Appends one row for iterate `w`. Diagnostics are not charged to `grad_calc_count`.
pub fn record_epoch(
    record: &mut RunRecord,
    problem: &dyn Problem,
    w: &Vector,
    counters: Counters,
    opts: &SolverOptions,
) {
    let cost = problem.cost(w);
    let gnorm = problem.full_grad(w).norm();
    record.iter.push(counters.iter);
    record.time.push(counters.elapsed);
    record.grad_calc_count.push(counters.grad_calc_count);
    record.optgap.push(opts.f_opt.map_or(f64::INFINITY, |f| cost - f));
    record.cost.push(cost);
    record.gnorm.push(gnorm);
    record.reg.push(problem.reg(w));
    if opts.store_w {
        record.w_hist.push(w.clone());
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    MaxEpoch,
    OptgapTol,
    GnormTol,
    /// A reference optimizer stopped making progress at the rounding floor.
    Stalled,
}

impl Termination {
    pub fn as_str(self) -> &'static str {
        match self {
            Termination::MaxEpoch => "max-epoch",
            Termination::OptgapTol => "optgap-tol",
            Termination::GnormTol => "gnorm-tol",
            Termination::Stalled => "stalled",
        }
    }
}

/// Decides whether a run should stop after the last recorded epoch.
///
/// Tolerances fire on strict inequality, so a zero tolerance never fires.
/// The epoch budget is checked last.
pub fn check_stop(record: &RunRecord, opts: &SolverOptions) -> Option<Termination> {
    let optgap = *record.optgap.last()?;
    let gnorm = *record.gnorm.last()?;
    if optgap < opts.tol_optgap {
        Some(Termination::OptgapTol)
    } else if gnorm < opts.tol_gnorm {
        Some(Termination::GnormTol)
    } else if record.epoch() >= opts.max_epoch {
        Some(Termination::MaxEpoch)
    } else {
        None
    }
}

/// Solver-specific observations that are not part of the per-epoch table.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Step size used in each epoch, for solvers that adapt it.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub step_sizes: Vec<f64>,
    /// Batch size at the end of each epoch (BB-SGD).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub batch_sizes: Vec<usize>,
    /// Inner iterations executed in each epoch.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub inner_lengths: Vec<usize>,
    /// Curvature pairs rejected by the positivity safeguard.
    pub skipped_pairs: usize,
    pub accepted_pairs: usize,
    /// Largest relative secant residual `‖H y − s‖ / ‖s‖` after a dense update.
    pub max_secant_residual: f64,
    /// Smallest `sᵀy / sᵀBs` observed after damping.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_damped_ratio: Option<f64>,
    /// Largest drift between maintained and recomputed aggregates (IQN).
    pub max_aggregate_drift: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverResult {
    pub solver: String,
    pub w: Vector,
    pub record: RunRecord,
    pub termination: Termination,
    pub diagnostics: Diagnostics,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::make_linear_regression;
    use crate::Matrix;

    fn fixture() -> impl Problem {
        let x = Matrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]);
        make_linear_regression(x, Vector::from_vec(vec![1.0, 2.0]), 0.0).unwrap()
    }

    #[test]
    fn epoch_zero_row() {
        let p = fixture();
        let mut rec = RunRecord::default();
        let opts = SolverOptions::default();
        record_epoch(&mut rec, &p, &Vector::zeros(2), Counters::default(), &opts);
        assert_eq!(rec.iter, vec![0]);
        assert_eq!(rec.grad_calc_count, vec![0]);
        assert_eq!(rec.cost, vec![1.25]);
        assert_eq!(rec.optgap, vec![f64::INFINITY]);
        assert!(rec.w_hist.is_empty());
    }

    #[test]
    fn optgap_uses_reference() {
        let p = fixture();
        let mut rec = RunRecord::default();
        let opts = SolverOptions {
            f_opt: Some(0.25),
            store_w: true,
            ..Default::default()
        };
        record_epoch(&mut rec, &p, &Vector::zeros(2), Counters::default(), &opts);
        let c = Counters {
            iter: 3,
            grad_calc_count: 6,
            elapsed: 0.5,
        };
        record_epoch(&mut rec, &p, &Vector::from_vec(vec![1.0, 2.0]), c, &opts);
        assert_eq!(rec.len(), 2);
        assert_eq!(rec.optgap, vec![1.0, -0.25]);
        assert_eq!(rec.w_hist.len(), 2);
        assert!(rec.is_consistent());
    }

    #[test]
    fn stop_rules() {
        let opts = SolverOptions {
            max_epoch: 100,
            tol_optgap: 1e-10,
            ..Default::default()
        };
        let mut rec = RunRecord::default();
        for _ in 0..=100 {
            rec.iter.push(0);
            rec.time.push(0.0);
            rec.grad_calc_count.push(0);
            rec.optgap.push(1.0);
            rec.cost.push(1.0);
            rec.gnorm.push(1.0);
            rec.reg.push(0.0);
        }
        assert_eq!(check_stop(&rec, &opts), Some(Termination::MaxEpoch));
        *rec.optgap.last_mut().unwrap() = 1e-12;
        assert_eq!(check_stop(&rec, &opts), Some(Termination::OptgapTol));

        let short = RunRecord {
            iter: vec![0; 4],
            time: vec![0.0; 4],
            grad_calc_count: vec![0; 4],
            optgap: vec![1.0; 4],
            cost: vec![1.0; 4],
            gnorm: vec![1.0; 4],
            reg: vec![0.0; 4],
            w_hist: vec![],
        };
        assert_eq!(check_stop(&short, &opts), None);
        assert_eq!(check_stop(&RunRecord::default(), &opts), None);
    }

    #[test]
    fn zero_tolerance_never_fires() {
        let opts = SolverOptions {
            tol_gnorm: 0.0,
            tol_optgap: 0.0,
            ..Default::default()
        };
        let rec = RunRecord {
            iter: vec![0],
            time: vec![0.0],
            grad_calc_count: vec![0],
            optgap: vec![0.0],
            cost: vec![0.0],
            gnorm: vec![0.0],
            reg: vec![0.0],
            w_hist: vec![],
        };
        assert_eq!(check_stop(&rec, &opts), None);
    }
}
