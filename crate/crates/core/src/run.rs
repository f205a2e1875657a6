//! Bookkeeping shared by every stochastic solver: RNG, counters, batch
//! sampling and the epoch loop.

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::options::{Sampling, SolverOptions};
use crate::record::{check_stop, record_epoch, Counters, Diagnostics, RunRecord, SolverResult, Termination};
use crate::{Problem, Vector};

pub(crate) struct Run<'a> {
    pub problem: &'a dyn Problem,
    pub opts: &'a SolverOptions,
    pub rng: ChaCha8Rng,
    /// Independent stream for auxiliary draws (Hessian batches), so they do not
    /// shift the main sampling sequence.
    pub aux_rng: ChaCha8Rng,
    pub record: RunRecord,
    pub diagnostics: Diagnostics,
    /// Total inner iterations so far; the step schedule's `k`.
    pub iter: u64,
    pub grads: u64,
    name: &'static str,
    start: Instant,
}

impl<'a> Run<'a> {
    pub fn new(name: &'static str, problem: &'a dyn Problem, opts: &'a SolverOptions) -> Result<Self> {
        opts.validate()?;
        if opts.batch_size > problem.samples() {
            return Err(Error::config(
                "batch_size",
                format!("{} exceeds the sample count {}", opts.batch_size, problem.samples()),
            ));
        }
        if let Some(w) = &opts.w_init {
            if w.len() != problem.dim() {
                return Err(Error::Dimension {
                    what: "w_init",
                    expected: problem.dim(),
                    found: w.len(),
                });
            }
        }
        Ok(Run {
            problem,
            opts,
            rng: ChaCha8Rng::seed_from_u64(opts.seed),
            aux_rng: {
                let mut r = ChaCha8Rng::seed_from_u64(opts.seed);
                r.set_stream(1);
                r
            },
            record: RunRecord::default(),
            diagnostics: Diagnostics::default(),
            iter: 0,
            grads: 0,
            name,
            start: Instant::now(),
        })
    }

    pub fn n(&self) -> usize {
        self.problem.samples()
    }

    pub fn initial_w(&self) -> Vector {
        self.opts
            .w_init
            .clone()
            .unwrap_or_else(|| Vector::zeros(self.problem.dim()))
    }

    /// Charges `evals` per-sample gradient evaluations.
    pub fn count(&mut self, evals: usize) {
        self.grads += evals as u64;
    }

    /// Scheduled step for the current inner iteration.
    pub fn step(&self) -> Result<f64> {
        self.opts.step(self.iter as usize)
    }

    /// Stochastic gradient on `batch`, charged `|batch|`.
    pub fn grad(&mut self, w: &Vector, batch: &[usize]) -> Vector {
        self.count(batch.len());
        self.problem.grad(w, batch)
    }

    /// Full gradient, charged `n`.
    pub fn full_grad(&mut self, w: &Vector) -> Vector {
        self.count(self.n());
        self.problem.full_grad(w)
    }

    /// Applies the proximal map in place when the problem has one.
    pub fn prox(&self, w: &mut Vector, step: f64) {
        if self.problem.has_prox() {
            *w = self.problem.prox(w, step);
        }
    }

    /// Mini-batches for one epoch of `⌈n/b⌉` inner iterations.
    pub fn batches(&mut self, b: usize) -> Vec<Vec<usize>> {
        let n = self.n();
        match self.opts.sampling {
            Sampling::Permutation => {
                let mut perm: Vec<usize> = (0..n).collect();
                perm.shuffle(&mut self.rng);
                perm.chunks(b).map(<[usize]>::to_vec).collect()
            }
            Sampling::Iid => (0..n.div_ceil(b))
                .map(|_| (0..b).map(|_| self.rng.random_range(0..n)).collect())
                .collect(),
        }
    }

    /// Like [`Run::batches`], but every batch holds exactly `b` indices: a short
    /// final chunk of the permutation is topped up from its start. Used by the
    /// snapshot methods, whose epoch cost is `n + 2b⌈n/b⌉`.
    pub fn full_batches(&mut self, b: usize) -> Vec<Vec<usize>> {
        let mut batches = self.batches(b);
        if self.opts.sampling == Sampling::Permutation {
            let head: Vec<usize> = batches[0].clone();
            if let Some(last) = batches.last_mut() {
                let missing = b - last.len();
                last.extend_from_slice(&head[..missing]);
            }
        }
        batches
    }

    /// One batch of `size` distinct indices from the main stream.
    pub fn sample(&mut self, size: usize) -> Vec<usize> {
        let n = self.n();
        rand::seq::index::sample(&mut self.rng, n, size.min(n)).into_vec()
    }

    /// One batch of `size` distinct indices from the auxiliary stream.
    pub fn sample_aux(&mut self, size: usize) -> Vec<usize> {
        let n = self.n();
        rand::seq::index::sample(&mut self.aux_rng, n, size.min(n)).into_vec()
    }

    /// Fails for problems with a proximal term.
    pub fn require_smooth(&self) -> Result<()> {
        if self.problem.has_prox() {
            return Err(Error::config(
                "problem",
                format!(
                    "{} does not support non-smooth problems like {}",
                    self.name,
                    self.problem.name()
                ),
            ));
        }
        Ok(())
    }

    /// Records the iterate after an epoch and decides whether to stop.
    pub fn end_epoch(&mut self, w: &Vector) -> Result<Option<Termination>> {
        let counters = Counters {
            iter: self.iter,
            grad_calc_count: self.grads,
            elapsed: self.start.elapsed().as_secs_f64(),
        };
        record_epoch(&mut self.record, self.problem, w, counters, self.opts);
        let cost = self.record.cost.last().copied().unwrap_or(f64::NAN);
        if !cost.is_finite() {
            return Err(Error::Diverged {
                solver: self.name.to_string(),
                epoch: self.record.epoch(),
                partial: Box::new(SolverResult {
                    solver: self.name.to_string(),
                    w: w.clone(),
                    record: self.record.clone(),
                    termination: Termination::MaxEpoch,
                    diagnostics: self.diagnostics.clone(),
                }),
            });
        }
        Ok(check_stop(&self.record, self.opts))
    }

    pub fn finish(self, w: Vector, termination: Termination) -> SolverResult {
        SolverResult {
            solver: self.name.to_string(),
            w,
            record: self.record,
            termination,
            diagnostics: self.diagnostics,
        }
    }

    /// Records epoch 0, then runs `epoch` until a stopping rule fires.
    pub fn drive<F>(mut self, mut w: Vector, mut epoch: F) -> Result<SolverResult>
    where
        F: FnMut(&mut Run<'a>, &mut Vector) -> Result<()>,
    {
        let mut stop = self.end_epoch(&w)?;
        while stop.is_none() {
            epoch(&mut self, &mut w)?;
            stop = self.end_epoch(&w)?;
        }
        Ok(self.finish(w, stop.unwrap_or(Termination::MaxEpoch)))
    }
}
