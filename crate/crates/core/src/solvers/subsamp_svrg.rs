use crate::error::Result;
use crate::record::SolverResult;
use crate::run::Run;
use crate::solvers::svrg::take_snapshot;
use crate::{Matrix, Problem, SolverOptions};

/// Preconditioner from a subsampled Hessian `H = Σ λ_i u_i u_iᵀ`:
/// `P = Σ (μ_max / μ_i) u_i u_iᵀ` with `μ_i = max(λ_i, floor)`.
///
/// Scaling by the top floored eigenvalue leaves the stiffest direction
/// unchanged, so step sizes stay comparable with plain SVRG. When every
/// eigenvalue sits at the floor the result is exactly the identity.
pub fn floored_preconditioner(h: &Matrix, floor: f64) -> Matrix {
    let dim = h.nrows();
    let sym = (h + h.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    if eig.eigenvalues.iter().all(|&l| l <= floor) || floor.is_nan() || floor <= 0.0 {
        return Matrix::identity(dim, dim);
    }
    let mu = eig.eigenvalues.map(|l| l.max(floor));
    let top = mu.max();
    let scaled = mu.map(|m| top / m);
    let u = &eig.eigenvectors;
    let p = u * Matrix::from_diagonal(&scaled) * u.transpose();
    (&p + p.transpose()) * 0.5
}

/// SVRG preconditioned by a floored subsampled Hessian rebuilt at every snapshot
/// from `b_H` samples. The floor is `ss_floor` if set, otherwise
/// `ss_floor_ratio` times the largest eigenvalue.
pub fn subsamp_svrg(problem: &dyn Problem, opts: &SolverOptions) -> Result<SolverResult> {
    let run = Run::new("SS-SVRG", problem, opts)?;
    run.require_smooth()?;
    let w0 = run.initial_w();
    let hess_batch = opts.hess_batch();
    run.drive(w0, |run, w| {
        let snap = take_snapshot(run, w);
        let hb = run.sample_aux(hess_batch);
        run.count(hb.len());
        let h = problem.hess(&snap.w, &hb);
        let floor = opts.ss_floor.unwrap_or_else(|| {
            let top = h.clone().symmetric_eigenvalues().max();
            opts.ss_floor_ratio * top
        });
        let precond = floored_preconditioner(&h, floor);
        for batch in run.full_batches(opts.batch_size) {
            run.count(2 * batch.len());
            let v = snap.estimate(problem, w, &batch);
            let dir = &precond * v;
            w.axpy(-run.step()?, &dir, 1.0);
            run.iter += 1;
        }
        Ok(())
    })
}
