mod common;

use stochkit::linalg::power_iteration;
use stochkit::problems::{attach_l1, calc_solution, generate_logistic_data, make_logistic_regression};
use stochkit::solvers::{obfgs, sag_saga, sarah, sgd, sgd_momentum, svrg, GradientTable, Method, Snapshot};
use stochkit::{PartialOptions, Problem, SolverOptions, StepAlg, SubMode, Termination, Vector};

use common::{all, demo, ill_ridge, ridge};

fn tight(max_epoch: usize) -> SolverOptions {
    SolverOptions {
        max_epoch,
        tol_optgap: 0.0,
        tol_gnorm: 0.0,
        ..Default::default()
    }
}

#[test]
fn demo_runs_reduce_cost_hundredfold() {
    let (p, w0) = demo(0.01);
    for result in [
        sgd(
            &p,
            &SolverOptions {
                w_init: Some(w0.clone()),
                ..tight(100)
            },
        )
        .unwrap(),
        svrg(
            &p,
            &SolverOptions {
                w_init: Some(w0.clone()),
                ..tight(100)
            },
        )
        .unwrap(),
    ] {
        assert_eq!(result.record.len(), 101);
        assert_eq!(result.termination, Termination::MaxEpoch);
        assert!(
            result.record.cost[100] <= result.record.cost[0] / 100.0,
            "{}",
            result.solver
        );
    }
}

#[test]
fn variance_reduction_beats_decaying_sgd() {
    let (p, w0) = demo(0.01);
    let (_, f_opt) = calc_solution(&p, 1000).unwrap();
    let base = SolverOptions {
        w_init: Some(w0),
        f_opt: Some(f_opt),
        step_init: 0.1,
        ..tight(100)
    };
    let vr = svrg(&p, &base).unwrap();
    let plain = sgd(
        &p,
        &SolverOptions {
            step_alg: StepAlg::Decay2,
            ..base.clone()
        },
    )
    .unwrap();
    let gap_vr = vr.record.optgap[100];
    assert!(gap_vr <= 1e-6, "{gap_vr}");
    assert!(plain.record.optgap[100] >= 10.0 * gap_vr);
}

#[test]
fn svrg_estimator_at_snapshot_is_full_gradient() {
    let (p, _, _) = ridge(40, 3, 0.1, 2);
    let w = Vector::from_vec(vec![0.2, -0.7, 1.1]);
    let snap = Snapshot {
        w: w.clone(),
        mu: p.full_grad(&w),
    };
    for batch in [vec![0], vec![3, 9, 27], all(40)] {
        assert!((snap.estimate(&p, &w, &batch) - &snap.mu).amax() <= 1e-12);
    }
}

#[test]
fn sarah_first_step_uses_full_gradient() {
    // with b = n the inner loop is the single full-gradient step
    let (p, _, _) = ridge(30, 3, 0.1, 5);
    let w0 = Vector::from_vec(vec![1.0, 1.0, -1.0]);
    let opts = SolverOptions {
        batch_size: 30,
        step_init: 0.2,
        w_init: Some(w0.clone()),
        ..tight(1)
    };
    let r = sarah(&p, &opts).unwrap();
    let expected = &w0 - p.full_grad(&w0) * 0.2;
    assert!((r.w - expected).amax() <= 1e-12);
}

#[test]
fn saga_and_sag_tables_average_to_full_gradient() {
    let (p, _, _) = ridge(25, 3, 0.1, 8);
    let stale = Vector::from_vec(vec![3.0, -2.0, 0.5]);
    let w = Vector::from_vec(vec![-0.5, 0.5, 1.5]);
    let mut table = GradientTable::zeros(25, 3);
    for i in 0..25 {
        table.replace(i, p.grad(&stale, &[i]));
    }
    let fg = p.full_grad(&w);
    let mean = (0..25)
        .map(|i| table.saga_estimate(i, &p.grad(&w, &[i])))
        .fold(Vector::zeros(3), |a, b| a + b)
        / 25.0;
    assert!((mean - &fg).amax() <= 1e-12);
    for i in 0..25 {
        table.replace(i, p.grad(&w, &[i]));
    }
    assert!((table.mean() - &fg).amax() <= 1e-12);
}

#[test]
fn momentum_zero_reproduces_sgd() {
    let (p, w0) = demo(0.01);
    let opts = SolverOptions {
        w_init: Some(w0),
        store_w: true,
        momentum: 0.0,
        seed: 9,
        ..tight(5)
    };
    let a = sgd(&p, &opts).unwrap();
    let b = sgd_momentum(
        &p,
        &SolverOptions {
            sub_mode: Some(SubMode::Cm),
            ..opts
        },
    )
    .unwrap();
    for (x, y) in a.record.w_hist.iter().zip(&b.record.w_hist) {
        assert!((x - y).amax() <= 1e-12);
    }
}

#[test]
fn gradient_counts_per_epoch() {
    let (p, w0) = demo(0.01);
    let n = p.samples() as u64;
    let b = 7u64;
    let opts = SolverOptions {
        w_init: Some(w0),
        batch_size: b as usize,
        ..tight(4)
    };
    let s = sgd(&p, &opts).unwrap();
    let v = svrg(&p, &opts).unwrap();
    for e in 0..4 {
        assert_eq!(s.record.grad_calc_count[e + 1] - s.record.grad_calc_count[e], n);
        assert_eq!(
            v.record.grad_calc_count[e + 1] - v.record.grad_calc_count[e],
            n + 2 * b * n.div_ceil(b)
        );
    }
}

#[test]
fn same_seed_same_trajectory() {
    let (p, w0) = demo(0.01);
    for m in Method::ALL {
        let user = PartialOptions {
            max_epoch: Some(3),
            w_init: Some(w0.clone()),
            seed: Some(4),
            ..Default::default()
        };
        let a = m.solve(&p, &SolverOptions::default(), &user).unwrap();
        let b = m.solve(&p, &SolverOptions::default(), &user).unwrap();
        assert_eq!(a.record.cost, b.record.cost, "{m}");
        assert_eq!(a.record.grad_calc_count, b.record.grad_calc_count, "{m}");
        assert_eq!(a.w, b.w, "{m}");
    }
}

#[test]
fn reference_optimum_bounds_every_recorded_cost() {
    let (p, _, _) = ridge(60, 4, 0.05, 12);
    let (_, f_opt) = calc_solution(&p, 1000).unwrap();
    for m in Method::ALL {
        let user = PartialOptions {
            max_epoch: Some(20),
            step_init: Some(0.05),
            ..Default::default()
        };
        let r = m.solve(&p, &SolverOptions::default(), &user).unwrap();
        for &c in &r.record.cost {
            assert!(c >= f_opt - 1e-10, "{m}: {c} < {f_opt}");
        }
    }
}

#[test]
fn regularized_obfgs_solves_ill_conditioned_ridge() {
    let p = ill_ridge();
    let (_, f_opt) = calc_solution(&p, 1000).unwrap();
    let base = SolverOptions {
        f_opt: Some(f_opt),
        w_init: Some(Vector::zeros(2)),
        ..tight(50)
    };
    let reg = obfgs(
        &p,
        &SolverOptions {
            delta: 0.1,
            step_init: 1.0,
            ..base.clone()
        },
    )
    .unwrap();
    let best = reg.record.optgap.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(best <= 1e-8, "{best}");

    // SGD at 1/L, the largest step the stiff direction tolerates, stalls along the flat one
    let l = power_iteration(2, |v| p.hess_vec(&Vector::zeros(2), v, &all(p.samples())), 500);
    let plain = sgd(
        &p,
        &SolverOptions {
            step_init: 1.0 / l,
            ..base
        },
    )
    .unwrap();
    assert!(*plain.record.optgap.last().unwrap() > 1e-4);
}

#[test]
fn strong_l1_gives_sparse_iterates() {
    let data = generate_logistic_data(200, 10, 3).unwrap();
    let p = attach_l1(make_logistic_regression(data.x_train, data.y_train, 0.0).unwrap(), 0.5).unwrap();
    let r = Method::Saga
        .solve(
            &p,
            &SolverOptions::default(),
            &PartialOptions {
                max_epoch: Some(100),
                ..Default::default()
            },
        )
        .unwrap();
    let zeros = r.w.iter().filter(|&&v| v == 0.0).count();
    assert!(zeros * 2 >= r.w.len(), "{zeros} zeros in {}", r.w);
}

#[test]
fn sag_refuses_proximal_problems() {
    let data = generate_logistic_data(40, 3, 1).unwrap();
    let p = attach_l1(make_logistic_regression(data.x_train, data.y_train, 0.0).unwrap(), 0.1).unwrap();
    let opts = SolverOptions {
        sub_mode: Some(SubMode::Sag),
        ..tight(2)
    };
    assert!(sag_saga(&p, &opts).is_err());
}
