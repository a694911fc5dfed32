use graphon_gl::functionals::graph_gl;
use graphon_gl::graphon::sample_step_graphon;
use graphon_gl::minimize::brute::linspace;
use graphon_gl::minimize::{
    brute_force_minimizer, closed_form_bipartite, closed_form_community, el_solve_constant,
    minimize_graph_gl, minimize_graphon_gl_two_atom,
};
use graphon_gl::{AnalyticGraphon, MinimizeProblem, StateSpace, StepGraphon};
use proptest::prelude::*;

fn kernel(n: usize, upper: &[f64]) -> StepGraphon {
    let mut a = vec![0.0; n * n];
    let mut k = 0;
    for i in 0..n {
        for j in i..n {
            a[i * n + j] = upper[k];
            a[j * n + i] = upper[k];
            k += 1;
        }
    }
    StepGraphon::from_flat(n, a).unwrap()
}

fn instance() -> impl Strategy<Value = (StepGraphon, f64)> {
    (2usize..=4).prop_flat_map(|n| {
        (
            prop::collection::vec(0.0..1.0f64, n * (n + 1) / 2).prop_map(move |u| kernel(n, &u)),
            0.1..1.0f64,
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn oracle_dominance((w, eps) in instance(), picks in prop::collection::vec(0usize..7, 4)) {
        let n = w.n();
        let grid = linspace(-1.2, 1.2, 7);
        let c = picks[..n].iter().map(|&k| grid[k]).sum::<f64>() / n as f64;
        let oracle = brute_force_minimizer(&w, eps, c, &grid, 1e-10).unwrap();
        let r = minimize_graph_gl(&MinimizeProblem::new(w.clone(), eps, c, StateSpace::StepFunction { n })).unwrap();
        prop_assert!(r.energy.total <= oracle.energy.total + 1e-6);
        // rounding the minimizer to the grid moves each value by at most the
        // spacing h, so the grid optimum cannot beat it by more than G·n·h
        let h = grid[1] - grid[0];
        let big_r: f64 = r.values().unwrap().iter().fold(1.2f64, |m, x| m.max(x.abs())) + h;
        let nf = n as f64;
        let lip = w.degrees().iter().fold(0.0f64, |m, d| m.max(*d)) * 8.0 * big_r / (nf * nf)
            + 4.0 * big_r * (big_r * big_r + 1.0) / (eps * nf);
        prop_assert!(r.energy.total >= oracle.energy.total - lip * nf * h);
    }

    #[test]
    fn constraint_and_sign_symmetry((w, eps) in instance()) {
        let n = w.n();
        let p = MinimizeProblem::new(w.clone(), eps, 0.0, StateSpace::StepFunction { n });
        let r = minimize_graph_gl(&p).unwrap();
        if r.converged {
            prop_assert!(r.constraint_residual.abs() <= p.tolerances.constraint_tol);
        }
        let u = r.state.as_step().unwrap();
        let e1 = graph_gl(&w, u, eps).unwrap().total;
        let e2 = graph_gl(&w, &u.negated(), eps).unwrap().total;
        prop_assert!((e1 - e2).abs() <= 1e-12);
    }

    #[test]
    fn volume_constraint_holds((w, eps) in instance(), c in -0.9..0.9f64) {
        let n = w.n();
        let p = MinimizeProblem::new(w, eps, c, StateSpace::StepFunction { n });
        let r = minimize_graph_gl(&p).unwrap();
        prop_assert!(r.converged);
        prop_assert!(r.constraint_residual.abs() <= p.tolerances.constraint_tol);
    }

    #[test]
    fn two_atom_states_in_range(p in 0.0..1.0f64, eps in 0.1..1.0f64, c in -0.8..0.8f64) {
        let prob = MinimizeProblem::new(AnalyticGraphon::Constant { p }, eps, c, StateSpace::TwoAtom { m: 2 })
            .with_restarts(2);
        let r = minimize_graphon_gl_two_atom(&prob).unwrap();
        prop_assert!(r.state.as_young().unwrap().max_abs_atom() <= 1.0 + 1e-9);
        prop_assert!(r.constraint_residual.abs() <= 1e-9);
    }
}

#[test]
fn closed_form_consistency() {
    for n in [8, 16, 32] {
        for eps in [0.5, 0.2, 0.1] {
            let cases = [
                (AnalyticGraphon::Constant { p: 0.5 }, 0.0, el_solve_constant(0.5, eps, 0.0, n).unwrap()),
                (AnalyticGraphon::Constant { p: 0.5 }, 0.3, el_solve_constant(0.5, eps, 0.3, n).unwrap()),
                (AnalyticGraphon::Bipartite { a: 0.5 }, 0.0, closed_form_bipartite(0.5, eps, n, 0.0).unwrap()),
                (AnalyticGraphon::Community { a: 0.5 }, 0.0, closed_form_community(0.5, eps, n, 0.0).unwrap()),
            ];
            for (w, c, cf) in cases {
                let r = minimize_graph_gl(&MinimizeProblem::new(w, eps, c, StateSpace::StepFunction { n })).unwrap();
                assert!(
                    (r.energy.total - cf.energy.total).abs() <= 1e-6,
                    "{} n={n} eps={eps} c={c}: {} vs {}",
                    w.name(),
                    r.energy.total,
                    cf.energy.total
                );
            }
        }
    }
}

#[test]
fn zero_volume_minimizers_stay_in_range() {
    for (w, eps) in [
        (AnalyticGraphon::Constant { p: 0.7 }, 0.3),
        (AnalyticGraphon::Bipartite { a: 0.25 }, 0.2),
        (AnalyticGraphon::Community { a: 0.5 }, 0.1),
    ] {
        let r = minimize_graph_gl(&MinimizeProblem::new(w, eps, 0.0, StateSpace::StepFunction { n: 16 })).unwrap();
        assert!(r.converged);
        assert!(r.values().unwrap().iter().all(|x| x.abs() <= 1.0 + 1e-9), "{}", w.name());
    }
}

#[test]
fn volume_can_push_values_past_one() {
    // The constant-kernel minimizer at c = 0.3 has a cell above 1: the
    // truncation argument needs the volume constraint to be inactive.
    let r = minimize_graph_gl(&MinimizeProblem::new(
        AnalyticGraphon::Constant { p: 0.5 },
        0.1,
        0.3,
        StateSpace::StepFunction { n: 8 },
    ))
    .unwrap();
    let top = r.values().unwrap().iter().fold(0.0f64, |m, x| m.max(x.abs()));
    assert!(top > 1.0, "max |u| = {top}");
}

#[test]
fn deterministic_under_seed() {
    let w = sample_step_graphon(&AnalyticGraphon::PowerKernel { s: 0.25, cap: 30.0 }, 12).unwrap();
    let p = MinimizeProblem::new(w, 0.2, 0.1, StateSpace::StepFunction { n: 12 }).with_seed(99);
    let a = serde_json::to_string(&minimize_graph_gl(&p).unwrap()).unwrap();
    let b = serde_json::to_string(&minimize_graph_gl(&p).unwrap()).unwrap();
    assert_eq!(a, b);
}
