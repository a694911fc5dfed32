use graphon_gl::functionals::graphon_gl;
use graphon_gl::limits::{
    liminf_probe, non_increasing, recovery_sequence_check, run_eps_sweep, run_n_sweep, SweepFunctional,
    SweepLevel, SweepOptions, LIMINF_THRESHOLD, MONOTONE_SLACK,
};
use graphon_gl::measures::{delta_from_function, CellLaw};
use graphon_gl::{AnalyticGraphon, Error, Graphon, StepFunction, YoungMeasure};

fn opts() -> SweepOptions {
    SweepOptions::default()
}

#[test]
fn constant_n_sweep_reports_gap_to_family() {
    let (p, eps, c): (f64, f64, f64) = (0.5, 0.1, 0.3);
    let r = run_n_sweep(&AnalyticGraphon::Constant { p }, eps, c, &[8, 16, 32, 64], SweepFunctional::Gl, &opts()).unwrap();
    // graphon family energy 2p(s² − c²) + εp² with s² = 1 − εp
    let s2 = 1.0 - eps * p;
    let oracle = 2.0 * p * (s2 - c * c) + eps * p * p;
    for pt in &r.points {
        assert!((pt.reference_energy - oracle).abs() < 1e-12);
        assert!(pt.energy >= pt.reference_energy - 1e-12);
    }
    assert!(non_increasing(&r.gaps(), MONOTONE_SLACK));
    assert!(r.points.last().unwrap().gap < 1e-3);
}

#[test]
fn bipartite_n_sweep_fits_rate() {
    let r = run_n_sweep(
        &AnalyticGraphon::Bipartite { a: 0.5 },
        0.2,
        0.0,
        &[8, 16, 32, 64, 128],
        SweepFunctional::Gl,
        &opts(),
    )
    .unwrap();
    let devs: Vec<f64> = r.points.iter().map(|p| p.diagnostics.deviation).collect();
    assert!(non_increasing(&devs, MONOTONE_SLACK));
    let c = r.fitted_c.unwrap();
    for p in &r.points {
        assert!(p.diagnostics.deviation <= c / (p.n as f64).sqrt() + 1e-15);
        assert!(p.gap < 1e-9);
    }
}

#[test]
fn zero_graphon_gaps_vanish() {
    for f in [SweepFunctional::Gl, SweepFunctional::Tv] {
        let r = run_n_sweep(&AnalyticGraphon::Constant { p: 0.0 }, 0.4, 0.0, &[4, 8, 16], f, &opts()).unwrap();
        assert!(r.gaps().iter().all(|g| *g < 1e-12), "{f:?}: {:?}", r.gaps());
    }
}

#[test]
fn n_sweep_rejects_unsorted() {
    let w = AnalyticGraphon::Constant { p: 0.5 };
    assert!(matches!(
        run_n_sweep(&w, 0.1, 0.0, &[16, 8], SweepFunctional::Gl, &opts()),
        Err(Error::Validation(_))
    ));
    assert!(run_n_sweep(&w, 0.1, 0.0, &[], SweepFunctional::Gl, &opts()).is_err());
}

#[test]
fn community_eps_sweep_reaches_sharp_phases() {
    // the blockwise ±1 state already has zero energy at every ε
    let w = Graphon::Analytic(AnalyticGraphon::Community { a: 0.5 });
    let r = run_eps_sweep(&w, 16, 0.0, &[0.5, 0.2, 0.1, 0.05, 0.01], SweepLevel::Graph, &opts()).unwrap();
    for p in &r.points {
        assert!(p.diagnostics.sign_distance < 1e-6);
        assert!(p.energy < 1e-12);
    }
}

#[test]
fn graphon_eps_sweep_distances_shrink() {
    let w = Graphon::Analytic(AnalyticGraphon::Constant { p: 1.0 });
    let eps = [0.5, 0.2, 0.1, 0.05];
    let r = run_eps_sweep(&w, 2, 0.0, &eps, SweepLevel::Graphon, &opts()).unwrap();
    let d: Vec<f64> = r.points.iter().map(|p| p.diagnostics.sign_distance).collect();
    assert!(non_increasing(&d, MONOTONE_SLACK));
    for (p, e) in r.points.iter().zip(eps) {
        assert!((p.diagnostics.max_abs - (1.0 - e).sqrt()).abs() < 1e-6);
    }
    assert!(non_increasing(&r.gaps(), MONOTONE_SLACK));
}

#[test]
fn recovery_hits_constant_family() {
    let (p, eps, c): (f64, f64, f64) = (1.0, 0.2, 0.0);
    let s = (1.0 - eps * p).sqrt();
    let theta = 0.5 * (1.0 + c / s);
    let nu = YoungMeasure::new(vec![CellLaw::TwoAtom { a: s, b: -s, theta }], None).unwrap();
    let r = recovery_sequence_check(&AnalyticGraphon::Constant { p }, &nu, &[4, 8, 16, 32], eps).unwrap();
    assert!((r.graphon_energy - (2.0 * p * s * s + eps * p * p)).abs() < 1e-12);
    assert!(r.points.iter().all(|pt| pt.gap < 1e-12));
}

#[test]
fn liminf_probe_examples() {
    let nu = YoungMeasure::two_atom(1, 1.0, -1.0, 0.5).unwrap();
    let r = liminf_probe(&AnalyticGraphon::Constant { p: 0.5 }, &nu, 100, &[8, 16, 32, 64], 0.1, 1).unwrap();
    assert!(!r.flagged && r.min_proxy >= LIMINF_THRESHOLD);
    assert_eq!(r.proxies.len(), 100);

    // a delta measure of a step function is hit exactly
    let u = StepFunction::new(vec![0.8, -0.1, 0.4, -0.9]).unwrap();
    let nu = delta_from_function(&u);
    let w = AnalyticGraphon::Bipartite { a: 0.5 };
    let r = liminf_probe(&w, &nu, 1, &[4, 8], 0.3, 0).unwrap();
    assert!(r.min_proxy.abs() < 1e-12);
    let g = graphon_gl(&Graphon::Analytic(w), &nu, 0.3).unwrap().total;
    assert!((r.graphon_energy - g).abs() < 1e-15);
}

#[test]
fn sweep_json_is_deterministic() {
    let w = AnalyticGraphon::Sbm2x2 {
        a11: 0.8,
        a12: 0.3,
        a22: 0.6,
        split: 0.5,
    };
    let o = SweepOptions {
        reference_cells: 4,
        seed: 5,
        ..opts()
    };
    let a = serde_json::to_string(&run_n_sweep(&w, 0.2, 0.1, &[4, 8], SweepFunctional::Gl, &o).unwrap()).unwrap();
    let b = serde_json::to_string(&run_n_sweep(&w, 0.2, 0.1, &[4, 8], SweepFunctional::Gl, &o).unwrap()).unwrap();
    assert_eq!(a, b);
    let back: graphon_gl::limits::SweepResult = serde_json::from_str(&a).unwrap();
    for (p, (e, r)) in back.points.iter().zip(back.recompute().unwrap()) {
        assert!((p.energy - e).abs() <= 1e-12 && (p.reference_energy - r).abs() <= 1e-12);
    }
}
