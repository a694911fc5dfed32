//! One function per command. Each validates its config sections, calls the
//! library, and writes its outputs through a [`Sink`].

use std::path::PathBuf;

use graphon_gl::cutnorm::{
    cut_norm_bilinear_exact, cut_norm_exact, cut_norm_heuristic, CutForm, EXHAUSTIVE_MAX_N,
};
use graphon_gl::functionals::{
    graph_dirichlet, graph_gl, graph_tv, graphon_dirichlet, graphon_gl, graphon_tv,
};
use graphon_gl::graphon::sample_step_graphon_with;
use graphon_gl::limits::{run_eps_sweep, run_n_sweep, SweepFunctional, SweepLevel, SweepOptions};
use graphon_gl::measures::delta_from_function;
use graphon_gl::minimize::{
    closed_form_bipartite, closed_form_community, el_solve_constant, minimize_graph_gl,
    minimize_graphon_gl_two_atom,
};
use graphon_gl::{
    io, AnalyticGraphon, CellLaw, EnergyReport, Graphon, MinimizeProblem, MinimizerResult, Sampling,
    State, StateSpace, StepFunction, StepGraphon, YoungMeasure,
};

use crate::config::{
    Axis, Command, CutFormName, CutMethodName, FunctionalName, KernelFormat, KernelSpec, Level,
    MinimizeMethod, RunConfig, StateSpaceName, SweepFunctionalName,
};
use crate::outputs::{
    dat_string, CutnormDoc, Document, EnergyDoc, KernelDoc, KernelSource, MinimizerDoc, Sink, SweepDoc,
};
use crate::{Cli, CliError, Outcome, EXIT_INFINITE, EXIT_NOT_CONVERGED, EXIT_OK};

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

pub fn dispatch(cfg: &RunConfig, cli: &Cli) -> Result<Outcome, CliError> {
    check_sections(cfg)?;
    let dir = cli
        .out
        .clone()
        .or_else(|| cfg.output.dir.clone())
        .unwrap_or_else(|| PathBuf::from("."));
    let mut sink = Sink::new(dir, cfg.output.prefix.as_deref())?;
    let seed = cli.seed.or(cfg.seed);
    let (exit_code, report) = match cfg.command {
        Command::Gen => cmd_gen(cfg, &mut sink)?,
        Command::Eval => cmd_eval(cfg, &mut sink)?,
        Command::Minimize => cmd_minimize(cfg, seed, &mut sink)?,
        Command::Sweep => cmd_sweep(cfg, seed, cli.plot_data, &mut sink)?,
        Command::Cutnorm => cmd_cutnorm(cfg, seed, cli.force_exhaustive, &mut sink)?,
    };
    Ok(Outcome {
        exit_code,
        files: sink.written(),
        report,
    })
}

/// Sections a command does not read are rejected rather than ignored.
fn check_sections(cfg: &RunConfig) -> Result<(), CliError> {
    let present = [
        ("kernel", cfg.kernel.is_some()),
        ("state", cfg.state.is_some()),
        ("functional", cfg.functional.is_some()),
        ("problem", cfg.problem.is_some()),
        ("sweep", cfg.sweep.is_some()),
        ("cutnorm", cfg.cutnorm.is_some()),
    ];
    let (name, allowed): (&str, &[&str]) = match cfg.command {
        Command::Gen => ("gen", &["kernel"]),
        Command::Eval => ("eval", &["kernel", "state", "functional"]),
        Command::Minimize => ("minimize", &["kernel", "problem"]),
        Command::Sweep => ("sweep", &["kernel", "sweep"]),
        Command::Cutnorm => ("cutnorm", &["kernel", "cutnorm"]),
    };
    for (section, is_set) in present {
        if is_set && !allowed.contains(&section) {
            return Err(invalid(format!("[{section}] is not used by command '{name}'")));
        }
    }
    Ok(())
}

fn require_seed(seed: Option<u64>, what: &str) -> Result<u64, CliError> {
    seed.ok_or_else(|| invalid(format!("{what} is stochastic: set `seed` in the config or pass --seed")))
}

// ---------- kernels and states ----------

fn kernel_spec(cfg: &RunConfig) -> Result<&KernelSpec, CliError> {
    let k = cfg.kernel.as_ref().ok_or_else(|| invalid("missing [kernel] section"))?;
    match (&k.analytic, &k.file) {
        (Some(_), Some(_)) => Err(invalid("[kernel] takes either `analytic` or `file`, not both")),
        (None, None) => Err(invalid("[kernel] needs `analytic` or `file`")),
        _ => Ok(k),
    }
}

fn read_kernel_file(k: &KernelSpec) -> Result<StepGraphon, CliError> {
    let path = k.file.as_ref().expect("checked by kernel_spec");
    let w = match k.format {
        KernelFormat::Csv => io::read_adjacency_csv(path)?,
        KernelFormat::Edges => io::read_edge_list(path, k.n)?,
    };
    if let Some(n) = k.n {
        if n != w.n() {
            return Err(invalid(format!(
                "kernel.n = {n} but {} has {} nodes",
                path.display(),
                w.n()
            )));
        }
    }
    Ok(w)
}

/// The kernel as a step graphon with `n` nodes (`kernel.n` when `n` is `None`).
fn step_kernel(k: &KernelSpec, n: Option<usize>) -> Result<StepGraphon, CliError> {
    match &k.analytic {
        Some(a) => {
            let n = n
                .or(k.n)
                .ok_or_else(|| invalid("an analytic kernel needs a resolution `kernel.n`"))?;
            Ok(sample_step_graphon_with(a, n, k.sampling)?)
        }
        None => {
            let w = read_kernel_file(k)?;
            if let Some(n) = n {
                if n != w.n() {
                    return Err(graphon_gl::Error::SizeMismatch {
                        what: "kernel nodes vs state cells",
                        expected: n,
                        got: w.n(),
                    }
                    .into());
                }
            }
            Ok(w)
        }
    }
}

/// The kernel as a graphon: analytic descriptors stay analytic.
fn graphon_kernel(k: &KernelSpec) -> Result<Graphon, CliError> {
    match &k.analytic {
        Some(a) => {
            a.validate()?;
            Ok(Graphon::Analytic(*a))
        }
        None => Ok(Graphon::Step(read_kernel_file(k)?)),
    }
}

fn kernel_source(k: &KernelSpec) -> KernelSource {
    match &k.analytic {
        Some(a) => KernelSource::Analytic {
            descriptor: *a,
            sampling: k.sampling,
        },
        None => KernelSource::File { format: k.format },
    }
}

enum StateInput {
    Step(StepFunction),
    Young(YoungMeasure),
}

fn load_state(cfg: &RunConfig) -> Result<StateInput, CliError> {
    let s = cfg.state.as_ref().ok_or_else(|| invalid("missing [state] section"))?;
    match (&s.values, &s.file, &s.young) {
        (Some(v), None, None) => Ok(StateInput::Step(StepFunction::new(v.clone())?)),
        (None, Some(p), None) => Ok(StateInput::Step(io::read_step_function_csv(p)?)),
        (None, None, Some(p)) => Ok(StateInput::Young(io::read_json(p)?)),
        _ => Err(invalid("[state] takes exactly one of `values`, `file`, `young`")),
    }
}

// ---------- gen ----------

fn cmd_gen(cfg: &RunConfig, sink: &mut Sink) -> Result<(i32, Vec<String>), CliError> {
    let k = kernel_spec(cfg)?;
    let w = step_kernel(k, None)?;
    let doc = KernelDoc {
        schema: KernelDoc::SCHEMA.into(),
        n: w.n(),
        source: kernel_source(k),
        hash: w.content_hash(),
        simple: w.is_simple(),
    };
    sink.text("kernel.csv", &io::adjacency_csv_string(&w)?)?;
    sink.json("kernel.json", &doc)?;
    Ok((EXIT_OK, vec![format!("n={} hash={}", doc.n, doc.hash)]))
}

// ---------- eval ----------

fn functional_label(name: FunctionalName) -> &'static str {
    match name {
        FunctionalName::GraphDirichlet => "graph_dirichlet",
        FunctionalName::GraphGl => "graph_gl",
        FunctionalName::GraphTv => "graph_tv",
        FunctionalName::GraphonDirichlet => "graphon_dirichlet",
        FunctionalName::GraphonGl => "graphon_gl",
        FunctionalName::GraphonTv => "graphon_tv",
    }
}

pub fn energy_row(r: &EnergyReport) -> Vec<String> {
    vec![
        r.total.to_string(),
        r.dirichlet_part.to_string(),
        r.doublewell_part.to_string(),
        r.finite.to_string(),
    ]
}

fn cmd_eval(cfg: &RunConfig, sink: &mut Sink) -> Result<(i32, Vec<String>), CliError> {
    let k = kernel_spec(cfg)?;
    let f = cfg.functional.as_ref().ok_or_else(|| invalid("missing [functional] section"))?;
    let needs_eps = matches!(f.name, FunctionalName::GraphGl | FunctionalName::GraphonGl);
    let eps = match (needs_eps, f.epsilon) {
        (true, Some(e)) => e,
        (true, None) => return Err(invalid(format!("{} needs `epsilon`", functional_label(f.name)))),
        (false, Some(_)) => {
            return Err(invalid(format!("{} takes no `epsilon`", functional_label(f.name))))
        }
        (false, None) => 0.0,
    };
    let state = load_state(cfg)?;
    let graph_level = matches!(
        f.name,
        FunctionalName::GraphDirichlet | FunctionalName::GraphGl | FunctionalName::GraphTv
    );
    let (report, kernel_hash, cells) = if graph_level {
        let StateInput::Step(u) = state else {
            return Err(invalid("graph functionals take a step-function state (`values` or `file`)"));
        };
        let w = step_kernel(k, Some(k.n.unwrap_or(u.n())))?;
        let r = match f.name {
            FunctionalName::GraphDirichlet => graph_dirichlet(&w, &u)?,
            FunctionalName::GraphGl => graph_gl(&w, &u, eps)?,
            _ => graph_tv(&w, &u)?,
        };
        (r, Some(w.content_hash()), u.n())
    } else {
        let nu = match state {
            StateInput::Step(u) => delta_from_function(&u),
            StateInput::Young(nu) => nu,
        };
        let g = graphon_kernel(k)?;
        let hash = match &g {
            Graphon::Step(w) => Some(w.content_hash()),
            Graphon::Analytic(_) => None,
        };
        let r = match f.name {
            FunctionalName::GraphonDirichlet => graphon_dirichlet(&g, &nu)?,
            FunctionalName::GraphonGl => graphon_gl(&g, &nu, eps)?,
            _ => graphon_tv(&g, &nu)?,
        };
        (r, hash, nu.cells())
    };
    let doc = EnergyDoc {
        schema: EnergyDoc::SCHEMA.into(),
        functional: functional_label(f.name).into(),
        kernel_hash,
        state_cells: cells,
        report,
    };
    sink.json("energy.json", &doc)?;
    let row = energy_row(&report);
    sink.csv("energy.csv", &["total", "dirichlet", "doublewell", "finite"], std::slice::from_ref(&row))?;
    let code = if report.finite { EXIT_OK } else { EXIT_INFINITE };
    Ok((code, vec![row.join(",")]))
}

// ---------- minimize ----------

fn closed_form(a: &AnalyticGraphon, eps: f64, c: f64, n: usize) -> Result<MinimizerResult, CliError> {
    let r = match *a {
        AnalyticGraphon::Constant { p } => el_solve_constant(p, eps, c, n)?,
        AnalyticGraphon::Bipartite { a } => closed_form_bipartite(a, eps, n, c)?,
        AnalyticGraphon::Community { a } => closed_form_community(a, eps, n, c)?,
        other => {
            return Err(invalid(format!(
                "precondition violated: no closed-form minimizer is known for the {} kernel \
                 (closed forms cover constant, bipartite and community kernels)",
                other.name()
            )))
        }
    };
    Ok(r)
}

fn young_rows(nu: &YoungMeasure) -> Vec<Vec<String>> {
    nu.laws()
        .iter()
        .enumerate()
        .map(|(i, law)| {
            let (kind, a, b, theta) = match law {
                CellLaw::Delta { value } => ("delta", value.to_string(), String::new(), "1".to_string()),
                CellLaw::TwoAtom { a, b, theta } => ("two_atom", a.to_string(), b.to_string(), theta.to_string()),
                CellLaw::Grid { .. } => ("grid", String::new(), String::new(), String::new()),
            };
            vec![(i + 1).to_string(), kind.into(), a, b, theta]
        })
        .collect()
}

fn cmd_minimize(cfg: &RunConfig, seed: Option<u64>, sink: &mut Sink) -> Result<(i32, Vec<String>), CliError> {
    let k = kernel_spec(cfg)?;
    let p = cfg.problem.as_ref().ok_or_else(|| invalid("missing [problem] section"))?;
    let file_kernel = match &k.analytic {
        Some(_) => None,
        None => Some(read_kernel_file(k)?),
    };
    let cells = p
        .cells
        .or(k.n)
        .or(file_kernel.as_ref().map(StepGraphon::n))
        .ok_or_else(|| invalid("set `problem.cells` or `kernel.n`"))?;
    let kernel: Graphon = match (&k.analytic, file_kernel) {
        // the minimizers sample analytic kernels at right endpoints
        (Some(a), _) if k.sampling == Sampling::RightEndpoint => Graphon::Analytic(*a),
        (Some(a), _) => Graphon::Step(sample_step_graphon_with(a, cells, k.sampling)?),
        (None, Some(w)) => Graphon::Step(w),
        (None, None) => unreachable!("kernel_spec checked the source"),
    };
    let space = match p.state_space {
        StateSpaceName::StepFunction => StateSpace::StepFunction { n: cells },
        StateSpaceName::TwoAtom => StateSpace::TwoAtom { m: cells },
    };
    let stochastic = p.method == MinimizeMethod::Descent && p.restarts > 1;
    let seed = if stochastic {
        require_seed(seed, "minimize with restarts > 1")?
    } else {
        seed.unwrap_or(0)
    };
    let mut problem = MinimizeProblem::new(kernel, p.epsilon, p.c, space)
        .with_restarts(p.restarts)
        .with_seed(seed);
    problem.tolerances = p.tolerances;
    let (method, result) = match (p.method, p.state_space) {
        (MinimizeMethod::Descent, StateSpaceName::StepFunction) => ("descent", minimize_graph_gl(&problem)?),
        (MinimizeMethod::Descent, StateSpaceName::TwoAtom) => ("two_atom", minimize_graphon_gl_two_atom(&problem)?),
        (MinimizeMethod::ClosedForm, StateSpaceName::StepFunction) => {
            problem.validate()?;
            let Graphon::Analytic(a) = &problem.kernel else {
                return Err(invalid(
                    "precondition violated: closed forms need an analytic kernel with right-endpoint sampling",
                ));
            };
            ("closed_form", closed_form(a, p.epsilon, p.c, cells)?)
        }
        (MinimizeMethod::ClosedForm, StateSpaceName::TwoAtom) => {
            return Err(invalid("closed forms are available for step-function states only"))
        }
    };

    let restart_rows: Vec<Vec<String>> = result
        .restarts
        .iter()
        .map(|r| {
            vec![
                r.restart.to_string(),
                r.start.clone(),
                r.energy.to_string(),
                r.constraint_residual.to_string(),
                r.converged.to_string(),
                r.iterations.to_string(),
            ]
        })
        .collect();
    sink.csv(
        "restarts.csv",
        &["restart", "start", "energy", "constraint_residual", "converged", "iterations"],
        &restart_rows,
    )?;
    match &result.state {
        State::Step(u) => sink.text("state.csv", &io::step_function_csv_string(u)?)?,
        State::Young(nu) => sink.csv("state.csv", &["cell", "law", "a", "b", "theta"], &young_rows(nu))?,
    };
    let doc = MinimizerDoc {
        schema: MinimizerDoc::SCHEMA.into(),
        method: method.into(),
        problem,
        result,
    };
    sink.json("minimizer.json", &doc)?;
    let r = &doc.result;
    let code = if r.converged { EXIT_OK } else { EXIT_NOT_CONVERGED };
    Ok((
        code,
        vec![format!(
            "method={method} energy={} residual={} converged={}",
            r.energy.total, r.constraint_residual, r.converged
        )],
    ))
}

// ---------- sweep ----------

fn cmd_sweep(
    cfg: &RunConfig,
    seed: Option<u64>,
    plot_data: bool,
    sink: &mut Sink,
) -> Result<(i32, Vec<String>), CliError> {
    let k = kernel_spec(cfg)?;
    let s = cfg.sweep.as_ref().ok_or_else(|| invalid("missing [sweep] section"))?;
    if s.points.is_empty() {
        return Err(invalid("sweep.points is empty"));
    }
    let seed = require_seed(seed, "sweep")?;
    let opts = SweepOptions {
        restarts: s.restarts,
        seed,
        tolerances: s.tolerances,
        reference_cells: s.reference_cells,
    };
    let result = match s.axis {
        Axis::N => {
            let Some(a) = &k.analytic else {
                return Err(invalid("n sweeps need an analytic kernel"));
            };
            if k.sampling != Sampling::RightEndpoint {
                return Err(invalid("n sweeps sample at right endpoints; drop `kernel.sampling`"));
            }
            if s.level != Level::Graph {
                return Err(invalid("n sweeps minimize graph energies; `level` must be `graph`"));
            }
            if s.cells.is_some() {
                return Err(invalid("`sweep.cells` applies to epsilon sweeps only"));
            }
            let eps = s.epsilon.ok_or_else(|| invalid("n sweeps need a fixed `sweep.epsilon`"))?;
            let mut ns = Vec::with_capacity(s.points.len());
            for &x in &s.points {
                if !(x >= 1.0 && x.fract() == 0.0 && x <= usize::MAX as f64) {
                    return Err(invalid(format!("n sweep point {x} is not a positive integer")));
                }
                ns.push(x as usize);
            }
            let f = match s.functional {
                SweepFunctionalName::Gl => SweepFunctional::Gl,
                SweepFunctionalName::Tv => SweepFunctional::Tv,
            };
            run_n_sweep(a, eps, s.c, &ns, f, &opts)?
        }
        Axis::Epsilon => {
            if s.functional != SweepFunctionalName::Gl {
                return Err(invalid("epsilon sweeps track GL minimizers; `functional` must be `gl`"));
            }
            if s.epsilon.is_some() {
                return Err(invalid("`sweep.epsilon` applies to n sweeps; list epsilons in `points`"));
            }
            let g = match (&k.analytic, k.sampling) {
                (Some(_), Sampling::Midpoint) => {
                    return Err(invalid("epsilon sweeps use analytic kernels directly; drop `kernel.sampling`"))
                }
                _ => graphon_kernel(k)?,
            };
            let cells = s
                .cells
                .or(k.n)
                .or(match &g {
                    Graphon::Step(w) => Some(w.n()),
                    Graphon::Analytic(_) => None,
                })
                .ok_or_else(|| invalid("set `sweep.cells` or `kernel.n`"))?;
            let level = match s.level {
                Level::Graph => SweepLevel::Graph,
                Level::Graphon => SweepLevel::Graphon,
            };
            run_eps_sweep(&g, cells, s.c, &s.points, level, &opts)?
        }
    };

    let header = [
        "parameter",
        "n",
        "epsilon",
        "energy",
        "reference_energy",
        "gap",
        "narrow_distance",
        "converged",
        "min_abs",
        "max_abs",
        "sign_distance",
        "max_deviation",
        "deviation",
        "exceptional",
    ];
    let rows: Vec<Vec<String>> = result
        .points
        .iter()
        .map(|p| {
            let d = &p.diagnostics;
            vec![
                p.parameter.to_string(),
                p.n.to_string(),
                p.epsilon.to_string(),
                p.energy.to_string(),
                p.reference_energy.to_string(),
                p.gap.to_string(),
                p.narrow_distance.to_string(),
                p.result.converged.to_string(),
                d.min_abs.to_string(),
                d.max_abs.to_string(),
                d.sign_distance.to_string(),
                d.max_deviation.to_string(),
                d.deviation.to_string(),
                d.exceptional.to_string(),
            ]
        })
        .collect();
    sink.csv("sweep.csv", &header, &rows)?;
    if plot_data {
        let x = match s.axis {
            Axis::N => "n",
            Axis::Epsilon => "epsilon",
        };
        let col = |f: fn(&graphon_gl::limits::SweepPoint) -> f64| -> Vec<(f64, f64)> {
            result.points.iter().map(|p| (p.parameter, f(p))).collect()
        };
        sink.text("sweep_energy.dat", &dat_string(x, "energy", &col(|p| p.energy)))?;
        sink.text("sweep_gap.dat", &dat_string(x, "gap", &col(|p| p.gap)))?;
        sink.text("sweep_narrow.dat", &dat_string(x, "narrow_distance", &col(|p| p.narrow_distance)))?;
        sink.text("sweep_max_abs.dat", &dat_string(x, "max_abs", &col(|p| p.diagnostics.max_abs)))?;
        sink.text("sweep_deviation.dat", &dat_string(x, "deviation", &col(|p| p.diagnostics.deviation)))?;
    }
    let all_converged = result.points.iter().all(|p| p.result.converged);
    let mut report: Vec<String> = result
        .points
        .iter()
        .map(|p| format!("parameter={} energy={} gap={} narrow={}", p.parameter, p.energy, p.gap, p.narrow_distance))
        .collect();
    if let Some(c) = result.fitted_c {
        report.push(format!("fitted_c={c}"));
    }
    let doc = SweepDoc {
        schema: SweepDoc::SCHEMA.into(),
        seed,
        result,
    };
    sink.json("sweep.json", &doc)?;
    let code = if all_converged { EXIT_OK } else { EXIT_NOT_CONVERGED };
    Ok((code, report))
}

// ---------- cutnorm ----------

fn cmd_cutnorm(
    cfg: &RunConfig,
    seed: Option<u64>,
    force_exhaustive: bool,
    sink: &mut Sink,
) -> Result<(i32, Vec<String>), CliError> {
    let k = kernel_spec(cfg)?;
    let spec = cfg.cutnorm.clone().unwrap_or_default();
    let w = step_kernel(k, None)?;
    let n = w.n();
    let exhaustive = force_exhaustive
        || match spec.method {
            CutMethodName::Exhaustive => true,
            CutMethodName::Heuristic => false,
            CutMethodName::Auto => n <= EXHAUSTIVE_MAX_N,
        };
    let (estimate, used_seed) = if exhaustive {
        if n > EXHAUSTIVE_MAX_N {
            return Err(invalid(format!(
                "exhaustive cut norm at n = {n} enumerates 2^{n} = {} sign patterns, about {:.2e} row \
                 updates; the limit is n <= {EXHAUSTIVE_MAX_N}. Use method = \"heuristic\"",
                1u128 << n.min(127),
                (1u128 << n.min(127)) as f64 * n as f64
            )));
        }
        let e = match spec.form.unwrap_or(CutFormName::Subset) {
            CutFormName::Subset => cut_norm_exact(&w)?,
            CutFormName::Bilinear => cut_norm_bilinear_exact(&w)?,
        };
        (e, None)
    } else {
        if spec.form == Some(CutFormName::Subset) {
            return Err(invalid(format!(
                "the heuristic estimates the bilinear form only (n = {n}); set form = \"bilinear\" \
                 or use the exhaustive method for n <= {EXHAUSTIVE_MAX_N}"
            )));
        }
        if spec.restarts == 0 {
            return Err(invalid("cutnorm.restarts must be at least 1"));
        }
        let seed = require_seed(seed, "the heuristic cut norm")?;
        (cut_norm_heuristic(&w, spec.restarts, seed), Some(seed))
    };
    let certified = estimate.recompute(&w);
    if (certified - estimate.value).abs() > 1e-9 * estimate.value.abs().max(1.0) {
        return Err(invalid(format!(
            "certificate gives {certified}, estimate reports {}",
            estimate.value
        )));
    }
    let subset = (estimate.form == CutForm::Subset).then(|| estimate.subset());
    let doc = CutnormDoc {
        schema: CutnormDoc::SCHEMA.into(),
        n,
        kernel_hash: w.content_hash(),
        seed: used_seed,
        estimate,
        certified_value: certified,
        subset,
    };
    sink.json("cutnorm.json", &doc)?;
    let e = &doc.estimate;
    Ok((
        EXIT_OK,
        vec![format!(
            "value={} form={:?} method={:?} exact={}",
            e.value, e.form, e.method, e.is_exact
        )],
    ))
}
