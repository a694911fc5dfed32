//! Multi-start descent for the graph GL energy on the affine set `mean(u) = c`.
//!
//! Directions come from limited-memory BFGS on the tangent space
//! `{v : Σ v_i = 0}`; iterates are put back on the constraint by an exact
//! mean shift after every step. The best few starts are then refined by sign
//! flips of the cells closest to zero, re-descended and kept when they lower
//! the energy.

use std::collections::VecDeque;

use rand::Rng;
use rayon::prelude::*;

use super::{
    better, closed_form, dot, mean, norm, project_mean, MinimizeProblem, MinimizerResult,
    RestartRecord, State, StateSpace, Tolerances,
};
use crate::error::{validation, Result};
use crate::functionals::{double_well, double_well_derivative, graph_gl, graph_gl_gradient};
use crate::graphon::{AnalyticGraphon, StepGraphon};
use crate::measures::StepFunction;
use crate::rng;

const MEMORY: usize = 10;
const ARMIJO: f64 = 1e-4;
const MAX_HALVINGS: usize = 60;
const FLIP_ROUNDS: usize = 32;
/// Starts that receive flip refinement, lowest energy first.
const REFINE_TOP: usize = 4;
const FLIP_GAIN: f64 = 1e-12;

struct Objective<'a> {
    w: &'a StepGraphon,
    deg: Vec<f64>,
    eps: f64,
}

impl<'a> Objective<'a> {
    fn new(w: &'a StepGraphon, eps: f64) -> Self {
        Self {
            w,
            deg: w.degrees(),
            eps,
        }
    }

    /// GL energy via `(2/n²) uᵀ L u`, writing the gradient into `g`.
    fn eval(&self, u: &[f64], g: &mut [f64]) -> f64 {
        let n = u.len();
        let nf = n as f64;
        let (cd, cw) = (4.0 / (nf * nf), 1.0 / (self.eps * nf));
        let mut dir = 0.0;
        let mut dw = 0.0;
        for i in 0..n {
            let au = dot(self.w.row(i), u);
            let lap = self.deg[i] * u[i] - au;
            dir += u[i] * lap;
            dw += double_well(u[i]);
            g[i] = cd * lap + cw * double_well_derivative(u[i]);
        }
        2.0 * dir / (nf * nf) + dw * cw
    }
}

fn tangent(g: &[f64]) -> Vec<f64> {
    let m = mean(g);
    g.iter().map(|x| x - m).collect()
}

struct Descent {
    u: Vec<f64>,
    f: f64,
    converged: bool,
    iterations: usize,
}

fn two_loop(pg: &[f64], mem: &VecDeque<(Vec<f64>, Vec<f64>, f64)>) -> Vec<f64> {
    let mut q = pg.to_vec();
    let mut alphas = Vec::with_capacity(mem.len());
    for (s, y, rho) in mem.iter().rev() {
        let a = rho * dot(s, &q);
        for (qi, yi) in q.iter_mut().zip(y) {
            *qi -= a * yi;
        }
        alphas.push(a);
    }
    if let Some((s, y, _)) = mem.back() {
        let gamma = dot(s, y) / dot(y, y);
        for qi in q.iter_mut() {
            *qi *= gamma;
        }
    }
    for ((s, y, rho), a) in mem.iter().zip(alphas.iter().rev()) {
        let b = rho * dot(y, &q);
        for (qi, si) in q.iter_mut().zip(s) {
            *qi += (a - b) * si;
        }
    }
    let mut d: Vec<f64> = q.iter().map(|x| -x).collect();
    project_mean(&mut d, 0.0);
    d
}

fn descend(obj: &Objective, mut u: Vec<f64>, c: f64, tol: &Tolerances) -> Descent {
    let n = u.len();
    project_mean(&mut u, c);
    let mut g = vec![0.0; n];
    let mut f = obj.eval(&u, &mut g);
    let mut pg = tangent(&g);
    let mut mem: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::with_capacity(MEMORY);
    let mut gn = vec![0.0; n];
    let mut it = 0;
    let converged = loop {
        let pgn = norm(&pg);
        if pgn <= tol.grad_tol && (mean(&u) - c).abs() <= tol.constraint_tol {
            break true;
        }
        if it >= tol.max_iters {
            break false;
        }
        it += 1;
        let mut d = two_loop(&pg, &mem);
        let mut gd = dot(&pg, &d);
        if !(gd < 0.0) {
            mem.clear();
            d = pg.iter().map(|x| -x).collect();
            gd = -pgn * pgn;
        }
        let mut alpha = if mem.is_empty() {
            let dmax = d.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            (obj.eps * n as f64 / 8.0).min(0.5 / dmax.max(f64::MIN_POSITIVE))
        } else {
            1.0
        };
        let mut step = None;
        for _ in 0..MAX_HALVINGS {
            let mut un: Vec<f64> = u.iter().zip(&d).map(|(x, di)| x + alpha * di).collect();
            project_mean(&mut un, c);
            let fnew = obj.eval(&un, &mut gn);
            let pgnew = tangent(&gn);
            let armijo = fnew <= f + ARMIJO * alpha * gd;
            let flat = fnew <= f + 4.0 * f64::EPSILON * f.abs().max(1.0) && norm(&pgnew) < pgn;
            if armijo || flat {
                step = Some((un, fnew, pgnew));
                break;
            }
            alpha *= 0.5;
        }
        let Some((un, fnew, pgnew)) = step else {
            if mem.is_empty() {
                break pgn <= tol.grad_tol;
            }
            mem.clear();
            continue;
        };
        let s: Vec<f64> = un.iter().zip(&u).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = pgnew.iter().zip(&pg).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 * norm(&s) * norm(&y) {
            if mem.len() == MEMORY {
                mem.pop_front();
            }
            mem.push_back((s, y, 1.0 / sy));
        }
        u = un;
        f = fnew;
        pg = pgnew;
    };
    Descent {
        u,
        f,
        converged,
        iterations: it,
    }
}

/// Flip the positive cell nearest zero, the non-positive cell nearest zero,
/// or both.
fn flip_candidates(u: &[f64]) -> Vec<Vec<f64>> {
    let pick = |pos: bool| {
        (0..u.len())
            .filter(|&i| (u[i] > 0.0) == pos)
            .min_by(|&i, &j| u[i].abs().total_cmp(&u[j].abs()))
    };
    let (p, q) = (pick(true), pick(false));
    let flip = |idx: &[usize]| {
        let mut v = u.to_vec();
        for &i in idx {
            v[i] = -v[i];
        }
        v
    };
    let mut out = Vec::new();
    if let Some(p) = p {
        out.push(flip(&[p]));
    }
    if let Some(q) = q {
        out.push(flip(&[q]));
    }
    if let (Some(p), Some(q)) = (p, q) {
        out.push(flip(&[p, q]));
    }
    out
}

fn refine(obj: &Objective, mut best: Descent, c: f64, tol: &Tolerances) -> Descent {
    let mut total = best.iterations;
    for _ in 0..FLIP_ROUNDS {
        let mut improved: Option<Descent> = None;
        for cand in flip_candidates(&best.u) {
            let r = descend(obj, cand, c, tol);
            total += r.iterations;
            let bar = improved.as_ref().map_or(best.f - FLIP_GAIN, |b| b.f);
            if r.f < bar {
                improved = Some(r);
            }
        }
        match improved {
            Some(r) => best = r,
            None => break,
        }
    }
    best.iterations = total;
    best
}

/// `±1` pattern with `k` plus cells spread as evenly as possible.
fn interleaved(n: usize, k: usize) -> Vec<f64> {
    (0..n)
        .map(|i| if (i + 1) * k / n > i * k / n { 1.0 } else { -1.0 })
        .collect()
}

fn structured_starts(p: &MinimizeProblem, n: usize) -> Vec<(String, Vec<f64>)> {
    let c = p.volume_c;
    let k = ((n as f64) * (1.0 + c.clamp(-1.0, 1.0)) / 2.0).round() as usize;
    let interface: Vec<f64> = (0..n).map(|i| if i < k { 1.0 } else { -1.0 }).collect();
    let mut flipped = interface.clone();
    flipped.reverse();
    let mut out = vec![
        ("interleaved".to_string(), interleaved(n, k)),
        ("interface".to_string(), interface),
        ("interface_reversed".to_string(), flipped),
    ];
    if let Some(u) = closed_form_start(p, n) {
        out.push(("closed_form".to_string(), u));
    }
    out
}

/// Closed-form candidate for the named kernels when its hypotheses hold.
fn closed_form_start(p: &MinimizeProblem, n: usize) -> Option<Vec<f64>> {
    let (eps, c) = (p.epsilon, p.volume_c);
    let r = match p.analytic()? {
        AnalyticGraphon::Constant { p: pe } => closed_form::el_solve_constant(pe, eps, c, n),
        AnalyticGraphon::Bipartite { a } => closed_form::closed_form_bipartite(a, eps, n, c),
        AnalyticGraphon::Community { a } => closed_form::closed_form_community(a, eps, n, c),
        _ => return None,
    };
    r.ok().and_then(|r| r.values().map(<[f64]>::to_vec))
}

/// Multi-start minimization of graph GL over step functions with
/// `mean(u) = c`. Non-convergence is reported through `converged = false`
/// together with the best iterate found.
pub fn minimize_graph_gl(p: &MinimizeProblem) -> Result<MinimizerResult> {
    p.validate()?;
    let StateSpace::StepFunction { n } = p.state_space else {
        return Err(validation("minimize_graph_gl needs a step_function state space"));
    };
    let w = p.kernel.at_resolution(n)?;
    let obj = Objective::new(&w, p.epsilon);
    let mut starts: Vec<(String, Vec<f64>)> = (0..p.restarts)
        .map(|k| {
            let mut r = rng::stream(p.seed, k as u64);
            ("random".to_string(), (0..n).map(|_| r.gen_range(-1.0..=1.0)).collect())
        })
        .collect();
    starts.extend(structured_starts(p, n));

    let mut runs: Vec<(String, Descent)> = starts
        .into_par_iter()
        .map(|(label, u0)| {
            let d = descend(&obj, u0, p.volume_c, &p.tolerances);
            (label, d)
        })
        .collect();
    let mut order: Vec<usize> = (0..runs.len()).collect();
    order.sort_by(|&i, &j| runs[i].1.f.total_cmp(&runs[j].1.f).then(i.cmp(&j)));
    order.truncate(REFINE_TOP);
    let refined: Vec<(usize, Descent)> = order
        .into_par_iter()
        .map(|k| {
            let d = &runs[k].1;
            let start = Descent {
                u: d.u.clone(),
                f: d.f,
                converged: d.converged,
                iterations: d.iterations,
            };
            (k, refine(&obj, start, p.volume_c, &p.tolerances))
        })
        .collect();
    for (k, d) in refined {
        runs[k].1 = d;
    }

    let mut records = Vec::with_capacity(runs.len());
    let mut best: Option<usize> = None;
    let mut energies = Vec::with_capacity(runs.len());
    for (k, (label, d)) in runs.iter().enumerate() {
        let e = graph_gl(&w, &StepFunction::new(d.u.clone())?, p.epsilon)?.total;
        energies.push(e);
        records.push(RestartRecord {
            restart: k,
            start: label.clone(),
            energy: e,
            constraint_residual: mean(&d.u) - p.volume_c,
            converged: d.converged,
            iterations: d.iterations,
        });
        if best.is_none_or(|b| better((e, &d.u), (energies[b], &runs[b].1.u))) {
            best = Some(k);
        }
    }
    let b = best.expect("at least one start");
    let d = &runs[b].1;
    let u = StepFunction::new(d.u.clone())?;
    let energy = graph_gl(&w, &u, p.epsilon)?;
    let multiplier = mean(&graph_gl_gradient(&w, u.values(), p.epsilon));
    Ok(MinimizerResult {
        constraint_residual: u.volume() - p.volume_c,
        state: State::Step(u),
        energy,
        multiplier,
        converged: d.converged,
        iterations: d.iterations,
        reduced_energy: None,
        restarts: records,
    })
}
