//! Numerical diagnostics for the discrete-to-continuum and sharp-interface
//! limits of the GL functional.
//!
//! * [`run_n_sweep`]: graph minimizers on `W_n` against a graphon reference.
//! * [`run_eps_sweep`]: minimizers as `ε ↓ 0` against their thresholded states.
//! * [`recovery_sequence_check`] and [`liminf_probe`]: the two inequalities
//!   that define Γ-convergence, tested on constructed and sampled sequences.
//!
//! None of this certifies a limit. It reports numbers that a limit predicts.

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{validation, Error, Result};
use crate::functionals::{graph_gl, graphon_gl, graphon_tv, EnergyReport};
use crate::graphon::{sample_step_graphon, AnalyticGraphon, Graphon, StepGraphon};
use crate::measures::{delta_from_function, narrow_distance, CellLaw, StepFunction, YoungMeasure};
use crate::minimize::{
    closed_form_bipartite, minimize_graph_gl, minimize_graphon_gl_two_atom, MinimizeProblem,
    MinimizerResult, State, StateSpace, Tolerances,
};
use crate::rng;

/// Per-step slack allowed when checking that a diagnostic is non-increasing.
pub const MONOTONE_SLACK: f64 = 1e-9;

/// Liminf proxies below this value are flagged.
pub const LIMINF_THRESHOLD: f64 = -1e-6;

/// Cells whose `|u|` is further than this from their group median are exceptional.
pub const EXCEPTIONAL_TOL: f64 = 1e-4;

/// Largest power-kernel cap accepted by graphon-level ε sweeps.
pub const GRAPHON_EPS_CAP_LIMIT: f64 = 1e3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    N,
    Epsilon,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepFunctional {
    Gl,
    Tv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepLevel {
    Graph,
    Graphon,
}

/// Knobs shared by the sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepOptions {
    pub restarts: usize,
    pub seed: u64,
    pub tolerances: Tolerances,
    /// Cells of the two-atom reference when no closed form applies.
    pub reference_cells: usize,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            restarts: 8,
            seed: 0,
            tolerances: Tolerances::default(),
            reference_cells: 32,
        }
    }
}

/// Value statistics of one minimizer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointDiagnostics {
    /// Smallest and largest `|value|` (atoms with positive weight for measures).
    pub min_abs: f64,
    pub max_abs: f64,
    /// `max | |value| − 1 |`.
    pub sign_distance: f64,
    /// Largest distance from a value to the support of the reference law of its cell.
    pub max_deviation: f64,
    /// The same, over non-exceptional cells only.
    pub deviation: f64,
    /// Most exceptional cells in any reference cell.
    pub exceptional: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub parameter: f64,
    pub n: usize,
    pub epsilon: f64,
    pub result: MinimizerResult,
    /// Energy of `result.state` under the swept functional.
    pub energy: f64,
    pub reference_energy: f64,
    /// `|energy − reference_energy|`.
    pub gap: f64,
    pub narrow_distance: f64,
    /// Per-point reference (ε sweeps); n sweeps share [`SweepReference::state`].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_state: Option<State>,
    pub diagnostics: PointDiagnostics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReference {
    pub description: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state: Option<YoungMeasure>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub axis: SweepAxis,
    pub functional: SweepFunctional,
    pub level: SweepLevel,
    pub kernel: Graphon,
    pub volume_c: f64,
    pub reference: SweepReference,
    pub points: Vec<SweepPoint>,
    /// `max_n deviation · √n` over an n sweep.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fitted_c: Option<f64>,
}

/// `xs[k+1] ≤ xs[k] + slack` for every `k`.
pub fn non_increasing(xs: &[f64], slack: f64) -> bool {
    xs.windows(2).all(|w| w[1] <= w[0] + slack)
}

impl SweepResult {
    pub fn gaps(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.gap).collect()
    }

    pub fn narrow_distances(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.narrow_distance).collect()
    }

    /// Re-evaluates `(energy, reference_energy)` for every point from the
    /// stored states.
    pub fn recompute(&self) -> Result<Vec<(f64, f64)>> {
        self.points
            .iter()
            .map(|p| {
                let reference = match (&p.reference_state, &self.reference.state) {
                    (Some(s), _) => s.clone(),
                    (None, Some(nu)) => State::Young(nu.clone()),
                    (None, None) => return Err(validation("sweep point has no reference state")),
                };
                let e = self.energy_of(&p.result.state, p.n, p.epsilon, self.functional)?;
                let r = self.energy_of(&reference, p.n, p.epsilon, self.reference_functional())?;
                Ok((e, r))
            })
            .collect()
    }

    fn reference_functional(&self) -> SweepFunctional {
        match self.axis {
            SweepAxis::N => self.functional,
            SweepAxis::Epsilon => SweepFunctional::Tv,
        }
    }

    fn energy_of(&self, s: &State, n: usize, eps: f64, f: SweepFunctional) -> Result<f64> {
        match s {
            State::Step(u) => {
                let w = self.kernel.at_resolution(n)?;
                step_energy(&w, u, eps, f)
            }
            State::Young(nu) => young_energy(&self.kernel, nu, eps, f),
        }
    }
}

fn step_energy(w: &StepGraphon, u: &StepFunction, eps: f64, f: SweepFunctional) -> Result<f64> {
    let r = match f {
        SweepFunctional::Gl => graph_gl(w, u, eps)?,
        // TV of a graph state in the graphon normalization
        SweepFunctional::Tv => graphon_tv(&Graphon::Step(w.clone()), &delta_from_function(u))?,
    };
    Ok(r.value())
}

fn young_energy(w: &Graphon, nu: &YoungMeasure, eps: f64, f: SweepFunctional) -> Result<f64> {
    let r: EnergyReport = match f {
        SweepFunctional::Gl => graphon_gl(w, nu, eps)?,
        SweepFunctional::Tv => graphon_tv(w, nu)?,
    };
    Ok(r.value())
}

/// `+1` where `u ≥ 0`, `−1` elsewhere.
pub fn threshold(u: &StepFunction) -> StepFunction {
    StepFunction::new(u.values().iter().map(|&v| if v >= 0.0 { 1.0 } else { -1.0 }).collect())
        .expect("finite values")
}

/// [`threshold`], then flips the smallest-`|u|` cells of the surplus sign
/// until the volume is as close to `c` as a binary state allows.
pub fn threshold_with_volume(u: &StepFunction, c: f64) -> StepFunction {
    let n = u.n();
    let mut v = threshold(u).into_values();
    let target = ((n as f64 * (1.0 + c) / 2.0).round().max(0.0) as usize).min(n);
    let plus = v.iter().filter(|&&x| x > 0.0).count();
    let (from, count) = if plus > target {
        (1.0, plus - target)
    } else {
        (-1.0, target - plus)
    };
    let mut idx: Vec<usize> = (0..n).filter(|&i| v[i] == from).collect();
    idx.sort_by(|&i, &j| u.values()[i].abs().total_cmp(&u.values()[j].abs()).then(i.cmp(&j)));
    for &i in idx.iter().take(count) {
        v[i] = -from;
    }
    StepFunction::new(v).expect("binary values")
}

/// Maximal runs of consecutive cells with bitwise identical rows. Any
/// permutation inside a run is an automorphism of the weighted graph.
fn twin_runs(w: &StepGraphon) -> Vec<std::ops::Range<usize>> {
    let n = w.n();
    let mut runs = Vec::new();
    let mut start = 0;
    for i in 1..=n {
        if i == n || w.row(i) != w.row(start) {
            runs.push(start..i);
            start = i;
        }
    }
    runs
}

/// Sequence of atom indices of length `sum(counts)` that spreads each atom
/// evenly, choosing at step `t` the atom furthest behind its quota.
fn spread(counts: &[usize]) -> Vec<usize> {
    let q: usize = counts.iter().sum();
    let mut placed = vec![0usize; counts.len()];
    let mut out = Vec::with_capacity(q);
    for t in 0..q {
        let mut best = None;
        let mut lag = f64::NEG_INFINITY;
        for (j, &k) in counts.iter().enumerate() {
            if placed[j] == k {
                continue;
            }
            let l = (t + 1) as f64 * k as f64 / q as f64 - placed[j] as f64;
            if l > lag {
                lag = l;
                best = Some(j);
            }
        }
        let j = best.expect("quota left");
        placed[j] += 1;
        out.push(j);
    }
    out
}

/// Rearranges `u` inside each run of twin cells so that values of each sign
/// are spread evenly. The energy on `w` is unchanged up to summation order.
pub fn canonical_arrangement(w: &StepGraphon, u: &StepFunction) -> Result<StepFunction> {
    if w.n() != u.n() {
        return Err(Error::SizeMismatch {
            what: "state length vs kernel resolution",
            expected: w.n(),
            got: u.n(),
        });
    }
    let mut out = u.values().to_vec();
    for run in twin_runs(w) {
        let vals = &u.values()[run.clone()];
        let mut pos: Vec<f64> = vals.iter().copied().filter(|&x| x >= 0.0).collect();
        let mut neg: Vec<f64> = vals.iter().copied().filter(|&x| x < 0.0).collect();
        pos.sort_by(|a, b| b.total_cmp(a));
        neg.sort_by(|a, b| a.total_cmp(b));
        let (mut ip, mut ineg) = (0, 0);
        for (slot, j) in run.zip(spread(&[pos.len(), neg.len()])) {
            out[slot] = if j == 0 {
                ip += 1;
                pos[ip - 1]
            } else {
                ineg += 1;
                neg[ineg - 1]
            };
        }
    }
    StepFunction::new(out)
}

/// Energy-equivalent copies of `u`: the [`canonical_arrangement`] of `u`, of
/// its mirror image when `w` is invariant under `i ↦ n − 1 − i`, and of `−u`
/// when `c = 0`.
pub fn representatives(w: &StepGraphon, u: &StepFunction, c: f64) -> Result<Vec<StepFunction>> {
    let n = w.n();
    let mirror = (0..n).all(|i| (0..n).all(|j| w.get(n - 1 - i, n - 1 - j) == w.get(i, j)));
    let mut base = vec![u.clone()];
    if mirror {
        base.push(StepFunction::new(u.values().iter().rev().copied().collect())?);
    }
    if c == 0.0 {
        let neg: Vec<StepFunction> = base.iter().map(StepFunction::negated).collect();
        base.extend(neg);
    }
    base.iter().map(|v| canonical_arrangement(w, v)).collect()
}

/// Smallest `m ≤ 4096` with `split · m` an integer.
fn aligned_cells(split: f64) -> Option<usize> {
    (1..=4096usize).find(|&m| {
        let x = split * m as f64;
        (x - x.round()).abs() <= 1e-9 * m as f64
    })
}

/// Two-block description `(split, [[K_SS, K_ST], [K_ST, K_TT]])`; the
/// constant kernel is one block with `split = 1`.
fn two_block(w: &AnalyticGraphon) -> Option<(f64, [[f64; 2]; 2])> {
    match *w {
        AnalyticGraphon::Constant { p } => Some((1.0, [[p, p], [p, p]])),
        AnalyticGraphon::Sbm2x2 {
            a11,
            a12,
            a22,
            split,
        } => Some((split, [[a11, a12], [a12, a22]])),
        AnalyticGraphon::Bipartite { a } => Some((a, [[0.0, 1.0], [1.0, 0.0]])),
        AnalyticGraphon::Community { a } => Some((a, [[1.0, 0.0], [0.0, 1.0]])),
        AnalyticGraphon::PowerKernel { .. } => None,
    }
}

/// Blockwise laws on the smallest grid aligned with `split`.
fn block_measure(split: f64, s: CellLaw, t: CellLaw) -> Result<YoungMeasure> {
    if split >= 1.0 {
        return YoungMeasure::new(vec![s], None);
    }
    let m = aligned_cells(split).ok_or_else(|| validation(format!("split {split} has no small aligned grid")))?;
    let ms = (split * m as f64).round() as usize;
    let laws = (0..m).map(|i| if i < ms { s.clone() } else { t.clone() }).collect();
    YoungMeasure::new(laws, None)
}

fn symmetric(mag: f64, theta: f64) -> CellLaw {
    if theta >= 1.0 {
        CellLaw::Delta { value: mag }
    } else if theta <= 0.0 {
        CellLaw::Delta { value: -mag }
    } else {
        CellLaw::TwoAtom {
            a: mag,
            b: -mag,
            theta,
        }
    }
}

/// Graphon GL reference: closed forms for the constant, bipartite and
/// community families, two-atom minimization otherwise.
fn gl_reference(w: &AnalyticGraphon, eps: f64, c: f64, opts: &SweepOptions) -> Result<(String, YoungMeasure)> {
    match *w {
        AnalyticGraphon::Constant { p } if eps * p < 1.0 => {
            let s = (1.0 - eps * p).sqrt();
            if c.abs() >= s {
                return Ok((
                    "constant state (oversaturated volume)".into(),
                    YoungMeasure::new(vec![CellLaw::Delta { value: c }], None)?,
                ));
            }
            let theta = 0.5 * (1.0 + c / s);
            Ok((
                "two-atom family with atoms +-sqrt(1 - eps p)".into(),
                YoungMeasure::new(vec![symmetric(s, theta)], None)?,
            ))
        }
        AnalyticGraphon::Bipartite { a } if c == 0.0 && eps < 1.0 && aligned_cells(a).is_some() => {
            // check the hypotheses once through the closed form itself
            closed_form_bipartite(a, eps, aligned_cells(a).unwrap(), c)?;
            let (cs, ct) = ((1.0 - eps * (1.0 - a)).sqrt(), (1.0 - eps * a).sqrt());
            Ok((
                "balanced two-atom laws +-sqrt(1 - eps(1 - a)) on S, +-sqrt(1 - eps a) on S^c".into(),
                block_measure(a, symmetric(cs, 0.5), symmetric(ct, 0.5))?,
            ))
        }
        AnalyticGraphon::Community { a } if (c - (2.0 * a - 1.0)).abs() < 1e-15 && aligned_cells(a).is_some() => Ok((
            "blockwise constant +1 on S, -1 on S^c".into(),
            block_measure(a, CellLaw::Delta { value: 1.0 }, CellLaw::Delta { value: -1.0 })?,
        )),
        _ => {
            let m = opts.reference_cells.max(1);
            let problem = MinimizeProblem {
                kernel: Graphon::Analytic(*w),
                epsilon: eps,
                volume_c: c,
                state_space: StateSpace::TwoAtom { m },
                restarts: opts.restarts.max(1),
                seed: opts.seed,
                tolerances: opts.tolerances,
            };
            let r = minimize_graphon_gl_two_atom(&problem)?;
            let nu = r.state.as_young().cloned().expect("two-atom result is a Young measure");
            Ok((format!("two-atom minimizer on {m} cells"), nu))
        }
    }
}

/// Graphon TV reference over binary measures. For two-block kernels the
/// energy depends on `θ` only through the block masses `Θ_S, Θ_T` of
/// `{λ = +1}`, so the minimum is a one-dimensional quadratic problem.
fn tv_reference(w: &AnalyticGraphon, c: f64) -> Result<(String, YoungMeasure)> {
    let (split, k) = two_block(w).ok_or_else(|| {
        Error::Precondition(format!("TV reference needs a block kernel (got {})", w.name()))
    })?;
    if c.abs() > 1.0 {
        return Err(validation(format!("binary states need |c| <= 1 (got {c})")));
    }
    let total = 0.5 * (1.0 + c);
    if split >= 1.0 {
        return Ok((
            "binary two-atom law with volume c".into(),
            YoungMeasure::new(vec![symmetric(1.0, total)], None)?,
        ));
    }
    let (ls, lt) = (split, 1.0 - split);
    // 4 ∬ W (θx + θy − 2 θx θy) with θ block-constant
    let energy = |ts: f64| {
        let tt = total - ts;
        let (ds, dt) = (k[0][0] * ls + k[0][1] * lt, k[1][0] * ls + k[1][1] * lt);
        let lin = 2.0 * (ds * ts + dt * tt);
        let quad = k[0][0] * ts * ts + 2.0 * k[0][1] * ts * tt + k[1][1] * tt * tt;
        4.0 * (lin - 2.0 * quad)
    };
    let lo = (total - lt).max(0.0);
    let hi = total.min(ls);
    let mut cands = vec![lo, hi];
    let a2 = -2.0 * (k[0][0] - 2.0 * k[0][1] + k[1][1]);
    if a2 != 0.0 {
        let (ds, dt) = (k[0][0] * ls + k[0][1] * lt, k[1][0] * ls + k[1][1] * lt);
        let b = 2.0 * (ds - dt) - 2.0 * (2.0 * k[0][1] * total - 2.0 * k[1][1] * total);
        let x = -b / (2.0 * a2);
        if x > lo && x < hi {
            cands.push(x);
        }
    }
    let ts = cands
        .into_iter()
        .min_by(|a, b| energy(*a).total_cmp(&energy(*b)))
        .expect("nonempty");
    let tt = total - ts;
    Ok((
        "binary block measure minimizing graphon TV".into(),
        block_measure(split, symmetric(1.0, ts / ls), symmetric(1.0, tt / lt))?,
    ))
}

fn support_distance(x: f64, law: &[(f64, f64)]) -> f64 {
    law.iter()
        .filter(|(_, w)| *w > 0.0)
        .map(|(a, _)| (x - a).abs())
        .fold(f64::INFINITY, f64::min)
}

fn abs_stats(values: impl Iterator<Item = f64>) -> (f64, f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    let mut sd = 0.0f64;
    for v in values {
        let a = v.abs();
        lo = lo.min(a);
        hi = hi.max(a);
        sd = sd.max((a - 1.0).abs());
    }
    (lo, hi, sd)
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let k = xs.len();
    if k % 2 == 1 {
        xs[k / 2]
    } else {
        0.5 * (xs[k / 2 - 1] + xs[k / 2])
    }
}

/// Diagnostics of a step state against a reference measure on any grid.
fn step_diagnostics(u: &StepFunction, nu: Option<&YoungMeasure>) -> PointDiagnostics {
    let (min_abs, max_abs, sign_distance) = abs_stats(u.values().iter().copied());
    let mut d = PointDiagnostics {
        min_abs,
        max_abs,
        sign_distance,
        max_deviation: 0.0,
        deviation: 0.0,
        exceptional: 0,
    };
    let Some(nu) = nu else { return d };
    let (n, m) = (u.n(), nu.cells());
    let cell = |i: usize| (((i as f64 + 0.5) * m as f64 / n as f64) as usize).min(m - 1);
    let supports: Vec<Vec<(f64, f64)>> = (0..m).map(|x| nu.support(x)).collect();
    for x in 0..m {
        let members: Vec<usize> = (0..n).filter(|&i| cell(i) == x).collect();
        if members.is_empty() {
            continue;
        }
        let med = median(members.iter().map(|&i| u.values()[i].abs()).collect());
        let mut exc = 0;
        for &i in &members {
            let v = u.values()[i];
            let dev = support_distance(v, &supports[x]);
            d.max_deviation = d.max_deviation.max(dev);
            if (v.abs() - med).abs() > EXCEPTIONAL_TOL {
                exc += 1;
            } else {
                d.deviation = d.deviation.max(dev);
            }
        }
        d.exceptional = d.exceptional.max(exc);
    }
    d
}

fn young_diagnostics(nu: &YoungMeasure) -> PointDiagnostics {
    let atoms = (0..nu.cells()).flat_map(|x| nu.support(x)).filter(|(_, w)| *w > 0.0).map(|(a, _)| a);
    let (min_abs, max_abs, sign_distance) = abs_stats(atoms);
    PointDiagnostics {
        min_abs,
        max_abs,
        sign_distance,
        max_deviation: 0.0,
        deviation: 0.0,
        exceptional: 0,
    }
}

fn check_strict(xs: &[f64], increasing: bool, what: &str) -> Result<()> {
    if xs.is_empty() {
        return Err(validation(format!("{what} list is empty")));
    }
    let ok = xs.windows(2).all(|w| if increasing { w[0] < w[1] } else { w[0] > w[1] });
    if ok {
        Ok(())
    } else {
        Err(validation(format!(
            "{what} must be strictly {}",
            if increasing { "increasing" } else { "decreasing" }
        )))
    }
}

fn step_problem(w: &Graphon, n: usize, eps: f64, c: f64, opts: &SweepOptions) -> MinimizeProblem {
    MinimizeProblem {
        kernel: w.clone(),
        epsilon: eps,
        volume_c: c,
        state_space: StateSpace::StepFunction { n },
        restarts: opts.restarts.max(1),
        seed: opts.seed,
        tolerances: opts.tolerances,
    }
}

/// Graph minimizers on `W_n` for increasing `n`, compared with the graphon
/// minimizer. TV points minimize GL at `epsilon`, threshold and repair the
/// volume (see [`threshold_with_volume`]).
pub fn run_n_sweep(
    w: &AnalyticGraphon,
    epsilon: f64,
    c: f64,
    ns: &[usize],
    functional: SweepFunctional,
    opts: &SweepOptions,
) -> Result<SweepResult> {
    w.validate()?;
    check_strict(&ns.iter().map(|&n| n as f64).collect::<Vec<_>>(), true, "ns")?;
    if ns[0] == 0 {
        return Err(validation("ns must be positive"));
    }
    let (description, nu) = match functional {
        SweepFunctional::Gl => gl_reference(w, epsilon, c, opts)?,
        SweepFunctional::Tv => tv_reference(w, c)?,
    };
    let kernel = Graphon::Analytic(*w);
    let reference_energy = young_energy(&kernel, &nu, epsilon, functional)?;

    let points = ns
        .par_iter()
        .map(|&n| -> Result<SweepPoint> {
            let wn = sample_step_graphon(w, n)?;
            let mut r = minimize_graph_gl(&step_problem(&kernel, n, epsilon, c, opts))?;
            if functional == SweepFunctional::Tv {
                let b = threshold_with_volume(r.state.as_step().expect("step state"), c);
                r.energy = graphon_tv(&Graphon::Step(wn.clone()), &delta_from_function(&b))?;
                r.constraint_residual = b.volume() - c;
                r.state = State::Step(b);
            }
            let u = r.state.as_step().expect("step state").clone();
            let energy = step_energy(&wn, &u, epsilon, functional)?;
            let (arranged, narrow) = representatives(&wn, &u, c)?
                .into_iter()
                .map(|v| {
                    let d = narrow_distance(&delta_from_function(&v), &nu);
                    (v, d)
                })
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .expect("at least the state itself");
            Ok(SweepPoint {
                parameter: n as f64,
                n,
                epsilon,
                energy,
                reference_energy,
                gap: (energy - reference_energy).abs(),
                narrow_distance: narrow,
                reference_state: None,
                diagnostics: step_diagnostics(&arranged, Some(&nu)),
                result: r,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let fitted_c = points
        .iter()
        .map(|p| p.diagnostics.deviation * (p.n as f64).sqrt())
        .fold(0.0, f64::max);
    Ok(SweepResult {
        axis: SweepAxis::N,
        functional,
        level: SweepLevel::Graph,
        kernel,
        volume_c: c,
        reference: SweepReference {
            description,
            state: Some(nu),
        },
        points,
        fitted_c: Some(fitted_c),
    })
}

fn threshold_measure(nu: &YoungMeasure) -> Result<YoungMeasure> {
    let sign = |v: f64| if v >= 0.0 { 1.0 } else { -1.0 };
    let laws = nu
        .laws()
        .iter()
        .map(|law| match *law {
            CellLaw::Delta { value } => Ok(CellLaw::Delta { value: sign(value) }),
            CellLaw::TwoAtom { a, b, theta } => Ok(if sign(a) == sign(b) {
                CellLaw::Delta { value: sign(a) }
            } else {
                CellLaw::TwoAtom {
                    a: sign(a),
                    b: sign(b),
                    theta,
                }
            }),
            CellLaw::Grid { .. } => Err(validation("thresholding grid laws is not supported")),
        })
        .collect::<Result<Vec<_>>>()?;
    YoungMeasure::new(laws, None)
}

/// Minimizers for decreasing `ε`, each compared with its thresholded state:
/// `gap = |GL_ε(state) − TV(threshold(state))|`. At graph level `cells` is
/// the graph size; at graphon level it is the number of two-atom cells.
pub fn run_eps_sweep(
    w: &Graphon,
    cells: usize,
    c: f64,
    epsilons: &[f64],
    level: SweepLevel,
    opts: &SweepOptions,
) -> Result<SweepResult> {
    check_strict(epsilons, false, "epsilons")?;
    if epsilons.iter().any(|&e| !(e > 0.0 && e < 1.0)) {
        return Err(validation("epsilons must lie in (0, 1)"));
    }
    if cells == 0 {
        return Err(validation("cell count must be positive"));
    }
    if let Graphon::Analytic(a) = w {
        a.validate()?;
        if level == SweepLevel::Graphon && !a.is_bounded_by(GRAPHON_EPS_CAP_LIMIT) {
            return Err(validation(format!(
                "graphon-level epsilon sweeps need a bounded kernel; {} has cap above {GRAPHON_EPS_CAP_LIMIT}, \
                 where the epsilon scaling of the singular kernel is undefined",
                a.name()
            )));
        }
    }
    if let Graphon::Step(s) = w {
        if level == SweepLevel::Graph && s.n() != cells {
            return Err(Error::SizeMismatch {
                what: "kernel resolution",
                expected: cells,
                got: s.n(),
            });
        }
    }

    let points = epsilons
        .par_iter()
        .map(|&eps| -> Result<SweepPoint> {
            match level {
                SweepLevel::Graph => {
                    let wn = w.at_resolution(cells)?;
                    let r = minimize_graph_gl(&step_problem(w, cells, eps, c, opts))?;
                    let u = r.state.as_step().expect("step state");
                    let b = threshold(u);
                    let energy = r.energy.total;
                    let reference_energy = step_energy(&wn, &b, eps, SweepFunctional::Tv)?;
                    Ok(SweepPoint {
                        parameter: eps,
                        n: cells,
                        epsilon: eps,
                        energy,
                        reference_energy,
                        gap: (energy - reference_energy).abs(),
                        narrow_distance: narrow_distance(&delta_from_function(u), &delta_from_function(&b)),
                        diagnostics: step_diagnostics(u, None),
                        reference_state: Some(State::Step(b)),
                        result: r,
                    })
                }
                SweepLevel::Graphon => {
                    let problem = MinimizeProblem {
                        kernel: w.clone(),
                        epsilon: eps,
                        volume_c: c,
                        state_space: StateSpace::TwoAtom { m: cells },
                        restarts: opts.restarts.max(1),
                        seed: opts.seed,
                        tolerances: opts.tolerances,
                    };
                    let r = minimize_graphon_gl_two_atom(&problem)?;
                    let nu = r.state.as_young().expect("Young state");
                    let b = threshold_measure(nu)?;
                    let energy = r.energy.total;
                    let reference_energy = young_energy(w, &b, eps, SweepFunctional::Tv)?;
                    Ok(SweepPoint {
                        parameter: eps,
                        n: cells,
                        epsilon: eps,
                        energy,
                        reference_energy,
                        gap: (energy - reference_energy).abs(),
                        narrow_distance: narrow_distance(nu, &b),
                        diagnostics: young_diagnostics(nu),
                        reference_state: Some(State::Young(b)),
                        result: r,
                    })
                }
            }
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(SweepResult {
        axis: SweepAxis::Epsilon,
        functional: SweepFunctional::Gl,
        level,
        kernel: w.clone(),
        volume_c: c,
        reference: SweepReference {
            description: "thresholded minimizer (TV energy)".into(),
            state: None,
        },
        points,
        fitted_c: None,
    })
}

/// Atom counts per measure cell for `q` graph cells, by largest remainder
/// (ties to the lower atom index).
fn largest_remainder(weights: &[f64], q: usize) -> Vec<usize> {
    let raw: Vec<f64> = weights.iter().map(|w| w * q as f64).collect();
    let mut counts: Vec<usize> = raw.iter().map(|x| x.floor() as usize).collect();
    let assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&i, &j| (raw[j] - raw[j].floor()).total_cmp(&(raw[i] - raw[i].floor())).then(i.cmp(&j)));
    for &j in order.iter().take(q.saturating_sub(assigned)) {
        counts[j] += 1;
    }
    counts
}

/// Systematic randomized rounding: each count is the floor or ceiling of
/// `q·w_j` and the counts sum to `q`.
fn randomized_rounding(weights: &[f64], q: usize, rng: &mut impl Rng) -> Vec<usize> {
    let offset: f64 = rng.gen();
    let mut counts = vec![0usize; weights.len()];
    let mut cum = 0.0;
    let mut k = 0;
    for (j, w) in weights.iter().enumerate() {
        cum += w;
        let edge = if j + 1 == weights.len() { f64::INFINITY } else { cum * q as f64 };
        while k < q && (k as f64 + offset) < edge {
            counts[j] += 1;
            k += 1;
        }
    }
    counts
}

fn check_multiple(nu: &YoungMeasure, n: usize) -> Result<usize> {
    let m = nu.cells();
    if n == 0 || !n.is_multiple_of(m) {
        return Err(validation(format!("n = {n} must be a positive multiple of the measure's {m} cells")));
    }
    Ok(n / m)
}

/// Deterministic oscillating state whose delta measure approximates `ν`:
/// each measure cell becomes `n/m` graph cells carrying the atoms in
/// largest-remainder proportions, evenly interleaved.
pub fn oscillating_sequence(nu: &YoungMeasure, n: usize) -> Result<StepFunction> {
    let q = check_multiple(nu, n)?;
    let mut values = Vec::with_capacity(n);
    for x in 0..nu.cells() {
        let s = nu.support(x);
        let w: Vec<f64> = s.iter().map(|p| p.1).collect();
        for j in spread(&largest_remainder(&w, q)) {
            values.push(s[j].0);
        }
    }
    StepFunction::new(values)
}

fn perturbed_sequence(nu: &YoungMeasure, n: usize, rng: &mut impl Rng) -> Result<StepFunction> {
    let q = check_multiple(nu, n)?;
    let mut values = Vec::with_capacity(n);
    for x in 0..nu.cells() {
        let s = nu.support(x);
        let w: Vec<f64> = s.iter().map(|p| p.1).collect();
        let mut block: Vec<f64> = randomized_rounding(&w, q, rng)
            .iter()
            .enumerate()
            .flat_map(|(j, &k)| std::iter::repeat_n(s[j].0, k))
            .collect();
        block.shuffle(rng);
        values.extend(block);
    }
    StepFunction::new(values)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryPoint {
    pub n: usize,
    pub state: StepFunction,
    pub narrow_distance: f64,
    pub energy: f64,
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryReport {
    pub epsilon: f64,
    pub graphon_energy: f64,
    pub points: Vec<RecoveryPoint>,
    pub narrow_non_increasing: bool,
    pub gap_non_increasing: bool,
}

/// Evaluates the [`oscillating_sequence`] for each `n` against `ν`.
pub fn recovery_sequence_check(
    w: &AnalyticGraphon,
    nu: &YoungMeasure,
    ns: &[usize],
    epsilon: f64,
) -> Result<RecoveryReport> {
    w.validate()?;
    check_strict(&ns.iter().map(|&n| n as f64).collect::<Vec<_>>(), true, "ns")?;
    let graphon_energy = graphon_gl(&Graphon::Analytic(*w), nu, epsilon)?.total;
    let points = ns
        .iter()
        .map(|&n| -> Result<RecoveryPoint> {
            let u = oscillating_sequence(nu, n)?;
            let energy = graph_gl(&sample_step_graphon(w, n)?, &u, epsilon)?.total;
            Ok(RecoveryPoint {
                n,
                narrow_distance: narrow_distance(&delta_from_function(&u), nu),
                energy,
                gap: (energy - graphon_energy).abs(),
                state: u,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let nd: Vec<f64> = points.iter().map(|p| p.narrow_distance).collect();
    let gaps: Vec<f64> = points.iter().map(|p| p.gap).collect();
    Ok(RecoveryReport {
        epsilon,
        graphon_energy,
        narrow_non_increasing: non_increasing(&nd, MONOTONE_SLACK),
        gap_non_increasing: non_increasing(&gaps, MONOTONE_SLACK),
        points,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiminfReport {
    pub epsilon: f64,
    pub trials: usize,
    pub largest_n: usize,
    pub graphon_energy: f64,
    /// `GL^{W_n}(u_n) − GL^W(ν)` at the largest `n`, per trial.
    pub proxies: Vec<f64>,
    pub min_proxy: f64,
    /// Largest narrow distance over trials, per `n`.
    pub max_narrow_distance: Vec<f64>,
    pub violations: usize,
    pub flagged: bool,
}

/// Random sequences approaching `ν` (randomized rounding of the atom
/// proportions, then a random permutation inside each measure cell).
pub fn liminf_probe(
    w: &AnalyticGraphon,
    nu: &YoungMeasure,
    trials: usize,
    ns: &[usize],
    epsilon: f64,
    seed: u64,
) -> Result<LiminfReport> {
    w.validate()?;
    check_strict(&ns.iter().map(|&n| n as f64).collect::<Vec<_>>(), true, "ns")?;
    if trials == 0 {
        return Err(validation("trials must be at least 1"));
    }
    let graphon_energy = graphon_gl(&Graphon::Analytic(*w), nu, epsilon)?.total;
    let kernels = ns.iter().map(|&n| sample_step_graphon(w, n)).collect::<Result<Vec<_>>>()?;
    let runs = (0..trials)
        .into_par_iter()
        .map(|t| -> Result<(f64, Vec<f64>)> {
            let mut g = rng::stream(seed, t as u64);
            let mut dists = Vec::with_capacity(ns.len());
            let mut last = 0.0;
            for (&n, wn) in ns.iter().zip(&kernels) {
                let u = perturbed_sequence(nu, n, &mut g)?;
                dists.push(narrow_distance(&delta_from_function(&u), nu));
                last = graph_gl(wn, &u, epsilon)?.total;
            }
            Ok((last - graphon_energy, dists))
        })
        .collect::<Result<Vec<_>>>()?;
    let proxies: Vec<f64> = runs.iter().map(|r| r.0).collect();
    let max_narrow_distance = (0..ns.len())
        .map(|k| runs.iter().map(|r| r.1[k]).fold(0.0, f64::max))
        .collect();
    let violations = proxies.iter().filter(|&&p| p < LIMINF_THRESHOLD).count();
    Ok(LiminfReport {
        epsilon,
        trials,
        largest_n: *ns.last().expect("nonempty"),
        graphon_energy,
        min_proxy: proxies.iter().copied().fold(f64::INFINITY, f64::min),
        proxies,
        max_narrow_distance,
        violations,
        flagged: violations > 0,
    })
}
