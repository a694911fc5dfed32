//! Graphon GL over cellwise two-atom Young measures `θ δ_a + (1 − θ) δ_b`.
//!
//! The objective is the moment form of the graphon GL energy. Each step is a
//! diagonally preconditioned gradient step projected onto the tangent space
//! of the volume constraint, clipped to the box `a, b ∈ [−1, 1]`,
//! `θ ∈ [0, 1]`, and followed by an exact volume restoration.

use rand::Rng;
use rayon::prelude::*;

use super::{MinimizeProblem, MinimizerResult, RestartRecord, State, StateSpace, Tolerances};
use crate::error::{validation, Result};
use crate::functionals::{graphon_gl_cells, CellKernel};
use crate::measures::{CellLaw, YoungMeasure};
use crate::rng;

const ARMIJO: f64 = 1e-4;
const MAX_HALVINGS: usize = 60;
const PRECOND_FLOOR: f64 = 1e-2;
const BOUND_EPS: f64 = 1e-15;
/// Weights within this distance of 0 or 1 are repaired to a single atom.
const DEGENERATE_THETA: f64 = 1e-12;
/// Relative stationarity accepted when the line search stalls at round-off.
const STALL_REL: f64 = 1e-7;

#[derive(Clone, Debug)]
struct Vars {
    a: Vec<f64>,
    b: Vec<f64>,
    t: Vec<f64>,
}

impl Vars {
    fn volume(&self) -> f64 {
        let m = self.a.len();
        (0..m)
            .map(|x| self.t[x] * self.a[x] + (1.0 - self.t[x]) * self.b[x])
            .sum::<f64>()
            / m as f64
    }

    /// Keeps `a ≥ b` by relabeling the atoms.
    fn order(&mut self) {
        for x in 0..self.a.len() {
            if self.a[x] < self.b[x] {
                std::mem::swap(&mut self.a[x], &mut self.b[x]);
                self.t[x] = 1.0 - self.t[x];
            }
        }
    }

    fn flat(&self) -> impl Iterator<Item = f64> + '_ {
        self.a.iter().chain(&self.b).chain(&self.t).copied()
    }
}

struct Objective<'a> {
    k: &'a CellKernel,
    eps: f64,
}

impl Objective<'_> {
    /// Energy and gradient with respect to `(a, b, θ)`.
    fn eval(&self, v: &Vars) -> (f64, Vars) {
        let m = v.a.len();
        let mf = m as f64;
        let (mut m1, mut m2, mut m4) = (vec![0.0; m], vec![0.0; m], vec![0.0; m]);
        for x in 0..m {
            let (a, b, t) = (v.a[x], v.b[x], v.t[x]);
            let (a2, b2) = (a * a, b * b);
            m1[x] = t * a + (1.0 - t) * b;
            m2[x] = t * a2 + (1.0 - t) * b2;
            m4[x] = t * a2 * a2 + (1.0 - t) * b2 * b2;
        }
        let deg = self.k.degrees();
        let inv_m2 = 1.0 / (mf * mf);
        let inv_em = 1.0 / (self.eps * mf);
        let mut f = 0.0;
        let mut g = Vars {
            a: vec![0.0; m],
            b: vec![0.0; m],
            t: vec![0.0; m],
        };
        for x in 0..m {
            let km1: f64 = self.k.row(x).iter().zip(&m1).map(|(k, y)| k * y).sum();
            f += 2.0 * inv_m2 * (deg[x] * m2[x] - m1[x] * km1) + inv_em * (m4[x] - 2.0 * m2[x] + 1.0);
            let g1 = -4.0 * inv_m2 * km1;
            let g2 = 2.0 * inv_m2 * deg[x] - 2.0 * inv_em;
            let g4 = inv_em;
            let (a, b, t) = (v.a[x], v.b[x], v.t[x]);
            g.a[x] = t * (g1 + 2.0 * a * g2 + 4.0 * a * a * a * g4);
            g.b[x] = (1.0 - t) * (g1 + 2.0 * b * g2 + 4.0 * b * b * b * g4);
            g.t[x] = (a - b) * g1 + (a * a - b * b) * g2 + (a.powi(4) - b.powi(4)) * g4;
        }
        (f, g)
    }
}

fn bisect(lo: f64, hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    let (mut lo, mut hi) = (lo, hi);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Restores `volume = c` by a uniform shift of `θ`, or of both atoms when
/// `c` lies outside the range reachable through the weights.
fn restore(v: &mut Vars, c: f64) {
    let m = v.a.len() as f64;
    let lo: f64 = v.b.iter().sum::<f64>() / m;
    let hi: f64 = v.a.iter().sum::<f64>() / m;
    if (lo..=hi).contains(&c) {
        let t0 = v.t.clone();
        let vol = |s: f64| {
            let mut acc = 0.0;
            for x in 0..v.a.len() {
                let t = (t0[x] + s).clamp(0.0, 1.0);
                acc += t * v.a[x] + (1.0 - t) * v.b[x];
            }
            acc / m - c
        };
        let s = bisect(-1.0, 1.0, vol);
        for (t, t0) in v.t.iter_mut().zip(&t0) {
            *t = (t0 + s).clamp(0.0, 1.0);
        }
    } else {
        let (a0, b0) = (v.a.clone(), v.b.clone());
        let t = v.t.clone();
        let vol = |s: f64| {
            let mut acc = 0.0;
            for x in 0..a0.len() {
                acc += t[x] * (a0[x] + s).clamp(-1.0, 1.0) + (1.0 - t[x]) * (b0[x] + s).clamp(-1.0, 1.0);
            }
            acc / m - c
        };
        let s = bisect(-2.0, 2.0, vol);
        for x in 0..a0.len() {
            v.a[x] = (a0[x] + s).clamp(-1.0, 1.0);
            v.b[x] = (b0[x] + s).clamp(-1.0, 1.0);
        }
    }
}

struct Run {
    v: Vars,
    f: f64,
    multiplier: f64,
    converged: bool,
    iterations: usize,
}

fn free(x: f64, g: f64, lo: f64, hi: f64) -> bool {
    !((x <= lo + BOUND_EPS && g > 0.0) || (x >= hi - BOUND_EPS && g < 0.0))
}

/// Projected search direction at `v` and the stationarity measure
/// `‖g − λh‖` over free variables, `h` being the volume gradient.
struct Direction {
    d: Vec<f64>,
    lambda: f64,
    stat: f64,
    /// `‖g‖` over free variables.
    gnorm: f64,
}

fn direction(v: &Vars, g: &Vars) -> Direction {
    let m = v.a.len();
    let mf = m as f64;
    // cellwise (a, b, θ) layout; fixed variables are zeroed
    let mut dg = Vec::with_capacity(3 * m);
    let mut dh = Vec::with_capacity(3 * m);
    let mut gv = Vec::with_capacity(3 * m);
    let mut hv = Vec::with_capacity(3 * m);
    for x in 0..m {
        let t = v.t[x];
        let entries = [
            (g.a[x], t / mf, 1.0 / t.max(PRECOND_FLOOR), free(v.a[x], g.a[x], -1.0, 1.0)),
            (g.b[x], (1.0 - t) / mf, 1.0 / (1.0 - t).max(PRECOND_FLOOR), free(v.b[x], g.b[x], -1.0, 1.0)),
            (g.t[x], (v.a[x] - v.b[x]) / mf, 1.0, free(t, g.t[x], 0.0, 1.0)),
        ];
        for (gi, hi, di, is_free) in entries {
            let on = if is_free { 1.0 } else { 0.0 };
            gv.push(gi * on);
            hv.push(hi * on);
            dg.push(di * gi * on);
            dh.push(di * hi * on);
        }
    }
    let hdh: f64 = hv.iter().zip(&dh).map(|(h, d)| h * d).sum();
    let lambda = if hdh > 0.0 {
        hv.iter().zip(&dg).map(|(h, d)| h * d).sum::<f64>() / hdh
    } else {
        0.0
    };
    let stat = gv
        .iter()
        .zip(&hv)
        .map(|(gi, hi)| (gi - lambda * hi).powi(2))
        .sum::<f64>()
        .sqrt();
    let gnorm = gv.iter().map(|x| x * x).sum::<f64>().sqrt();
    let d = dg.iter().zip(&dh).map(|(dgi, dhi)| -(dgi - lambda * dhi)).collect();
    Direction { d, lambda, stat, gnorm }
}

fn descend(obj: &Objective, mut v: Vars, c: f64, tol: &Tolerances) -> Run {
    let m = v.a.len();
    let mf = m as f64;
    v.order();
    restore(&mut v, c);
    let (mut f, mut g) = obj.eval(&v);
    let mut dir = direction(&v, &g);
    let mut alpha = obj.eps * mf / 8.0;
    let alpha_max = 1e3 * alpha;
    let mut it = 0;
    let converged = loop {
        if dir.stat <= tol.grad_tol && (v.volume() - c).abs() <= tol.constraint_tol {
            break true;
        }
        if it >= tol.max_iters {
            break false;
        }
        it += 1;
        alpha = (2.0 * alpha).min(alpha_max);
        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            let mut w = v.clone();
            for x in 0..m {
                w.a[x] = (v.a[x] + alpha * dir.d[3 * x]).clamp(-1.0, 1.0);
                w.b[x] = (v.b[x] + alpha * dir.d[3 * x + 1]).clamp(-1.0, 1.0);
                w.t[x] = (v.t[x] + alpha * dir.d[3 * x + 2]).clamp(0.0, 1.0);
            }
            w.order();
            restore(&mut w, c);
            let (fw, gw) = obj.eval(&w);
            let pred: f64 = v
                .flat()
                .zip(w.flat())
                .zip(g.flat())
                .map(|((x0, x1), gi)| (x1 - x0) * gi)
                .sum();
            // below the round-off level of f the change is estimated from
            // gradients by the trapezoid rule
            let noise = 4.0 * f64::EPSILON * f.abs().max(1.0);
            if -pred > noise && fw <= f + ARMIJO * pred {
                accepted = Some((w, fw, gw));
                break;
            }
            if -pred <= noise && pred < 0.0 && fw <= f + noise {
                let trap: f64 = v
                    .flat()
                    .zip(w.flat())
                    .zip(g.flat().zip(gw.flat()))
                    .map(|((x0, x1), (g0, g1))| 0.5 * (x1 - x0) * (g0 + g1))
                    .sum();
                if trap <= ARMIJO * pred {
                    accepted = Some((w, fw, gw));
                    break;
                }
            }
            alpha *= 0.5;
        }
        let Some((w, fw, gw)) = accepted else {
            // no verifiable step is left: accept stationarity at round-off scale
            break dir.stat <= tol.grad_tol.max(STALL_REL * dir.gnorm);
        };
        dir = direction(&w, &gw);
        v = w;
        f = fw;
        g = gw;
    };
    Run {
        v,
        f,
        multiplier: dir.lambda / mf,
        converged,
        iterations: it,
    }
}

fn to_measure(v: &Vars) -> Result<YoungMeasure> {
    let laws = (0..v.a.len())
        .map(|x| {
            let (a, b, t) = (v.a[x], v.b[x], v.t[x]);
            if t >= 1.0 - DEGENERATE_THETA || a == b {
                CellLaw::Delta { value: a }
            } else if t <= DEGENERATE_THETA {
                CellLaw::Delta { value: b }
            } else {
                CellLaw::TwoAtom { a, b, theta: t }
            }
        })
        .collect();
    YoungMeasure::new(laws, None)
}

/// Multi-start minimization of graphon GL over cellwise two-atom measures on
/// `m` cells with `volume = c`. Cells whose weight degenerates to 0 or 1 are
/// returned as deltas.
pub fn minimize_graphon_gl_two_atom(p: &MinimizeProblem) -> Result<MinimizerResult> {
    p.validate()?;
    let StateSpace::TwoAtom { m } = p.state_space else {
        return Err(validation("minimize_graphon_gl_two_atom needs a two_atom state space"));
    };
    let k = CellKernel::new(&p.kernel, m, 1)?;
    let obj = Objective {
        k: &k,
        eps: p.epsilon,
    };
    let c = p.volume_c;
    let mut starts: Vec<(String, Vars)> = vec![(
        "symmetric".to_string(),
        Vars {
            a: vec![1.0; m],
            b: vec![-1.0; m],
            t: vec![0.5 * (1.0 + c); m],
        },
    )];
    for r in 0..p.restarts {
        let mut g = rng::stream(p.seed, r as u64);
        let v = Vars {
            a: (0..m).map(|_| g.gen_range(0.0..=1.0)).collect(),
            b: (0..m).map(|_| g.gen_range(-1.0..=0.0)).collect(),
            t: (0..m).map(|_| g.gen_range(0.0..=1.0)).collect(),
        };
        starts.push(("random".to_string(), v));
    }
    let runs: Vec<(String, Run)> = starts
        .into_par_iter()
        .map(|(label, v)| {
            let r = descend(&obj, v, c, &p.tolerances);
            (label, r)
        })
        .collect();

    let mut records = Vec::with_capacity(runs.len());
    let mut best: Option<(usize, f64)> = None;
    for (i, (label, r)) in runs.iter().enumerate() {
        let nu = to_measure(&r.v)?;
        let e = graphon_gl_cells(&k, &nu, p.epsilon)?.total;
        records.push(RestartRecord {
            restart: i,
            start: label.clone(),
            energy: e,
            constraint_residual: nu.volume() - c,
            converged: r.converged,
            iterations: r.iterations,
        });
        if best.is_none_or(|(_, be)| e < be - super::ENERGY_TIE_TOL) {
            best = Some((i, e));
        }
    }
    let (b, _) = best.expect("at least one start");
    let r = &runs[b].1;
    let nu = to_measure(&r.v)?;
    let energy = graphon_gl_cells(&k, &nu, p.epsilon)?;
    debug_assert!((energy.total - r.f).abs() <= 1e-8 * (1.0 + r.f.abs()));
    Ok(MinimizerResult {
        constraint_residual: nu.volume() - c,
        state: State::Young(nu),
        energy,
        multiplier: r.multiplier,
        converged: r.converged,
        iterations: r.iterations,
        reduced_energy: None,
        restarts: records,
    })
}
