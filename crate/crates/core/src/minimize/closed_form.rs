//! Explicit minimizers for the constant, complete bipartite and complete
//! community kernels.
//!
//! On a kernel with degree fractions `d_i = deg_i / n`, a state whose
//! interaction term `Σ_j A_ij u_j` vanishes has GL energy
//! `(1/(εn)) Σ_i (u_i² − (1 − ε d_i))² + const`, which explains the
//! `√(1 − ε d)` magnitudes below.

use std::f64::consts::PI;

use super::{mean, MinimizerResult, State};
use crate::error::{validation, Error, Result};
use crate::functionals::{graph_gl, graph_gl_gradient};
use crate::graphon::{sample_step_graphon, AnalyticGraphon, StepGraphon};
use crate::measures::StepFunction;

/// Local-extremum height of `v³ − v`: three real roots iff `|τ| ≤ TAU_C`.
pub const TAU_C: f64 = 0.384_900_179_459_750_5; // 2 / (3√3)

const SCAN_POINTS: usize = 256;

fn finish(w: &StepGraphon, values: Vec<f64>, epsilon: f64, c: f64) -> Result<MinimizerResult> {
    let u = StepFunction::new(values)?;
    let energy = graph_gl(w, &u, epsilon)?;
    let multiplier = mean(&graph_gl_gradient(w, u.values(), epsilon));
    Ok(MinimizerResult {
        constraint_residual: u.volume() - c,
        state: State::Step(u),
        energy,
        multiplier,
        converged: true,
        iterations: 0,
        reduced_energy: None,
        restarts: Vec::new(),
    })
}

fn constant_scale(p: f64, epsilon: f64, n: usize) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(validation(format!("edge weight p = {p} must lie in [0, 1]")));
    }
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(validation(format!("epsilon = {epsilon} must be positive")));
    }
    if n == 0 {
        return Err(validation("n must be >= 1"));
    }
    if epsilon * p >= 1.0 {
        return Err(Error::Precondition(format!(
            "closed forms need epsilon * p < 1 (got {})",
            epsilon * p
        )));
    }
    Ok((1.0 - epsilon * p).sqrt())
}

/// Real roots of `v³ − v = τ` in decreasing order (three when `|τ| ≤ TAU_C`).
pub fn cubic_roots(tau: f64) -> Vec<f64> {
    if tau.abs() <= TAU_C {
        let x = (tau / TAU_C).clamp(-1.0, 1.0);
        let phi = x.acos() / 3.0;
        let r = 2.0 / 3f64.sqrt();
        (0..3)
            .map(|k| r * (phi - 2.0 * PI * k as f64 / 3.0).cos())
            .collect()
    } else {
        // Cardano for the single real root
        let q = -tau;
        let disc = (q * q / 4.0 - 1.0 / 27.0).sqrt();
        vec![(-q / 2.0 + disc).cbrt() + (-q / 2.0 - disc).cbrt()]
    }
}

/// `Σ (v_i² − 1)²`.
fn reduced(v: &[f64]) -> f64 {
    v.iter().map(|x| (x * x - 1.0).powi(2)).sum()
}

/// Solutions of `v³ − v = τ` (cellwise) with `mean(v) = γ`, using `k` cells on
/// the largest root, `j ≤ 1` on the middle root and the rest on the smallest.
fn pattern_solutions(n: usize, k: usize, j: usize, gamma: f64) -> Vec<Vec<f64>> {
    let l = n - k - j;
    let f = |tau: f64| {
        let r = cubic_roots(tau);
        (k as f64 * r[0] + j as f64 * r[1] + l as f64 * r[2]) / n as f64 - gamma
    };
    let taus: Vec<f64> = (0..=SCAN_POINTS)
        .map(|i| -TAU_C + 2.0 * TAU_C * i as f64 / SCAN_POINTS as f64)
        .collect();
    let mut out = Vec::new();
    for w in taus.windows(2) {
        let (mut lo, mut hi) = (w[0], w[1]);
        let (flo, fhi) = (f(lo), f(hi));
        if flo == 0.0 {
            out.push(lo);
            continue;
        }
        if flo.signum() == fhi.signum() {
            continue;
        }
        let mut fl = flo;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let fm = f(mid);
            if fm == 0.0 {
                lo = mid;
                hi = mid;
                break;
            }
            if fm.signum() == fl.signum() {
                lo = mid;
                fl = fm;
            } else {
                hi = mid;
            }
        }
        out.push(0.5 * (lo + hi));
    }
    if f(TAU_C) == 0.0 {
        out.push(TAU_C);
    }
    out.into_iter()
        .map(|tau| {
            let r = cubic_roots(tau);
            let mut v = vec![r[0]; k];
            v.extend(std::iter::repeat_n(r[1], j));
            v.extend(std::iter::repeat_n(r[2], l));
            v
        })
        .collect()
}

/// Constant kernel `W ≡ p`: solves the cellwise Euler–Lagrange system
/// `v_i³ − v_i = τ`, `mean(v) = c/√(1 − εp)` over root-assignment patterns and
/// returns the lowest-energy solution as `u = √(1 − εp) v`.
///
/// `reduced_energy` is `Σ (v_i² − 1)²`. Oversaturated volumes
/// `|c| ≥ √(1 − εp)` are delegated to [`closed_form_oversaturated`].
pub fn el_solve_constant(p: f64, epsilon: f64, c: f64, n: usize) -> Result<MinimizerResult> {
    let s = constant_scale(p, epsilon, n)?;
    if c.abs() >= s {
        return closed_form_oversaturated(p, epsilon, c, n);
    }
    let gamma = c / s;
    let mut best: Option<(f64, Vec<f64>)> = Some((reduced(&vec![gamma; n]), vec![gamma; n]));
    for j in 0..=1usize.min(n) {
        for k in 0..=(n - j) {
            for v in pattern_solutions(n, k, j, gamma) {
                let r = reduced(&v);
                if best.as_ref().is_none_or(|b| r < b.0) {
                    best = Some((r, v));
                }
            }
        }
    }
    let (r, v) = best.expect("constant candidate");
    let w = sample_step_graphon(&AnalyticGraphon::Constant { p }, n)?;
    let mut res = finish(&w, v.iter().map(|x| s * x).collect(), epsilon, c)?;
    res.reduced_energy = Some(r);
    Ok(res)
}

/// Constant kernel with `|c| ≥ √(1 − εp)`: the constant state `u ≡ c`, with
/// energy `(1/ε)(c² − 1)²` and reduced energy `n (γ² − 1)²`, `γ = c/√(1 − εp)`.
pub fn closed_form_oversaturated(p: f64, epsilon: f64, c: f64, n: usize) -> Result<MinimizerResult> {
    let s = constant_scale(p, epsilon, n)?;
    if c.abs() < s {
        return Err(Error::Precondition(format!(
            "|c| = {} < sqrt(1 - epsilon * p) = {s}; use el_solve_constant",
            c.abs()
        )));
    }
    let w = sample_step_graphon(&AnalyticGraphon::Constant { p }, n)?;
    let mut res = finish(&w, vec![c; n], epsilon, c)?;
    let gamma = c / s;
    res.reduced_energy = Some(n as f64 * (gamma * gamma - 1.0).powi(2));
    Ok(res)
}

fn require_zero_volume(c: f64) -> Result<()> {
    if c == 0.0 {
        Ok(())
    } else {
        Err(Error::Precondition(format!("closed form needs c = 0 (got {c})")))
    }
}

/// `±1` alternating within a block, with a trailing 0 when the block is odd.
fn balanced_block(len: usize) -> impl Iterator<Item = f64> {
    (0..len).map(move |i| {
        if len % 2 == 1 && i == len - 1 {
            0.0
        } else if i % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    })
}

/// Complete bipartite kernel with blocks `S = (0, a]` and `S^c`, `c = 0`.
///
/// Returns the balanced candidate: in each block half the cells sit at `+1`
/// and half at `−1` in rescaled variables (one cell at 0 for odd blocks),
/// scaled by `√(1 − ε(1 − a))` on `S` and `√(1 − εa)` on `S^c`.
pub fn closed_form_bipartite(a: f64, epsilon: f64, n: usize, c: f64) -> Result<MinimizerResult> {
    AnalyticGraphon::Bipartite { a }.validate()?;
    require_zero_volume(c)?;
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Precondition(format!("closed form needs 0 < epsilon < 1 (got {epsilon})")));
    }
    let na = a * n as f64;
    let ns = na.round();
    if n == 0 || (na - ns).abs() > 1e-9 {
        return Err(Error::Precondition(format!(
            "block split n * a = {na} is not an integer"
        )));
    }
    let ns = ns as usize;
    let (cs, ct) = ((1.0 - epsilon * (1.0 - a)).sqrt(), (1.0 - epsilon * a).sqrt());
    let values: Vec<f64> = balanced_block(ns)
        .map(|v| cs * v)
        .chain(balanced_block(n - ns).map(|v| ct * v))
        .collect();
    let w = sample_step_graphon(&AnalyticGraphon::Bipartite { a }, n)?;
    finish(&w, values, epsilon, c)
}

/// Complete community kernel with two equal blocks, `c = 0`: the blockwise
/// constant state `+1` on `S`, `−1` on `S^c`, which has zero energy.
pub fn closed_form_community(a: f64, epsilon: f64, n: usize, c: f64) -> Result<MinimizerResult> {
    if a != 0.5 {
        return Err(Error::Precondition(format!("closed form needs a = 0.5 (got {a})")));
    }
    if n == 0 || n % 2 == 1 {
        return Err(Error::Precondition(format!("closed form needs even n (got {n})")));
    }
    require_zero_volume(c)?;
    let values = (0..n).map(|i| if i < n / 2 { 1.0 } else { -1.0 }).collect();
    let w = sample_step_graphon(&AnalyticGraphon::Community { a }, n)?;
    finish(&w, values, epsilon, c)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn values(r: &MinimizerResult) -> Vec<f64> {
        r.values().unwrap().to_vec()
    }

    #[test]
    fn cubic_roots_solve_the_cubic() {
        for tau in [-1.0, -TAU_C, -0.2, 0.0, 0.1, TAU_C, 3.0] {
            for v in cubic_roots(tau) {
                assert!((v * v * v - v - tau).abs() < 1e-12, "tau {tau}, v {v}");
            }
        }
        let r = cubic_roots(0.0);
        assert!((r[0] - 1.0).abs() < 1e-15 && r[1].abs() < 1e-15 && (r[2] + 1.0).abs() < 1e-15);
    }

    #[test]
    fn constant_balanced_volume() {
        let r = el_solve_constant(0.5, 0.1, 0.0, 10).unwrap();
        let s = 0.95f64.sqrt();
        let v = values(&r);
        assert_eq!(v.iter().filter(|x| (**x - s).abs() < 1e-12).count(), 5);
        assert_eq!(v.iter().filter(|x| (**x + s).abs() < 1e-12).count(), 5);
        assert!(r.reduced_energy.unwrap() < 1e-20);
    }

    #[test]
    fn constant_two_nodes() {
        let r = el_solve_constant(1.0, 0.5, 0.0, 2).unwrap();
        let v = values(&r);
        assert!((v[0] - 0.5f64.sqrt()).abs() < 1e-12 && (v[1] + 0.5f64.sqrt()).abs() < 1e-12);
        assert!((r.energy.total - 1.5).abs() < 1e-12);
    }

    #[test]
    fn constant_residual_volume_is_spread() {
        // c = 0.3 is not a multiple of 2√0.95/64, so the EL solution has τ ≠ 0
        let r = el_solve_constant(0.5, 0.1, 0.3, 64).unwrap();
        assert!(r.constraint_residual.abs() < 1e-14);
        let v = values(&r);
        let tau = {
            let x = v[0] / 0.95f64.sqrt();
            x * x * x - x
        };
        assert!(tau.abs() > 1e-4);
        // every cell solves the same cubic
        for x in v.iter().map(|u| u / 0.95f64.sqrt()) {
            assert!((x * x * x - x - tau).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_matches_exhaustive_pattern_energy_at_small_n() {
        // independent check: for n = 3 scan a fine grid of the 2-d feasible set
        let (p, eps, c, n) = (0.8, 0.3, 0.2, 3);
        let r = el_solve_constant(p, eps, c, n).unwrap();
        let w = sample_step_graphon(&AnalyticGraphon::Constant { p }, n).unwrap();
        let mut best = f64::INFINITY;
        let steps = 600;
        for i in 0..=steps {
            for j in 0..=steps {
                let x = -1.5 + 3.0 * i as f64 / steps as f64;
                let y = -1.5 + 3.0 * j as f64 / steps as f64;
                let z = 3.0 * c - x - y;
                let u = StepFunction::new(vec![x, y, z]).unwrap();
                best = best.min(graph_gl(&w, &u, eps).unwrap().total);
            }
        }
        assert!(r.energy.total <= best + 1e-12);
        assert!(r.energy.total >= best - 1e-3);
    }

    #[test]
    fn oversaturated_example() {
        let r = el_solve_constant(1.0, 0.5, 0.9, 16).unwrap();
        assert!(values(&r).iter().all(|&x| x == 0.9));
        assert!((r.energy.total - 0.0722).abs() < 1e-12);
        let r = closed_form_oversaturated(0.5, 0.1, 1.0, 5).unwrap();
        assert_eq!(r.energy.total, 0.0);
        assert!(closed_form_oversaturated(0.5, 0.1, 0.2, 5).is_err());
    }

    #[test]
    fn oversaturated_boundary_beats_grid() {
        let (p, eps): (f64, f64) = (1.0, 0.5);
        let s = (1.0 - eps * p).sqrt();
        let r = closed_form_oversaturated(p, eps, s, 4).unwrap();
        assert!((r.energy.total - eps * p * p).abs() < 1e-12);
        let w = sample_step_graphon(&AnalyticGraphon::Constant { p }, 4).unwrap();
        let steps = 60;
        for i in 0..=steps {
            for j in 0..=steps {
                for k in 0..=steps {
                    let g = |t: usize| -1.5 + 3.0 * t as f64 / steps as f64;
                    let u = vec![g(i), g(j), g(k), 4.0 * s - g(i) - g(j) - g(k)];
                    let e = graph_gl(&w, &StepFunction::new(u).unwrap(), eps).unwrap().total;
                    assert!(e >= r.energy.total - 1e-12);
                }
            }
        }
    }

    #[test]
    fn degenerate_epsilon_rejected() {
        assert!(el_solve_constant(1.0, 1.0, 0.0, 4).is_err());
        assert!(closed_form_bipartite(0.5, 1.0, 8, 0.0).is_err());
    }

    #[test]
    fn bipartite_balanced() {
        let r = closed_form_bipartite(0.5, 0.2, 8, 0.0).unwrap();
        let s = 0.9f64.sqrt();
        assert!(values(&r).iter().all(|x| (x.abs() - s).abs() < 1e-15));
        assert!((r.energy.total - 0.95).abs() < 1e-12);
        assert!(r.constraint_residual.abs() < 1e-15);
    }

    #[test]
    fn bipartite_odd_block() {
        let r = closed_form_bipartite(0.5, 0.2, 10, 0.0).unwrap();
        let v = values(&r);
        assert_eq!(v.iter().filter(|x| **x == 0.0).count(), 2);
        assert!(r.energy.total <= 3.0 / 0.2);
        assert!(closed_form_bipartite(0.3, 0.2, 8, 0.0).is_err());
    }

    #[test]
    fn bipartite_small_epsilon() {
        let r = closed_form_bipartite(0.5, 1e-4, 8, 0.0).unwrap();
        assert!(values(&r).iter().all(|x| (x.abs() - 1.0).abs() < 5e-5));
    }

    #[test]
    fn community_blocks() {
        let r = closed_form_community(0.5, 0.2, 8, 0.0).unwrap();
        assert_eq!(values(&r), vec![1.0, 1.0, 1.0, 1.0, -1.0, -1.0, -1.0, -1.0]);
        assert_eq!(r.energy.total, 0.0);
        let w = sample_step_graphon(&AnalyticGraphon::Community { a: 0.5 }, 8).unwrap();
        let flipped = r.state.as_step().unwrap().negated();
        assert_eq!(graph_gl(&w, &flipped, 0.2).unwrap().total, r.energy.total);
        assert!(closed_form_community(0.4, 0.2, 8, 0.0).is_err());
        assert!(closed_form_community(0.5, 0.2, 7, 0.0).is_err());
        assert!(closed_form_community(0.5, 0.2, 8, 0.1).is_err());
    }
}
