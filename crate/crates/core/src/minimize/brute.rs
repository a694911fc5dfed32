//! Exhaustive minimization over a finite value grid, used as an oracle.

use super::{MinimizerResult, State};
use crate::error::{validation, Error, Result};
use crate::functionals::{graph_gl, graph_gl_gradient};
use crate::graphon::StepGraphon;
use crate::measures::StepFunction;

pub const BRUTE_MAX_N: usize = 6;
pub const BRUTE_MAX_GRID: usize = 21;

/// Minimizes graph GL over all `u ∈ grid^n` whose mean lies within
/// `10 · constraint_tol` of `c`.
///
/// The first `n − 1` coordinates are enumerated; the last is the grid value
/// nearest to the one that makes the mean exact. Ties keep the first
/// assignment in lexicographic grid order.
pub fn brute_force_minimizer(
    kernel: &StepGraphon,
    epsilon: f64,
    c: f64,
    grid: &[f64],
    constraint_tol: f64,
) -> Result<MinimizerResult> {
    let n = kernel.n();
    if n > BRUTE_MAX_N || grid.len() > BRUTE_MAX_GRID {
        return Err(Error::Budget {
            what: "brute-force minimizer",
            cost: format!("{}^{} = {:.3e} assignments", grid.len(), n, (grid.len() as f64).powi(n as i32)),
            limit: format!("n <= {BRUTE_MAX_N} and |grid| <= {BRUTE_MAX_GRID}"),
            hint: "use minimize_graph_gl".into(),
        });
    }
    if grid.is_empty() || grid.iter().any(|g| !g.is_finite()) {
        return Err(validation("grid must be a nonempty list of finite values"));
    }
    let tol = 10.0 * constraint_tol;
    let mut idx = vec![0usize; n - 1];
    let mut u = vec![0.0; n];
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut evaluated = 0usize;
    loop {
        for (k, &i) in idx.iter().enumerate() {
            u[k] = grid[i];
        }
        let partial: f64 = u[..n - 1].iter().sum();
        let target = n as f64 * c - partial;
        let last = grid
            .iter()
            .copied()
            .min_by(|a, b| (a - target).abs().total_cmp(&(b - target).abs()))
            .expect("nonempty grid");
        u[n - 1] = last;
        let vol = u.iter().sum::<f64>() / n as f64;
        if (vol - c).abs() <= tol {
            let e = graph_gl(kernel, &StepFunction::new(u.clone())?, epsilon)?.total;
            evaluated += 1;
            if best.as_ref().is_none_or(|b| e < b.0) {
                best = Some((e, u.clone()));
            }
        }
        // odometer increment
        let mut k = 0;
        while k < n - 1 {
            idx[k] += 1;
            if idx[k] < grid.len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
        if k == n - 1 {
            break;
        }
    }
    let (_, values) = best.ok_or_else(|| {
        Error::Precondition(format!("no grid assignment has mean within {tol:e} of c = {c}"))
    })?;
    let u = StepFunction::new(values)?;
    let energy = graph_gl(kernel, &u, epsilon)?;
    let g = graph_gl_gradient(kernel, u.values(), epsilon);
    Ok(MinimizerResult {
        constraint_residual: u.volume() - c,
        state: State::Step(u),
        energy,
        multiplier: g.iter().sum::<f64>() / n as f64,
        converged: true,
        iterations: evaluated,
        reduced_energy: None,
        restarts: Vec::new(),
    })
}

/// `k` equally spaced values on `[lo, hi]`.
pub fn linspace(lo: f64, hi: f64, k: usize) -> Vec<f64> {
    match k {
        0 => vec![],
        1 => vec![lo],
        _ => (0..k).map(|i| lo + (hi - lo) * i as f64 / (k - 1) as f64).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functionals::graph_gl;
    use crate::graphon::{four_cycle, sample_step_graphon, AnalyticGraphon};

    #[test]
    fn complete_graph_two_nodes_on_grid() {
        let w = sample_step_graphon(&AnalyticGraphon::Constant { p: 1.0 }, 2).unwrap();
        let grid = linspace(-1.0, 1.0, 21);
        let r = brute_force_minimizer(&w, 0.5, 0.0, &grid, 1e-10).unwrap();
        let v = r.values().unwrap();
        assert!((v[0].abs() - 0.7).abs() < 1e-12);
        assert!((v[0] + v[1]).abs() < 1e-12);
        assert!((v[0].abs() - 0.5f64.sqrt()).abs() <= 0.1);
    }

    #[test]
    fn zero_kernel_balanced_binary() {
        let w = StepGraphon::zeros(4).unwrap();
        let r = brute_force_minimizer(&w, 0.3, 0.0, &[-1.0, 0.0, 1.0], 1e-10).unwrap();
        assert_eq!(r.energy.total, 0.0);
        let v = r.values().unwrap();
        assert!(v.iter().all(|x| x.abs() == 1.0));
        assert_eq!(v.iter().sum::<f64>(), 0.0);
    }

    #[test]
    fn four_cycle_beats_split() {
        let w = four_cycle();
        let r = brute_force_minimizer(&w, 0.1, 0.0, &[-1.0, 0.0, 1.0], 1e-10).unwrap();
        let split = graph_gl(&w, &StepFunction::new(vec![1.0, 1.0, -1.0, -1.0]).unwrap(), 0.1).unwrap();
        assert!(r.energy.total <= split.total);
    }

    #[test]
    fn budget_refused() {
        let w = StepGraphon::zeros(7).unwrap();
        assert!(matches!(
            brute_force_minimizer(&w, 0.1, 0.0, &[0.0, 1.0], 1e-10),
            Err(Error::Budget { .. })
        ));
        let w = StepGraphon::zeros(3).unwrap();
        assert!(brute_force_minimizer(&w, 0.1, 0.0, &linspace(-1.0, 1.0, 22), 1e-10).is_err());
    }
}
