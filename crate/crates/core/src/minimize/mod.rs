//! Volume-constrained GL minimization.
//!
//! [`minimize_graph_gl`] runs multi-start descent on step functions and
//! [`minimize_graphon_gl_two_atom`] on cellwise two-atom Young measures. The
//! closed forms for the constant, bipartite and community kernels and the
//! brute-force oracle live in [`closed_form`] and [`brute`].

pub mod brute;
pub mod closed_form;
mod descent;
mod two_atom;

use serde::{Deserialize, Serialize};

use crate::error::{validation, Result};
use crate::functionals::EnergyReport;
use crate::graphon::{AnalyticGraphon, Graphon};
use crate::measures::{StepFunction, YoungMeasure};

pub use brute::brute_force_minimizer;
pub use closed_form::{
    closed_form_bipartite, closed_form_community, closed_form_oversaturated, el_solve_constant,
};
pub use descent::minimize_graph_gl;
pub use two_atom::minimize_graphon_gl_two_atom;

/// Energies within this distance count as ties across restarts.
pub const ENERGY_TIE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub grad_tol: f64,
    pub constraint_tol: f64,
    pub max_iters: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            grad_tol: 1e-9,
            constraint_tol: 1e-10,
            max_iters: 50_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum StateSpace {
    StepFunction { n: usize },
    TwoAtom { m: usize },
}

/// Minimize GL over the state space subject to `volume(state) = volume_c`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimizeProblem {
    pub kernel: Graphon,
    pub epsilon: f64,
    pub volume_c: f64,
    pub state_space: StateSpace,
    pub restarts: usize,
    pub seed: u64,
    #[serde(default)]
    pub tolerances: Tolerances,
}

impl MinimizeProblem {
    pub fn new(kernel: impl Into<Graphon>, epsilon: f64, volume_c: f64, state_space: StateSpace) -> Self {
        Self {
            kernel: kernel.into(),
            epsilon,
            volume_c,
            state_space,
            restarts: 8,
            seed: 0,
            tolerances: Tolerances::default(),
        }
    }

    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(validation(format!("epsilon = {} must be positive", self.epsilon)));
        }
        if !self.volume_c.is_finite() {
            return Err(validation("volume constraint c must be finite"));
        }
        if self.restarts == 0 {
            return Err(validation("restarts must be at least 1"));
        }
        let t = &self.tolerances;
        if !(t.grad_tol > 0.0 && t.constraint_tol > 0.0 && t.max_iters > 0) {
            return Err(validation("tolerances must be positive"));
        }
        let cells = match self.state_space {
            StateSpace::StepFunction { n } => n,
            StateSpace::TwoAtom { m } => m,
        };
        if cells == 0 {
            return Err(validation("state space needs at least one cell"));
        }
        if let Graphon::Analytic(a) = &self.kernel {
            a.validate()?;
        }
        if let (StateSpace::TwoAtom { .. }, true) = (self.state_space, self.volume_c.abs() > 1.0) {
            return Err(validation(format!(
                "two-atom states keep atoms in [-1, 1], so |c| = {} > 1 is infeasible",
                self.volume_c.abs()
            )));
        }
        Ok(())
    }

    pub(crate) fn analytic(&self) -> Option<AnalyticGraphon> {
        match &self.kernel {
            Graphon::Analytic(a) => Some(*a),
            Graphon::Step(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "value", rename_all = "snake_case")]
pub enum State {
    Step(StepFunction),
    Young(YoungMeasure),
}

impl State {
    pub fn volume(&self) -> f64 {
        match self {
            State::Step(u) => u.volume(),
            State::Young(y) => y.volume(),
        }
    }

    pub fn as_step(&self) -> Option<&StepFunction> {
        match self {
            State::Step(u) => Some(u),
            State::Young(_) => None,
        }
    }

    pub fn as_young(&self) -> Option<&YoungMeasure> {
        match self {
            State::Young(y) => Some(y),
            State::Step(_) => None,
        }
    }
}

/// One line of per-restart diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestartRecord {
    pub restart: usize,
    pub start: String,
    pub energy: f64,
    pub constraint_residual: f64,
    pub converged: bool,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimizerResult {
    pub state: State,
    pub energy: EnergyReport,
    pub constraint_residual: f64,
    /// Estimate of the Lagrange multiplier of the volume constraint.
    pub multiplier: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Energy in rescaled variables where a closed form defines one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reduced_energy: Option<f64>,
    #[serde(default)]
    pub restarts: Vec<RestartRecord>,
}

impl MinimizerResult {
    pub fn values(&self) -> Option<&[f64]> {
        self.state.as_step().map(StepFunction::values)
    }
}

/// `a` beats `b`: lower energy, ties broken by the lexicographically smaller
/// sorted value vector.
pub(crate) fn better(a: (f64, &[f64]), b: (f64, &[f64])) -> bool {
    if a.0 < b.0 - ENERGY_TIE_TOL {
        return true;
    }
    if a.0 > b.0 + ENERGY_TIE_TOL {
        return false;
    }
    let mut sa = a.1.to_vec();
    let mut sb = b.1.to_vec();
    sa.sort_by(f64::total_cmp);
    sb.sort_by(f64::total_cmp);
    for (x, y) in sa.iter().zip(&sb) {
        match x.total_cmp(y) {
            std::cmp::Ordering::Less => return true,
            std::cmp::Ordering::Greater => return false,
            std::cmp::Ordering::Equal => {}
        }
    }
    false
}

#[inline]
pub(crate) fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Shifts `u` by a constant so that its mean is `c`.
pub(crate) fn project_mean(u: &mut [f64], c: f64) {
    let shift = c - mean(u);
    for x in u.iter_mut() {
        *x += shift;
    }
}
