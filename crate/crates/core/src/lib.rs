//! Graph and graphon Ginzburg–Landau energies.
//!
//! The crate evaluates Ginzburg–Landau (GL), total-variation (TV), Dirichlet
//! and cut functionals on step functions over finite weighted graphs and on
//! discretized Young measures over graphons, minimizes GL energies under a
//! volume constraint, and runs numerical diagnostics for the large-graph
//! (`n → ∞`) and sharp-interface (`ε → 0`) limits of those energies.
//!
//! Module map:
//!
//! * [`graphon`]: step graphons, analytic graphon families, `L^p` norms.
//! * [`cutnorm`]: cut norm (subset and bilinear forms), cut distance.
//! * [`measures`]: step functions, Young measures, moments, narrow pseudometric.
//! * [`functionals`]: double well, graph and graphon GL / TV / Dirichlet.
//! * [`minimize`]: volume-constrained GL minimization and closed forms.
//! * [`limits`]: `n`- and `ε`-sweeps, recovery and liminf diagnostics.
//! * [`io`]: CSV, edge-list and JSON formats.

pub mod cutnorm;
pub mod error;
pub mod functionals;
pub mod graphon;
pub mod io;
pub mod limits;
pub mod measures;
pub mod minimize;
pub mod rng;

pub use cutnorm::{CutForm, CutMethod, CutNormEstimate};
pub use error::{Error, Result};
pub use functionals::EnergyReport;
pub use graphon::{AnalyticGraphon, Graphon, Sampling, StepGraphon};
pub use measures::{CellLaw, MomentProfile, StepFunction, YoungMeasure};
pub use minimize::{MinimizeProblem, MinimizerResult, State, StateSpace, Tolerances};
