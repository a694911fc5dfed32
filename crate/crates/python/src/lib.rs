//! Python module `graphon_gl`: kernels, states, energies, minimizers, cut
//! norms and limit sweeps.

use graphon_gl::cutnorm::{
    cut_norm_bilinear_exact, cut_norm_exact, cut_norm_heuristic, CutForm, CutNormEstimate, EXHAUSTIVE_MAX_N,
};
use graphon_gl::functionals;
use graphon_gl::graphon::sample_step_graphon_with;
use graphon_gl::limits::{self, SweepFunctional, SweepLevel, SweepOptions, SweepResult};
use graphon_gl::measures::{delta_from_function, narrow_distance};
use graphon_gl::minimize::{
    closed_form_bipartite, closed_form_community, el_solve_constant, minimize_graph_gl,
    minimize_graphon_gl_two_atom,
};
use graphon_gl::{
    io, AnalyticGraphon, EnergyReport, Error, Graphon, MinimizeProblem, MinimizerResult, Sampling, State,
    StateSpace, StepFunction, StepGraphon, YoungMeasure,
};
use pyo3::create_exception;
use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;

create_exception!(graphon_gl, GraphonError, PyValueError, "Invalid input or violated precondition.");

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Io { .. } => PyOSError::new_err(e.to_string()),
        other => GraphonError::new_err(other.to_string()),
    }
}

trait OrPy<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> OrPy<T> for graphon_gl::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(to_py)
    }
}

fn json_err(e: serde_json::Error) -> PyErr {
    GraphonError::new_err(format!("json: {e}"))
}

fn state_of(values: Vec<f64>) -> PyResult<StepFunction> {
    StepFunction::new(values).py()
}

// ---------- kernels ----------

/// Weighted graph on `n` nodes as a step graphon on `[0,1]²`.
#[pyclass(name = "StepGraphon", module = "graphon_gl", frozen, from_py_object)]
#[derive(Clone)]
pub struct PyStepGraphon {
    inner: StepGraphon,
}

#[pymethods]
impl PyStepGraphon {
    #[new]
    fn new(rows: Vec<Vec<f64>>) -> PyResult<Self> {
        Ok(Self {
            inner: StepGraphon::from_adjacency(&rows).py()?,
        })
    }

    /// `i j w` lines, 1-based; `n` defaults to the largest index.
    #[staticmethod]
    #[pyo3(signature = (text, n=None))]
    fn from_edges(text: &str, n: Option<usize>) -> PyResult<Self> {
        let inner = io::parse_edge_list(text, n).map_err(GraphonError::new_err)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn read_csv(path: &str) -> PyResult<Self> {
        Ok(Self {
            inner: io::read_adjacency_csv(path.as_ref()).py()?,
        })
    }

    fn write_csv(&self, path: &str) -> PyResult<()> {
        io::write_adjacency_csv(path.as_ref(), &self.inner).py()
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    fn rows(&self) -> Vec<Vec<f64>> {
        self.inner.rows()
    }

    fn degrees(&self) -> Vec<f64> {
        self.inner.degrees()
    }

    fn eval(&self, x: f64, y: f64) -> f64 {
        self.inner.eval(x, y)
    }

    fn lp_norm(&self, p: f64) -> PyResult<f64> {
        self.inner.lp_norm(p).py()
    }

    /// SHA-256 of the weights.
    fn content_hash(&self) -> String {
        self.inner.content_hash()
    }

    fn __repr__(&self) -> String {
        format!("StepGraphon(n={})", self.inner.n())
    }
}

/// Named graphon family.
#[pyclass(name = "AnalyticGraphon", module = "graphon_gl", frozen, from_py_object)]
#[derive(Clone)]
pub struct PyAnalyticGraphon {
    inner: AnalyticGraphon,
}

impl PyAnalyticGraphon {
    fn checked(inner: AnalyticGraphon) -> PyResult<Self> {
        inner.validate().py()?;
        Ok(Self { inner })
    }
}

#[pymethods]
impl PyAnalyticGraphon {
    #[staticmethod]
    fn constant(p: f64) -> PyResult<Self> {
        Self::checked(AnalyticGraphon::Constant { p })
    }

    #[staticmethod]
    fn sbm2x2(a11: f64, a12: f64, a22: f64, split: f64) -> PyResult<Self> {
        Self::checked(AnalyticGraphon::Sbm2x2 { a11, a12, a22, split })
    }

    #[staticmethod]
    fn bipartite(a: f64) -> PyResult<Self> {
        Self::checked(AnalyticGraphon::Bipartite { a })
    }

    #[staticmethod]
    fn community(a: f64) -> PyResult<Self> {
        Self::checked(AnalyticGraphon::Community { a })
    }

    #[staticmethod]
    #[pyo3(signature = (s, cap=1e6))]
    fn power_kernel(s: f64, cap: f64) -> PyResult<Self> {
        Self::checked(AnalyticGraphon::PowerKernel { s, cap })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Self::checked(serde_json::from_str(text).map_err(json_err)?)
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.inner).map_err(json_err)
    }

    #[getter]
    fn name(&self) -> &'static str {
        self.inner.name()
    }

    fn eval(&self, x: f64, y: f64) -> f64 {
        self.inner.eval(x, y)
    }

    /// `A_ij = W(x_i, x_j)` at right endpoints `i/n` or midpoints.
    #[pyo3(signature = (n, midpoint=false))]
    fn sample(&self, n: usize, midpoint: bool) -> PyResult<PyStepGraphon> {
        let s = if midpoint { Sampling::Midpoint } else { Sampling::RightEndpoint };
        Ok(PyStepGraphon {
            inner: sample_step_graphon_with(&self.inner, n, s).py()?,
        })
    }

    fn lp_norm(&self, p: f64) -> PyResult<f64> {
        self.inner.lp_norm(p).py()
    }

    fn __repr__(&self) -> String {
        format!("AnalyticGraphon({})", serde_json::to_string(&self.inner).unwrap_or_default())
    }
}

#[derive(FromPyObject)]
enum KernelArg {
    Step(PyStepGraphon),
    Analytic(PyAnalyticGraphon),
}

impl KernelArg {
    fn graphon(self) -> Graphon {
        match self {
            KernelArg::Step(w) => Graphon::Step(w.inner),
            KernelArg::Analytic(a) => Graphon::Analytic(a.inner),
        }
    }
}

// ---------- states ----------

/// Young measure constant on `m` equal cells.
#[pyclass(name = "YoungMeasure", module = "graphon_gl", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct PyYoungMeasure {
    inner: YoungMeasure,
}

#[pymethods]
impl PyYoungMeasure {
    /// `θ δ_a + (1 − θ) δ_b` in every cell.
    #[staticmethod]
    fn two_atom(m: usize, a: f64, b: f64, theta: f64) -> PyResult<Self> {
        Ok(Self {
            inner: YoungMeasure::two_atom(m, a, b, theta).py()?,
        })
    }

    /// `δ_{u(x)}` for a step function `u`.
    #[staticmethod]
    fn from_values(values: Vec<f64>) -> PyResult<Self> {
        Ok(Self {
            inner: delta_from_function(&state_of(values)?),
        })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self {
            inner: serde_json::from_str(text).map_err(json_err)?,
        })
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.inner).map_err(json_err)
    }

    #[getter]
    fn cells(&self) -> usize {
        self.inner.cells()
    }

    #[getter]
    fn kind(&self) -> &'static str {
        self.inner.kind()
    }

    fn volume(&self) -> f64 {
        self.inner.volume()
    }

    fn is_binary(&self) -> bool {
        self.inner.is_binary()
    }

    /// `∫ λ^k dν_x` per cell.
    fn moments(&self, k: u32) -> Vec<f64> {
        (0..self.inner.cells()).map(|i| self.inner.moment(i, k)).collect()
    }

    /// `(atom, weight)` pairs of cell `i`.
    fn support(&self, i: usize) -> PyResult<Vec<(f64, f64)>> {
        if i >= self.inner.cells() {
            return Err(GraphonError::new_err(format!("cell {i} out of range")));
        }
        Ok(self.inner.support(i))
    }

    fn narrow_distance(&self, other: &PyYoungMeasure) -> f64 {
        narrow_distance(&self.inner, &other.inner)
    }

    fn __repr__(&self) -> String {
        format!("YoungMeasure(cells={}, kind={})", self.inner.cells(), self.inner.kind())
    }
}

// ---------- energies ----------

#[pyclass(name = "EnergyReport", module = "graphon_gl", frozen, get_all, skip_from_py_object)]
#[derive(Clone)]
pub struct PyEnergyReport {
    total: f64,
    dirichlet: f64,
    doublewell: f64,
    epsilon: Option<f64>,
    finite: bool,
}

impl From<EnergyReport> for PyEnergyReport {
    fn from(r: EnergyReport) -> Self {
        Self {
            total: r.total,
            dirichlet: r.dirichlet_part,
            doublewell: r.doublewell_part,
            epsilon: r.epsilon,
            finite: r.finite,
        }
    }
}

#[pymethods]
impl PyEnergyReport {
    /// `total`, or `inf` on the infinite branch.
    #[getter]
    fn value(&self) -> f64 {
        if self.finite {
            self.total
        } else {
            f64::INFINITY
        }
    }

    fn __repr__(&self) -> String {
        format!(
            "EnergyReport(total={}, dirichlet={}, doublewell={}, finite={})",
            self.total, self.dirichlet, self.doublewell, self.finite
        )
    }
}

#[pyfunction]
fn double_well(s: f64) -> f64 {
    functionals::double_well(s)
}

#[pyfunction]
fn graph_dirichlet(w: &PyStepGraphon, u: Vec<f64>) -> PyResult<PyEnergyReport> {
    Ok(functionals::graph_dirichlet(&w.inner, &state_of(u)?).py()?.into())
}

#[pyfunction]
fn graph_gl(w: &PyStepGraphon, u: Vec<f64>, epsilon: f64) -> PyResult<PyEnergyReport> {
    Ok(functionals::graph_gl(&w.inner, &state_of(u)?, epsilon).py()?.into())
}

#[pyfunction]
fn graph_tv(w: &PyStepGraphon, u: Vec<f64>) -> PyResult<PyEnergyReport> {
    Ok(functionals::graph_tv(&w.inner, &state_of(u)?).py()?.into())
}

#[pyfunction]
fn graphon_dirichlet(w: KernelArg, nu: &PyYoungMeasure) -> PyResult<PyEnergyReport> {
    Ok(functionals::graphon_dirichlet(&w.graphon(), &nu.inner).py()?.into())
}

#[pyfunction(name = "graphon_gl")]
fn graphon_gl_energy(w: KernelArg, nu: &PyYoungMeasure, epsilon: f64) -> PyResult<PyEnergyReport> {
    Ok(functionals::graphon_gl(&w.graphon(), &nu.inner, epsilon).py()?.into())
}

#[pyfunction]
fn graphon_tv(w: KernelArg, nu: &PyYoungMeasure) -> PyResult<PyEnergyReport> {
    Ok(functionals::graphon_tv(&w.graphon(), &nu.inner).py()?.into())
}

// ---------- cut norm ----------

#[pyclass(name = "CutNorm", module = "graphon_gl", frozen, get_all, skip_from_py_object)]
#[derive(Clone)]
pub struct PyCutNorm {
    value: f64,
    form: &'static str,
    method: &'static str,
    exact: bool,
    f: Vec<i8>,
    g: Vec<i8>,
}

impl From<CutNormEstimate> for PyCutNorm {
    fn from(e: CutNormEstimate) -> Self {
        Self {
            value: e.value,
            form: match e.form {
                CutForm::Subset => "subset",
                CutForm::Bilinear => "bilinear",
            },
            method: match e.method {
                graphon_gl::CutMethod::Exhaustive => "exhaustive",
                graphon_gl::CutMethod::Alternating => "alternating",
            },
            exact: e.is_exact,
            f: e.f,
            g: e.g,
        }
    }
}

#[pymethods]
impl PyCutNorm {
    fn __repr__(&self) -> String {
        format!("CutNorm(value={}, form={}, exact={})", self.value, self.form, self.exact)
    }
}

/// `method`: `auto` (exhaustive up to n = 20), `exhaustive` or `heuristic`.
/// `form`: `subset` or `bilinear`; the heuristic estimates the bilinear form.
#[pyfunction]
#[pyo3(signature = (w, method="auto", form=None, restarts=50, seed=0))]
fn cut_norm(w: &PyStepGraphon, method: &str, form: Option<&str>, restarts: usize, seed: u64) -> PyResult<PyCutNorm> {
    let n = w.inner.n();
    let exhaustive = match method {
        "auto" => n <= EXHAUSTIVE_MAX_N,
        "exhaustive" => true,
        "heuristic" => false,
        other => return Err(GraphonError::new_err(format!("unknown method '{other}'"))),
    };
    let est = match (exhaustive, form) {
        (true, None | Some("subset")) => cut_norm_exact(&w.inner).py()?,
        (true, Some("bilinear")) => cut_norm_bilinear_exact(&w.inner).py()?,
        (false, None | Some("bilinear")) => cut_norm_heuristic(&w.inner, restarts, seed),
        (false, Some("subset")) => {
            return Err(GraphonError::new_err("the heuristic estimates the bilinear form only"))
        }
        (_, Some(other)) => return Err(GraphonError::new_err(format!("unknown form '{other}'"))),
    };
    Ok(est.into())
}

// ---------- minimization ----------

#[pyclass(name = "MinimizerResult", module = "graphon_gl", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct PyMinimizerResult {
    inner: MinimizerResult,
}

#[pymethods]
impl PyMinimizerResult {
    #[getter]
    fn energy(&self) -> PyEnergyReport {
        self.inner.energy.into()
    }

    /// Cell values for step-function states, `None` for Young measures.
    #[getter]
    fn values(&self) -> Option<Vec<f64>> {
        self.inner.values().map(<[f64]>::to_vec)
    }

    #[getter]
    fn measure(&self) -> Option<PyYoungMeasure> {
        self.inner.state.as_young().map(|y| PyYoungMeasure { inner: y.clone() })
    }

    #[getter]
    fn volume(&self) -> f64 {
        self.inner.state.volume()
    }

    #[getter]
    fn converged(&self) -> bool {
        self.inner.converged
    }

    #[getter]
    fn constraint_residual(&self) -> f64 {
        self.inner.constraint_residual
    }

    #[getter]
    fn multiplier(&self) -> f64 {
        self.inner.multiplier
    }

    #[getter]
    fn iterations(&self) -> usize {
        self.inner.iterations
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.inner).map_err(json_err)
    }

    fn __repr__(&self) -> String {
        format!(
            "MinimizerResult(energy={}, converged={})",
            self.inner.energy.total, self.inner.converged
        )
    }
}

/// Minimizes GL at `epsilon` under `volume = c` over step functions on `n`
/// cells (`state_space="step_function"`) or two-atom Young measures on `n`
/// cells (`"two_atom"`).
#[pyfunction]
#[pyo3(signature = (kernel, epsilon, c, n, state_space="step_function", restarts=8, seed=0))]
fn minimize(
    py: Python<'_>,
    kernel: KernelArg,
    epsilon: f64,
    c: f64,
    n: usize,
    state_space: &str,
    restarts: usize,
    seed: u64,
) -> PyResult<PyMinimizerResult> {
    let space = match state_space {
        "step_function" => StateSpace::StepFunction { n },
        "two_atom" => StateSpace::TwoAtom { m: n },
        other => return Err(GraphonError::new_err(format!("unknown state space '{other}'"))),
    };
    let p = MinimizeProblem::new(kernel.graphon(), epsilon, c, space)
        .with_restarts(restarts)
        .with_seed(seed);
    let inner = py
        .detach(|| match space {
            StateSpace::StepFunction { .. } => minimize_graph_gl(&p),
            StateSpace::TwoAtom { .. } => minimize_graphon_gl_two_atom(&p),
        })
        .py()?;
    Ok(PyMinimizerResult { inner })
}

/// Closed-form minimizer for constant, bipartite and community kernels.
#[pyfunction]
fn closed_form(kernel: &PyAnalyticGraphon, epsilon: f64, c: f64, n: usize) -> PyResult<PyMinimizerResult> {
    let inner = match kernel.inner {
        AnalyticGraphon::Constant { p } => el_solve_constant(p, epsilon, c, n),
        AnalyticGraphon::Bipartite { a } => closed_form_bipartite(a, epsilon, n, c),
        AnalyticGraphon::Community { a } => closed_form_community(a, epsilon, n, c),
        other => Err(Error::Precondition(format!("no closed form for the {} kernel", other.name()))),
    }
    .py()?;
    Ok(PyMinimizerResult { inner })
}

// ---------- sweeps ----------

#[pyclass(name = "SweepResult", module = "graphon_gl", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct PySweepResult {
    inner: SweepResult,
}

#[pymethods]
impl PySweepResult {
    #[getter]
    fn parameters(&self) -> Vec<f64> {
        self.inner.points.iter().map(|p| p.parameter).collect()
    }

    #[getter]
    fn energies(&self) -> Vec<f64> {
        self.inner.points.iter().map(|p| p.energy).collect()
    }

    #[getter]
    fn reference_energies(&self) -> Vec<f64> {
        self.inner.points.iter().map(|p| p.reference_energy).collect()
    }

    #[getter]
    fn gaps(&self) -> Vec<f64> {
        self.inner.gaps()
    }

    #[getter]
    fn narrow_distances(&self) -> Vec<f64> {
        self.inner.narrow_distances()
    }

    #[getter]
    fn max_abs(&self) -> Vec<f64> {
        self.inner.points.iter().map(|p| p.diagnostics.max_abs).collect()
    }

    #[getter]
    fn deviations(&self) -> Vec<f64> {
        self.inner.points.iter().map(|p| p.diagnostics.deviation).collect()
    }

    #[getter]
    fn fitted_c(&self) -> Option<f64> {
        self.inner.fitted_c
    }

    #[getter]
    fn reference(&self) -> String {
        self.inner.reference.description.clone()
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.inner).map_err(json_err)
    }

    fn __repr__(&self) -> String {
        format!("SweepResult(points={})", self.inner.points.len())
    }
}

fn sweep_options(restarts: usize, seed: u64, reference_cells: usize) -> SweepOptions {
    SweepOptions {
        restarts,
        seed,
        reference_cells,
        ..SweepOptions::default()
    }
}

/// Graph minimizers at increasing `ns` against the graphon reference.
#[pyfunction]
#[pyo3(signature = (kernel, epsilon, c, ns, functional="gl", restarts=8, seed=0, reference_cells=32))]
#[allow(clippy::too_many_arguments)]
fn n_sweep(
    py: Python<'_>,
    kernel: &PyAnalyticGraphon,
    epsilon: f64,
    c: f64,
    ns: Vec<usize>,
    functional: &str,
    restarts: usize,
    seed: u64,
    reference_cells: usize,
) -> PyResult<PySweepResult> {
    let f = match functional {
        "gl" => SweepFunctional::Gl,
        "tv" => SweepFunctional::Tv,
        other => return Err(GraphonError::new_err(format!("unknown functional '{other}'"))),
    };
    let opts = sweep_options(restarts, seed, reference_cells);
    let w = kernel.inner;
    let inner = py.detach(|| limits::run_n_sweep(&w, epsilon, c, &ns, f, &opts)).py()?;
    Ok(PySweepResult { inner })
}

/// GL minimizers at strictly decreasing `epsilons`.
#[pyfunction]
#[pyo3(signature = (kernel, cells, c, epsilons, level="graph", restarts=8, seed=0))]
#[allow(clippy::too_many_arguments)]
fn eps_sweep(
    py: Python<'_>,
    kernel: KernelArg,
    cells: usize,
    c: f64,
    epsilons: Vec<f64>,
    level: &str,
    restarts: usize,
    seed: u64,
) -> PyResult<PySweepResult> {
    let level = match level {
        "graph" => SweepLevel::Graph,
        "graphon" => SweepLevel::Graphon,
        other => return Err(GraphonError::new_err(format!("unknown level '{other}'"))),
    };
    let opts = sweep_options(restarts, seed, SweepOptions::default().reference_cells);
    let g = kernel.graphon();
    let inner = py
        .detach(|| limits::run_eps_sweep(&g, cells, c, &epsilons, level, &opts))
        .py()?;
    Ok(PySweepResult { inner })
}

/// Sign thresholding `u ↦ sign(u)` with `sign(0) = 1`.
#[pyfunction]
fn threshold(values: Vec<f64>) -> PyResult<Vec<f64>> {
    Ok(limits::threshold(&state_of(values)?).into_values())
}

/// State of a minimizer as a Young measure (delta measure for step states).
#[pyfunction]
fn as_measure(result: &PyMinimizerResult) -> PyYoungMeasure {
    let inner = match &result.inner.state {
        State::Step(u) => delta_from_function(u),
        State::Young(y) => y.clone(),
    };
    PyYoungMeasure { inner }
}

#[pymodule]
#[pyo3(name = "graphon_gl")]
fn graphon_gl_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("GraphonError", m.py().get_type::<GraphonError>())?;
    m.add_class::<PyStepGraphon>()?;
    m.add_class::<PyAnalyticGraphon>()?;
    m.add_class::<PyYoungMeasure>()?;
    m.add_class::<PyEnergyReport>()?;
    m.add_class::<PyCutNorm>()?;
    m.add_class::<PyMinimizerResult>()?;
    m.add_class::<PySweepResult>()?;
    m.add_function(wrap_pyfunction!(double_well, m)?)?;
    m.add_function(wrap_pyfunction!(graph_dirichlet, m)?)?;
    m.add_function(wrap_pyfunction!(graph_gl, m)?)?;
    m.add_function(wrap_pyfunction!(graph_tv, m)?)?;
    m.add_function(wrap_pyfunction!(graphon_dirichlet, m)?)?;
    m.add_function(wrap_pyfunction!(graphon_gl_energy, m)?)?;
    m.add_function(wrap_pyfunction!(graphon_tv, m)?)?;
    m.add_function(wrap_pyfunction!(cut_norm, m)?)?;
    m.add_function(wrap_pyfunction!(minimize, m)?)?;
    m.add_function(wrap_pyfunction!(closed_form, m)?)?;
    m.add_function(wrap_pyfunction!(n_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(eps_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(threshold, m)?)?;
    m.add_function(wrap_pyfunction!(as_measure, m)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cut_norm_dispatch() {
        let w = PyStepGraphon {
            inner: sample_step_graphon_with(&AnalyticGraphon::Constant { p: 1.0 }, 8, Sampling::RightEndpoint)
                .unwrap(),
        };
        let e = cut_norm(&w, "auto", None, 10, 0).unwrap();
        assert_eq!((e.form, e.exact), ("subset", true));
        assert!((e.value - 0.25).abs() < 1e-12);
        let b = cut_norm(&w, "heuristic", None, 10, 0).unwrap();
        assert_eq!(b.form, "bilinear");
        assert!((b.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn energy_report_value() {
        let r: PyEnergyReport = EnergyReport::infinite().into();
        assert_eq!(r.value(), f64::INFINITY);
        let r: PyEnergyReport = EnergyReport::gl(0.5, 0.25, 0.1).into();
        assert_eq!((r.value(), r.epsilon), (0.75, Some(0.1)));
    }
}
