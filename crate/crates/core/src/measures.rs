//! States acted on by the functionals: step functions on `n` cells and
//! Young measures discretized on `m` cells.

use serde::{Deserialize, Serialize};

use crate::error::{validation, Error, Result};

/// Tolerance for per-cell probability weights summing to one.
pub const PROBABILITY_TOL: f64 = 1e-12;

/// Default number of shared atoms for grid-weight laws.
pub const DEFAULT_GRID_ATOMS: usize = 41;

/// A function constant on the cells `I_i = [i/n, (i+1)/n)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct StepFunction {
    values: Vec<f64>,
}

impl TryFrom<Vec<f64>> for StepFunction {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<StepFunction> for Vec<f64> {
    fn from(u: StepFunction) -> Self {
        u.values
    }
}

impl StepFunction {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(validation("step function needs at least one cell"));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(validation(format!("value at cell {} is not finite", i + 1)));
        }
        Ok(Self { values })
    }

    pub fn constant(n: usize, c: f64) -> Result<Self> {
        Self::new(vec![c; n])
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.values[crate::graphon::cell_index(x, self.n())]
    }

    /// Every value is exactly `±1`.
    pub fn is_binary(&self) -> bool {
        self.values.iter().all(|&v| v == 1.0 || v == -1.0)
    }

    /// `(1/n) Σ u_i`.
    pub fn volume(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.n() as f64
    }

    pub fn negated(&self) -> Self {
        Self {
            values: self.values.iter().map(|v| -v).collect(),
        }
    }

    /// Values sorted ascending, for permutation-invariant comparisons.
    pub fn sorted_values(&self) -> Vec<f64> {
        let mut v = self.values.clone();
        v.sort_by(f64::total_cmp);
        v
    }
}

/// Componentwise clamp of `u` to `[−M, M]`, defined for `M > 1`.
pub fn truncate(u: &StepFunction, m: f64) -> Result<StepFunction> {
    if !(m > 1.0) || !m.is_finite() {
        return Err(validation(format!("truncation level M = {m} must exceed 1")));
    }
    Ok(StepFunction {
        values: u.values.iter().map(|v| v.clamp(-m, m)).collect(),
    })
}

/// The law `ν_x` on one cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum CellLaw {
    Delta { value: f64 },
    /// `θ δ_a + (1 − θ) δ_b`.
    TwoAtom { a: f64, b: f64, theta: f64 },
    /// Weights over the measure's shared grid atoms.
    Grid { weights: Vec<f64> },
}

/// A Young measure on `(0,1)` that is constant on `m` equal cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "YoungMeasureRepr", into = "YoungMeasureRepr")]
pub struct YoungMeasure {
    laws: Vec<CellLaw>,
    grid_atoms: Option<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct YoungMeasureRepr {
    cells: usize,
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    grid_atoms: Option<Vec<f64>>,
    laws: Vec<CellLaw>,
}

impl TryFrom<YoungMeasureRepr> for YoungMeasure {
    type Error = Error;
    fn try_from(r: YoungMeasureRepr) -> Result<Self> {
        if r.cells != r.laws.len() {
            return Err(Error::SizeMismatch {
                what: "Young measure laws",
                expected: r.cells,
                got: r.laws.len(),
            });
        }
        let ym = YoungMeasure::new(r.laws, r.grid_atoms)?;
        if ym.kind() != r.kind {
            return Err(validation(format!(
                "declared kind '{}' does not match laws (found '{}')",
                r.kind,
                ym.kind()
            )));
        }
        Ok(ym)
    }
}

impl From<YoungMeasure> for YoungMeasureRepr {
    fn from(y: YoungMeasure) -> Self {
        YoungMeasureRepr {
            cells: y.cells(),
            kind: y.kind().to_string(),
            grid_atoms: y.grid_atoms,
            laws: y.laws,
        }
    }
}

/// First, second and fourth moments of `ν_x` per cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentProfile {
    pub m1: Vec<f64>,
    pub m2: Vec<f64>,
    pub m4: Vec<f64>,
}

impl MomentProfile {
    pub fn cells(&self) -> usize {
        self.m1.len()
    }
}

/// `K` uniformly spaced atoms on `[−1, 1]`.
pub fn uniform_grid(k: usize) -> Result<Vec<f64>> {
    if k < 2 {
        return Err(validation("grid needs at least two atoms"));
    }
    let h = 2.0 / (k - 1) as f64;
    Ok((0..k).map(|i| -1.0 + h * i as f64).collect())
}

impl YoungMeasure {
    /// Validates every law; `grid_atoms` is required iff some law is `Grid`.
    pub fn new(laws: Vec<CellLaw>, grid_atoms: Option<Vec<f64>>) -> Result<Self> {
        if laws.is_empty() {
            return Err(validation("Young measure needs at least one cell"));
        }
        if let Some(atoms) = &grid_atoms {
            if atoms.is_empty() || atoms.iter().any(|a| !a.is_finite()) {
                return Err(validation("grid atoms must be a nonempty list of finite reals"));
            }
        }
        for (i, law) in laws.iter().enumerate() {
            let cell = i + 1;
            match law {
                CellLaw::Delta { value } => {
                    if !value.is_finite() {
                        return Err(validation(format!("cell {cell}: delta value is not finite")));
                    }
                }
                CellLaw::TwoAtom { a, b, theta } => {
                    if !a.is_finite() || !b.is_finite() {
                        return Err(validation(format!("cell {cell}: atoms must be finite")));
                    }
                    if !(0.0..=1.0).contains(theta) {
                        return Err(validation(format!(
                            "cell {cell}: theta = {theta} must lie in [0, 1]"
                        )));
                    }
                }
                CellLaw::Grid { weights } => {
                    let atoms = grid_atoms.as_ref().ok_or_else(|| {
                        validation(format!("cell {cell}: grid law without grid_atoms"))
                    })?;
                    if weights.len() != atoms.len() {
                        return Err(Error::SizeMismatch {
                            what: "grid weights",
                            expected: atoms.len(),
                            got: weights.len(),
                        });
                    }
                    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
                        return Err(validation(format!(
                            "cell {cell}: grid weights must be finite and nonnegative"
                        )));
                    }
                    let s: f64 = weights.iter().sum();
                    if (s - 1.0).abs() > PROBABILITY_TOL {
                        return Err(validation(format!(
                            "cell {cell}: grid weights sum to {s}, expected 1"
                        )));
                    }
                }
            }
        }
        Ok(Self { laws, grid_atoms })
    }

    /// Same law on every one of `m` cells.
    pub fn uniform(m: usize, law: CellLaw, grid_atoms: Option<Vec<f64>>) -> Result<Self> {
        Self::new(vec![law; m], grid_atoms)
    }

    pub fn two_atom(m: usize, a: f64, b: f64, theta: f64) -> Result<Self> {
        Self::uniform(m, CellLaw::TwoAtom { a, b, theta }, None)
    }

    pub fn cells(&self) -> usize {
        self.laws.len()
    }

    pub fn laws(&self) -> &[CellLaw] {
        &self.laws
    }

    pub fn grid_atoms(&self) -> Option<&[f64]> {
        self.grid_atoms.as_deref()
    }

    /// `"delta"`, `"two_atom"`, `"grid"`, or `"mixed"`.
    pub fn kind(&self) -> &'static str {
        let tag = |l: &CellLaw| match l {
            CellLaw::Delta { .. } => "delta",
            CellLaw::TwoAtom { .. } => "two_atom",
            CellLaw::Grid { .. } => "grid",
        };
        let first = tag(&self.laws[0]);
        if self.laws.iter().all(|l| tag(l) == first) {
            first
        } else {
            "mixed"
        }
    }

    /// Atoms of cell `i` with positive weight, as `(value, weight)` pairs.
    pub fn support(&self, i: usize) -> Vec<(f64, f64)> {
        match &self.laws[i] {
            CellLaw::Delta { value } => vec![(*value, 1.0)],
            CellLaw::TwoAtom { a, b, theta } => {
                let mut s = Vec::with_capacity(2);
                if *theta > 0.0 {
                    s.push((*a, *theta));
                }
                if *theta < 1.0 {
                    s.push((*b, 1.0 - theta));
                }
                s
            }
            CellLaw::Grid { weights } => {
                let atoms = self.grid_atoms.as_ref().expect("validated");
                atoms
                    .iter()
                    .zip(weights)
                    .filter(|(_, &w)| w > 0.0)
                    .map(|(&a, &w)| (a, w))
                    .collect()
            }
        }
    }

    /// `∫ λ^k dν_i(λ)`.
    pub fn moment(&self, i: usize, k: u32) -> f64 {
        match &self.laws[i] {
            CellLaw::Delta { value } => pow(*value, k),
            CellLaw::TwoAtom { a, b, theta } => theta * pow(*a, k) + (1.0 - theta) * pow(*b, k),
            CellLaw::Grid { .. } => self.support(i).iter().map(|(a, w)| w * pow(*a, k)).sum(),
        }
    }

    pub fn moments(&self) -> MomentProfile {
        let m = self.cells();
        MomentProfile {
            m1: (0..m).map(|i| self.moment(i, 1)).collect(),
            m2: (0..m).map(|i| self.moment(i, 2)).collect(),
            m4: (0..m).map(|i| self.moment(i, 4)).collect(),
        }
    }

    /// `∫∫ λ dν_x(λ) dx`, the mean of the first moments.
    pub fn volume(&self) -> f64 {
        (0..self.cells()).map(|i| self.moment(i, 1)).sum::<f64>() / self.cells() as f64
    }

    /// All atoms with positive weight lie in `{−1, +1}`.
    pub fn is_binary(&self) -> bool {
        (0..self.cells()).all(|i| self.support(i).iter().all(|(a, _)| *a == 1.0 || *a == -1.0))
    }

    /// Largest `|λ|` over atoms with positive weight.
    pub fn max_abs_atom(&self) -> f64 {
        (0..self.cells())
            .flat_map(|i| self.support(i))
            .map(|(a, _)| a.abs())
            .fold(0.0, f64::max)
    }

    /// Each cell split into `factor` identical cells.
    pub fn refine(&self, factor: usize) -> Result<Self> {
        if factor == 0 {
            return Err(validation("refinement factor must be positive"));
        }
        let laws = self
            .laws
            .iter()
            .flat_map(|l| std::iter::repeat_n(l.clone(), factor))
            .collect();
        Ok(Self {
            laws,
            grid_atoms: self.grid_atoms.clone(),
        })
    }

    /// Re-expresses every law as weights on `atoms`; fails when some atom with
    /// positive weight is not on the grid.
    pub fn to_grid(&self, atoms: &[f64]) -> Result<Self> {
        let laws = (0..self.cells())
            .map(|i| {
                let mut w = vec![0.0; atoms.len()];
                for (v, p) in self.support(i) {
                    let k = atoms.iter().position(|&a| a == v).ok_or_else(|| {
                        validation(format!("cell {}: atom {v} is not on the grid", i + 1))
                    })?;
                    w[k] += p;
                }
                Ok(CellLaw::Grid { weights: w })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(laws, Some(atoms.to_vec()))
    }

    /// Cellwise mixture `t ν¹ + (1 − t) ν²` of two grid measures on the same atoms.
    pub fn mix(&self, other: &Self, t: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&t) {
            return Err(validation(format!("mixing weight t = {t} must lie in [0, 1]")));
        }
        if self.cells() != other.cells() {
            return Err(Error::SizeMismatch {
                what: "Young measure cells",
                expected: self.cells(),
                got: other.cells(),
            });
        }
        let atoms = match (&self.grid_atoms, &other.grid_atoms) {
            (Some(a), Some(b)) if a == b => a.clone(),
            _ => return Err(validation("mixture requires both measures on one atom grid")),
        };
        let (a, b) = (self.to_grid(&atoms)?, other.to_grid(&atoms)?);
        let laws = a
            .laws
            .iter()
            .zip(&b.laws)
            .map(|(x, y)| match (x, y) {
                (CellLaw::Grid { weights: wx }, CellLaw::Grid { weights: wy }) => CellLaw::Grid {
                    weights: wx.iter().zip(wy).map(|(p, q)| t * p + (1.0 - t) * q).collect(),
                },
                _ => unreachable!("to_grid returns grid laws"),
            })
            .collect();
        Self::new(laws, Some(atoms))
    }
}

fn pow(x: f64, k: u32) -> f64 {
    match k {
        0 => 1.0,
        1 => x,
        2 => x * x,
        4 => {
            let s = x * x;
            s * s
        }
        _ => x.powi(k as i32),
    }
}

/// `δ_{u(x)}` on the cells of `u`.
pub fn delta_from_function(u: &StepFunction) -> YoungMeasure {
    YoungMeasure {
        laws: u.values.iter().map(|&value| CellLaw::Delta { value }).collect(),
        grid_atoms: None,
    }
}

/// Half-open dyadic interval `[lo, hi)`; the first `count` in breadth-first order.
pub fn dyadic_probes(count: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(count);
    let mut level = 0u32;
    while out.len() < count {
        let k = 1usize << level;
        for j in 0..k {
            if out.len() == count {
                break;
            }
            out.push((j as f64 / k as f64, (j + 1) as f64 / k as f64));
        }
        level += 1;
    }
    out
}

/// `∫_lo^hi ∫ λ^k dν_x dx`, with exact cell overlaps.
fn probe_integral(nu: &YoungMeasure, k: u32, lo: f64, hi: f64) -> f64 {
    let m = nu.cells();
    let h = 1.0 / m as f64;
    let first = crate::graphon::cell_index(lo, m);
    let mut s = 0.0;
    for i in first..m {
        let (a, b) = (i as f64 * h, (i + 1) as f64 * h);
        if a >= hi {
            break;
        }
        let len = b.min(hi) - a.max(lo);
        if len > 0.0 {
            s += len * nu.moment(i, k);
        }
    }
    s
}

/// Finite-dictionary pseudometric for narrow convergence: the largest
/// `|∫ψ(x) (∫λ^k dν¹_x − ∫λ^k dν²_x) dx|` over `k = 1..=test_degree` and the
/// first `probes` dyadic indicators `ψ`. Cell counts may differ.
pub fn narrow_pseudometric(
    nu1: &YoungMeasure,
    nu2: &YoungMeasure,
    test_degree: u32,
    probes: usize,
) -> f64 {
    let mut d = 0.0f64;
    for (lo, hi) in dyadic_probes(probes) {
        for k in 1..=test_degree {
            let v = probe_integral(nu1, k, lo, hi) - probe_integral(nu2, k, lo, hi);
            d = d.max(v.abs());
        }
    }
    d
}

/// [`narrow_pseudometric`] with degree 4 and 8 probes.
pub fn narrow_distance(nu1: &YoungMeasure, nu2: &YoungMeasure) -> f64 {
    narrow_pseudometric(nu1, nu2, 4, 8)
}
