//! Graphons as kernels on `(0,1)²`.
//!
//! A [`StepGraphon`] is the kernel of a finite weighted graph: node `i`
//! (0-based here) owns the cell `I_i = [i/n, (i+1)/n)` and the kernel takes the
//! value `A_ij` on `I_i × I_j`. An [`AnalyticGraphon`] is one of a few named
//! families evaluated pointwise.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{validation, Error, Result};

/// Absolute tolerance used when checking symmetry of ingested matrices.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Default diagonal clamp for [`AnalyticGraphon::PowerKernel`].
pub const DEFAULT_POWER_CAP: f64 = 1e6;

/// Default midpoint-rule resolution for integrals of analytic graphons.
pub const DEFAULT_QUADRATURE: usize = 1024;

/// Kernel of a finite weighted graph, constant on an `n × n` grid of cells.
///
/// Entries are symmetric. Kernels built through [`StepGraphon::from_adjacency`]
/// are nonnegative; signed kernels arise only as differences of graphons
/// ([`StepGraphon::difference`]) for cut-distance computations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepGraphon {
    n: usize,
    weights: Vec<f64>,
}

impl StepGraphon {
    /// Builds a step graphon from a dense adjacency matrix.
    ///
    /// Rows must form a square matrix of finite nonnegative entries that is
    /// symmetric within [`SYMMETRY_TOL`]; near-symmetric pairs are averaged so
    /// that the stored kernel is exactly symmetric.
    pub fn from_adjacency(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(validation("adjacency matrix is empty"));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(validation(format!(
                    "adjacency matrix is not square: row {} has {} entries, expected {}",
                    i + 1,
                    row.len(),
                    n
                )));
            }
            for (j, &w) in row.iter().enumerate() {
                if !w.is_finite() || w < 0.0 {
                    return Err(validation(format!(
                        "entry ({}, {}) = {} must be finite and nonnegative",
                        i + 1,
                        j + 1,
                        w
                    )));
                }
            }
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        Self::from_flat(n, flat)
    }

    /// Builds a (possibly signed) symmetric kernel from row-major entries.
    pub fn from_flat(n: usize, mut weights: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(validation("step graphon needs n >= 1"));
        }
        if weights.len() != n * n {
            return Err(Error::SizeMismatch {
                what: "step graphon entries",
                expected: n * n,
                got: weights.len(),
            });
        }
        if let Some(k) = weights.iter().position(|w| !w.is_finite()) {
            return Err(validation(format!(
                "entry ({}, {}) is not finite",
                k / n + 1,
                k % n + 1
            )));
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let (a, b) = (weights[i * n + j], weights[j * n + i]);
                if (a - b).abs() > SYMMETRY_TOL {
                    return Err(Error::Asymmetric {
                        i: i + 1,
                        j: j + 1,
                        a,
                        b,
                    });
                }
                if a != b {
                    let m = 0.5 * (a + b);
                    weights[i * n + j] = m;
                    weights[j * n + i] = m;
                }
            }
        }
        Ok(Self { n, weights })
    }

    /// The zero kernel on `n` cells.
    pub fn zeros(n: usize) -> Result<Self> {
        Self::from_flat(n, vec![0.0; n * n])
    }

    /// Signed difference kernel `a − b` at a common resolution.
    pub fn difference(a: &StepGraphon, b: &StepGraphon) -> Result<Self> {
        if a.n != b.n {
            return Err(Error::SizeMismatch {
                what: "kernel resolution",
                expected: a.n,
                got: b.n,
            });
        }
        let w = a.weights.iter().zip(&b.weights).map(|(x, y)| x - y).collect();
        Ok(Self { n: a.n, weights: w })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Row-major entries.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.weights[i * self.n + j]
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.weights[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.n).map(|i| self.row(i).to_vec()).collect()
    }

    /// Cell index of `x ∈ [0,1)`; `x = 1` maps to the last cell.
    pub fn cell_of(&self, x: f64) -> usize {
        cell_index(x, self.n)
    }

    /// Pointwise evaluation `W_n(x, y)`.
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.get(self.cell_of(x), self.cell_of(y))
    }

    /// True when entries are nonnegative and the diagonal vanishes.
    pub fn is_simple(&self) -> bool {
        self.weights.iter().all(|&w| w >= 0.0) && (0..self.n).all(|i| self.get(i, i) == 0.0)
    }

    pub fn is_nonnegative(&self) -> bool {
        self.weights.iter().all(|&w| w >= 0.0)
    }

    /// `c · W` for `c ≥ 0` (or any real `c` for signed kernels).
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            n: self.n,
            weights: self.weights.iter().map(|w| c * w).collect(),
        }
    }

    /// Same kernel on the refined grid of `factor · n` cells.
    pub fn refine(&self, factor: usize) -> Result<Self> {
        if factor == 0 {
            return Err(validation("refinement factor must be positive"));
        }
        let m = self.n * factor;
        let mut w = vec![0.0; m * m];
        for i in 0..m {
            for j in 0..m {
                w[i * m + j] = self.get(i / factor, j / factor);
            }
        }
        Ok(Self { n: m, weights: w })
    }

    /// Row sums `Σ_j A_ij`.
    pub fn degrees(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.row(i).iter().sum()).collect()
    }

    /// Exact `L^p` norm `(n^{-2} Σ |A_ij|^p)^{1/p}`.
    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        check_p(p)?;
        let n2 = (self.n * self.n) as f64;
        let s: f64 = self.weights.iter().map(|w| w.abs().powf(p)).sum();
        Ok((s / n2).powf(1.0 / p))
    }

    /// SHA-256 of the resolution and the IEEE-754 bit patterns of the entries.
    pub fn content_hash(&self) -> String {
        let mut h = Sha256::new();
        h.update((self.n as u64).to_le_bytes());
        for w in &self.weights {
            h.update(w.to_bits().to_le_bytes());
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Where an analytic graphon is evaluated when sampled on an `n`-grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sampling {
    /// `A_ij = W(i/n, j/n)` with 1-based `i, j`.
    #[default]
    RightEndpoint,
    /// `A_ij = W((i − ½)/n, (j − ½)/n)` with 1-based `i, j`.
    Midpoint,
}

impl Sampling {
    fn point(self, i: usize, n: usize) -> f64 {
        match self {
            Sampling::RightEndpoint => (i + 1) as f64 / n as f64,
            Sampling::Midpoint => (i as f64 + 0.5) / n as f64,
        }
    }
}

/// Named graphon families.
///
/// Block families place the boundary at `split`/`a` with blocks `(0, a]` and
/// `(a, 1)`, so that right-endpoint sampling puts node `i` in the block that
/// contains its cell `I_i` whenever `a·n` is an integer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case", deny_unknown_fields)]
pub enum AnalyticGraphon {
    Constant {
        p: f64,
    },
    Sbm2x2 {
        a11: f64,
        a12: f64,
        a22: f64,
        split: f64,
    },
    /// Complete bipartite graphon: 1 across the split, 0 within blocks.
    Bipartite {
        a: f64,
    },
    /// Complete community-structure graphon: 1 within blocks, 0 across.
    Community {
        a: f64,
    },
    /// `min(|x − y|^{−(1+2s)}, cap)`.
    PowerKernel {
        s: f64,
        #[serde(default = "default_cap")]
        cap: f64,
    },
}

fn default_cap() -> f64 {
    DEFAULT_POWER_CAP
}

impl AnalyticGraphon {
    pub fn validate(&self) -> Result<()> {
        let unit = |name: &str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(validation(format!("{name} = {v} must lie in [0, 1]")))
            }
        };
        let open = |name: &str, v: f64| {
            if v > 0.0 && v < 1.0 {
                Ok(())
            } else {
                Err(validation(format!("{name} = {v} must lie in (0, 1)")))
            }
        };
        match *self {
            AnalyticGraphon::Constant { p } => unit("p", p),
            AnalyticGraphon::Sbm2x2 {
                a11,
                a12,
                a22,
                split,
            } => {
                unit("a11", a11)?;
                unit("a12", a12)?;
                unit("a22", a22)?;
                open("split", split)
            }
            AnalyticGraphon::Bipartite { a } | AnalyticGraphon::Community { a } => open("a", a),
            AnalyticGraphon::PowerKernel { s, cap } => {
                open("s", s)?;
                if cap.is_finite() && cap > 0.0 {
                    Ok(())
                } else {
                    Err(validation(format!("cap = {cap} must be positive and finite")))
                }
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            AnalyticGraphon::Constant { .. } => "constant",
            AnalyticGraphon::Sbm2x2 { .. } => "sbm2x2",
            AnalyticGraphon::Bipartite { .. } => "bipartite",
            AnalyticGraphon::Community { .. } => "community",
            AnalyticGraphon::PowerKernel { .. } => "power_kernel",
        }
    }

    /// Pointwise evaluation; symmetric in `(x, y)` by construction.
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        match *self {
            AnalyticGraphon::Constant { p } => p,
            AnalyticGraphon::Sbm2x2 {
                a11,
                a12,
                a22,
                split,
            } => match (x <= split, y <= split) {
                (true, true) => a11,
                (false, false) => a22,
                _ => a12,
            },
            AnalyticGraphon::Bipartite { a } => {
                if (x <= a) != (y <= a) {
                    1.0
                } else {
                    0.0
                }
            }
            AnalyticGraphon::Community { a } => {
                if (x <= a) == (y <= a) {
                    1.0
                } else {
                    0.0
                }
            }
            AnalyticGraphon::PowerKernel { s, cap } => {
                let d = (x - y).abs();
                if d == 0.0 {
                    cap
                } else {
                    d.powf(-(1.0 + 2.0 * s)).min(cap)
                }
            }
        }
    }

    pub fn is_bounded_by(&self, bound: f64) -> bool {
        match *self {
            AnalyticGraphon::PowerKernel { cap, .. } => cap <= bound,
            _ => true,
        }
    }

    /// Midpoint-rule `L^p` norm on a `resolution × resolution` grid.
    pub fn lp_norm_with(&self, p: f64, resolution: usize) -> Result<f64> {
        check_p(p)?;
        if resolution == 0 {
            return Err(validation("quadrature resolution must be positive"));
        }
        let h = 1.0 / resolution as f64;
        let mut s = 0.0;
        for i in 0..resolution {
            let x = (i as f64 + 0.5) * h;
            let mut row = 0.0;
            for j in 0..resolution {
                let y = (j as f64 + 0.5) * h;
                row += self.eval(x, y).abs().powf(p);
            }
            s += row;
        }
        Ok((s * h * h).powf(1.0 / p))
    }

    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        self.lp_norm_with(p, DEFAULT_QUADRATURE)
    }
}

/// Samples `W` on an `n`-grid: `A_ij = W(i/n, j/n)` with 1-based indices.
pub fn sample_step_graphon(w: &AnalyticGraphon, n: usize) -> Result<StepGraphon> {
    sample_step_graphon_with(w, n, Sampling::RightEndpoint)
}

pub fn sample_step_graphon_with(
    w: &AnalyticGraphon,
    n: usize,
    sampling: Sampling,
) -> Result<StepGraphon> {
    w.validate()?;
    if n == 0 {
        return Err(validation("sampling resolution n must be >= 1"));
    }
    let pts: Vec<f64> = (0..n).map(|i| sampling.point(i, n)).collect();
    let mut weights = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let v = w.eval(pts[i], pts[j]);
            weights[i * n + j] = v;
            weights[j * n + i] = v;
        }
    }
    StepGraphon::from_flat(n, weights)
}

/// Either kind of graphon, as accepted by the graphon functionals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Graphon {
    Step(StepGraphon),
    Analytic(AnalyticGraphon),
}

impl From<StepGraphon> for Graphon {
    fn from(w: StepGraphon) -> Self {
        Graphon::Step(w)
    }
}

impl From<AnalyticGraphon> for Graphon {
    fn from(w: AnalyticGraphon) -> Self {
        Graphon::Analytic(w)
    }
}

impl Graphon {
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        match self {
            Graphon::Step(w) => w.eval(x, y),
            Graphon::Analytic(w) => w.eval(x, y),
        }
    }

    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        match self {
            Graphon::Step(w) => w.lp_norm(p),
            Graphon::Analytic(w) => w.lp_norm(p),
        }
    }

    /// Renders the graphon on `n` cells: steps must already have `n` cells,
    /// analytic graphons are sampled.
    pub fn at_resolution(&self, n: usize) -> Result<StepGraphon> {
        match self {
            Graphon::Step(w) if w.n() == n => Ok(w.clone()),
            Graphon::Step(w) => Err(Error::SizeMismatch {
                what: "kernel resolution",
                expected: n,
                got: w.n(),
            }),
            Graphon::Analytic(w) => sample_step_graphon(w, n),
        }
    }

    /// `m × m` matrix of cell averages `m² ∬_{J_x × J_y} W` over the uniform
    /// partition into `m` cells.
    ///
    /// Exact for step graphons at any `m` (common refinement). Analytic
    /// graphons use the midpoint rule with `sub × sub` points per cell pair.
    pub fn cell_averages(&self, m: usize, sub: usize) -> Result<Vec<f64>> {
        if m == 0 || sub == 0 {
            return Err(validation("cell count and quadrature points must be positive"));
        }
        match self {
            Graphon::Step(w) => Ok(step_cell_averages(w, m)),
            Graphon::Analytic(w) => {
                w.validate()?;
                let h = 1.0 / (m * sub) as f64;
                let pts: Vec<f64> = (0..m * sub).map(|k| (k as f64 + 0.5) * h).collect();
                let norm = 1.0 / (sub * sub) as f64;
                let mut out = vec![0.0; m * m];
                for x in 0..m {
                    for y in x..m {
                        let mut s = 0.0;
                        for px in &pts[x * sub..(x + 1) * sub] {
                            for py in &pts[y * sub..(y + 1) * sub] {
                                s += w.eval(*px, *py);
                            }
                        }
                        out[x * m + y] = s * norm;
                        out[y * m + x] = s * norm;
                    }
                }
                Ok(out)
            }
        }
    }
}

fn step_cell_averages(w: &StepGraphon, m: usize) -> Vec<f64> {
    let n = w.n();
    if m == n {
        return w.weights().to_vec();
    }
    // overlap[x] = list of (i, |J_x ∩ I_i| · m), weights summing to 1
    let overlap: Vec<Vec<(usize, f64)>> = (0..m)
        .map(|x| {
            let (lo, hi) = (x * n, (x + 1) * n);
            let first = lo / m;
            let last = (hi - 1) / m;
            (first..=last)
                .filter_map(|i| {
                    let a = lo.max(i * m);
                    let b = hi.min((i + 1) * m);
                    (b > a).then(|| (i, (b - a) as f64 / n as f64))
                })
                .collect()
        })
        .collect();
    let mut out = vec![0.0; m * m];
    for x in 0..m {
        for y in x..m {
            let mut s = 0.0;
            for &(i, wi) in &overlap[x] {
                let row = w.row(i);
                for &(j, wj) in &overlap[y] {
                    s += wi * wj * row[j];
                }
            }
            out[x * m + y] = s;
            out[y * m + x] = s;
        }
    }
    out
}

pub(crate) fn cell_index(x: f64, n: usize) -> usize {
    let k = (x * n as f64).floor();
    if k < 0.0 {
        0
    } else {
        (k as usize).min(n - 1)
    }
}

fn check_p(p: f64) -> Result<()> {
    if p.is_finite() && p >= 1.0 {
        Ok(())
    } else {
        Err(validation(format!("p = {p} must satisfy p >= 1")))
    }
}

/// Adjacency matrix of the 4-cycle 1–2–3–4–1.
pub fn four_cycle() -> StepGraphon {
    StepGraphon::from_adjacency(&[
        vec![0.0, 1.0, 0.0, 1.0],
        vec![1.0, 0.0, 1.0, 0.0],
        vec![0.0, 1.0, 0.0, 1.0],
        vec![1.0, 0.0, 1.0, 0.0],
    ])
    .expect("4-cycle is a valid adjacency matrix")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    #[test]
    fn four_cycle_from_adjacency() {
        let w = four_cycle();
        for (i, j) in [(0, 1), (1, 2), (2, 3), (3, 0)] {
            assert_eq!(w.get(i, j), 1.0);
            assert_eq!(w.get(j, i), 1.0);
        }
        assert_eq!(w.weights().iter().sum::<f64>(), 8.0);
        assert!(w.is_simple());
        // evaluation on cells I_1 × I_2
        assert_eq!(w.eval(0.1, 0.3), 1.0);
        assert_eq!(w.eval(0.1, 0.6), 0.0);
    }

    #[test]
    fn single_zero_entry() {
        let w = StepGraphon::from_adjacency(&[vec![0.0]]).unwrap();
        assert_eq!(w.n(), 1);
        assert_eq!(w.eval(0.3, 0.9), 0.0);
    }

    #[test]
    fn asymmetric_rejected_naming_pair() {
        let err = StepGraphon::from_adjacency(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap_err();
        match err {
            Error::Asymmetric { i, j, .. } => assert_eq!((i, j), (1, 2)),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn non_square_and_negative_rejected() {
        assert!(StepGraphon::from_adjacency(&[vec![0.0, 1.0]]).is_err());
        assert!(StepGraphon::from_adjacency(&[vec![0.0, -1.0], vec![-1.0, 0.0]]).is_err());
        assert!(StepGraphon::from_adjacency(&[vec![f64::NAN]]).is_err());
    }

    #[test]
    fn sample_constant() {
        let w = sample_step_graphon(&AnalyticGraphon::Constant { p: 0.5 }, 3).unwrap();
        assert!(w.weights().iter().all(|&x| x == 0.5));
    }

    #[test]
    fn sample_bipartite_n4() {
        let w = sample_step_graphon(&AnalyticGraphon::Bipartite { a: 0.5 }, 4).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let cross = (i < 2) != (j < 2);
                assert_eq!(w.get(i, j), if cross { 1.0 } else { 0.0 }, "({i},{j})");
            }
        }
    }

    #[test]
    fn sample_community_n2() {
        let w = sample_step_graphon(&AnalyticGraphon::Community { a: 0.5 }, 2).unwrap();
        assert_eq!(w.rows(), vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
    }

    #[test]
    fn power_kernel_diagonal_uses_cap() {
        let k = AnalyticGraphon::PowerKernel { s: 0.25, cap: 50.0 };
        let w = sample_step_graphon(&k, 8).unwrap();
        for i in 0..8 {
            assert_eq!(w.get(i, i), 50.0);
        }
        assert_eq!(k.eval(0.0, 0.5), 0.5f64.powf(-1.5));
    }

    #[test]
    fn midpoint_sampling() {
        let w = sample_step_graphon_with(&AnalyticGraphon::Bipartite { a: 0.3 }, 4, Sampling::Midpoint)
            .unwrap();
        // midpoints 0.125, 0.375, ...: only node 1 lies in (0, 0.3]
        assert_eq!(w.get(0, 1), 1.0);
        assert_eq!(w.get(1, 2), 0.0);
    }

    #[test]
    fn lp_norms() {
        let c = AnalyticGraphon::Constant { p: 0.3 };
        assert!((c.lp_norm(1.0).unwrap() - 0.3).abs() < 1e-12);
        assert_eq!(four_cycle().lp_norm(1.0).unwrap(), 0.5);
        let z = StepGraphon::zeros(5).unwrap();
        for p in [1.0, 2.0, 3.5] {
            assert_eq!(z.lp_norm(p).unwrap(), 0.0);
        }
        assert!(four_cycle().lp_norm(0.5).is_err());
        // bipartite(1/2): |W|^p integrates to 1/2 for every p
        let b = AnalyticGraphon::Bipartite { a: 0.5 };
        assert!((b.lp_norm_with(2.0, 256).unwrap() - 0.5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn cell_averages_of_step_match_refinement() {
        let w = four_cycle();
        let g = Graphon::Step(w.clone());
        assert_eq!(g.cell_averages(4, 1).unwrap(), w.weights());
        let fine = g.cell_averages(8, 1).unwrap();
        assert_eq!(fine, w.refine(2).unwrap().weights());
        let coarse = g.cell_averages(2, 1).unwrap();
        // each 2x2 block of the 4-cycle has two ones
        assert!(coarse.iter().all(|&v| (v - 0.5).abs() < 1e-15));
        // non-nested resolutions preserve the integral
        let odd = g.cell_averages(3, 1).unwrap();
        let total: f64 = odd.iter().sum::<f64>() / 9.0;
        assert!((total - 0.5).abs() < 1e-14);
    }

    #[test]
    fn content_hash_is_stable() {
        assert_eq!(four_cycle().content_hash(), four_cycle().content_hash());
        assert_ne!(four_cycle().content_hash(), four_cycle().scaled(2.0).content_hash());
    }

    #[test]
    fn symmetry_on_random_points() {
        let families = [
            AnalyticGraphon::Constant { p: 0.4 },
            AnalyticGraphon::Sbm2x2 {
                a11: 0.9,
                a12: 0.2,
                a22: 0.6,
                split: 0.35,
            },
            AnalyticGraphon::Bipartite { a: 0.4 },
            AnalyticGraphon::Community { a: 0.6 },
            AnalyticGraphon::PowerKernel { s: 0.3, cap: 1e6 },
        ];
        let step = Graphon::Step(sample_step_graphon(&families[1], 7).unwrap());
        let mut rng = crate::rng::stream(11, 0);
        for _ in 0..1000 {
            let (x, y): (f64, f64) = (rng.gen(), rng.gen());
            for f in &families {
                assert_eq!(f.eval(x, y), f.eval(y, x));
            }
            assert_eq!(step.eval(x, y), step.eval(y, x));
        }
    }

    proptest! {
        #[test]
        fn refine_preserves_lp_norm(n in 1usize..6, k in 1usize..4, seed in any::<u64>()) {
            let mut rng = crate::rng::stream(seed, 0);
            let mut w = vec![0.0; n * n];
            for i in 0..n { for j in i..n { let v: f64 = rng.gen(); w[i*n+j] = v; w[j*n+i] = v; } }
            let g = StepGraphon::from_flat(n, w).unwrap();
            let r = g.refine(k).unwrap();
            prop_assert!((g.lp_norm(1.0).unwrap() - r.lp_norm(1.0).unwrap()).abs() < 1e-12);
        }
    }
}
