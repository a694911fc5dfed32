//! Energies on graphs and graphons.
//!
//! Graph functionals act on a [`StepFunction`] over a [`StepGraphon`] with the
//! same number of cells. Graphon functionals act on a [`YoungMeasure`] over any
//! [`Graphon`]; the kernel enters only through its cell averages on the
//! measure's grid (see [`CellKernel`]).

use serde::{Deserialize, Serialize};

use crate::error::{validation, Error, Result};
use crate::graphon::{Graphon, StepGraphon};
use crate::measures::{MomentProfile, StepFunction, YoungMeasure};

/// Value of a functional split into its interaction and potential parts.
///
/// `finite = false` encodes the `+∞` branch of the TV functionals; all
/// numeric fields are then zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub total: f64,
    pub dirichlet_part: f64,
    pub doublewell_part: f64,
    pub epsilon: Option<f64>,
    pub finite: bool,
}

impl EnergyReport {
    pub fn gl(dirichlet: f64, doublewell: f64, epsilon: f64) -> Self {
        Self {
            total: dirichlet + doublewell,
            dirichlet_part: dirichlet,
            doublewell_part: doublewell,
            epsilon: Some(epsilon),
            finite: true,
        }
    }

    pub fn interaction(value: f64) -> Self {
        Self {
            total: value,
            dirichlet_part: value,
            doublewell_part: 0.0,
            epsilon: None,
            finite: true,
        }
    }

    pub fn infinite() -> Self {
        Self {
            total: 0.0,
            dirichlet_part: 0.0,
            doublewell_part: 0.0,
            epsilon: None,
            finite: false,
        }
    }

    /// `total` as an extended real.
    pub fn value(&self) -> f64 {
        if self.finite {
            self.total
        } else {
            f64::INFINITY
        }
    }
}

/// `Φ(s) = (s² − 1)²`.
#[inline]
pub fn double_well(s: f64) -> f64 {
    let t = s * s - 1.0;
    t * t
}

/// `Φ'(s) = 4 s (s² − 1)`.
#[inline]
pub fn double_well_derivative(s: f64) -> f64 {
    4.0 * s * (s * s - 1.0)
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon > 0.0 && epsilon.is_finite() {
        Ok(())
    } else {
        Err(validation(format!("epsilon = {epsilon} must be positive and finite")))
    }
}

fn check_sizes(w: &StepGraphon, u: &StepFunction) -> Result<()> {
    if w.n() == u.n() {
        Ok(())
    } else {
        Err(Error::SizeMismatch {
            what: "state length vs kernel resolution",
            expected: w.n(),
            got: u.n(),
        })
    }
}

/// `Σ_ij A_ij |u_i − u_j|^q` for `q ∈ {1, 2}`.
fn pair_sum(w: &StepGraphon, u: &[f64], squared: bool) -> f64 {
    let mut s = 0.0;
    for (i, &ui) in u.iter().enumerate() {
        let row = w.row(i);
        for (j, &uj) in u.iter().enumerate() {
            let d = ui - uj;
            s += row[j] * if squared { d * d } else { d.abs() };
        }
    }
    s
}

/// `(1/n²) Σ_ij A_ij |u_i − u_j|²`.
pub fn graph_dirichlet(w: &StepGraphon, u: &StepFunction) -> Result<EnergyReport> {
    check_sizes(w, u)?;
    let n = u.n() as f64;
    Ok(EnergyReport::interaction(pair_sum(w, u.values(), true) / (n * n)))
}

/// Graph GL: `(1/n²) Σ_ij A_ij |u_i − u_j|² + (1/(εn)) Σ_i Φ(u_i)`.
pub fn graph_gl(w: &StepGraphon, u: &StepFunction, epsilon: f64) -> Result<EnergyReport> {
    check_epsilon(epsilon)?;
    check_sizes(w, u)?;
    let n = u.n() as f64;
    let dir = pair_sum(w, u.values(), true) / (n * n);
    let dw = u.values().iter().map(|&v| double_well(v)).sum::<f64>() / (epsilon * n);
    Ok(EnergyReport::gl(dir, dw, epsilon))
}

/// Graph GL as integrals of the step graphon `W_n` and the step function `u`
/// over unit-square cells of side `1/n`.
pub fn graph_gl_integral_form(
    w: &StepGraphon,
    u: &StepFunction,
    epsilon: f64,
) -> Result<EnergyReport> {
    check_epsilon(epsilon)?;
    check_sizes(w, u)?;
    let n = u.n();
    let h = 1.0 / n as f64;
    let mut dir = 0.0;
    for x in 0..n {
        let mut row = 0.0;
        for y in 0..n {
            let d = u.eval((x as f64 + 0.5) * h) - u.eval((y as f64 + 0.5) * h);
            row += w.eval((x as f64 + 0.5) * h, (y as f64 + 0.5) * h) * d * d * h;
        }
        dir += row * h;
    }
    let dw: f64 = (0..n).map(|x| double_well(u.eval((x as f64 + 0.5) * h)) * h).sum();
    Ok(EnergyReport::gl(dir, dw / epsilon, epsilon))
}

/// Gradient of [`graph_gl`] with respect to the values `u_k`.
pub fn graph_gl_gradient(w: &StepGraphon, u: &[f64], epsilon: f64) -> Vec<f64> {
    let n = u.len();
    let nf = n as f64;
    let (cd, cw) = (4.0 / (nf * nf), 1.0 / (epsilon * nf));
    (0..n)
        .map(|k| {
            let row = w.row(k);
            let mut s = 0.0;
            for j in 0..n {
                s += row[j] * (u[k] - u[j]);
            }
            cd * s + cw * double_well_derivative(u[k])
        })
        .collect()
}

/// Normalized graph TV `(1/n²) Σ_ij A_ij |u_i − u_j|`, finite only for binary `u`.
pub fn graph_tv(w: &StepGraphon, u: &StepFunction) -> Result<EnergyReport> {
    check_sizes(w, u)?;
    if !u.is_binary() {
        return Ok(EnergyReport::infinite());
    }
    let n = u.n() as f64;
    Ok(EnergyReport::interaction(pair_sum(w, u.values(), false) / (n * n)))
}

/// `Σ_ij A_ij |u_i − u_j|` without the `1/n²` factor, finite only for binary `u`.
pub fn graph_tv_unnormalized(w: &StepGraphon, u: &StepFunction) -> Result<EnergyReport> {
    check_sizes(w, u)?;
    if !u.is_binary() {
        return Ok(EnergyReport::infinite());
    }
    Ok(EnergyReport::interaction(pair_sum(w, u.values(), false)))
}

/// Cell averages of a kernel on the uniform `m`-cell partition.
#[derive(Debug, Clone, PartialEq)]
pub struct CellKernel {
    m: usize,
    k: Vec<f64>,
    degrees: Vec<f64>,
}

impl CellKernel {
    /// `sub` is the number of midpoint-rule points per cell and axis for
    /// analytic kernels; step kernels are averaged exactly.
    pub fn new(w: &Graphon, m: usize, sub: usize) -> Result<Self> {
        let k = w.cell_averages(m, sub)?;
        Ok(Self::from_matrix(m, k))
    }

    fn from_matrix(m: usize, k: Vec<f64>) -> Self {
        let degrees = (0..m).map(|x| k[x * m..(x + 1) * m].iter().sum()).collect();
        Self { m, k, degrees }
    }

    pub fn from_step(w: &StepGraphon) -> Self {
        Self::from_matrix(w.n(), w.weights().to_vec())
    }

    pub fn cells(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn row(&self, x: usize) -> &[f64] {
        &self.k[x * self.m..(x + 1) * self.m]
    }

    /// Row sums of the cell-average matrix.
    pub fn degrees(&self) -> &[f64] {
        &self.degrees
    }

    fn check(&self, nu: &YoungMeasure) -> Result<()> {
        if nu.cells() == self.m {
            Ok(())
        } else {
            Err(Error::SizeMismatch {
                what: "Young measure cells vs kernel cells",
                expected: self.m,
                got: nu.cells(),
            })
        }
    }
}

/// `(1/m²) Σ_xy K_xy E_{ν_x ⊗ ν_y} g(λ − μ)` by direct summation over atom pairs.
fn atom_pair_sum(k: &CellKernel, nu: &YoungMeasure, g: impl Fn(f64) -> f64) -> f64 {
    let m = k.cells();
    let supports: Vec<Vec<(f64, f64)>> = (0..m).map(|x| nu.support(x)).collect();
    let mut s = 0.0;
    for x in 0..m {
        let row = k.row(x);
        for y in 0..m {
            let mut e = 0.0;
            for &(a, wa) in &supports[x] {
                for &(b, wb) in &supports[y] {
                    e += wa * wb * g(a - b);
                }
            }
            s += row[y] * e;
        }
    }
    let mf = m as f64;
    s / (mf * mf)
}

/// Graphon Dirichlet energy on precomputed cell averages, atom-pair route.
pub fn graphon_dirichlet_cells(k: &CellKernel, nu: &YoungMeasure) -> Result<EnergyReport> {
    k.check(nu)?;
    Ok(EnergyReport::interaction(atom_pair_sum(k, nu, |d| d * d)))
}

/// Graphon Dirichlet energy from moments, using
/// `E|λ − μ|² = m2(x) + m2(y) − 2 m1(x) m1(y)`.
pub fn graphon_dirichlet_moments(k: &CellKernel, mp: &MomentProfile) -> Result<f64> {
    let m = k.cells();
    if mp.cells() != m {
        return Err(Error::SizeMismatch {
            what: "moment profile cells vs kernel cells",
            expected: m,
            got: mp.cells(),
        });
    }
    let mut s = 0.0;
    for x in 0..m {
        let row = k.row(x);
        let mut km1 = 0.0;
        for y in 0..m {
            km1 += row[y] * mp.m1[y];
        }
        s += 2.0 * k.degrees()[x] * mp.m2[x] - 2.0 * mp.m1[x] * km1;
    }
    let mf = m as f64;
    Ok(s / (mf * mf))
}

/// `(1/ε) mean_x ∫Φ dν_x`, summed atom by atom.
fn doublewell_cells(nu: &YoungMeasure, epsilon: f64) -> f64 {
    let m = nu.cells();
    let s: f64 = (0..m)
        .map(|x| nu.support(x).iter().map(|&(a, w)| w * double_well(a)).sum::<f64>())
        .sum();
    s / (epsilon * m as f64)
}

/// `(1/ε) mean(m4 − 2 m2 + 1)`.
pub fn doublewell_from_moments(mp: &MomentProfile, epsilon: f64) -> f64 {
    let m = mp.cells();
    let s: f64 = (0..m).map(|x| mp.m4[x] - 2.0 * mp.m2[x] + 1.0).sum();
    s / (epsilon * m as f64)
}

pub fn graphon_gl_cells(k: &CellKernel, nu: &YoungMeasure, epsilon: f64) -> Result<EnergyReport> {
    check_epsilon(epsilon)?;
    let dir = graphon_dirichlet_cells(k, nu)?.total;
    Ok(EnergyReport::gl(dir, doublewell_cells(nu, epsilon), epsilon))
}

pub fn graphon_tv_cells(k: &CellKernel, nu: &YoungMeasure) -> Result<EnergyReport> {
    k.check(nu)?;
    if !nu.is_binary() {
        return Ok(EnergyReport::infinite());
    }
    Ok(EnergyReport::interaction(2.0 * atom_pair_sum(k, nu, f64::abs)))
}

fn cells_for(w: &Graphon, nu: &YoungMeasure) -> Result<CellKernel> {
    CellKernel::new(w, nu.cells(), 1)
}

/// `∬ W(x,y) E_{ν_x⊗ν_y}|λ − μ|² dx dy` (atom-pair route).
pub fn graphon_dirichlet(w: &Graphon, nu: &YoungMeasure) -> Result<EnergyReport> {
    graphon_dirichlet_cells(&cells_for(w, nu)?, nu)
}

/// Graphon GL: graphon Dirichlet energy plus `(1/ε) ∫∫Φ dν_x dx`.
pub fn graphon_gl(w: &Graphon, nu: &YoungMeasure, epsilon: f64) -> Result<EnergyReport> {
    graphon_gl_cells(&cells_for(w, nu)?, nu, epsilon)
}

/// Graphon GL with `sub × sub` midpoint points per cell pair for analytic kernels.
pub fn graphon_gl_quadrature(
    w: &Graphon,
    nu: &YoungMeasure,
    epsilon: f64,
    sub: usize,
) -> Result<EnergyReport> {
    graphon_gl_cells(&CellKernel::new(w, nu.cells(), sub)?, nu, epsilon)
}

/// Graphon TV `2 ∬ W E|λ − μ|`, finite only for binary support.
pub fn graphon_tv(w: &Graphon, nu: &YoungMeasure) -> Result<EnergyReport> {
    graphon_tv_cells(&cells_for(w, nu)?, nu)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphon::{four_cycle, sample_step_graphon, AnalyticGraphon};
    use crate::measures::{delta_from_function, truncate, uniform_grid, CellLaw};
    use proptest::prelude::*;
    use rand::Rng;

    fn sf(v: &[f64]) -> StepFunction {
        StepFunction::new(v.to_vec()).unwrap()
    }

    fn constant(p: f64, n: usize) -> StepGraphon {
        sample_step_graphon(&AnalyticGraphon::Constant { p }, n).unwrap()
    }

    fn random_kernel(n: usize, rng: &mut impl Rng) -> StepGraphon {
        let mut w = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let v: f64 = rng.gen();
                w[i * n + j] = v;
                w[j * n + i] = v;
            }
        }
        StepGraphon::from_flat(n, w).unwrap()
    }

    fn random_measure(m: usize, binary: bool, rng: &mut impl Rng) -> YoungMeasure {
        let atoms = uniform_grid(7).unwrap();
        let pick = |rng: &mut dyn rand::RngCore| -> f64 {
            if binary {
                if rng.gen::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            } else {
                rng.gen_range(-1.5..1.5)
            }
        };
        let laws = (0..m)
            .map(|_| match rng.gen_range(0..3) {
                0 => CellLaw::Delta { value: pick(rng) },
                1 => CellLaw::TwoAtom {
                    a: pick(rng),
                    b: pick(rng),
                    theta: rng.gen(),
                },
                _ => {
                    let w: Vec<f64> = atoms
                        .iter()
                        .map(|&a| if binary && a.abs() != 1.0 { 0.0 } else { rng.gen() })
                        .collect();
                    let s: f64 = w.iter().sum();
                    CellLaw::Grid {
                        weights: w.iter().map(|x| x / s).collect(),
                    }
                }
            })
            .collect();
        YoungMeasure::new(laws, Some(atoms)).unwrap()
    }

    /// Independent oracle: ordered-pair loop over all (i, j).
    fn dirichlet_oracle(a: &[Vec<f64>], u: &[f64]) -> f64 {
        let n = u.len();
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                s += a[i][j] * (u[i] - u[j]).powi(2);
            }
        }
        s / (n * n) as f64
    }

    #[test]
    fn double_well_values() {
        assert_eq!(double_well(1.0), 0.0);
        assert_eq!(double_well(-1.0), 0.0);
        assert_eq!(double_well(0.0), 1.0);
        assert_eq!(double_well(2.0), 9.0);
    }

    #[test]
    fn four_cycle_energies() {
        let w = four_cycle();
        let u = sf(&[1.0, 1.0, -1.0, -1.0]);
        for eps in [0.1, 1.0, 7.0] {
            let r = graph_gl(&w, &u, eps).unwrap();
            assert_eq!((r.total, r.dirichlet_part, r.doublewell_part), (1.0, 1.0, 0.0));
        }
        assert_eq!(dirichlet_oracle(&w.rows(), u.values()), 1.0);
        assert_eq!(graph_tv(&w, &u).unwrap().total, 0.5);
        assert_eq!(graph_tv_unnormalized(&w, &u).unwrap().total, 8.0);
        assert_eq!(graph_dirichlet(&w, &u).unwrap().total, 1.0);
    }

    #[test]
    fn constant_states() {
        let w = four_cycle();
        let r = graph_gl(&w, &sf(&[0.3; 4]), 0.2).unwrap();
        assert_eq!(r.dirichlet_part, 0.0);
        assert!((r.doublewell_part - double_well(0.3) / 0.2).abs() < 1e-14);
        assert_eq!(graph_tv(&w, &sf(&[1.0; 4])).unwrap().total, 0.0);
        assert_eq!(graph_dirichlet(&w, &sf(&[0.7; 4])).unwrap().total, 0.0);
    }

    #[test]
    fn complete_graph_two_nodes() {
        let w = constant(1.0, 2);
        let t = 0.5f64.sqrt();
        let r = graph_gl(&w, &sf(&[t, -t]), 0.5).unwrap();
        assert!((r.total - 1.5).abs() < 1e-14);
        // 1-d calculus: E(t) = 2t² + 2(t² − 1)² is minimized at t² = 1/2
        let e = |t: f64| 2.0 * t * t + 2.0 * (t * t - 1.0).powi(2);
        assert!(e(t) <= e(t + 1e-4) && e(t) <= e(t - 1e-4));
        let nu = delta_from_function(&sf(&[t, -t]));
        let g = graphon_gl(&Graphon::Analytic(AnalyticGraphon::Constant { p: 1.0 }), &nu, 0.5).unwrap();
        assert!((g.total - 1.5).abs() < 1e-14);
    }

    #[test]
    fn tv_infinite_branch() {
        let r = graph_tv(&four_cycle(), &sf(&[0.5, -1.0, 1.0, 1.0])).unwrap();
        assert!(!r.finite);
        assert_eq!(r.value(), f64::INFINITY);
        let nu = YoungMeasure::two_atom(3, 1.0, 0.5, 0.5).unwrap();
        assert!(!graphon_tv(&Graphon::Step(constant(1.0, 3)), &nu).unwrap().finite);
    }

    #[test]
    fn complete_graph_binary_dirichlet_count() {
        for n in 1..=8usize {
            for mask in 0u32..(1 << n) {
                let u: Vec<f64> = (0..n).map(|i| if mask >> i & 1 == 1 { 1.0 } else { -1.0 }).collect();
                let k = u.iter().filter(|&&v| v > 0.0).count() as f64;
                let p = 0.3;
                let closed = p * 2.0 * k * (n as f64 - k) * 4.0 / (n * n) as f64;
                let got = graph_dirichlet(&constant(p, n), &sf(&u)).unwrap().total;
                assert!((got - closed).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn size_mismatch_and_bad_epsilon() {
        assert!(graph_gl(&four_cycle(), &sf(&[1.0]), 0.1).is_err());
        assert!(graph_gl(&four_cycle(), &sf(&[1.0; 4]), 0.0).is_err());
        assert!(graph_dirichlet(&four_cycle(), &sf(&[1.0; 3])).is_err());
    }

    #[test]
    fn two_atom_expectations_on_constant_kernel() {
        let one = Graphon::Analytic(AnalyticGraphon::Constant { p: 1.0 });
        for theta in [0.0, 0.2, 0.5, 0.9] {
            let nu = YoungMeasure::two_atom(4, 1.0, -1.0, theta).unwrap();
            let d = graphon_dirichlet(&one, &nu).unwrap().total;
            let tv = graphon_tv(&one, &nu).unwrap().total;
            let want = 8.0 * theta * (1.0 - theta);
            assert!((d - want).abs() < 1e-14);
            assert!((tv - want).abs() < 1e-14);
        }
        let nu = YoungMeasure::uniform(5, CellLaw::Delta { value: 0.4 }, None).unwrap();
        assert_eq!(graphon_dirichlet(&one, &nu).unwrap().total, 0.0);
        let nu = YoungMeasure::uniform(5, CellLaw::Delta { value: 1.0 }, None).unwrap();
        assert_eq!(graphon_tv(&one, &nu).unwrap().total, 0.0);
    }

    #[test]
    fn saturated_delta_on_constant_kernel() {
        let (p, eps): (f64, f64) = (0.5, 0.1);
        let s = (1.0 - eps * p).sqrt();
        let nu = YoungMeasure::uniform(6, CellLaw::Delta { value: s }, None).unwrap();
        let r = graphon_gl(&Graphon::Analytic(AnalyticGraphon::Constant { p }), &nu, eps).unwrap();
        assert_eq!(r.dirichlet_part, 0.0);
        assert!((r.doublewell_part - eps * p * p).abs() < 1e-14);
        let b = YoungMeasure::two_atom(6, 1.0, -1.0, 0.3).unwrap();
        let r = graphon_gl(&Graphon::Analytic(AnalyticGraphon::Constant { p }), &b, eps).unwrap();
        assert_eq!(r.doublewell_part, 0.0);
    }

    #[test]
    fn delta_on_step_graphon_reduces_exactly() {
        let mut rng = crate::rng::stream(3, 0);
        let w = random_kernel(9, &mut rng);
        let u: Vec<f64> = (0..9).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let u = sf(&u);
        let a = graphon_dirichlet(&Graphon::Step(w.clone()), &delta_from_function(&u)).unwrap();
        assert_eq!(a.total, graph_dirichlet(&w, &u).unwrap().total);
        let g = graphon_gl(&Graphon::Step(w.clone()), &delta_from_function(&u), 0.3).unwrap();
        assert_eq!(g, graph_gl(&w, &u, 0.3).unwrap());
    }

    #[test]
    fn oscillation_invariance_constant_kernel() {
        // single interface at volume c versus fine mixture of the same atoms
        let (p, eps, theta): (f64, f64, f64) = (0.7, 0.2, 0.625);
        let s = (1.0 - eps * p).sqrt();
        let c = (2.0 * theta - 1.0) * s;
        let (m, k) = (8, 5);
        let u: Vec<f64> = (0..m).map(|i| if i < k { s } else { -s }).collect();
        let nu1 = delta_from_function(&sf(&u));
        let nu2 = YoungMeasure::two_atom(m, s, -s, theta).unwrap();
        let w = Graphon::Analytic(AnalyticGraphon::Constant { p });
        let d1 = graphon_gl(&w, &nu1, eps).unwrap().dirichlet_part;
        let d2 = graphon_gl(&w, &nu2, eps).unwrap().dirichlet_part;
        let oracle = 2.0 * p * (s * s - c * c);
        assert!((d1 - d2).abs() < 1e-12, "{d1} vs {d2}");
        assert!((d1 - oracle).abs() < 1e-12, "{d1} vs {oracle}");
    }

    #[test]
    fn analytic_quadrature_converges() {
        let w = Graphon::Analytic(AnalyticGraphon::PowerKernel { s: 0.2, cap: 50.0 });
        let nu = YoungMeasure::two_atom(16, 0.9, -0.8, 0.4).unwrap();
        let coarse = graphon_gl_quadrature(&w, &nu, 0.3, 8).unwrap().total;
        let fine = graphon_gl_quadrature(&w, &nu, 0.3, 16).unwrap().total;
        assert!((coarse - fine).abs() / fine < 1e-2);
        // block boundary on a cell edge: the midpoint rule is exact
        let b = Graphon::Analytic(AnalyticGraphon::Bipartite { a: 0.25 });
        let e1 = graphon_gl_quadrature(&b, &nu, 0.3, 1).unwrap().total;
        let e2 = graphon_gl_quadrature(&b, &nu, 0.3, 2).unwrap().total;
        assert!((e1 - e2).abs() < 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn matrix_and_integral_forms_agree(seed in any::<u64>(), n in 1usize..12, eps in 0.01f64..2.0) {
            let mut rng = crate::rng::stream(seed, 0);
            let w = random_kernel(n, &mut rng);
            let u = sf(&(0..n).map(|_| rng.gen_range(-2.0..2.0)).collect::<Vec<_>>());
            let a = graph_gl(&w, &u, eps).unwrap();
            let b = graph_gl_integral_form(&w, &u, eps).unwrap();
            prop_assert!((a.total - b.total).abs() <= 1e-12 * (1.0 + a.total.abs()));
            prop_assert!((a.dirichlet_part - dirichlet_oracle(&w.rows(), u.values())).abs() < 1e-12);
            prop_assert!((a.total - a.dirichlet_part - a.doublewell_part).abs() <= 1e-12);
        }

        #[test]
        fn delta_collapse(seed in any::<u64>(), n in 1usize..12, eps in 0.01f64..2.0) {
            let mut rng = crate::rng::stream(seed, 1);
            let w = random_kernel(n, &mut rng);
            let u = sf(&(0..n).map(|_| rng.gen_range(-2.0..2.0)).collect::<Vec<_>>());
            let a = graphon_gl(&Graphon::Step(w.clone()), &delta_from_function(&u), eps).unwrap();
            let b = graph_gl(&w, &u, eps).unwrap();
            prop_assert!((a.total - b.total).abs() <= 1e-12);
        }

        #[test]
        fn moment_route_agrees(seed in any::<u64>(), m in 1usize..10, eps in 0.05f64..1.0) {
            let mut rng = crate::rng::stream(seed, 2);
            let w = random_kernel(m, &mut rng);
            let k = CellKernel::from_step(&w);
            let nu = random_measure(m, false, &mut rng);
            let mp = nu.moments();
            let pairs = graphon_dirichlet_cells(&k, &nu).unwrap().total;
            let moments = graphon_dirichlet_moments(&k, &mp).unwrap();
            prop_assert!((pairs - moments).abs() <= 1e-10);
            let dw = graphon_gl_cells(&k, &nu, eps).unwrap().doublewell_part;
            prop_assert!((dw - doublewell_from_moments(&mp, eps)).abs() <= 1e-10 * (1.0 + dw));
        }

        #[test]
        fn binary_identity(seed in any::<u64>(), m in 1usize..10) {
            let mut rng = crate::rng::stream(seed, 3);
            let w = Graphon::Step(random_kernel(m, &mut rng));
            let nu = random_measure(m, true, &mut rng);
            let d = graphon_dirichlet(&w, &nu).unwrap().total;
            let tv = graphon_tv(&w, &nu).unwrap();
            prop_assert!(tv.finite);
            prop_assert!((d - tv.total).abs() <= 1e-12);
        }

        #[test]
        fn truncation_lowers_gl(seed in any::<u64>(), n in 1usize..10, mlev in 1.0001f64..3.0, eps in 0.01f64..1.0) {
            let mut rng = crate::rng::stream(seed, 4);
            let w = Graphon::Step(random_kernel(n, &mut rng));
            let u = sf(&(0..n).map(|_| rng.gen_range(-3.0..3.0)).collect::<Vec<_>>());
            let t = truncate(&u, mlev).unwrap();
            let a = graphon_gl(&w, &delta_from_function(&u), eps).unwrap().total;
            let b = graphon_gl(&w, &delta_from_function(&t), eps).unwrap().total;
            prop_assert!(a >= b);
        }

        #[test]
        fn parts_nonnegative(seed in any::<u64>(), m in 1usize..8, eps in 0.01f64..1.0) {
            let mut rng = crate::rng::stream(seed, 5);
            let w = Graphon::Step(random_kernel(m, &mut rng));
            let nu = random_measure(m, false, &mut rng);
            let r = graphon_gl(&w, &nu, eps).unwrap();
            prop_assert!(r.dirichlet_part >= 0.0 && r.doublewell_part >= 0.0);
        }

        #[test]
        fn gradient_matches_finite_differences(seed in any::<u64>(), n in 2usize..10, eps in 0.05f64..1.0) {
            let mut rng = crate::rng::stream(seed, 6);
            let w = random_kernel(n, &mut rng);
            let u: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.5..1.5)).collect();
            let g = graph_gl_gradient(&w, &u, eps);
            let h = 1e-6;
            for k in 0..n {
                let mut up = u.clone();
                up[k] += h;
                let mut dn = u.clone();
                dn[k] -= h;
                let fd = (graph_gl(&w, &sf(&up), eps).unwrap().total
                    - graph_gl(&w, &sf(&dn), eps).unwrap().total) / (2.0 * h);
                prop_assert!((fd - g[k]).abs() <= 1e-5 * g[k].abs().max(1.0));
            }
        }
    }
}
