//! Cut norm of step graphons in two conventions.
//!
//! * Subset form: `n^{-2} max_S |Σ_{i∈S, j∉S} A_ij|`. This is the value
//!   reported by [`cut_norm_exact`].
//! * Bilinear form: `n^{-2} max_{f,g ∈ {±1}^n} |fᵀ A g|`, which is the
//!   `∞ → 1` norm of `A` scaled to the unit square. Maxima of a bilinear form
//!   over a product of boxes sit at vertices, so sign vectors suffice.
//!
//! For symmetric `A` the subset value is at most the bilinear value.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphon::{Graphon, StepGraphon};
use crate::rng;

/// Largest `n` for which exhaustive enumeration is offered.
pub const EXHAUSTIVE_MAX_N: usize = 20;

/// Restarts used by [`cut_norm`] when it falls back to the heuristic.
pub const DEFAULT_RESTARTS: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CutForm {
    Subset,
    Bilinear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CutMethod {
    Exhaustive,
    Alternating,
}

/// A cut-norm value together with the sign vectors that attain it.
///
/// For the subset form `f` is `+1` on `S` and `g = −f` (so `g` is `+1` on `S^c`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutNormEstimate {
    pub value: f64,
    pub method: CutMethod,
    pub form: CutForm,
    pub f: Vec<i8>,
    pub g: Vec<i8>,
    pub is_exact: bool,
}

impl CutNormEstimate {
    /// Recomputes the value from the certificate.
    pub fn recompute(&self, w: &StepGraphon) -> f64 {
        match self.form {
            CutForm::Bilinear => bilinear_value(w, &self.f, &self.g),
            CutForm::Subset => {
                let s: Vec<bool> = self.f.iter().map(|&x| x > 0).collect();
                subset_value(w, &s)
            }
        }
    }

    /// Members of `S` (0-based) for subset-form certificates.
    pub fn subset(&self) -> Vec<usize> {
        (0..self.f.len()).filter(|&i| self.f[i] > 0).collect()
    }
}

/// `n^{-2} |fᵀ A g|`.
pub fn bilinear_value(w: &StepGraphon, f: &[i8], g: &[i8]) -> f64 {
    let n = w.n();
    let mut s = 0.0;
    for i in 0..n {
        let row = w.row(i);
        let mut r = 0.0;
        for j in 0..n {
            r += f64::from(g[j]) * row[j];
        }
        s += f64::from(f[i]) * r;
    }
    s.abs() / (n * n) as f64
}

/// `n^{-2} |Σ_{i∈S, j∉S} A_ij|`.
pub fn subset_value(w: &StepGraphon, s: &[bool]) -> f64 {
    let n = w.n();
    let mut t = 0.0;
    for i in (0..n).filter(|&i| s[i]) {
        let row = w.row(i);
        for j in (0..n).filter(|&j| !s[j]) {
            t += row[j];
        }
    }
    t.abs() / (n * n) as f64
}

fn too_large(n: usize, what: &'static str) -> Error {
    Error::Budget {
        what,
        cost: format!("2^{n} sign patterns"),
        limit: format!("n <= {EXHAUSTIVE_MAX_N}"),
        hint: "use cut_norm_heuristic for larger graphs".into(),
    }
}

/// Exact subset-form cut norm by Gray-code enumeration of all `S ⊆ [n]`.
pub fn cut_norm_exact(w: &StepGraphon) -> Result<CutNormEstimate> {
    let n = w.n();
    if n > EXHAUSTIVE_MAX_N {
        return Err(too_large(n, "exact cut norm"));
    }
    let deg = w.degrees();
    // t[i] = Σ_{j∈S} A_ij
    let mut t = vec![0.0; n];
    let mut in_s = vec![false; n];
    let mut cut = 0.0f64;
    let mut best = (0.0f64, in_s.clone());
    for step in 1u64..(1u64 << n) {
        let k = step.trailing_zeros() as usize;
        let col = w.row(k);
        let delta = deg[k] - col[k] - 2.0 * (t[k] - if in_s[k] { col[k] } else { 0.0 });
        if in_s[k] {
            cut -= delta;
            in_s[k] = false;
            for (ti, a) in t.iter_mut().zip(col) {
                *ti -= a;
            }
        } else {
            cut += delta;
            in_s[k] = true;
            for (ti, a) in t.iter_mut().zip(col) {
                *ti += a;
            }
        }
        if cut.abs() > best.0 {
            best = (cut.abs(), in_s.clone());
        }
    }
    let s = best.1;
    let f: Vec<i8> = s.iter().map(|&b| if b { 1 } else { -1 }).collect();
    let g = f.iter().map(|x| -x).collect();
    Ok(CutNormEstimate {
        value: subset_value(w, &s),
        method: CutMethod::Exhaustive,
        form: CutForm::Subset,
        f,
        g,
        is_exact: true,
    })
}

/// Exact bilinear-form cut norm: enumerate `g` (up to global sign) and take
/// `f = sign(A g)`.
pub fn cut_norm_bilinear_exact(w: &StepGraphon) -> Result<CutNormEstimate> {
    let n = w.n();
    if n > EXHAUSTIVE_MAX_N {
        return Err(too_large(n, "exact bilinear cut norm"));
    }
    let mut g = vec![1i8; n];
    let mut h = w.degrees();
    let score = |h: &[f64]| h.iter().map(|x| x.abs()).sum::<f64>();
    let mut best = (score(&h), g.clone());
    // g[0] stays +1; flipping it too would only negate the form
    for step in 1u64..(1u64 << (n - 1)) {
        let k = step.trailing_zeros() as usize + 1;
        let col = w.row(k);
        let sgn = -2.0 * f64::from(g[k]);
        g[k] = -g[k];
        for (hi, a) in h.iter_mut().zip(col) {
            *hi += sgn * a;
        }
        let v = score(&h);
        if v > best.0 {
            best = (v, g.clone());
        }
    }
    let g = best.1;
    let f = best_response(w, &g);
    Ok(CutNormEstimate {
        value: bilinear_value(w, &f, &g),
        method: CutMethod::Exhaustive,
        form: CutForm::Bilinear,
        f,
        g,
        is_exact: true,
    })
}

/// `sign(A g)` with ties sent to `+1`.
fn best_response(w: &StepGraphon, g: &[i8]) -> Vec<i8> {
    (0..w.n())
        .map(|i| {
            let r: f64 = w.row(i).iter().zip(g).map(|(a, &s)| a * f64::from(s)).sum();
            if r >= 0.0 {
                1
            } else {
                -1
            }
        })
        .collect()
}

/// Alternating maximization of the bilinear form from `restarts` random
/// sign vectors. Returns a lower bound on the bilinear cut norm.
pub fn cut_norm_heuristic(w: &StepGraphon, restarts: usize, seed: u64) -> CutNormEstimate {
    let n = w.n();
    let mut best: Option<CutNormEstimate> = None;
    for r in 0..restarts.max(1) {
        let mut rng = rng::stream(seed, r as u64);
        let mut g: Vec<i8> = (0..n).map(|_| if rng.gen::<bool>() { 1 } else { -1 }).collect();
        let mut f = best_response(w, &g);
        let mut val = bilinear_value(w, &f, &g);
        loop {
            let g2 = best_response(w, &f);
            let f2 = best_response(w, &g2);
            let v2 = bilinear_value(w, &f2, &g2);
            if v2 <= val {
                break;
            }
            (f, g, val) = (f2, g2, v2);
        }
        if best.as_ref().is_none_or(|b| val > b.value) {
            best = Some(CutNormEstimate {
                value: val,
                method: CutMethod::Alternating,
                form: CutForm::Bilinear,
                f,
                g,
                is_exact: false,
            });
        }
    }
    best.expect("at least one restart")
}

/// Subset-form exact value when `n ≤ 20`, bilinear heuristic otherwise.
/// The returned estimate records which form was used.
pub fn cut_norm(w: &StepGraphon, seed: u64) -> CutNormEstimate {
    if w.n() <= EXHAUSTIVE_MAX_N {
        cut_norm_exact(w).expect("within exhaustive limit")
    } else {
        cut_norm_heuristic(w, DEFAULT_RESTARTS, seed)
    }
}

/// Cut norm of `W1 − W2`. No relabeling of vertices is attempted.
pub fn cut_distance(w1: &StepGraphon, w2: &StepGraphon, seed: u64) -> Result<CutNormEstimate> {
    let d = StepGraphon::difference(w1, w2)?;
    Ok(cut_norm(&d, seed))
}

/// Cut distance of two graphons rendered at a common resolution `n`.
pub fn cut_distance_at(g1: &Graphon, g2: &Graphon, n: usize, seed: u64) -> Result<CutNormEstimate> {
    let a = g1.at_resolution(n)?;
    let b = g2.at_resolution(n)?;
    cut_distance(&a, &b, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphon::{four_cycle, sample_step_graphon, AnalyticGraphon};
    use proptest::prelude::*;
    use rand::Rng;

    fn random_step(n: usize, seed: u64, signed: bool) -> StepGraphon {
        let mut r = rng::stream(seed, 99);
        let mut w = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let v: f64 = if signed { r.gen_range(-1.0..1.0) } else { r.gen() };
                w[i * n + j] = v;
                w[j * n + i] = v;
            }
        }
        StepGraphon::from_flat(n, w).unwrap()
    }

    /// Independent brute force over all (f, g) pairs.
    fn bilinear_brute(w: &StepGraphon) -> f64 {
        let n = w.n();
        let mut best = 0.0f64;
        for fm in 0u32..(1 << n) {
            let f: Vec<i8> = (0..n).map(|i| if fm >> i & 1 == 1 { 1 } else { -1 }).collect();
            for gm in 0u32..(1 << n) {
                let g: Vec<i8> = (0..n).map(|i| if gm >> i & 1 == 1 { 1 } else { -1 }).collect();
                best = best.max(bilinear_value(w, &f, &g));
            }
        }
        best
    }

    fn subset_brute(w: &StepGraphon) -> f64 {
        let n = w.n();
        (0u32..(1 << n))
            .map(|m| subset_value(w, &(0..n).map(|i| m >> i & 1 == 1).collect::<Vec<_>>()))
            .fold(0.0, f64::max)
    }

    #[test]
    fn zero_graphon() {
        let z = StepGraphon::zeros(6).unwrap();
        assert_eq!(cut_norm_exact(&z).unwrap().value, 0.0);
        assert_eq!(cut_norm_heuristic(&z, 5, 1).value, 0.0);
    }

    #[test]
    fn constant_one_subset_quarter() {
        let w = sample_step_graphon(&AnalyticGraphon::Constant { p: 1.0 }, 16).unwrap();
        let e = cut_norm_exact(&w).unwrap();
        assert_eq!(e.value, 0.25);
        assert_eq!(e.subset().len(), 8);
        assert!(e.is_exact);
    }

    #[test]
    fn constant_one_bilinear_saturates() {
        let w = sample_step_graphon(&AnalyticGraphon::Constant { p: 1.0 }, 8).unwrap();
        let h = cut_norm_heuristic(&w, 10, 3);
        assert_eq!(h.value, 1.0);
        assert!(!h.is_exact);
    }

    #[test]
    fn four_cycle_regression() {
        // S = {1, 3}: all 8 ordered edge pairs cross, 4 of them from S
        let e = cut_norm_exact(&four_cycle()).unwrap();
        assert_eq!(e.value, 0.25);
        assert_eq!(subset_brute(&four_cycle()), 0.25);
        assert_eq!(cut_norm_bilinear_exact(&four_cycle()).unwrap().value, 0.5);
    }

    #[test]
    fn exhaustive_refuses_large_n() {
        let w = StepGraphon::zeros(21).unwrap();
        assert!(matches!(cut_norm_exact(&w), Err(Error::Budget { .. })));
    }

    #[test]
    fn exact_routes_match_brute_force() {
        for seed in 0..20 {
            let n = 2 + (seed as usize % 6);
            let w = random_step(n, seed, seed % 2 == 0);
            let s = cut_norm_exact(&w).unwrap();
            assert!((s.value - subset_brute(&w)).abs() < 1e-12);
            assert_eq!(s.value, s.recompute(&w));
            let b = cut_norm_bilinear_exact(&w).unwrap();
            assert!((b.value - bilinear_brute(&w)).abs() < 1e-12);
            assert_eq!(b.value, b.recompute(&w));
            assert!(s.value <= b.value + 1e-12);
        }
    }

    #[test]
    fn cut_distance_identical_and_mismatched() {
        let w = four_cycle();
        assert_eq!(cut_distance(&w, &w, 0).unwrap().value, 0.0);
        let c = AnalyticGraphon::Constant { p: 0.7 };
        let a = sample_step_graphon(&c, 9).unwrap();
        assert_eq!(cut_distance_at(&Graphon::Step(a), &Graphon::Analytic(c), 9, 0).unwrap().value, 0.0);
        assert!(cut_distance(&w, &StepGraphon::zeros(3).unwrap(), 0).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn cut_norm_bounded_by_l1(n in 1usize..10, seed in any::<u64>()) {
            let w = random_step(n, seed, false);
            prop_assert!(cut_norm_exact(&w).unwrap().value <= w.lp_norm(1.0).unwrap() + 1e-15);
        }

        #[test]
        fn heuristic_is_sound(n in 1usize..9, seed in any::<u64>()) {
            let w = random_step(n, seed, true);
            let h = cut_norm_heuristic(&w, 5, seed);
            prop_assert_eq!(h.value, h.recompute(&w));
            prop_assert!(h.value <= cut_norm_bilinear_exact(&w).unwrap().value + 1e-12);
        }

        #[test]
        fn scale_equivariance(n in 1usize..9, seed in any::<u64>(), c in 0.0f64..10.0) {
            let w = random_step(n, seed, false);
            let base = cut_norm_exact(&w).unwrap().value;
            let scaled = cut_norm_exact(&w.scaled(c)).unwrap().value;
            prop_assert!((scaled - c * base).abs() <= 1e-12 * (1.0 + c * base));
        }
    }
}
