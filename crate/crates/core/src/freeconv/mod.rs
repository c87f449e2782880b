//! Free convolution of a diagonal potential with the semicircle law.
//!
//! For `W_t = D + √t·W` the limiting Stieltjes transform `m_t(z)` is the unique
//! solution with `Im m > 0` of
//!
//! ```text
//! m = (1/N) Σ_k 1/(D_k − z − t·m).
//! ```
//!
//! [`FreeConvolution`] solves this equation, caches solved points, and derives
//! the density, the quantiles `γ_k` and the eigenvector variance profile.

mod profile;
mod quantiles;
mod regularity;

pub use profile::{eta_window, VarianceProfile};
pub use quantiles::QuantileTable;
pub use regularity::{check_regularity, check_regularity_on, RegularityGrid};

use crate::error::{Error, Result};
use num_complex::Complex64;
use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

/// Sorted real sequence `D_1 ≤ … ≤ D_N`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagonalPotential {
    entries: Vec<f64>,
    label: String,
}

impl DiagonalPotential {
    /// Sorts `entries`; rejects `N < 2` and non-finite values.
    pub fn new(mut entries: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        if entries.len() < 2 {
            return Err(Error::InvalidPotential(format!("need N ≥ 2, got {}", entries.len())));
        }
        if let Some(x) = entries.iter().find(|x| !x.is_finite()) {
            return Err(Error::InvalidPotential(format!("non-finite entry {x}")));
        }
        entries.sort_by(f64::total_cmp);
        Ok(Self { entries, label: label.into() })
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn n(&self) -> usize {
        self.entries.len()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn min(&self) -> f64 {
        self.entries[0]
    }

    pub fn max(&self) -> f64 {
        self.entries[self.entries.len() - 1]
    }

    /// Empirical Stieltjes transform `m_D(z) = (1/N) Σ 1/(D_k − z)`.
    pub fn stieltjes(&self, z: Complex64) -> Complex64 {
        let s: Complex64 = self.entries.iter().map(|&d| (d - z).inv()).sum();
        s / self.n() as f64
    }
}

/// Spectral parameter `z = E + iη` with `η > 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ComplexPoint {
    pub e: f64,
    pub eta: f64,
}

impl ComplexPoint {
    pub fn new(e: f64, eta: f64) -> Result<Self> {
        if !(eta > 0.0) || !e.is_finite() || !eta.is_finite() {
            return Err(Error::NotUpperHalfPlane(eta));
        }
        Ok(Self { e, eta })
    }

    pub fn z(&self) -> Complex64 {
        Complex64::new(self.e, self.eta)
    }
}

impl TryFrom<Complex64> for ComplexPoint {
    type Error = Error;

    fn try_from(z: Complex64) -> Result<Self> {
        ComplexPoint::new(z.re, z.im)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverParams {
    /// Absolute fixed-point residual accepted as converged.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Weight `d` in `m ← (1 − d)·m + d·F(m)`.
    pub damping: f64,
    /// Damped iterations before switching to Newton.
    pub newton_after: usize,
}

impl Default for SolverParams {
    fn default() -> Self {
        Self { tolerance: 1e-12, max_iterations: 400, damping: 0.5, newton_after: 200 }
    }
}

/// Bounds on `|1/g_i| = |D_i − z − t·m_t(z)|` over `i`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GBounds {
    pub min_abs_inv: f64,
    pub max_abs_inv: f64,
}

const MEMO_CAP: usize = 1 << 20;

/// Evaluator for `m_t`, `ρ_t`, `γ_{k,t}`, `g_i` and `σ_t²` at fixed `(D, t)`.
///
/// Solved points are memoized behind a mutex, so one evaluator can be shared by
/// reference across threads.
#[derive(Debug)]
pub struct FreeConvolution {
    potential: DiagonalPotential,
    t: f64,
    params: SolverParams,
    memo: Mutex<HashMap<(u64, u64), Complex64>>,
    table: OnceLock<QuantileTable>,
}

impl Clone for FreeConvolution {
    fn clone(&self) -> Self {
        let memo = self.memo.lock().unwrap_or_else(|e| e.into_inner()).clone();
        let table = OnceLock::new();
        if let Some(q) = self.table.get() {
            let _ = table.set(q.clone());
        }
        Self { potential: self.potential.clone(), t: self.t, params: self.params, memo: Mutex::new(memo), table }
    }
}

impl FreeConvolution {
    pub fn new(potential: DiagonalPotential, t: f64) -> Result<Self> {
        Self::with_params(potential, t, SolverParams::default())
    }

    pub fn with_params(potential: DiagonalPotential, t: f64, params: SolverParams) -> Result<Self> {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::InvalidArgument(format!("t must be finite and ≥ 0, got {t}")));
        }
        if !(params.damping > 0.0 && params.damping <= 1.0) {
            return Err(Error::InvalidArgument(format!("damping must lie in (0, 1], got {}", params.damping)));
        }
        Ok(Self { potential, t, params, memo: Mutex::new(HashMap::new()), table: OnceLock::new() })
    }

    pub fn potential(&self) -> &DiagonalPotential {
        &self.potential
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn params(&self) -> &SolverParams {
        &self.params
    }

    /// `m_t(z)`.
    pub fn solve_m(&self, z: ComplexPoint) -> Result<Complex64> {
        self.solve(z, None)
    }

    /// `m_t(z)` starting from `guess`, typically the value at a nearby point.
    pub fn solve_m_from(&self, z: ComplexPoint, guess: Complex64) -> Result<Complex64> {
        self.solve(z, Some(guess))
    }

    /// `m_t` along a path, each point warm-started from the previous one.
    pub fn solve_path(&self, points: &[ComplexPoint]) -> Result<Vec<Complex64>> {
        let mut out = Vec::with_capacity(points.len());
        let mut prev = None;
        for &p in points {
            let m = self.solve(p, prev)?;
            prev = Some(m);
            out.push(m);
        }
        Ok(out)
    }

    /// `|m − F(m)|` for the fixed-point map `F`.
    pub fn residual(&self, z: Complex64, m: Complex64) -> f64 {
        (m - self.map(z, m)).norm()
    }

    fn solve(&self, p: ComplexPoint, guess: Option<Complex64>) -> Result<Complex64> {
        let z = p.z();
        if self.t == 0.0 {
            return Ok(self.potential.stieltjes(z));
        }
        let key = (p.e.to_bits(), p.eta.to_bits());
        if let Some(&m) = self.memo.lock().unwrap_or_else(|e| e.into_inner()).get(&key) {
            return Ok(m);
        }
        let m = match guess.filter(|g| g.im > 0.0 && g.is_finite()) {
            Some(g) => match self.newton(z, g, self.params.max_iterations.min(60)) {
                Ok(m) => m,
                Err(_) => self.iterate(z)?,
            },
            None => self.iterate(z)?,
        };
        let mut memo = self.memo.lock().unwrap_or_else(|e| e.into_inner());
        if memo.len() >= MEMO_CAP {
            memo.clear();
        }
        memo.insert(key, m);
        Ok(m)
    }

    fn map(&self, z: Complex64, m: Complex64) -> Complex64 {
        let w = z + m * self.t;
        let s: Complex64 = self.potential.entries.iter().map(|&d| (d - w).inv()).sum();
        s / self.potential.n() as f64
    }

    /// `F(m)` and `F'(m) = t·mean(g²)`.
    fn map_and_derivative(&self, z: Complex64, m: Complex64) -> (Complex64, Complex64) {
        let w = z + m * self.t;
        let (mut s, mut s2) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
        for &d in &self.potential.entries {
            let g = (d - w).inv();
            s += g;
            s2 += g * g;
        }
        let n = self.potential.n() as f64;
        (s / n, s2 * (self.t / n))
    }

    /// Damped fixed-point iteration from `m = i`, then Newton.
    fn iterate(&self, z: Complex64) -> Result<Complex64> {
        let d = self.params.damping;
        let mut m = Complex64::new(0.0, 1.0);
        let mut res = f64::INFINITY;
        for _ in 0..self.params.newton_after.min(self.params.max_iterations) {
            let f = self.map(z, m);
            res = (f - m).norm();
            if res <= self.params.tolerance {
                return Ok(f);
            }
            m = m * (1.0 - d) + f * d;
        }
        let budget = self.params.max_iterations.saturating_sub(self.params.newton_after);
        self.newton(z, m, budget).map_err(|e| match e {
            Error::NoConvergence { iterations, residual, .. } => Error::NoConvergence {
                re: z.re,
                im: z.im,
                iterations: iterations + self.params.newton_after,
                residual: residual.min(res),
            },
            e => e,
        })
    }

    /// Newton on `Φ(m) = m − F(m)` with backtracking that keeps `Im m > 0`.
    fn newton(&self, z: Complex64, mut m: Complex64, budget: usize) -> Result<Complex64> {
        let (mut f, mut df) = self.map_and_derivative(z, m);
        let mut phi = m - f;
        for it in 0..budget {
            if phi.norm() <= self.params.tolerance {
                return Ok(f);
            }
            let step = -phi / (Complex64::new(1.0, 0.0) - df);
            let mut lambda = 1.0;
            let mut accepted = false;
            for _ in 0..40 {
                let cand = m + step * lambda;
                if cand.im > 0.0 && cand.is_finite() {
                    let (fc, dfc) = self.map_and_derivative(z, cand);
                    let pc = cand - fc;
                    if pc.norm() < phi.norm() {
                        m = cand;
                        f = fc;
                        df = dfc;
                        phi = pc;
                        accepted = true;
                        break;
                    }
                }
                lambda *= 0.5;
            }
            if !accepted {
                return Err(Error::NoConvergence { re: z.re, im: z.im, iterations: it, residual: phi.norm() });
            }
        }
        if phi.norm() <= self.params.tolerance {
            return Ok(f);
        }
        Err(Error::NoConvergence { re: z.re, im: z.im, iterations: budget, residual: phi.norm() })
    }

    /// `g_i(t, z) = 1/(D_i − z − t·m_t(z))`.
    pub fn g_values(&self, z: ComplexPoint) -> Result<Vec<Complex64>> {
        let m = self.solve_m(z)?;
        let w = z.z() + m * self.t;
        Ok(self.potential.entries.iter().map(|&d| (d - w).inv()).collect())
    }

    /// `min_i` and `max_i` of `|D_i − z − t·m_t(z)|`.
    pub fn g_bounds(&self, z: ComplexPoint) -> Result<GBounds> {
        let g = self.g_values(z)?;
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for x in g {
            let a = x.inv().norm();
            lo = lo.min(a);
            hi = hi.max(a);
        }
        Ok(GBounds { min_abs_inv: lo, max_abs_inv: hi })
    }

    /// Regularization used for the density when none is given: `min(10⁻⁴, t/100)`.
    pub fn default_eta_reg(&self) -> f64 {
        if self.t > 0.0 {
            (self.t / 100.0).min(1e-4)
        } else {
            1e-4
        }
    }

    /// `ρ_t(E) ≈ Im m_t(E + i·eta_reg)/π`.
    pub fn density(&self, e: f64, eta_reg: f64) -> Result<f64> {
        Ok(self.solve_m(ComplexPoint::new(e, eta_reg)?)?.im / std::f64::consts::PI)
    }

    fn density_from(&self, e: f64, eta_reg: f64, guess: Option<Complex64>) -> Result<Complex64> {
        self.solve(ComplexPoint::new(e, eta_reg)?, guess)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zero(n: usize) -> DiagonalPotential {
        DiagonalPotential::new(vec![0.0; n], "zero").unwrap()
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(DiagonalPotential::new(vec![1.0], "x").is_err());
        assert!(ComplexPoint::new(0.0, 0.0).is_err());
        assert!(ComplexPoint::new(0.0, -1.0).is_err());
        assert!(FreeConvolution::new(zero(4), -1.0).is_err());
    }

    #[test]
    fn zero_potential_is_golden_ratio_at_i() {
        let fc = FreeConvolution::new(zero(4), 1.0).unwrap();
        let m = fc.solve_m(ComplexPoint::new(0.0, 1.0).unwrap()).unwrap();
        assert!((m - Complex64::new(0.0, (5f64.sqrt() - 1.0) / 2.0)).norm() < 1e-12);
    }

    #[test]
    fn t_zero_is_raw_transform() {
        let d = DiagonalPotential::new(vec![-1.0, 0.5, 2.0], "x").unwrap();
        let fc = FreeConvolution::new(d.clone(), 0.0).unwrap();
        let z = ComplexPoint::new(0.0, 1.0).unwrap();
        assert_eq!(fc.solve_m(z).unwrap(), d.stieltjes(z.z()));
    }

    #[test]
    fn g_average_is_m() {
        let d = DiagonalPotential::new((0..50).map(|i| (i as f64 / 25.0) - 1.0).collect(), "x").unwrap();
        let fc = FreeConvolution::new(d, 0.2).unwrap();
        let z = ComplexPoint::new(0.1, 0.02).unwrap();
        let m = fc.solve_m(z).unwrap();
        let g = fc.g_values(z).unwrap();
        let avg: Complex64 = g.iter().sum::<Complex64>() / 50.0;
        assert!((avg - m).norm() < 1e-12);
        let b = fc.g_bounds(z).unwrap();
        assert!(b.min_abs_inv > 0.0 && b.min_abs_inv <= b.max_abs_inv);
    }

    #[test]
    fn warm_start_agrees_with_cold() {
        let d = DiagonalPotential::new((0..200).map(|i| ((i * 37) % 200) as f64 / 100.0 - 1.0).collect(), "x")
            .unwrap();
        let cold = FreeConvolution::new(d.clone(), 0.05).unwrap();
        let warm = FreeConvolution::new(d, 0.05).unwrap();
        let pts: Vec<_> = (0..20).map(|k| ComplexPoint::new(0.3, 0.5 * 0.6f64.powi(k)).unwrap()).collect();
        let path = warm.solve_path(&pts).unwrap();
        for (p, m) in pts.iter().zip(path) {
            assert!((cold.solve_m(*p).unwrap() - m).norm() < 1e-10);
        }
    }
}
