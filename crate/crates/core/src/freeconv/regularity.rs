use super::DiagonalPotential;
use crate::error::{Error, Result};
use num_complex::Complex64;

/// Evaluation grid for [`check_regularity_on`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegularityGrid {
    pub energies: usize,
    /// Log-spaced `η` values between `eta_star` and `eta_max`.
    pub etas: usize,
    pub eta_max: f64,
}

impl Default for RegularityGrid {
    fn default() -> Self {
        Self { energies: 41, etas: 30, eta_max: 10.0 }
    }
}

/// `(min, max)` of `Im m_D(E + iη)` over `E ∈ [E0 − r, E0 + r]`, `η ∈ [eta_star, 10]`.
pub fn check_regularity(d: &DiagonalPotential, e0: f64, eta_star: f64, r: f64) -> Result<(f64, f64)> {
    check_regularity_on(d, e0, eta_star, r, RegularityGrid::default())
}

pub fn check_regularity_on(
    d: &DiagonalPotential,
    e0: f64,
    eta_star: f64,
    r: f64,
    grid: RegularityGrid,
) -> Result<(f64, f64)> {
    let n = d.n() as f64;
    if !(eta_star >= 1.0 / n && eta_star <= r) {
        return Err(Error::InvalidArgument(format!("need 1/N ≤ eta_star ≤ r, got eta_star = {eta_star}, r = {r}")));
    }
    if grid.energies < 2 || grid.etas < 2 || !(grid.eta_max > eta_star) {
        return Err(Error::InvalidArgument("degenerate regularity grid".into()));
    }
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    let ratio = (grid.eta_max / eta_star).ln();
    for i in 0..grid.energies {
        let e = e0 - r + 2.0 * r * i as f64 / (grid.energies - 1) as f64;
        for j in 0..grid.etas {
            let eta = eta_star * (ratio * j as f64 / (grid.etas - 1) as f64).exp();
            let v = d.stieltjes(Complex64::new(e, eta)).im;
            if v.is_finite() {
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
    }
    Ok((lo, hi))
}
