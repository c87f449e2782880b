//! Closed forms for the semicircle law `ρ_sc(x) = √(4 − x²)/(2π)`.

use num_complex::Complex64;
use std::f64::consts::PI;

pub fn density(x: f64) -> f64 {
    if x.abs() >= 2.0 {
        0.0
    } else {
        (4.0 - x * x).sqrt() / (2.0 * PI)
    }
}

pub fn cdf(x: f64) -> f64 {
    if x <= -2.0 {
        0.0
    } else if x >= 2.0 {
        1.0
    } else {
        0.5 + (x * (4.0 - x * x).sqrt() / 4.0 + (x / 2.0).asin()) / PI
    }
}

/// `√(z − 2)·√(z + 2)` with principal roots: analytic off `[−2, 2]` and `~ z` at infinity.
pub fn sqrt_z2m4(z: Complex64) -> Complex64 {
    (z - 2.0).sqrt() * (z + 2.0).sqrt()
}

/// Stieltjes transform `m_sc(z) = (−z + √(z² − 4))/2`, the root of `m² + zm + 1 = 0`
/// with `Im m > 0` in the upper half plane.
pub fn stieltjes(z: Complex64) -> Complex64 {
    (-z + sqrt_z2m4(z)) * 0.5
}

/// Semicircle quantiles `μ_i`, `i = 1..=n`, solving `∫_{−∞}^{μ_i} ρ_sc = i/n`.
///
/// `μ_n = 2` is the right edge.
pub fn quantiles(n: usize) -> Vec<f64> {
    (1..=n).map(|i| quantile(i as f64 / n as f64)).collect()
}

/// Inverse of [`cdf`] by safeguarded Newton.
pub fn quantile(p: f64) -> f64 {
    if p <= 0.0 {
        return -2.0;
    }
    if p >= 1.0 {
        return 2.0;
    }
    let (mut lo, mut hi) = (-2.0_f64, 2.0_f64);
    // 2cos(π(1−p)) is exact for the arcsine law and a good start here.
    let mut x = 2.0 * (PI * (1.0 - p)).cos();
    for _ in 0..100 {
        let f = cdf(x) - p;
        if f == 0.0 {
            return x;
        }
        if f > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        let d = density(x);
        let mut next = if d > 0.0 { x - f / d } else { f64::NAN };
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - x).abs() <= f64::EPSILON * x.abs() || hi - lo <= f64::MIN_POSITIVE {
            return next;
        }
        x = next;
    }
    x
}
