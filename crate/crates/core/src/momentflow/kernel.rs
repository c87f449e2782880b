use crate::error::{Error, Result};
use crate::semicircle;
use std::f64::consts::PI;

/// Gauss–Chebyshev rule of the second kind for `∫ g dρ_sc`: nodes
/// `2cos φ_k`, `φ_k = kπ/(n + 1)`, weights `2 sin²φ_k/(n + 1)`, `k = 1..=n`.
/// Exact for polynomials of degree below `2n`.
#[derive(Clone, Debug)]
pub struct SemicircleQuadrature {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl SemicircleQuadrature {
    pub fn new(n: usize) -> Self {
        let h = PI / (n + 1) as f64;
        let (nodes, weights) = (1..=n)
            .map(|k| {
                let phi = k as f64 * h;
                (2.0 * phi.cos(), 2.0 * phi.sin().powi(2) / (n + 1) as f64)
            })
            .unzip();
        Self { nodes, weights }
    }

    pub fn integrate(&self, g: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * g(x)).sum()
    }
}

fn check_bulk(x: f64) -> Result<()> {
    if !(x.abs() < 2.0) {
        return Err(Error::OutsideSupport(x));
    }
    Ok(())
}

/// Transition density of the continuum flow with respect to `ρ_sc`:
///
/// ```text
/// p_t(x, y) = (1 − e^{−t}) / (|e^{i(θ+φ)} − e^{−t/2}|²·|e^{i(θ−φ)} − e^{−t/2}|²)
/// ```
///
/// with `x = 2cos θ`, `y = 2cos φ`.
pub fn kernel_pt(x: f64, y: f64, t: f64) -> Result<f64> {
    check_bulk(x)?;
    check_bulk(y)?;
    let (theta, phi) = ((x / 2.0).acos(), (y / 2.0).acos());
    let r = (-t / 2.0).exp();
    let dist = |a: f64| 1.0 - 2.0 * r * a.cos() + r * r;
    Ok(-(-t).exp_m1() / (dist(theta + phi) * dist(theta - phi)))
}

/// Small-time Cauchy shape `t/((x − y)² + (π·ρ_sc(x)·t)²)`.
pub fn kernel_cauchy_approx(x: f64, y: f64, t: f64) -> f64 {
    let w = PI * semicircle::density(x) * t;
    t / ((x - y).powi(2) + w * w)
}

/// `(Kf)(x) = ∫ (f(x) − f(y))/(x − y)² dρ_sc(y)` (principal value), by
/// singularity subtraction:
///
/// ```text
/// Kf(x) = ∫ (f(x) − f(y) + f'(x)(y − x))/(x − y)² dρ_sc(y) + f'(x)·x/2
/// ```
///
/// using `PV ∫ dρ_sc(y)/(y − x) = −x/2`. The regularized integrand is smooth
/// with value `−f''(x)/2` at `y = x`.
pub fn apply_k(
    f: impl Fn(f64) -> f64,
    df: impl Fn(f64) -> f64,
    d2f: impl Fn(f64) -> f64,
    x: f64,
    quad: &SemicircleQuadrature,
) -> Result<f64> {
    check_bulk(x)?;
    let (fx, dfx) = (f(x), df(x));
    let reg = quad.integrate(|y| {
        let d = y - x;
        if d.abs() < 1e-7 {
            -0.5 * d2f(x)
        } else {
            (fx - f(y) + dfx * d) / (d * d)
        }
    });
    Ok(reg + dfx * x / 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cheb_u(n: usize, u: f64) -> f64 {
        let (mut a, mut b) = (1.0, 2.0 * u);
        if n == 0 {
            return a;
        }
        for _ in 1..n {
            let c = 2.0 * u * b - a;
            a = b;
            b = c;
        }
        b
    }

    #[test]
    fn quadrature_orthonormality() {
        let q = SemicircleQuadrature::new(50);
        assert!((q.integrate(|_| 1.0) - 1.0).abs() < 1e-14);
        assert!((q.integrate(|x| x * x) - 1.0).abs() < 1e-14);
        assert!((q.integrate(|x| cheb_u(3, x / 2.0) * cheb_u(5, x / 2.0))).abs() < 1e-13);
    }

    #[test]
    fn kernel_limits() {
        assert!((kernel_pt(0.3, -1.1, 60.0).unwrap() - 1.0).abs() < 1e-12);
        assert!(kernel_pt(2.0, 0.0, 1.0).is_err());
        let q = SemicircleQuadrature::new(2000);
        let mass = q.integrate(|y| kernel_pt(0.3, y, 0.5).unwrap());
        assert!((mass - 1.0).abs() < 1e-10);
    }

    #[test]
    fn chebyshev_eigenfunctions() {
        let q = SemicircleQuadrature::new(400);
        for n in 1..5 {
            let h = 1e-5;
            let f = |x: f64| cheb_u(n, x / 2.0);
            let df = |x: f64| (f(x + h) - f(x - h)) / (2.0 * h);
            let d2f = |x: f64| (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
            for &x in &[-1.3, 0.2, 0.9] {
                let k = apply_k(f, df, d2f, x, &q).unwrap();
                assert!((k - 0.5 * n as f64 * f(x)).abs() < 1e-6, "n = {n}, x = {x}: {k}");
            }
        }
    }
}
