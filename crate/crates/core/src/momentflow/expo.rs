use super::config::{enumerate_with_cap, Window};
use super::observables::{double_factorial_odd, reversible_measure};
use crate::error::{Error, Result};
use num_complex::Complex64;

/// Per-sample comparison of `exp(X)`, `X = Σ_k e^{−t/2} z_k²/(2(λ_k − z))`, with
/// its configuration expansion truncated at `n ≤ max_n` particles:
///
/// ```text
/// Σ_{n≤max_n} e^{−nt/2} Σ_{|η|=n} f(η)·π(η) / ∏_k (λ_k − z)^{η_k},
/// f(η) = ∏_k z_k^{2η_k}/a(2η_k).
/// ```
#[derive(Clone, Copy, Debug)]
pub struct ExpoCheck {
    pub lhs: Complex64,
    pub series: Complex64,
    /// `|X|^{max_n+1}/(max_n+1)!·e^{|X|}`.
    pub remainder_bound: f64,
}

impl ExpoCheck {
    pub fn error(&self) -> f64 {
        (self.lhs - self.series).norm()
    }

    pub fn holds(&self) -> bool {
        self.error() <= self.remainder_bound + 1e-12 * self.lhs.norm().max(1.0)
    }
}

/// `z` holds the projections `z_k = √N·⟨q, u_k⟩`, `lambda` the eigenvalues.
pub fn exponential_identity(lambda: &[f64], z: &[f64], t: f64, w: Complex64, max_n: usize) -> Result<ExpoCheck> {
    let n = lambda.len();
    if z.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: z.len() });
    }
    let decay = (-t / 2.0).exp();
    let x: Complex64 = lambda.iter().zip(z).map(|(&l, &zk)| decay * zk * zk / (2.0 * (l - w))).sum();
    let window = Window::new(0, n - 1)?;
    let mut series = Complex64::new(1.0, 0.0);
    for m in 1..=max_n {
        let space = enumerate_with_cap(window, m, 5_000_000)?;
        let weight = (-(m as f64) * t / 2.0).exp();
        for cfg in space.configs() {
            let mut term = Complex64::new(weight * reversible_measure(cfg), 0.0);
            for (k, e) in cfg.counts() {
                term *= z[k].powi(2 * e as i32) / double_factorial_odd(e);
                term /= (lambda[k] - w).powi(e as i32);
            }
            series += term;
        }
    }
    let ax = x.norm();
    let fact: f64 = (1..=max_n + 1).map(|k| k as f64).product();
    Ok(ExpoCheck { lhs: x.exp(), series, remainder_bound: ax.powi(max_n as i32 + 1) / fact * ax.exp() })
}
