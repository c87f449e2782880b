use super::{ComplexPoint, FreeConvolution};
use crate::error::{Error, Result};

/// Admissible `η` range `[N^{−1+ω}, N^{−ω}·√(t/N)]` for the variance profile.
pub fn eta_window(n: usize, t: f64, omega: f64) -> (f64, f64) {
    let n = n as f64;
    (n.powf(-1.0 + omega), n.powf(-omega) * (t / n).sqrt())
}

/// `σ_t²(q, k, η)` for a set of bulk indices.
#[derive(Clone, Debug, PartialEq)]
pub struct VarianceProfile {
    pub q: Vec<f64>,
    pub ks: Vec<usize>,
    pub values: Vec<f64>,
    pub eta: f64,
    /// Whether `eta` lies in [`eta_window`] for the `ω` used.
    pub in_window: bool,
}

impl FreeConvolution {
    /// `t·Im m_t(γ + iη)`, the half-width of the Cauchy profile at energy `γ`.
    pub fn profile_width(&self, gamma: f64, eta: f64) -> Result<f64> {
        Ok(self.t() * self.solve_m(ComplexPoint::new(gamma, eta)?)?.im)
    }

    /// `σ² = Σ_j q_j²·t / ((D_j − γ_{k,t})² + (t·Im m_t(γ_{k,t} + iη))²)` for the 0-based
    /// bulk index `k`.
    pub fn variance_profile(&self, q: &[f64], k: usize, eta: f64) -> Result<f64> {
        check_unit(q, self.potential().n())?;
        let gamma = self.gamma(k)?;
        let w = self.profile_width(gamma, eta)?;
        let t = self.t();
        Ok(self
            .potential()
            .entries()
            .iter()
            .zip(q)
            .map(|(&d, &qj)| qj * qj * t / ((d - gamma).powi(2) + w * w))
            .sum())
    }

    /// [`variance_profile`](Self::variance_profile) over several `k`, flagging `η`
    /// outside the admissible window for exponent `omega`.
    pub fn variance_profiles(&self, q: &[f64], ks: &[usize], eta: f64, omega: f64) -> Result<VarianceProfile> {
        let values = ks.iter().map(|&k| self.variance_profile(q, k, eta)).collect::<Result<Vec<_>>>()?;
        let (lo, hi) = eta_window(self.potential().n(), self.t(), omega);
        Ok(VarianceProfile { q: q.to_vec(), ks: ks.to_vec(), values, eta, in_window: eta >= lo && eta <= hi })
    }

    /// `σ_t²(e_α, k, η)` for every coordinate `α`.
    pub fn coordinate_profile(&self, k: usize, eta: f64) -> Result<Vec<f64>> {
        let gamma = self.gamma(k)?;
        let w = self.profile_width(gamma, eta)?;
        let t = self.t();
        Ok(self.potential().entries().iter().map(|&d| t / ((d - gamma).powi(2) + w * w)).collect())
    }

    /// Coordinate profile centred at the subordinated energy `γ + t·Re m_t`:
    /// `t / ((D_α − γ − t·Re m)² + (t·Im m)²)`, i.e. `t·|g_α|²` at `η → 0`.
    pub fn subordinated_profile(&self, k: usize, eta: f64) -> Result<Vec<f64>> {
        let gamma = self.gamma(k)?;
        let m = self.solve_m(ComplexPoint::new(gamma, eta)?)?;
        let t = self.t();
        let (c, w) = (gamma + t * m.re, t * m.im);
        Ok(self.potential().entries().iter().map(|&d| t / ((d - c).powi(2) + w * w)).collect())
    }
}

fn check_unit(q: &[f64], n: usize) -> Result<()> {
    if q.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: q.len() });
    }
    let norm: f64 = q.iter().map(|x| x * x).sum();
    if (norm - 1.0).abs() > 1e-8 {
        return Err(Error::InvalidArgument(format!("direction must be a unit vector, |q|² = {norm}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::super::*;

    #[test]
    fn peak_and_tail_values() {
        let d: Vec<f64> = (0..101).map(|i| i as f64 / 50.0 - 1.0).collect();
        let fc = FreeConvolution::new(DiagonalPotential::new(d.clone(), "eq").unwrap(), 0.05).unwrap();
        let k = 50;
        let gamma = fc.gamma(k).unwrap();
        let eta = 1e-4;
        let w = fc.profile_width(gamma, eta).unwrap();
        let prof = fc.coordinate_profile(k, eta).unwrap();
        for (a, &da) in d.iter().enumerate() {
            let expect = 0.05 / ((da - gamma).powi(2) + w * w);
            assert!((prof[a] - expect).abs() <= 1e-12 * expect);
        }
        let mut q = vec![0.0; 101];
        q[50] = 1.0;
        let s = fc.variance_profile(&q, k, eta).unwrap();
        assert!((s - prof[50]).abs() < 1e-12 * s);
        assert!(fc.variance_profile(&[1.0; 101], k, eta).is_err());
    }

    #[test]
    fn window_flag() {
        let (lo, hi) = eta_window(1000, 0.1, 0.1);
        assert!(lo < hi);
        let d: Vec<f64> = (0..1000).map(|i| i as f64 / 500.0 - 1.0).collect();
        let fc = FreeConvolution::new(DiagonalPotential::new(d, "eq").unwrap(), 0.1).unwrap();
        let q = vec![1.0 / 1000f64.sqrt(); 1000];
        assert!(fc.variance_profiles(&q, &[500], 0.5 * (lo + hi), 0.1).unwrap().in_window);
        assert!(!fc.variance_profiles(&q, &[500], 10.0 * hi, 0.1).unwrap().in_window);
    }
}
