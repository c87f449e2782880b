//! Matrix flows, the Dyson eigenvalue/eigenvector SDE, semicircle
//! characteristics and the resolvent flow.
//!
//! Matrix Brownian motion is normalized as `dH = dB/√N` with `B` a symmetric
//! Brownian motion: `E[dB_ij²] = ds` off the diagonal and `2ds` on it, so that
//! at time `s` the increment is `√s` times a GOE matrix.

use crate::ensembles::{sample_wigner, EnsembleSpec};
use crate::error::{Error, Result};
use crate::freeconv::DiagonalPotential;
use crate::matrix::{Beta, SpectralSample, SymmetricMatrix};
use crate::rng::{Rng, SeedStream};
use crate::semicircle;
use num_complex::Complex64;
use rand::Rng as _;
use rand_distr::StandardNormal;

/// `H0 + √s·G` with `G` a fresh GOE (GUE for Hermitian `H0`) draw.
pub fn add_brownian(h0: &SymmetricMatrix, s: f64, seed: u64) -> Result<SymmetricMatrix> {
    if !(s >= 0.0) {
        return Err(Error::InvalidArgument(format!("time must be ≥ 0, got {s}")));
    }
    let mut h = h0.clone();
    if s > 0.0 {
        let g = sample_wigner(&EnsembleSpec::gaussian_invariant(h0.n(), h0.beta(), seed))?;
        h.axpby(1.0, &g, s.sqrt())?;
    }
    Ok(h)
}

/// Variance-preserving Ornstein–Uhlenbeck flow around `D`:
/// `D + e^{−τ/2t}(H0 − D) + √(t(1 − e^{−τ/t}))·G`, exact in law.
///
/// If `H0 = D + √t·W` this equals in law `D + √t'·W + √τ'·G` with
/// `t' = t·e^{−τ/t}` and `τ' = t(1 − e^{−τ/t})`.
pub fn ou_flow(h0: &SymmetricMatrix, d: &DiagonalPotential, t: f64, tau: f64, seed: u64) -> Result<SymmetricMatrix> {
    if !(t > 0.0) || !(tau >= 0.0) {
        return Err(Error::InvalidArgument(format!("need t > 0 and tau ≥ 0, got t = {t}, tau = {tau}")));
    }
    if d.n() != h0.n() {
        return Err(Error::DimensionMismatch { expected: h0.n(), found: d.n() });
    }
    if tau == 0.0 {
        return Ok(h0.clone());
    }
    let decay = (-tau / (2.0 * t)).exp();
    let noise = (t * (-(-tau / t).exp_m1())).sqrt();
    let mut h = h0.clone();
    h.add_diagonal(d.entries(), -1.0)?;
    h.scale(decay);
    let g = sample_wigner(&EnsembleSpec::gaussian_invariant(h0.n(), h0.beta(), seed))?;
    h.axpby(1.0, &g, noise)?;
    h.add_diagonal(d.entries(), 1.0)?;
    Ok(h)
}

/// Ornstein–Uhlenbeck flow with the semicircle as equilibrium:
/// `e^{−τ/2}·H0 + √(1 − e^{−τ})·G`.
pub fn ou_semicircle(h0: &SymmetricMatrix, tau: f64, seed: u64) -> Result<SymmetricMatrix> {
    if !(tau >= 0.0) {
        return Err(Error::InvalidArgument(format!("tau must be ≥ 0, got {tau}")));
    }
    let mut h = h0.clone();
    h.scale((-tau / 2.0).exp());
    if tau > 0.0 {
        let g = sample_wigner(&EnsembleSpec::gaussian_invariant(h0.n(), h0.beta(), seed))?;
        h.axpby(1.0, &g, (-(-tau).exp_m1()).sqrt())?;
    }
    Ok(h)
}

/// Eigenvector part of a [`DbmState`].
#[derive(Clone, Debug, PartialEq)]
pub enum Vectors {
    /// Projections `z_k = √N·⟨q, u_k⟩` on a fixed direction.
    Reduced(Vec<f64>),
    /// All eigenvectors, column-major (`u_k(α) = data[k·N + α]`).
    Full(Vec<f64>),
}

/// State of the symmetric Dyson eigenvalue/eigenvector SDE.
#[derive(Clone, Debug, PartialEq)]
pub struct DbmState {
    pub s: f64,
    pub lambda: Vec<f64>,
    pub vectors: Vectors,
    pub q: Vec<f64>,
}

impl DbmState {
    /// Reduced state for direction `q` (unit norm) from a real sample.
    pub fn reduced(sample: &SpectralSample, q: &[f64]) -> Result<Self> {
        let n = sample.n();
        if sample.beta() != Beta::Real {
            return Err(Error::InvalidArgument("the eigenvector SDE is implemented for β = 1".into()));
        }
        if q.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: q.len() });
        }
        let rn = (n as f64).sqrt();
        let z = (0..n).map(|k| rn * sample.overlap(q, k).re).collect();
        Ok(Self { s: 0.0, lambda: sample.eigenvalues.clone(), vectors: Vectors::Reduced(z), q: q.to_vec() })
    }

    /// Full state tracking every eigenvector.
    pub fn full(sample: &SpectralSample, q: &[f64]) -> Result<Self> {
        let mut st = Self::reduced(sample, q)?;
        let n = sample.n();
        let mut u = Vec::with_capacity(n * n);
        for k in 0..n {
            u.extend_from_slice(sample.real_column(k).unwrap());
        }
        st.vectors = Vectors::Full(u);
        Ok(st)
    }

    pub fn n(&self) -> usize {
        self.lambda.len()
    }

    /// `z_k = √N·⟨q, u_k⟩`.
    pub fn projections(&self) -> Vec<f64> {
        match &self.vectors {
            Vectors::Reduced(z) => z.clone(),
            Vectors::Full(u) => {
                let n = self.n();
                let rn = (n as f64).sqrt();
                (0..n).map(|k| rn * u[k * n..(k + 1) * n].iter().zip(&self.q).map(|(a, b)| a * b).sum::<f64>()).collect()
            }
        }
    }

    /// Smallest gap `λ_{i+1} − λ_i` and its lower index.
    pub fn min_gap(&self) -> (f64, usize) {
        self.lambda
            .windows(2)
            .enumerate()
            .map(|(i, w)| (w[1] - w[0], i))
            .fold((f64::INFINITY, 0), |a, b| if b.0 < a.0 { b } else { a })
    }

    /// Largest step allowed by the stability guard `h ≤ 0.1·N·gap²`.
    pub fn step_limit(&self) -> f64 {
        0.1 * self.n() as f64 * self.min_gap().0.powi(2)
    }

    fn check_order(&self) -> Result<()> {
        let scale = self.lambda.iter().fold(1.0f64, |a, x| a.max(x.abs()));
        let (g, i) = self.min_gap();
        if !(g > 10.0 * f64::EPSILON * scale) {
            return Err(Error::Collision(i, i + 1));
        }
        Ok(())
    }
}

/// Advances `state` by `dtau` in `substeps` Euler–Maruyama steps:
///
/// ```text
/// dλ_k = dB_kk/√N + (1/N) Σ_{ℓ≠k} ds/(λ_k − λ_ℓ)
/// du_k = (1/√N) Σ_{ℓ≠k} dB_kℓ·u_ℓ/(λ_k − λ_ℓ) − (1/2N) Σ_{ℓ≠k} ds·u_k/(λ_k − λ_ℓ)²
/// ```
///
/// The projections are renormalized to `Σ z_k²/N = 1` (full mode:
/// re-orthonormalized) after every step. Fails if a step exceeds
/// [`DbmState::step_limit`] or eigenvalues collide or cross.
pub fn evolve_sde(state: &DbmState, dtau: f64, substeps: usize, seed: u64) -> Result<DbmState> {
    if substeps == 0 || !(dtau >= 0.0) {
        return Err(Error::InvalidArgument("need substeps ≥ 1 and dtau ≥ 0".into()));
    }
    state.check_order()?;
    let h = dtau / substeps as f64;
    let mut rng = SeedStream::new(seed).rng(0);
    let mut st = state.clone();
    for _ in 0..substeps {
        let limit = st.step_limit();
        if h > limit {
            return Err(Error::StabilityGuard { step: h, limit });
        }
        st = euler_step(&st, h, &mut rng, true)?;
    }
    Ok(st)
}

/// [`evolve_sde`] with steps chosen on the fly as `0.01·N·gap²` (capped by the
/// remaining time). A step whose eigenvalues would cross is redrawn at half
/// the size.
pub fn evolve_sde_adaptive(state: &DbmState, dtau: f64, seed: u64) -> Result<DbmState> {
    state.check_order()?;
    let mut rng = SeedStream::new(seed).rng(0);
    let mut st = state.clone();
    let end = state.s + dtau;
    while st.s < end {
        let mut h = (0.1 * st.step_limit()).min(end - st.s);
        loop {
            if h < 1e-300 || st.s + h == st.s {
                return Err(Error::StepUnderflow { time: st.s, step: h });
            }
            match euler_step(&st, h, &mut rng, true) {
                Ok(next) => {
                    st = next;
                    break;
                }
                Err(Error::Collision(..)) => h *= 0.5,
                Err(e) => return Err(e),
            }
        }
    }
    st.s = end;
    Ok(st)
}

/// Drift-only step, for deterministic checks.
pub fn drift_step(state: &DbmState, h: f64) -> Result<DbmState> {
    let mut rng = SeedStream::new(0).rng(0);
    euler_step(state, h, &mut rng, false)
}

fn euler_step(st: &DbmState, h: f64, rng: &mut Rng, noise: bool) -> Result<DbmState> {
    let n = st.n();
    let nf = n as f64;
    let sq = (h).sqrt();
    // Symmetric increment dB with variance h off the diagonal, 2h on it.
    let mut db = vec![0.0; n * n];
    if noise {
        for i in 0..n {
            db[i * n + i] = sq * std::f64::consts::SQRT_2 * rng.sample::<f64, _>(StandardNormal);
            for j in i + 1..n {
                let v = sq * rng.sample::<f64, _>(StandardNormal);
                db[i * n + j] = v;
                db[j * n + i] = v;
            }
        }
    }
    let lam = &st.lambda;
    let mut inv = vec![0.0; n * n];
    for k in 0..n {
        for l in 0..n {
            if k != l {
                inv[k * n + l] = 1.0 / (lam[k] - lam[l]);
            }
        }
    }
    let rn = 1.0 / nf.sqrt();
    let new_lambda: Vec<f64> = (0..n)
        .map(|k| {
            let drift: f64 = inv[k * n..(k + 1) * n].iter().sum::<f64>() * h / nf;
            lam[k] + db[k * n + k] * rn + drift
        })
        .collect();
    let damp = |k: usize| -> f64 { inv[k * n..(k + 1) * n].iter().map(|x| x * x).sum::<f64>() * h / (2.0 * nf) };
    let vectors = match &st.vectors {
        Vectors::Reduced(z) => {
            let mut nz: Vec<f64> = (0..n)
                .map(|k| {
                    let mut s = 0.0;
                    for l in 0..n {
                        if l != k {
                            s += db[k * n + l] * z[l] * inv[k * n + l];
                        }
                    }
                    z[k] + rn * s - damp(k) * z[k]
                })
                .collect();
            let norm = (nz.iter().map(|x| x * x).sum::<f64>() / nf).sqrt();
            nz.iter_mut().for_each(|x| *x /= norm);
            Vectors::Reduced(nz)
        }
        Vectors::Full(u) => {
            let mut nu = vec![0.0; n * n];
            for k in 0..n {
                let c = 1.0 - damp(k);
                for a in 0..n {
                    nu[k * n + a] = c * u[k * n + a];
                }
                for l in 0..n {
                    if l != k {
                        let w = rn * db[k * n + l] * inv[k * n + l];
                        for a in 0..n {
                            nu[k * n + a] += w * u[l * n + a];
                        }
                    }
                }
            }
            orthonormalize(&mut nu, n);
            Vectors::Full(nu)
        }
    };
    let next = DbmState { s: st.s + h, lambda: new_lambda, vectors, q: st.q.clone() };
    if let Some(i) = next.lambda.windows(2).position(|w| w[1] <= w[0]) {
        return Err(Error::Collision(i, i + 1));
    }
    next.check_order()?;
    Ok(next)
}

/// Modified Gram–Schmidt on column-major `u`.
fn orthonormalize(u: &mut [f64], n: usize) {
    for k in 0..n {
        for l in 0..k {
            let d: f64 = (0..n).map(|a| u[k * n + a] * u[l * n + a]).sum();
            for a in 0..n {
                u[k * n + a] -= d * u[l * n + a];
            }
        }
        let norm = (0..n).map(|a| u[k * n + a].powi(2)).sum::<f64>().sqrt();
        for a in 0..n {
            u[k * n + a] /= norm;
        }
    }
}

/// Characteristic of the semicircle resolvent flow:
/// `z_τ = ½(e^{τ/2}(z + √(z² − 4)) + e^{−τ/2}(z − √(z² − 4)))`.
pub fn characteristic(z: Complex64, tau: f64) -> Result<Complex64> {
    if !(z.im > 0.0) {
        return Err(Error::NotUpperHalfPlane(z.im));
    }
    let s = semicircle::sqrt_z2m4(z);
    Ok(z * (tau / 2.0).cosh() + s * (tau / 2.0).sinh())
}

/// `G_τ(z) = e^{−τ/2}·⟨q, (H_τ − z)^{−1} q⟩ = (e^{−τ/2}/N) Σ_k z_k²/(λ_k − z)`.
pub fn resolvent_flow(sample: &SpectralSample, q: &[f64], tau: f64, z: Complex64) -> Result<Complex64> {
    let n = sample.n();
    if q.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: q.len() });
    }
    check_distance(&sample.eigenvalues, z)?;
    let mut acc = Complex64::new(0.0, 0.0);
    for (k, &l) in sample.eigenvalues.iter().enumerate() {
        acc += sample.overlap(q, k).norm_sqr() / (l - z);
    }
    Ok(acc * (-tau / 2.0).exp())
}

/// Basis average of [`resolvent_flow`] over `q = e_1, …, e_N`:
/// `e^{−τ/2}·(1/N) Σ_k 1/(λ_k − z)`.
pub fn resolvent_flow_trace(eigenvalues: &[f64], tau: f64, z: Complex64) -> Result<Complex64> {
    check_distance(eigenvalues, z)?;
    let s: Complex64 = eigenvalues.iter().map(|&l| (l - z).inv()).sum();
    Ok(s * ((-tau / 2.0).exp() / eigenvalues.len() as f64))
}

/// `G_0(w) = Σ_α q_α²/(D_α − w)` for `H_0 = diag(D)`.
pub fn initial_resolvent(d: &DiagonalPotential, q: &[f64], w: Complex64) -> Result<Complex64> {
    if q.len() != d.n() {
        return Err(Error::DimensionMismatch { expected: d.n(), found: q.len() });
    }
    check_distance(d.entries(), w)?;
    Ok(d.entries().iter().zip(q).map(|(&x, &qa)| qa * qa / (x - w)).sum())
}

fn check_distance(eigs: &[f64], z: Complex64) -> Result<()> {
    for (i, &l) in eigs.iter().enumerate() {
        let dist = (l - z).norm();
        if dist < 1e-12 {
            return Err(Error::NearEigenvalue { index: i, distance: dist });
        }
    }
    Ok(())
}
