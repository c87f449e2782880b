//! Random matrix samplers and deterministic potentials.

use crate::error::{Error, Result};
use crate::freeconv::DiagonalPotential;
use crate::matrix::{Beta, SymmetricMatrix};
use crate::rng::{Rng, SeedStream};
use crate::semicircle;
use num_complex::Complex64;
use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::OnceLock;

/// Law of the unscaled entries `√N·W_ij`; every law has mean 0 and variance 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EntryLaw {
    Gaussian,
    /// `±1` with equal probability.
    Rademacher,
    /// Uniform on `[−√3, √3]`.
    Uniform,
    /// Density proportional to `e^{−y²/2}/cosh(y)`, rescaled to unit variance.
    SmoothNonGaussian,
}

impl FromStr for EntryLaw {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(EntryLaw::Gaussian),
            "rademacher" => Ok(EntryLaw::Rademacher),
            "uniform" => Ok(EntryLaw::Uniform),
            "smooth-nongaussian" | "smooth" => Ok(EntryLaw::SmoothNonGaussian),
            _ => Err(Error::Unknown { kind: "entry law", name: s.to_string() }),
        }
    }
}

impl fmt::Display for EntryLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EntryLaw::Gaussian => "gaussian",
            EntryLaw::Rademacher => "rademacher",
            EntryLaw::Uniform => "uniform",
            EntryLaw::SmoothNonGaussian => "smooth-nongaussian",
        })
    }
}

/// Variance of the diagonal entries relative to the off-diagonal ones.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DiagonalConvention {
    /// `E|W_ii|² = 1/N`, same as off-diagonal.
    Wigner,
    /// `E|W_ii|² = 2/N` (GOE / GUE invariance).
    Invariant,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub n: usize,
    pub beta: Beta,
    pub law: EntryLaw,
    pub diagonal: DiagonalConvention,
    pub seed: u64,
}

impl EnsembleSpec {
    pub fn wigner(n: usize, beta: Beta, law: EntryLaw, seed: u64) -> Self {
        Self { n, beta, law, diagonal: DiagonalConvention::Wigner, seed }
    }

    /// Gaussian invariant ensemble (GOE for β = 1, GUE for β = 2).
    pub fn gaussian_invariant(n: usize, beta: Beta, seed: u64) -> Self {
        Self { n, beta, law: EntryLaw::Gaussian, diagonal: DiagonalConvention::Invariant, seed }
    }
}

/// Draws `W` with independent entries of variance `1/N` above the diagonal.
///
/// For β = 2 the real and imaginary parts of off-diagonal entries are
/// independent, each with variance `1/(2N)`; the diagonal is real. Entries are
/// drawn row by row over the upper triangle from stream 0 of `spec.seed`.
pub fn sample_wigner(spec: &EnsembleSpec) -> Result<SymmetricMatrix> {
    let mut rng = SeedStream::new(spec.seed).rng(0);
    sample_wigner_with(spec, &mut rng)
}

/// Same as [`sample_wigner`] but rejects laws other than the smooth one.
pub fn sample_smooth_wigner(spec: &EnsembleSpec) -> Result<SymmetricMatrix> {
    if spec.law != EntryLaw::SmoothNonGaussian {
        return Err(Error::InvalidArgument(format!("expected smooth-nongaussian law, got {}", spec.law)));
    }
    sample_wigner(spec)
}

/// [`sample_wigner`] drawing from a caller-supplied generator.
pub fn sample_wigner_with(spec: &EnsembleSpec, rng: &mut Rng) -> Result<SymmetricMatrix> {
    let n = spec.n;
    if n == 0 {
        return Err(Error::InvalidArgument("matrix order must be positive".into()));
    }
    let scale = 1.0 / (n as f64).sqrt();
    let diag_scale = match spec.diagonal {
        DiagonalConvention::Wigner => scale,
        DiagonalConvention::Invariant => scale * std::f64::consts::SQRT_2,
    };
    let mut h = SymmetricMatrix::zeros(n, spec.beta);
    let half = std::f64::consts::FRAC_1_SQRT_2;
    for i in 0..n {
        h.set(i, i, Complex64::new(diag_scale * draw(spec.law, rng)?, 0.0));
        for j in i + 1..n {
            let v = match spec.beta {
                Beta::Real => Complex64::new(scale * draw(spec.law, rng)?, 0.0),
                Beta::Complex => {
                    let re = draw(spec.law, rng)?;
                    let im = draw(spec.law, rng)?;
                    Complex64::new(re, im) * (scale * half)
                }
            };
            h.set(i, j, v);
        }
    }
    Ok(h)
}

/// Cap on proposals per smooth-law draw; the acceptance rate is about 0.65,
/// so hitting the cap has probability below `10⁻⁴⁰⁰`.
pub const SMOOTH_RETRY_CAP: usize = 2048;

/// One unit-variance draw from `law`.
pub fn draw(law: EntryLaw, rng: &mut Rng) -> Result<f64> {
    Ok(match law {
        EntryLaw::Gaussian => rng.sample(StandardNormal),
        EntryLaw::Rademacher => {
            if rng.gen::<bool>() {
                1.0
            } else {
                -1.0
            }
        }
        EntryLaw::Uniform => (2.0 * rng.gen::<f64>() - 1.0) * 3f64.sqrt(),
        EntryLaw::SmoothNonGaussian => smooth_draw(rng)? / smooth_law_std(),
    })
}

/// Draw from `ν(y) ∝ e^{−y²/2}/cosh(y)` (before rescaling) by rejection from
/// `N(0, 1)` with acceptance probability `1/cosh(y)`.
fn smooth_draw(rng: &mut Rng) -> Result<f64> {
    for _ in 0..SMOOTH_RETRY_CAP {
        let y: f64 = rng.sample(StandardNormal);
        if rng.gen::<f64>() * y.cosh() < 1.0 {
            return Ok(y);
        }
    }
    Err(Error::RejectionExhausted(SMOOTH_RETRY_CAP))
}

/// Standard deviation of the unscaled smooth law, by quadrature.
pub fn smooth_law_std() -> f64 {
    static STD: OnceLock<f64> = OnceLock::new();
    *STD.get_or_init(|| {
        let (z, v) = smooth_law_moments();
        (v / z).sqrt()
    })
}

/// `(∫ e^{−y²/2}/cosh y, ∫ y² e^{−y²/2}/cosh y)` by the trapezoid rule on
/// `[−40, 40]`, which is spectrally accurate for this integrand.
fn smooth_law_moments() -> (f64, f64) {
    let h = 1e-3;
    let (mut z, mut v) = (0.0, 0.0);
    let k = (40.0 / h) as i64;
    for i in -k..=k {
        let y = i as f64 * h;
        let w = (-0.5 * y * y).exp() / y.cosh();
        z += w;
        v += y * y * w;
    }
    (z * h, v * h)
}

/// Probability that `|√N·W_ij| > x` under the rescaled smooth law.
pub fn smooth_law_tail(x: f64) -> f64 {
    let s = smooth_law_std();
    let h = 1e-3;
    let (z, _) = smooth_law_moments();
    let mut tail = 0.0;
    let mut y = x * s;
    while y < 40.0 {
        tail += (-0.5 * y * y).exp() / y.cosh() * h;
        y += h;
    }
    2.0 * tail / z
}

/// `D + √t·W`.
pub fn deform(d: &DiagonalPotential, t: f64, w: &SymmetricMatrix) -> Result<SymmetricMatrix> {
    if d.n() != w.n() {
        return Err(Error::DimensionMismatch { expected: d.n(), found: w.n() });
    }
    if !(t >= 0.0) {
        return Err(Error::InvalidArgument(format!("t must be ≥ 0, got {t}")));
    }
    let mut h = w.clone();
    h.scale(t.sqrt());
    h.add_diagonal(d.entries(), 1.0)?;
    Ok(h)
}

/// Named deterministic potentials.
#[derive(Clone, Debug, PartialEq)]
pub enum PotentialKind {
    /// Semicircle quantiles `μ_i`, `i = 1..N`, with `∫_{−∞}^{μ_i} ρ_sc = i/N`.
    SemicircleQuantiles,
    /// `N` equispaced points from `a` to `b` inclusive.
    Equispaced { a: f64, b: f64 },
    Zero,
    /// One real per line.
    File(PathBuf),
}

impl FromStr for PotentialKind {
    type Err = Error;

    /// Accepts `semicircle`, `semicircle-quantiles`, `equispaced`,
    /// `equispaced[a,b]`, `zero` and `file:PATH`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "semicircle" || s == "semicircle-quantiles" {
            return Ok(PotentialKind::SemicircleQuantiles);
        }
        if s == "zero" {
            return Ok(PotentialKind::Zero);
        }
        if s == "equispaced" {
            return Ok(PotentialKind::Equispaced { a: -1.0, b: 1.0 });
        }
        if let Some(rest) = s.strip_prefix("equispaced[").and_then(|r| r.strip_suffix(']')) {
            let parts: Vec<&str> = rest.split(',').collect();
            if parts.len() == 2 {
                let a = parts[0].trim().parse::<f64>().map_err(|e| Error::Parse(format!("{s}: {e}")))?;
                let b = parts[1].trim().parse::<f64>().map_err(|e| Error::Parse(format!("{s}: {e}")))?;
                return Ok(PotentialKind::Equispaced { a, b });
            }
            return Err(Error::Parse(format!("expected equispaced[a,b], got {s}")));
        }
        if let Some(path) = s.strip_prefix("file:") {
            return Ok(PotentialKind::File(PathBuf::from(path)));
        }
        Err(Error::Unknown { kind: "potential", name: s.to_string() })
    }
}

impl fmt::Display for PotentialKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PotentialKind::SemicircleQuantiles => f.write_str("semicircle"),
            PotentialKind::Equispaced { a, b } => write!(f, "equispaced[{a},{b}]"),
            PotentialKind::Zero => f.write_str("zero"),
            PotentialKind::File(p) => write!(f, "file:{}", p.display()),
        }
    }
}

pub fn build_potential(kind: &PotentialKind, n: usize) -> Result<DiagonalPotential> {
    let label = kind.to_string();
    match kind {
        PotentialKind::SemicircleQuantiles => DiagonalPotential::new(semicircle::quantiles(n), label),
        PotentialKind::Equispaced { a, b } => {
            if n < 2 {
                return Err(Error::InvalidPotential(format!("need N ≥ 2, got {n}")));
            }
            let h = (b - a) / (n - 1) as f64;
            DiagonalPotential::new((0..n).map(|i| if i + 1 == n { *b } else { a + h * i as f64 }).collect(), label)
        }
        PotentialKind::Zero => DiagonalPotential::new(vec![0.0; n], label),
        PotentialKind::File(path) => {
            let d = crate::io::read_potential(path)?;
            if d.n() != n && n != 0 {
                return Err(Error::DimensionMismatch { expected: n, found: d.n() });
            }
            Ok(d)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equispaced_three() {
        let d = build_potential(&"equispaced[-1,1]".parse().unwrap(), 3).unwrap();
        assert_eq!(d.entries(), &[-1.0, 0.0, 1.0]);
    }

    #[test]
    fn parse_errors() {
        assert!("nope".parse::<PotentialKind>().is_err());
        assert!("equispaced[1]".parse::<PotentialKind>().is_err());
        assert!("cauchy".parse::<EntryLaw>().is_err());
    }

    #[test]
    fn deform_identities() {
        let d = build_potential(&PotentialKind::SemicircleQuantiles, 10).unwrap();
        let w = sample_wigner(&EnsembleSpec::wigner(10, Beta::Real, EntryLaw::Gaussian, 1)).unwrap();
        let h0 = deform(&d, 0.0, &w).unwrap();
        assert_eq!(h0, SymmetricMatrix::from_diagonal(d.entries(), Beta::Real));
        let h = deform(&d, 0.3, &w).unwrap();
        let expect = d.entries().iter().sum::<f64>() + 0.3f64.sqrt() * w.trace();
        assert!((h.trace() - expect).abs() < 1e-12);
        let w5 = sample_wigner(&EnsembleSpec::wigner(5, Beta::Real, EntryLaw::Gaussian, 1)).unwrap();
        assert!(deform(&d, 0.3, &w5).is_err());
    }

    #[test]
    fn rademacher_support_and_determinism() {
        let spec = EnsembleSpec::wigner(20, Beta::Real, EntryLaw::Rademacher, 9);
        let a = sample_wigner(&spec).unwrap();
        assert_eq!(a, sample_wigner(&spec).unwrap());
        let s = 1.0 / 20f64.sqrt();
        for i in 0..20 {
            for j in i + 1..20 {
                assert!((a.get(i, j).re.abs() - s).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn hermitian_diagonal_is_real() {
        let h = sample_wigner(&EnsembleSpec::wigner(6, Beta::Complex, EntryLaw::Gaussian, 2)).unwrap();
        for i in 0..6 {
            assert_eq!(h.get(i, i).im, 0.0);
            for j in 0..6 {
                assert_eq!(h.get(i, j), h.get(j, i).conj());
            }
        }
    }
}
