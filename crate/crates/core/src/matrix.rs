//! Dense real-symmetric / complex-Hermitian matrices and their eigendecompositions.

use crate::error::{Error, Result};
use faer::{Mat, Side};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Beta {
    /// Real symmetric.
    Real,
    /// Complex Hermitian.
    Complex,
}

impl Beta {
    pub fn value(self) -> u32 {
        match self {
            Beta::Real => 1,
            Beta::Complex => 2,
        }
    }

    pub fn from_value(b: u32) -> Result<Beta> {
        match b {
            1 => Ok(Beta::Real),
            2 => Ok(Beta::Complex),
            _ => Err(Error::InvalidArgument(format!("beta must be 1 or 2, got {b}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Storage {
    Real(Vec<f64>),
    Complex(Vec<Complex64>),
}

/// Dense `N × N` symmetric (β = 1) or Hermitian (β = 2) matrix, row-major.
///
/// Mutators write both triangles together so symmetry holds bit-for-bit.
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetricMatrix {
    n: usize,
    data: Storage,
}

impl SymmetricMatrix {
    pub fn zeros(n: usize, beta: Beta) -> Self {
        let data = match beta {
            Beta::Real => Storage::Real(vec![0.0; n * n]),
            Beta::Complex => Storage::Complex(vec![Complex64::new(0.0, 0.0); n * n]),
        };
        Self { n, data }
    }

    pub fn from_diagonal(d: &[f64], beta: Beta) -> Self {
        let mut m = Self::zeros(d.len(), beta);
        for (i, &v) in d.iter().enumerate() {
            m.set(i, i, Complex64::new(v, 0.0));
        }
        m
    }

    /// Builds a real symmetric matrix from a row-major buffer, checking symmetry.
    pub fn from_real_rows(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::DimensionMismatch { expected: n * n, found: data.len() });
        }
        for i in 0..n {
            for j in 0..i {
                if data[i * n + j].to_bits() != data[j * n + i].to_bits() {
                    return Err(Error::InvalidArgument(format!("matrix not symmetric at ({i}, {j})")));
                }
            }
        }
        Ok(Self { n, data: Storage::Real(data) })
    }

    pub fn from_complex_rows(n: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::DimensionMismatch { expected: n * n, found: data.len() });
        }
        for i in 0..n {
            if data[i * n + i].im != 0.0 {
                return Err(Error::InvalidArgument(format!("diagonal entry {i} not real")));
            }
            for j in 0..i {
                if data[i * n + j] != data[j * n + i].conj() {
                    return Err(Error::InvalidArgument(format!("matrix not Hermitian at ({i}, {j})")));
                }
            }
        }
        Ok(Self { n, data: Storage::Complex(data) })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn beta(&self) -> Beta {
        match self.data {
            Storage::Real(_) => Beta::Real,
            Storage::Complex(_) => Beta::Complex,
        }
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        match &self.data {
            Storage::Real(v) => Complex64::new(v[i * self.n + j], 0.0),
            Storage::Complex(v) => v[i * self.n + j],
        }
    }

    /// Sets `H_ij = v` and `H_ji = conj(v)`. The imaginary part is dropped for
    /// real matrices and on the diagonal.
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        let n = self.n;
        match &mut self.data {
            Storage::Real(d) => {
                d[i * n + j] = v.re;
                d[j * n + i] = v.re;
            }
            Storage::Complex(d) => {
                if i == j {
                    d[i * n + i] = Complex64::new(v.re, 0.0);
                } else {
                    d[i * n + j] = v;
                    d[j * n + i] = v.conj();
                }
            }
        }
    }

    pub fn real_rows(&self) -> Option<&[f64]> {
        match &self.data {
            Storage::Real(v) => Some(v),
            Storage::Complex(_) => None,
        }
    }

    pub fn complex_rows(&self) -> Option<&[Complex64]> {
        match &self.data {
            Storage::Real(_) => None,
            Storage::Complex(v) => Some(v),
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i).re).collect()
    }

    pub fn trace(&self) -> f64 {
        self.diagonal().iter().sum()
    }

    pub fn max_abs(&self) -> f64 {
        match &self.data {
            Storage::Real(v) => v.iter().fold(0.0, |a, x| a.max(x.abs())),
            Storage::Complex(v) => v.iter().fold(0.0, |a, x| a.max(x.norm())),
        }
    }

    pub fn scale(&mut self, c: f64) {
        match &mut self.data {
            Storage::Real(v) => v.iter_mut().for_each(|x| *x *= c),
            Storage::Complex(v) => v.iter_mut().for_each(|x| *x *= c),
        }
    }

    /// `self ← a·self + b·other`, promoting to complex if `other` is complex.
    pub fn axpby(&mut self, a: f64, other: &SymmetricMatrix, b: f64) -> Result<()> {
        if other.n != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: other.n });
        }
        if self.beta() == Beta::Real && other.beta() == Beta::Complex {
            self.promote();
        }
        match (&mut self.data, &other.data) {
            (Storage::Real(x), Storage::Real(y)) => {
                x.iter_mut().zip(y).for_each(|(x, y)| *x = a * *x + b * y);
            }
            (Storage::Complex(x), Storage::Real(y)) => {
                x.iter_mut().zip(y).for_each(|(x, y)| *x = *x * a + b * y);
            }
            (Storage::Complex(x), Storage::Complex(y)) => {
                x.iter_mut().zip(y).for_each(|(x, y)| *x = *x * a + y * b);
            }
            (Storage::Real(_), Storage::Complex(_)) => unreachable!(),
        }
        Ok(())
    }

    /// `self ← self + diag(d)·c`.
    pub fn add_diagonal(&mut self, d: &[f64], c: f64) -> Result<()> {
        if d.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: d.len() });
        }
        let n = self.n;
        match &mut self.data {
            Storage::Real(v) => d.iter().enumerate().for_each(|(i, x)| v[i * n + i] += c * x),
            Storage::Complex(v) => d.iter().enumerate().for_each(|(i, x)| v[i * n + i].re += c * x),
        }
        Ok(())
    }

    fn promote(&mut self) {
        if let Storage::Real(v) = &self.data {
            self.data = Storage::Complex(v.iter().map(|&x| Complex64::new(x, 0.0)).collect());
        }
    }
}

/// Where a [`SpectralSample`] came from.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SampleOrigin {
    pub model: String,
    pub seed: u64,
    pub t: f64,
    pub tau: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Eigenvectors {
    /// Column-major: `u_k(α) = data[k·N + α]`.
    Real(Vec<f64>),
    Complex(Vec<Complex64>),
}

/// Full eigendecomposition: ascending eigenvalues and orthonormal eigenvectors.
///
/// Each eigenvector is normalized so that its largest-magnitude coordinate is
/// real and positive.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralSample {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Eigenvectors,
    pub origin: SampleOrigin,
}

impl SpectralSample {
    pub fn n(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn beta(&self) -> Beta {
        match self.eigenvectors {
            Eigenvectors::Real(_) => Beta::Real,
            Eigenvectors::Complex(_) => Beta::Complex,
        }
    }

    /// `u_k(α)`.
    pub fn entry(&self, k: usize, alpha: usize) -> Complex64 {
        let n = self.n();
        match &self.eigenvectors {
            Eigenvectors::Real(v) => Complex64::new(v[k * n + alpha], 0.0),
            Eigenvectors::Complex(v) => v[k * n + alpha],
        }
    }

    /// `|u_k(α)|²`.
    pub fn weight(&self, k: usize, alpha: usize) -> f64 {
        let n = self.n();
        match &self.eigenvectors {
            Eigenvectors::Real(v) => v[k * n + alpha].powi(2),
            Eigenvectors::Complex(v) => v[k * n + alpha].norm_sqr(),
        }
    }

    /// Real eigenvector column `u_k`, if the sample is real.
    pub fn real_column(&self, k: usize) -> Option<&[f64]> {
        let n = self.n();
        match &self.eigenvectors {
            Eigenvectors::Real(v) => Some(&v[k * n..(k + 1) * n]),
            Eigenvectors::Complex(_) => None,
        }
    }

    /// `⟨q, u_k⟩` for a real direction `q`.
    pub fn overlap(&self, q: &[f64], k: usize) -> Complex64 {
        let n = self.n();
        match &self.eigenvectors {
            Eigenvectors::Real(v) => {
                Complex64::new(q.iter().zip(&v[k * n..(k + 1) * n]).map(|(a, b)| a * b).sum(), 0.0)
            }
            Eigenvectors::Complex(v) => q.iter().zip(&v[k * n..(k + 1) * n]).map(|(a, b)| b * a).sum(),
        }
    }

    /// `max |U*U − I|` over all entries.
    pub fn orthonormality_residual(&self) -> f64 {
        let n = self.n();
        let mut worst = 0.0f64;
        for a in 0..n {
            for b in a..n {
                let mut s = Complex64::new(0.0, 0.0);
                for i in 0..n {
                    s += self.entry(a, i).conj() * self.entry(b, i);
                }
                let target = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((s - target).norm());
            }
        }
        worst
    }

    /// `max |UΛU* − H|` over all entries.
    pub fn reconstruction_residual(&self, h: &SymmetricMatrix) -> f64 {
        let n = self.n();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                let mut s = Complex64::new(0.0, 0.0);
                for k in 0..n {
                    s += self.entry(k, i) * self.entry(k, j).conj() * self.eigenvalues[k];
                }
                worst = worst.max((s - h.get(i, j)).norm());
            }
        }
        worst
    }
}

/// Eigenvalues and eigenvectors of `h`.
pub fn diagonalize(h: &SymmetricMatrix) -> Result<SpectralSample> {
    let n = h.n();
    let (eigenvalues, eigenvectors) = match &h.data {
        Storage::Real(v) => {
            let m = Mat::<f64>::from_fn(n, n, |i, j| v[i * n + j]);
            let evd = m.self_adjoint_eigen(Side::Lower).map_err(|_| Error::Eigensolver)?;
            let s = evd.S().column_vector();
            let u = evd.U();
            let vals: Vec<f64> = (0..n).map(|k| s[k]).collect();
            let mut vecs = vec![0.0; n * n];
            for k in 0..n {
                let col = &mut vecs[k * n..(k + 1) * n];
                let mut big = 0usize;
                for a in 0..n {
                    col[a] = u[(a, k)];
                    if col[a].abs() > col[big].abs() {
                        big = a;
                    }
                }
                if col[big] < 0.0 {
                    col.iter_mut().for_each(|x| *x = -*x);
                }
            }
            (vals, Eigenvectors::Real(vecs))
        }
        Storage::Complex(v) => {
            let m = Mat::<faer::c64>::from_fn(n, n, |i, j| v[i * n + j]);
            let evd = m.self_adjoint_eigen(Side::Lower).map_err(|_| Error::Eigensolver)?;
            let s = evd.S().column_vector();
            let u = evd.U();
            let vals: Vec<f64> = (0..n).map(|k| s[k].re).collect();
            let mut vecs = vec![Complex64::new(0.0, 0.0); n * n];
            for k in 0..n {
                let col = &mut vecs[k * n..(k + 1) * n];
                let mut big = 0usize;
                for a in 0..n {
                    col[a] = u[(a, k)];
                    if col[a].norm_sqr() > col[big].norm_sqr() {
                        big = a;
                    }
                }
                let phase = col[big].conj() / col[big].norm();
                col.iter_mut().for_each(|x| *x *= phase);
                col[big] = Complex64::new(col[big].re, 0.0);
            }
            (vals, Eigenvectors::Complex(vecs))
        }
    };
    check_sorted(&eigenvalues)?;
    Ok(SpectralSample { eigenvalues, eigenvectors, origin: SampleOrigin::default() })
}

/// Eigenvalues only (ascending); cheaper than [`diagonalize`].
pub fn eigenvalues(h: &SymmetricMatrix) -> Result<Vec<f64>> {
    let n = h.n();
    let vals = match &h.data {
        Storage::Real(v) => Mat::<f64>::from_fn(n, n, |i, j| v[i * n + j])
            .self_adjoint_eigenvalues(Side::Lower)
            .map_err(|_| Error::Eigensolver)?,
        Storage::Complex(v) => Mat::<faer::c64>::from_fn(n, n, |i, j| v[i * n + j])
            .self_adjoint_eigenvalues(Side::Lower)
            .map_err(|_| Error::Eigensolver)?,
    };
    check_sorted(&vals)?;
    Ok(vals)
}

fn check_sorted(vals: &[f64]) -> Result<()> {
    if vals.iter().any(|x| !x.is_finite()) || vals.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::Eigensolver);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_two_swap() {
        let h = SymmetricMatrix::from_real_rows(2, vec![0.0, 1.0, 1.0, 0.0]).unwrap();
        let s = diagonalize(&h).unwrap();
        assert!((s.eigenvalues[0] + 1.0).abs() < 1e-14);
        assert!((s.eigenvalues[1] - 1.0).abs() < 1e-14);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let u0 = s.real_column(0).unwrap();
        let u1 = s.real_column(1).unwrap();
        assert!((u0[0].abs() - r).abs() < 1e-14 && (u0[0] + u0[1]).abs() < 1e-14);
        assert!((u1[0] - r).abs() < 1e-14 && (u1[1] - r).abs() < 1e-14);
    }

    #[test]
    fn diagonal_gives_permutation() {
        let h = SymmetricMatrix::from_diagonal(&[3.0, -1.0, 2.0], Beta::Real);
        let s = diagonalize(&h).unwrap();
        assert_eq!(s.eigenvalues, vec![-1.0, 2.0, 3.0]);
        assert_eq!(s.real_column(0).unwrap(), &[0.0, 1.0, 0.0]);
        assert_eq!(s.real_column(2).unwrap(), &[1.0, 0.0, 0.0]);
    }

    #[test]
    fn hermitian_small() {
        let i = Complex64::new(0.0, 1.0);
        let one = Complex64::new(1.0, 0.0);
        let h = SymmetricMatrix::from_complex_rows(2, vec![one * 0.0, i, -i, one * 0.0]).unwrap();
        let s = diagonalize(&h).unwrap();
        assert!((s.eigenvalues[0] + 1.0).abs() < 1e-14);
        assert!(s.orthonormality_residual() < 1e-14);
        assert!(s.reconstruction_residual(&h) < 1e-14);
        assert_eq!(eigenvalues(&h).unwrap().len(), 2);
    }

    #[test]
    fn rejects_asymmetric() {
        assert!(SymmetricMatrix::from_real_rows(2, vec![0.0, 1.0, 2.0, 0.0]).is_err());
    }
}
