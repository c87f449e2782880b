use super::config::ConfigSpace;
use crate::error::{Error, Result};
use std::sync::Arc;

/// Which jumps `i → j` the generator keeps.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Range {
    /// All jumps (the full generator `B`).
    Full,
    /// `|i − j| ≤ ℓ` (short-range `S`).
    Short(usize),
    /// `|i − j| > ℓ` (long-range `L`).
    Long(usize),
}

impl Range {
    fn keeps(self, i: usize, j: usize) -> bool {
        match self {
            Range::Full => true,
            Range::Short(l) => i.abs_diff(j) <= l,
            Range::Long(l) => i.abs_diff(j) > l,
        }
    }
}

/// Treatment of jumps that leave the window.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Boundary {
    /// Jump to an absorbing state whose observable value is a fixed reference.
    Absorb,
    /// Suppress the jump.
    Reflect,
}

/// Sparse generator of the moment flow on a [`ConfigSpace`] for a frozen
/// eigenvalue snapshot.
///
/// Row `η` holds the rates `η → ξ` for `ξ` in the space, plus `outside[η]`, the
/// total rate of jumps out of the window (zero for [`Boundary::Reflect`]). The
/// diagonal is minus the total exit rate, so rows sum to zero.
#[derive(Clone, Debug)]
pub struct FlowGenerator {
    space: Arc<ConfigSpace>,
    range: Range,
    boundary: Boundary,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    rates: Vec<f64>,
    outside: Vec<f64>,
    diag: Vec<f64>,
}

/// Rate of `η → η^{i,j}`: `2η_i(1 + 2η_j)/(N(λ_i − λ_j)²)`.
pub fn jump_rate(eta_i: usize, eta_j: usize, n: usize, li: f64, lj: f64) -> f64 {
    2.0 * eta_i as f64 * (1.0 + 2.0 * eta_j as f64) / (n as f64 * (li - lj).powi(2))
}

pub fn build_generator(
    space: &Arc<ConfigSpace>,
    lambda: &[f64],
    range: Range,
    boundary: Boundary,
) -> Result<FlowGenerator> {
    let n = lambda.len();
    let w = space.window();
    if w.b >= n {
        return Err(Error::DimensionMismatch { expected: w.b + 1, found: n });
    }
    let mut row_ptr = Vec::with_capacity(space.len() + 1);
    let mut cols = Vec::new();
    let mut rates = Vec::new();
    let mut outside = vec![0.0; space.len()];
    let mut diag = vec![0.0; space.len()];
    let mut row: Vec<(usize, f64)> = Vec::new();
    let mut buf = Vec::with_capacity(space.n());
    row_ptr.push(0);
    for (r, cfg) in space.configs().iter().enumerate() {
        row.clear();
        let counts = cfg.counts();
        let mut exit = 0.0;
        for &(i, eta_i) in &counts {
            for j in 0..n {
                if j == i || !range.keeps(i, j) {
                    continue;
                }
                if lambda[i] == lambda[j] {
                    return Err(Error::CoincidentEigenvalues(i.min(j), i.max(j)));
                }
                let eta_j = counts.iter().find(|c| c.0 == j).map_or(0, |c| c.1);
                let rate = jump_rate(eta_i, eta_j, n, lambda[i], lambda[j]);
                if w.contains(j) {
                    buf.clear();
                    buf.extend_from_slice(cfg.positions());
                    let at = buf.iter().position(|&p| p == i).unwrap();
                    buf.remove(at);
                    let ins = buf.partition_point(|&p| p < j);
                    buf.insert(ins, j);
                    let c = space.index_of(&buf).expect("jump target inside window must be enumerated");
                    row.push((c, rate));
                    exit += rate;
                } else if boundary == Boundary::Absorb {
                    outside[r] += rate;
                    exit += rate;
                }
            }
        }
        row.sort_unstable_by_key(|e| e.0);
        for &(c, rate) in &row {
            if cols.len() > row_ptr[r] && *cols.last().unwrap() == c {
                *rates.last_mut().unwrap() += rate;
            } else {
                cols.push(c);
                rates.push(rate);
            }
        }
        row_ptr.push(cols.len());
        diag[r] = -exit;
    }
    Ok(FlowGenerator { space: Arc::clone(space), range, boundary, row_ptr, cols, rates, outside, diag })
}

impl FlowGenerator {
    pub fn space(&self) -> &Arc<ConfigSpace> {
        &self.space
    }

    pub fn range(&self) -> Range {
        self.range
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Off-diagonal entries `(ξ, rate)` of row `η`.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (lo, hi) = (self.row_ptr[r], self.row_ptr[r + 1]);
        self.cols[lo..hi].iter().copied().zip(self.rates[lo..hi].iter().copied())
    }

    /// Rate `η → ξ` (0 if absent).
    pub fn rate(&self, from: usize, to: usize) -> f64 {
        let (lo, hi) = (self.row_ptr[from], self.row_ptr[from + 1]);
        match self.cols[lo..hi].binary_search(&to) {
            Ok(k) => self.rates[lo + k],
            Err(_) => 0.0,
        }
    }

    pub fn outside_rate(&self, r: usize) -> f64 {
        self.outside[r]
    }

    pub fn diagonal(&self, r: usize) -> f64 {
        self.diag[r]
    }

    /// `diag + Σ off-diagonal + outside` for row `r`; zero up to rounding.
    pub fn row_sum(&self, r: usize) -> f64 {
        self.diag[r] + self.row(r).map(|e| e.1).sum::<f64>() + self.outside[r]
    }

    pub fn max_exit_rate(&self) -> f64 {
        self.diag.iter().fold(0.0, |a, d| a.max(-d))
    }

    /// `(Gen f)(η) = Σ_ξ rate(η→ξ)(f(ξ) − f(η)) + outside(η)(reference − f(η))`.
    pub fn apply(&self, f: &[f64], reference: f64, out: &mut [f64]) {
        for r in 0..self.len() {
            let mut s = self.diag[r] * f[r] + self.outside[r] * reference;
            for (c, rate) in self.row(r) {
                s += rate * f[c];
            }
            out[r] = s;
        }
    }

    /// Forward (Kolmogorov) action on a distribution `p`; returns the rate of
    /// mass flowing to the absorbing state.
    pub fn apply_transpose(&self, p: &[f64], out: &mut [f64]) -> f64 {
        out.iter_mut().for_each(|x| *x = 0.0);
        let mut absorbed = 0.0;
        for r in 0..self.len() {
            let pr = p[r];
            if pr == 0.0 {
                continue;
            }
            out[r] += self.diag[r] * pr;
            for (c, rate) in self.row(r) {
                out[c] += rate * pr;
            }
            absorbed += self.outside[r] * pr;
        }
        absorbed
    }
}

#[cfg(test)]
mod tests {
    use super::super::config::{enumerate, Window};
    use super::*;

    #[test]
    fn two_site_single_particle() {
        let space = Arc::new(enumerate(Window::new(0, 1).unwrap(), 1).unwrap());
        let g = 0.3;
        let gen = build_generator(&space, &[0.0, g], Range::Full, Boundary::Absorb).unwrap();
        let expect = 2.0 / (2.0 * g * g);
        assert!((gen.rate(0, 1) - expect).abs() < 1e-12);
        assert!((gen.rate(1, 0) - expect).abs() < 1e-12);
        assert_eq!(gen.row_sum(0), 0.0);
    }

    #[test]
    fn double_occupancy_rate() {
        let space = Arc::new(enumerate(Window::new(0, 2).unwrap(), 2).unwrap());
        let lambda = [0.0, 0.5, 1.5];
        let gen = build_generator(&space, &lambda, Range::Full, Boundary::Reflect).unwrap();
        let from = space.index_of(&[0, 0]).unwrap();
        let to = space.index_of(&[0, 2]).unwrap();
        assert!((gen.rate(from, to) - 4.0 / (3.0 * 1.5f64.powi(2))).abs() < 1e-12);
        assert!(build_generator(&space, &[0.0, 0.0, 1.0], Range::Full, Boundary::Reflect).is_err());
    }
}
