use super::FreeConvolution;
use crate::error::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::PI;

const INITIAL_PANELS: usize = 64;
const MAX_DEPTH: usize = 40;

/// Piecewise-quadratic model of the regularized density `ρ_ε = Im m_t(· + iε)/π`
/// from adaptive Simpson quadrature, with a first-order debiased CDF.
///
/// Convolving with the Cauchy kernel of width `ε` shifts the CDF by
/// `(ε/π)·Re m_t(x) + O(ε²)`, so the model uses
///
/// ```text
/// F(x) = T_left + ∫_a^x ρ_ε − (ε/π)·Re m_t(x + iε)
/// ```
///
/// where `T_left = (ε/π)·Re m_t(a + iε)` is the regularized mass to the left of
/// the bracket `[a, b]`. Inside each accepted cell the density and `Re m` are the
/// parabolas through the cell's three nodes.
#[derive(Clone, Debug)]
pub struct QuantileTable {
    cells: Vec<Cell>,
    /// Undebiased cumulative `T_left + ∫_a^{cell.a} ρ_ε` at each cell start.
    cum: Vec<f64>,
    /// Debiased CDF at each cell end.
    right: Vec<f64>,
    /// Debiased CDF at the right end of the bracket; 1 up to quadrature and `O(ε²)` error.
    pub mass: f64,
    /// Estimated absolute quadrature error.
    pub error: f64,
    pub eta_reg: f64,
    pub bracket: (f64, f64),
}

#[derive(Clone, Copy, Debug)]
struct Node {
    rho: f64,
    re: f64,
}

#[derive(Clone, Copy, Debug)]
struct Cell {
    a: f64,
    b: f64,
    fa: Node,
    fm: Node,
    fb: Node,
}

fn parabola(fa: f64, fm: f64, fb: f64, s: f64) -> f64 {
    let c1 = -3.0 * fa + 4.0 * fm - fb;
    let c2 = 2.0 * fa - 4.0 * fm + 2.0 * fb;
    fa + c1 * s + c2 * s * s
}

impl Cell {
    fn simpson(&self) -> f64 {
        (self.b - self.a) / 6.0 * (self.fa.rho + 4.0 * self.fm.rho + self.fb.rho)
    }

    /// `∫_a^x` of the density parabola.
    fn partial(&self, x: f64) -> f64 {
        let h = self.b - self.a;
        let s = (x - self.a) / h;
        let (fa, fm, fb) = (self.fa.rho, self.fm.rho, self.fb.rho);
        let c1 = -3.0 * fa + 4.0 * fm - fb;
        let c2 = 2.0 * fa - 4.0 * fm + 2.0 * fb;
        h * (fa * s + c1 * s * s / 2.0 + c2 * s * s * s / 3.0)
    }

    fn s(&self, x: f64) -> f64 {
        (x - self.a) / (self.b - self.a)
    }

    fn density(&self, x: f64) -> f64 {
        parabola(self.fa.rho, self.fm.rho, self.fb.rho, self.s(x))
    }

    fn re_m(&self, x: f64) -> f64 {
        parabola(self.fa.re, self.fm.re, self.fb.re, self.s(x))
    }
}

struct Integrand<'a> {
    fc: &'a FreeConvolution,
    eta: f64,
    last: Option<Complex64>,
}

impl Integrand<'_> {
    fn eval(&mut self, x: f64) -> Result<Node> {
        let m = self.fc.density_from(x, self.eta, self.last)?;
        self.last = Some(m);
        Ok(Node { rho: m.im / PI, re: m.re })
    }
}

impl QuantileTable {
    pub(super) fn build(fc: &FreeConvolution, tolerance: f64) -> Result<Self> {
        let pad = 3.0 * fc.t().sqrt();
        let (lo, hi) = (fc.potential().min() - pad, fc.potential().max() + pad);
        let eta = fc.default_eta_reg();
        let mut f = Integrand { fc, eta, last: None };
        let mut cells = Vec::new();
        let mut error = 0.0;
        let mut failed = false;
        let h = (hi - lo) / INITIAL_PANELS as f64;
        let mut fa = f.eval(lo)?;
        let tail_left = eta / PI * fa.re;
        for p in 0..INITIAL_PANELS {
            let a = lo + p as f64 * h;
            let b = if p + 1 == INITIAL_PANELS { hi } else { lo + (p + 1) as f64 * h };
            let fm = f.eval(0.5 * (a + b))?;
            let fb = f.eval(b)?;
            let cell = Cell { a, b, fa, fm, fb };
            let tol = tolerance / INITIAL_PANELS as f64;
            refine(&mut f, cell, tol, 0, &mut cells, &mut error, &mut failed)?;
            fa = fb;
        }
        if failed && error > tolerance {
            return Err(Error::Quadrature { residual: error, tolerance });
        }
        let mut cum = Vec::with_capacity(cells.len());
        let mut acc = tail_left;
        for c in &cells {
            cum.push(acc);
            acc += c.simpson();
        }
        let last = cells[cells.len() - 1];
        let mass = acc - eta / PI * last.fb.re;
        if !((mass - 1.0).abs() < 1e-3) {
            return Err(Error::Quadrature { residual: (mass - 1.0).abs(), tolerance: 1e-3 });
        }
        let mut table = Self { cells, cum, right: Vec::new(), mass, error, eta_reg: eta, bracket: (lo, hi) };
        table.right = (0..table.cells.len()).map(|i| table.cdf_in(i, table.cells[i].b)).collect();
        Ok(table)
    }

    fn cell_index(&self, x: f64) -> usize {
        self.cells.partition_point(|c| c.b < x).min(self.cells.len() - 1)
    }

    fn cdf_in(&self, i: usize, x: f64) -> f64 {
        let c = &self.cells[i];
        self.cum[i] + c.partial(x) - self.eta_reg / PI * c.re_m(x)
    }

    /// `∫_{−∞}^{x} ρ_t`.
    pub fn cdf(&self, x: f64) -> f64 {
        if x <= self.bracket.0 {
            return 0.0;
        }
        if x >= self.bracket.1 {
            return 1.0;
        }
        self.cdf_in(self.cell_index(x), x)
    }

    /// Regularized density from the interpolation model.
    pub fn density(&self, x: f64) -> f64 {
        if x <= self.bracket.0 || x >= self.bracket.1 {
            return 0.0;
        }
        self.cells[self.cell_index(x)].density(x)
    }

    /// Smallest model point where the CDF reaches `p`.
    pub fn invert(&self, p: f64) -> f64 {
        let i = self.right.partition_point(|&r| r < p).min(self.cells.len() - 1);
        let cell = self.cells[i];
        let (mut lo, mut hi) = (cell.a, cell.b);
        let mut x = 0.5 * (lo + hi);
        for _ in 0..200 {
            let g = self.cdf_in(i, x) - p;
            if g > 0.0 {
                hi = x;
            } else {
                lo = x;
            }
            let d = cell.density(x);
            let mut next = if d > 0.0 { x - g / d } else { f64::NAN };
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - x).abs() <= 4.0 * f64::EPSILON * (1.0 + x.abs()) {
                return next;
            }
            x = next;
        }
        x
    }
}

fn refine(
    f: &mut Integrand<'_>,
    cell: Cell,
    tol: f64,
    depth: usize,
    out: &mut Vec<Cell>,
    error: &mut f64,
    failed: &mut bool,
) -> Result<()> {
    let m = 0.5 * (cell.a + cell.b);
    let left = Cell { a: cell.a, b: m, fa: cell.fa, fm: f.eval(0.5 * (cell.a + m))?, fb: cell.fm };
    let right = Cell { a: m, b: cell.b, fa: cell.fm, fm: f.eval(0.5 * (m + cell.b))?, fb: cell.fb };
    let diff = left.simpson() + right.simpson() - cell.simpson();
    if diff.abs() <= 15.0 * tol || depth >= MAX_DEPTH {
        if depth >= MAX_DEPTH && diff.abs() > 15.0 * tol {
            *failed = true;
        }
        *error += diff.abs() / 15.0;
        out.push(left);
        out.push(right);
        return Ok(());
    }
    refine(f, left, 0.5 * tol, depth + 1, out, error, failed)?;
    refine(f, right, 0.5 * tol, depth + 1, out, error, failed)
}

/// Level used for the last quantile `γ_N`: the model CDF only reaches 1 up to
/// `O(ε²)`, so level 1 is replaced by a point just inside the right edge.
pub(super) const EDGE_LEVEL: f64 = 1.0 - 1e-9;

impl FreeConvolution {
    /// Absolute tolerance of the quantile quadrature on the total mass.
    pub const QUANTILE_TOLERANCE: f64 = 1e-10;

    /// Quadrature model of `ρ_t`, built on first use.
    pub fn quantile_table(&self) -> Result<&QuantileTable> {
        if let Some(t) = self.table.get() {
            return Ok(t);
        }
        let t = QuantileTable::build(self, Self::QUANTILE_TOLERANCE)?;
        Ok(self.table.get_or_init(|| t))
    }

    /// `γ_1 < … < γ_count` with `∫_{−∞}^{γ_i} ρ_t = i/count`.
    ///
    /// At `t = 0` the measure is atomic and `γ_i` is the empirical quantile of
    /// `D`. The last level `i = count` is taken at `1 − 10⁻⁹`, i.e. at the edge.
    pub fn quantiles(&self, count: usize) -> Result<Vec<f64>> {
        if count == 0 {
            return Ok(Vec::new());
        }
        let d = self.potential().entries();
        if self.t() == 0.0 {
            let n = d.len();
            return Ok((1..=count).map(|i| d[((i * n).div_ceil(count)).clamp(1, n) - 1]).collect());
        }
        let table = self.quantile_table()?;
        Ok((1..=count)
            .map(|i| {
                let p = if i == count { EDGE_LEVEL } else { i as f64 / count as f64 };
                table.invert(p)
            })
            .collect())
    }

    /// `γ_{k+1,t}` for the 0-based bulk index `k`, at resolution `N`.
    pub fn gamma(&self, k: usize) -> Result<f64> {
        let n = self.potential().n();
        if k >= n {
            return Err(Error::InvalidArgument(format!("index {k} out of range for N = {n}")));
        }
        if self.t() == 0.0 {
            return Ok(self.potential().entries()[k]);
        }
        let p = if k + 1 == n { EDGE_LEVEL } else { (k + 1) as f64 / n as f64 };
        Ok(self.quantile_table()?.invert(p))
    }
}

#[cfg(test)]
mod tests {
    use super::super::*;

    #[test]
    fn partial_matches_simpson() {
        let node = |rho| super::Node { rho, re: 0.0 };
        let c = super::Cell { a: 0.0, b: 2.0, fa: node(1.0), fm: node(3.0), fb: node(2.0) };
        assert!((c.partial(2.0) - c.simpson()).abs() < 1e-14);
        assert!((c.density(1.0) - 3.0).abs() < 1e-14);
    }

    #[test]
    fn atomic_quantiles_are_entries() {
        let d = DiagonalPotential::new(vec![3.0, 1.0, 2.0, 0.0], "x").unwrap();
        let fc = FreeConvolution::new(d, 0.0).unwrap();
        assert_eq!(fc.quantiles(4).unwrap(), vec![0.0, 1.0, 2.0, 3.0]);
    }

    #[test]
    fn symmetric_potential_has_centered_median() {
        let d = DiagonalPotential::new((0..40).map(|i| i as f64 / 39.0 * 2.0 - 1.0).collect(), "eq").unwrap();
        let fc = FreeConvolution::new(d, 0.1).unwrap();
        let g = fc.quantiles(40).unwrap();
        assert!(g[19].abs() < 1e-9);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
        let table = fc.quantile_table().unwrap();
        for (i, &x) in g.iter().enumerate().take(39) {
            assert!((table.cdf(x) - (i + 1) as f64 / 40.0).abs() < 1e-12);
        }
    }
}
