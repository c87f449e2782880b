//! Small statistics toolkit for Monte Carlo summaries.

use crate::error::{Error, Result};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Mean with a batch-means standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub se: f64,
    pub n: usize,
}

pub const MIN_BATCHES: usize = 20;

impl Estimate {
    /// Splits `xs` into `max(20, ⌊√n⌋)` contiguous batches (fewer only when
    /// there are fewer than 20 samples) and uses the spread of batch means.
    pub fn batch_means(xs: &[f64]) -> Result<Estimate> {
        let n = xs.len();
        if n == 0 {
            return Err(Error::EmptyBatch);
        }
        let mean = xs.iter().sum::<f64>() / n as f64;
        if n == 1 {
            return Ok(Estimate { mean, se: f64::INFINITY, n });
        }
        let b = MIN_BATCHES.max((n as f64).sqrt() as usize).min(n);
        let mut means = Vec::with_capacity(b);
        for j in 0..b {
            let lo = j * n / b;
            let hi = (j + 1) * n / b;
            let s: f64 = xs[lo..hi].iter().sum();
            means.push((s / (hi - lo) as f64, (hi - lo) as f64));
        }
        // Weighted variance of batch means around the grand mean.
        let var: f64 = means.iter().map(|(m, w)| w * (m - mean).powi(2)).sum::<f64>() / n as f64;
        let se = (var / (b - 1) as f64).sqrt();
        Ok(Estimate { mean, se, n })
    }
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

pub fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

/// Pearson correlation; `NaN` when either input is constant.
pub fn correlation(x: &[f64], y: &[f64]) -> f64 {
    let (mx, my) = (mean(x), mean(y));
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    sxy / (sxx * syy).sqrt()
}

/// Sample quantile with linear interpolation between order statistics
/// (Hyndman–Fan type 7).
pub fn quantile(xs: &[f64], p: f64) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    quantile_sorted(&v, p)
}

pub fn quantile_sorted(v: &[f64], p: f64) -> f64 {
    let h = (v.len() - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    v[lo] + (h - lo as f64) * (v[hi] - v[lo])
}

/// Two-sample Kolmogorov–Smirnov statistic and asymptotic p-value.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> (f64, f64) {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort_by(f64::total_cmp);
    y.sort_by(f64::total_cmp);
    let (n, m) = (x.len(), y.len());
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < n && j < m {
        let v = x[i].min(y[j]);
        while i < n && x[i] <= v {
            i += 1;
        }
        while j < m && y[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    let ne = (n * m) as f64 / (n + m) as f64;
    let lambda = (ne.sqrt() + 0.12 + 0.11 / ne.sqrt()) * d;
    (d, kolmogorov_survival(lambda))
}

/// `P(K > λ)` for the Kolmogorov distribution.
pub fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut s = 0.0;
    for k in 1..=200 {
        let k = k as f64;
        let term = 2.0 * (-1f64).powf(k - 1.0) * (-2.0 * k * k * lambda * lambda).exp();
        s += term;
        if term.abs() < 1e-16 {
            break;
        }
    }
    s.clamp(0.0, 1.0)
}

/// Least-squares line `y = a + b·x`; returns `(a, b, se_b)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = mean(x);
    let my = mean(y);
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let b = sxy / sxx;
    let a = my - b * mx;
    let rss: f64 = x.iter().zip(y).map(|(u, v)| (v - a - b * u).powi(2)).sum();
    let se = if n > 2.0 { (rss / (n - 2.0) / sxx).sqrt() } else { f64::NAN };
    (a, b, se)
}

/// Bootstrap distribution of the log–log slope of a high quantile against `N`.
///
/// `groups[g]` holds the samples observed at size `ns[g]`. Each replicate
/// resamples every group with replacement, recomputes its `p`-quantile and fits
/// `log q = a + b·log N`. Returns the sorted replicate slopes.
pub fn bootstrap_quantile_slope<R: Rng>(
    ns: &[f64],
    groups: &[Vec<f64>],
    p: f64,
    replicates: usize,
    rng: &mut R,
) -> Vec<f64> {
    let lx: Vec<f64> = ns.iter().map(|n| n.ln()).collect();
    let mut slopes = Vec::with_capacity(replicates);
    let mut buf = Vec::new();
    for _ in 0..replicates {
        let ly: Vec<f64> = groups
            .iter()
            .map(|g| {
                buf.clear();
                buf.extend((0..g.len()).map(|_| g[rng.gen_range(0..g.len())]));
                buf.sort_by(f64::total_cmp);
                quantile_sorted(&buf, p).max(f64::MIN_POSITIVE).ln()
            })
            .collect();
        slopes.push(linear_fit(&lx, &ly).1);
    }
    slopes.sort_by(f64::total_cmp);
    slopes
}
