use super::config::ParticleConfiguration;
use crate::error::{Error, Result};
use crate::matrix::{Beta, SpectralSample};
use crate::stats::Estimate;

/// `(2m − 1)!!`, the number of perfect matchings of `2m` points; `1` for `m = 0`.
pub fn double_factorial_odd(m: usize) -> f64 {
    (1..=m).map(|k| (2 * k - 1) as f64).product()
}

/// `a(2m) = E[N^{2m}]` for a standard Gaussian, for `m = 0..=max`.
pub fn a_table(max: usize) -> Vec<f64> {
    (0..=max).map(double_factorial_odd).collect()
}

fn factorial(m: usize) -> f64 {
    (1..=m).map(|k| k as f64).product()
}

/// `π(η) = ∏_k a(2η_k)/(2^{η_k}·η_k!)`, reversible for the symmetric flow.
pub fn reversible_measure(cfg: &ParticleConfiguration) -> f64 {
    cfg.counts()
        .iter()
        .map(|&(_, m)| double_factorial_odd(m) / (2f64.powi(m as i32) * factorial(m)))
        .product()
}

/// Per-sample moment `∏_k (z_k²/σ_k²)^{η_k}/c(η_k)` with `z_k² = N|⟨q, u_k⟩|²`.
///
/// `c(m) = a(2m)` for real samples and `m!` for complex ones (the moments of
/// a real resp. complex unit-variance Gaussian). `sigma2`, if given, is indexed
/// by eigenvalue index.
pub fn moment_value(sample: &SpectralSample, q: &[f64], cfg: &ParticleConfiguration, sigma2: Option<&[f64]>) -> f64 {
    let n = sample.n() as f64;
    cfg.counts()
        .iter()
        .map(|&(k, m)| {
            let mut z2 = n * sample.overlap(q, k).norm_sqr();
            if let Some(s) = sigma2 {
                z2 /= s[k];
            }
            let c = match sample.beta() {
                Beta::Real => double_factorial_odd(m),
                Beta::Complex => factorial(m),
            };
            z2.powi(m as i32) / c
        })
        .product()
}

/// Monte Carlo estimate of `E[∏ z_k^{2η_k}/a(2η_k)]` over a batch.
pub fn moment_observable(samples: &[SpectralSample], q: &[f64], cfg: &ParticleConfiguration) -> Result<Estimate> {
    let xs: Vec<f64> = samples.iter().map(|s| moment_value(s, q, cfg, None)).collect();
    Estimate::batch_means(&xs)
}

/// Centred overlaps `p_ij = Σ_{α∈I} u_i(α)u_j(α) − c_0·δ_ij` between the
/// eigenvectors with indices in `sites` (real samples).
#[derive(Clone, Debug)]
pub struct OverlapMatrix {
    sites: Vec<usize>,
    p: Vec<f64>,
}

impl OverlapMatrix {
    pub fn new(sample: &SpectralSample, index_set: &[usize], sites: &[usize], c0: f64) -> Result<Self> {
        if sample.beta() != Beta::Real {
            return Err(Error::InvalidArgument("overlap observables are defined for real samples".into()));
        }
        let mut sites = sites.to_vec();
        sites.sort_unstable();
        sites.dedup();
        let m = sites.len();
        let mut p = vec![0.0; m * m];
        for a in 0..m {
            let ua = sample.real_column(sites[a]).unwrap();
            for b in a..m {
                let ub = sample.real_column(sites[b]).unwrap();
                let mut s: f64 = index_set.iter().map(|&al| ua[al] * ub[al]).sum();
                if a == b {
                    s -= c0;
                }
                p[a * m + b] = s;
                p[b * m + a] = s;
            }
        }
        Ok(Self { sites, p })
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let m = self.sites.len();
        let a = self.sites.binary_search(&i).expect("site not in overlap matrix");
        let b = self.sites.binary_search(&j).expect("site not in overlap matrix");
        self.p[a * m + b]
    }
}

/// All perfect matchings of `{0, …, 2m − 1}` as lists of pairs.
pub fn perfect_matchings(vertices: usize) -> Vec<Vec<(usize, usize)>> {
    fn rec(free: &mut Vec<usize>, cur: &mut Vec<(usize, usize)>, out: &mut Vec<Vec<(usize, usize)>>) {
        if free.is_empty() {
            out.push(cur.clone());
            return;
        }
        let first = free.remove(0);
        for k in 0..free.len() {
            let partner = free.remove(k);
            cur.push((first, partner));
            rec(free, cur, out);
            cur.pop();
            free.insert(k, partner);
        }
        free.insert(0, first);
    }
    let mut out = Vec::new();
    if vertices % 2 == 0 {
        rec(&mut (0..vertices).collect(), &mut Vec::new(), &mut out);
    }
    out
}

/// `M(η) = ∏_i (2η_i − 1)!!`.
pub fn matching_count(cfg: &ParticleConfiguration) -> f64 {
    cfg.counts().iter().map(|&(_, m)| double_factorial_odd(m)).product()
}

pub const MAX_MATCHING_PARTICLES: usize = 6;

/// `(1/M(η)) Σ_G ∏_{e∈G} p(e)` over perfect matchings `G` of the vertex set
/// with `2η_i` vertices at each site `i`.
pub fn matching_value(p: &OverlapMatrix, cfg: &ParticleConfiguration) -> Result<f64> {
    let n = cfg.n();
    if n > MAX_MATCHING_PARTICLES {
        return Err(Error::TooManyParticles { particles: n, limit: MAX_MATCHING_PARTICLES });
    }
    let labels: Vec<usize> = cfg.positions().iter().flat_map(|&s| [s, s]).collect();
    let total: f64 = perfect_matchings(2 * n)
        .iter()
        .map(|g| g.iter().map(|&(a, b)| p.get(labels[a], labels[b])).product::<f64>())
        .sum();
    Ok(total / matching_count(cfg))
}

/// Monte Carlo estimate of the perfect-matching observable.
pub fn matching_observable(
    samples: &[SpectralSample],
    index_set: &[usize],
    cfg: &ParticleConfiguration,
    c0: f64,
) -> Result<Estimate> {
    let sites: Vec<usize> = cfg.counts().iter().map(|c| c.0).collect();
    let xs = samples
        .iter()
        .map(|s| matching_value(&OverlapMatrix::new(s, index_set, &sites, c0)?, cfg))
        .collect::<Result<Vec<_>>>()?;
    Estimate::batch_means(&xs)
}

/// `E[p_ij^n]` against the three bounding matching observables: `n` particles
/// at `i`, `n` at `j`, and `n/2` at each.
#[derive(Clone, Debug)]
pub struct HolderCheck {
    pub lhs: Estimate,
    pub bounds: [Estimate; 3],
}

impl HolderCheck {
    /// `E[p_ij^n] / (F(η¹) + F(η²) + F(η³))`.
    pub fn ratio(&self) -> f64 {
        self.lhs.mean / self.bounds.iter().map(|b| b.mean).sum::<f64>()
    }
}

pub fn holder_check(
    samples: &[SpectralSample],
    index_set: &[usize],
    c0: f64,
    i: usize,
    j: usize,
    n: usize,
) -> Result<HolderCheck> {
    if n == 0 || n % 2 == 1 || i == j {
        return Err(Error::InvalidArgument(format!("need even n ≥ 2 and i ≠ j, got n = {n}")));
    }
    let w = super::config::Window::new(i.min(j), i.max(j))?;
    let cfgs = [
        ParticleConfiguration::from_counts(w, &[(i, n)])?,
        ParticleConfiguration::from_counts(w, &[(j, n)])?,
        ParticleConfiguration::from_counts(w, &[(i, n / 2), (j, n / 2)])?,
    ];
    let mut lhs = Vec::with_capacity(samples.len());
    let mut vals: [Vec<f64>; 3] = Default::default();
    for s in samples {
        let p = OverlapMatrix::new(s, index_set, &[i, j], c0)?;
        lhs.push(p.get(i, j).powi(n as i32));
        for (v, c) in vals.iter_mut().zip(&cfgs) {
            v.push(matching_value(&p, c)?);
        }
    }
    Ok(HolderCheck {
        lhs: Estimate::batch_means(&lhs)?,
        bounds: [
            Estimate::batch_means(&vals[0])?,
            Estimate::batch_means(&vals[1])?,
            Estimate::batch_means(&vals[2])?,
        ],
    })
}

#[cfg(test)]
mod tests {
    use super::super::config::Window;
    use super::*;

    #[test]
    fn a_values() {
        assert_eq!(a_table(3), vec![1.0, 1.0, 3.0, 15.0]);
    }

    #[test]
    fn matching_counts() {
        assert_eq!(perfect_matchings(4).len(), 3);
        assert_eq!(perfect_matchings(6).len(), 15);
        assert_eq!(perfect_matchings(8).len(), 105);
        let w = Window::new(0, 3).unwrap();
        let c = ParticleConfiguration::from_counts(w, &[(1, 2), (3, 1)]).unwrap();
        assert_eq!(matching_count(&c), 3.0);
    }

    #[test]
    fn measure_product_form() {
        let w = Window::new(0, 3).unwrap();
        let c = ParticleConfiguration::from_counts(w, &[(0, 3), (2, 1)]).unwrap();
        let expect = (1.0 - 0.5) * (1.0 - 0.25) * (1.0 - 1.0 / 6.0) * (1.0 - 0.5);
        assert!((reversible_measure(&c) - expect).abs() < 1e-15);
    }
}
