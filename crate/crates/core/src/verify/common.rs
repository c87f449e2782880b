use super::{ExperimentConfig, ExperimentReport};
use crate::ensembles::{build_potential, deform, sample_wigner_with, EnsembleSpec};
use crate::error::{Error, Result};
use crate::freeconv::{DiagonalPotential, FreeConvolution};
use crate::matrix::SymmetricMatrix;
use crate::rng::SeedStream;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

/// Stream labels under the master seed.
pub const SAMPLES: u64 = 1;
pub const NOISE: u64 = 2;
pub const DIRECTION: u64 = 3;
pub const BOOTSTRAP: u64 = 4;
pub const PHASES: u64 = 5;
pub const VALUES: u64 = 6;

/// Potential, free convolution and sampler for one matrix size.
pub struct Model {
    pub t: f64,
    pub d: DiagonalPotential,
    pub fc: FreeConvolution,
    spec: EnsembleSpec,
}

impl Model {
    pub fn new(cfg: &ExperimentConfig, n: usize) -> Result<Self> {
        let t = cfg.t_for(n)?;
        Self::with_t(cfg, n, t)
    }

    pub fn with_t(cfg: &ExperimentConfig, n: usize, t: f64) -> Result<Self> {
        let d = build_potential(&cfg.potential()?, n)?;
        let fc = FreeConvolution::new(d.clone(), t)?;
        let spec = EnsembleSpec { n, beta: cfg.beta()?, law: cfg.law()?, diagonal: cfg.diagonal()?, seed: 0 };
        Ok(Self { t, d, fc, spec })
    }

    /// `D + √t·W` with `W` drawn from stream `s` of `seeds`.
    pub fn matrix(&self, seeds: &SeedStream, s: usize) -> Result<SymmetricMatrix> {
        let w = sample_wigner_with(&self.spec, &mut seeds.rng(s as u64))?;
        deform(&self.d, self.t, &w)
    }

    /// Index of the entry of `D` closest to `x`.
    pub fn nearest_site(&self, x: f64) -> usize {
        let e = self.d.entries();
        let i = e.partition_point(|&v| v < x);
        if i == 0 {
            0
        } else if i == e.len() || x - e[i - 1] <= e[i] - x {
            i - 1
        } else {
            i
        }
    }
}

/// Runs `f(0..count)` on at most `workers` threads (`0`: all cores),
/// preserving order.
pub fn par_map<T, F>(workers: usize, count: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    pool.install(|| (0..count).into_par_iter().map(&f).collect())
}

/// `bulk.indices` indices spaced by `bulk.spacing` around `N/2`, all within the
/// central `bulk.kappa` fraction of the spectrum.
pub fn bulk_indices(cfg: &ExperimentConfig, n: usize) -> Result<Vec<usize>> {
    let count = cfg.get_usize("bulk.indices")?.max(1);
    let spacing = cfg.get_usize("bulk.spacing")?.max(1);
    let kappa = cfg.get_f64("bulk.kappa")?;
    let first = (n / 2) as i64 - (count / 2 * spacing) as i64;
    let half = kappa * n as f64 / 2.0;
    (0..count)
        .map(|j| {
            let k = first + (j * spacing) as i64;
            if k < 0 || (k as f64 - n as f64 / 2.0).abs() > half {
                return Err(Error::InvalidArgument(format!(
                    "bulk index {k} lies outside the central fraction {kappa} of N = {n}"
                )));
            }
            Ok(k as usize)
        })
        .collect()
}

/// `direction.q`: `random`, `flat`, `canonical` (site `N/2`) or `canonical:α`.
pub fn direction(cfg: &ExperimentConfig, n: usize) -> Result<Vec<f64>> {
    let kind = cfg.get_text("direction.q")?;
    let mut q = vec![0.0; n];
    match kind {
        "random" => {
            let mut rng = SeedStream::new(cfg.seed()).child(DIRECTION).rng(n as u64);
            q.iter_mut().for_each(|x| *x = StandardNormal.sample(&mut rng));
            let norm = q.iter().map(|x| x * x).sum::<f64>().sqrt();
            q.iter_mut().for_each(|x| *x /= norm);
        }
        "flat" => q.iter_mut().for_each(|x| *x = 1.0 / (n as f64).sqrt()),
        "canonical" => q[n / 2] = 1.0,
        other => {
            let alpha = other
                .strip_prefix("canonical:")
                .and_then(|a| a.parse::<usize>().ok())
                .filter(|&a| a < n)
                .ok_or_else(|| Error::Unknown { kind: "direction", name: other.to_string() })?;
            q[alpha] = 1.0;
        }
    }
    Ok(q)
}

pub fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    if points == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..points).map(|i| (a + (b - a) * i as f64 / (points - 1) as f64).exp()).collect()
}

pub fn lin_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    if points == 1 {
        return vec![0.5 * (lo + hi)];
    }
    (0..points).map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64).collect()
}

/// Report with provenance sizes filled in and the `t`-window flag noted.
pub fn start_report(cfg: &ExperimentConfig, sizes: &[(usize, f64)], tau: Option<f64>) -> Result<ExperimentReport> {
    let mut r = ExperimentReport::new(cfg.experiment().name());
    r.provenance.n = sizes.iter().map(|s| s.0).collect();
    r.provenance.t = sizes.iter().map(|s| s.1).collect();
    r.provenance.tau = tau;
    for &(n, t) in sizes {
        if let Some(flag) = cfg.t_window_flag(n, t)? {
            r.note(flag);
        }
    }
    Ok(r)
}

/// `Σ_I v` over the contiguous block of `size` sites centred at `centre`;
/// errors if it leaves `[0, n)`.
pub fn block(centre: usize, size: usize, n: usize) -> Result<std::ops::Range<usize>> {
    let lo = centre as i64 - (size / 2) as i64;
    if lo < 0 || lo as usize + size > n {
        return Err(Error::InvalidArgument(format!("index set of size {size} at {centre} leaves [0, {n})")));
    }
    Ok(lo as usize..lo as usize + size)
}
