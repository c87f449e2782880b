//! Monte Carlo experiments over deformed Wigner matrices.
//!
//! Each experiment reads an [`ExperimentConfig`], draws its samples from
//! seed-derived streams (so results do not depend on the worker count) and
//! returns an [`ExperimentReport`] of scalars, checks and series. Standard
//! errors come from batch means over independent samples.

mod common;
mod config;
mod demos;
mod flows;
mod report;
mod spectral;

pub use config::ExperimentConfig;
pub use report::{ExperimentReport, Provenance, Quantity, Series, Tolerance, SCHEMA_VERSION};

use crate::error::{Error, Result};
use std::fmt;
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Experiment {
    Gaussianity,
    VarianceProfile,
    WeakQue,
    StrongQue,
    LocalLaws,
    DbmContinuity,
    Advection,
    MomentFlowDemo,
    KernelDemo,
}

impl Experiment {
    pub const ALL: [Experiment; 9] = [
        Experiment::Gaussianity,
        Experiment::VarianceProfile,
        Experiment::WeakQue,
        Experiment::StrongQue,
        Experiment::LocalLaws,
        Experiment::DbmContinuity,
        Experiment::Advection,
        Experiment::MomentFlowDemo,
        Experiment::KernelDemo,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Gaussianity => "gaussianity",
            Experiment::VarianceProfile => "variance-profile",
            Experiment::WeakQue => "weak-que",
            Experiment::StrongQue => "strong-que",
            Experiment::LocalLaws => "local-laws",
            Experiment::DbmContinuity => "dbm-continuity",
            Experiment::Advection => "advection",
            Experiment::MomentFlowDemo => "moment-flow-demo",
            Experiment::KernelDemo => "kernel-demo",
        }
    }

    pub fn summary(self) -> &'static str {
        match self {
            Experiment::Gaussianity => "Gaussianity of bulk eigenvectors",
            Experiment::VarianceProfile => "Cauchy-shaped variance profile of eigenvector entries",
            Experiment::WeakQue => "Weak quantum unique ergodicity around the variance profile",
            Experiment::StrongQue => "High-probability QUE bound for the Gaussian-divisible ensemble",
            Experiment::LocalLaws => "Averaged, entrywise and isotropic local laws",
            Experiment::DbmContinuity => "Continuity of resolvent functionals along the OU flow",
            Experiment::Advection => "Advection of the resolvent along semicircle characteristics",
            Experiment::MomentFlowDemo => "Eigenvector moment flow on a particle window",
            Experiment::KernelDemo => "Continuum kernel p_t and the operator K",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            Experiment::Gaussianity => {
                "Gaussianity of bulk eigenvectors. Samples W_t = D + sqrt(t) W, normalizes the overlap \
                 sqrt(N / sigma^2(q,k)) |<q, u_k>| by the free-convolution variance profile and compares its \
                 moments of order 2, 4, 6 with the real Gaussian targets 1, 3, 15 (beta = 1) or the complex \
                 targets 1, 2, 6 (beta = 2). Also reports correlations of squared overlaps between distinct \
                 bulk indices and the single-coordinate variance at the profile peak."
            }
            Experiment::VarianceProfile => {
                "Regresses E[N u_k(alpha)^2], pooled over central bulk indices by the offset of alpha from \
                 the profile peak, against t / ((D_alpha - gamma_k)^2 + (t Im m_t)^2). Reports the relative \
                 L2 fit error, the half-maximum span in sites against Nt, and how the profile half-width \
                 scales with t."
            }
            Experiment::WeakQue => {
                "Exceedance probability of (Nt/|I|) |sum_I u_k(alpha)^2 - (1/N) sum_I sigma^2| over a grid of \
                 thresholds, along an N-ladder at a fixed t-exponent, for index sets I around the profile \
                 peak and far outside it."
            }
            Experiment::StrongQue => {
                "Adds a small GOE component of variance tau = (t^2/N)^(1/3) and records high quantiles of \
                 |sum_I (u_k^2 - sigma^2/N)| and |sum_I u_k u_l| divided by Xi = I_hat / (Nt)^(1/3). Tests \
                 that the quantile shows no increasing trend along the N-ladder."
            }
            Experiment::LocalLaws => {
                "Resolvent residuals against free-convolution predictions on a grid of spectral scales eta: \
                 |s - m_t|, |G_ii - g_i| / (t |g_i|^2), |G_ij| / min(|g_i|, |g_j|) and the isotropic \
                 |<q,Gq> - sum q_k^2 g_k| / Im(sum q_k^2 g_k). Fits log-log slopes against 1/(N eta)."
            }
            Experiment::DbmContinuity => {
                "Runs the variance-preserving Ornstein-Uhlenbeck flow from W_t for short times tau and compares \
                 <q, G(z) q> before and after on coupled samples. The mean change must shrink at least \
                 linearly as tau decreases."
            }
            Experiment::Advection => {
                "Evolves diag(D) under the semicircle Ornstein-Uhlenbeck flow and compares the normalized trace \
                 resolvent G_tau(z) with G_0 evaluated at the characteristic map z -> z_tau. Reports the 99th \
                 percentile of (N eta) |G_tau(z) - G_0(z_tau)| across eta and N."
            }
            Experiment::MomentFlowDemo => {
                "Builds the eigenvector moment flow generator on a window of sites from one sampled spectrum. \
                 Checks detailed balance, conservation, short plus long range decomposition, the maximum \
                 principle and finite speed of propagation of the transition kernel."
            }
            Experiment::KernelDemo => {
                "Evaluates the continuum transition density p_t with respect to the semicircle law: mass \
                 conservation, the small-time Cauchy shape, the large-time limit, and the Chebyshev \
                 eigenfunctions of K."
            }
        }
    }

    pub fn run(self, cfg: &ExperimentConfig) -> Result<ExperimentReport> {
        if cfg.experiment() != self {
            return Err(Error::InvalidArgument(format!(
                "configuration is for {}, not {}",
                cfg.experiment().name(),
                self.name()
            )));
        }
        let mut report = match self {
            Experiment::Gaussianity => spectral::gaussianity(cfg),
            Experiment::VarianceProfile => spectral::variance_profile_fit(cfg),
            Experiment::WeakQue => spectral::weak_que(cfg),
            Experiment::StrongQue => spectral::strong_que(cfg),
            Experiment::LocalLaws => flows::local_laws(cfg),
            Experiment::DbmContinuity => flows::dbm_continuity(cfg),
            Experiment::Advection => flows::advection_check(cfg),
            Experiment::MomentFlowDemo => demos::moment_flow_demo(cfg),
            Experiment::KernelDemo => demos::kernel_demo(cfg),
        }?;
        report.provenance.config_hash = cfg.hash();
        report.provenance.seed = cfg.seed();
        report.provenance.config = cfg.values().clone();
        Ok(report)
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| Error::Unknown { kind: "experiment", name: s.to_string() })
    }
}

pub fn gaussianity(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    Experiment::Gaussianity.run(cfg)
}

pub fn variance_profile_fit(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    Experiment::VarianceProfile.run(cfg)
}

pub fn weak_que(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    Experiment::WeakQue.run(cfg)
}

pub fn strong_que(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    Experiment::StrongQue.run(cfg)
}

pub fn local_laws(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    Experiment::LocalLaws.run(cfg)
}

pub fn dbm_continuity(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    Experiment::DbmContinuity.run(cfg)
}

pub fn advection_check(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    Experiment::Advection.run(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for e in Experiment::ALL {
            assert_eq!(e.name().parse::<Experiment>().unwrap(), e);
            assert!(!e.description().is_empty());
        }
        assert!("nope".parse::<Experiment>().is_err());
        assert!(Experiment::Gaussianity.description().contains("Gaussianity of bulk eigenvectors"));
        assert!(Experiment::Advection.description().contains("characteristic map"));
    }
}
