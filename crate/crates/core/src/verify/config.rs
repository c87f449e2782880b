use super::Experiment;
use crate::ensembles::{DiagonalConvention, EntryLaw, PotentialKind};
use crate::error::{Error, Result};
use crate::matrix::Beta;
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Kind {
    Usize,
    U64,
    F64,
    /// A real or `auto`.
    AutoF64,
    /// A count or `auto`.
    AutoUsize,
    UsizeList,
    F64List,
    Text,
}

const COMMON: &[(&str, &str, Kind)] = &[
    ("seed", "0", Kind::U64),
    ("model.n", "1000", Kind::Usize),
    ("model.beta", "1", Kind::Usize),
    ("model.law", "gaussian", Kind::Text),
    ("model.diagonal", "wigner", Kind::Text),
    ("model.potential", "semicircle", Kind::Text),
    ("model.t", "auto", Kind::AutoF64),
    ("model.t_exponent", "0.4", Kind::F64),
    ("model.omega", "0.1", Kind::F64),
    ("model.r", "1", Kind::F64),
    ("bulk.kappa", "0.5", Kind::F64),
    ("bulk.indices", "8", Kind::Usize),
    ("bulk.spacing", "1", Kind::Usize),
    ("direction.q", "random", Kind::Text),
    ("sampling.samples", "100", Kind::Usize),
    ("tolerance.se_rule", "5", Kind::F64),
];

fn specific(exp: Experiment) -> &'static [(&'static str, &'static str, Kind)] {
    match exp {
        Experiment::Gaussianity => &[
            ("sampling.samples", "400", Kind::Usize),
            ("bulk.spacing", "20", Kind::Usize),
            ("eta.value", "auto", Kind::AutoF64),
            ("tolerance.moment_rel", "0.05", Kind::F64),
            ("tolerance.peak_ratio", "0.1", Kind::F64),
        ],
        Experiment::VarianceProfile => &[
            ("model.n", "2000", Kind::Usize),
            ("bulk.indices", "50", Kind::Usize),
            ("direction.q", "canonical", Kind::Text),
            ("eta.factor", "0.001", Kind::F64),
            ("profile.span", "2", Kind::F64),
            ("tolerance.l2", "0.1", Kind::F64),
            ("tolerance.span_factor", "2", Kind::F64),
            ("tolerance.linear_rel", "0.2", Kind::F64),
        ],
        Experiment::WeakQue => &[
            ("bulk.indices", "40", Kind::Usize),
            ("sampling.ladder", "500,1000,2000", Kind::UsizeList),
            ("sampling.ladder_samples", "120,60,30", Kind::UsizeList),
            ("index.size", "auto", Kind::AutoUsize),
            ("index.outside_offset", "5", Kind::F64),
            ("eta.factor", "0.001", Kind::F64),
            ("que.c", "0.5,1,2", Kind::F64List),
            ("tolerance.full_mass", "0.01", Kind::F64),
        ],
        Experiment::StrongQue => &[
            ("bulk.indices", "40", Kind::Usize),
            ("sampling.ladder", "500,1000,2000", Kind::UsizeList),
            ("sampling.ladder_samples", "120,60,30", Kind::UsizeList),
            ("index.size", "auto", Kind::AutoUsize),
            ("dynamics.tau", "auto", Kind::AutoF64),
            ("que.quantile", "0.999", Kind::F64),
            ("que.bootstrap", "1000", Kind::Usize),
            ("tolerance.single_ratio", "0.1", Kind::F64),
        ],
        Experiment::LocalLaws => &[
            ("sampling.samples", "20", Kind::Usize),
            ("bulk.indices", "50", Kind::Usize),
            ("eta.points", "8", Kind::Usize),
            ("eta.min", "auto", Kind::AutoF64),
            ("eta.max", "auto", Kind::AutoF64),
            ("energy.points", "7", Kind::Usize),
            ("energy.half_width", "0.3", Kind::F64),
            ("tolerance.averaged_slope", "0.85,1.15", Kind::F64List),
            ("tolerance.isotropic_slope", "0.35,0.65", Kind::F64List),
            ("tolerance.moment_slack", "0.1", Kind::F64),
        ],
        Experiment::DbmContinuity => &[
            ("model.n", "500", Kind::Usize),
            ("sampling.samples", "200", Kind::Usize),
            ("dynamics.a", "0.1", Kind::F64),
            ("dynamics.tau", "auto", Kind::AutoF64),
            ("dynamics.tau_points", "4", Kind::Usize),
            ("eta.value", "auto", Kind::AutoF64),
            ("tolerance.trend_factor", "3", Kind::F64),
        ],
        Experiment::Advection => &[
            ("sampling.ladder", "1000,2000", Kind::UsizeList),
            ("sampling.ladder_samples", "40,20", Kind::UsizeList),
            ("dynamics.tau", "0.0316227766016838", Kind::F64),
            ("eta.grid", "0.0158489319246111,0.03,0.055,0.1", Kind::F64List),
            ("eta.macroscopic", "1", Kind::F64),
            ("energy.points", "11", Kind::Usize),
            ("energy.half_width", "1", Kind::F64),
            ("tolerance.constant", "2", Kind::F64),
            ("tolerance.eta_stability", "2", Kind::F64),
            ("tolerance.doubling", "0.3,0.8", Kind::F64List),
            ("tolerance.macroscopic", "0.01", Kind::F64),
        ],
        Experiment::MomentFlowDemo => &[
            ("model.n", "400", Kind::Usize),
            ("momentflow.window", "200", Kind::Usize),
            ("momentflow.particles", "2", Kind::Usize),
            ("momentflow.balance_window", "8", Kind::Usize),
            ("momentflow.balance_particles", "3", Kind::Usize),
            ("momentflow.boundary", "absorb", Kind::Text),
            ("dynamics.tau", "0.005", Kind::F64),
            ("tolerance.balance", "1e-12", Kind::F64),
            ("tolerance.tail", "1e-8", Kind::F64),
            ("tolerance.mass", "1e-10", Kind::F64),
        ],
        Experiment::KernelDemo => &[
            ("kernel.nodes", "2000", Kind::Usize),
            ("kernel.small_t", "0.01", Kind::F64),
            ("tolerance.mass", "1e-6", Kind::F64),
            ("tolerance.cauchy_rel", "0.15", Kind::F64),
        ],
    }
}

fn parse_list<T: FromStr>(key: &str, v: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    v.split(',')
        .map(|s| s.trim().parse::<T>().map_err(|e| Error::Parse(format!("{key}: '{s}': {e}"))))
        .collect()
}

fn validate(key: &str, kind: Kind, v: &str) -> Result<()> {
    let bad = |e: &dyn std::fmt::Display| Error::Parse(format!("{key}: '{v}': {e}"));
    match kind {
        Kind::Usize => v.parse::<usize>().map(|_| ()).map_err(|e| bad(&e)),
        Kind::U64 => v.parse::<u64>().map(|_| ()).map_err(|e| bad(&e)),
        Kind::F64 => v.parse::<f64>().map(|_| ()).map_err(|e| bad(&e)),
        Kind::AutoF64 if v == "auto" => Ok(()),
        Kind::AutoF64 => v.parse::<f64>().map(|_| ()).map_err(|e| bad(&e)),
        Kind::AutoUsize if v == "auto" => Ok(()),
        Kind::AutoUsize => v.parse::<usize>().map(|_| ()).map_err(|e| bad(&e)),
        Kind::UsizeList => parse_list::<usize>(key, v).map(|_| ()),
        Kind::F64List => parse_list::<f64>(key, v).map(|_| ()),
        Kind::Text => Ok(()),
    }
}

/// Resolved experiment configuration: a flat map of dotted keys, every key
/// with a default.
///
/// Files use one `key = value` pair per line; `#` starts a comment.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    experiment: Experiment,
    values: BTreeMap<String, String>,
    kinds: BTreeMap<&'static str, Kind>,
    /// Thread cap for sample generation; `0` uses all cores. Not part of the
    /// configuration hash since results do not depend on it.
    pub workers: usize,
}

impl ExperimentConfig {
    pub fn new(experiment: Experiment) -> Self {
        let mut values = BTreeMap::new();
        let mut kinds = BTreeMap::new();
        for &(k, v, kind) in COMMON.iter().chain(specific(experiment)) {
            values.insert(k.to_string(), v.to_string());
            kinds.insert(k, kind);
        }
        Self { experiment, values, kinds, workers: 0 }
    }

    pub fn experiment(&self) -> Experiment {
        self.experiment
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim();
        let value = value.trim();
        let kind = *self
            .kinds
            .get(key)
            .ok_or_else(|| Error::Unknown { kind: "configuration key", name: key.to_string() })?;
        validate(key, kind, value)?;
        self.values.insert(key.to_string(), value.to_string());
        Ok(())
    }

    /// Applies a `key=value` override.
    pub fn set_pair(&mut self, pair: &str) -> Result<()> {
        let (k, v) = pair.split_once('=').ok_or_else(|| Error::Parse(format!("expected key=value, got '{pair}'")))?;
        self.set(k, v)
    }

    /// Applies `key = value` lines. An `experiment = name` line, as written by
    /// [`canonical`](Self::canonical), must name this experiment.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (no, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let at = |e: Error| Error::Parse(format!("line {}: {e}", no + 1));
            match line.split_once('=') {
                Some((k, v)) if k.trim() == "experiment" => {
                    if v.trim() != self.experiment.name() {
                        return Err(at(Error::InvalidArgument(format!(
                            "file is for {}, not {}",
                            v.trim(),
                            self.experiment.name()
                        ))));
                    }
                }
                _ => self.set_pair(line).map_err(at)?,
            }
        }
        Ok(())
    }

    pub fn values(&self) -> &BTreeMap<String, String> {
        &self.values
    }

    /// Sorted `key = value` lines, the input of [`hash`](Self::hash).
    pub fn canonical(&self) -> String {
        let mut s = format!("experiment = {}\n", self.experiment.name());
        for (k, v) in &self.values {
            s.push_str(&format!("{k} = {v}\n"));
        }
        s
    }

    /// First 16 hex digits of the SHA-256 of [`canonical`](Self::canonical).
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.canonical().as_bytes());
        hex::encode(&digest[..8])
    }

    fn raw(&self, key: &str) -> Result<&str> {
        self.values
            .get(key)
            .map(String::as_str)
            .ok_or_else(|| Error::Unknown { kind: "configuration key", name: key.to_string() })
    }

    pub fn get_usize(&self, key: &str) -> Result<usize> {
        let v = self.raw(key)?;
        v.parse().map_err(|e| Error::Parse(format!("{key}: '{v}': {e}")))
    }

    pub fn get_f64(&self, key: &str) -> Result<f64> {
        let v = self.raw(key)?;
        v.parse().map_err(|e| Error::Parse(format!("{key}: '{v}': {e}")))
    }

    /// `None` for `auto`.
    pub fn get_auto_f64(&self, key: &str) -> Result<Option<f64>> {
        match self.raw(key)? {
            "auto" => Ok(None),
            _ => self.get_f64(key).map(Some),
        }
    }

    pub fn get_auto_usize(&self, key: &str) -> Result<Option<usize>> {
        match self.raw(key)? {
            "auto" => Ok(None),
            _ => self.get_usize(key).map(Some),
        }
    }

    pub fn get_usize_list(&self, key: &str) -> Result<Vec<usize>> {
        parse_list(key, self.raw(key)?)
    }

    pub fn get_f64_list(&self, key: &str) -> Result<Vec<f64>> {
        parse_list(key, self.raw(key)?)
    }

    pub fn get_text(&self, key: &str) -> Result<&str> {
        self.raw(key)
    }

    /// Two-element list `lo,hi`.
    pub fn get_band(&self, key: &str) -> Result<(f64, f64)> {
        match self.get_f64_list(key)?.as_slice() {
            &[lo, hi] if lo <= hi => Ok((lo, hi)),
            _ => Err(Error::Parse(format!("{key}: expected 'lo,hi'"))),
        }
    }

    pub fn seed(&self) -> u64 {
        self.values["seed"].parse().expect("validated on set")
    }

    pub fn n(&self) -> Result<usize> {
        self.get_usize("model.n")
    }

    /// `t` for matrix size `n`: the explicit value, or `n^{−model.t_exponent}`.
    pub fn t_for(&self, n: usize) -> Result<f64> {
        match self.get_auto_f64("model.t")? {
            Some(t) => Ok(t),
            None => Ok((n as f64).powf(-self.get_f64("model.t_exponent")?)),
        }
    }

    pub fn beta(&self) -> Result<Beta> {
        let b = self.get_usize("model.beta")?;
        Beta::from_value(b as u32)
    }

    pub fn law(&self) -> Result<EntryLaw> {
        self.get_text("model.law")?.parse()
    }

    pub fn diagonal(&self) -> Result<DiagonalConvention> {
        match self.get_text("model.diagonal")? {
            "wigner" => Ok(DiagonalConvention::Wigner),
            "invariant" => Ok(DiagonalConvention::Invariant),
            other => Err(Error::Unknown { kind: "diagonal convention", name: other.to_string() }),
        }
    }

    pub fn potential(&self) -> Result<PotentialKind> {
        self.get_text("model.potential")?.parse()
    }

    /// Flags `t ∉ [N^{−1+ω}, N^{−ω}·r]`; `None` when inside.
    pub fn t_window_flag(&self, n: usize, t: f64) -> Result<Option<String>> {
        let omega = self.get_f64("model.omega")?;
        let r = self.get_f64("model.r")?;
        let nf = n as f64;
        let (lo, hi) = (nf.powf(-1.0 + omega), nf.powf(-omega) * r);
        Ok((t < lo || t > hi).then(|| format!("t = {t} lies outside [{lo}, {hi}] at N = {n}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_overrides_and_hash() {
        let mut c = ExperimentConfig::new(Experiment::Gaussianity);
        assert_eq!(c.get_usize("sampling.samples").unwrap(), 400);
        let h0 = c.hash();
        c.apply_text("# comment\nmodel.n = 200\n\nsampling.samples=10 # trailing\n").unwrap();
        assert_eq!(c.n().unwrap(), 200);
        assert_ne!(c.hash(), h0);
        c.workers = 3;
        let h1 = c.hash();
        c.workers = 1;
        assert_eq!(c.hash(), h1);
        assert!(c.set("no.such", "1").is_err());
        assert!(c.set("model.n", "x").is_err());
        assert!((c.t_for(200).unwrap() - 200f64.powf(-0.4)).abs() < 1e-15);
        assert!(c.t_window_flag(200, 0.1).unwrap().is_none());
        assert!(c.t_window_flag(200, 0.9).unwrap().is_some());

        let mut back = ExperimentConfig::new(Experiment::Gaussianity);
        back.apply_text(&c.canonical()).unwrap();
        assert_eq!(back.hash(), c.hash());
        let mut other = ExperimentConfig::new(Experiment::KernelDemo);
        assert!(other.apply_text("experiment = gaussianity\n").is_err());
    }
}
