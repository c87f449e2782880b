use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

pub const SCHEMA_VERSION: u32 = 1;

/// Acceptance band of a checked quantity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    /// Human-readable statement of the rule.
    pub rule: String,
}

/// A named scalar, optionally checked against a tolerance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Quantity {
    pub name: String,
    /// Non-finite values are written as `null`.
    #[serde(with = "nullable")]
    pub value: f64,
    pub se: Option<f64>,
    pub tolerance: Option<Tolerance>,
    /// Distance to the nearest band edge, positive when inside.
    pub margin: Option<f64>,
    pub pass: Option<bool>,
}

/// A table of values, written as CSV next to the report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub config_hash: String,
    pub seed: u64,
    pub n: Vec<usize>,
    pub t: Vec<f64>,
    pub tau: Option<f64>,
    pub config: BTreeMap<String, String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema_version: u32,
    pub experiment: String,
    pub provenance: Provenance,
    pub quantities: Vec<Quantity>,
    pub series: Vec<Series>,
    pub notes: Vec<String>,
}

impl ExperimentReport {
    pub fn new(experiment: &str) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            experiment: experiment.to_string(),
            provenance: Provenance::default(),
            quantities: Vec::new(),
            series: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn scalar(&mut self, name: impl Into<String>, value: f64, se: Option<f64>) {
        self.quantities.push(Quantity { name: name.into(), value, se, tolerance: None, margin: None, pass: None });
    }

    /// Checks `lower ≤ value ≤ upper` (either bound may be absent).
    pub fn check(
        &mut self,
        name: impl Into<String>,
        value: f64,
        se: Option<f64>,
        lower: Option<f64>,
        upper: Option<f64>,
        rule: impl Into<String>,
    ) -> bool {
        let margin = match (lower, upper) {
            (Some(lo), Some(hi)) => (value - lo).min(hi - value),
            (Some(lo), None) => value - lo,
            (None, Some(hi)) => hi - value,
            (None, None) => 0.0,
        };
        let pass = value.is_finite() && margin >= 0.0;
        self.quantities.push(Quantity {
            name: name.into(),
            value,
            se,
            tolerance: Some(Tolerance { lower, upper, rule: rule.into() }),
            margin: Some(margin),
            pass: Some(pass),
        });
        pass
    }

    /// Checks `|value − target| ≤ tol`.
    pub fn check_near(&mut self, name: impl Into<String>, value: f64, se: Option<f64>, target: f64, tol: f64) -> bool {
        let rule = format!("|value - {target}| <= {tol}");
        self.check(name, value, se, Some(target - tol), Some(target + tol), rule)
    }

    pub fn check_at_most(&mut self, name: impl Into<String>, value: f64, se: Option<f64>, upper: f64) -> bool {
        self.check(name, value, se, None, Some(upper), format!("value <= {upper}"))
    }

    /// A pass/fail condition without a numeric band; `value` is 1 or 0.
    pub fn check_flag(&mut self, name: impl Into<String>, pass: bool, rule: impl Into<String>) -> bool {
        self.check(name, if pass { 1.0 } else { 0.0 }, None, Some(1.0), None, rule)
    }

    pub fn series(&mut self, name: impl Into<String>, columns: &[&str], rows: Vec<Vec<f64>>) {
        self.series.push(Series { name: name.into(), columns: columns.iter().map(|c| c.to_string()).collect(), rows });
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    pub fn get(&self, name: &str) -> Option<&Quantity> {
        self.quantities.iter().find(|q| q.name == name)
    }

    pub fn checks(&self) -> impl Iterator<Item = &Quantity> {
        self.quantities.iter().filter(|q| q.pass.is_some())
    }

    pub fn failures(&self) -> Vec<&Quantity> {
        self.checks().filter(|q| q.pass == Some(false)).collect()
    }

    /// True when every check passes.
    pub fn passed(&self) -> bool {
        self.checks().all(|q| q.pass == Some(true))
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(self)
    }
}

mod nullable {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
    }
}

impl Series {
    pub fn to_csv(&self) -> String {
        crate::io::csv(&self.columns.iter().map(String::as_str).collect::<Vec<_>>(), &self.rows)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn margins_and_pass() {
        let mut r = ExperimentReport::new("x");
        assert!(r.check_near("a", 1.02, Some(0.01), 1.0, 0.05));
        assert!((r.get("a").unwrap().margin.unwrap() - 0.03).abs() < 1e-12);
        assert!(!r.check_at_most("b", 3.0, None, 2.0));
        assert!(!r.check("c", f64::NAN, None, None, Some(1.0), "nan fails"));
        r.scalar("d", 4.0, None);
        assert_eq!(r.failures().len(), 2);
        assert!(!r.passed());
        let json = r.to_json().unwrap();
        let back: ExperimentReport = serde_json::from_str(&json).unwrap();
        assert!(back.get("c").unwrap().value.is_nan());
        assert_eq!(back.to_json().unwrap(), json);
    }
}
