//! Machine-readable verification reports shared by the suites and the CLI.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

/// One asserted property.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    /// Measured quantity, when the check has a scalar summary.
    pub value: Option<f64>,
    pub threshold: Option<f64>,
    #[serde(default)]
    pub detail: serde_json::Value,
}

impl Check {
    pub fn new(name: impl Into<String>, pass: bool) -> Self {
        Check {
            name: name.into(),
            pass,
            value: None,
            threshold: None,
            detail: serde_json::Value::Null,
        }
    }

    /// Passes iff `value <= threshold` (NaN fails).
    pub fn at_most(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Check {
            value: Some(value),
            threshold: Some(threshold),
            ..Check::new(name, value <= threshold)
        }
    }

    pub fn with_detail<D: Serialize>(mut self, detail: &D) -> Result<Self> {
        self.detail =
            serde_json::to_value(detail).map_err(|e| Error::Serialization(e.to_string()))?;
        Ok(self)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub schema_version: u32,
    pub suite: String,
    /// SHA-256 of the canonical JSON form of `config`.
    pub config_hash: String,
    pub config: serde_json::Value,
    pub pass: bool,
    pub checks: Vec<Check>,
    #[serde(default)]
    pub warnings: Vec<String>,
}

impl VerificationReport {
    pub fn new<C: Serialize>(suite: impl Into<String>, config: &C) -> Result<Self> {
        let config =
            serde_json::to_value(config).map_err(|e| Error::Serialization(e.to_string()))?;
        Ok(VerificationReport {
            schema_version: SCHEMA_VERSION,
            suite: suite.into(),
            config_hash: hash_value(&config)?,
            config,
            pass: true,
            checks: Vec::new(),
            warnings: Vec::new(),
        })
    }

    pub fn push(&mut self, check: Check) {
        self.pass &= check.pass;
        self.checks.push(check);
    }

    pub fn warn(&mut self, msg: impl Into<String>) {
        self.warnings.push(msg.into());
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Serialization(e.to_string()))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let r: VerificationReport =
            serde_json::from_str(s).map_err(|e| Error::Serialization(e.to_string()))?;
        if r.schema_version != SCHEMA_VERSION {
            return Err(Error::Data(format!(
                "unsupported report schema version {}",
                r.schema_version
            )));
        }
        Ok(r)
    }
}

/// Hex SHA-256 of the compact JSON encoding of `config`.
pub fn config_hash<C: Serialize>(config: &C) -> Result<String> {
    hash_value(&serde_json::to_value(config).map_err(|e| Error::Serialization(e.to_string()))?)
}

fn hash_value(v: &serde_json::Value) -> Result<String> {
    let bytes = serde_json::to_vec(v).map_err(|e| Error::Serialization(e.to_string()))?;
    Ok(Sha256::digest(&bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_hash() {
        let mut r =
            VerificationReport::new("demo", &serde_json::json!({"d": 1, "alpha": [0.0]})).unwrap();
        r.push(Check::at_most("small", 1e-9, 1e-8));
        r.push(Check::at_most("nan", f64::NAN, 1.0));
        assert!(!r.pass);
        assert_eq!(r.failures().count(), 1);
        assert_eq!(r.config_hash.len(), 64);
        let s = r.to_json().unwrap();
        let back = VerificationReport::from_json(&s).unwrap();
        assert_eq!(back.checks[0], r.checks[0]);
        assert_eq!(back.checks[1].value, None);
        assert_eq!(
            config_hash(&serde_json::json!({"alpha": [0.0], "d": 1})).unwrap(),
            r.config_hash
        );
        assert_ne!(
            config_hash(&serde_json::json!({"d": 2})).unwrap(),
            r.config_hash
        );
    }

    mod properties {
        use proptest::prelude::*;

        use super::*;

        proptest! {
            #[test]
            fn at_most_passes_exactly_below_threshold(v in prop::num::f64::ANY, t in prop::num::f64::NORMAL) {
                prop_assert_eq!(Check::at_most("c", v, t).pass, v <= t);
            }

            #[test]
            fn config_hash_separates_configs(a in -1e6f64..1e6, b in -1e6f64..1e6) {
                let ha = config_hash(&serde_json::json!({ "alpha": a })).unwrap();
                let hb = config_hash(&serde_json::json!({ "alpha": b })).unwrap();
                prop_assert_eq!(ha == hb, a == b);
            }
        }
    }
}
