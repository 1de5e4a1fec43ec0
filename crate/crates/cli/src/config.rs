use std::path::PathBuf;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Top level of a run file. Experiment parameters live under `[params]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub experiment: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub params: toml::Table,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Schema(e.message().to_string()))
    }

    pub fn load(path: &std::path::Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

/// Decodes an experiment's `[params]` table into its typed schema.
pub fn decode<P: DeserializeOwned>(params: &toml::Table) -> Result<P, CliError> {
    toml::Value::Table(params.clone())
        .try_into()
        .map_err(|e: toml::de::Error| CliError::Schema(format!("params: {}", e.message())))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    #[default]
    Linear,
    Log,
}

/// `{ start, stop, count }`, endpoints included. A bare number is a
/// one-point sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sweep {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    pub spacing: Spacing,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepTable {
    start: f64,
    stop: f64,
    count: usize,
    #[serde(default)]
    spacing: Spacing,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum SweepRepr {
    Fixed(f64),
    Range(SweepTable),
}

impl<'de> Deserialize<'de> for Sweep {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        match SweepRepr::deserialize(d).map_err(|_| {
            serde::de::Error::custom("expected a number or a table with exactly start, stop, count and optional spacing")
        })? {
            SweepRepr::Fixed(x) => Ok(Self::fixed(x)),
            SweepRepr::Range(t) => Ok(Self { start: t.start, stop: t.stop, count: t.count, spacing: t.spacing }),
        }
    }
}

impl Sweep {
    pub fn fixed(x: f64) -> Self {
        Self { start: x, stop: x, count: 1, spacing: Spacing::Linear }
    }

    pub fn values(&self, name: &str) -> Result<Vec<f64>, CliError> {
        if self.count == 0 {
            return Err(CliError::Schema(format!("{name}: count must be at least 1")));
        }
        if !(self.start.is_finite() && self.stop.is_finite()) {
            return Err(CliError::Schema(format!("{name}: endpoints must be finite")));
        }
        if self.count == 1 {
            return Ok(vec![self.start]);
        }
        let n = (self.count - 1) as f64;
        match self.spacing {
            Spacing::Linear => Ok((0..self.count).map(|i| self.start + (self.stop - self.start) * i as f64 / n).collect()),
            Spacing::Log => {
                if self.start <= 0.0 || self.stop <= 0.0 {
                    return Err(CliError::Schema(format!("{name}: log spacing needs positive endpoints")));
                }
                let (a, b) = (self.start.ln(), self.stop.ln());
                Ok((0..self.count).map(|i| (a + (b - a) * i as f64 / n).exp()).collect())
            }
        }
    }
}
