use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::loss::ScoringRule;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputKind {
    /// `period, actual, <model>...` point forecasts.
    Forecasts,
    /// `period, <model>...` per-period losses.
    Losses,
    /// Long-format `target, horizon, design, model, value[, metric]`.
    MetaGrid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignConvention {
    #[default]
    LowerIsBetter,
    /// Values are negated once on ingestion (e.g. log predictive densities).
    HigherIsBetter,
}

/// Describes an input file. Stored as TOML next to the data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetManifest {
    pub format_version: u32,
    pub input_kind: InputKind,
    pub scoring_rule: ScoringRule,
    pub benchmark_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<usize>,
    #[serde(default)]
    pub sign_convention: SignConvention,
}

impl DatasetManifest {
    pub fn new(input_kind: InputKind, scoring_rule: ScoringRule, benchmark_id: &str) -> Self {
        DatasetManifest {
            format_version: FORMAT_VERSION,
            input_kind,
            scoring_rule,
            benchmark_id: benchmark_id.to_string(),
            horizon: None,
            sign_convention: SignConvention::LowerIsBetter,
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn parse(text: &str) -> Result<Self> {
        let m: DatasetManifest = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if self.format_version != FORMAT_VERSION {
            return Err(Error::Config(format!(
                "unsupported manifest format_version {} (expected {FORMAT_VERSION})",
                self.format_version
            )));
        }
        if self.benchmark_id.trim().is_empty() {
            return Err(Error::Config("benchmark_id is empty".into()));
        }
        if self.horizon == Some(0) {
            return Err(Error::Config("horizon must be positive".into()));
        }
        match (self.input_kind, self.scoring_rule, self.sign_convention) {
            (InputKind::Forecasts, ScoringRule::External, _) => Err(Error::Config(
                "forecast inputs are scored by squared_error or absolute_error".into(),
            )),
            (InputKind::Forecasts, _, SignConvention::HigherIsBetter) => Err(Error::Config(
                "higher_is_better does not apply to point forecasts".into(),
            )),
            (InputKind::Losses, rule, SignConvention::HigherIsBetter)
                if rule != ScoringRule::External =>
            {
                Err(Error::Config(format!(
                    "{rule} losses are lower-is-better by construction"
                )))
            }
            _ => Ok(()),
        }
    }
}
