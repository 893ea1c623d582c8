//! Experiment configuration, schema `meandimlab/v1`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dynsys::{SystemSpec, DEFAULT_THETA};
use crate::marker::MarkerSpec;
use crate::signal::GammaVariant;
use crate::{Error, Result};

pub const CONFIG_SCHEMA: &str = "meandimlab/v1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum AutoKeyword {
    #[serde(rename = "AUTO")]
    Auto,
}

/// A value or the keyword `"AUTO"`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AutoOr<T> {
    Auto(AutoKeyword),
    Value(T),
}

impl<T> AutoOr<T> {
    pub fn auto() -> Self {
        AutoOr::Auto(AutoKeyword::Auto)
    }

    pub fn value(&self) -> Option<&T> {
        match self {
            AutoOr::Auto(_) => None,
            AutoOr::Value(v) => Some(v),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TilingConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    pub delta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactorConfig {
    pub eps: f64,
    pub n_horizon: AutoOr<u64>,
    pub m: AutoOr<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingConfig {
    pub count: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema: String,
    pub system: SystemSpec,
    pub marker: AutoOr<MarkerSpec>,
    pub tiling: TilingConfig,
    pub factor: FactorConfig,
    pub sampling: SamplingConfig,
    #[serde(default)]
    pub outputs: OutputConfig,
    #[serde(default)]
    pub gamma: GammaVariant,
}

impl Default for ExperimentConfig {
    /// Golden rotation on `[0,1]^Z x S^1` with `delta = 0.2`, `eps = 0.25`.
    fn default() -> Self {
        Self {
            schema: CONFIG_SCHEMA.into(),
            system: SystemSpec::new(1, DEFAULT_THETA, 1_000_000_000, 0.1),
            marker: AutoOr::auto(),
            tiling: TilingConfig {
                r: None,
                delta: 0.2,
                c: None,
            },
            factor: FactorConfig {
                eps: 0.25,
                n_horizon: AutoOr::auto(),
                m: AutoOr::auto(),
            },
            sampling: SamplingConfig { count: 240, seed: 1 },
            outputs: OutputConfig::default(),
            gamma: GammaVariant::MaxAtZero,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Static checks; system and marker constants are validated when built.
    pub fn check(&self) -> Result<()> {
        if self.schema != CONFIG_SCHEMA {
            return Err(Error::Config(format!(
                "unsupported schema `{}`, expected `{CONFIG_SCHEMA}`",
                self.schema
            )));
        }
        if !(self.tiling.delta > 0.0 && self.tiling.delta < 1.0) {
            return Err(Error::Config("tiling.delta must lie in (0,1)".into()));
        }
        if let Some(r) = self.tiling.r {
            if !(r > 0.0) {
                return Err(Error::Config("tiling.r must be positive".into()));
            }
        }
        if !(self.factor.eps > 0.0) {
            return Err(Error::Config("factor.eps must be positive".into()));
        }
        if matches!(self.factor.n_horizon, AutoOr::Value(0)) {
            return Err(Error::Config("factor.n_horizon must be positive".into()));
        }
        if matches!(self.factor.m, AutoOr::Value(m) if m < 2) {
            return Err(Error::Config("factor.m must be at least 2".into()));
        }
        if self.sampling.count == 0 {
            return Err(Error::Config("sampling.count must be positive".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_default() {
        let cfg = ExperimentConfig::default();
        let text = serde_json::to_string_pretty(&cfg).unwrap();
        assert!(text.contains("\"AUTO\""));
        assert!(text.contains("\"D\": 1"));
        assert_eq!(ExperimentConfig::from_json(&text).unwrap(), cfg);
    }

    #[test]
    fn explicit_values_parse() {
        let text = r#"{
            "schema": "meandimlab/v1",
            "system": {"D": 2, "theta": 0.618033988749, "window_radius": 100000, "decay": 0.1},
            "marker": {"arc_center": 0.0, "arc_radius": 0.01, "inner_radius": 0.005, "M": 34, "M1": 200},
            "tiling": {"r": 9, "delta": 0.2, "c": 1.2},
            "factor": {"eps": 0.25, "n_horizon": 2, "m": 12},
            "sampling": {"count": 10, "seed": 4},
            "outputs": {"dir": "out"}
        }"#;
        let cfg = ExperimentConfig::from_json(text).unwrap();
        assert_eq!(cfg.factor.m.value(), Some(&12));
        assert_eq!(cfg.marker.value().unwrap().m, 34);
    }

    #[test]
    fn bad_configs_are_rejected() {
        let mut cfg = ExperimentConfig::default();
        cfg.schema = "other".into();
        assert!(cfg.check().is_err());
        assert!(ExperimentConfig::from_json("{}").is_err());
        let mut cfg = ExperimentConfig::default();
        cfg.factor.m = AutoOr::Value(1);
        assert!(cfg.check().is_err());
    }
}
