//! The run configuration file: model parameters plus evaluation knobs.

use std::path::Path;

use dstmd::config::{EngineParams, EstmdParams, InhibitionParams, LaminaParams, LobulaParams, PipelineConfig, RetinaParams};
use dstmd::estimation::DEFAULT_RADIUS;
use dstmd::stimulus::StimulusSpec;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

/// Detection and scoring settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvalParams {
    /// Suppression and matching radius in pixels.
    pub radius: f64,
    /// Detection threshold used by `run` and `direction`.
    pub gamma: f64,
    /// Log-spaced thresholds in the ROC sweep, besides zero.
    pub gamma_points: usize,
    /// Frames by which the scored truth trails each output frame.
    pub latency: usize,
}

impl Default for EvalParams {
    fn default() -> Self {
        EvalParams {
            radius: DEFAULT_RADIUS,
            gamma: 0.0,
            gamma_points: 50,
            latency: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub retina: RetinaParams,
    pub lamina: LaminaParams,
    pub inhibition: InhibitionParams,
    pub estmd: EstmdParams,
    pub lobula: LobulaParams,
    pub engine: EngineParams,
    pub eval: EvalParams,
}

impl RunConfig {
    /// Reads `path`, or returns the defaults when there is no file.
    pub fn load(path: Option<&Path>) -> Result<RunConfig> {
        let cfg: RunConfig = match path {
            Some(p) => read_toml(p)?,
            None => RunConfig::default(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn pipeline(&self) -> PipelineConfig {
        PipelineConfig {
            retina: self.retina,
            lamina: self.lamina,
            inhibition: self.inhibition,
            estmd: self.estmd,
            lobula: self.lobula.clone(),
            engine: self.engine,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.pipeline().validate()?;
        let e = &self.eval;
        if !(e.radius > 0.0 && e.radius.is_finite()) {
            return Err(CliError::Config(format!("eval.radius must be positive, got {}", e.radius)));
        }
        if !(e.gamma >= 0.0 && e.gamma.is_finite()) {
            return Err(CliError::Config(format!("eval.gamma must be non-negative, got {}", e.gamma)));
        }
        if e.gamma_points == 0 {
            return Err(CliError::Config("eval.gamma_points must be at least 1".into()));
        }
        Ok(())
    }
}

pub fn read_toml<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(CliError::io(path))?;
    toml::from_str(&text).map_err(|source| CliError::Toml { path: path.to_path_buf(), source })
}

/// Reads and validates a stimulus description.
pub fn load_stimulus(path: &Path) -> Result<StimulusSpec> {
    let spec: StimulusSpec = read_toml(path)?;
    spec.validate()?;
    Ok(spec)
}
