//! Model parameters.
//!
//! Defaults reproduce the published parameter table. Temporal constants are in
//! frames (one frame is 1 ms at the reference 1000 Hz sampling rate); spatial
//! constants are in pixels.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{SurroundParams, DEFAULT_MASS_CUTOFF};

/// Photoreceptor blur.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RetinaParams {
    pub sigma1: f64,
}

impl Default for RetinaParams {
    fn default() -> Self {
        Self { sigma1: 1.0 }
    }
}

/// Band-pass and lateral inhibition of the large monopolar cells.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LaminaParams {
    pub n1: u32,
    pub tau1: f64,
    pub n2: u32,
    pub tau2: f64,
    pub sigma2: f64,
    pub sigma3: f64,
    pub lambda1: f64,
    pub lambda2: f64,
}

impl Default for LaminaParams {
    fn default() -> Self {
        Self {
            n1: 2,
            tau1: 3.0,
            n2: 6,
            tau2: 9.0,
            sigma2: 1.5,
            sigma3: 3.0,
            lambda1: 3.0,
            lambda2: 9.0,
        }
    }
}

/// Second-order (centre-surround) lateral inhibition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InhibitionParams {
    pub a: f64,
    pub b: f64,
    pub sigma4: f64,
    pub sigma5: f64,
    pub e: f64,
    pub rho: f64,
}

impl Default for InhibitionParams {
    fn default() -> Self {
        let s = SurroundParams::default();
        Self {
            a: s.a,
            b: s.b,
            sigma4: s.sigma_center,
            sigma5: s.sigma_surround,
            e: s.e,
            rho: s.rho,
        }
    }
}

impl InhibitionParams {
    pub fn surround(&self) -> SurroundParams {
        SurroundParams {
            sigma_center: self.sigma4,
            sigma_surround: self.sigma5,
            e: self.e,
            rho: self.rho,
            a: self.a,
            b: self.b,
        }
    }
}

/// Delay of the single-position ESTMD correlator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EstmdParams {
    pub n3: u32,
    pub tau3: f64,
}

impl Default for EstmdParams {
    fn default() -> Self {
        Self { n3: 5, tau3: 25.0 }
    }
}

/// Medulla delay lines, two-point correlation and directional inhibition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LobulaParams {
    /// Delay of the ON signal at the partner position.
    pub n4: u32,
    pub tau4: f64,
    /// Delay of the OFF signal at the home position.
    pub n5: u32,
    pub tau5: f64,
    /// Delay of the OFF signal at the partner position.
    pub n6: u32,
    pub tau6: f64,
    /// Distance between the two correlated positions (px).
    pub alpha1: f64,
    pub sigma6: f64,
    pub sigma7: f64,
    /// Preferred directions in radians, image coordinates (y down).
    pub directions: Vec<f64>,
}

impl Default for LobulaParams {
    fn default() -> Self {
        Self {
            n4: 3,
            tau4: 15.0,
            n5: 5,
            tau5: 25.0,
            n6: 8,
            tau6: 40.0,
            alpha1: 3.0,
            sigma6: 1.5,
            sigma7: 3.0,
            directions: uniform_directions(8),
        }
    }
}

/// `count` directions evenly spaced from zero.
pub fn uniform_directions(count: usize) -> Vec<f64> {
    (0..count).map(|k| 2.0 * PI * k as f64 / count as f64).collect()
}

/// Discretization knobs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EngineParams {
    /// Temporal sampling step in frames.
    pub step: f64,
    /// Frames flagged as warm-up at the start of every stream.
    pub warmup: usize,
    /// Tail mass below which temporal kernels are truncated.
    pub mass_cutoff: f64,
}

impl Default for EngineParams {
    fn default() -> Self {
        Self {
            step: 1.0,
            warmup: 200,
            mass_cutoff: DEFAULT_MASS_CUTOFF,
        }
    }
}

/// Every parameter of the DSTMD and ESTMD models.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PipelineConfig {
    pub retina: RetinaParams,
    pub lamina: LaminaParams,
    pub inhibition: InhibitionParams,
    pub estmd: EstmdParams,
    pub lobula: LobulaParams,
    pub engine: EngineParams,
}

impl PipelineConfig {
    /// Checks the cross-parameter constraints the kernel builders rely on.
    pub fn validate(&self) -> Result<()> {
        let l = &self.lamina;
        if l.sigma3 <= l.sigma2 {
            return Err(Error::parameter("sigma3", "must exceed sigma2"));
        }
        if l.lambda2 <= l.lambda1 {
            return Err(Error::parameter("lambda2", "must exceed lambda1"));
        }
        self.inhibition.surround().validate()?;
        let lob = &self.lobula;
        if !(lob.alpha1 > 0.0) {
            return Err(Error::parameter("alpha1", "must be positive"));
        }
        if lob.directions.is_empty() {
            return Err(Error::parameter("directions", "need at least one direction"));
        }
        if lob.directions.iter().any(|d| !d.is_finite()) {
            return Err(Error::parameter("directions", "directions must be finite"));
        }
        if !(self.retina.sigma1 > 0.0) {
            return Err(Error::parameter("sigma1", "must be positive"));
        }
        Ok(())
    }
}
