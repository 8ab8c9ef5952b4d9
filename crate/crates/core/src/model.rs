//! A common front for the two detector models.

use serde::{Deserialize, Serialize};

use crate::config::PipelineConfig;
use crate::dstmd::{DirectionalResponse, Dstmd};
use crate::engine::Frame;
use crate::error::Result;
use crate::estmd::{Estmd, EstmdResponse};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Dstmd,
    Estmd,
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ModelKind::Dstmd => "dstmd",
            ModelKind::Estmd => "estmd",
        })
    }
}

/// Output of either model for one frame.
#[derive(Debug, Clone)]
pub enum ModelOutput {
    Directional(DirectionalResponse),
    Plain(EstmdResponse),
}

impl ModelOutput {
    pub fn frame_index(&self) -> u64 {
        match self {
            ModelOutput::Directional(r) => r.frame_index,
            ModelOutput::Plain(r) => r.frame_index,
        }
    }

    pub fn warmup(&self) -> bool {
        match self {
            ModelOutput::Directional(r) => r.warmup,
            ModelOutput::Plain(r) => r.warmup,
        }
    }

    /// Response map used for detection (max over directions for the DSTMD).
    pub fn strength(&self) -> Frame {
        match self {
            ModelOutput::Directional(r) => r.strength(),
            ModelOutput::Plain(r) => r.response.clone(),
        }
    }

    pub fn directional(&self) -> Option<&DirectionalResponse> {
        match self {
            ModelOutput::Directional(r) => Some(r),
            ModelOutput::Plain(_) => None,
        }
    }
}

/// Either model behind one streaming interface.
#[derive(Debug, Clone)]
pub enum Detector {
    Dstmd(Box<Dstmd>),
    Estmd(Box<Estmd>),
}

impl Detector {
    pub fn new(kind: ModelKind, cfg: PipelineConfig) -> Result<Detector> {
        Ok(match kind {
            ModelKind::Dstmd => Detector::Dstmd(Box::new(Dstmd::new(cfg)?)),
            ModelKind::Estmd => Detector::Estmd(Box::new(Estmd::new(cfg)?)),
        })
    }

    pub fn kind(&self) -> ModelKind {
        match self {
            Detector::Dstmd(_) => ModelKind::Dstmd,
            Detector::Estmd(_) => ModelKind::Estmd,
        }
    }

    pub fn process_frame(&mut self, raw: &Frame) -> Result<ModelOutput> {
        Ok(match self {
            Detector::Dstmd(m) => ModelOutput::Directional(m.process_frame(raw)?),
            Detector::Estmd(m) => ModelOutput::Plain(m.process_frame(raw)?),
        })
    }
}
