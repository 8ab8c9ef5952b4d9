use crate::config::PipelineConfig;
use crate::engine::{Frame, SpatialFilter};
use crate::error::Result;

/// Ommatidium blur: a unit-sum Gaussian of width `sigma1`.
#[derive(Debug, Clone)]
pub struct Retina {
    blur: SpatialFilter,
}

impl Retina {
    pub fn new(cfg: &PipelineConfig) -> Result<Retina> {
        Ok(Retina {
            blur: SpatialFilter::gaussian(cfg.retina.sigma1)?,
        })
    }

    pub fn filter(&self) -> &SpatialFilter {
        &self.blur
    }

    pub fn apply(&self, raw: &Frame) -> Result<Frame> {
        self.blur.apply(raw)
    }
}

/// Blurs one raw frame with the photoreceptor Gaussian.
pub fn retina_step(raw: &Frame, cfg: &PipelineConfig) -> Result<Frame> {
    Retina::new(cfg)?.apply(raw)
}
