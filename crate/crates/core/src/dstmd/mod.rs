//! The directionally selective small target motion detector.
//!
//! Each frame flows through [`Retina`] blur, the [`Lamina`] band-pass and
//! lateral inhibition, the ON/OFF [`Medulla`] delay lines and finally the
//! lobula: two-point correlation, centre-surround inhibition and inhibition
//! across directions.

mod lamina;
mod lobula;
mod medulla;
mod retina;

pub use lamina::{lamina_step, Lamina, LaminaOutput, LateralInhibition};
pub use lobula::{direction_inhibition, lobula_correlate, partner_offset, spatial_inhibition};
pub use medulla::{medulla_step, Medulla, MedullaMaps};
pub use retina::{retina_step, Retina};

use crate::config::PipelineConfig;
use crate::engine::{max_over, Frame, SpatialFilter};
use crate::error::{Error, Result};
use crate::kernels::{w3_kernel, DirectionKernel};

/// One frame of output, one map per preferred direction.
#[derive(Debug, Clone)]
pub struct DirectionalResponse {
    /// Zero-based index of the input frame.
    pub frame_index: u64,
    /// True while the temporal filters are still filling.
    pub warmup: bool,
    directions: Vec<f64>,
    channels: Vec<Frame>,
}

impl DirectionalResponse {
    pub fn new(frame_index: u64, directions: Vec<f64>, channels: Vec<Frame>) -> Result<DirectionalResponse> {
        if directions.len() != channels.len() || channels.is_empty() {
            return Err(Error::Dimension(format!(
                "{} directions for {} channels",
                directions.len(),
                channels.len()
            )));
        }
        let dims = channels[0].dims();
        if channels.iter().any(|c| c.dims() != dims) {
            return Err(Error::Dimension("channels differ in size".into()));
        }
        Ok(DirectionalResponse {
            frame_index,
            warmup: false,
            directions,
            channels,
        })
    }

    pub fn directions(&self) -> &[f64] {
        &self.directions
    }

    pub fn channels(&self) -> &[Frame] {
        &self.channels
    }

    pub fn dims(&self) -> (usize, usize) {
        self.channels[0].dims()
    }

    /// Responses of all directions at one pixel.
    pub fn at(&self, x: usize, y: usize) -> Vec<f64> {
        self.channels.iter().map(|c| c.get(x, y)).collect()
    }

    /// Maximum over directions at every pixel.
    pub fn strength(&self) -> Frame {
        max_over(&self.channels).expect("channels share dimensions")
    }
}

/// Retina and lamina, fed with frame differences.
///
/// The blur is linear, so blurring `I(t) - I(t-1)` gives the increment of the
/// ommatidium output directly and only the changed part of the frame is
/// filtered.
#[derive(Debug, Clone)]
pub struct FrontEnd {
    retina: Retina,
    lamina: Lamina,
    previous: Option<Frame>,
}

impl FrontEnd {
    pub fn new(cfg: &PipelineConfig) -> Result<FrontEnd> {
        Ok(FrontEnd {
            retina: Retina::new(cfg)?,
            lamina: Lamina::new(cfg)?,
            previous: None,
        })
    }

    /// Returns the inhibited lamina output `L_I` for a raw frame.
    pub fn step(&mut self, raw: &Frame) -> Result<Frame> {
        let (w, h) = raw.dims();
        let blur_radius = self.retina.filter().radius();
        if blur_radius >= w.min(h) {
            return Err(Error::Dimension(format!(
                "frame {w}x{h} is smaller than the retina blur"
            )));
        }
        let diff = match &self.previous {
            Some(prev) => raw.sub(prev)?.trimmed(),
            None => Frame::zeros(w, h),
        };
        self.previous = Some(raw.clone());
        let increment = self.retina.apply(&diff)?;
        Ok(self.lamina.step_increment(increment)?.inhibited)
    }
}

/// Streaming DSTMD model.
#[derive(Debug, Clone)]
pub struct Dstmd {
    cfg: PipelineConfig,
    front: FrontEnd,
    medulla: Medulla,
    w2: SpatialFilter,
    w3: DirectionKernel,
    frame_index: u64,
    dims: Option<(usize, usize)>,
}

impl Dstmd {
    pub fn new(cfg: PipelineConfig) -> Result<Dstmd> {
        cfg.validate()?;
        Ok(Dstmd {
            front: FrontEnd::new(&cfg)?,
            medulla: Medulla::new(&cfg)?,
            w2: SpatialFilter::surround_inhibition(&cfg.inhibition.surround())?,
            w3: w3_kernel(cfg.lobula.sigma6, cfg.lobula.sigma7, cfg.lobula.directions.len())?,
            cfg,
            frame_index: 0,
            dims: None,
        })
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.cfg
    }

    pub fn frames_processed(&self) -> u64 {
        self.frame_index
    }

    /// Runs one raw luminance frame through the whole model.
    pub fn process_frame(&mut self, raw: &Frame) -> Result<DirectionalResponse> {
        match self.dims {
            Some(d) if d != raw.dims() => {
                return Err(Error::Dimension(format!(
                    "frame is {}x{}, stream is {}x{}",
                    raw.width(),
                    raw.height(),
                    d.0,
                    d.1
                )))
            }
            _ => self.dims = Some(raw.dims()),
        }
        let inhibited = self.front.step(raw)?;
        let maps = self.medulla.step(&inhibited)?;
        let l = &self.cfg.lobula;
        let d = lobula_correlate(&maps, &l.directions, l.alpha1, self.frame_index)?;
        let d = spatial_inhibition(&d, &self.w2)?;
        let mut e = direction_inhibition(&d, &self.w3)?;
        e.warmup = self.frame_index < self.cfg.engine.warmup as u64;
        self.frame_index += 1;
        Ok(e)
    }
}
