//! The non-directional ESTMD baseline.
//!
//! It shares the retina and lamina with the DSTMD but applies the
//! centre-surround inhibition to the ON and OFF signals and correlates a single
//! position with its own delayed OFF signal, so it reports where a small
//! target is but not where it is heading.

use crate::config::PipelineConfig;
use crate::dstmd::FrontEnd;
use crate::engine::{rectify_neg, rectify_pos, Frame, SpatialFilter, TemporalFilter};
use crate::error::{Error, Result};
use crate::kernels::gamma_kernel;

/// Laterally inhibited medulla signals of the ESTMD.
#[derive(Debug, Clone)]
pub struct EstmdMaps {
    /// `[W2 * ON]^+`
    pub tm3: Frame,
    /// `[W2 * OFF]^+`
    pub tm2: Frame,
    /// `tm2` delayed by `Gamma(n3, tau3)`.
    pub tm1: Frame,
}

/// Streaming state of the ESTMD medulla.
#[derive(Debug, Clone)]
pub struct EstmdMedulla {
    w2: SpatialFilter,
    delay: TemporalFilter,
}

impl EstmdMedulla {
    pub fn new(cfg: &PipelineConfig) -> Result<EstmdMedulla> {
        Ok(EstmdMedulla {
            w2: SpatialFilter::surround_inhibition(&cfg.inhibition.surround())?,
            delay: TemporalFilter::new(gamma_kernel(
                cfg.estmd.n3,
                cfg.estmd.tau3,
                cfg.engine.step,
                cfg.engine.mass_cutoff,
            )?),
        })
    }

    pub fn step(&mut self, inhibited: &Frame) -> Result<EstmdMaps> {
        let tm3 = rectify_pos(&self.w2.apply(&rectify_pos(inhibited))?);
        let tm2 = rectify_pos(&self.w2.apply(&rectify_neg(inhibited))?);
        let tm1 = self.delay.step(tm2.clone())?;
        Ok(EstmdMaps { tm3, tm2, tm1 })
    }
}

/// One ESTMD medulla step; see [`EstmdMedulla`].
pub fn medulla_step_estmd(inhibited: &Frame, state: &mut EstmdMedulla) -> Result<EstmdMaps> {
    state.step(inhibited)
}

/// Output of the ESTMD for one frame.
#[derive(Debug, Clone)]
pub struct EstmdResponse {
    pub frame_index: u64,
    pub warmup: bool,
    pub response: Frame,
}

/// `D(x, y) = Tm3(x, y) * Tm1(x, y)`.
pub fn estmd_correlate(maps: &EstmdMaps, frame_index: u64) -> Result<EstmdResponse> {
    let (width, height) = maps.tm3.dims();
    let region = maps.tm3.support().intersect(&maps.tm1.support());
    let response = if region.is_empty() {
        Frame::zeros(width, height)
    } else {
        let mut values = Vec::with_capacity(region.area());
        for y in region.y0..region.y1 {
            for x in region.x0..region.x1 {
                values.push(maps.tm3.get(x, y) * maps.tm1.get(x, y));
            }
        }
        Frame::from_support(width, height, region, values)?.trimmed()
    };
    Ok(EstmdResponse {
        frame_index,
        warmup: false,
        response,
    })
}

/// Streaming ESTMD model.
#[derive(Debug, Clone)]
pub struct Estmd {
    cfg: PipelineConfig,
    front: FrontEnd,
    medulla: EstmdMedulla,
    frame_index: u64,
    dims: Option<(usize, usize)>,
}

impl Estmd {
    pub fn new(cfg: PipelineConfig) -> Result<Estmd> {
        cfg.validate()?;
        Ok(Estmd {
            front: FrontEnd::new(&cfg)?,
            medulla: EstmdMedulla::new(&cfg)?,
            cfg,
            frame_index: 0,
            dims: None,
        })
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.cfg
    }

    pub fn process_frame(&mut self, raw: &Frame) -> Result<EstmdResponse> {
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
        let mut out = estmd_correlate(&maps, self.frame_index)?;
        out.warmup = self.frame_index < self.cfg.engine.warmup as u64;
        self.frame_index += 1;
        Ok(out)
    }
}
