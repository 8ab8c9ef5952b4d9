use crate::config::PipelineConfig;
use crate::engine::{Frame, SpatialFilter, TemporalFilter};
use crate::error::Result;
use crate::kernels::{self, Kernel1D};

/// Output of one lamina step.
#[derive(Debug, Clone)]
pub struct LaminaOutput {
    /// Band-pass response `L` (positive for brightening).
    pub bandpass: Frame,
    /// `L` after spatiotemporal lateral inhibition (`L_I`).
    pub inhibited: Frame,
}

/// Spatiotemporal lateral inhibition with the kernel
/// `W1 = W_S^P(x, y) exp_l1(t) + W_S^N(x, y) exp_l2(t)`.
///
/// Both terms are space-time separable. With `W_S^N = DoG - W_S^P` the output
/// is `W_S^P * (a - b) + DoG * b`, where `a` and `b` are the two exponential
/// temporal filterings of the input, so only the small positive lobe needs a
/// dense stencil.
#[derive(Debug, Clone)]
pub struct LateralInhibition {
    fast: TemporalFilter,
    slow: TemporalFilter,
    positive: SpatialFilter,
    dog: SpatialFilter,
}

impl LateralInhibition {
    pub fn new(cfg: &PipelineConfig) -> Result<LateralInhibition> {
        let l = &cfg.lamina;
        let e = &cfg.engine;
        let (positive, _) = kernels::dog_split(l.sigma2, l.sigma3)?;
        Ok(LateralInhibition {
            fast: TemporalFilter::new(kernels::exp_kernel(l.lambda1, e.step, e.mass_cutoff)?),
            slow: TemporalFilter::new(kernels::exp_kernel(l.lambda2, e.step, e.mass_cutoff)?),
            positive: SpatialFilter::dense(&positive),
            dog: SpatialFilter::difference_of_gaussians(l.sigma2, l.sigma3)?,
        })
    }

    pub fn step(&mut self, bandpass: &Frame) -> Result<Frame> {
        let a = self.fast.step(bandpass.clone())?;
        let b = self.slow.step(bandpass.clone())?;
        let mut out = self.positive.apply(&a.sub(&b)?)?;
        out.add_scaled(&self.dog.apply(&b)?, 1.0)?;
        Ok(out)
    }
}

/// Cumulative-sum form of a zero-sum kernel.
///
/// For `sum(h) = 0`, `sum_k h[k] P(t-k) = sum_j c[j] dP(t-j)` with
/// `c[j] = h[0] + ... + h[j]` and `dP(t) = P(t) - P(t-1)`. Filtering frame
/// increments keeps static regions exactly zero.
pub(crate) fn increment_kernel(h: &Kernel1D) -> Result<Kernel1D> {
    let mut acc = 0.0;
    let mut taps: Vec<f64> = h
        .taps()
        .iter()
        .map(|&t| {
            acc += t;
            acc
        })
        .collect();
    taps.pop();
    if taps.is_empty() {
        taps.push(0.0);
    }
    Kernel1D::causal(taps, h.step())
}

/// Large monopolar cells: temporal band-pass followed by lateral inhibition.
///
/// The band-pass runs on frame increments. Before the first frame the scene is
/// taken to be static at that frame's luminance, so a constant input produces
/// exactly zero from the start.
#[derive(Debug, Clone)]
pub struct Lamina {
    bandpass: TemporalFilter,
    inhibition: LateralInhibition,
    previous: Option<Frame>,
}

impl Lamina {
    pub fn new(cfg: &PipelineConfig) -> Result<Lamina> {
        let l = &cfg.lamina;
        let e = &cfg.engine;
        let h = kernels::temporal_bandpass(l.n1, l.tau1, l.n2, l.tau2, e.step, e.mass_cutoff)?;
        Ok(Lamina {
            bandpass: TemporalFilter::new(increment_kernel(&h)?),
            inhibition: LateralInhibition::new(cfg)?,
            previous: None,
        })
    }

    /// Processes one ommatidium frame `P`.
    pub fn step(&mut self, p: &Frame) -> Result<LaminaOutput> {
        let increment = match &self.previous {
            Some(prev) => p.sub(prev)?.trimmed(),
            None => Frame::zeros(p.width(), p.height()),
        };
        self.previous = Some(p.clone());
        self.step_increment(increment)
    }

    /// Processes the change `P(t) - P(t-1)` directly.
    pub fn step_increment(&mut self, increment: Frame) -> Result<LaminaOutput> {
        let bandpass = self.bandpass.step(increment)?;
        let inhibited = self.inhibition.step(&bandpass)?;
        Ok(LaminaOutput { bandpass, inhibited })
    }
}

/// One lamina step; see [`Lamina`].
pub fn lamina_step(p: &Frame, state: &mut Lamina) -> Result<LaminaOutput> {
    state.step(p)
}
