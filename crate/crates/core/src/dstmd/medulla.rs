use crate::config::PipelineConfig;
use crate::engine::{rectify_neg, rectify_pos, Frame, TemporalFilter};
use crate::error::Result;
use crate::kernels::gamma_kernel;

/// Medulla signals at one time step.
#[derive(Debug, Clone)]
pub struct MedullaMaps {
    /// Tm3: ON signal, the positive part of `L_I`.
    pub on: Frame,
    /// Tm2: OFF signal, the magnitude of the negative part of `L_I`.
    pub off: Frame,
    /// Mi1: ON delayed by `Gamma(n4, tau4)`.
    pub on_delayed: Frame,
    /// Tm1: OFF delayed by `Gamma(n5, tau5)`.
    pub off_delayed: Frame,
    /// Tm1: OFF delayed by `Gamma(n6, tau6)`.
    pub off_delayed_long: Frame,
}

impl MedullaMaps {
    pub fn zeros(width: usize, height: usize) -> MedullaMaps {
        let z = Frame::zeros(width, height);
        MedullaMaps {
            on: z.clone(),
            off: z.clone(),
            on_delayed: z.clone(),
            off_delayed: z.clone(),
            off_delayed_long: z,
        }
    }
}

/// ON/OFF split plus the three Gamma delay lines of the DSTMD medulla.
#[derive(Debug, Clone)]
pub struct Medulla {
    on_delay: TemporalFilter,
    off_delay: TemporalFilter,
    off_delay_long: TemporalFilter,
}

impl Medulla {
    pub fn new(cfg: &PipelineConfig) -> Result<Medulla> {
        let l = &cfg.lobula;
        let e = &cfg.engine;
        Ok(Medulla {
            on_delay: TemporalFilter::new(gamma_kernel(l.n4, l.tau4, e.step, e.mass_cutoff)?),
            off_delay: TemporalFilter::new(gamma_kernel(l.n5, l.tau5, e.step, e.mass_cutoff)?),
            off_delay_long: TemporalFilter::new(gamma_kernel(l.n6, l.tau6, e.step, e.mass_cutoff)?),
        })
    }

    pub fn step(&mut self, inhibited: &Frame) -> Result<MedullaMaps> {
        let on = rectify_pos(inhibited);
        let off = rectify_neg(inhibited);
        Ok(MedullaMaps {
            on_delayed: self.on_delay.step(on.clone())?,
            off_delayed: self.off_delay.step(off.clone())?,
            off_delayed_long: self.off_delay_long.step(off.clone())?,
            on,
            off,
        })
    }
}

/// One medulla step; see [`Medulla`].
pub fn medulla_step(inhibited: &Frame, state: &mut Medulla) -> Result<MedullaMaps> {
    state.step(inhibited)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::Rect;

    #[test]
    fn silence_in_silence_out() {
        let mut m = Medulla::new(&PipelineConfig::default()).unwrap();
        for _ in 0..10 {
            let maps = m.step(&Frame::zeros(8, 8)).unwrap();
            for f in [&maps.on, &maps.off, &maps.on_delayed, &maps.off_delayed, &maps.off_delayed_long] {
                assert!(f.is_zero());
            }
        }
    }

    #[test]
    fn on_impulse_traces_the_delay_kernel() {
        let cfg = PipelineConfig::default();
        let mut m = Medulla::new(&cfg).unwrap();
        let kernel = gamma_kernel(3, 15.0, 1.0, cfg.engine.mass_cutoff).unwrap();
        let impulse = Frame::from_support(9, 9, Rect::new(4, 4, 5, 5), vec![1.0]).unwrap();
        for (k, &tap) in kernel.taps().iter().enumerate() {
            let input = if k == 0 { impulse.clone() } else { Frame::zeros(9, 9) };
            let maps = m.step(&input).unwrap();
            assert_eq!(maps.on_delayed.get(4, 4), tap);
            assert!(maps.off_delayed.is_zero());
        }
    }

    #[test]
    fn on_and_off_never_overlap() {
        let mut m = Medulla::new(&PipelineConfig::default()).unwrap();
        let li = Frame::from_fn(7, 5, |x, y| (x as f64 - 3.0) * (y as f64 - 2.0));
        let maps = m.step(&li).unwrap();
        for y in 0..5 {
            for x in 0..7 {
                assert!(maps.on.get(x, y) >= 0.0 && maps.off.get(x, y) >= 0.0);
                assert!(maps.on.get(x, y) == 0.0 || maps.off.get(x, y) == 0.0);
            }
        }
    }
}
