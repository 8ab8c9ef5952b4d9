use std::collections::VecDeque;

use crate::engine::frame::{check_same_dims, Frame, Rect};
use crate::error::{Error, Result};
use crate::kernels::Kernel1D;

/// Output values accumulated together by [`TemporalStream::convolve`].
const BAND_VALUES: usize = 4096;

/// Ring of the most recent frames, newest first.
#[derive(Debug, Clone)]
pub struct TemporalStream {
    capacity: usize,
    history: VecDeque<Frame>,
    frames_seen: u64,
}

impl TemporalStream {
    pub fn new(capacity: usize) -> TemporalStream {
        TemporalStream {
            capacity: capacity.max(1),
            history: VecDeque::with_capacity(capacity.max(1)),
            frames_seen: 0,
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn frames_seen(&self) -> u64 {
        self.frames_seen
    }

    pub fn len(&self) -> usize {
        self.history.len()
    }

    pub fn is_empty(&self) -> bool {
        self.history.is_empty()
    }

    /// Frame `k` steps in the past (`0` is the newest).
    pub fn get(&self, k: usize) -> Option<&Frame> {
        self.history.get(k)
    }

    pub fn push(&mut self, frame: Frame) -> Result<()> {
        if let Some(newest) = self.history.front() {
            check_same_dims(newest, &frame)?;
        }
        if self.history.len() == self.capacity {
            self.history.pop_back();
        }
        self.history.push_front(frame);
        self.frames_seen += 1;
        Ok(())
    }

    /// `sum_k taps[k] * history[k]`; frames not yet seen count as zero.
    pub fn convolve(&self, kernel: &Kernel1D) -> Result<Frame> {
        let Some(newest) = self.history.front() else {
            return Err(Error::Dimension("temporal stream is empty".into()));
        };
        let (width, height) = newest.dims();
        let active = || {
            kernel
                .taps()
                .iter()
                .zip(&self.history)
                .filter(|(&t, f)| t != 0.0 && !f.support().is_empty())
        };
        let region = active().fold(Rect::EMPTY, |r, (_, f)| r.union(&f.support()));
        if region.is_empty() {
            return Ok(Frame::zeros(width, height));
        }
        let mut values = vec![0.0; region.area()];
        let rw = region.width();
        // accumulate a band of rows at a time so the output stays in cache
        let band = (BAND_VALUES / rw).max(1);
        for y_start in (region.y0..region.y1).step_by(band) {
            let y_end = (y_start + band).min(region.y1);
            for (&tap, frame) in active() {
                let s = frame.support();
                let sw = s.width();
                for y in y_start.max(s.y0)..y_end.min(s.y1) {
                    let dst = (y - region.y0) * rw + (s.x0 - region.x0);
                    for (d, v) in values[dst..dst + sw].iter_mut().zip(frame.support_row(y)) {
                        *d += tap * v;
                    }
                }
            }
        }
        Frame::from_support(width, height, region, values)
    }

    /// Pushes `frame` and returns the causal FIR output at the new time step.
    pub fn step(&mut self, frame: Frame, kernel: &Kernel1D) -> Result<Frame> {
        self.push(frame)?;
        self.convolve(kernel)
    }
}

/// Causal FIR filter over a frame stream: a kernel bundled with its history.
#[derive(Debug, Clone)]
pub struct TemporalFilter {
    kernel: Kernel1D,
    stream: TemporalStream,
}

impl TemporalFilter {
    pub fn new(kernel: Kernel1D) -> TemporalFilter {
        let stream = TemporalStream::new(kernel.len());
        TemporalFilter { kernel, stream }
    }

    pub fn kernel(&self) -> &Kernel1D {
        &self.kernel
    }

    pub fn step(&mut self, frame: Frame) -> Result<Frame> {
        self.stream.step(frame, &self.kernel)
    }
}

/// One streaming FIR step: push `new_frame` into `stream` and filter.
pub fn temporal_step(stream: &mut TemporalStream, new_frame: Frame, kernel: &Kernel1D) -> Result<Frame> {
    stream.step(new_frame, kernel)
}
