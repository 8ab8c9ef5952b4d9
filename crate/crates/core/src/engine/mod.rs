//! Streaming signal-processing primitives.
//!
//! * [`Frame`]: a luminance grid that stores only its non-zero support;
//! * [`SpatialFilter`] / [`conv2d`]: same-size 2-D filtering with replicate borders;
//! * [`TemporalStream`] / [`TemporalFilter`]: causal FIR filtering over a ring of
//!   past frames. Missing history counts as zero (cold start), so callers
//!   discard a warm-up prefix before measuring anything.

mod frame;
mod spatial;
mod temporal;

pub use frame::{max_over, rectify_neg, rectify_pos, Frame, Rect};
pub use spatial::{conv2d, SpatialFilter};
pub use temporal::{temporal_step, TemporalFilter, TemporalStream};
