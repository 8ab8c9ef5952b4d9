//! Small target motion detection with directionally selective STMD neurons.
//!
//! The crate models the four visual layers of an insect-inspired small target
//! detector (retina, lamina, medulla, lobula), the non-directional ESTMD
//! baseline, population-vector decoding of motion direction, a stimulus
//! generator and the evaluation protocols used to characterize the models.

// `!(x > 0.0)` is how parameter checks reject NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod dstmd;
pub mod engine;
pub mod error;
pub mod estimation;
pub mod estmd;
pub mod eval;
pub mod kernels;
pub mod model;
pub mod stimulus;

pub use error::{Error, Result};
