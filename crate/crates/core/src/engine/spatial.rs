//! Bordered spatial filtering.
//!
//! Out-of-image samples replicate the nearest border pixel. Filters are kept as
//! weighted sums of separable and dense terms so that wide centre-surround
//! kernels cost a few 1-D passes instead of a full 2-D stencil.

use crate::engine::frame::{Frame, Rect};
use crate::error::{Error, Result};
use crate::kernels::{self, Kernel2D, SurroundParams, DEFAULT_TRUNCATION_SIGMAS};

#[derive(Debug, Clone, PartialEq)]
enum Term {
    /// Sparse list of `(dx, dy, weight)` taps.
    Dense(Vec<(isize, isize, f64)>),
    /// Outer product of a symmetric 1-D filter with itself.
    Separable(Vec<f64>),
}

impl Term {
    fn radius(&self) -> usize {
        match self {
            Term::Dense(taps) => taps
                .iter()
                .map(|&(dx, dy, _)| dx.unsigned_abs().max(dy.unsigned_abs()))
                .max()
                .unwrap_or(0),
            Term::Separable(taps) => taps.len() / 2,
        }
    }
}

/// A linear spatial filter `sum_i weight_i * term_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialFilter {
    radius: usize,
    terms: Vec<(f64, Term)>,
}

impl SpatialFilter {
    fn from_terms(terms: Vec<(f64, Term)>) -> SpatialFilter {
        let terms: Vec<(f64, Term)> = terms
            .into_iter()
            .filter(|(w, t)| *w != 0.0 && !matches!(t, Term::Dense(taps) if taps.is_empty()))
            .collect();
        let radius = terms.iter().map(|(_, t)| t.radius()).max().unwrap_or(0);
        SpatialFilter { radius, terms }
    }

    /// Direct evaluation of an arbitrary kernel.
    pub fn dense(kernel: &Kernel2D) -> SpatialFilter {
        SpatialFilter::from_terms(vec![(1.0, Term::Dense(kernel.nonzero_taps()))])
    }

    /// Separable evaluation of `outer(taps, taps)`; `taps` must have odd length.
    pub fn separable(taps: Vec<f64>) -> Result<SpatialFilter> {
        if taps.len().is_multiple_of(2) {
            return Err(Error::Dimension("separable taps must have odd length".into()));
        }
        Ok(SpatialFilter::from_terms(vec![(1.0, Term::Separable(taps))]))
    }

    /// Unit-sum Gaussian blur.
    pub fn gaussian(sigma: f64) -> Result<SpatialFilter> {
        SpatialFilter::separable(kernels::gaussian1d(sigma, DEFAULT_TRUNCATION_SIGMAS)?)
    }

    /// `G(narrow) - G(wide)` evaluated with two separable passes.
    pub fn difference_of_gaussians(narrow: f64, wide: f64) -> Result<SpatialFilter> {
        kernels::difference_of_gaussians(narrow, wide)?;
        Ok(SpatialFilter::from_terms(vec![
            (1.0, Term::Separable(kernels::gaussian1d(narrow, DEFAULT_TRUNCATION_SIGMAS)?)),
            (-1.0, Term::Separable(kernels::gaussian1d(wide, DEFAULT_TRUNCATION_SIGMAS)?)),
        ]))
    }

    /// The centre-surround kernel `A [g]^+ + B [g]^-` with
    /// `g = G(sigma4) - e G(sigma5) - rho`.
    ///
    /// Rewritten as `(A - B) [g]^+ + B (G(sigma4) - e G(sigma5) - rho box)`, so
    /// only the small positive lobe needs a dense stencil.
    pub fn surround_inhibition(params: &SurroundParams) -> Result<SpatialFilter> {
        let g = params.profile()?;
        let positive = g.map(|t| t.max(0.0));
        let center = kernels::gaussian1d(params.sigma_center, DEFAULT_TRUNCATION_SIGMAS)?;
        let surround = kernels::gaussian1d(params.sigma_surround, DEFAULT_TRUNCATION_SIGMAS)?;
        let b = params.b;
        Ok(SpatialFilter::from_terms(vec![
            (params.a - b, Term::Dense(positive.nonzero_taps())),
            (b, Term::Separable(center)),
            (-b * params.e, Term::Separable(surround)),
            (-b * params.rho, Term::Separable(vec![1.0; g.side()])),
        ]))
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    /// The equivalent dense kernel.
    pub fn to_kernel(&self) -> Kernel2D {
        let side = 2 * self.radius + 1;
        let r = self.radius as isize;
        let mut taps = vec![0.0; side * side];
        let idx = |dx: isize, dy: isize| ((dy + r) * side as isize + dx + r) as usize;
        for (w, term) in &self.terms {
            match term {
                Term::Dense(list) => {
                    for &(dx, dy, v) in list {
                        taps[idx(dx, dy)] += w * v;
                    }
                }
                Term::Separable(t) => {
                    let tr = (t.len() / 2) as isize;
                    for dy in -tr..=tr {
                        for dx in -tr..=tr {
                            taps[idx(dx, dy)] += w * t[(dx + tr) as usize] * t[(dy + tr) as usize];
                        }
                    }
                }
            }
        }
        Kernel2D::new(self.radius, taps).expect("tap count matches radius")
    }

    /// Filters `frame` with replicate borders.
    ///
    /// Only the support of `frame` dilated by the filter radius is computed;
    /// everything else is exactly zero.
    pub fn apply(&self, frame: &Frame) -> Result<Frame> {
        let (width, height) = frame.dims();
        if self.radius >= width.min(height) {
            return Err(Error::Dimension(format!(
                "filter radius {} does not fit a {width}x{height} frame",
                self.radius
            )));
        }
        let out_rect = frame.support().dilate(self.radius, width, height);
        if out_rect.is_empty() || self.terms.is_empty() {
            return Ok(Frame::zeros(width, height));
        }
        let padded = Padded::new(frame, out_rect, self.radius);
        let (ow, oh) = (out_rect.width(), out_rect.height());
        let mut out = vec![0.0; ow * oh];
        let mut scratch = Vec::new();
        for (weight, term) in &self.terms {
            match term {
                Term::Dense(taps) => padded.accumulate_dense(taps, *weight, &mut out),
                Term::Separable(taps) => {
                    padded.accumulate_separable(taps, *weight, &mut out, &mut scratch)
                }
            }
        }
        Frame::from_support(width, height, out_rect, out)
    }
}

/// Input samples covering the output rectangle plus a `radius` apron, with
/// border replication already applied.
struct Padded {
    values: Vec<f64>,
    stride: usize,
    radius: usize,
    out_w: usize,
    out_h: usize,
}

impl Padded {
    fn new(frame: &Frame, out_rect: Rect, radius: usize) -> Padded {
        let (width, height) = frame.dims();
        let r = radius as isize;
        let stride = out_rect.width() + 2 * radius;
        let rows = out_rect.height() + 2 * radius;
        let support = frame.support();
        let clamp_x: Vec<usize> = (0..stride)
            .map(|i| (out_rect.x0 as isize - r + i as isize).clamp(0, width as isize - 1) as usize)
            .collect();
        let mut values = vec![0.0; stride * rows];
        for j in 0..rows {
            let y = (out_rect.y0 as isize - r + j as isize).clamp(0, height as isize - 1) as usize;
            if y < support.y0 || y >= support.y1 {
                continue;
            }
            let src = frame.support_row(y);
            let dst = &mut values[j * stride..(j + 1) * stride];
            for (d, &x) in dst.iter_mut().zip(&clamp_x) {
                if x >= support.x0 && x < support.x1 {
                    *d = src[x - support.x0];
                }
            }
        }
        Padded {
            values,
            stride,
            radius,
            out_w: out_rect.width(),
            out_h: out_rect.height(),
        }
    }

    fn accumulate_dense(&self, taps: &[(isize, isize, f64)], weight: f64, out: &mut [f64]) {
        let r = self.radius as isize;
        for &(dx, dy, tap) in taps {
            let w = weight * tap;
            for row in 0..self.out_h {
                let src_start = ((row as isize + r + dy) * self.stride as isize + r + dx) as usize;
                let src = &self.values[src_start..src_start + self.out_w];
                let dst = &mut out[row * self.out_w..(row + 1) * self.out_w];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += w * s;
                }
            }
        }
    }

    fn accumulate_separable(&self, taps: &[f64], weight: f64, out: &mut [f64], scratch: &mut Vec<f64>) {
        let tr = taps.len() / 2;
        let r = self.radius;
        // horizontal pass over the rows the vertical pass will touch
        let rows = self.out_h + 2 * tr;
        scratch.clear();
        scratch.resize(rows * self.out_w, 0.0);
        for j in 0..rows {
            let src_row = j + r - tr;
            let base = src_row * self.stride + r - tr;
            let dst = &mut scratch[j * self.out_w..(j + 1) * self.out_w];
            for (k, &t) in taps.iter().enumerate() {
                let src = &self.values[base + k..base + k + self.out_w];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += t * s;
                }
            }
        }
        for row in 0..self.out_h {
            let dst = &mut out[row * self.out_w..(row + 1) * self.out_w];
            for (k, &t) in taps.iter().enumerate() {
                let w = weight * t;
                let src = &scratch[(row + k) * self.out_w..(row + k + 1) * self.out_w];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += w * s;
                }
            }
        }
    }
}

/// Same-size convolution with replicate borders.
pub fn conv2d(frame: &Frame, kernel: &Kernel2D) -> Result<Frame> {
    SpatialFilter::dense(kernel).apply(frame)
}
