use std::fmt;

use crate::error::{Error, Result};

/// Half-open pixel rectangle `[x0, x1) x [y0, y1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Rect {
    pub x0: usize,
    pub y0: usize,
    pub x1: usize,
    pub y1: usize,
}

impl Rect {
    pub const EMPTY: Rect = Rect {
        x0: 0,
        y0: 0,
        x1: 0,
        y1: 0,
    };

    pub fn new(x0: usize, y0: usize, x1: usize, y1: usize) -> Rect {
        if x0 >= x1 || y0 >= y1 {
            Rect::EMPTY
        } else {
            Rect { x0, y0, x1, y1 }
        }
    }

    pub fn full(width: usize, height: usize) -> Rect {
        Rect::new(0, 0, width, height)
    }

    pub fn is_empty(&self) -> bool {
        self.x0 >= self.x1 || self.y0 >= self.y1
    }

    pub fn width(&self) -> usize {
        self.x1.saturating_sub(self.x0)
    }

    pub fn height(&self) -> usize {
        self.y1.saturating_sub(self.y0)
    }

    pub fn area(&self) -> usize {
        self.width() * self.height()
    }

    pub fn contains(&self, x: usize, y: usize) -> bool {
        x >= self.x0 && x < self.x1 && y >= self.y0 && y < self.y1
    }

    pub fn union(&self, other: &Rect) -> Rect {
        if self.is_empty() {
            return *other;
        }
        if other.is_empty() {
            return *self;
        }
        Rect {
            x0: self.x0.min(other.x0),
            y0: self.y0.min(other.y0),
            x1: self.x1.max(other.x1),
            y1: self.y1.max(other.y1),
        }
    }

    pub fn intersect(&self, other: &Rect) -> Rect {
        Rect::new(
            self.x0.max(other.x0),
            self.y0.max(other.y0),
            self.x1.min(other.x1),
            self.y1.min(other.y1),
        )
    }

    /// Grows the rectangle by `r` pixels on every side, clipped to the image.
    pub fn dilate(&self, r: usize, width: usize, height: usize) -> Rect {
        if self.is_empty() {
            return Rect::EMPTY;
        }
        Rect::new(
            self.x0.saturating_sub(r),
            self.y0.saturating_sub(r),
            (self.x1 + r).min(width),
            (self.y1 + r).min(height),
        )
    }
}

/// One luminance grid.
///
/// A frame only stores the rectangle (`support`) that may hold non-zero
/// values; every pixel outside it is exactly `0.0`. Input frames are dense,
/// but most intermediate maps of the detector are zero away from moving
/// edges, and filtering only the support keeps streaming cheap.
#[derive(Clone)]
pub struct Frame {
    width: usize,
    height: usize,
    support: Rect,
    values: Vec<f64>,
}

impl Frame {
    /// Dense frame from row-major pixels.
    pub fn new(width: usize, height: usize, pixels: Vec<f64>) -> Result<Frame> {
        check_dims(width, height)?;
        if pixels.len() != width * height {
            return Err(Error::Dimension(format!(
                "{width}x{height} frame needs {} pixels, got {}",
                width * height,
                pixels.len()
            )));
        }
        if pixels.iter().any(|p| !p.is_finite()) {
            return Err(Error::parameter("pixels", "frame values must be finite"));
        }
        Ok(Frame {
            width,
            height,
            support: Rect::full(width, height),
            values: pixels,
        })
    }

    /// Dense frame from 8-bit luminance.
    pub fn from_luma8(width: usize, height: usize, pixels: &[u8]) -> Result<Frame> {
        Frame::new(width, height, pixels.iter().map(|&p| p as f64).collect())
    }

    /// All-zero frame (no storage).
    pub fn zeros(width: usize, height: usize) -> Frame {
        Frame {
            width,
            height,
            support: Rect::EMPTY,
            values: Vec::new(),
        }
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Frame {
        if value == 0.0 {
            return Frame::zeros(width, height);
        }
        Frame {
            width,
            height,
            support: Rect::full(width, height),
            values: vec![value; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Frame {
        let mut values = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                values.push(f(x, y));
            }
        }
        Frame {
            width,
            height,
            support: Rect::full(width, height),
            values,
        }
    }

    /// Frame whose non-zero values are confined to `support`.
    ///
    /// `values` is row-major over the rectangle.
    pub fn from_support(width: usize, height: usize, support: Rect, values: Vec<f64>) -> Result<Frame> {
        if support.x1 > width || support.y1 > height {
            return Err(Error::Dimension(format!(
                "support {support:?} exceeds {width}x{height}"
            )));
        }
        if values.len() != support.area() {
            return Err(Error::Dimension(format!(
                "support of area {} given {} values",
                support.area(),
                values.len()
            )));
        }
        let support = if support.is_empty() { Rect::EMPTY } else { support };
        Ok(Frame {
            width,
            height,
            support,
            values,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    /// Rectangle outside of which the frame is zero.
    pub fn support(&self) -> Rect {
        self.support
    }

    /// Row-major values over the support.
    pub fn support_values(&self) -> &[f64] {
        &self.values
    }

    /// True when every pixel is exactly zero.
    pub fn is_zero(&self) -> bool {
        self.support.is_empty() || self.values.iter().all(|&v| v == 0.0)
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        if self.support.contains(x, y) {
            self.values[(y - self.support.y0) * self.support.width() + (x - self.support.x0)]
        } else {
            0.0
        }
    }

    /// Pixel lookup with coordinates clamped into the image.
    pub fn get_clamped(&self, x: isize, y: isize) -> f64 {
        let x = x.clamp(0, self.width as isize - 1) as usize;
        let y = y.clamp(0, self.height as isize - 1) as usize;
        self.get(x, y)
    }

    /// Row-major copy of every pixel.
    pub fn pixels(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.width * self.height];
        let w = self.support.width();
        for (row, y) in (self.support.y0..self.support.y1).enumerate() {
            let dst = y * self.width + self.support.x0;
            out[dst..dst + w].copy_from_slice(&self.values[row * w..(row + 1) * w]);
        }
        out
    }

    /// Row `y` of the support, starting at column `support().x0`.
    pub fn support_row(&self, y: usize) -> &[f64] {
        let w = self.support.width();
        let row = y - self.support.y0;
        &self.values[row * w..(row + 1) * w]
    }

    /// Applies `f` to every pixel. `f(0)` must be `0` so the support stays valid.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Frame {
        debug_assert_eq!(f(0.0), 0.0);
        Frame {
            width: self.width,
            height: self.height,
            support: self.support,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn scaled(&self, c: f64) -> Frame {
        self.map(|v| v * c)
    }

    /// Shrinks the support to the bounding box of the non-zero pixels.
    pub fn trimmed(self) -> Frame {
        let s = self.support;
        let w = s.width();
        let (mut x0, mut y0, mut x1, mut y1) = (usize::MAX, usize::MAX, 0, 0);
        for row in 0..s.height() {
            let vals = &self.values[row * w..(row + 1) * w];
            if let Some(first) = vals.iter().position(|&v| v != 0.0) {
                let last = vals.iter().rposition(|&v| v != 0.0).unwrap();
                x0 = x0.min(first);
                x1 = x1.max(last + 1);
                y0 = y0.min(row);
                y1 = row + 1;
            }
        }
        if x0 == usize::MAX {
            return Frame::zeros(self.width, self.height);
        }
        if (x0, y0, x1, y1) == (0, 0, w, s.height()) {
            return self;
        }
        let tight = Rect::new(s.x0 + x0, s.y0 + y0, s.x0 + x1, s.y0 + y1);
        let mut values = Vec::with_capacity(tight.area());
        for row in y0..y1 {
            values.extend_from_slice(&self.values[row * w + x0..row * w + x1]);
        }
        Frame {
            width: self.width,
            height: self.height,
            support: tight,
            values,
        }
    }

    /// Copy of this frame stored over `region` (which must cover the support).
    pub(crate) fn expanded_to(&self, region: Rect) -> Frame {
        debug_assert!(self.support.is_empty() || region.union(&self.support) == region);
        let mut values = vec![0.0; region.area()];
        let rw = region.width();
        let sw = self.support.width();
        for y in self.support.y0..self.support.y1 {
            let dst = (y - region.y0) * rw + (self.support.x0 - region.x0);
            values[dst..dst + sw].copy_from_slice(self.support_row(y));
        }
        Frame {
            width: self.width,
            height: self.height,
            support: region,
            values,
        }
    }

    /// `self += scale * other` pixel-wise.
    pub fn add_scaled(&mut self, other: &Frame, scale: f64) -> Result<()> {
        check_same_dims(self, other)?;
        if other.support.is_empty() || scale == 0.0 {
            return Ok(());
        }
        let region = self.support.union(&other.support);
        if region != self.support {
            *self = self.expanded_to(region);
        }
        let rw = region.width();
        let ow = other.support.width();
        for y in other.support.y0..other.support.y1 {
            let dst = (y - region.y0) * rw + (other.support.x0 - region.x0);
            let src = other.support_row(y);
            for (d, s) in self.values[dst..dst + ow].iter_mut().zip(src) {
                *d += scale * s;
            }
        }
        Ok(())
    }

    /// Pixel-wise `self - other`.
    pub fn sub(&self, other: &Frame) -> Result<Frame> {
        let mut out = self.clone();
        out.add_scaled(other, -1.0)?;
        Ok(out)
    }

    /// Largest pixel value (zero for an empty support).
    pub fn max_value(&self) -> f64 {
        let m = self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if self.support.area() < self.width * self.height {
            m.max(0.0)
        } else if m.is_finite() {
            m
        } else {
            0.0
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Location and value of the largest pixel inside the support.
    ///
    /// Ties resolve to the first pixel in row-major order. `None` for an
    /// all-zero frame.
    pub fn argmax(&self) -> Option<(usize, usize, f64)> {
        let w = self.support.width();
        let mut best: Option<(usize, usize, f64)> = None;
        for (i, &v) in self.values.iter().enumerate() {
            if v != 0.0 && best.is_none_or(|b| v > b.2) {
                best = Some((self.support.x0 + i % w, self.support.y0 + i / w, v));
            }
        }
        match best {
            Some(b) if b.2 > 0.0 => Some(b),
            _ => None,
        }
    }

    /// Bilinear interpolation at a real-valued position.
    ///
    /// Coordinates outside the image clamp to the border, matching the
    /// replicate border policy of spatial filtering.
    pub fn sample_bilinear(&self, x: f64, y: f64) -> f64 {
        let xc = x.clamp(0.0, (self.width - 1) as f64);
        let yc = y.clamp(0.0, (self.height - 1) as f64);
        let x0 = xc.floor() as usize;
        let y0 = yc.floor() as usize;
        let fx = xc - x0 as f64;
        let fy = yc - y0 as f64;
        let x1 = (x0 + 1).min(self.width - 1);
        let y1 = (y0 + 1).min(self.height - 1);
        let top = self.get(x0, y0) * (1.0 - fx) + self.get(x1, y0) * fx;
        let bottom = self.get(x0, y1) * (1.0 - fx) + self.get(x1, y1) * fx;
        top * (1.0 - fy) + bottom * fy
    }
}

impl PartialEq for Frame {
    fn eq(&self, other: &Frame) -> bool {
        if self.dims() != other.dims() {
            return false;
        }
        let region = self.support.union(&other.support);
        (region.y0..region.y1)
            .all(|y| (region.x0..region.x1).all(|x| self.get(x, y) == other.get(x, y)))
    }
}

impl fmt::Debug for Frame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Frame")
            .field("width", &self.width)
            .field("height", &self.height)
            .field("support", &self.support)
            .finish_non_exhaustive()
    }
}

fn check_dims(width: usize, height: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::Dimension(format!("frame must be non-empty, got {width}x{height}")));
    }
    Ok(())
}

pub(crate) fn check_same_dims(a: &Frame, b: &Frame) -> Result<()> {
    if a.dims() != b.dims() {
        return Err(Error::Dimension(format!(
            "{}x{} vs {}x{}",
            a.width, a.height, b.width, b.height
        )));
    }
    Ok(())
}

/// `max(v, 0)` per pixel.
pub fn rectify_pos(frame: &Frame) -> Frame {
    frame.map(|v| v.max(0.0)).trimmed()
}

/// `-min(v, 0)` per pixel: the magnitude of the negative part.
pub fn rectify_neg(frame: &Frame) -> Frame {
    frame.map(|v| if v < 0.0 { -v } else { 0.0 }).trimmed()
}

/// Pixel-wise maximum over a set of equally sized frames.
pub fn max_over(frames: &[Frame]) -> Result<Frame> {
    let Some(first) = frames.first() else {
        return Err(Error::Dimension("no frames to combine".into()));
    };
    let (w, h) = first.dims();
    let mut region = Rect::EMPTY;
    for f in frames {
        check_same_dims(first, f)?;
        region = region.union(&f.support());
    }
    if region.is_empty() {
        return Ok(Frame::zeros(w, h));
    }
    let mut values = vec![f64::NEG_INFINITY; region.area()];
    let rw = region.width();
    for f in frames {
        for y in region.y0..region.y1 {
            for x in region.x0..region.x1 {
                let v = f.get(x, y);
                let slot = &mut values[(y - region.y0) * rw + (x - region.x0)];
                if v > *slot {
                    *slot = v;
                }
            }
        }
    }
    Frame::from_support(w, h, region, values)
}
