//! Two-point correlation and the two inhibition stages of the lobula.

use crate::dstmd::{DirectionalResponse, MedullaMaps};
use crate::engine::{Frame, Rect, SpatialFilter};
use crate::error::{Error, Result};
use crate::kernels::DirectionKernel;

/// Offset from a neuron to its correlation partner for preferred direction
/// `theta`.
///
/// The partner sits `alpha` pixels upstream, so a target moving along `theta`
/// crosses the partner first and the home position `alpha / v` later.
pub fn partner_offset(theta: f64, alpha: f64) -> (f64, f64) {
    let snap = |v: f64| {
        let r = v.round();
        if (v - r).abs() < 1e-9 {
            r
        } else {
            v
        }
    };
    (snap(-alpha * theta.cos()), snap(-alpha * theta.sin()))
}

/// Bilinear read of a dense full-frame buffer at a fixed offset, with the
/// border clamping of [`Frame::sample_bilinear`].
struct OffsetSampler {
    cols: Vec<(usize, usize, f64)>,
    rows: Vec<(usize, usize, f64)>,
}

impl OffsetSampler {
    fn new(width: usize, height: usize, offset: (f64, f64)) -> OffsetSampler {
        let axis = |n: usize, d: f64| {
            (0..n)
                .map(|i| {
                    let c = (i as f64 + d).clamp(0.0, (n - 1) as f64);
                    let lo = c.floor() as usize;
                    (lo, (lo + 1).min(n - 1), c - lo as f64)
                })
                .collect()
        };
        OffsetSampler {
            cols: axis(width, offset.0),
            rows: axis(height, offset.1),
        }
    }

    #[inline]
    fn sample(&self, dense: &[f64], width: usize, x: usize, y: usize) -> f64 {
        let (x0, x1, fx) = self.cols[x];
        let (y0, y1, fy) = self.rows[y];
        let top = dense[y0 * width + x0] * (1.0 - fx) + dense[y0 * width + x1] * fx;
        let bottom = dense[y1 * width + x0] * (1.0 - fx) + dense[y1 * width + x1] * fx;
        top * (1.0 - fy) + bottom * fy
    }
}

fn correlate_channel(maps: &MedullaMaps, far_off: &[f64], near_on: &[f64], offset: (f64, f64)) -> Result<Frame> {
    let on = &maps.on;
    let (width, height) = on.dims();
    let support = on.support();
    let sampler = OffsetSampler::new(width, height, offset);
    let mut values = vec![0.0; support.area()];
    let sw = support.width();
    for y in support.y0..support.y1 {
        let out = &mut values[(y - support.y0) * sw..(y - support.y0 + 1) * sw];
        for ((o, &tm3), x) in out.iter_mut().zip(on.support_row(y)).zip(support.x0..) {
            if tm3 == 0.0 {
                continue;
            }
            let far = sampler.sample(far_off, width, x, y);
            if far == 0.0 {
                continue;
            }
            let near = maps.off_delayed.get(x, y) + sampler.sample(near_on, width, x, y);
            *o = tm3 * near * far;
        }
    }
    Ok(Frame::from_support(width, height, support, values)?.trimmed())
}

/// Direction-selective correlation of the medulla signals.
///
/// For each preferred direction `theta` and pixel `A` with partner `B`:
/// `D = ON(A) * (OFF_n5(A) + ON_n4(B)) * OFF_n6(B)`. Non-integer partner
/// positions are sampled bilinearly.
pub fn lobula_correlate(
    maps: &MedullaMaps,
    directions: &[f64],
    alpha: f64,
    frame_index: u64,
) -> Result<DirectionalResponse> {
    let (width, height) = maps.on.dims();
    if maps.on.support().is_empty() || maps.off_delayed_long.is_zero() {
        let zeros = vec![Frame::zeros(width, height); directions.len()];
        return DirectionalResponse::new(frame_index, directions.to_vec(), zeros);
    }
    let far_off = maps.off_delayed_long.pixels();
    let near_on = maps.on_delayed.pixels();
    let channels = directions
        .iter()
        .map(|&theta| correlate_channel(maps, &far_off, &near_on, partner_offset(theta, alpha)))
        .collect::<Result<Vec<_>>>()?;
    DirectionalResponse::new(frame_index, directions.to_vec(), channels)
}

/// Second-order lateral inhibition: `[W2 * D]^+` per direction.
pub fn spatial_inhibition(response: &DirectionalResponse, w2: &SpatialFilter) -> Result<DirectionalResponse> {
    let channels = response
        .channels()
        .iter()
        .map(|d| Ok(crate::engine::rectify_pos(&w2.apply(d)?)))
        .collect::<Result<Vec<_>>>()?;
    DirectionalResponse::new(response.frame_index, response.directions().to_vec(), channels)
}

/// Inhibition across directions: `E(theta) = [sum_phi W3(theta - phi) D_I(phi)]^+`.
pub fn direction_inhibition(
    response: &DirectionalResponse,
    w3: &DirectionKernel,
) -> Result<DirectionalResponse> {
    let n = response.channels().len();
    if w3.bins() != n {
        return Err(Error::Dimension(format!(
            "direction kernel has {} bins for {n} channels",
            w3.bins()
        )));
    }
    let (width, height) = response.dims();
    let region = response
        .channels()
        .iter()
        .fold(Rect::EMPTY, |r, c| r.union(&c.support()));
    if region.is_empty() {
        return DirectionalResponse::new(
            response.frame_index,
            response.directions().to_vec(),
            vec![Frame::zeros(width, height); n],
        );
    }
    let inputs: Vec<Frame> = response
        .channels()
        .iter()
        .map(|c| if c.support() == region { c.clone() } else { c.expanded_to(region) })
        .collect();
    let weights: Vec<f64> = (0..n * n).map(|k| w3.taps()[(k / n + n - k % n) % n]).collect();
    let mut outputs = vec![vec![0.0; region.area()]; n];
    let mut column = vec![0.0; n];
    for p in 0..region.area() {
        for (c, input) in column.iter_mut().zip(&inputs) {
            *c = input.support_values()[p];
        }
        if column.iter().all(|&v| v == 0.0) {
            continue;
        }
        for (i, out) in outputs.iter_mut().enumerate() {
            let row = &weights[i * n..(i + 1) * n];
            let v: f64 = row.iter().zip(&column).map(|(w, c)| w * c).sum();
            out[p] = v.max(0.0);
        }
    }
    let channels = outputs
        .into_iter()
        .map(|v| Ok(Frame::from_support(width, height, region, v)?.trimmed()))
        .collect::<Result<Vec<_>>>()?;
    DirectionalResponse::new(response.frame_index, response.directions().to_vec(), channels)
}
