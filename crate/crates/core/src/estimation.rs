//! Turning response maps into detections and motion directions.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::dstmd::DirectionalResponse;
use crate::engine::Frame;
use crate::error::{Error, Result};
use crate::model::ModelOutput;

/// Default non-maximum suppression and target radius (px).
pub const DEFAULT_RADIUS: f64 = 5.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub frame_index: u64,
    pub x: usize,
    pub y: usize,
    /// Response at the peak (max over directions).
    pub response: f64,
    /// Decoded motion direction in radians, `[0, 2pi)`.
    pub direction: Option<f64>,
}

fn is_local_max(map: &Frame, x: usize, y: usize, v: f64) -> bool {
    let (w, h) = map.dims();
    for dy in -1isize..=1 {
        for dx in -1isize..=1 {
            let (nx, ny) = (x as isize + dx, y as isize + dy);
            if (dx, dy) == (0, 0) || nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                continue;
            }
            if map.get(nx as usize, ny as usize) > v {
                return false;
            }
        }
    }
    true
}

/// Every peak that survives greedy suppression at `gamma = 0`, strongest first.
///
/// Suppression only ever involves stronger peaks, so the detections for any
/// threshold are exactly the prefix of this list above that threshold.
pub fn peak_candidates(map: &Frame, frame_index: u64, radius: f64) -> Vec<Detection> {
    let s = map.support();
    let mut peaks = Vec::new();
    for y in s.y0..s.y1 {
        for (i, &v) in map.support_row(y).iter().enumerate() {
            let x = s.x0 + i;
            if v > 0.0 && is_local_max(map, x, y, v) {
                peaks.push((x, y, v));
            }
        }
    }
    peaks.sort_by(|a, b| b.2.total_cmp(&a.2).then((a.1, a.0).cmp(&(b.1, b.0))));
    let r2 = radius * radius;
    let mut kept: Vec<Detection> = Vec::new();
    for (x, y, v) in peaks {
        let close = kept.iter().any(|d| {
            let (dx, dy) = (d.x as f64 - x as f64, d.y as f64 - y as f64);
            dx * dx + dy * dy <= r2
        });
        if !close {
            kept.push(Detection {
                frame_index,
                x,
                y,
                response: v,
                direction: None,
            });
        }
    }
    kept
}

/// Local maxima of `map` above `gamma` after greedy suppression within
/// `radius`.
pub fn detect_in_map(map: &Frame, frame_index: u64, gamma: f64, radius: f64) -> Vec<Detection> {
    let mut found = peak_candidates(map, frame_index, radius);
    found.retain(|d| d.response > gamma);
    found
}

/// Detections on the max-over-directions map. Directions are not filled in;
/// see [`decode`].
pub fn detect(e: &DirectionalResponse, gamma: f64, radius: f64) -> Vec<Detection> {
    detect_in_map(&e.strength(), e.frame_index, gamma, radius)
}

/// Pixels within `radius` of the detection whose response exceeds `gamma`.
pub fn select_target_pixels(map: &Frame, detection: &Detection, radius: f64, gamma: f64) -> Vec<(usize, usize)> {
    let (w, h) = map.dims();
    let r = radius.max(0.0);
    let reach = r.floor() as usize;
    let (x0, y0) = (detection.x.saturating_sub(reach), detection.y.saturating_sub(reach));
    let (x1, y1) = ((detection.x + reach).min(w - 1), (detection.y + reach).min(h - 1));
    let mut pixels = Vec::new();
    for y in y0..=y1 {
        for x in x0..=x1 {
            let (dx, dy) = (x as f64 - detection.x as f64, y as f64 - detection.y as f64);
            if dx * dx + dy * dy <= r * r && map.get(x, y) > gamma {
                pixels.push((x, y));
            }
        }
    }
    pixels
}

/// Weighted vector sum of the directional responses over `pixels`.
pub fn population_vector(e: &DirectionalResponse, pixels: &[(usize, usize)]) -> Result<f64> {
    if pixels.is_empty() {
        return Err(Error::UndefinedDirection("no target pixels".into()));
    }
    let (mut vx, mut vy) = (0.0, 0.0);
    for (theta, channel) in e.directions().iter().zip(e.channels()) {
        let weight: f64 = pixels.iter().map(|&(x, y)| channel.get(x, y)).sum();
        vx += weight * theta.cos();
        vy += weight * theta.sin();
    }
    if vx.hypot(vy) < 1e-12 {
        return Err(Error::UndefinedDirection("responses cancel across directions".into()));
    }
    Ok(vy.atan2(vx).rem_euclid(TAU))
}

/// Detections with directions decoded wherever the model provides them.
pub fn decode(output: &ModelOutput, gamma: f64, radius: f64) -> Vec<Detection> {
    let map = output.strength();
    let mut found = detect_in_map(&map, output.frame_index(), gamma, radius);
    if let Some(e) = output.directional() {
        for d in &mut found {
            let pixels = select_target_pixels(&map, d, radius, gamma);
            d.direction = population_vector(e, &pixels).ok();
        }
    }
    found
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::uniform_directions;
    use std::f64::consts::PI;

    fn map(w: usize, h: usize, pts: &[(usize, usize, f64)]) -> Frame {
        Frame::from_fn(w, h, |x, y| pts.iter().find(|p| (p.0, p.1) == (x, y)).map_or(0.0, |p| p.2)).trimmed()
    }

    fn one_pixel(values: [f64; 8]) -> DirectionalResponse {
        let channels = values.iter().map(|&v| Frame::filled(1, 1, v)).collect();
        DirectionalResponse::new(0, uniform_directions(8), channels).unwrap()
    }

    #[test]
    fn nothing_to_detect_in_silence() {
        assert!(detect_in_map(&Frame::zeros(20, 20), 0, 0.1, 5.0).is_empty());
    }

    #[test]
    fn isolated_peak_is_found() {
        let d = detect_in_map(&map(20, 20, &[(7, 9, 2.0)]), 3, 1.0, 5.0);
        assert_eq!(d.len(), 1);
        assert_eq!((d[0].x, d[0].y, d[0].response, d[0].frame_index), (7, 9, 2.0, 3));
        assert!(detect_in_map(&map(20, 20, &[(7, 9, 2.0)]), 0, 2.0, 5.0).is_empty());
    }

    #[test]
    fn close_peaks_merge_and_far_peaks_do_not() {
        let close = map(20, 20, &[(5, 5, 1.0), (8, 5, 2.0)]);
        let d = detect_in_map(&close, 0, 0.0, 5.0);
        assert_eq!(d.len(), 1);
        assert_eq!((d[0].x, d[0].y), (8, 5));
        let far = map(20, 20, &[(2, 5, 1.0), (12, 5, 2.0)]);
        assert_eq!(detect_in_map(&far, 0, 0.0, 5.0).len(), 2);
    }

    #[test]
    fn detections_are_nested_in_the_threshold() {
        let mut seed = 17u64;
        let mut next = || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1);
            (seed >> 33) as f64 / (1u64 << 31) as f64
        };
        for _ in 0..20 {
            let m = Frame::from_fn(30, 30, |_, _| if next() < 0.1 { next() } else { 0.0 });
            let mut previous = usize::MAX;
            for g in [0.0, 0.1, 0.3, 0.5, 0.7, 0.9, 1.0] {
                let d = detect_in_map(&m, 0, g, 5.0);
                assert!(d.len() <= previous);
                assert!(d.iter().all(|d| d.response > g));
                previous = d.len();
            }
        }
    }

    #[test]
    fn target_pixels() {
        let single = map(20, 20, &[(7, 9, 2.0)]);
        let d = &detect_in_map(&single, 0, 0.5, 5.0)[0];
        assert_eq!(select_target_pixels(&single, d, 5.0, 0.5), vec![(7, 9)]);

        let blob = Frame::from_fn(30, 30, |x, y| if (10..15).contains(&x) && (10..15).contains(&y) { 1.0 } else { 0.0 });
        let d = Detection { frame_index: 0, x: 12, y: 12, response: 1.0, direction: None };
        assert_eq!(select_target_pixels(&blob, &d, 5.0, 0.5).len(), 25);

        let two = map(40, 20, &[(5, 5, 1.0), (6, 5, 0.8), (30, 5, 1.0), (31, 6, 0.9)]);
        let dets = detect_in_map(&two, 0, 0.5, 5.0);
        assert_eq!(dets.len(), 2);
        let a = select_target_pixels(&two, &dets[0], 5.0, 0.5);
        let b = select_target_pixels(&two, &dets[1], 5.0, 0.5);
        assert!(a.iter().all(|p| !b.contains(p)));
        assert_eq!(a.len() + b.len(), 4);
    }

    #[test]
    fn population_vector_cases() {
        let mut v = [0.0; 8];
        v[0] = 1.0;
        assert_eq!(population_vector(&one_pixel(v), &[(0, 0)]).unwrap(), 0.0);
        v[2] = 1.0;
        assert!((population_vector(&one_pixel(v), &[(0, 0)]).unwrap() - PI / 4.0).abs() < 1e-12);
        assert!(population_vector(&one_pixel([1.0; 8]), &[(0, 0)]).is_err());
        let mut w = [0.0; 8];
        w[7] = 1.0;
        let angle = population_vector(&one_pixel(w), &[(0, 0)]).unwrap();
        assert!((angle - 7.0 * PI / 4.0).abs() < 1e-12);
    }

    #[test]
    fn scaling_changes_nothing_but_the_threshold() {
        let m = map(30, 30, &[(5, 5, 1.0), (20, 20, 0.6), (21, 21, 0.3)]);
        let a = detect_in_map(&m, 0, 0.2, 5.0);
        let b = detect_in_map(&m.scaled(7.5), 0, 0.2 * 7.5, 5.0);
        let pos = |d: &[Detection]| d.iter().map(|d| (d.x, d.y)).collect::<Vec<_>>();
        assert_eq!(pos(&a), pos(&b));
        let mut v = [0.0; 8];
        v[1] = 0.3;
        v[2] = 0.7;
        let r = one_pixel(v);
        let scaled = one_pixel(v.map(|x| x * 4.0));
        let (p, q) = (population_vector(&r, &[(0, 0)]).unwrap(), population_vector(&scaled, &[(0, 0)]).unwrap());
        assert!((p - q).abs() < 1e-12);
    }
}
