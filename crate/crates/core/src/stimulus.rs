//! Synthetic stimuli: a dark (or bright) rectangle moving over a plain or
//! panning background, with analytic ground truth.

use std::f64::consts::{PI, TAU};
use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::engine::Frame;
use crate::error::{Error, Result};
use crate::kernels::gaussian1d;

/// Margin (px) of the background ring used for Weber contrast.
pub const WEBER_MARGIN: usize = 10;

/// Where the target is at a given time. Times are in seconds, positions in
/// pixels, image coordinates with `y` pointing down.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Trajectory {
    /// `start + velocity * t`.
    Linear { start: [f64; 2], velocity: [f64; 2] },
    /// `(x0 - vx (t + t0), y0 + amplitude sin(omega (t + t0)))`.
    Sinusoid {
        x0: f64,
        vx: f64,
        y0: f64,
        amplitude: f64,
        omega: f64,
        t0: f64,
    },
}

impl Default for Trajectory {
    fn default() -> Self {
        Trajectory::Sinusoid {
            x0: 500.0,
            vx: 250.0,
            y0: 125.0,
            amplitude: 15.0,
            omega: 4.0 * PI,
            t0: 0.3,
        }
    }
}

impl Trajectory {
    /// Horizontal motion at `speed` px/s (negative is leftward) through
    /// `start`.
    pub fn horizontal(start: [f64; 2], speed: f64) -> Trajectory {
        Trajectory::Linear {
            start,
            velocity: [speed, 0.0],
        }
    }

    pub fn position(&self, t: f64) -> (f64, f64) {
        match *self {
            Trajectory::Linear { start, velocity } => (start[0] + velocity[0] * t, start[1] + velocity[1] * t),
            Trajectory::Sinusoid {
                x0,
                vx,
                y0,
                amplitude,
                omega,
                t0,
            } => (x0 - vx * (t + t0), y0 + amplitude * (omega * (t + t0)).sin()),
        }
    }

    pub fn velocity(&self, t: f64) -> (f64, f64) {
        match *self {
            Trajectory::Linear { velocity, .. } => (velocity[0], velocity[1]),
            Trajectory::Sinusoid {
                vx,
                amplitude,
                omega,
                t0,
                ..
            } => (-vx, amplitude * omega * (omega * (t + t0)).cos()),
        }
    }
}

/// Direction of motion at time `t` (s), radians in `[0, 2pi)`.
pub fn actual_direction(trajectory: &Trajectory, t: f64) -> Result<f64> {
    let (vx, vy) = trajectory.velocity(t);
    if vx.hypot(vy) < 1e-12 {
        return Err(Error::UndefinedDirection(format!("target is at rest at t = {t}")));
    }
    Ok(vy.atan2(vx).rem_euclid(TAU))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TargetSpec {
    pub width: usize,
    pub height: usize,
    pub luminance: f64,
    pub trajectory: Trajectory,
}

impl Default for TargetSpec {
    fn default() -> Self {
        TargetSpec {
            width: 5,
            height: 5,
            luminance: 0.0,
            trajectory: Trajectory::default(),
        }
    }
}

/// Background of a stimulus. Pan velocities are in px/s; positive values move
/// the content to the right, wrapping around horizontally.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Background {
    Solid {
        luminance: f64,
    },
    /// A grayscale picture on disk; load it and use [`Renderer::with_texture`].
    Image {
        path: PathBuf,
        #[serde(default)]
        pan_velocity: f64,
    },
    /// Procedural clutter: smooth noise with dark blobs and trunks.
    Clutter {
        seed: u64,
        #[serde(default)]
        pan_velocity: f64,
    },
}

impl Default for Background {
    fn default() -> Self {
        Background::Solid { luminance: 255.0 }
    }
}

impl Background {
    pub fn pan_velocity(&self) -> f64 {
        match *self {
            Background::Solid { .. } => 0.0,
            Background::Image { pan_velocity, .. } | Background::Clutter { pan_velocity, .. } => pan_velocity,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StimulusSpec {
    pub width: usize,
    pub height: usize,
    pub fps: f64,
    /// Number of frames.
    pub duration: usize,
    pub background: Background,
    /// When deserializing, an absent target means a target-free clip.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<TargetSpec>,
    /// Paint the target with fractional pixel coverage instead of rounding
    /// its position.
    pub anti_alias: bool,
}

impl Default for StimulusSpec {
    fn default() -> Self {
        StimulusSpec {
            width: 500,
            height: 250,
            fps: 1000.0,
            duration: 1000,
            background: Background::default(),
            target: Some(TargetSpec::default()),
            anti_alias: false,
        }
    }
}

impl StimulusSpec {
    /// Time in seconds of frame `frame`.
    pub fn time(&self, frame: usize) -> f64 {
        frame as f64 / self.fps
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |reason: String| Err(Error::Stimulus(reason));
        if self.width == 0 || self.height == 0 {
            return bad("frame must be at least 1x1".into());
        }
        if !(self.fps > 0.0 && self.fps.is_finite()) {
            return bad(format!("fps must be positive, got {}", self.fps));
        }
        if let Background::Solid { luminance } = self.background {
            if !(0.0..=255.0).contains(&luminance) {
                return bad(format!("background luminance {luminance} outside 0..=255"));
            }
        }
        if !self.background.pan_velocity().is_finite() {
            return bad("pan velocity must be finite".into());
        }
        let Some(target) = &self.target else {
            return Ok(());
        };
        if target.width == 0 || target.height == 0 {
            return bad("target must be at least 1x1".into());
        }
        if !(0.0..=255.0).contains(&target.luminance) {
            return bad(format!("target luminance {} outside 0..=255", target.luminance));
        }
        for frame in 0..self.duration {
            let (x0, y0, x1, y1) = target_box(target, &target.trajectory, self.time(frame));
            if x0 < -0.5 || y0 < -0.5 || x1 > self.width as f64 + 0.5 || y1 > self.height as f64 + 0.5 {
                return bad(format!("target leaves the frame at frame {frame}"));
            }
        }
        Ok(())
    }
}

fn target_box(target: &TargetSpec, trajectory: &Trajectory, t: f64) -> (f64, f64, f64, f64) {
    let (cx, cy) = trajectory.position(t);
    let (hw, hh) = (target.width as f64 / 2.0, target.height as f64 / 2.0);
    (cx - hw, cy - hh, cx + hw, cy + hh)
}

/// Ground truth for one frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruthRow {
    pub frame: usize,
    pub x: f64,
    pub y: f64,
    /// Radians in `[0, 2pi)`; absent when the target is at rest.
    pub direction: Option<f64>,
}

/// Per-frame target centres; empty when the stimulus has no target.
pub type GroundTruth = Vec<TruthRow>;

/// Sets pixels inside `bounds` (`[x0, y0, x1, y1]`) for which `inside` holds
/// at the pixel centre, wrapping horizontally.
fn paint_wrapped(pixels: &mut [f64], width: usize, bounds: [f64; 4], lum: f64, inside: impl Fn(f64, f64) -> bool) {
    let height = pixels.len() / width;
    let [x0, y0, x1, y1] = bounds;
    for y in (y0.floor().max(0.0) as usize)..(y1.ceil().min(height as f64) as usize) {
        for xi in x0.floor() as isize..x1.ceil() as isize {
            if inside(xi as f64 + 0.5, y as f64 + 0.5) {
                pixels[y * width + xi.rem_euclid(width as isize) as usize] = lum;
            }
        }
    }
}

/// Procedural clutter texture of the given size.
pub fn clutter_texture(width: usize, height: usize, seed: u64) -> Result<Frame> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise: Vec<f64> = (0..width * height).map(|_| rng.gen::<f64>()).collect();
    // smooth with wraparound in x and clamping in y
    let taps = gaussian1d(4.0, 3.0)?;
    let r = (taps.len() / 2) as isize;
    let mut tmp = vec![0.0; width * height];
    for y in 0..height {
        for x in 0..width {
            tmp[y * width + x] = taps
                .iter()
                .enumerate()
                .map(|(k, w)| w * noise[y * width + (x as isize + k as isize - r).rem_euclid(width as isize) as usize])
                .sum();
        }
    }
    let mut smooth = vec![0.0; width * height];
    for y in 0..height {
        for x in 0..width {
            smooth[y * width + x] = taps
                .iter()
                .enumerate()
                .map(|(k, w)| w * tmp[(y as isize + k as isize - r).clamp(0, height as isize - 1) as usize * width + x])
                .sum();
        }
    }
    let (lo, hi) = smooth.iter().fold((f64::MAX, f64::MIN), |(a, b), &v| (a.min(v), b.max(v)));
    let span = (hi - lo).max(1e-12);
    let mut pixels: Vec<f64> = smooth.iter().map(|v| 110.0 + 130.0 * (v - lo) / span).collect();

    let blobs = (width * height / 4000).max(1);
    for _ in 0..blobs {
        let (cx, cy) = (rng.gen_range(0.0..width as f64), rng.gen_range(0.0..height as f64));
        let (rx, ry) = (rng.gen_range(6.0..25.0), rng.gen_range(6.0..25.0));
        let lum = rng.gen_range(20.0..100.0);
        let inside = |x: f64, y: f64| ((x - cx) / rx).powi(2) + ((y - cy) / ry).powi(2) <= 1.0;
        paint_wrapped(&mut pixels, width, [cx - rx, cy - ry, cx + rx, cy + ry], lum, inside);
    }
    let trunks = (width / 150).max(1);
    for _ in 0..trunks {
        let cx = rng.gen_range(0.0..width as f64);
        let half = rng.gen_range(5.0..15.0);
        let lum = rng.gen_range(30.0..80.0);
        paint_wrapped(&mut pixels, width, [cx - half, 0.0, cx + half, height as f64], lum, |_, _| true);
    }
    Frame::new(width, height, pixels)
}

/// Renders frames of a [`StimulusSpec`] on demand.
#[derive(Debug, Clone)]
pub struct Renderer {
    spec: StimulusSpec,
    texture: Option<Frame>,
}

impl Renderer {
    /// For solid and procedural backgrounds.
    pub fn new(spec: StimulusSpec) -> Result<Renderer> {
        spec.validate()?;
        let texture = match spec.background {
            Background::Solid { .. } => None,
            Background::Clutter { seed, .. } => Some(clutter_texture(spec.width, spec.height, seed)?),
            Background::Image { ref path, .. } => {
                return Err(Error::Stimulus(format!(
                    "image background {} must be loaded by the caller",
                    path.display()
                )))
            }
        };
        Ok(Renderer { spec, texture })
    }

    /// Uses `texture` as the background picture.
    pub fn with_texture(spec: StimulusSpec, texture: Frame) -> Result<Renderer> {
        spec.validate()?;
        if texture.width() < spec.width || texture.height() < spec.height {
            return Err(Error::Stimulus(format!(
                "background {}x{} is smaller than the {}x{} frame",
                texture.width(),
                texture.height(),
                spec.width,
                spec.height
            )));
        }
        Ok(Renderer {
            spec,
            texture: Some(texture),
        })
    }

    pub fn spec(&self) -> &StimulusSpec {
        &self.spec
    }

    pub fn len(&self) -> usize {
        self.spec.duration
    }

    pub fn is_empty(&self) -> bool {
        self.spec.duration == 0
    }

    fn background(&self, frame: usize) -> Vec<f64> {
        let (w, h) = (self.spec.width, self.spec.height);
        match (&self.spec.background, &self.texture) {
            (Background::Solid { luminance }, _) => vec![*luminance; w * h],
            (bg, Some(tex)) => {
                let shift = (bg.pan_velocity() * self.spec.time(frame)).round() as isize;
                let tw = tex.width() as isize;
                let mut pixels = Vec::with_capacity(w * h);
                for y in 0..h {
                    for x in 0..w {
                        pixels.push(tex.get((x as isize - shift).rem_euclid(tw) as usize, y));
                    }
                }
                pixels
            }
            (_, None) => unreachable!("textured backgrounds carry a texture"),
        }
    }

    pub fn frame(&self, frame: usize) -> Frame {
        let (w, h) = (self.spec.width, self.spec.height);
        let mut pixels = self.background(frame);
        if let Some(target) = &self.spec.target {
            let (bx0, by0, bx1, by1) = target_box(target, &target.trajectory, self.spec.time(frame));
            if self.spec.anti_alias {
                let cover = |p: usize, a: f64, b: f64| ((p as f64 + 1.0).min(b) - (p as f64).max(a)).max(0.0);
                for y in (by0.floor().max(0.0) as usize)..(by1.ceil().min(h as f64) as usize) {
                    for x in (bx0.floor().max(0.0) as usize)..(bx1.ceil().min(w as f64) as usize) {
                        let c = cover(x, bx0, bx1) * cover(y, by0, by1);
                        let p = &mut pixels[y * w + x];
                        *p = *p * (1.0 - c) + target.luminance * c;
                    }
                }
            } else {
                let x0 = bx0.round().max(0.0) as usize;
                let y0 = by0.round().max(0.0) as usize;
                let x1 = (bx0.round() + target.width as f64).clamp(0.0, w as f64) as usize;
                let y1 = (by0.round() + target.height as f64).clamp(0.0, h as f64) as usize;
                for y in y0..y1 {
                    pixels[y * w + x0..y * w + x1].fill(target.luminance);
                }
            }
        }
        Frame::new(w, h, pixels).expect("buffer matches the frame size")
    }

    pub fn truth(&self, frame: usize) -> Option<TruthRow> {
        let target = self.spec.target.as_ref()?;
        let t = self.spec.time(frame);
        let (x, y) = target.trajectory.position(t);
        Some(TruthRow {
            frame,
            x,
            y,
            direction: actual_direction(&target.trajectory, t).ok(),
        })
    }

    pub fn ground_truth(&self) -> GroundTruth {
        (0..self.spec.duration).filter_map(|f| self.truth(f)).collect()
    }

    pub fn frames(&self) -> impl Iterator<Item = Frame> + '_ {
        (0..self.spec.duration).map(|f| self.frame(f))
    }
}

/// Renders a whole sequence in memory.
pub fn render_sequence(spec: &StimulusSpec) -> Result<(Vec<Frame>, GroundTruth)> {
    let r = Renderer::new(spec.clone())?;
    Ok((r.frames().collect(), r.ground_truth()))
}

/// `|mean(target box) - mean(surrounding ring)| / 255` with a ring `margin`
/// pixels wide. The boxes are placed as the renderer places the target.
pub fn weber_contrast(frame: &Frame, center: (f64, f64), width: usize, height: usize, margin: usize) -> Result<f64> {
    let x0 = (center.0 - width as f64 / 2.0).round() as isize;
    let y0 = (center.1 - height as f64 / 2.0).round() as isize;
    let (m, w, h) = (margin as isize, width as isize, height as isize);
    if x0 - m < 0 || y0 - m < 0 || x0 + w + m > frame.width() as isize || y0 + h + m > frame.height() as isize {
        return Err(Error::Stimulus("contrast rectangle leaves the frame".into()));
    }
    let (mut inner, mut ring, mut n_inner, mut n_ring) = (0.0, 0.0, 0usize, 0usize);
    for y in y0 - m..y0 + h + m {
        for x in x0 - m..x0 + w + m {
            let v = frame.get(x as usize, y as usize);
            if (x0..x0 + w).contains(&x) && (y0..y0 + h).contains(&y) {
                inner += v;
                n_inner += 1;
            } else {
                ring += v;
                n_ring += 1;
            }
        }
    }
    if n_ring == 0 {
        return Err(Error::Stimulus("contrast ring is empty".into()));
    }
    Ok((inner / n_inner as f64 - ring / n_ring as f64).abs() / 255.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plain_background_without_target_is_constant() {
        let spec = StimulusSpec {
            width: 40,
            height: 20,
            duration: 5,
            target: None,
            ..StimulusSpec::default()
        };
        let (frames, truth) = render_sequence(&spec).unwrap();
        assert_eq!(frames.len(), 5);
        assert!(truth.is_empty());
        for f in frames {
            assert!(f.pixels().iter().all(|&v| v == 255.0));
        }
    }

    #[test]
    fn default_sinusoid_positions() {
        let traj = Trajectory::default();
        let (x, y) = traj.position(0.7);
        assert!((x - 250.0).abs() < 1e-9);
        assert!((y - 125.0).abs() < 1e-9);
        let (x, _) = traj.position(0.0);
        assert!((x - 425.0).abs() < 1e-9);
    }

    #[test]
    fn default_sinusoid_direction_range() {
        let traj = Trajectory::default();
        let (mut lo, mut hi) = (f64::MAX, f64::MIN);
        for f in 0..=1000 {
            let d = actual_direction(&traj, f as f64 / 1000.0).unwrap().to_degrees();
            lo = lo.min(d);
            hi = hi.max(d);
        }
        assert!((lo - 142.98).abs() < 0.1, "{lo}");
        assert!((hi - 217.01).abs() < 0.1, "{hi}");
    }

    #[test]
    fn linear_directions() {
        let left = Trajectory::horizontal([0.0, 0.0], -250.0);
        assert!((actual_direction(&left, 0.0).unwrap() - PI).abs() < 1e-12);
        let down = Trajectory::Linear { start: [0.0, 0.0], velocity: [0.0, 250.0] };
        assert!((actual_direction(&down, 0.0).unwrap() - PI / 2.0).abs() < 1e-12);
        let still = Trajectory::Linear { start: [0.0, 0.0], velocity: [0.0, 0.0] };
        assert!(actual_direction(&still, 0.0).is_err());
    }

    #[test]
    fn painted_target_matches_truth() {
        let spec = StimulusSpec {
            duration: 50,
            ..StimulusSpec::default()
        };
        let r = Renderer::new(spec).unwrap();
        for f in 0..50 {
            let frame = r.frame(f);
            let truth = r.truth(f).unwrap();
            let dark: Vec<(usize, usize)> = (0..250)
                .flat_map(|y| (0..500).map(move |x| (x, y)))
                .filter(|&(x, y)| frame.get(x, y) == 0.0)
                .collect();
            assert_eq!(dark.len(), 25);
            let mx = dark.iter().map(|p| p.0 as f64 + 0.5).sum::<f64>() / 25.0;
            let my = dark.iter().map(|p| p.1 as f64 + 0.5).sum::<f64>() / 25.0;
            assert!((mx - truth.x).abs() <= 0.5 + 1e-9 && (my - truth.y).abs() <= 0.5 + 1e-9);
        }
    }

    #[test]
    fn anti_aliased_target_keeps_its_mass() {
        let spec = StimulusSpec {
            width: 60,
            height: 40,
            duration: 1,
            anti_alias: true,
            target: Some(TargetSpec {
                trajectory: Trajectory::Linear { start: [30.3, 20.7], velocity: [0.0, 0.0] },
                ..TargetSpec::default()
            }),
            ..StimulusSpec::default()
        };
        let f = Renderer::new(spec).unwrap().frame(0);
        let darkness: f64 = f.pixels().iter().map(|v| 255.0 - v).sum();
        assert!((darkness - 25.0 * 255.0).abs() < 1e-9);
    }

    #[test]
    fn panning_shifts_a_quarter_pixel_per_frame() {
        let spec = StimulusSpec {
            width: 64,
            height: 16,
            duration: 12,
            target: None,
            background: Background::Clutter { seed: 5, pan_velocity: 250.0 },
            ..StimulusSpec::default()
        };
        let r = Renderer::new(spec).unwrap();
        let f0 = r.frame(0);
        let f4 = r.frame(4);
        let f8 = r.frame(8);
        for y in 0..16 {
            for x in 0..64 {
                assert_eq!(f4.get((x + 1) % 64, y), f0.get(x, y));
                assert_eq!(f8.get((x + 2) % 64, y), f0.get(x, y));
            }
        }
        assert_ne!(f0, f4);
    }

    #[test]
    fn rendering_is_deterministic() {
        let spec = StimulusSpec {
            width: 80,
            height: 40,
            duration: 3,
            background: Background::Clutter { seed: 9, pan_velocity: 250.0 },
            target: Some(TargetSpec {
                trajectory: Trajectory::horizontal([60.0, 20.0], -250.0),
                ..TargetSpec::default()
            }),
            ..StimulusSpec::default()
        };
        assert_eq!(render_sequence(&spec).unwrap().0, render_sequence(&spec).unwrap().0);
        let other = StimulusSpec {
            background: Background::Clutter { seed: 10, pan_velocity: 250.0 },
            ..spec.clone()
        };
        assert_ne!(render_sequence(&spec).unwrap().0, render_sequence(&other).unwrap().0);
    }

    #[test]
    fn weber_contrast_cases() {
        let on = |bg: f64| {
            let spec = StimulusSpec {
                width: 60,
                height: 40,
                duration: 1,
                background: Background::Solid { luminance: bg },
                target: Some(TargetSpec {
                    trajectory: Trajectory::Linear { start: [30.0, 20.0], velocity: [0.0, 0.0] },
                    ..TargetSpec::default()
                }),
                ..StimulusSpec::default()
            };
            Renderer::new(spec).unwrap().frame(0)
        };
        assert_eq!(weber_contrast(&on(255.0), (30.0, 20.0), 5, 5, WEBER_MARGIN).unwrap(), 1.0);
        assert_eq!(weber_contrast(&on(127.5), (30.0, 20.0), 5, 5, WEBER_MARGIN).unwrap(), 0.5);
        assert_eq!(weber_contrast(&on(0.0), (30.0, 20.0), 5, 5, WEBER_MARGIN).unwrap(), 0.0);
        assert!(weber_contrast(&on(255.0), (5.0, 20.0), 5, 5, WEBER_MARGIN).is_err());
    }

    #[test]
    fn invalid_specs_are_rejected() {
        let escaping = StimulusSpec {
            target: Some(TargetSpec {
                trajectory: Trajectory::horizontal([480.0, 125.0], 250.0),
                ..TargetSpec::default()
            }),
            ..StimulusSpec::default()
        };
        assert!(escaping.validate().is_err());
        assert!(StimulusSpec { fps: 0.0, ..StimulusSpec::default() }.validate().is_err());
        let small = Frame::zeros(10, 10);
        assert!(Renderer::with_texture(StimulusSpec::default(), small).is_err());
    }
}
