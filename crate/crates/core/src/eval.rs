//! Evaluation harness: truth matching, ROC sweeps, tuning curves and
//! direction errors.

use serde::{Deserialize, Serialize};

use crate::config::PipelineConfig;
use crate::engine::Frame;
use crate::error::{Error, Result};
use crate::estimation::{peak_candidates, select_target_pixels, Detection, DEFAULT_RADIUS};
use crate::model::{Detector, ModelKind, ModelOutput};
use crate::stimulus::{actual_direction, Background, Renderer, StimulusSpec, TargetSpec, Trajectory, TruthRow};

/// Splits detections into true and false ones. Each truth is claimed by at
/// most one detection, nearest pairs first; a pair counts when its distance
/// is at most `radius`.
pub fn match_detections(detections: &[Detection], truths: &[(f64, f64)], radius: f64) -> (usize, usize) {
    let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
    for (i, d) in detections.iter().enumerate() {
        for (j, t) in truths.iter().enumerate() {
            let dist = (d.x as f64 - t.0).hypot(d.y as f64 - t.1);
            if dist <= radius {
                pairs.push((dist, i, j));
            }
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (mut used_det, mut used_truth) = (vec![false; detections.len()], vec![false; truths.len()]);
    let mut hits = 0;
    for (_, i, j) in pairs {
        if !used_det[i] && !used_truth[j] {
            used_det[i] = true;
            used_truth[j] = true;
            hits += 1;
        }
    }
    (hits, detections.len() - hits)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub gamma: f64,
    /// True detections per actual target.
    pub detection_rate: f64,
    /// False detections per frame.
    pub false_alarms: f64,
}

/// One responsive pixel near a candidate: its detection-map value and the
/// direction vector summed over its channels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PixelVote {
    pub strength: f64,
    pub vector: (f64, f64),
}

/// Everything needed to score one frame at any threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameRecord {
    pub frame: usize,
    pub truth: Option<TruthRow>,
    /// Detections at threshold zero, strongest first. Their `direction` is
    /// left empty; see [`FrameRecord::direction_at`].
    pub candidates: Vec<Detection>,
    /// Parallel to `candidates`. Filled only for directional models and only
    /// for candidates close enough to the truth to be scored as hits.
    pub votes: Vec<Vec<PixelVote>>,
}

impl FrameRecord {
    /// Direction of candidate `index` decoded from its pixels above `gamma`,
    /// exactly as [`crate::estimation::decode`] would at that threshold.
    pub fn direction_at(&self, index: usize, gamma: f64) -> Option<f64> {
        let (vx, vy) = self
            .votes
            .get(index)?
            .iter()
            .filter(|v| v.strength > gamma)
            .fold((0.0, 0.0), |(x, y), v| (x + v.vector.0, y + v.vector.1));
        (vx.hypot(vy) >= 1e-12).then(|| vy.atan2(vx).rem_euclid(std::f64::consts::TAU))
    }
}

/// Scores each threshold of `gammas` over `records`.
pub fn roc_sweep(records: &[FrameRecord], gammas: &[f64], radius: f64) -> Result<Vec<RocPoint>> {
    if gammas.is_empty() {
        return Err(Error::parameter("gammas", "threshold grid is empty"));
    }
    let targets = records.iter().filter(|r| r.truth.is_some()).count();
    Ok(gammas
        .iter()
        .map(|&gamma| {
            let (mut hits, mut misses) = (0usize, 0usize);
            for r in records {
                let n = r.candidates.partition_point(|d| d.response > gamma);
                let truth: Vec<(f64, f64)> = r.truth.iter().map(|t| (t.x, t.y)).collect();
                let (h, m) = match_detections(&r.candidates[..n], &truth, radius);
                hits += h;
                misses += m;
            }
            RocPoint {
                gamma,
                detection_rate: if targets == 0 { 0.0 } else { hits as f64 / targets as f64 },
                false_alarms: if records.is_empty() { 0.0 } else { misses as f64 / records.len() as f64 },
            }
        })
        .collect())
}

/// Best detection rate reachable on `roc` without exceeding `budget` false
/// alarms per frame. Zero when no point fits the budget.
pub fn detection_rate_within(roc: &[RocPoint], budget: f64) -> f64 {
    roc.iter()
        .filter(|p| p.false_alarms <= budget)
        .map(|p| p.detection_rate)
        .fold(0.0, f64::max)
}

/// `points` thresholds spaced logarithmically over the range of candidate
/// responses, plus zero.
pub fn gamma_grid(records: &[FrameRecord], points: usize) -> Vec<f64> {
    let (lo, hi) = records
        .iter()
        .flat_map(|r| r.candidates.iter().map(|d| d.response))
        .filter(|v| *v > 0.0)
        .fold((f64::MAX, f64::MIN), |(a, b), v| (a.min(v), b.max(v)));
    let mut grid = vec![0.0];
    if lo > hi || points == 0 {
        return grid;
    }
    if points == 1 || lo == hi {
        grid.push(hi);
        return grid;
    }
    let (a, b) = (lo.ln(), hi.ln());
    grid.extend((0..points).map(|i| (a + (b - a) * i as f64 / (points - 1) as f64).exp()));
    grid
}

fn pixel_votes(output: &ModelOutput, map: &Frame, detection: &Detection, radius: f64) -> Vec<PixelVote> {
    let Some(e) = output.directional() else { return Vec::new() };
    select_target_pixels(map, detection, radius, 0.0)
        .into_iter()
        .map(|(x, y)| {
            let vector = e
                .directions()
                .iter()
                .zip(e.channels())
                .fold((0.0, 0.0), |(vx, vy), (theta, c)| {
                    let v = c.get(x, y);
                    (vx + v * theta.cos(), vy + v * theta.sin())
                });
            PixelVote { strength: map.get(x, y), vector }
        })
        .collect()
}

/// Runs `kind` over a rendered clip and keeps the threshold-free detection
/// record of every frame after the warm-up.
///
/// Frame `f` is scored against the truth of frame `f - latency`, which lets
/// a caller discount the model's processing delay. With `latency = 0` each
/// frame is scored against its own truth.
pub fn record_clip(
    renderer: &Renderer,
    kind: ModelKind,
    cfg: &PipelineConfig,
    radius: f64,
    latency: usize,
) -> Result<Vec<FrameRecord>> {
    let mut detector = Detector::new(kind, cfg.clone())?;
    let mut records = Vec::new();
    for (frame, raw) in renderer.frames().enumerate() {
        let out = detector.process_frame(&raw)?;
        if out.warmup() {
            continue;
        }
        let map = out.strength();
        let truth = frame.checked_sub(latency).and_then(|f| renderer.truth(f));
        let candidates = peak_candidates(&map, out.frame_index(), radius);
        let votes = candidates
            .iter()
            .map(|d| match truth {
                Some(t) if (d.x as f64 - t.x).hypot(d.y as f64 - t.y) <= radius => pixel_votes(&out, &map, d, radius),
                _ => Vec::new(),
            })
            .collect();
        records.push(FrameRecord { frame, truth, candidates, votes });
    }
    Ok(records)
}

/// The truth delay in `0..=max_latency` frames under which the threshold-free
/// detections of `records` hit the most targets. Ties go to the shorter delay.
pub fn best_latency(records: &[FrameRecord], renderer: &Renderer, radius: f64, max_latency: usize) -> usize {
    let hits = |lag: usize| -> usize {
        records
            .iter()
            .filter_map(|r| {
                let t = r.frame.checked_sub(lag).and_then(|f| renderer.truth(f))?;
                Some(match_detections(&r.candidates, &[(t.x, t.y)], radius).0)
            })
            .sum()
    };
    (0..=max_latency).fold((0, 0), |(best, most), lag| {
        let h = hits(lag);
        if h > most { (lag, h) } else { (best, most) }
    })
    .0
}

/// Mean direction error (degrees) of the true detections above `gamma`, and
/// how many of them carried a direction.
pub fn mean_direction_error(records: &[FrameRecord], gamma: f64, radius: f64) -> (Option<f64>, usize, usize) {
    let (mut sum, mut with_dir, mut hits) = (0.0, 0usize, 0usize);
    for r in records {
        let Some(truth) = r.truth else { continue };
        let best = r
            .candidates
            .iter()
            .enumerate()
            .filter(|(_, d)| d.response > gamma)
            .map(|(i, d)| ((d.x as f64 - truth.x).hypot(d.y as f64 - truth.y), i))
            .filter(|(dist, _)| *dist <= radius)
            .min_by(|a, b| a.0.total_cmp(&b.0));
        if let Some((_, i)) = best {
            hits += 1;
            if let (Some(est), Some(tru)) = (r.direction_at(i, gamma), truth.direction) {
                sum += angular_error_deg(est, tru);
                with_dir += 1;
            }
        }
    }
    ((with_dir > 0).then(|| sum / with_dir as f64), with_dir, hits)
}

/// Circular difference of two angles in radians, in degrees within `[0, 180]`.
pub fn angular_error_deg(a: f64, b: f64) -> f64 {
    let d = (a - b).to_degrees().rem_euclid(360.0);
    d.min(360.0 - d)
}

/// Per-frame angular error; frames without an estimate or truth stay absent.
pub fn direction_error_series(estimates: &[Option<f64>], truth: &[Option<f64>]) -> Result<Vec<Option<f64>>> {
    if estimates.len() != truth.len() {
        return Err(Error::Dimension(format!(
            "{} estimates for {} truth rows",
            estimates.len(),
            truth.len()
        )));
    }
    Ok(estimates
        .iter()
        .zip(truth)
        .map(|(e, t)| Some(angular_error_deg((*e)?, (*t)?)))
        .collect())
}

/// Directions (degrees) of six sample points along the default sinusoid,
/// labelled A to F, all on its falling half between 0.7 s and 0.95 s.
pub const SAMPLE_DIRECTIONS_DEG: [f64; 6] = [143.12, 151.21, 166.88, 181.63, 197.80, 215.53];

/// Time (s) in `[from, to]` at which `trajectory` moves along `direction_deg`,
/// found by bisection. The direction must vary monotonically on the interval.
pub fn time_of_direction(trajectory: &Trajectory, direction_deg: f64, from: f64, to: f64) -> Result<f64> {
    let f = |t: f64| -> Result<f64> { Ok(actual_direction(trajectory, t)?.to_degrees() - direction_deg) };
    let (mut a, mut b) = (from, to);
    let (fa, fb) = (f(a)?, f(b)?);
    if fa * fb > 0.0 {
        return Err(Error::parameter(
            "direction_deg",
            format!("{direction_deg} is not reached between {from} s and {to} s"),
        ));
    }
    let rising = fa < fb;
    for _ in 0..100 {
        let m = 0.5 * (a + b);
        if (f(m)? < 0.0) == rising {
            a = m;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

/// The six sample times (s) on the default sinusoid.
pub fn sample_times(trajectory: &Trajectory) -> Result<Vec<f64>> {
    SAMPLE_DIRECTIONS_DEG
        .iter()
        .map(|&d| time_of_direction(trajectory, d, 0.7, 0.95))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TuningParameter {
    /// Weber contrast; the background luminance is `contrast * 255` under a
    /// black target.
    Contrast,
    /// Speed in px/s.
    Velocity,
    /// Extent along the motion (px).
    Width,
    /// Extent across the motion (px).
    Height,
}

impl TuningParameter {
    pub fn name(self) -> &'static str {
        match self {
            TuningParameter::Contrast => "contrast",
            TuningParameter::Velocity => "velocity",
            TuningParameter::Width => "width",
            TuningParameter::Height => "height",
        }
    }

    /// The usual sweep for this parameter.
    pub fn default_values(self) -> Vec<f64> {
        match self {
            TuningParameter::Contrast => (1..=10).map(|i| i as f64 / 10.0).collect(),
            TuningParameter::Velocity => (2..=14).map(|i| i as f64 * 50.0).collect(),
            TuningParameter::Width | TuningParameter::Height => (1..=15).map(f64::from).collect(),
        }
    }
}

impl std::str::FromStr for TuningParameter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "contrast" => Ok(TuningParameter::Contrast),
            "velocity" => Ok(TuningParameter::Velocity),
            "width" => Ok(TuningParameter::Width),
            "height" => Ok(TuningParameter::Height),
            other => Err(Error::parameter("parameter", format!("unknown tuning parameter `{other}`"))),
        }
    }
}

/// How tuning clips are built and scored.
///
/// The base stimulus is a black 5x5 target moving left at 250 px/s across a
/// white frame. Each clip lasts until the target has crossed the frame
/// (minus `margin` on each side) or `max_frames`, whichever is shorter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TuningProtocol {
    pub width: usize,
    pub height: usize,
    pub fps: f64,
    pub max_frames: usize,
    /// Distance (px) kept between the target centre and the frame edge.
    pub margin: f64,
    pub velocity: f64,
    pub target_width: usize,
    pub target_height: usize,
    pub contrast: f64,
    /// Frames dropped at each end of the scored span, after the warm-up.
    pub trim: usize,
    /// Radius (px) around the true centre searched for the response.
    pub radius: f64,
}

impl Default for TuningProtocol {
    fn default() -> Self {
        TuningProtocol {
            width: 500,
            height: 250,
            fps: 1000.0,
            max_frames: 1000,
            margin: 20.0,
            velocity: 250.0,
            target_width: 5,
            target_height: 5,
            contrast: 1.0,
            trim: 50,
            radius: DEFAULT_RADIUS,
        }
    }
}

impl TuningProtocol {
    /// Stimulus for one point of a sweep.
    pub fn stimulus(&self, parameter: TuningParameter, value: f64) -> Result<StimulusSpec> {
        let (mut v, mut w, mut h, mut c) = (self.velocity, self.target_width, self.target_height, self.contrast);
        match parameter {
            TuningParameter::Contrast => c = value,
            TuningParameter::Velocity => v = value,
            TuningParameter::Width => w = value.round() as usize,
            TuningParameter::Height => h = value.round() as usize,
        }
        if !(v > 0.0) || w == 0 || h == 0 || !(0.0..=1.0).contains(&c) {
            return Err(Error::parameter("value", format!("{value} is not a valid {}", parameter.name())));
        }
        let travel = self.width as f64 - 2.0 * self.margin;
        let frames = ((travel * self.fps / v).floor() as usize).min(self.max_frames);
        Ok(StimulusSpec {
            width: self.width,
            height: self.height,
            fps: self.fps,
            duration: frames,
            background: Background::Solid { luminance: c * 255.0 },
            target: Some(TargetSpec {
                width: w,
                height: h,
                luminance: 0.0,
                trajectory: Trajectory::horizontal([self.width as f64 - self.margin, self.height as f64 / 2.0], -v),
            }),
            anti_alias: false,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuningCurve {
    pub parameter: TuningParameter,
    pub values: Vec<f64>,
    /// Responses divided by their maximum.
    pub responses: Vec<f64>,
    /// Responses before normalisation.
    pub raw: Vec<f64>,
}

impl TuningCurve {
    /// Swept value with the largest response (first one on ties).
    pub fn argmax(&self) -> f64 {
        let mut best = 0;
        for (i, r) in self.raw.iter().enumerate() {
            if *r > self.raw[best] {
                best = i;
            }
        }
        self.values[best]
    }
}

fn max_near(map: &Frame, cx: f64, cy: f64, radius: f64) -> f64 {
    let (w, h) = map.dims();
    let x0 = (cx - radius).floor().max(0.0) as usize;
    let y0 = (cy - radius).floor().max(0.0) as usize;
    let x1 = ((cx + radius).ceil() as usize).min(w - 1);
    let y1 = ((cy + radius).ceil() as usize).min(h - 1);
    let mut best = 0.0f64;
    for y in y0..=y1 {
        for x in x0..=x1 {
            if (x as f64 - cx).hypot(y as f64 - cy) <= radius {
                best = best.max(map.get(x, y));
            }
        }
    }
    best
}

/// Mean over the scored frames of the strongest response within
/// `protocol.radius` of the target centre.
pub fn clip_response(spec: &StimulusSpec, kind: ModelKind, cfg: &PipelineConfig, protocol: &TuningProtocol) -> Result<f64> {
    let renderer = Renderer::new(spec.clone())?;
    let mut detector = Detector::new(kind, cfg.clone())?;
    let first = cfg.engine.warmup + protocol.trim;
    let end = spec.duration.saturating_sub(protocol.trim);
    if first >= end {
        return Err(Error::parameter(
            "duration",
            format!("clip of {} frames leaves nothing to score", spec.duration),
        ));
    }
    let (mut sum, mut n) = (0.0, 0usize);
    for frame in 0..end {
        let out = detector.process_frame(&renderer.frame(frame))?;
        if frame < first {
            continue;
        }
        let truth = renderer.truth(frame).expect("tuning clips have a target");
        sum += max_near(&out.strength(), truth.x, truth.y, protocol.radius);
        n += 1;
    }
    Ok(sum / n as f64)
}

/// Sweeps one target parameter and records the model's response to each value.
pub fn tuning_curve(
    parameter: TuningParameter,
    values: &[f64],
    kind: ModelKind,
    cfg: &PipelineConfig,
    protocol: &TuningProtocol,
) -> Result<TuningCurve> {
    if values.is_empty() {
        return Err(Error::parameter("values", "nothing to sweep"));
    }
    let raw = values
        .iter()
        .map(|&v| clip_response(&protocol.stimulus(parameter, v)?, kind, cfg, protocol))
        .collect::<Result<Vec<_>>>()?;
    let peak = raw.iter().cloned().fold(0.0, f64::max);
    let responses = raw.iter().map(|r| if peak > 0.0 { r / peak } else { 0.0 }).collect();
    Ok(TuningCurve {
        parameter,
        values: values.to_vec(),
        responses,
        raw,
    })
}
