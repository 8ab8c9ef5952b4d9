use std::path::Path;

use dstmd::estimation::decode;
use dstmd::eval::{angular_error_deg, gamma_grid, record_clip, roc_sweep, tuning_curve, TuningParameter, TuningProtocol};
use dstmd::model::{Detector, ModelKind};
use dstmd::stimulus::{Background, Renderer, StimulusSpec};
use serde::Serialize;

use crate::config::{load_stimulus, RunConfig};
use crate::error::{CliError, Result};
use crate::io::{degrees, frame_name, list_frames, load_frame, write_csv, write_header, write_pgm};
use crate::manifest::RunManifest;

#[derive(Serialize)]
struct TruthCsv {
    frame: usize,
    x: f64,
    y: f64,
    direction_deg: Option<f64>,
}

#[derive(Serialize)]
struct DetectionCsv {
    frame: u64,
    x: usize,
    y: usize,
    response: f64,
    direction_deg: Option<f64>,
}

#[derive(Serialize)]
struct RocCsv {
    gamma: f64,
    dr: f64,
    fa: f64,
}

#[derive(Serialize)]
struct TuningCsv {
    value: f64,
    response: f64,
}

#[derive(Serialize)]
struct DirectionCsv {
    frame: usize,
    est_deg: Option<f64>,
    true_deg: Option<f64>,
    err_deg: Option<f64>,
}

fn create_dir(out: &Path) -> Result<()> {
    std::fs::create_dir_all(out).map_err(CliError::io(out))
}

fn apply_seed(spec: &mut StimulusSpec, seed: Option<u64>) -> Result<()> {
    let Some(seed) = seed else { return Ok(()) };
    match &mut spec.background {
        Background::Clutter { seed: s, .. } => {
            *s = seed;
            Ok(())
        }
        _ => Err(CliError::Config("--seed only applies to clutter backgrounds".into())),
    }
}

/// Image backgrounds are resolved relative to the stimulus file.
fn renderer_for(spec: &StimulusSpec, base: Option<&Path>) -> Result<Renderer> {
    match &spec.background {
        Background::Image { path, .. } => {
            let path = base.map_or_else(|| path.clone(), |b| b.join(path));
            Ok(Renderer::with_texture(spec.clone(), load_frame(&path)?)?)
        }
        _ => Ok(Renderer::new(spec.clone())?),
    }
}

fn stimulus_or(path: Option<&Path>, fallback: StimulusSpec) -> Result<StimulusSpec> {
    match path {
        Some(p) => load_stimulus(p),
        None => {
            fallback.validate()?;
            Ok(fallback)
        }
    }
}

fn checked_gamma(gamma: Option<f64>, cfg: &RunConfig) -> Result<f64> {
    let gamma = gamma.unwrap_or(cfg.eval.gamma);
    if gamma >= 0.0 && gamma.is_finite() {
        Ok(gamma)
    } else {
        Err(CliError::Config(format!("gamma must be non-negative, got {gamma}")))
    }
}

pub fn gen(spec_path: &Path, out: &Path, seed: Option<u64>) -> Result<String> {
    let mut spec = load_stimulus(spec_path)?;
    apply_seed(&mut spec, seed)?;
    let renderer = renderer_for(&spec, spec_path.parent())?;
    create_dir(out)?;
    for (i, frame) in renderer.frames().enumerate() {
        write_pgm(&out.join(frame_name(i)), &frame)?;
    }
    let truth = renderer.ground_truth();
    let truth_path = out.join("truth.csv");
    if truth.is_empty() {
        write_header(&truth_path, &["frame", "x", "y", "direction_deg"])?;
    } else {
        write_csv(
            &truth_path,
            truth.iter().map(|t| TruthCsv { frame: t.frame, x: t.x, y: t.y, direction_deg: degrees(t.direction) }),
        )?;
    }
    let mut manifest = RunManifest::new("gen");
    manifest.input = Some(spec_path.to_path_buf());
    manifest.stimulus = Some(spec);
    manifest.outputs = vec![format!("frame_000000.pgm .. {}", frame_name(renderer.len().saturating_sub(1))), "truth.csv".into()];
    manifest.write(out)?;
    Ok(format!("wrote {} frames and {} truth rows to {}", renderer.len(), truth.len(), out.display()))
}

pub fn run(frames: &Path, config: Option<&Path>, kind: ModelKind, gamma: Option<f64>, out: &Path) -> Result<String> {
    let cfg = RunConfig::load(config)?;
    let gamma = checked_gamma(gamma, &cfg)?;
    let paths = list_frames(frames)?;
    if paths.is_empty() {
        let missing = std::io::Error::new(std::io::ErrorKind::NotFound, "no image files");
        return Err(CliError::io(frames)(missing));
    }
    let mut detector = Detector::new(kind, cfg.pipeline())?;
    let (mut rows, mut scored) = (Vec::new(), 0usize);
    for path in &paths {
        let output = detector.process_frame(&load_frame(path)?)?;
        if output.warmup() {
            continue;
        }
        scored += 1;
        rows.extend(decode(&output, gamma, cfg.eval.radius).into_iter().map(|d| DetectionCsv {
            frame: d.frame_index,
            x: d.x,
            y: d.y,
            response: d.response,
            direction_deg: degrees(d.direction),
        }));
    }
    create_dir(out)?;
    let path = out.join("detections.csv");
    let count = rows.len();
    if rows.is_empty() {
        write_header(&path, &["frame", "x", "y", "response", "direction_deg"])?;
    } else {
        write_csv(&path, rows)?;
    }
    let mut manifest = RunManifest::new("run");
    manifest.model = Some(kind.to_string());
    manifest.input = Some(frames.to_path_buf());
    manifest.config = Some(cfg);
    manifest.outputs = vec!["detections.csv".into()];
    manifest.write(out)?;
    Ok(format!("{count} detections over {scored} scored frames (gamma {gamma})"))
}

pub fn tune(
    parameter: TuningParameter,
    values: Option<Vec<f64>>,
    config: Option<&Path>,
    kind: ModelKind,
    out: &Path,
) -> Result<String> {
    let cfg = RunConfig::load(config)?;
    let values = values.unwrap_or_else(|| parameter.default_values());
    let protocol = TuningProtocol { radius: cfg.eval.radius, ..TuningProtocol::default() };
    let curve = tuning_curve(parameter, &values, kind, &cfg.pipeline(), &protocol)?;
    create_dir(out)?;
    let name = format!("tuning_{}.csv", parameter.name());
    write_csv(
        &out.join(&name),
        curve.values.iter().zip(&curve.responses).map(|(&value, &response)| TuningCsv { value, response }),
    )?;
    let mut manifest = RunManifest::new("tune");
    manifest.model = Some(kind.to_string());
    manifest.config = Some(cfg);
    manifest.outputs = vec![name];
    manifest.write(out)?;
    Ok(format!("{} tuning peaks at {}", parameter.name(), curve.argmax()))
}

pub fn roc(
    stimulus: Option<&Path>,
    seed: Option<u64>,
    config: Option<&Path>,
    kind: ModelKind,
    out: &Path,
) -> Result<String> {
    let cfg = RunConfig::load(config)?;
    let fallback = StimulusSpec {
        background: Background::Clutter { seed: 1, pan_velocity: 250.0 },
        ..StimulusSpec::default()
    };
    let mut spec = stimulus_or(stimulus, fallback)?;
    apply_seed(&mut spec, seed)?;
    let renderer = renderer_for(&spec, stimulus.and_then(Path::parent))?;
    let records = record_clip(&renderer, kind, &cfg.pipeline(), cfg.eval.radius, cfg.eval.latency)?;
    let grid = gamma_grid(&records, cfg.eval.gamma_points);
    let curve = roc_sweep(&records, &grid, cfg.eval.radius)?;
    create_dir(out)?;
    write_csv(
        &out.join("roc.csv"),
        curve.iter().map(|p| RocCsv { gamma: p.gamma, dr: p.detection_rate, fa: p.false_alarms }),
    )?;
    let mut manifest = RunManifest::new("roc");
    manifest.model = Some(kind.to_string());
    manifest.input = stimulus.map(Path::to_path_buf);
    manifest.stimulus = Some(spec);
    manifest.config = Some(cfg);
    manifest.outputs = vec!["roc.csv".into()];
    manifest.write(out)?;
    let first = curve[0];
    Ok(format!(
        "{} thresholds; at gamma 0: detection rate {:.3}, {:.2} false alarms per frame",
        curve.len(),
        first.detection_rate,
        first.false_alarms
    ))
}

pub fn direction(
    stimulus: Option<&Path>,
    config: Option<&Path>,
    kind: ModelKind,
    gamma: Option<f64>,
    out: &Path,
) -> Result<String> {
    let cfg = RunConfig::load(config)?;
    let gamma = checked_gamma(gamma, &cfg)?;
    let spec = stimulus_or(stimulus, StimulusSpec::default())?;
    let renderer = renderer_for(&spec, stimulus.and_then(Path::parent))?;
    let mut detector = Detector::new(kind, cfg.pipeline())?;
    let mut rows = Vec::new();
    for (frame, raw) in renderer.frames().enumerate() {
        let output = detector.process_frame(&raw)?;
        if output.warmup() {
            continue;
        }
        // the strongest detection speaks for the frame
        let est = decode(&output, gamma, cfg.eval.radius).first().and_then(|d| d.direction);
        let truth = frame
            .checked_sub(cfg.eval.latency)
            .and_then(|f| renderer.truth(f))
            .and_then(|t| t.direction);
        let err = est.zip(truth).map(|(e, t)| angular_error_deg(e, t));
        rows.push(DirectionCsv { frame, est_deg: degrees(est), true_deg: degrees(truth), err_deg: err });
    }
    let errors: Vec<f64> = rows.iter().filter_map(|r| r.err_deg).collect();
    create_dir(out)?;
    write_csv(&out.join("direction.csv"), rows)?;
    let mut manifest = RunManifest::new("direction");
    manifest.model = Some(kind.to_string());
    manifest.input = stimulus.map(Path::to_path_buf);
    manifest.stimulus = Some(spec);
    manifest.config = Some(cfg);
    manifest.outputs = vec!["direction.csv".into()];
    manifest.write(out)?;
    if errors.is_empty() {
        return Ok("no frame carried a direction estimate".into());
    }
    let max = errors.iter().cloned().fold(0.0, f64::max);
    let mean = errors.iter().sum::<f64>() / errors.len() as f64;
    Ok(format!("{} frames with estimates; mean error {mean:.2} deg, max {max:.2} deg", errors.len()))
}
