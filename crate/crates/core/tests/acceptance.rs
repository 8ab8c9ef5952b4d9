//! End-to-end acceptance checks, one line per criterion.
//!
//! Runs as a plain binary (`harness = false`) so every line is printed even
//! when earlier checks fail. Criteria listed in `KNOWN_GAPS` are ones the
//! model is measured not to meet with its published parameters; they are
//! reported as FAIL but do not fail the run. Any other FAIL exits non-zero.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use dstmd::config::PipelineConfig;
use dstmd::engine::{Frame, TemporalFilter};
use dstmd::estimation::{decode, DEFAULT_RADIUS};
use dstmd::eval::{
    angular_error_deg, best_latency, detection_rate_within, gamma_grid, mean_direction_error, record_clip, roc_sweep,
    sample_times, tuning_curve, clip_response, FrameRecord, RocPoint, TuningCurve, TuningParameter, TuningProtocol,
};
use dstmd::kernels::{self, Kernel1D};
use dstmd::model::{Detector, ModelKind};
use dstmd::stimulus::{clutter_texture, Background, Renderer, StimulusSpec, TargetSpec, Trajectory};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Criteria the faithful model misses; see the README's "Known gaps".
const KNOWN_GAPS: [u32; 5] = [1, 2, 4, 9, 10];

struct Outcome {
    pass: bool,
    detail: String,
    notes: Vec<String>,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail, notes: Vec::new() }
}

fn curve(param: TuningParameter, kind: ModelKind, cfg: &PipelineConfig) -> TuningCurve {
    tuning_curve(param, &param.default_values(), kind, cfg, &TuningProtocol::default()).expect("tuning sweep")
}

fn fmt(values: &[f64], digits: usize) -> String {
    let parts: Vec<String> = values.iter().map(|v| format!("{v:.digits$}")).collect();
    format!("[{}]", parts.join(", "))
}

/// Tuning curves at the default parameters, shared by several criteria.
struct Baseline {
    velocity: TuningCurve,
    width: TuningCurve,
    height: TuningCurve,
    contrast: TuningCurve,
}

fn velocity_peak(base: &Baseline) -> Outcome {
    let peak = base.velocity.argmax();
    outcome(
        (peak - 300.0).abs() <= 50.0,
        format!("velocity argmax {peak} px/s (want 300 +/- 50); curve {}", fmt(&base.velocity.responses, 2)),
    )
}

fn size_peaks(base: &Baseline) -> Outcome {
    let (w, h) = (base.width.argmax(), base.height.argmax());
    outcome(
        (w - 5.0).abs() <= 1.0 && (h - 5.0).abs() <= 1.0,
        format!("width argmax {w} px, height argmax {h} px (want 5 +/- 1 each)"),
    )
}

/// Largest drop between consecutive points, as a fraction of the curve max.
fn worst_drop(c: &TuningCurve) -> f64 {
    c.responses.windows(2).map(|p| (p[0] - p[1]).max(0.0)).fold(0.0, f64::max)
}

fn contrast_monotone(base: &Baseline) -> Outcome {
    let estmd = curve(TuningParameter::Contrast, ModelKind::Estmd, &PipelineConfig::default());
    let checks = [("DSTMD", &base.contrast), ("ESTMD", &estmd)];
    let pass = checks
        .iter()
        .all(|(_, c)| worst_drop(c) <= 0.02 && *c.responses.last().unwrap() >= 1.0 - 0.02);
    let detail = checks
        .iter()
        .map(|(name, c)| format!("{name} worst drop {:.4}, response at 1.0 = {:.3}", worst_drop(c), c.responses.last().unwrap()))
        .collect::<Vec<_>>()
        .join("; ");
    outcome(pass, format!("{detail} (want drops <= 0.02, max at 1.0)"))
}

fn direction_on_sinusoid() -> Outcome {
    let spec = StimulusSpec::default();
    let renderer = Renderer::new(spec.clone()).unwrap();
    let mut model = Detector::new(ModelKind::Dstmd, PipelineConfig::default()).unwrap();
    let mut estimates = vec![None; renderer.len()];
    for (f, raw) in renderer.frames().enumerate() {
        let out = model.process_frame(&raw).unwrap();
        if !out.warmup() {
            estimates[f] = decode(&out, 0.0, DEFAULT_RADIUS).first().and_then(|d| d.direction);
        }
    }
    let truth = |f: usize| renderer.truth(f).and_then(|t| t.direction);
    let max_error = |lag: usize| {
        (lag..renderer.len())
            .filter_map(|f| estimates[f].zip(truth(f - lag)).map(|(e, t)| angular_error_deg(e, t)))
            .fold(0.0, f64::max)
    };
    let worst = max_error(0);
    let samples: Vec<f64> = sample_times(&spec.target.as_ref().unwrap().trajectory)
        .unwrap()
        .iter()
        .map(|t| {
            let f = (t * spec.fps).round() as usize;
            estimates[f].zip(truth(f)).map_or(f64::NAN, |(e, t)| angular_error_deg(e, t))
        })
        .collect();
    let pass = worst <= 5.0 && samples.iter().all(|e| *e <= 2.5);
    let mut o = outcome(
        pass,
        format!("max error {worst:.2} deg (want <= 5), sample positions {} deg (want <= 2.5)", fmt(&samples, 2)),
    );
    let (lag, lagged) = (0..=40).map(|l| (l, max_error(l))).min_by(|a, b| a.1.total_cmp(&b.1)).unwrap();
    o.notes.push(format!("against the truth {lag} frames earlier the max error is {lagged:.2} deg"));
    o
}

fn selectivity_pattern() -> Outcome {
    let protocol = TuningProtocol::default();
    let spec = protocol.stimulus(TuningParameter::Velocity, 250.0).unwrap();
    let cfg = PipelineConfig::default();
    let renderer = Renderer::new(spec.clone()).unwrap();
    let mut model = Detector::new(ModelKind::Dstmd, cfg.clone()).unwrap();
    let first = cfg.engine.warmup + protocol.trim;
    let mut sums = vec![0.0; cfg.lobula.directions.len()];
    let mut n = 0;
    for f in 0..spec.duration - protocol.trim {
        let out = model.process_frame(&renderer.frame(f)).unwrap();
        if f < first {
            continue;
        }
        let e = out.directional().unwrap();
        let Some((px, py, _)) = out.strength().argmax() else { continue };
        let r = protocol.radius as isize;
        for (sum, c) in sums.iter_mut().zip(e.channels()) {
            let mut best = 0.0f64;
            for dy in -r..=r {
                for dx in -r..=r {
                    if dx * dx + dy * dy <= r * r {
                        best = best.max(c.get_clamped(px as isize + dx, py as isize + dy));
                    }
                }
            }
            *sum += best;
        }
        n += 1;
    }
    let mean: Vec<f64> = sums.iter().map(|s| s / n as f64).collect();
    let bins = mean.len();
    let distance = |i: usize| {
        let d = (i + bins - bins / 2) % bins;
        d.min(bins - d)
    };
    let peak = (0..bins).max_by(|a, b| mean[*a].total_cmp(&mean[*b])).unwrap();
    let mut strictly = true;
    for d in 0..bins / 2 {
        let near = (0..bins).filter(|&i| distance(i) == d).map(|i| mean[i]).fold(f64::MAX, f64::min);
        let far = (0..bins).filter(|&i| distance(i) == d + 1).map(|i| mean[i]).fold(f64::MIN, f64::max);
        strictly &= near > far;
    }
    outcome(
        peak == bins / 2 && strictly,
        format!("mean E per channel (0..315 deg) {}, peak at {} deg", fmt(&mean, 1), peak * 360 / bins),
    )
}

fn size_selectivity() -> Outcome {
    let protocol = TuningProtocol::default();
    let cfg = PipelineConfig::default();
    let response = |h: f64| {
        let spec = protocol.stimulus(TuningParameter::Height, h).unwrap();
        clip_response(&spec, ModelKind::Dstmd, &cfg, &protocol).unwrap()
    };
    let (target, bar) = (response(5.0), response(50.0));
    let ratio = bar / target;
    outcome(ratio < 0.2, format!("50 px bar / 5x5 target response = {ratio:.3} (want < 0.2)"))
}

fn static_nullity() -> Outcome {
    let (w, h) = (64, 48);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let noise = Frame::from_fn(w, h, |_, _| rng.gen_range(0.0..255.0));
    let scenes = [
        Frame::filled(w, h, 0.0),
        Frame::filled(w, h, 255.0),
        Frame::filled(w, h, 97.3),
        noise,
        clutter_texture(w, h, 3).unwrap(),
    ];
    let mut worst = 0.0f64;
    for scene in &scenes {
        for kind in [ModelKind::Dstmd, ModelKind::Estmd] {
            let mut model = Detector::new(kind, PipelineConfig::default()).unwrap();
            for _ in 0..300 {
                let out = model.process_frame(scene).unwrap();
                if !out.warmup() {
                    let m = match out.directional() {
                        Some(e) => e.channels().iter().map(Frame::max_abs).fold(0.0, f64::max),
                        None => out.strength().max_abs(),
                    };
                    worst = worst.max(m);
                }
            }
        }
    }
    outcome(worst < 1e-9, format!("max |E| over 5 static scenes, both models: {worst:e} (want < 1e-9)"))
}

fn oracle_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut stream_err = 0.0f64;
    for _ in 0..100 {
        let len = rng.gen_range(1..60);
        let taps: Vec<f64> = (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let kernel = Kernel1D::causal(taps.clone(), 1.0).unwrap();
        let signal: Vec<Vec<f64>> = (0..200)
            .map(|_| (0..6).map(|_| if rng.gen_bool(0.3) { 0.0 } else { rng.gen_range(-100.0..100.0) }).collect())
            .collect();
        let mut filter = TemporalFilter::new(kernel);
        for t in 0..signal.len() {
            let out = filter.step(Frame::new(3, 2, signal[t].clone()).unwrap()).unwrap();
            for (p, got) in out.pixels().iter().enumerate() {
                let want: f64 = (0..=t.min(len - 1)).map(|k| taps[k] * signal[t - k][p]).sum();
                stream_err = stream_err.max((got - want).abs());
            }
        }
    }

    // W1 against a direct space-time sum
    let cfg = PipelineConfig::default();
    let l = &cfg.lamina;
    let e = &cfg.engine;
    let fast = kernels::exp_kernel(l.lambda1, e.step, e.mass_cutoff).unwrap();
    let slow = kernels::exp_kernel(l.lambda2, e.step, e.mass_cutoff).unwrap();
    let (positive, negative) = kernels::dog_split(l.sigma2, l.sigma3).unwrap();
    let r = positive.radius().max(negative.radius()) as isize;
    let (w, h, frames) = (20usize, 20usize, 60usize);
    let clip: Vec<Frame> = (0..frames)
        .map(|_| Frame::from_fn(w, h, |_, _| if rng.gen_bool(0.5) { 0.0 } else { rng.gen_range(-50.0..50.0) }))
        .collect();
    let mut lateral = dstmd::dstmd::LateralInhibition::new(&cfg).unwrap();
    let mut w1_err = 0.0f64;
    for t in 0..frames {
        let got = lateral.step(&clip[t]).unwrap();
        for y in 0..h {
            for x in 0..w {
                let mut want = 0.0;
                for k in 0..=t {
                    let (a, b) = (fast.taps().get(k).copied().unwrap_or(0.0), slow.taps().get(k).copied().unwrap_or(0.0));
                    for dy in -r..=r {
                        for dx in -r..=r {
                            let weight = positive.get(dx, dy) * a + negative.get(dx, dy) * b;
                            want += weight * clip[t - k].get_clamped(x as isize - dx, y as isize - dy);
                        }
                    }
                }
                w1_err = w1_err.max((got.get(x, y) - want).abs());
            }
        }
    }
    outcome(
        stream_err < 1e-9 && w1_err < 1e-9,
        format!("streaming vs offline max error {stream_err:e}; separable W1 vs direct 3-D {w1_err:e} (want < 1e-9)"),
    )
}

fn argmaxes(cfg: &PipelineConfig, params: &[TuningParameter]) -> Vec<f64> {
    params.iter().map(|&p| curve(p, ModelKind::Dstmd, cfg).argmax()).collect()
}

fn parameter_monotonicity(base: &Baseline) -> Outcome {
    let mut velocity = Vec::new();
    let mut width = Vec::new();
    for (n4, tau4) in [(1, 5.0), (2, 10.0), (3, 15.0), (4, 20.0), (5, 25.0), (6, 30.0)] {
        if (n4, tau4) == (3, 15.0) {
            velocity.push(base.velocity.argmax());
            width.push(base.width.argmax());
            continue;
        }
        let mut cfg = PipelineConfig::default();
        cfg.lobula.n4 = n4;
        cfg.lobula.tau4 = tau4;
        let a = argmaxes(&cfg, &[TuningParameter::Velocity, TuningParameter::Width]);
        velocity.push(a[0]);
        width.push(a[1]);
    }
    let down = velocity.windows(2).all(|p| p[1] < p[0]);
    let up = width.windows(2).all(|p| p[1] > p[0]);

    let reference = [base.contrast.argmax(), base.velocity.argmax(), base.width.argmax()];
    let grid_step = [0.1, 50.0, 1.0];
    let mut heights = Vec::new();
    let mut others_steady = true;
    for (s4, s5) in [(1.0, 2.0), (1.5, 3.0), (2.3, 4.6), (2.8, 5.6), (3.7, 7.4)] {
        let a = if (s4, s5) == (1.5, 3.0) {
            vec![base.height.argmax(), reference[0], reference[1], reference[2]]
        } else {
            let mut cfg = PipelineConfig::default();
            cfg.inhibition.sigma4 = s4;
            cfg.inhibition.sigma5 = s5;
            argmaxes(
                &cfg,
                &[TuningParameter::Height, TuningParameter::Contrast, TuningParameter::Velocity, TuningParameter::Width],
            )
        };
        heights.push(a[0]);
        for i in 0..3 {
            others_steady &= (a[i + 1] - reference[i]).abs() <= grid_step[i] + 1e-9;
        }
    }
    let taller = heights.windows(2).all(|p| p[1] > p[0]);
    outcome(
        down && up && taller && others_steady,
        format!(
            "(n4,tau4) sweep: velocity argmax {} (want strictly falling), width argmax {} (want strictly rising); \
             (sigma4,sigma5) sweep: height argmax {} (want strictly rising), other argmaxes within one step: {others_steady}",
            fmt(&velocity, 0),
            fmt(&width, 0),
            fmt(&heights, 0)
        ),
    )
}

/// A sinusoidal target over panning clutter, scaled down to keep the run
/// short: 300x100 px and 700 frames.
fn clutter_clip(seed: u64, luminance: f64, clutter: bool) -> Renderer {
    let (w, h) = (300usize, 100usize);
    let spec = StimulusSpec {
        width: w,
        height: h,
        duration: 700,
        background: if clutter {
            Background::Clutter { seed, pan_velocity: 250.0 }
        } else {
            Background::Solid { luminance: 255.0 }
        },
        target: Some(TargetSpec {
            luminance,
            trajectory: Trajectory::Sinusoid {
                x0: w as f64,
                vx: 250.0,
                y0: h as f64 / 2.0,
                amplitude: 15.0,
                omega: 4.0 * PI,
                t0: 0.3,
            },
            ..TargetSpec::default()
        }),
        ..StimulusSpec::default()
    };
    Renderer::new(spec).unwrap()
}

fn rescored(records: &[FrameRecord], renderer: &Renderer) -> Vec<FrameRecord> {
    records
        .iter()
        .map(|r| FrameRecord { truth: renderer.truth(r.frame), votes: Vec::new(), ..r.clone() })
        .collect()
}

/// Luminance-0 detection rate is at least the luminance-50 one at every
/// false-alarm level either curve reaches.
fn dominates(dark: &[RocPoint], grey: &[RocPoint]) -> bool {
    dark.iter()
        .chain(grey)
        .map(|p| p.false_alarms)
        .all(|b| detection_rate_within(dark, b) >= detection_rate_within(grey, b))
}

fn clutter_roc() -> Outcome {
    let cfg = PipelineConfig::default();
    let r = DEFAULT_RADIUS;
    let clean = clutter_clip(0, 0.0, false);
    let clean_records = record_clip(&clean, ModelKind::Dstmd, &cfg, r, 0).unwrap();
    let latency = best_latency(&clean_records, &clean, r, 40);

    let (mut literal_order, mut delayed_order) = (true, true);
    let (mut literal_err, mut delayed_err) = (Vec::new(), Vec::new());
    let mut rates = Vec::new();
    for seed in 1..=3 {
        let mut literal = Vec::new();
        let mut delayed = Vec::new();
        for luminance in [0.0, 50.0] {
            let clip = clutter_clip(seed, luminance, true);
            let records = record_clip(&clip, ModelKind::Dstmd, &cfg, r, latency).unwrap();
            let own = rescored(&records, &clip);
            let roc_delayed = roc_sweep(&records, &gamma_grid(&records, 50), r).unwrap();
            let roc_literal = roc_sweep(&own, &gamma_grid(&own, 50), r).unwrap();
            if luminance == 0.0 {
                delayed_err.push(mean_direction_error(&records, 0.0, r).0.unwrap_or(f64::NAN));
                let own_votes = record_clip(&clip, ModelKind::Dstmd, &cfg, r, 0).unwrap();
                literal_err.push(mean_direction_error(&own_votes, 0.0, r).0.unwrap_or(f64::NAN));
            }
            rates.push(format!(
                "seed {seed} lum {luminance}: D_R(F_A<=1) {:.3} / {:.3}",
                detection_rate_within(&roc_literal, 1.0),
                detection_rate_within(&roc_delayed, 1.0)
            ));
            literal.push(roc_literal);
            delayed.push(roc_delayed);
        }
        literal_order &= dominates(&literal[0], &literal[1]);
        delayed_order &= dominates(&delayed[0], &delayed[1]);
    }

    let estmd_clip = clutter_clip(1, 0.0, true);
    let mut estmd = Detector::new(ModelKind::Estmd, cfg.clone()).unwrap();
    let mut silent = true;
    for raw in estmd_clip.frames() {
        let out = estmd.process_frame(&raw).unwrap();
        if !out.warmup() {
            silent &= decode(&out, 0.0, r).iter().all(|d| d.direction.is_none());
        }
    }
    let estmd_records = record_clip(&estmd_clip, ModelKind::Estmd, &cfg, r, 0).unwrap();
    let estmd_rate = roc_sweep(&estmd_records, &[0.0], r).unwrap()[0].detection_rate;

    let within = |errs: &[f64]| errs.iter().all(|e| *e <= 10.0);
    let pass = literal_order && within(&literal_err) && silent && estmd_rate > 0.0;
    let mut o = outcome(
        pass,
        format!(
            "lum 0 ROC dominates lum 50 on seeds 1-3: {literal_order}; DSTMD mean direction error on hits {} deg (want <= 10); \
             ESTMD detection rate {estmd_rate:.3}, no directions: {silent}",
            fmt(&literal_err, 1)
        ),
    );
    o.notes.push(format!(
        "scoring each frame against the truth {latency} frames earlier: dominance {delayed_order}, direction error {} deg",
        fmt(&delayed_err, 1)
    ));
    o.notes.push(format!("D_R at <= 1 false alarm per frame, own truth / delayed truth: {}", rates.join("; ")));
    o
}

fn kernel_suite() -> Outcome {
    let cfg = PipelineConfig::default();
    let (l, e, lob) = (&cfg.lamina, &cfg.engine, &cfg.lobula);
    let h = kernels::temporal_bandpass(l.n1, l.tau1, l.n2, l.tau2, e.step, e.mass_cutoff).unwrap();
    let w3 = kernels::w3_kernel(lob.sigma6, lob.sigma7, lob.directions.len()).unwrap();
    let w2 = kernels::w2_kernel(&cfg.inhibition.surround()).unwrap();
    let ratio = w2.negative_mass().abs() / w2.positive_mass();
    let gammas = [
        (l.n1, l.tau1),
        (l.n2, l.tau2),
        (cfg.estmd.n3, cfg.estmd.tau3),
        (lob.n4, lob.tau4),
        (lob.n5, lob.tau5),
        (lob.n6, lob.tau6),
    ];
    let offsets: Vec<f64> = gammas
        .iter()
        .map(|&(n, tau)| {
            let k = kernels::gamma_kernel(n, tau, e.step, e.mass_cutoff).unwrap();
            k.argmax() as f64 * k.step() - tau
        })
        .collect();
    let pass = h.sum().abs() <= 1e-9
        && w3.sum().abs() <= 1e-9
        && (ratio - 3.0).abs() <= 0.03
        && offsets.iter().all(|o| o.abs() <= e.step);
    outcome(
        pass,
        format!(
            "sum H {:e}, sum W3 {:e}, W2 surround/centre {ratio:.4}, Gamma argmax - tau {}",
            h.sum(),
            w3.sum(),
            fmt(&offsets, 0)
        ),
    )
}

type Criterion<'a> = (u32, &'static str, Box<dyn Fn() -> Outcome + 'a>);

fn main() -> ExitCode {
    let start = Instant::now();
    let cfg = PipelineConfig::default();
    let base = Baseline {
        velocity: curve(TuningParameter::Velocity, ModelKind::Dstmd, &cfg),
        width: curve(TuningParameter::Width, ModelKind::Dstmd, &cfg),
        height: curve(TuningParameter::Height, ModelKind::Dstmd, &cfg),
        contrast: curve(TuningParameter::Contrast, ModelKind::Dstmd, &cfg),
    };
    let criteria: Vec<Criterion<'_>> = vec![
        (1, "velocity tuning", Box::new(|| velocity_peak(&base))),
        (2, "width/height tuning", Box::new(|| size_peaks(&base))),
        (3, "contrast monotonicity", Box::new(|| contrast_monotone(&base))),
        (4, "direction estimation", Box::new(direction_on_sinusoid)),
        (5, "direction selectivity", Box::new(selectivity_pattern)),
        (6, "size selectivity", Box::new(size_selectivity)),
        (7, "static-scene nullity", Box::new(static_nullity)),
        (8, "oracle equivalence", Box::new(oracle_equivalence)),
        (9, "parameter monotonicity", Box::new(|| parameter_monotonicity(&base))),
        (10, "clutter ROC", Box::new(clutter_roc)),
        (11, "kernel suite", Box::new(kernel_suite)),
    ];
    let mut unexpected = Vec::new();
    for (id, name, check) in &criteria {
        let t = Instant::now();
        let o = check();
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        let gap = if !o.pass && KNOWN_GAPS.contains(id) { " [known gap]" } else { "" };
        println!("criterion {id:>2} {verdict}{gap} {name}: {} ({:.0}s)", o.detail, t.elapsed().as_secs_f64());
        for note in &o.notes {
            println!("              note: {note}");
        }
        if !o.pass && !KNOWN_GAPS.contains(id) {
            unexpected.push(*id);
        }
    }
    println!("acceptance finished in {:.0}s", start.elapsed().as_secs_f64());
    if unexpected.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("unexpected failures: {unexpected:?}");
        ExitCode::FAILURE
    }
}
