//! Actuation predictor: a regularized linear model over a sliding 20-cycle
//! window of independent-channel observations, predicting the longitudinal
//! and lateral commands a healthy controller would issue next. The features
//! deliberately exclude past actuation so the prediction stays a
//! counterfactual of fault-free behavior rather than an echo of whatever the
//! (possibly compromised) controller is currently doing. The window/predict
//! interface is pluggable; a recurrent model could be substituted without
//! changing callers.

use crate::error::{Result, SimError};
use crate::scenario::ScenarioId;
use crate::units::DETECTION_RANGE;
use nalgebra::{Cholesky, DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::{HashSet, VecDeque};
use std::fmt::Write as _;
use std::path::Path;

/// Window length in control cycles.
pub const WINDOW_LEN: usize = 20;
/// Raw observables per frame: speed, relative distance, closing speed,
/// brake-threat number, two lane-line distances, road curvature.
pub const FRAME_FEATURES: usize = 7;
/// Fixed-knot rectifier lifts over the newest frame (see `lift`).
const LIFT_FEATURES: usize = 11;
const MODEL_MAGIC: &str = "adasim-predictor v1";
const MAX_TRAIN_SAMPLES: usize = 50_000;

// Fixed feature scales keeping the normal equations well conditioned.
const SCALE: [f64; FRAME_FEATURES] = [30.0, DETECTION_RANGE, 10.0, 5.0, 2.0, 2.0, 0.07];

/// One observed frame as the predictor sees it: independent-channel
/// observations plus the actuation executed on the frame. The actuation is a
/// regression target only; it never enters the feature vector.
#[derive(Debug, Clone, Copy)]
pub struct WindowFrame {
    pub speed: f64,
    /// Relative distance (m); non-finite values are saturated at the
    /// detection range.
    pub rd: f64,
    /// Closing speed (m/s, positive closing).
    pub rs: f64,
    pub lane_left: f64,
    pub lane_right: f64,
    /// Road curvature at the ego position (1/m).
    pub road_curvature: f64,
    /// Actuation executed on this frame.
    pub accel: f64,
    pub curvature: f64,
}

impl WindowFrame {
    /// Raw observables in physical units; non-finite and out-of-range inputs
    /// are saturated.
    fn raw(&self) -> [f64; FRAME_FEATURES] {
        let rd = if self.rd.is_finite() {
            self.rd.min(DETECTION_RANGE)
        } else {
            DETECTION_RANGE
        };
        let rs = if self.rs.is_finite() {
            self.rs.clamp(-30.0, 30.0)
        } else {
            0.0
        };
        // Brake-threat number: deceleration needed to stop before closing the
        // remaining gap, saturated at the physical limit.
        let threat = if rs > 0.0 {
            (rs * rs / (2.0 * rd.max(0.5))).min(crate::units::A_MAX_PHYSICAL)
        } else {
            0.0
        };
        [
            self.speed,
            rd,
            rs,
            threat,
            self.lane_left,
            self.lane_right,
            self.road_curvature,
        ]
    }
}

/// Fixed-knot rectifier basis over the newest frame's raw observables,
/// giving the otherwise-linear regressor a piecewise-linear response in the
/// quantities that drive hard braking and tight following.
fn lift(raw: &[f64; FRAME_FEATURES]) -> [f64; LIFT_FEATURES] {
    let (speed, rd, rs, threat) = (raw[0], raw[1], raw[2], raw[3]);
    let headway = rd / speed.max(1.0);
    let relu = |x: f64| x.max(0.0);
    [
        relu(rs - 2.0) / 10.0,
        relu(rs - 5.0) / 10.0,
        relu(rs - 8.0) / 10.0,
        relu(threat - 1.0) / 5.0,
        relu(threat - 2.0) / 5.0,
        relu(threat - 3.5) / 5.0,
        relu(20.0 - rd) / 20.0,
        relu(10.0 - rd) / 10.0,
        relu(1.5 - headway),
        relu(1.0 - headway),
        relu(0.6 - headway),
    ]
}

/// Sliding window of the most recent frames, oldest first.
#[derive(Debug, Clone, Default)]
pub struct PredictorWindow {
    frames: VecDeque<WindowFrame>,
}

impl PredictorWindow {
    pub fn push(&mut self, frame: WindowFrame) {
        if self.frames.len() == WINDOW_LEN {
            self.frames.pop_front();
        }
        self.frames.push_back(frame);
    }

    pub fn is_full(&self) -> bool {
        self.frames.len() == WINDOW_LEN
    }

    /// Flattened feature vector: every frame's scale-normalized observables
    /// oldest first, the rectifier lifts of the newest frame, and a trailing
    /// bias term; None until the window is full.
    fn features(&self) -> Option<Vec<f64>> {
        if !self.is_full() {
            return None;
        }
        let mut x = Vec::with_capacity(Predictor::dims());
        for frame in &self.frames {
            let raw = frame.raw();
            for i in 0..FRAME_FEATURES {
                x.push(raw[i] / SCALE[i]);
            }
        }
        x.extend_from_slice(&lift(&self.frames.back()?.raw()));
        x.push(1.0);
        Some(x)
    }
}

/// One fault-free run log used for training.
#[derive(Debug, Clone)]
pub struct Trace {
    pub scenario: ScenarioId,
    pub steps: Vec<WindowFrame>,
}

impl Trace {
    /// Serialize as CSV: the scenario is repeated on every row.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "scenario,speed,rd,rs,lane_left,lane_right,road_curvature,accel,curvature\n",
        );
        for s in &self.steps {
            let _ = writeln!(
                out,
                "{},{:.9},{:.9},{:.9},{:.9},{:.9},{:.9},{:.9},{:.9}",
                self.scenario,
                s.speed,
                s.rd,
                s.rs,
                s.lane_left,
                s.lane_right,
                s.road_curvature,
                s.accel,
                s.curvature
            );
        }
        out
    }

    pub fn from_csv_str(text: &str) -> Result<Trace> {
        let mut lines = text.lines();
        let header = lines.next().unwrap_or_default();
        if !header.starts_with("scenario,") {
            return Err(SimError::config("trace CSV missing expected header"));
        }
        let mut scenario = None;
        let mut steps = Vec::new();
        for (lineno, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let cells: Vec<&str> = line.split(',').collect();
            if cells.len() != 9 {
                return Err(SimError::config(format!(
                    "trace CSV line {}: expected 9 columns",
                    lineno + 2
                )));
            }
            let id: ScenarioId = cells[0].parse()?;
            scenario.get_or_insert(id);
            let num = |i: usize| -> Result<f64> {
                cells[i]
                    .parse::<f64>()
                    .map_err(|e| SimError::config(format!("trace CSV line {}: {e}", lineno + 2)))
            };
            steps.push(WindowFrame {
                speed: num(1)?,
                rd: num(2)?,
                rs: num(3)?,
                lane_left: num(4)?,
                lane_right: num(5)?,
                road_curvature: num(6)?,
                accel: num(7)?,
                curvature: num(8)?,
            });
        }
        let scenario = scenario.ok_or_else(|| SimError::config("trace CSV contains no rows"))?;
        Ok(Trace { scenario, steps })
    }
}

/// Fitted linear model: one weight vector per output channel.
#[derive(Debug, Clone, PartialEq)]
pub struct Predictor {
    weights_accel: Vec<f64>,
    weights_curvature: Vec<f64>,
}

/// Training product: the model plus held-out error per channel.
#[derive(Debug, Clone)]
pub struct TrainedModel {
    pub predictor: Predictor,
    pub rmse_accel: f64,
    pub rmse_curvature: f64,
}

impl Predictor {
    pub fn dims() -> usize {
        WINDOW_LEN * FRAME_FEATURES + LIFT_FEATURES + 1
    }

    /// Predicted (accel, curvature) for the next cycle; None until the window
    /// holds a full history.
    pub fn predict(&self, window: &PredictorWindow) -> Option<(f64, f64)> {
        let x = window.features()?;
        let dot = |w: &[f64]| w.iter().zip(&x).map(|(a, b)| a * b).sum::<f64>();
        Some((dot(&self.weights_accel), dot(&self.weights_curvature)))
    }

    /// Persist as a versioned text tensor dump.
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut out = String::new();
        let _ = writeln!(out, "{MODEL_MAGIC}");
        let _ = writeln!(out, "dims {}", Self::dims());
        for (name, w) in [
            ("accel", &self.weights_accel),
            ("curvature", &self.weights_curvature),
        ] {
            let cells: Vec<String> = w.iter().map(|v| format!("{v:.17e}")).collect();
            let _ = writeln!(out, "{name} {}", cells.join(" "));
        }
        std::fs::write(path, out).map_err(|e| SimError::io(path.display().to_string(), e))
    }

    pub fn load(path: &Path) -> Result<Predictor> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| SimError::io(path.display().to_string(), e))?;
        let mut lines = text.lines();
        if lines.next() != Some(MODEL_MAGIC) {
            return Err(SimError::config(format!(
                "{}: not a recognized predictor model file",
                path.display()
            )));
        }
        let dims_line = lines.next().unwrap_or_default();
        let dims: usize = dims_line
            .strip_prefix("dims ")
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| SimError::config("malformed model dims line"))?;
        let mut parse_row = |name: &str| -> Result<Vec<f64>> {
            let line = lines
                .next()
                .ok_or_else(|| SimError::config(format!("model missing {name} row")))?;
            let rest = line
                .strip_prefix(name)
                .ok_or_else(|| SimError::config(format!("model missing {name} row")))?;
            let w: Vec<f64> = rest
                .split_whitespace()
                .map(|c| c.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| SimError::config(format!("bad model number: {e}")))?;
            if w.len() != dims {
                return Err(SimError::config(format!(
                    "model {name} row has {} weights, expected {dims}",
                    w.len()
                )));
            }
            Ok(w)
        };
        let weights_accel = parse_row("accel")?;
        let weights_curvature = parse_row("curvature")?;
        if dims != Self::dims() {
            return Err(SimError::config(format!(
                "model dims {dims} incompatible with window {}",
                Self::dims()
            )));
        }
        Ok(Predictor {
            weights_accel,
            weights_curvature,
        })
    }
}

/// Fit the predictor on fault-free traces by sample-normalized ridge
/// regression. Requires at least 10 traces covering all six scenarios.
/// Deterministic given the seed. Every 7th sample is held out for the
/// reported RMSE.
pub fn predictor_train(traces: &[Trace], ridge: f64, seed: u64) -> Result<TrainedModel> {
    if traces.len() < 10 {
        return Err(SimError::InsufficientTraces {
            needed: 10,
            got: traces.len(),
        });
    }
    let covered: HashSet<ScenarioId> = traces.iter().map(|t| t.scenario).collect();
    let missing: Vec<String> = ScenarioId::ALL
        .iter()
        .filter(|s| !covered.contains(s))
        .map(|s| s.to_string())
        .collect();
    if !missing.is_empty() {
        return Err(SimError::config(format!(
            "training traces must cover all six scenarios; missing {}",
            missing.join(", ")
        )));
    }

    // Assemble (features, targets) samples: the window over steps
    // [t-20, t) predicts the actuation at step t. The hold-out split keys on
    // the position within the trace so duplicated traces split identically.
    let mut samples: Vec<(Vec<f64>, f64, f64, bool)> = Vec::new();
    for trace in traces {
        let mut window = PredictorWindow::default();
        for (i, step) in trace.steps.iter().enumerate() {
            if let Some(x) = window.features() {
                samples.push((x, step.accel, step.curvature, i % 7 == 6));
            }
            window.push(*step);
        }
    }
    if samples.is_empty() {
        return Err(SimError::config(format!(
            "traces too short: each needs more than {WINDOW_LEN} steps"
        )));
    }
    if samples.len() > MAX_TRAIN_SAMPLES {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        samples.shuffle(&mut rng);
        samples.truncate(MAX_TRAIN_SAMPLES);
    }

    let dims = Predictor::dims();
    let mut train: Vec<(&Vec<f64>, f64, f64)> = Vec::new();
    let mut held: Vec<(&Vec<f64>, f64, f64)> = Vec::new();
    for (x, a, k, hold) in &samples {
        if *hold {
            held.push((x, *a, *k));
        } else {
            train.push((x, *a, *k));
        }
    }
    if train.is_empty() {
        train = samples.iter().map(|(x, a, k, _)| (x, *a, *k)).collect();
    }

    // Weight-normalized normal equations (X'WX/sw + ridge*I) w = X'Wy/sw, so
    // duplicating the training set leaves the solution unchanged. Steady
    // cruising dominates the traces, so samples are up-weighted by the
    // magnitude of the longitudinal command to keep the rare hard-braking
    // regime from being averaged away.
    let mut sw = 0.0;
    let mut xtx = DMatrix::<f64>::zeros(dims, dims);
    let mut xty_a = DVector::<f64>::zeros(dims);
    let mut xty_k = DVector::<f64>::zeros(dims);
    for (x, a, k) in train.iter().copied() {
        let w = 1.0 + 6.0 * a.abs().min(5.0);
        sw += w;
        for i in 0..dims {
            let xi = w * x[i];
            if xi == 0.0 {
                continue;
            }
            for j in i..dims {
                xtx[(i, j)] += xi * x[j];
            }
            xty_a[i] += xi * a;
            xty_k[i] += xi * k;
        }
    }
    for i in 0..dims {
        for j in 0..i {
            xtx[(i, j)] = xtx[(j, i)];
        }
    }
    xtx /= sw;
    xty_a /= sw;
    xty_k /= sw;
    for i in 0..dims {
        xtx[(i, i)] += ridge;
    }
    let chol =
        Cholesky::new(xtx).ok_or_else(|| SimError::config("ridge system not positive definite"))?;
    let wa = chol.solve(&xty_a);
    let wk = chol.solve(&xty_k);
    let predictor = Predictor {
        weights_accel: wa.iter().copied().collect(),
        weights_curvature: wk.iter().copied().collect(),
    };

    let eval = if held.is_empty() { &train } else { &held };
    let mut se_a = 0.0;
    let mut se_k = 0.0;
    for (x, a, k) in eval.iter().copied() {
        let dot = |w: &[f64]| w.iter().zip(x).map(|(u, v)| u * v).sum::<f64>();
        se_a += (dot(&predictor.weights_accel) - a).powi(2);
        se_k += (dot(&predictor.weights_curvature) - k).powi(2);
    }
    let m = eval.len() as f64;
    Ok(TrainedModel {
        predictor,
        rmse_accel: (se_a / m).sqrt(),
        rmse_curvature: (se_k / m).sqrt(),
    })
}
