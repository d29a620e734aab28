//! Deterministic synthetic participants, self-reports and interaction logs.
//!
//! A report is drawn around a co-occurrence profile, then rendered into a
//! session whose timing statistics are monotone in the reported levels:
//!
//! | behaviour                         | driven by                    |
//! |-----------------------------------|------------------------------|
//! | key dwell, flight, backspace rate | arousal (affine)             |
//! | mouse speed                       | arousal (affine)             |
//! | dwell spread                      | fear                         |
//! | flight spread                     | acceptance                   |
//! | mouse speed spread                | surprise                     |
//! | mouse pauses                      | sadness                      |
//! | click hold                        | anger                        |
//! | tap duration                      | disgust                      |
//! | swipe speed                       | joy                          |
//! | gap between touch gestures        | anticipation                 |
//!
//! Arousal is the mean of the anger, fear, surprise and joy levels. Every
//! random draw comes from a stream keyed by (seed, participant, session,
//! purpose), so output does not depend on thread scheduling and adding
//! participants leaves earlier ones unchanged.

use rand::distributions::WeightedIndex;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::cooccurrence::{expected_profile, table_for, CooccurrenceError};
use crate::emotion::{BasicEmotion, EmotionName, Level, LevelClass, Region, SelfReport};
use crate::features::{EventKind, InteractionEvent, Session, BACKSPACE};
use crate::io::{report_to_line, write_session, SessionRecord};
use crate::reference::RESIDENCE_PERCENT;
use crate::rng::stream;

const PURPOSE_STATE: u64 = 1;
const PURPOSE_RENDER: u64 = 2;
const PURPOSE_REGION: u64 = 3;

/// Self-reports are four hours apart.
pub const REPORT_INTERVAL_MS: u64 = 4 * 60 * 60 * 1000;
/// A session starts this long after its report.
pub const SESSION_DELAY_MS: u64 = 60 * 1000;
const PHASE_GAP_MS: u64 = 1000;
const MOUSE_STEP_MS: u64 = 20;
const PAUSE_EVERY: u32 = 10;
const SWIPE_STEPS: u64 = 5;
const SWIPE_STEP_MS: u64 = 50;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SynthError {
    #[error("invalid generator configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Cooccurrence(#[from] CooccurrenceError),
}

/// One entry of the anchor distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnchorWeight {
    pub anchor: BasicEmotion,
    pub level: LevelClass,
    pub weight: f64,
}

/// Behaviour kernel. Times in ms, speeds in px/s, rates as fractions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BehaviorKernel {
    pub keystrokes: u32,
    pub dwell_base_ms: f64,
    pub dwell_slope_ms: f64,
    pub dwell_fear_spread_ms: f64,
    pub flight_base_ms: f64,
    pub flight_slope_ms: f64,
    pub flight_acceptance_spread_ms: f64,
    pub backspace_base: f64,
    pub backspace_slope: f64,
    pub mouse_moves: u32,
    pub speed_base: f64,
    pub speed_slope: f64,
    pub speed_surprise_spread: f64,
    pub pause_per_sadness_ms: f64,
    pub clicks: u32,
    pub click_hold_base_ms: f64,
    pub click_hold_anger_slope_ms: f64,
    pub taps: u32,
    pub tap_base_ms: f64,
    pub tap_disgust_slope_ms: f64,
    pub swipes: u32,
    pub swipe_speed_base: f64,
    pub swipe_speed_joy_slope: f64,
    pub touch_gap_base_ms: f64,
    pub touch_gap_anticipation_slope_ms: f64,
    /// Standard deviation of Gaussian noise on every duration.
    pub timing_jitter_ms: f64,
    /// Standard deviation of Gaussian noise on every speed.
    pub speed_jitter: f64,
}

impl Default for BehaviorKernel {
    fn default() -> Self {
        BehaviorKernel {
            keystrokes: 40,
            dwell_base_ms: 96.0,
            dwell_slope_ms: 16.0,
            dwell_fear_spread_ms: 8.0,
            flight_base_ms: 160.0,
            flight_slope_ms: -16.0,
            flight_acceptance_spread_ms: 10.0,
            backspace_base: 0.02,
            backspace_slope: 0.02,
            mouse_moves: 60,
            speed_base: 400.0,
            speed_slope: 80.0,
            speed_surprise_spread: 40.0,
            pause_per_sadness_ms: 600.0,
            clicks: 4,
            click_hold_base_ms: 100.0,
            click_hold_anger_slope_ms: 40.0,
            taps: 6,
            tap_base_ms: 80.0,
            tap_disgust_slope_ms: 30.0,
            swipes: 6,
            swipe_speed_base: 800.0,
            swipe_speed_joy_slope: 150.0,
            touch_gap_base_ms: 400.0,
            touch_gap_anticipation_slope_ms: -60.0,
            timing_jitter_ms: 4.0,
            speed_jitter: 20.0,
        }
    }
}

impl BehaviorKernel {
    /// Zero jitter, for exact checks.
    pub fn noiseless() -> Self {
        BehaviorKernel { timing_jitter_ms: 0.0, speed_jitter: 0.0, ..BehaviorKernel::default() }
    }

    fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: String| Err(SynthError::InvalidConfig(m));
        let reals = [
            ("dwell_base_ms", self.dwell_base_ms),
            ("dwell_slope_ms", self.dwell_slope_ms),
            ("dwell_fear_spread_ms", self.dwell_fear_spread_ms),
            ("flight_base_ms", self.flight_base_ms),
            ("flight_slope_ms", self.flight_slope_ms),
            ("flight_acceptance_spread_ms", self.flight_acceptance_spread_ms),
            ("backspace_base", self.backspace_base),
            ("backspace_slope", self.backspace_slope),
            ("speed_base", self.speed_base),
            ("speed_slope", self.speed_slope),
            ("speed_surprise_spread", self.speed_surprise_spread),
            ("pause_per_sadness_ms", self.pause_per_sadness_ms),
            ("click_hold_base_ms", self.click_hold_base_ms),
            ("click_hold_anger_slope_ms", self.click_hold_anger_slope_ms),
            ("tap_base_ms", self.tap_base_ms),
            ("tap_disgust_slope_ms", self.tap_disgust_slope_ms),
            ("swipe_speed_base", self.swipe_speed_base),
            ("swipe_speed_joy_slope", self.swipe_speed_joy_slope),
            ("touch_gap_base_ms", self.touch_gap_base_ms),
            ("touch_gap_anticipation_slope_ms", self.touch_gap_anticipation_slope_ms),
            ("timing_jitter_ms", self.timing_jitter_ms),
            ("speed_jitter", self.speed_jitter),
        ];
        if let Some((name, _)) = reals.iter().find(|(_, v)| !v.is_finite()) {
            return bad(format!("{name} must be finite"));
        }
        if self.timing_jitter_ms < 0.0 || self.speed_jitter < 0.0 {
            return bad("jitter must be non-negative".into());
        }
        if self.keystrokes < 2 || !self.keystrokes.is_multiple_of(2) {
            return bad("keystrokes must be even and at least 2".into());
        }
        if self.mouse_moves < 2 {
            return bad("mouse_moves must be at least 2".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub seed: u64,
    pub participants: u32,
    pub sessions_per_participant: u32,
    pub anchors: Vec<AnchorWeight>,
    /// Standard deviation, in levels, of the noise around the expected
    /// co-occurrence profile.
    pub noise_std: f64,
    /// Timestamp of each participant's first report, ms since the epoch.
    pub start_ms: u64,
    pub kernel: BehaviorKernel,
}

/// Uniform over every level of the given anchors.
pub fn uniform_anchors(anchors: &[BasicEmotion]) -> Vec<AnchorWeight> {
    anchors
        .iter()
        .flat_map(|a| LevelClass::ALL.iter().map(move |l| AnchorWeight { anchor: *a, level: *l, weight: 1.0 }))
        .collect()
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            seed: 42,
            participants: 10,
            sessions_per_participant: 50,
            anchors: uniform_anchors(&crate::cooccurrence::SUPPORTED_ANCHORS),
            noise_std: 0.25,
            start_ms: 1_700_000_000_000,
            kernel: BehaviorKernel::default(),
        }
    }
}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: &str| Err(SynthError::InvalidConfig(m.to_string()));
        if self.participants == 0 {
            return bad("participants must be positive");
        }
        if self.sessions_per_participant == 0 {
            return bad("sessions_per_participant must be positive");
        }
        if !(self.noise_std >= 0.0 && self.noise_std.is_finite()) {
            return bad("noise_std must be finite and non-negative");
        }
        if self.anchors.is_empty() {
            return bad("anchor distribution is empty");
        }
        if self.anchors.iter().any(|a| !(a.weight > 0.0 && a.weight.is_finite())) {
            return bad("anchor weights must be positive");
        }
        for a in &self.anchors {
            table_for(a.anchor)?;
        }
        self.kernel.validate()
    }

    /// Hex SHA-256 of the canonical JSON form.
    pub fn sha256(&self) -> String {
        hex::encode(Sha256::digest(serde_json::to_vec(self).expect("config serializes")))
    }
}

pub fn participant_id(participant: u32) -> String {
    format!("p{participant:03}")
}

fn participant_region(config: &GeneratorConfig, participant: u32) -> Region {
    let mut weights: Vec<f64> = RESIDENCE_PERCENT.iter().map(|(_, p)| *p).collect();
    weights.push(100.0 - weights.iter().sum::<f64>());
    let dist = WeightedIndex::new(&weights).expect("residence shares are positive");
    let i = dist.sample(&mut stream(config.seed, &[participant as u64, PURPOSE_REGION]));
    RESIDENCE_PERCENT.get(i).map_or(Region::Other, |(r, _)| *r)
}

/// Report time of a session.
pub fn report_ts(config: &GeneratorConfig, session: u32) -> u64 {
    config.start_ms + session as u64 * REPORT_INTERVAL_MS
}

/// Draws one self-report: an anchor and its level from the configured
/// distribution, the other basic emotions rounded from noisy expected levels,
/// and every non-basic emotion at 0.
pub fn sample_state(config: &GeneratorConfig, participant: u32, session: u32) -> Result<SelfReport, SynthError> {
    config.validate()?;
    let mut rng = stream(config.seed, &[participant as u64, session as u64, PURPOSE_STATE]);
    let weights: Vec<f64> = config.anchors.iter().map(|a| a.weight).collect();
    let pick = config.anchors[WeightedIndex::new(&weights).expect("weights validated").sample(&mut rng)];
    let profile = expected_profile(pick.anchor, Level::from(pick.level))?;

    let mut report = SelfReport::all_zero(
        report_ts(config, session),
        participant_id(participant),
        Some(participant_region(config, participant)),
    );
    report.levels.insert(pick.anchor.name(), pick.level);
    for b in BasicEmotion::ALL {
        if b == pick.anchor {
            continue;
        }
        let expected = profile[&b.name()].value();
        let noise = if config.noise_std > 0.0 {
            Normal::new(0.0, config.noise_std).expect("noise validated").sample(&mut rng)
        } else {
            0.0
        };
        let class = (expected + noise).round().clamp(0.0, 4.0) as i64;
        report.levels.insert(b.name(), LevelClass::new(class).expect("clamped"));
    }
    Ok(report)
}

/// Mean of the anger, fear, surprise and joy levels.
pub fn arousal(state: &SelfReport) -> f64 {
    let high = [EmotionName::Anger, EmotionName::Fear, EmotionName::Surprise, EmotionName::Joy];
    high.iter().map(|e| level_of(state, *e)).sum::<f64>() / high.len() as f64
}

fn level_of(state: &SelfReport, emotion: EmotionName) -> f64 {
    state.level(emotion).map_or(0.0, |c| c.value() as f64)
}

struct Jitter<'a, R: Rng> {
    rng: &'a mut R,
    timing: Option<Normal<f64>>,
    speed: Option<Normal<f64>>,
}

impl<R: Rng> Jitter<'_, R> {
    /// Duration in whole ms, at least 1.
    fn ms(&mut self, mean: f64) -> u64 {
        let noise = self.timing.map_or(0.0, |n| n.sample(self.rng));
        (mean + noise).round().max(1.0) as u64
    }

    fn speed(&mut self, mean: f64) -> f64 {
        let noise = self.speed.map_or(0.0, |n| n.sample(self.rng));
        (mean + noise).max(1.0)
    }
}

fn alternate(i: u32) -> f64 {
    if i.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Renders the interaction log of one session. Timestamps are strictly
/// increasing and start [`SESSION_DELAY_MS`] after the report.
pub fn render_session(state: &SelfReport, config: &GeneratorConfig, participant: u32, session: u32) -> Session {
    let k = &config.kernel;
    let mut rng = stream(config.seed, &[participant as u64, session as u64, PURPOSE_RENDER]);
    let timing = (k.timing_jitter_ms > 0.0).then(|| Normal::new(0.0, k.timing_jitter_ms).expect("finite"));
    let speed = (k.speed_jitter > 0.0).then(|| Normal::new(0.0, k.speed_jitter).expect("finite"));
    let mut letters = stream(config.seed, &[participant as u64, session as u64, PURPOSE_RENDER, 1]);
    let mut j = Jitter { rng: &mut rng, timing, speed };

    let ar = arousal(state);
    let lv = |e| level_of(state, e);
    let mut events = Vec::new();
    let mut t = state.ts + SESSION_DELAY_MS;

    let n = k.keystrokes;
    let rate = (k.backspace_base + k.backspace_slope * ar).clamp(0.0, 1.0);
    let backspaces = (n as f64 * rate).round() as u32;
    for i in 0..n {
        // Spreads corrections evenly through the typing.
        let is_backspace = (i + 1) * backspaces / n != i * backspaces / n;
        let key = if is_backspace { BACKSPACE } else { 65 + letters.gen_range(0..26) };
        let dwell = j.ms(k.dwell_base_ms + k.dwell_slope_ms * ar + alternate(i) * k.dwell_fear_spread_ms * lv(EmotionName::Fear));
        events.push(InteractionEvent::new(t, EventKind::KeyDown { key }));
        t += dwell;
        events.push(InteractionEvent::new(t, EventKind::KeyUp { key }));
        if i + 1 < n {
            t += j.ms(
                k.flight_base_ms
                    + k.flight_slope_ms * ar
                    + alternate(i) * k.flight_acceptance_spread_ms * lv(EmotionName::Acceptance),
            );
        }
    }

    t += PHASE_GAP_MS;
    let (mut x, y) = (100.0, 100.0);
    let pause = (k.pause_per_sadness_ms * lv(EmotionName::Sadness)).round() as u64;
    events.push(InteractionEvent::new(t, EventKind::MouseMove { x, y }));
    for m in 1..k.mouse_moves {
        t += MOUSE_STEP_MS;
        if m % PAUSE_EVERY == 0 {
            t += pause;
        }
        let v = j.speed(k.speed_base + k.speed_slope * ar + alternate(m) * k.speed_surprise_spread * lv(EmotionName::Surprise));
        x += v * MOUSE_STEP_MS as f64 / 1000.0;
        events.push(InteractionEvent::new(t, EventKind::MouseMove { x, y }));
    }
    for _ in 0..k.clicks {
        t += 100;
        events.push(InteractionEvent::new(t, EventKind::MouseDown { x, y, button: 0 }));
        t += j.ms(k.click_hold_base_ms + k.click_hold_anger_slope_ms * lv(EmotionName::Anger));
        events.push(InteractionEvent::new(t, EventKind::MouseUp { x, y, button: 0 }));
    }

    t += PHASE_GAP_MS;
    let gap = k.touch_gap_base_ms + k.touch_gap_anticipation_slope_ms * lv(EmotionName::Anticipation);
    let (tx, ty) = (200.0, 300.0);
    for _ in 0..k.taps {
        events.push(InteractionEvent::new(t, EventKind::TouchDown { x: tx, y: ty, pointer: 0 }));
        t += j.ms(k.tap_base_ms + k.tap_disgust_slope_ms * lv(EmotionName::Disgust));
        events.push(InteractionEvent::new(t, EventKind::TouchUp { x: tx, y: ty, pointer: 0 }));
        t += j.ms(gap);
    }
    for _ in 0..k.swipes {
        let v = j.speed(k.swipe_speed_base + k.swipe_speed_joy_slope * lv(EmotionName::Joy));
        let step = v * SWIPE_STEP_MS as f64 / 1000.0;
        events.push(InteractionEvent::new(t, EventKind::TouchDown { x: tx, y: ty, pointer: 0 }));
        for s in 1..SWIPE_STEPS {
            let p = tx + step * s as f64;
            events.push(InteractionEvent::new(t + s * SWIPE_STEP_MS, EventKind::TouchMove { x: p, y: ty, pointer: 0 }));
        }
        t += SWIPE_STEPS * SWIPE_STEP_MS;
        let end = tx + step * SWIPE_STEPS as f64;
        events.push(InteractionEvent::new(t, EventKind::TouchUp { x: end, y: ty, pointer: 0 }));
        t += j.ms(gap);
    }

    Session::new(state.participant.clone(), state.region, events)
}

/// Reports and sessions in participant-major order; the i-th session belongs
/// to the i-th report.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticDataset {
    pub reports: Vec<SelfReport>,
    pub sessions: Vec<SessionRecord>,
}

impl SyntheticDataset {
    pub fn reports_jsonl(&self) -> Vec<u8> {
        let mut out = Vec::new();
        for r in &self.reports {
            out.extend_from_slice(report_to_line(r).as_bytes());
            out.push(b'\n');
        }
        out
    }

    pub fn sessions_jsonl(&self) -> Vec<u8> {
        let mut out = Vec::new();
        for s in &self.sessions {
            write_session(&mut out, &s.session, s.ts).expect("writing to memory");
        }
        out
    }

    /// Hex SHA-256 over the reports file followed by the sessions file.
    pub fn sha256(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.reports_jsonl());
        h.update(self.sessions_jsonl());
        hex::encode(h.finalize())
    }
}

pub fn generate(config: &GeneratorConfig) -> Result<SyntheticDataset, SynthError> {
    config.validate()?;
    let per: Vec<Vec<(SelfReport, SessionRecord)>> = (0..config.participants)
        .into_par_iter()
        .map(|p| {
            (0..config.sessions_per_participant)
                .map(|s| {
                    let report = sample_state(config, p, s)?;
                    let session = render_session(&report, config, p, s);
                    let ts = Some(report.ts + SESSION_DELAY_MS);
                    Ok((report, SessionRecord { session, ts }))
                })
                .collect::<Result<Vec<_>, SynthError>>()
        })
        .collect::<Result<_, _>>()?;
    let (reports, sessions) = per.into_iter().flatten().unzip();
    Ok(SyntheticDataset { reports, sessions })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub config: GeneratorConfig,
    pub config_sha256: String,
    pub dataset_sha256: String,
    pub reports: usize,
    pub sessions: usize,
}

pub fn manifest(config: &GeneratorConfig, dataset: &SyntheticDataset) -> Manifest {
    Manifest {
        config: config.clone(),
        config_sha256: config.sha256(),
        dataset_sha256: dataset.sha256(),
        reports: dataset.reports.len(),
        sessions: dataset.sessions.len(),
    }
}
