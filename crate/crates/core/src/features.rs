//! Keyboard, mouse and touch feature extraction.
//!
//! A [`Session`] is an ordered log of [`InteractionEvent`]s. [`extract`]
//! summarizes it into a fixed 17-value [`FeatureVector`]: fourteen timing and
//! motion statistics plus one presence flag per modality. Statistics of an
//! absent modality are zero.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::de;
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::emotion::Region;

pub const SCHEMA_VERSION: u32 = 1;

/// Key code treated as a correction keystroke.
pub const BACKSPACE: u32 = 8;

/// Gaps between pointer events at or above this count as idle time.
pub const IDLE_GAP_MS: u64 = 500;

pub const FEATURE_NAMES: [&str; FEATURE_COUNT] = [
    "dwell_mean_ms",
    "dwell_std_ms",
    "flight_mean_ms",
    "flight_std_ms",
    "digraph_latency_mean_ms",
    "typing_rate_keys_per_s",
    "backspace_ratio",
    "mouse_speed_mean_px_per_s",
    "mouse_speed_std",
    "mouse_idle_ratio",
    "click_hold_mean_ms",
    "touch_tap_duration_mean_ms",
    "touch_swipe_speed_mean_px_per_s",
    "touch_event_rate_per_s",
    "kb_present",
    "mouse_present",
    "touch_present",
];

pub const FEATURE_COUNT: usize = 17;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EventKind {
    KeyDown { key: u32 },
    KeyUp { key: u32 },
    MouseMove { x: f64, y: f64 },
    MouseDown { x: f64, y: f64, #[serde(default)] button: u8 },
    MouseUp { x: f64, y: f64, #[serde(default)] button: u8 },
    TouchDown { x: f64, y: f64, #[serde(default)] pointer: u32 },
    TouchMove { x: f64, y: f64, #[serde(default)] pointer: u32 },
    TouchUp { x: f64, y: f64, #[serde(default)] pointer: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InteractionEvent {
    pub ts: u64,
    #[serde(flatten)]
    pub kind: EventKind,
}

impl InteractionEvent {
    pub fn new(ts: u64, kind: EventKind) -> Self {
        InteractionEvent { ts, kind }
    }

    fn is_key(&self) -> bool {
        matches!(self.kind, EventKind::KeyDown { .. } | EventKind::KeyUp { .. })
    }

    fn is_mouse(&self) -> bool {
        matches!(self.kind, EventKind::MouseMove { .. } | EventKind::MouseDown { .. } | EventKind::MouseUp { .. })
    }

    fn is_touch(&self) -> bool {
        matches!(self.kind, EventKind::TouchDown { .. } | EventKind::TouchMove { .. } | EventKind::TouchUp { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Session {
    pub participant: String,
    pub region: Option<Region>,
    pub events: Vec<InteractionEvent>,
}

impl Session {
    pub fn new(participant: impl Into<String>, region: Option<Region>, events: Vec<InteractionEvent>) -> Self {
        Session { participant: participant.into(), region, events }
    }

    /// Timestamp of the first event, used to join the session to a self-report.
    pub fn start_ts(&self) -> Option<u64> {
        self.events.first().map(|e| e.ts)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ValidationMode {
    #[default]
    Strict,
    Lenient,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExtractError {
    #[error("event {index} at {ts} ms precedes the previous event at {previous} ms")]
    Unsorted { index: usize, ts: u64, previous: u64 },
    #[error("key_up for key {key} at {ts} ms has no matching key_down")]
    OrphanKeyUp { key: u32, ts: u64 },
    #[error("key_down for key {key} at {ts} ms has no matching key_up")]
    UnmatchedKeyDown { key: u32, ts: u64 },
    #[error("feature schema mismatch: expected version {expected}, found {found}")]
    SchemaMismatch { expected: u32, found: u32 },
    #[error("feature `{0}` is not finite")]
    NonFinite(&'static str),
}

/// Extracted features in schema order.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub schema_version: u32,
    pub values: [f64; FEATURE_COUNT],
}

impl FeatureVector {
    pub fn new(values: [f64; FEATURE_COUNT]) -> Self {
        FeatureVector { schema_version: SCHEMA_VERSION, values }
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        FEATURE_NAMES.iter().position(|n| *n == name).map(|i| self.values[i])
    }

    pub fn named(&self) -> impl Iterator<Item = (&'static str, f64)> + '_ {
        FEATURE_NAMES.iter().copied().zip(self.values.iter().copied())
    }
}

impl Serialize for FeatureVector {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(2))?;
        map.serialize_entry("schema_version", &self.schema_version)?;
        map.serialize_entry("values", &NamedValues(&self.values))?;
        map.end()
    }
}

struct NamedValues<'a>(&'a [f64; FEATURE_COUNT]);

impl Serialize for NamedValues<'_> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(FEATURE_COUNT))?;
        for (name, v) in FEATURE_NAMES.iter().zip(self.0) {
            map.serialize_entry(name, v)?;
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for FeatureVector {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Raw {
            schema_version: u32,
            values: HashMap<String, f64>,
        }
        let raw = Raw::deserialize(deserializer)?;
        if raw.schema_version != SCHEMA_VERSION {
            return Err(de::Error::custom(ExtractError::SchemaMismatch {
                expected: SCHEMA_VERSION,
                found: raw.schema_version,
            }));
        }
        let mut values = [0.0; FEATURE_COUNT];
        for (i, name) in FEATURE_NAMES.iter().enumerate() {
            values[i] = *raw
                .values
                .get(*name)
                .ok_or_else(|| de::Error::custom(format!("missing feature `{name}`")))?;
        }
        if let Some(extra) = raw.values.keys().find(|k| !FEATURE_NAMES.contains(&k.as_str())) {
            return Err(de::Error::custom(format!("unknown feature `{extra}`")));
        }
        Ok(FeatureVector { schema_version: raw.schema_version, values })
    }
}

/// Result of a lenient extraction: the features and how many events were
/// dropped to make the log consistent.
#[derive(Debug, Clone, PartialEq)]
pub struct Extraction {
    pub features: FeatureVector,
    pub skipped: usize,
}

pub fn extract(session: &Session) -> Result<FeatureVector, ExtractError> {
    extract_with(session, ValidationMode::Strict).map(|x| x.features)
}

pub fn extract_with(session: &Session, mode: ValidationMode) -> Result<Extraction, ExtractError> {
    let mut skipped = 0;
    let mut events: Vec<&InteractionEvent> = Vec::with_capacity(session.events.len());
    for (index, event) in session.events.iter().enumerate() {
        if let Some(prev) = events.last() {
            if event.ts < prev.ts {
                match mode {
                    ValidationMode::Strict => {
                        return Err(ExtractError::Unsorted { index, ts: event.ts, previous: prev.ts })
                    }
                    ValidationMode::Lenient => {
                        skipped += 1;
                        continue;
                    }
                }
            }
        }
        events.push(event);
    }

    let mut values = [0.0; FEATURE_COUNT];
    let keys = keyboard_features(&events, mode, &mut skipped)?;
    values[..7].copy_from_slice(&keys.values);
    let mouse = mouse_features(&events, &mut skipped);
    values[7..11].copy_from_slice(&mouse.values);
    let touch = touch_features(&events, &mut skipped);
    values[11..14].copy_from_slice(&touch.values);
    values[14] = flag(keys.present);
    values[15] = flag(mouse.present);
    values[16] = flag(touch.present);

    for (name, v) in FEATURE_NAMES.iter().zip(&values) {
        if !v.is_finite() {
            return Err(ExtractError::NonFinite(name));
        }
    }
    Ok(Extraction { features: FeatureVector::new(values), skipped })
}

/// Extracts every session, keeping per-session errors in place.
pub fn extract_batch(sessions: &[Session], mode: ValidationMode) -> Vec<Result<FeatureVector, ExtractError>> {
    sessions
        .par_iter()
        .map(|s| extract_with(s, mode).map(|x| x.features))
        .collect()
}

fn flag(present: bool) -> f64 {
    if present {
        1.0
    } else {
        0.0
    }
}

/// Population mean and standard deviation; (0, 0) for no samples.
fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

fn mean(xs: &[f64]) -> f64 {
    mean_std(xs).0
}

struct Block<const N: usize> {
    values: [f64; N],
    present: bool,
}

fn keyboard_features(
    events: &[&InteractionEvent],
    mode: ValidationMode,
    skipped: &mut usize,
) -> Result<Block<7>, ExtractError> {
    let key_events: Vec<&InteractionEvent> = events.iter().copied().filter(|e| e.is_key()).collect();
    if key_events.is_empty() {
        return Ok(Block { values: [0.0; 7], present: false });
    }

    // (down_ts, up_ts, key) in key_down order.
    let mut strokes: Vec<(u64, Option<u64>, u32)> = Vec::new();
    let mut pending: HashMap<u32, usize> = HashMap::new();
    for e in &key_events {
        match e.kind {
            EventKind::KeyDown { key } => {
                if let Some(&idx) = pending.get(&key) {
                    // Auto-repeat: a second press before release.
                    match mode {
                        ValidationMode::Strict => {
                            return Err(ExtractError::UnmatchedKeyDown { key, ts: strokes[idx].0 })
                        }
                        ValidationMode::Lenient => {
                            *skipped += 1;
                            continue;
                        }
                    }
                }
                pending.insert(key, strokes.len());
                strokes.push((e.ts, None, key));
            }
            EventKind::KeyUp { key } => match pending.remove(&key) {
                Some(idx) => strokes[idx].1 = Some(e.ts),
                None => match mode {
                    ValidationMode::Strict => return Err(ExtractError::OrphanKeyUp { key, ts: e.ts }),
                    ValidationMode::Lenient => *skipped += 1,
                },
            },
            _ => {}
        }
    }
    if let Some((down, _, key)) = strokes.iter().find(|s| s.1.is_none()) {
        if mode == ValidationMode::Strict {
            return Err(ExtractError::UnmatchedKeyDown { key: *key, ts: *down });
        }
    }
    let before = strokes.len();
    let strokes: Vec<(u64, u64, u32)> =
        strokes.into_iter().filter_map(|(d, u, k)| u.map(|u| (d, u, k))).collect();
    *skipped += before - strokes.len();
    if strokes.is_empty() {
        return Ok(Block { values: [0.0; 7], present: true });
    }

    let dwell: Vec<f64> = strokes.iter().map(|(d, u, _)| (u - d) as f64).collect();
    let flight: Vec<f64> = strokes
        .windows(2)
        .map(|w| w[1].0 as f64 - w[0].1 as f64)
        .map(|f| f.max(0.0))
        .collect();
    let digraph: Vec<f64> = strokes.windows(2).map(|w| (w[1].0 - w[0].0) as f64).collect();

    let first = key_events.first().map(|e| e.ts).unwrap_or(0);
    let last = key_events.last().map(|e| e.ts).unwrap_or(0);
    let span_s = (last - first) as f64 / 1000.0;
    let typing_rate = if span_s > 0.0 { strokes.len() as f64 / span_s } else { 0.0 };
    let backspaces = strokes.iter().filter(|s| s.2 == BACKSPACE).count();

    let (dwell_mean, dwell_std) = mean_std(&dwell);
    let (flight_mean, flight_std) = mean_std(&flight);
    Ok(Block {
        values: [
            dwell_mean,
            dwell_std,
            flight_mean,
            flight_std,
            mean(&digraph),
            typing_rate,
            backspaces as f64 / strokes.len() as f64,
        ],
        present: true,
    })
}

fn mouse_features(events: &[&InteractionEvent], skipped: &mut usize) -> Block<4> {
    let mouse: Vec<&InteractionEvent> = events.iter().copied().filter(|e| e.is_mouse()).collect();
    if mouse.is_empty() {
        return Block { values: [0.0; 4], present: false };
    }

    let moves: Vec<(u64, f64, f64)> = mouse
        .iter()
        .filter_map(|e| match e.kind {
            EventKind::MouseMove { x, y } => Some((e.ts, x, y)),
            _ => None,
        })
        .collect();
    let speeds: Vec<f64> = moves
        .windows(2)
        .filter_map(|w| {
            let dt = w[1].0 - w[0].0;
            if dt == 0 || dt >= IDLE_GAP_MS {
                return None;
            }
            let dist = ((w[1].1 - w[0].1).powi(2) + (w[1].2 - w[0].2).powi(2)).sqrt();
            Some(dist / (dt as f64 / 1000.0))
        })
        .collect();
    let (speed_mean, speed_std) = mean_std(&speeds);

    let span = mouse.last().unwrap().ts - mouse.first().unwrap().ts;
    let idle: u64 = mouse
        .windows(2)
        .map(|w| w[1].ts - w[0].ts)
        .filter(|gap| *gap >= IDLE_GAP_MS)
        .sum();
    let idle_ratio = if span > 0 { idle as f64 / span as f64 } else { 0.0 };

    let mut pressed: HashMap<u8, u64> = HashMap::new();
    let mut holds = Vec::new();
    for e in &mouse {
        match e.kind {
            EventKind::MouseDown { button, .. } => {
                if pressed.insert(button, e.ts).is_some() {
                    *skipped += 1;
                }
            }
            EventKind::MouseUp { button, .. } => match pressed.remove(&button) {
                Some(down) => holds.push((e.ts - down) as f64),
                None => *skipped += 1,
            },
            _ => {}
        }
    }
    *skipped += pressed.len();

    Block { values: [speed_mean, speed_std, idle_ratio, mean(&holds)], present: true }
}

fn touch_features(events: &[&InteractionEvent], skipped: &mut usize) -> Block<3> {
    let touch: Vec<&InteractionEvent> = events.iter().copied().filter(|e| e.is_touch()).collect();
    if touch.is_empty() {
        return Block { values: [0.0; 3], present: false };
    }

    struct Gesture {
        start: u64,
        last: (f64, f64),
        path: f64,
    }
    let mut open: HashMap<u32, Gesture> = HashMap::new();
    let mut taps = Vec::new();
    let mut swipes = Vec::new();
    for e in &touch {
        match e.kind {
            EventKind::TouchDown { x, y, pointer } => {
                if open.insert(pointer, Gesture { start: e.ts, last: (x, y), path: 0.0 }).is_some() {
                    *skipped += 1;
                }
            }
            EventKind::TouchMove { x, y, pointer } => match open.get_mut(&pointer) {
                Some(g) => {
                    g.path += ((x - g.last.0).powi(2) + (y - g.last.1).powi(2)).sqrt();
                    g.last = (x, y);
                }
                None => *skipped += 1,
            },
            EventKind::TouchUp { x, y, pointer } => match open.remove(&pointer) {
                Some(mut g) => {
                    g.path += ((x - g.last.0).powi(2) + (y - g.last.1).powi(2)).sqrt();
                    let duration = (e.ts - g.start) as f64;
                    if g.path == 0.0 {
                        taps.push(duration);
                    } else if duration > 0.0 {
                        swipes.push(g.path / (duration / 1000.0));
                    }
                }
                None => *skipped += 1,
            },
            _ => {}
        }
    }
    *skipped += open.len();

    let span_s = (touch.last().unwrap().ts - touch.first().unwrap().ts) as f64 / 1000.0;
    let rate = if span_s > 0.0 { touch.len() as f64 / span_s } else { 0.0 };
    Block { values: [mean(&taps), mean(&swipes), rate], present: true }
}
