//! JSON Lines readers and writers.
//!
//! * Reports: one object per line with `ts`, `pid`, `region`, `levels`.
//! * Sessions: a header line `{"pid": .., "region": .., "ts": ..}` followed
//!   by event lines such as `{"ts":0,"kind":"key_down","key":65}`. A file may
//!   hold several sessions; every header starts a new one.
//! * Features: `{"pid", "ts", "features"}` per session.
//! * Predictions: `{"pid", "ts", "state"}` per session.
//!
//! Blank lines are skipped. Line numbers in errors are 1-based.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

use crate::classifier::{EmotionEstimate, EmotionState};
use crate::dataset::SessionFeatures;
use crate::emotion::{parse_reportable, EmotionName, LevelClass, Region, SelfReport};
use crate::features::{InteractionEvent, Session};

#[derive(Debug, Error)]
pub enum IoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
}

impl IoError {
    fn at(line: usize, message: impl ToString) -> IoError {
        IoError::Format { line, message: message.to_string() }
    }
}

/// Unknown-field policy for readers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Strictness {
    #[default]
    Strict,
    Lenient,
}

fn lines<R: BufRead>(reader: R) -> impl Iterator<Item = Result<(usize, String), IoError>> {
    reader
        .lines()
        .enumerate()
        .map(|(i, l)| l.map(|l| (i + 1, l)).map_err(IoError::from))
        .filter(|r| r.as_ref().map_or(true, |(_, l)| !l.trim().is_empty()))
}

fn object(line: usize, text: &str) -> Result<Map<String, Value>, IoError> {
    match serde_json::from_str::<Value>(text).map_err(|e| IoError::at(line, e))? {
        Value::Object(map) => Ok(map),
        _ => Err(IoError::at(line, "expected a JSON object")),
    }
}

fn check_fields(
    line: usize,
    map: &mut Map<String, Value>,
    allowed: &[&str],
    strictness: Strictness,
) -> Result<(), IoError> {
    let unknown: Vec<String> = map.keys().filter(|k| !allowed.contains(&k.as_str())).cloned().collect();
    if unknown.is_empty() {
        return Ok(());
    }
    match strictness {
        Strictness::Strict => Err(IoError::at(line, format!("unknown field(s): {}", unknown.join(", ")))),
        Strictness::Lenient => {
            log::warn!("line {line}: ignoring unknown field(s): {}", unknown.join(", "));
            unknown.iter().for_each(|k| {
                map.remove(k);
            });
            Ok(())
        }
    }
}

#[derive(Serialize, Deserialize)]
struct ReportLine {
    ts: u64,
    pid: String,
    region: Option<Region>,
    levels: BTreeMap<String, i64>,
}

const REPORT_FIELDS: [&str; 4] = ["ts", "pid", "region", "levels"];

fn report_from_map(line: usize, map: Map<String, Value>) -> Result<SelfReport, IoError> {
    let raw: ReportLine = serde_json::from_value(Value::Object(map)).map_err(|e| IoError::at(line, e))?;
    let mut levels = BTreeMap::new();
    for (name, value) in raw.levels {
        let emotion = parse_reportable(&name).map_err(|e| IoError::at(line, e))?;
        let class = LevelClass::new(value).map_err(|e| IoError::at(line, format!("{name}: {e}")))?;
        levels.insert(emotion, class);
    }
    SelfReport::new(raw.ts, raw.pid, raw.region, levels).map_err(|e| IoError::at(line, e))
}

pub fn parse_report(line: usize, text: &str, strictness: Strictness) -> Result<SelfReport, IoError> {
    let mut map = object(line, text)?;
    check_fields(line, &mut map, &REPORT_FIELDS, strictness)?;
    report_from_map(line, map)
}

pub fn read_reports<R: BufRead>(reader: R, strictness: Strictness) -> Result<Vec<SelfReport>, IoError> {
    lines(reader).map(|r| r.and_then(|(n, l)| parse_report(n, &l, strictness))).collect()
}

pub fn report_to_line(report: &SelfReport) -> String {
    let raw = ReportLine {
        ts: report.ts,
        pid: report.participant.clone(),
        region: report.region,
        levels: report.levels.iter().map(|(e, c)| (e.as_str().to_string(), c.value() as i64)).collect(),
    };
    serde_json::to_string(&raw).expect("report serializes")
}

pub fn write_reports<W: Write>(mut writer: W, reports: &[SelfReport]) -> Result<(), IoError> {
    for r in reports {
        writeln!(writer, "{}", report_to_line(r))?;
    }
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct SessionHeader {
    pid: String,
    #[serde(default)]
    region: Option<Region>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    ts: Option<u64>,
}

const HEADER_FIELDS: [&str; 3] = ["pid", "region", "ts"];
const EVENT_FIELDS: [&str; 7] = ["ts", "kind", "key", "x", "y", "button", "pointer"];

/// A session together with the start time given in its header, if any.
#[derive(Debug, Clone, PartialEq)]
pub struct SessionRecord {
    pub session: Session,
    pub ts: Option<u64>,
}

impl SessionRecord {
    /// Header time, else first event time.
    pub fn start_ts(&self) -> Option<u64> {
        self.ts.or_else(|| self.session.start_ts())
    }
}

pub fn read_sessions<R: BufRead>(reader: R, strictness: Strictness) -> Result<Vec<SessionRecord>, IoError> {
    let mut out: Vec<SessionRecord> = Vec::new();
    for item in lines(reader) {
        let (n, text) = item?;
        let mut map = object(n, &text)?;
        if map.contains_key("kind") {
            let current = out.last_mut().ok_or_else(|| IoError::at(n, "event before any session header"))?;
            check_fields(n, &mut map, &EVENT_FIELDS, strictness)?;
            let event: InteractionEvent = serde_json::from_value(Value::Object(map)).map_err(|e| IoError::at(n, e))?;
            current.session.events.push(event);
        } else {
            check_fields(n, &mut map, &HEADER_FIELDS, strictness)?;
            let header: SessionHeader = serde_json::from_value(Value::Object(map)).map_err(|e| IoError::at(n, e))?;
            out.push(SessionRecord { session: Session::new(header.pid, header.region, Vec::new()), ts: header.ts });
        }
    }
    Ok(out)
}

pub fn write_session<W: Write>(mut writer: W, session: &Session, ts: Option<u64>) -> Result<(), IoError> {
    let header = SessionHeader { pid: session.participant.clone(), region: session.region, ts };
    writeln!(writer, "{}", serde_json::to_string(&header).expect("header serializes"))?;
    for e in &session.events {
        writeln!(writer, "{}", serde_json::to_string(e).expect("event serializes"))?;
    }
    Ok(())
}

pub fn write_sessions<W: Write>(mut writer: W, sessions: &[SessionRecord]) -> Result<(), IoError> {
    for s in sessions {
        write_session(&mut writer, &s.session, s.ts)?;
    }
    Ok(())
}

pub fn read_features<R: BufRead>(reader: R) -> Result<Vec<SessionFeatures>, IoError> {
    lines(reader)
        .map(|r| r.and_then(|(n, l)| serde_json::from_str(&l).map_err(|e| IoError::at(n, e))))
        .collect()
}

pub fn write_features<W: Write>(mut writer: W, features: &[SessionFeatures]) -> Result<(), IoError> {
    for f in features {
        writeln!(writer, "{}", serde_json::to_string(f).expect("features serialize"))?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub pid: String,
    pub ts: u64,
    pub state: EmotionState,
}

const PREDICTION_FIELDS: [&str; 3] = ["pid", "ts", "state"];

/// Reads prediction lines. Self-report lines are accepted too and become
/// crisp predictions over all 27 emotions.
pub fn read_predictions<R: BufRead>(reader: R, strictness: Strictness) -> Result<Vec<Prediction>, IoError> {
    let mut out = Vec::new();
    for item in lines(reader) {
        let (n, text) = item?;
        let mut map = object(n, &text)?;
        if map.contains_key("levels") {
            check_fields(n, &mut map, &REPORT_FIELDS, strictness)?;
            let r = report_from_map(n, map)?;
            out.push(crisp_prediction(&r));
        } else {
            check_fields(n, &mut map, &PREDICTION_FIELDS, strictness)?;
            out.push(serde_json::from_value(Value::Object(map)).map_err(|e| IoError::at(n, e))?);
        }
    }
    Ok(out)
}

pub fn crisp_prediction(report: &SelfReport) -> Prediction {
    let emotions: BTreeMap<EmotionName, EmotionEstimate> =
        report.levels.iter().map(|(e, c)| (*e, EmotionEstimate::crisp(*c))).collect();
    Prediction { pid: report.participant.clone(), ts: report.ts, state: EmotionState { emotions } }
}

pub fn write_predictions<W: Write>(mut writer: W, predictions: &[Prediction]) -> Result<(), IoError> {
    for p in predictions {
        writeln!(writer, "{}", serde_json::to_string(p).expect("prediction serializes"))?;
    }
    Ok(())
}
