//! Joining extracted sessions to self-reports, and train/test splits.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::classifier::LabeledSample;
use crate::emotion::SelfReport;
use crate::features::FeatureVector;
use crate::rng::stream;

/// Self-reports were prompted every four hours, so a session is labeled by
/// the latest report at most this long before it.
pub const JOIN_WINDOW_MS: u64 = 4 * 60 * 60 * 1000;

/// Features of one session with the identity needed to label it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionFeatures {
    pub pid: String,
    pub ts: u64,
    pub features: FeatureVector,
}

/// For each session, the index of the nearest report from the same
/// participant with `session.ts - window <= report.ts <= session.ts`.
pub fn match_reports(sessions: &[SessionFeatures], reports: &[SelfReport], window_ms: u64) -> Vec<Option<usize>> {
    let keys: Vec<(&str, u64)> = sessions.iter().map(|s| (s.pid.as_str(), s.ts)).collect();
    match_keys(&keys, reports, window_ms)
}

/// [`match_reports`] over bare `(participant, ts)` keys.
pub fn match_keys(keys: &[(&str, u64)], reports: &[SelfReport], window_ms: u64) -> Vec<Option<usize>> {
    let mut by_pid: HashMap<&str, Vec<(u64, usize)>> = HashMap::new();
    for (i, r) in reports.iter().enumerate() {
        by_pid.entry(r.participant.as_str()).or_default().push((r.ts, i));
    }
    // Equal timestamps keep the later report.
    by_pid.values_mut().for_each(|v| v.sort());
    keys.iter()
        .map(|(pid, at)| {
            let list = by_pid.get(pid)?;
            let upto = list.partition_point(|(ts, _)| *ts <= *at);
            let (ts, idx) = *list.get(upto.checked_sub(1)?)?;
            (at - ts <= window_ms).then_some(idx)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Labeled {
    /// In session order.
    pub samples: Vec<LabeledSample>,
    /// Report used for each sample.
    pub report_index: Vec<usize>,
    /// Sessions without an in-window report.
    pub dropped: usize,
}

pub fn label_sessions(sessions: &[SessionFeatures], reports: &[SelfReport], window_ms: u64) -> Labeled {
    let matches = match_reports(sessions, reports, window_ms);
    let mut samples = Vec::new();
    let mut report_index = Vec::new();
    let mut dropped = 0;
    for (s, m) in sessions.iter().zip(matches) {
        match m {
            Some(i) => {
                samples.push(LabeledSample { features: s.features.clone(), labels: reports[i].levels.clone() });
                report_index.push(i);
            }
            None => dropped += 1,
        }
    }
    log::debug!("labeled {} sessions, dropped {dropped}", samples.len());
    Labeled { samples, report_index, dropped }
}

/// Seeded shuffle of `0..n` cut into (train, test). Each side keeps
/// ascending order.
pub fn train_test_split(n: usize, test_fraction: f64, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut stream(seed, &[0x5711]));
    let n_test = ((n as f64) * test_fraction.clamp(0.0, 1.0)).round() as usize;
    let mut test = idx[..n_test].to_vec();
    let mut train = idx[n_test..].to_vec();
    train.sort_unstable();
    test.sort_unstable();
    (train, test)
}
