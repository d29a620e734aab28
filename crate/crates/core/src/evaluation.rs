//! Name-set accuracy, level false-positive rate and confusion matrices.
//!
//! An emotion is present in a self-report when its class is at least 1, and
//! detected in a prediction when its defuzzified level reaches the detection
//! threshold.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classifier::EmotionState;
use crate::emotion::{EmotionName, SelfReport, LEVEL_CLASSES, MAX_LEVEL};

pub const DEFAULT_THRESHOLD: f64 = 0.5;

pub const FPR_DEFINITION: &str = "micro-averaged one-vs-rest over level classes: every (instance, emotion) \
contributes 4 negative classes; a false positive is a predicted class (membership argmax) that differs from \
the reported class; FPR = false positives / negatives";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("{predicted} predictions but {truth} truth reports")]
    LengthMismatch { predicted: usize, truth: usize },
    #[error("nothing to evaluate")]
    Empty,
    #[error("instance {index}: emotion set differs from the first prediction")]
    InconsistentSubset { index: usize },
    #[error("instance {index}: `{emotion}` is missing")]
    MissingEmotion { index: usize, emotion: EmotionName },
    #[error("`neutral` cannot be a predicted emotion")]
    NeutralPredicted,
    #[error("detection threshold {0} outside [0, 4]")]
    InvalidThreshold(f64),
}

/// Emotions whose defuzzified level reaches `threshold`.
pub fn detected(state: &EmotionState, threshold: f64) -> BTreeSet<EmotionName> {
    state.emotions.iter().filter(|(_, est)| est.level.value() >= threshold).map(|(e, _)| *e).collect()
}

/// Emotions from `emotions` reported at class 1 or above.
pub fn present(report: &SelfReport, emotions: &[EmotionName]) -> BTreeSet<EmotionName> {
    emotions.iter().copied().filter(|e| report.level(*e).is_some_and(|c| c.value() >= 1)).collect()
}

fn check_threshold(threshold: f64) -> Result<(), EvalError> {
    if (0.0..=MAX_LEVEL).contains(&threshold) {
        Ok(())
    } else {
        Err(EvalError::InvalidThreshold(threshold))
    }
}

/// The emotion subset shared by every prediction, checked against the truth.
pub fn shared_subset(predicted: &[EmotionState], truth: &[SelfReport]) -> Result<Vec<EmotionName>, EvalError> {
    if predicted.len() != truth.len() {
        return Err(EvalError::LengthMismatch { predicted: predicted.len(), truth: truth.len() });
    }
    let first = predicted.first().ok_or(EvalError::Empty)?;
    let emotions: Vec<EmotionName> = first.emotions.keys().copied().collect();
    if emotions.is_empty() {
        return Err(EvalError::Empty);
    }
    if emotions.contains(&EmotionName::Neutral) {
        return Err(EvalError::NeutralPredicted);
    }
    for (index, (p, t)) in predicted.iter().zip(truth).enumerate() {
        if !p.emotions.keys().copied().eq(emotions.iter().copied()) {
            return Err(EvalError::InconsistentSubset { index });
        }
        if let Some(emotion) = emotions.iter().copied().find(|e| t.level(*e).is_none()) {
            return Err(EvalError::MissingEmotion { index, emotion });
        }
    }
    Ok(emotions)
}

fn count_set_matches(detections: &[BTreeSet<EmotionName>], truth: &[SelfReport], emotions: &[EmotionName]) -> usize {
    detections.iter().zip(truth).filter(|(d, t)| **d == present(t, emotions)).count()
}

/// Fraction of instances whose detected name set equals the reported set.
pub fn aspect1_accuracy(predicted: &[EmotionState], truth: &[SelfReport], threshold: f64) -> Result<f64, EvalError> {
    check_threshold(threshold)?;
    let emotions = shared_subset(predicted, truth)?;
    let detections: Vec<_> = predicted.iter().map(|p| detected(p, threshold)).collect();
    Ok(count_set_matches(&detections, truth, &emotions) as f64 / truth.len() as f64)
}

/// Name-set accuracy of plain detections, as produced by a present/absent
/// baseline. Detections outside `emotions` are ignored.
pub fn set_accuracy(
    detections: &[BTreeSet<EmotionName>],
    truth: &[SelfReport],
    emotions: &[EmotionName],
) -> Result<f64, EvalError> {
    if detections.len() != truth.len() {
        return Err(EvalError::LengthMismatch { predicted: detections.len(), truth: truth.len() });
    }
    if truth.is_empty() || emotions.is_empty() {
        return Err(EvalError::Empty);
    }
    let wanted: BTreeSet<EmotionName> = emotions.iter().copied().collect();
    let restricted: Vec<BTreeSet<EmotionName>> =
        detections.iter().map(|d| d.intersection(&wanted).copied().collect()).collect();
    Ok(count_set_matches(&restricted, truth, emotions) as f64 / truth.len() as f64)
}

fn level_errors(predicted: &[EmotionState], truth: &[SelfReport], emotion: EmotionName) -> usize {
    predicted
        .iter()
        .zip(truth)
        .filter(|(p, t)| p.emotions[&emotion].class != t.level(emotion).expect("subset checked"))
        .count()
}

/// Micro-averaged one-vs-rest false-positive rate over level classes.
pub fn aspect2_level_fpr(predicted: &[EmotionState], truth: &[SelfReport]) -> Result<f64, EvalError> {
    let emotions = shared_subset(predicted, truth)?;
    let fp: usize = emotions.iter().map(|e| level_errors(predicted, truth, *e)).sum();
    let negatives = (LEVEL_CLASSES - 1) * truth.len() * emotions.len();
    Ok(fp as f64 / negatives as f64)
}

/// Rows are reported dominant emotions, columns detected ones.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub labels: Vec<EmotionName>,
    /// `None` for every cell of a row without support.
    pub cells: Vec<Vec<Option<f64>>>,
    pub support: Vec<usize>,
}

impl ConfusionMatrix {
    pub fn cell(&self, row: EmotionName, column: EmotionName) -> Option<f64> {
        let r = self.labels.iter().position(|l| *l == row)?;
        let c = self.labels.iter().position(|l| *l == column)?;
        self.cells[r][c]
    }

    /// Comma-separated matrix; absent cells are written as `-`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("selected\\detected");
        for l in &self.labels {
            let _ = write!(out, ",{l}");
        }
        out.push_str(",support\n");
        for (r, label) in self.labels.iter().enumerate() {
            out.push_str(label.as_str());
            for cell in &self.cells[r] {
                match cell {
                    Some(v) => {
                        let _ = write!(out, ",{v:.2}");
                    }
                    None => out.push_str(",-"),
                }
            }
            let _ = writeln!(out, ",{}", self.support[r]);
        }
        out
    }
}

/// Reported dominant emotion: highest class, `neutral` if none is present.
/// Ties go to the emotion listed first.
fn true_dominant(report: &SelfReport, emotions: &[EmotionName]) -> EmotionName {
    let mut best = (EmotionName::Neutral, 0u8);
    for e in emotions {
        let c = report.level(*e).map(|c| c.value()).unwrap_or(0);
        if c >= 1 && c > best.1 {
            best = (*e, c);
        }
    }
    best.0
}

/// Detected dominant emotion: highest level at or above the threshold,
/// `neutral` if none qualifies. Ties go to the emotion listed first.
fn predicted_dominant(state: &EmotionState, emotions: &[EmotionName], threshold: f64) -> EmotionName {
    let mut best: Option<(EmotionName, f64)> = None;
    for e in emotions {
        let Some(est) = state.emotions.get(e) else { continue };
        let level = est.level.value();
        if level >= threshold && best.is_none_or(|(_, b)| level > b) {
            best = Some((*e, level));
        }
    }
    best.map_or(EmotionName::Neutral, |(e, _)| e)
}

/// Confusion matrix over `emotions`; `neutral` is appended when absent.
pub fn confusion_matrix(
    predicted: &[EmotionState],
    truth: &[SelfReport],
    emotions: &[EmotionName],
    threshold: f64,
) -> Result<ConfusionMatrix, EvalError> {
    check_threshold(threshold)?;
    let subset = shared_subset(predicted, truth)?;
    let mut labels: Vec<EmotionName> = Vec::new();
    for e in emotions {
        if !labels.contains(e) {
            labels.push(*e);
        }
    }
    if !labels.contains(&EmotionName::Neutral) {
        labels.push(EmotionName::Neutral);
    }
    let scored: Vec<EmotionName> = labels.iter().copied().filter(|e| *e != EmotionName::Neutral).collect();
    if let Some(emotion) = scored.iter().copied().find(|e| !subset.contains(e)) {
        return Err(EvalError::MissingEmotion { index: 0, emotion });
    }

    let k = labels.len();
    let index = |e: EmotionName| labels.iter().position(|l| *l == e).expect("dominant is a label");
    let mut counts = vec![vec![0usize; k]; k];
    let mut support = vec![0usize; k];
    for (p, t) in predicted.iter().zip(truth) {
        let r = index(true_dominant(t, &scored));
        let c = index(predicted_dominant(p, &scored, threshold));
        counts[r][c] += 1;
        support[r] += 1;
    }
    let cells = counts
        .iter()
        .zip(&support)
        .map(|(row, n)| row.iter().map(|c| (*n > 0).then(|| *c as f64 / *n as f64)).collect())
        .collect();
    Ok(ConfusionMatrix { labels, cells, support })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmotionBreakdown {
    pub emotion: EmotionName,
    /// Fraction of instances where detection agrees with presence.
    pub presence_accuracy: f64,
    /// Fraction of instances whose predicted class equals the reported one.
    pub level_accuracy: f64,
    pub false_positives: usize,
    pub negatives: usize,
    pub fpr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub instances: usize,
    pub threshold: f64,
    pub emotions: Vec<EmotionName>,
    pub aspect1_accuracy: f64,
    pub aspect1_correct: usize,
    pub aspect2_fpr: f64,
    pub aspect2_false_positives: usize,
    pub aspect2_negatives: usize,
    pub fpr_definition: String,
    pub per_emotion: Vec<EmotionBreakdown>,
    pub confusion: ConfusionMatrix,
}

/// Runs both aspects and the confusion matrix. `confusion_emotions` defaults
/// to the predicted subset.
pub fn evaluate(
    predicted: &[EmotionState],
    truth: &[SelfReport],
    threshold: f64,
    confusion_emotions: Option<&[EmotionName]>,
) -> Result<EvalReport, EvalError> {
    check_threshold(threshold)?;
    let emotions = shared_subset(predicted, truth)?;
    let n = truth.len();
    let detections: Vec<_> = predicted.iter().map(|p| detected(p, threshold)).collect();
    let aspect1_correct = count_set_matches(&detections, truth, &emotions);

    let per_emotion: Vec<EmotionBreakdown> = emotions
        .iter()
        .map(|&emotion| {
            let agree = detections
                .iter()
                .zip(truth)
                .filter(|(d, t)| d.contains(&emotion) == present(t, &[emotion]).contains(&emotion))
                .count();
            let errors = level_errors(predicted, truth, emotion);
            let negatives = (LEVEL_CLASSES - 1) * n;
            EmotionBreakdown {
                emotion,
                presence_accuracy: agree as f64 / n as f64,
                level_accuracy: (n - errors) as f64 / n as f64,
                false_positives: errors,
                negatives,
                fpr: errors as f64 / negatives as f64,
            }
        })
        .collect();
    let fp: usize = per_emotion.iter().map(|b| b.false_positives).sum();
    let negatives: usize = per_emotion.iter().map(|b| b.negatives).sum();
    let confusion = confusion_matrix(predicted, truth, confusion_emotions.unwrap_or(&emotions), threshold)?;

    Ok(EvalReport {
        instances: n,
        threshold,
        emotions,
        aspect1_accuracy: aspect1_correct as f64 / n as f64,
        aspect1_correct,
        aspect2_fpr: fp as f64 / negatives as f64,
        aspect2_false_positives: fp,
        aspect2_negatives: negatives,
        fpr_definition: FPR_DEFINITION.to_string(),
        per_emotion,
        confusion,
    })
}

impl EvalReport {
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "instances          {}", self.instances);
        let _ = writeln!(out, "threshold          {}", self.threshold);
        let _ = writeln!(
            out,
            "aspect-1 accuracy  {:.4} ({}/{})",
            self.aspect1_accuracy, self.aspect1_correct, self.instances
        );
        let _ = writeln!(
            out,
            "aspect-2 FPR       {:.4} ({}/{})",
            self.aspect2_fpr, self.aspect2_false_positives, self.aspect2_negatives
        );
        let _ = writeln!(out, "FPR definition     {}", self.fpr_definition);
        let _ = writeln!(out);
        let _ = writeln!(out, "{:<14} {:>9} {:>9} {:>8}", "emotion", "presence", "level", "fpr");
        for b in &self.per_emotion {
            let _ = writeln!(
                out,
                "{:<14} {:>9.4} {:>9.4} {:>8.4}",
                b.emotion.as_str(),
                b.presence_accuracy,
                b.level_accuracy,
                b.fpr
            );
        }
        let _ = writeln!(out);
        let _ = write!(out, "{:<14}", "confusion");
        for l in &self.confusion.labels {
            let _ = write!(out, " {:>12}", l.as_str());
        }
        let _ = writeln!(out, " {:>8}", "support");
        for (r, l) in self.confusion.labels.iter().enumerate() {
            let _ = write!(out, "{:<14}", l.as_str());
            for cell in &self.confusion.cells[r] {
                match cell {
                    Some(v) => {
                        let _ = write!(out, " {v:>12.2}");
                    }
                    None => {
                        let _ = write!(out, " {:>12}", "-");
                    }
                }
            }
            let _ = writeln!(out, " {:>8}", self.confusion.support[r]);
        }
        out
    }
}

/// Fuzzy multi-level pipeline against a present/absent baseline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub fuzzy_aspect1: f64,
    pub baseline_aspect1: f64,
    /// `fuzzy_aspect1 - baseline_aspect1`.
    pub difference: f64,
    /// Level FPR, which only the fuzzy pipeline can report.
    pub fuzzy_aspect2_fpr: f64,
}

pub fn compare_with_baseline(
    fuzzy: &[EmotionState],
    baseline: &[BTreeSet<EmotionName>],
    truth: &[SelfReport],
    threshold: f64,
) -> Result<Comparison, EvalError> {
    let emotions = shared_subset(fuzzy, truth)?;
    let fuzzy_aspect1 = aspect1_accuracy(fuzzy, truth, threshold)?;
    let baseline_aspect1 = set_accuracy(baseline, truth, &emotions)?;
    Ok(Comparison {
        fuzzy_aspect1,
        baseline_aspect1,
        difference: fuzzy_aspect1 - baseline_aspect1,
        fuzzy_aspect2_fpr: aspect2_level_fpr(fuzzy, truth)?,
    })
}
