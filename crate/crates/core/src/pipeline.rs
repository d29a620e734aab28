//! Generate, extract, train, predict and evaluate in one call.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classifier::{train, ClassifierError, EmotionState, LabeledSample, PresenceBaseline, TrainConfig};
use crate::dataset::{label_sessions, train_test_split, SessionFeatures, JOIN_WINDOW_MS};
use crate::emotion::SelfReport;
use crate::evaluation::{compare_with_baseline, evaluate, Comparison, EvalError, EvalReport};
use crate::features::{extract_batch, ExtractError, ValidationMode};
use crate::synth::{generate, GeneratorConfig, SynthError, SyntheticDataset};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error(transparent)]
    Extract(#[from] ExtractError),
    #[error(transparent)]
    Classifier(#[from] ClassifierError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub generator: GeneratorConfig,
    pub train: TrainConfig,
    pub test_fraction: f64,
    pub split_seed: u64,
    pub threshold: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            generator: GeneratorConfig::default(),
            train: TrainConfig::default(),
            test_fraction: 0.3,
            split_seed: 42,
            threshold: crate::evaluation::DEFAULT_THRESHOLD,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub report: EvalReport,
    pub comparison: Comparison,
    pub train_size: usize,
    pub test_size: usize,
}

/// Extracts every session of a synthetic dataset.
pub fn featurize(dataset: &SyntheticDataset) -> Result<Vec<SessionFeatures>, ExtractError> {
    let sessions: Vec<_> = dataset.sessions.iter().map(|r| r.session.clone()).collect();
    extract_batch(&sessions, ValidationMode::Strict)
        .into_iter()
        .zip(&dataset.sessions)
        .map(|(f, r)| {
            Ok(SessionFeatures { pid: r.session.participant.clone(), ts: r.start_ts().unwrap_or(0), features: f? })
        })
        .collect()
}

pub fn run(config: &ExperimentConfig) -> Result<ExperimentResult, PipelineError> {
    let dataset = generate(&config.generator)?;
    let features = featurize(&dataset)?;
    let labeled = label_sessions(&features, &dataset.reports, JOIN_WINDOW_MS);
    let (train_idx, test_idx) = train_test_split(labeled.samples.len(), config.test_fraction, config.split_seed);
    let pick = |idx: &[usize]| -> Vec<LabeledSample> { idx.iter().map(|i| labeled.samples[*i].clone()).collect() };
    let train_set = pick(&train_idx);
    let test_set = pick(&test_idx);
    let truth: Vec<SelfReport> = test_idx.iter().map(|i| dataset.reports[labeled.report_index[*i]].clone()).collect();

    let model = train(&train_set, &config.train)?;
    let predicted: Vec<EmotionState> =
        test_set.iter().map(|s| model.predict(&s.features)).collect::<Result<_, _>>()?;
    let report = evaluate(&predicted, &truth, config.threshold, None)?;

    let baseline = PresenceBaseline::train(&train_set, &config.train)?;
    let detections = test_set.iter().map(|s| baseline.detect(&s.features)).collect::<Result<Vec<_>, _>>()?;
    let comparison = compare_with_baseline(&predicted, &detections, &truth, config.threshold)?;
    Ok(ExperimentResult { report, comparison, train_size: train_set.len(), test_size: test_set.len() })
}
