//! Per-emotion five-level classification.
//!
//! Every emotion gets five binary soft-margin SVMs, one per level class
//! (class c against the rest), trained on z-scored features by seeded
//! stochastic subgradient descent on the hinge loss. At prediction time the
//! five decision scores become a fuzzy [`Membership`] through a softmax, which
//! is then defuzzified to a continuous level.
//!
//! Standardized features pass through a feature map before the machines see
//! them: identity, an additive quadratic expansion (the default), or a random
//! Fourier approximation of an RBF kernel.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::emotion::{BasicEmotion, EmotionName, Level, LevelClass, LEVEL_CLASSES};
use crate::features::{FeatureVector, FEATURE_COUNT, FEATURE_NAMES, SCHEMA_VERSION};
use crate::fuzzy::{defuzzify, Membership};
use crate::rng::derive_seed;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClassifierError {
    #[error("no training samples")]
    Empty,
    #[error("emotion `{0}` has a single label class; at least two are needed")]
    DegenerateLabels(EmotionName),
    #[error("sample {index} has no label for `{emotion}`")]
    MissingLabel { index: usize, emotion: EmotionName },
    #[error("feature schema mismatch: model expects version {expected}, got {found}")]
    SchemaMismatch { expected: u32, found: u32 },
    #[error("non-finite decision score for `{0}`; the model is corrupt")]
    NonFiniteScore(EmotionName),
    #[error("invalid training configuration: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Kernel {
    Linear,
    /// Each standardized feature `z` is expanded to `(z, z^2)`, so a single
    /// machine can accept an interval of one feature.
    #[default]
    Quadratic,
    /// Random Fourier approximation of `exp(-gamma * |x - y|^2)`.
    Rbf { gamma: f64, components: u32 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub c: f64,
    pub epochs: u32,
    pub seed: u64,
    /// Softmax temperature applied to decision scores.
    pub temperature: f64,
    pub kernel: Kernel,
    /// Reweight the hinge loss so both sides of each one-vs-rest split
    /// carry equal total weight.
    pub class_balance: bool,
    pub emotions: Vec<EmotionName>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            c: 1.0,
            epochs: 200,
            seed: 0,
            temperature: 1.0,
            kernel: Kernel::default(),
            class_balance: false,
            emotions: BasicEmotion::ALL.iter().map(|b| b.name()).collect(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), ClassifierError> {
        let bad = |m: &str| Err(ClassifierError::InvalidConfig(m.to_string()));
        if !(self.c > 0.0 && self.c.is_finite()) {
            return bad("C must be positive");
        }
        if self.epochs == 0 {
            return bad("epochs must be positive");
        }
        if !(self.temperature > 0.0 && self.temperature.is_finite()) {
            return bad("temperature must be positive");
        }
        if let Kernel::Rbf { gamma, components } = self.kernel {
            if !(gamma > 0.0 && gamma.is_finite()) || components == 0 {
                return bad("rbf kernel needs gamma > 0 and at least one component");
            }
        }
        if self.emotions.is_empty() {
            return bad("no emotions selected");
        }
        if self.emotions.iter().any(|e| !e.is_reportable()) {
            return bad("`neutral` cannot be trained");
        }
        Ok(())
    }
}

/// Training example: features plus the self-reported level classes.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSample {
    pub features: FeatureVector,
    pub labels: BTreeMap<EmotionName, LevelClass>,
}

/// Per-feature z-scoring. Zero-variance features are excluded and map to 0.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    pub excluded: Vec<bool>,
}

impl Standardizer {
    pub fn fit(rows: &[&[f64]]) -> Standardizer {
        let d = rows.first().map(|r| r.len()).unwrap_or(0);
        let n = rows.len() as f64;
        let mut mean = vec![0.0; d];
        let mut std = vec![0.0; d];
        for j in 0..d {
            let m = rows.iter().map(|r| r[j]).sum::<f64>() / n;
            let var = rows.iter().map(|r| (r[j] - m) * (r[j] - m)).sum::<f64>() / n;
            mean[j] = m;
            std[j] = var.sqrt();
        }
        let excluded = std.iter().map(|s| !(*s > 0.0)).collect();
        Standardizer { mean, std, excluded }
    }

    pub fn transform(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .enumerate()
            .map(|(j, v)| if self.excluded[j] { 0.0 } else { (v - self.mean[j]) / self.std[j] })
            .collect()
    }
}

/// Map from standardized features to the space the linear machines see.
#[derive(Debug, Clone, PartialEq)]
pub enum FeatureMap {
    Identity,
    Quadratic,
    Fourier { gamma: f64, omega: Vec<Vec<f64>>, phase: Vec<f64> },
}

impl FeatureMap {
    fn build(kernel: Kernel, input_dim: usize, seed: u64) -> FeatureMap {
        match kernel {
            Kernel::Linear => FeatureMap::Identity,
            Kernel::Quadratic => FeatureMap::Quadratic,
            Kernel::Rbf { gamma, components } => {
                let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[0xF0_0F, components as u64]));
                let normal = Normal::new(0.0, (2.0 * gamma).sqrt()).expect("gamma validated");
                let omega = (0..components)
                    .map(|_| (0..input_dim).map(|_| normal.sample(&mut rng)).collect())
                    .collect();
                let phase = (0..components).map(|_| rng.gen_range(0.0..std::f64::consts::TAU)).collect();
                FeatureMap::Fourier { gamma, omega, phase }
            }
        }
    }

    pub fn apply(&self, z: &[f64]) -> Vec<f64> {
        match self {
            FeatureMap::Identity => z.to_vec(),
            FeatureMap::Quadratic => z.iter().copied().chain(z.iter().map(|v| v * v)).collect(),
            FeatureMap::Fourier { omega, phase, .. } => {
                let scale = (2.0 / omega.len() as f64).sqrt();
                omega
                    .iter()
                    .zip(phase)
                    .map(|(w, b)| scale * (dot(w, z) + b).cos())
                    .collect()
            }
        }
    }

    pub fn output_dim(&self, input_dim: usize) -> usize {
        match self {
            FeatureMap::Identity => input_dim,
            FeatureMap::Quadratic => 2 * input_dim,
            FeatureMap::Fourier { omega, .. } => omega.len(),
        }
    }

    pub fn kernel(&self) -> Kernel {
        match self {
            FeatureMap::Identity => Kernel::Linear,
            FeatureMap::Quadratic => Kernel::Quadratic,
            FeatureMap::Fourier { gamma, omega, .. } => Kernel::Rbf { gamma: *gamma, components: omega.len() as u32 },
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearMachine {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl LinearMachine {
    pub fn score(&self, x: &[f64]) -> f64 {
        dot(&self.weights, x) + self.bias
    }
}

/// Binary hinge-loss SVM fitted by Pegasos-style subgradient steps.
///
/// The bias is learned as the weight of a constant input and is regularized
/// with the other weights.
fn fit_binary(rows: &[Vec<f64>], positive: &[bool], c: f64, epochs: u32, class_balance: bool, seed: u64) -> LinearMachine {
    const STEP_OFFSET: f64 = 100.0;
    let n = rows.len();
    let d = rows[0].len();
    let lambda = 1.0 / (c * n as f64);
    let n_pos = positive.iter().filter(|p| **p).count();
    let n_neg = n - n_pos;
    let (w_pos, w_neg) = if class_balance && n_pos > 0 && n_neg > 0 {
        (n as f64 / (2.0 * n_pos as f64), n as f64 / (2.0 * n_neg as f64))
    } else {
        (1.0, 1.0)
    };

    let mut w = vec![0.0; d];
    let mut b = 0.0;
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = 0.0;
    for _ in 0..epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            t += 1.0;
            let eta = 1.0 / (lambda * (t + STEP_OFFSET));
            let y = if positive[i] { 1.0 } else { -1.0 };
            let margin = y * (dot(&w, &rows[i]) + b);
            let shrink = 1.0 - eta * lambda;
            w.iter_mut().for_each(|v| *v *= shrink);
            b *= shrink;
            if margin < 1.0 {
                let step = eta * y * if positive[i] { w_pos } else { w_neg };
                for (wj, xj) in w.iter_mut().zip(&rows[i]) {
                    *wj += step * xj;
                }
                b += step;
            }
        }
    }
    LinearMachine { weights: w, bias: b }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmotionMachines {
    pub emotion: EmotionName,
    /// One machine per level class, index = class value.
    pub machines: Vec<LinearMachine>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub schema_version: u32,
    pub feature_names: Vec<String>,
    pub standardizer: Standardizer,
    pub feature_map: FeatureMap,
    pub emotions: Vec<EmotionMachines>,
    pub config: TrainConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmotionEstimate {
    pub membership: Membership,
    pub level: Level,
    pub class: LevelClass,
}

impl EmotionEstimate {
    /// Estimate carrying a crisp level class, as read from a self-report.
    pub fn crisp(class: LevelClass) -> EmotionEstimate {
        EmotionEstimate { membership: Membership::crisp(class), level: Level::from(class), class }
    }
}

/// Fuzzy estimate of every modelled emotion.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EmotionState {
    pub emotions: BTreeMap<EmotionName, EmotionEstimate>,
}

impl EmotionState {
    pub fn get(&self, emotion: EmotionName) -> Option<&EmotionEstimate> {
        self.emotions.get(&emotion)
    }
}

fn check_schema(found: u32) -> Result<(), ClassifierError> {
    if found != SCHEMA_VERSION {
        return Err(ClassifierError::SchemaMismatch { expected: SCHEMA_VERSION, found });
    }
    Ok(())
}

struct Prepared {
    standardizer: Standardizer,
    feature_map: FeatureMap,
    rows: Vec<Vec<f64>>,
}

fn prepare(samples: &[LabeledSample], config: &TrainConfig) -> Result<Prepared, ClassifierError> {
    config.validate()?;
    if samples.is_empty() {
        return Err(ClassifierError::Empty);
    }
    for s in samples {
        check_schema(s.features.schema_version)?;
    }
    let raw: Vec<&[f64]> = samples.iter().map(|s| &s.features.values[..]).collect();
    let standardizer = Standardizer::fit(&raw);
    let feature_map = FeatureMap::build(config.kernel, FEATURE_COUNT, config.seed);
    let rows = raw
        .iter()
        .map(|x| feature_map.apply(&standardizer.transform(x)))
        .collect();
    Ok(Prepared { standardizer, feature_map, rows })
}

fn labels_for(samples: &[LabeledSample], emotion: EmotionName) -> Result<Vec<LevelClass>, ClassifierError> {
    samples
        .iter()
        .enumerate()
        .map(|(index, s)| s.labels.get(&emotion).copied().ok_or(ClassifierError::MissingLabel { index, emotion }))
        .collect()
}

pub fn train(samples: &[LabeledSample], config: &TrainConfig) -> Result<Model, ClassifierError> {
    let prepared = prepare(samples, config)?;

    let mut labels = Vec::with_capacity(config.emotions.len());
    for &emotion in &config.emotions {
        let y = labels_for(samples, emotion)?;
        let distinct: BTreeSet<LevelClass> = y.iter().copied().collect();
        if distinct.len() < 2 {
            return Err(ClassifierError::DegenerateLabels(emotion));
        }
        labels.push(y);
    }

    let jobs: Vec<(usize, usize)> =
        (0..config.emotions.len()).flat_map(|e| (0..LEVEL_CLASSES).map(move |c| (e, c))).collect();
    let fitted: Vec<LinearMachine> = jobs
        .par_iter()
        .map(|&(e, c)| {
            let positive: Vec<bool> = labels[e].iter().map(|l| l.index() == c).collect();
            let seed = derive_seed(config.seed, &[config.emotions[e] as u64, c as u64]);
            fit_binary(&prepared.rows, &positive, config.c, config.epochs, config.class_balance, seed)
        })
        .collect();

    let mut machines = fitted.into_iter();
    let emotions = config
        .emotions
        .iter()
        .map(|&emotion| EmotionMachines { emotion, machines: machines.by_ref().take(LEVEL_CLASSES).collect() })
        .collect();

    Ok(Model {
        schema_version: SCHEMA_VERSION,
        feature_names: FEATURE_NAMES.iter().map(|s| s.to_string()).collect(),
        standardizer: prepared.standardizer,
        feature_map: prepared.feature_map,
        emotions,
        config: config.clone(),
    })
}

/// Shifted softmax of decision scores.
pub fn scores_to_membership(scores: &[f64; LEVEL_CLASSES], temperature: f64) -> Membership {
    let max = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut w = [0.0; LEVEL_CLASSES];
    for (wc, s) in w.iter_mut().zip(scores) {
        *wc = ((s - max) / temperature).exp();
    }
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= total);
    Membership::new(w).expect("softmax output is a distribution")
}

impl Model {
    pub fn emotion_names(&self) -> Vec<EmotionName> {
        self.emotions.iter().map(|e| e.emotion).collect()
    }

    fn mapped(&self, features: &FeatureVector) -> Result<Vec<f64>, ClassifierError> {
        if features.schema_version != self.schema_version {
            return Err(ClassifierError::SchemaMismatch { expected: self.schema_version, found: features.schema_version });
        }
        Ok(self.feature_map.apply(&self.standardizer.transform(&features.values)))
    }

    pub fn scores(&self, features: &FeatureVector) -> Result<BTreeMap<EmotionName, [f64; LEVEL_CLASSES]>, ClassifierError> {
        let x = self.mapped(features)?;
        let mut out = BTreeMap::new();
        for em in &self.emotions {
            let mut s = [0.0; LEVEL_CLASSES];
            for (c, m) in em.machines.iter().enumerate() {
                s[c] = m.score(&x);
            }
            if s.iter().any(|v| !v.is_finite()) {
                return Err(ClassifierError::NonFiniteScore(em.emotion));
            }
            out.insert(em.emotion, s);
        }
        Ok(out)
    }

    pub fn predict(&self, features: &FeatureVector) -> Result<EmotionState, ClassifierError> {
        let mut state = EmotionState::default();
        for (emotion, scores) in self.scores(features)? {
            let membership = scores_to_membership(&scores, self.config.temperature);
            let level = defuzzify(&membership).expect("softmax membership is valid");
            state.emotions.insert(emotion, EmotionEstimate { membership, level, class: membership.argmax() });
        }
        Ok(state)
    }
}

pub fn predict(model: &Model, features: &FeatureVector) -> Result<EmotionState, ClassifierError> {
    model.predict(features)
}

/// Binary present/absent detector per emotion, used as the non-fuzzy
/// reference in comparisons.
#[derive(Debug, Clone, PartialEq)]
pub struct PresenceBaseline {
    pub standardizer: Standardizer,
    pub feature_map: FeatureMap,
    pub machines: Vec<(EmotionName, LinearMachine)>,
}

impl PresenceBaseline {
    pub fn train(samples: &[LabeledSample], config: &TrainConfig) -> Result<PresenceBaseline, ClassifierError> {
        let prepared = prepare(samples, config)?;
        let mut presence = Vec::new();
        for &emotion in &config.emotions {
            let y: Vec<bool> = labels_for(samples, emotion)?.iter().map(|l| l.value() >= 1).collect();
            if y.iter().all(|p| *p) || y.iter().all(|p| !*p) {
                return Err(ClassifierError::DegenerateLabels(emotion));
            }
            presence.push((emotion, y));
        }
        let machines = presence
            .par_iter()
            .map(|(emotion, y)| {
                let seed = derive_seed(config.seed, &[*emotion as u64, 0xBA5E]);
                (*emotion, fit_binary(&prepared.rows, y, config.c, config.epochs, config.class_balance, seed))
            })
            .collect();
        Ok(PresenceBaseline { standardizer: prepared.standardizer, feature_map: prepared.feature_map, machines })
    }

    pub fn detect(&self, features: &FeatureVector) -> Result<BTreeSet<EmotionName>, ClassifierError> {
        check_schema(features.schema_version)?;
        let x = self.feature_map.apply(&self.standardizer.transform(&features.values));
        Ok(self.machines.iter().filter(|(_, m)| m.score(&x) >= 0.0).map(|(e, _)| *e).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(x: f64, label: u8) -> LabeledSample {
        let mut values = [0.0; FEATURE_COUNT];
        values[0] = x;
        values[14] = 1.0;
        let mut labels = BTreeMap::new();
        labels.insert(EmotionName::Joy, LevelClass::new(label as i64).unwrap());
        LabeledSample { features: FeatureVector::new(values), labels }
    }

    fn toy_set() -> Vec<LabeledSample> {
        (0..40)
            .map(|i| {
                let x = (i as f64 - 19.5) / 4.0;
                sample(x, if x > 0.0 { 4 } else { 0 })
            })
            .collect()
    }

    fn joy_config(kernel: Kernel) -> TrainConfig {
        TrainConfig { kernel, emotions: vec![EmotionName::Joy], ..TrainConfig::default() }
    }

    #[test]
    fn separable_toy_set_is_fit_exactly() {
        for kernel in [Kernel::Linear, Kernel::Quadratic, Kernel::Rbf { gamma: 0.2, components: 256 }] {
            let data = toy_set();
            let model = train(&data, &joy_config(kernel)).unwrap();
            for s in &data {
                let state = model.predict(&s.features).unwrap();
                assert_eq!(state.get(EmotionName::Joy).unwrap().class, s.labels[&EmotionName::Joy], "{kernel:?}");
            }
        }
    }

    #[test]
    fn training_is_deterministic() {
        let data = toy_set();
        let a = train(&data, &joy_config(Kernel::default())).unwrap();
        let b = train(&data, &joy_config(Kernel::default())).unwrap();
        assert_eq!(a, b);
        let x = &data[3].features;
        assert_eq!(a.predict(x).unwrap(), b.predict(x).unwrap());
    }

    #[test]
    fn single_class_is_degenerate() {
        let data: Vec<LabeledSample> = (0..10).map(|i| sample(i as f64, 2)).collect();
        assert_eq!(
            train(&data, &joy_config(Kernel::Linear)),
            Err(ClassifierError::DegenerateLabels(EmotionName::Joy))
        );
    }

    #[test]
    fn zero_weights_give_uniform_membership() {
        let mut model = train(&toy_set(), &joy_config(Kernel::Linear)).unwrap();
        for m in &mut model.emotions[0].machines {
            m.weights.iter_mut().for_each(|w| *w = 0.0);
            m.bias = 0.0;
        }
        let state = model.predict(&toy_set()[0].features).unwrap();
        let est = state.get(EmotionName::Joy).unwrap();
        for w in est.membership.weights() {
            assert!((w - 0.2).abs() < 1e-12);
        }
        assert!((est.level.value() - 2.0).abs() < 1e-12);
        assert_eq!(est.class.value(), 0);
    }

    #[test]
    fn schema_and_corruption_errors() {
        let model = train(&toy_set(), &joy_config(Kernel::Linear)).unwrap();
        let mut fv = toy_set()[0].features.clone();
        fv.schema_version = 2;
        assert!(matches!(model.predict(&fv), Err(ClassifierError::SchemaMismatch { expected: 1, found: 2 })));

        let mut broken = model.clone();
        broken.emotions[0].machines[1].bias = f64::NAN;
        assert_eq!(
            broken.predict(&toy_set()[0].features),
            Err(ClassifierError::NonFiniteScore(EmotionName::Joy))
        );
    }

    #[test]
    fn zero_variance_features_are_excluded() {
        let model = train(&toy_set(), &joy_config(Kernel::Linear)).unwrap();
        assert!(!model.standardizer.excluded[0]);
        assert!(model.standardizer.excluded[1]);
        assert!(model.standardizer.excluded[14]);
        assert!(model.standardizer.std.iter().zip(&model.standardizer.excluded).all(|(s, ex)| *ex || *s > 0.0));
    }

    #[test]
    fn invalid_configs_rejected() {
        let data = toy_set();
        let mut cfg = joy_config(Kernel::Linear);
        cfg.c = 0.0;
        assert!(matches!(train(&data, &cfg), Err(ClassifierError::InvalidConfig(_))));
        let mut cfg = joy_config(Kernel::Linear);
        cfg.emotions = vec![EmotionName::Neutral];
        assert!(matches!(train(&data, &cfg), Err(ClassifierError::InvalidConfig(_))));
        assert_eq!(train(&[], &joy_config(Kernel::Linear)), Err(ClassifierError::Empty));
    }

    #[test]
    fn presence_baseline_separates_toy_set() {
        let data = toy_set();
        let baseline = PresenceBaseline::train(&data, &joy_config(Kernel::Linear)).unwrap();
        for s in &data {
            let present = baseline.detect(&s.features).unwrap().contains(&EmotionName::Joy);
            assert_eq!(present, s.labels[&EmotionName::Joy].value() >= 1);
        }
    }

    #[test]
    fn softmax_membership_shape() {
        let m = scores_to_membership(&[1.0, -1.0, -1.0, -1.0, -1.0], 0.25);
        assert!(defuzzify(&m).unwrap().value() < 0.01);
        let m1 = scores_to_membership(&[1.0, -1.0, -1.0, -1.0, -1.0], 1.0);
        assert!((m1.weights().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert_eq!(m1.argmax().value(), 0);
    }
}
