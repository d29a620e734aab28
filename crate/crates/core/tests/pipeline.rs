use std::io::BufReader;

use affect_fuzzy::classifier::{train, LabeledSample, TrainConfig};
use affect_fuzzy::dataset::{label_sessions, SessionFeatures, JOIN_WINDOW_MS};
use affect_fuzzy::features::{FeatureVector, FEATURE_COUNT};
use affect_fuzzy::io::{
    read_features, read_predictions, read_reports, read_sessions, write_features, write_predictions, write_reports,
    write_sessions, Prediction, Strictness,
};
use affect_fuzzy::model_io::{load_model, save_model};
use affect_fuzzy::pipeline::{featurize, run, ExperimentConfig};
use affect_fuzzy::synth::{generate, GeneratorConfig};

fn small() -> GeneratorConfig {
    GeneratorConfig { participants: 4, sessions_per_participant: 30, ..GeneratorConfig::default() }
}

fn labeled(config: &GeneratorConfig) -> Vec<LabeledSample> {
    let data = generate(config).unwrap();
    let features = featurize(&data).unwrap();
    let l = label_sessions(&features, &data.reports, JOIN_WINDOW_MS);
    assert_eq!(l.dropped, 0);
    l.samples
}

#[test]
fn batch_extraction_of_default_dataset_is_finite() {
    let data = generate(&GeneratorConfig::default()).unwrap();
    let features = featurize(&data).unwrap();
    assert_eq!(features.len(), 500);
    for f in &features {
        assert!(f.features.values.iter().all(|v| v.is_finite()), "{}", f.pid);
        assert_eq!(&f.features.values[FEATURE_COUNT - 3..], &[1.0, 1.0, 1.0]);
    }
}

#[test]
fn every_session_joins_its_own_report() {
    let data = generate(&small()).unwrap();
    let features = featurize(&data).unwrap();
    let l = label_sessions(&features, &data.reports, JOIN_WINDOW_MS);
    assert_eq!(l.report_index, (0..data.reports.len()).collect::<Vec<_>>());
}

#[test]
fn rescaling_a_feature_leaves_predicted_classes_unchanged() {
    let samples = labeled(&small());
    let config = TrainConfig { epochs: 30, ..TrainConfig::default() };
    let scale = |s: &LabeledSample, k: f64| {
        let mut values = s.features.values;
        values[0] *= k;
        values[8] *= k;
        LabeledSample { features: FeatureVector::new(values), labels: s.labels.clone() }
    };
    let scaled: Vec<LabeledSample> = samples.iter().map(|s| scale(s, 1000.0)).collect();
    let a = train(&samples, &config).unwrap();
    let b = train(&scaled, &config).unwrap();
    for (x, y) in samples.iter().zip(&scaled) {
        let pa = a.predict(&x.features).unwrap();
        let pb = b.predict(&y.features).unwrap();
        for (e, est) in &pa.emotions {
            assert_eq!(est.class, pb.emotions[e].class, "{e}");
        }
    }
}

#[test]
fn files_round_trip_through_loaders() {
    let data = generate(&small()).unwrap();
    let features = featurize(&data).unwrap();

    let mut buf = Vec::new();
    write_reports(&mut buf, &data.reports).unwrap();
    assert_eq!(read_reports(BufReader::new(&buf[..]), Strictness::Strict).unwrap(), data.reports);

    let mut buf = Vec::new();
    write_sessions(&mut buf, &data.sessions).unwrap();
    assert_eq!(read_sessions(BufReader::new(&buf[..]), Strictness::Strict).unwrap(), data.sessions);

    let mut buf = Vec::new();
    write_features(&mut buf, &features).unwrap();
    let back: Vec<SessionFeatures> = read_features(BufReader::new(&buf[..])).unwrap();
    assert_eq!(back, features);

    let samples = label_sessions(&features, &data.reports, JOIN_WINDOW_MS).samples;
    let model = train(&samples, &TrainConfig { epochs: 10, ..TrainConfig::default() }).unwrap();
    let mut bytes = Vec::new();
    save_model(&model, &mut bytes).unwrap();
    let loaded = load_model(&bytes[..]).unwrap();
    let predictions: Vec<Prediction> = features
        .iter()
        .map(|f| Prediction { pid: f.pid.clone(), ts: f.ts, state: loaded.predict(&f.features).unwrap() })
        .collect();
    assert_eq!(predictions[0].state, model.predict(&features[0].features).unwrap());
    let mut buf = Vec::new();
    write_predictions(&mut buf, &predictions).unwrap();
    assert_eq!(read_predictions(BufReader::new(&buf[..]), Strictness::Strict).unwrap(), predictions);
}

#[test]
fn experiment_with_other_seeds_stays_accurate() {
    for seed in [1, 2, 3] {
        let config = ExperimentConfig {
            generator: GeneratorConfig { seed, ..GeneratorConfig::default() },
            ..ExperimentConfig::default()
        };
        let r = run(&config).unwrap();
        assert!(r.report.aspect1_accuracy >= 0.9, "seed {seed}: {}", r.report.aspect1_accuracy);
        assert!(r.report.aspect2_fpr <= 0.05, "seed {seed}: {}", r.report.aspect2_fpr);
        assert_eq!(r.train_size + r.test_size, 500);
    }
}
