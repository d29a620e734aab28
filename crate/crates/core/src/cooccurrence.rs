//! Anchor-conditioned co-occurrence of the basic emotions.
//!
//! Each table gives, for an anchor emotion held at level class 0..=4, the
//! average level at which the other seven basic emotions were co-reported.
//! Profiles at fractional anchor levels interpolate linearly between rows.
//! A separate regional table holds the Joy = 2 profile for three regions.

use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::emotion::{
    BasicEmotion, EmotionError, EmotionProfile, Level, LevelClass, Region, SelfReport,
    LEVEL_CLASSES,
};

/// Default plausibility tolerance, in levels.
pub const DEFAULT_TOLERANCE: f64 = 0.75;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CooccurrenceError {
    #[error("unsupported anchor `{0}`: no co-occurrence table exists for it")]
    UnsupportedAnchor(BasicEmotion),
    #[error("no regional data for region `{region}` with anchor `{anchor}` at level {level}")]
    NoRegionalData { region: Region, anchor: BasicEmotion, level: f64 },
    #[error("candidate `{0}` is the anchor itself")]
    InvalidCandidate(BasicEmotion),
    #[error("tolerance must be positive, got {0}")]
    InvalidTolerance(f64),
    #[error("no reports for anchor levels {missing:?}")]
    IncompleteData { missing: Vec<u8> },
    #[error(transparent)]
    Emotion(#[from] EmotionError),
}

/// Expected levels of the seven non-anchor basic emotions, one row per
/// anchor level class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CooccurrenceTable {
    pub anchor: BasicEmotion,
    pub columns: [BasicEmotion; 7],
    pub rows: [[f64; 7]; LEVEL_CLASSES],
}

/// Non-anchor basic emotions in canonical order.
pub fn columns_for(anchor: BasicEmotion) -> [BasicEmotion; 7] {
    let mut out = [BasicEmotion::Joy; 7];
    let mut i = 0;
    for b in BasicEmotion::ALL {
        if b != anchor {
            out[i] = b;
            i += 1;
        }
    }
    out
}

// Columns follow `columns_for(anchor)`, i.e. BasicEmotion::ALL without the anchor.
const JOY_ROWS: [[f64; 7]; 5] = [
    [0.6, 1.73, 1.4, 2.13, 0.66, 1.2, 1.06],
    [1.75, 0.83, 0.62, 1.04, 0.85, 1.37, 1.7],
    [1.7, 0.95, 0.84, 1.34, 1.06, 1.04, 2.15],
    [2.14, 0.88, 0.64, 0.91, 1.08, 0.91, 2.11],
    [2.58, 1.25, 0.83, 0.83, 2.08, 0.66, 2.83],
];

// The level-0 row is printed apart from the other four.
const ANTICIPATION_ROWS: [[f64; 7]; 5] = [
    [1.42, 0.6, 0.6, 1.21, 0.25, 0.92, 1.5],
    [1.92, 0.92, 0.92, 0.92, 1.36, 1.04, 1.96],
    [1.97, 1.2, 0.88, 1.26, 1.05, 1.23, 1.97],
    [2.41, 1.22, 0.74, 1.19, 1.54, 0.9, 2.38],
    [2.9, 1.27, 1.09, 1.81, 1.36, 1.27, 2.36],
];

const ANGER_ROWS: [[f64; 7]; 5] = [
    [2.01, 1.42, 0.21, 0.65, 0.59, 0.63, 1.8],
    [2.31, 2.0, 0.86, 1.0, 1.62, 1.2, 2.13],
    [1.85, 2.42, 1.23, 2.09, 1.42, 1.66, 2.42],
    [2.3, 2.1, 1.7, 1.8, 1.4, 2.0, 2.0],
    [1.25, 1.62, 3.0, 3.25, 1.62, 0.85, 1.87],
];

const FEAR_ROWS: [[f64; 7]; 5] = [
    [2.09, 1.72, 0.77, 0.61, 0.87, 0.77, 1.85],
    [2.15, 1.71, 0.79, 0.74, 1.23, 1.15, 2.12],
    [2.1, 2.05, 1.78, 1.05, 1.94, 1.52, 2.1],
    [1.55, 2.11, 1.11, 1.22, 1.33, 1.22, 2.0],
    [1.37, 1.5, 2.0, 1.5, 1.62, 1.62, 2.12],
];

const ACCEPTANCE_ROWS: [[f64; 7]; 5] = [
    [1.48, 1.04, 0.52, 0.32, 0.84, 0.32, 0.72],
    [1.72, 1.83, 1.61, 0.94, 1.66, 1.22, 1.27],
    [1.96, 2.06, 1.0, 1.03, 1.06, 1.29, 1.12],
    [2.42, 1.9, 1.11, 0.92, 1.4, 1.14, 1.14],
    [2.38, 2.07, 1.0, 0.69, 1.07, 1.69, 0.92],
];

/// Anchors with an embedded table.
pub const SUPPORTED_ANCHORS: [BasicEmotion; 5] = [
    BasicEmotion::Joy,
    BasicEmotion::Anticipation,
    BasicEmotion::Anger,
    BasicEmotion::Fear,
    BasicEmotion::Acceptance,
];

/// Regions covered by the regional table, in column order.
pub const REGIONAL_REGIONS: [Region; 3] = [Region::Europe, Region::MiddleEast, Region::SouthEastAsia];

/// Joy = 2 profile per region; rows follow `columns_for(Joy)`, columns
/// follow `REGIONAL_REGIONS`.
const REGIONAL_JOY_2: [[f64; 3]; 7] = [
    [1.14, 1.8, 1.66],
    [0.42, 1.09, 1.5],
    [0.71, 0.71, 1.16],
    [1.0, 1.66, 0.5],
    [0.57, 1.33, 1.33],
    [0.85, 1.33, 0.66],
    [2.0, 2.09, 2.33],
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegionalTable {
    pub anchor: BasicEmotion,
    pub anchor_level: u8,
    pub regions: [Region; 3],
    pub emotions: [BasicEmotion; 7],
    pub values: [[f64; 3]; 7],
}

pub fn regional_table() -> RegionalTable {
    RegionalTable {
        anchor: BasicEmotion::Joy,
        anchor_level: 2,
        regions: REGIONAL_REGIONS,
        emotions: columns_for(BasicEmotion::Joy),
        values: REGIONAL_JOY_2,
    }
}

pub fn table_for(anchor: BasicEmotion) -> Result<CooccurrenceTable, CooccurrenceError> {
    let rows = match anchor {
        BasicEmotion::Joy => JOY_ROWS,
        BasicEmotion::Anticipation => ANTICIPATION_ROWS,
        BasicEmotion::Anger => ANGER_ROWS,
        BasicEmotion::Fear => FEAR_ROWS,
        BasicEmotion::Acceptance => ACCEPTANCE_ROWS,
        other => return Err(CooccurrenceError::UnsupportedAnchor(other)),
    };
    Ok(CooccurrenceTable { anchor, columns: columns_for(anchor), rows })
}

impl CooccurrenceTable {
    pub fn column_index(&self, emotion: BasicEmotion) -> Option<usize> {
        self.columns.iter().position(|c| *c == emotion)
    }

    pub fn value(&self, class: LevelClass, emotion: BasicEmotion) -> Option<f64> {
        self.column_index(emotion).map(|j| self.rows[class.index()][j])
    }

    fn row_profile(&self, row: &[f64; 7]) -> Result<EmotionProfile, CooccurrenceError> {
        let mut profile = EmotionProfile::new();
        for (emotion, v) in self.columns.iter().zip(row) {
            profile.insert(emotion.name(), Level::new(*v)?);
        }
        Ok(profile)
    }

    /// Profile at `level`, linear between the bracketing integer rows.
    pub fn profile_at(&self, level: Level) -> Result<EmotionProfile, CooccurrenceError> {
        let x = level.value();
        let lower = x.floor() as usize;
        let frac = x - lower as f64;
        if frac == 0.0 {
            return self.row_profile(&self.rows[lower]);
        }
        let (a, b) = (&self.rows[lower], &self.rows[lower + 1]);
        let mut row = [0.0; 7];
        for j in 0..7 {
            row[j] = a[j] + (b[j] - a[j]) * frac;
        }
        self.row_profile(&row)
    }

    /// CSV with header `anchor_level,<emotion>,...`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("anchor_level");
        for c in &self.columns {
            out.push(',');
            out.push_str(c.as_str());
        }
        out.push('\n');
        for (level, row) in self.rows.iter().enumerate() {
            let _ = write!(out, "{level}");
            for v in row {
                let _ = write!(out, ",{v}");
            }
            out.push('\n');
        }
        out
    }

    /// Series sampled every `step` levels across [0, 4], for line charts.
    pub fn plot_series(&self, step: f64) -> Result<String, CooccurrenceError> {
        let step = if step > 0.0 { step } else { 1.0 };
        let mut out = String::from("level");
        for c in &self.columns {
            out.push(',');
            out.push_str(c.as_str());
        }
        out.push('\n');
        let n = (4.0 / step).round() as usize;
        for i in 0..=n {
            let x = (i as f64 * step).min(4.0);
            let profile = self.profile_at(Level::new(x)?)?;
            let _ = write!(out, "{x}");
            for c in &self.columns {
                let _ = write!(out, ",{}", profile[&c.name()].value());
            }
            out.push('\n');
        }
        Ok(out)
    }
}

impl RegionalTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("emotion");
        for r in &self.regions {
            out.push(',');
            out.push_str(r.as_str());
        }
        out.push('\n');
        for (emotion, row) in self.emotions.iter().zip(&self.values) {
            out.push_str(emotion.as_str());
            for v in row {
                let _ = write!(out, ",{v}");
            }
            out.push('\n');
        }
        out
    }
}

pub fn expected_profile(anchor: BasicEmotion, level: Level) -> Result<EmotionProfile, CooccurrenceError> {
    table_for(anchor)?.profile_at(level)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Plausible,
    Implausible,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PlausibilityVerdict {
    pub verdict: Verdict,
    pub expected: Level,
    pub hypothesized: Level,
    pub margin: f64,
    pub tolerance: f64,
}

impl PlausibilityVerdict {
    pub fn is_plausible(&self) -> bool {
        self.verdict == Verdict::Plausible
    }
}

/// Checks a hypothesised co-emotion level against the anchor's expected profile.
pub fn plausibility(
    anchor: BasicEmotion,
    anchor_level: Level,
    candidate: BasicEmotion,
    candidate_level: Level,
    tolerance: f64,
) -> Result<PlausibilityVerdict, CooccurrenceError> {
    if !(tolerance > 0.0) || !tolerance.is_finite() {
        return Err(CooccurrenceError::InvalidTolerance(tolerance));
    }
    let table = table_for(anchor)?;
    if candidate == anchor {
        return Err(CooccurrenceError::InvalidCandidate(candidate));
    }
    let profile = table.profile_at(anchor_level)?;
    let expected = profile[&candidate.name()];
    let margin = (candidate_level.value() - expected.value()).abs();
    let verdict = if margin <= tolerance { Verdict::Plausible } else { Verdict::Implausible };
    Ok(PlausibilityVerdict { verdict, expected, hypothesized: candidate_level, margin, tolerance })
}

/// Regional profile. Only Joy at level 2 is covered, for Europe, the
/// Middle East and South East Asia.
pub fn regional_profile(
    region: Region,
    anchor: BasicEmotion,
    level: Level,
) -> Result<EmotionProfile, CooccurrenceError> {
    let column = REGIONAL_REGIONS.iter().position(|r| *r == region);
    let column = match column {
        Some(c) if anchor == BasicEmotion::Joy && level.value() == 2.0 => c,
        _ => {
            return Err(CooccurrenceError::NoRegionalData { region, anchor, level: level.value() })
        }
    };
    let table = regional_table();
    let mut profile = EmotionProfile::new();
    for (emotion, row) in table.emotions.iter().zip(&table.values) {
        profile.insert(emotion.name(), Level::new(row[column])?);
    }
    Ok(profile)
}

/// Rebuilds a table from self-reports as per-anchor-level means of the
/// co-reported levels.
pub fn recompute_table(
    reports: &[SelfReport],
    anchor: BasicEmotion,
) -> Result<CooccurrenceTable, CooccurrenceError> {
    let columns = columns_for(anchor);
    // Integer sums keep the result independent of report order.
    let mut sums = [[0u64; 7]; LEVEL_CLASSES];
    let mut counts = [0u64; LEVEL_CLASSES];
    for report in reports {
        report.validate()?;
        let Some(a) = report.level(anchor.name()) else { continue };
        let row = a.index();
        counts[row] += 1;
        for (j, c) in columns.iter().enumerate() {
            sums[row][j] += report.level(c.name()).map(|l| l.value() as u64).unwrap_or(0);
        }
    }
    let missing: Vec<u8> = (0..LEVEL_CLASSES as u8).filter(|l| counts[*l as usize] == 0).collect();
    if !missing.is_empty() {
        return Err(CooccurrenceError::IncompleteData { missing });
    }
    let mut rows = [[0.0; 7]; LEVEL_CLASSES];
    for l in 0..LEVEL_CLASSES {
        for j in 0..7 {
            rows[l][j] = sums[l][j] as f64 / counts[l] as f64;
        }
    }
    Ok(CooccurrenceTable { anchor, columns, rows })
}

/// Mean absolute difference over all 35 cells.
pub fn mean_absolute_error(a: &CooccurrenceTable, b: &CooccurrenceTable) -> f64 {
    let mut total = 0.0;
    for l in 0..LEVEL_CLASSES {
        for (j, col) in a.columns.iter().enumerate() {
            let other = b.column_index(*col).map(|k| b.rows[l][k]).unwrap_or(f64::NAN);
            total += (a.rows[l][j] - other).abs();
        }
    }
    total / (LEVEL_CLASSES * 7) as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::emotion::{percent, EmotionName, SelfReport};
    use proptest::prelude::*;

    fn lv(x: f64) -> Level {
        Level::new(x).unwrap()
    }

    #[test]
    fn table_examples() {
        let joy = table_for(BasicEmotion::Joy).unwrap();
        let row2 = LevelClass::new(2).unwrap();
        assert_eq!(joy.value(row2, BasicEmotion::Disgust), Some(0.84));
        assert_eq!(joy.value(row2, BasicEmotion::Fear), Some(1.04));
        assert_eq!(joy.value(row2, BasicEmotion::Acceptance), Some(2.15));
        let anger = table_for(BasicEmotion::Anger).unwrap();
        let row4 = LevelClass::new(4).unwrap();
        assert_eq!(anger.value(row4, BasicEmotion::Sadness), Some(3.25));
        assert_eq!(anger.value(row4, BasicEmotion::Disgust), Some(3.0));
        for unsupported in [BasicEmotion::Sadness, BasicEmotion::Disgust, BasicEmotion::Surprise] {
            assert_eq!(table_for(unsupported), Err(CooccurrenceError::UnsupportedAnchor(unsupported)));
        }
    }

    #[test]
    fn anchor_never_a_column() {
        for anchor in SUPPORTED_ANCHORS {
            let t = table_for(anchor).unwrap();
            assert!(!t.columns.contains(&anchor));
            for row in t.rows {
                assert!(row.iter().all(|v| (0.0..=4.0).contains(v)));
            }
        }
    }

    #[test]
    fn expected_profile_examples() {
        let p = expected_profile(BasicEmotion::Joy, lv(2.0)).unwrap();
        let want = [
            (EmotionName::Anticipation, 1.7),
            (EmotionName::Anger, 0.95),
            (EmotionName::Disgust, 0.84),
            (EmotionName::Sadness, 1.34),
            (EmotionName::Surprise, 1.06),
            (EmotionName::Fear, 1.04),
            (EmotionName::Acceptance, 2.15),
        ];
        assert_eq!(p.len(), 7);
        for (e, v) in want {
            assert_eq!(p[&e].value(), v);
        }

        // Hand midpoints of rows 2 and 3.
        let mid = expected_profile(BasicEmotion::Joy, lv(2.5)).unwrap();
        assert!((mid[&EmotionName::Disgust].value() - 0.74).abs() < 1e-12);
        assert!((mid[&EmotionName::Anticipation].value() - 1.92).abs() < 1e-12);

        let fear0 = expected_profile(BasicEmotion::Fear, lv(0.0)).unwrap();
        assert_eq!(fear0[&EmotionName::Joy].value(), 2.09);
        assert_eq!(fear0[&EmotionName::Acceptance].value(), 1.85);
        assert_eq!(fear0[&EmotionName::Disgust].value(), 0.61);
    }

    #[test]
    fn joy_half_sentence() {
        let p = expected_profile(BasicEmotion::Joy, lv(2.0)).unwrap();
        assert_eq!(percent(p[&EmotionName::Disgust]).round(), 21.0);
        assert_eq!(percent(p[&EmotionName::Fear]).round(), 26.0);
    }

    #[test]
    fn plausibility_examples() {
        let fear = plausibility(BasicEmotion::Joy, lv(2.0), BasicEmotion::Fear, lv(2.2), DEFAULT_TOLERANCE).unwrap();
        assert_eq!(fear.verdict, Verdict::Implausible);
        assert_eq!(fear.expected.value(), 1.04);
        assert!((fear.margin - 1.16).abs() < 1e-12);

        let acc = plausibility(BasicEmotion::Joy, lv(2.0), BasicEmotion::Acceptance, lv(2.2), DEFAULT_TOLERANCE).unwrap();
        assert!(acc.is_plausible());
        assert!((acc.margin - 0.05).abs() < 1e-12);

        let same = plausibility(BasicEmotion::Joy, lv(2.0), BasicEmotion::Disgust, lv(0.84), 1e-9).unwrap();
        assert!(same.is_plausible());
        assert_eq!(same.margin, 0.0);
    }

    #[test]
    fn plausibility_errors() {
        assert_eq!(
            plausibility(BasicEmotion::Joy, lv(2.0), BasicEmotion::Joy, lv(2.0), 0.75),
            Err(CooccurrenceError::InvalidCandidate(BasicEmotion::Joy))
        );
        assert!(matches!(
            plausibility(BasicEmotion::Sadness, lv(2.0), BasicEmotion::Joy, lv(2.0), 0.75),
            Err(CooccurrenceError::UnsupportedAnchor(_))
        ));
        assert!(matches!(
            plausibility(BasicEmotion::Joy, lv(2.0), BasicEmotion::Fear, lv(2.0), 0.0),
            Err(CooccurrenceError::InvalidTolerance(_))
        ));
    }

    #[test]
    fn regional_examples() {
        let eu = regional_profile(Region::Europe, BasicEmotion::Joy, lv(2.0)).unwrap();
        assert_eq!(eu[&EmotionName::Anticipation].value(), 1.14);
        assert_eq!(eu[&EmotionName::Anger].value(), 0.42);
        assert_eq!(eu[&EmotionName::Sadness].value(), 1.0);
        assert_eq!(eu[&EmotionName::Acceptance].value(), 2.0);
        let sea = regional_profile(Region::SouthEastAsia, BasicEmotion::Joy, lv(2.0)).unwrap();
        assert_eq!(sea[&EmotionName::Sadness].value(), 0.5);
        assert_eq!(sea[&EmotionName::Acceptance].value(), 2.33);
        assert!(matches!(
            regional_profile(Region::EastAsia, BasicEmotion::Joy, lv(2.0)),
            Err(CooccurrenceError::NoRegionalData { .. })
        ));
        assert!(matches!(
            regional_profile(Region::Europe, BasicEmotion::Joy, lv(3.0)),
            Err(CooccurrenceError::NoRegionalData { .. })
        ));
        assert!(matches!(
            regional_profile(Region::Europe, BasicEmotion::Anger, lv(2.0)),
            Err(CooccurrenceError::NoRegionalData { .. })
        ));
    }

    fn report_with(joy: u8, disgust: u8) -> SelfReport {
        let mut r = SelfReport::all_zero(0, "p", None);
        r.levels.insert(EmotionName::Joy, LevelClass::new(joy as i64).unwrap());
        r.levels.insert(EmotionName::Disgust, LevelClass::new(disgust as i64).unwrap());
        r
    }

    #[test]
    fn recompute_examples() {
        let mut reports: Vec<SelfReport> = (0..5).map(|l| report_with(l, 1)).collect();
        reports.push(report_with(2, 1));
        reports.push(report_with(3, 2));
        let t = recompute_table(&reports, BasicEmotion::Joy).unwrap();
        let d = t.column_index(BasicEmotion::Disgust).unwrap();
        assert_eq!(t.rows[2][d], 1.0);
        assert_eq!(t.rows[3][d], 1.5);

        let partial: Vec<SelfReport> = vec![report_with(0, 1), report_with(3, 1)];
        assert_eq!(
            recompute_table(&partial, BasicEmotion::Joy),
            Err(CooccurrenceError::IncompleteData { missing: vec![1, 2, 4] })
        );
    }

    #[test]
    fn csv_header_follows_column_order() {
        let csv = table_for(BasicEmotion::Fear).unwrap().to_csv();
        let header = csv.lines().next().unwrap();
        assert_eq!(header, "anchor_level,joy,anticipation,anger,disgust,sadness,surprise,acceptance");
        assert_eq!(csv.lines().nth(1).unwrap(), "0,2.09,1.72,0.77,0.61,0.87,0.77,1.85");
        let regional = regional_table().to_csv();
        assert!(regional.starts_with("emotion,europe,middle_east,south_east_asia\n"));
    }

    proptest! {
        #[test]
        fn plausibility_monotone_in_tolerance(
            a in 0usize..5, c in 0usize..7, level in 0.0f64..=4.0, cand in 0.0f64..=4.0,
            tau in 0.01f64..2.0, extra in 0.0f64..2.0,
        ) {
            let anchor = SUPPORTED_ANCHORS[a];
            let candidate = columns_for(anchor)[c];
            let v1 = plausibility(anchor, lv(level), candidate, lv(cand), tau).unwrap();
            let v2 = plausibility(anchor, lv(level), candidate, lv(cand), tau + extra).unwrap();
            if v1.is_plausible() {
                prop_assert!(v2.is_plausible());
            }
        }

        #[test]
        fn expected_value_is_always_plausible(
            a in 0usize..5, c in 0usize..7, level in 0.0f64..=4.0, tau in 1e-9f64..4.0,
        ) {
            let anchor = SUPPORTED_ANCHORS[a];
            let candidate = columns_for(anchor)[c];
            let expected = expected_profile(anchor, lv(level)).unwrap()[&candidate.name()];
            prop_assert!(plausibility(anchor, lv(level), candidate, expected, tau).unwrap().is_plausible());
        }

        #[test]
        fn recompute_is_permutation_invariant(
            seed in any::<u64>(),
            extra in proptest::collection::vec((0u8..5, 0u8..5), 0..40),
        ) {
            let mut reports: Vec<SelfReport> = (0..5).map(|l| report_with(l, l)).collect();
            reports.extend(extra.iter().map(|(j, d)| report_with(*j, *d)));
            let base = recompute_table(&reports, BasicEmotion::Joy).unwrap();
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            reports.shuffle(&mut rng);
            prop_assert_eq!(recompute_table(&reports, BasicEmotion::Joy).unwrap(), base);
        }
    }
}
