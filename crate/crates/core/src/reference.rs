//! Published study figures kept as reference data.
//!
//! These numbers come from a 130-participant study whose raw data is not
//! available. They are documented here for comparison only; nothing in the
//! pipeline is fitted to them.

use crate::emotion::{EmotionName, Region};

pub const PARTICIPANTS: u32 = 130;

pub const MEN_SHARE_PERCENT: f64 = 51.0;
pub const MEN_MEAN_AGE_YEARS: f64 = 30.13;
pub const WOMEN_SHARE_PERCENT: f64 = 49.0;
pub const WOMEN_MEAN_AGE_YEARS: f64 = 28.29;

/// Share of participants by region of origin, in percent.
pub const ORIGIN_PERCENT: [(Region, f64); 4] = [
    (Region::Europe, 18.37),
    (Region::MiddleEast, 44.18),
    (Region::SouthEastAsia, 13.17),
    (Region::EastAsia, 7.75),
];

/// Share of participants by region of residence, in percent.
pub const RESIDENCE_PERCENT: [(Region, f64); 4] = [
    (Region::Europe, 27.90),
    (Region::MiddleEast, 11.62),
    (Region::SouthEastAsia, 34.88),
    (Region::EastAsia, 16.37),
];

pub const LIVING_IN_OTHER_HOME_REGION_PERCENT: f64 = 45.0;

/// Highest mean self-reported level across emotions.
pub const STRONGEST_EMOTION: (EmotionName, f64) = (EmotionName::Active, 3.24);
/// Lowest mean self-reported level across emotions. The name is not one of
/// the 27 questionnaire emotions, so it is kept as plain text.
pub const WEAKEST_EMOTION: (&str, f64) = ("unfriendly", 1.62);

/// Diagonal of the published confusion matrix; off-diagonal cells were not
/// reported.
pub const CONFUSION_DIAGONAL: [(EmotionName, f64); 4] = [
    (EmotionName::Neutral, 0.68),
    (EmotionName::Afraid, 0.87),
    (EmotionName::Sadness, 0.86),
    (EmotionName::Nervous, 0.65),
];

/// Reported name-set accuracy gain over non-fuzzy methods, percentage points.
pub const ACCURACY_GAIN_POINTS: (f64, f64) = (3.0, 5.0);

/// Reported range of the level false-positive rate, percent.
pub const LEVEL_FPR_PERCENT: (f64, f64) = (0.0, 16.7);

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shares_are_consistent() {
        assert_eq!(MEN_SHARE_PERCENT + WOMEN_SHARE_PERCENT, 100.0);
        let origin: f64 = ORIGIN_PERCENT.iter().map(|r| r.1).sum();
        let residence: f64 = RESIDENCE_PERCENT.iter().map(|r| r.1).sum();
        assert!(origin < 100.0 && residence < 100.0);
    }

    #[test]
    fn emotions_resolve() {
        assert!(STRONGEST_EMOTION.0.is_reportable());
        assert!(crate::emotion::parse_emotion(WEAKEST_EMOTION.0).is_err());
        assert!(!CONFUSION_DIAGONAL[0].0.is_reportable());
        assert!(CONFUSION_DIAGONAL.iter().all(|(_, v)| (0.0..=1.0).contains(v)));
    }
}
