//! Triangular level memberships and centroid defuzzification.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::emotion::{EmotionError, EmotionName, EmotionProfile, Level, LevelClass, LEVEL_CLASSES, MAX_LEVEL};

const SUM_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FuzzyError {
    #[error("invalid membership {weights:?}: {reason}")]
    InvalidMembership { weights: [f64; LEVEL_CLASSES], reason: &'static str },
    #[error(transparent)]
    Emotion(#[from] EmotionError),
}

/// Degrees of membership in the five level classes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "[f64; LEVEL_CLASSES]", try_from = "[f64; LEVEL_CLASSES]")]
pub struct Membership([f64; LEVEL_CLASSES]);

impl Membership {
    /// Accepts any non-negative weights summing to one.
    pub fn new(weights: [f64; LEVEL_CLASSES]) -> Result<Membership, FuzzyError> {
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(FuzzyError::InvalidMembership { weights, reason: "weights must be finite and non-negative" });
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(FuzzyError::InvalidMembership { weights, reason: "weights must sum to 1" });
        }
        Ok(Membership(weights))
    }

    /// All mass on one class.
    pub fn crisp(class: LevelClass) -> Membership {
        let mut w = [0.0; LEVEL_CLASSES];
        w[class.index()] = 1.0;
        Membership(w)
    }

    pub fn uniform() -> Membership {
        Membership([1.0 / LEVEL_CLASSES as f64; LEVEL_CLASSES])
    }

    pub fn weights(&self) -> &[f64; LEVEL_CLASSES] {
        &self.0
    }

    /// Highest-weight class; ties go to the lower class.
    pub fn argmax(&self) -> LevelClass {
        let mut best = 0;
        for c in 1..LEVEL_CLASSES {
            if self.0[c] > self.0[best] {
                best = c;
            }
        }
        LevelClass::ALL[best]
    }
}

impl From<Membership> for [f64; LEVEL_CLASSES] {
    fn from(m: Membership) -> Self {
        m.0
    }
}

impl TryFrom<[f64; LEVEL_CLASSES]> for Membership {
    type Error = FuzzyError;

    fn try_from(weights: [f64; LEVEL_CLASSES]) -> Result<Self, Self::Error> {
        Membership::new(weights)
    }
}

pub fn fuzzify(level: Level) -> Membership {
    let x = level.value();
    let lower = x.floor() as usize;
    let frac = x - lower as f64;
    let mut w = [0.0; LEVEL_CLASSES];
    if lower >= LEVEL_CLASSES - 1 {
        w[LEVEL_CLASSES - 1] = 1.0;
    } else {
        w[lower] = 1.0 - frac;
        w[lower + 1] = frac;
    }
    Membership(w)
}

/// Centroid of the membership over class values 0..=4.
pub fn defuzzify(m: &Membership) -> Result<Level, FuzzyError> {
    let m = Membership::new(m.0)?;
    let centroid: f64 = m.0.iter().enumerate().map(|(c, w)| c as f64 * w).sum();
    Ok(Level::new(centroid.clamp(0.0, MAX_LEVEL))?)
}

pub fn fuzzify_profile(profile: &EmotionProfile) -> BTreeMap<EmotionName, Membership> {
    profile.iter().map(|(e, l)| (*e, fuzzify(*l))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cooccurrence::expected_profile;
    use crate::emotion::BasicEmotion;
    use proptest::prelude::*;

    fn lv(x: f64) -> Level {
        Level::new(x).unwrap()
    }

    #[test]
    fn fuzzify_examples() {
        assert_eq!(fuzzify(lv(2.0)).weights(), &[0.0, 0.0, 1.0, 0.0, 0.0]);
        assert_eq!(fuzzify(lv(2.5)).weights(), &[0.0, 0.0, 0.5, 0.5, 0.0]);
        assert_eq!(fuzzify(lv(0.0)).weights(), &[1.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(fuzzify(lv(4.0)).weights(), &[0.0, 0.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn defuzzify_examples() {
        let point = Membership::new([0.0, 0.0, 1.0, 0.0, 0.0]).unwrap();
        assert_eq!(defuzzify(&point).unwrap().value(), 2.0);
        let mid = Membership::new([0.0, 0.0, 0.5, 0.5, 0.0]).unwrap();
        assert_eq!(defuzzify(&mid).unwrap().value(), 2.5);
        let uniform = Membership::new([0.2; 5]).unwrap();
        assert!((defuzzify(&uniform).unwrap().value() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn invalid_membership_rejected() {
        assert!(Membership::new([0.5, 0.0, 0.0, 0.0, 0.0]).is_err());
        assert!(Membership::new([1.5, -0.5, 0.0, 0.0, 0.0]).is_err());
        assert!(defuzzify(&Membership([0.3, 0.3, 0.0, 0.0, 0.0])).is_err());
    }

    #[test]
    fn profile_examples() {
        let mut p = EmotionProfile::new();
        p.insert(EmotionName::Joy, lv(2.0));
        let f = fuzzify_profile(&p);
        assert_eq!(f[&EmotionName::Joy].weights(), &[0.0, 0.0, 1.0, 0.0, 0.0]);
        assert!(fuzzify_profile(&EmotionProfile::new()).is_empty());

        let row = expected_profile(BasicEmotion::Joy, lv(2.0)).unwrap();
        for (e, m) in fuzzify_profile(&row) {
            assert!((defuzzify(&m).unwrap().value() - row[&e].value()).abs() < 1e-12);
        }
    }

    #[test]
    fn argmax_ties_go_low() {
        assert_eq!(Membership::uniform().argmax().value(), 0);
        assert_eq!(Membership::new([0.0, 0.0, 0.5, 0.5, 0.0]).unwrap().argmax().value(), 2);
    }

    proptest! {
        #[test]
        fn round_trip_and_shape(x in 0.0f64..=4.0) {
            let m = fuzzify(lv(x));
            let sum: f64 = m.weights().iter().sum();
            prop_assert!((sum - 1.0).abs() < 1e-9);
            let nonzero: Vec<usize> = (0..5).filter(|c| m.weights()[*c] > 0.0).collect();
            prop_assert!(nonzero.len() <= 2);
            if nonzero.len() == 2 {
                prop_assert_eq!(nonzero[1], nonzero[0] + 1);
            }
            prop_assert!((defuzzify(&m).unwrap().value() - x).abs() < 1e-9);
        }

        #[test]
        fn monotone(x in 0.0f64..=4.0, y in 0.0f64..=4.0) {
            prop_assume!(x < y);
            let dx = defuzzify(&fuzzify(lv(x))).unwrap().value();
            let dy = defuzzify(&fuzzify(lv(y))).unwrap().value();
            prop_assert!(dx < dy);
        }
    }
}
