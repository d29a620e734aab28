//! Emotion taxonomy, intensity scale and self-report records.
//!
//! The model works with 27 reportable emotions (the 20 PANAS items plus the
//! seven basic emotions PANAS does not cover) rated on a 0..=4 scale, where 0
//! means the emotion is absent and 4 is its strongest level. `neutral` exists
//! only as an evaluation label and never appears in a self-report.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Highest value on the intensity scale.
pub const MAX_LEVEL: f64 = 4.0;

/// Number of discrete level classes (0, 1, 2, 3, 4).
pub const LEVEL_CLASSES: usize = 5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EmotionError {
    #[error("level {0} is outside [0, 4]")]
    LevelOutOfRange(f64),
    #[error("percentage {0} is outside [0, 100]")]
    PercentOutOfRange(f64),
    #[error("level class {0} is outside 0..=4")]
    ClassOutOfRange(i64),
    #[error("unknown emotion `{0}`")]
    UnknownEmotion(String),
    #[error("`{0}` is not a basic emotion")]
    NotBasic(EmotionName),
    #[error("`neutral` is only valid as an evaluation label")]
    NeutralNotReportable,
    #[error("unknown region `{0}`")]
    UnknownRegion(String),
    #[error("self-report is missing emotions: {}", join_names(.0))]
    MissingEmotions(Vec<EmotionName>),
    #[error("self-report has a negative timestamp {0}")]
    NegativeTimestamp(i64),
}

fn join_names(names: &[EmotionName]) -> String {
    names.iter().map(|n| n.as_str()).collect::<Vec<_>>().join(", ")
}

macro_rules! emotion_names {
    ($($variant:ident => $token:literal),+ $(,)?) => {
        /// An emotion label. The first 27 variants are reportable; `Neutral`
        /// is the evaluation-only "no emotion present" label.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub enum EmotionName {
            $($variant,)+
            Neutral,
        }

        impl EmotionName {
            /// The 27 reportable emotions, in questionnaire order.
            pub const REPORTABLE: [EmotionName; 27] = [$(EmotionName::$variant,)+];

            pub fn as_str(self) -> &'static str {
                match self {
                    $(EmotionName::$variant => $token,)+
                    EmotionName::Neutral => "neutral",
                }
            }

            fn from_token(token: &str) -> Option<EmotionName> {
                match token {
                    $($token => Some(EmotionName::$variant),)+
                    "neutral" => Some(EmotionName::Neutral),
                    _ => None,
                }
            }
        }
    };
}

emotion_names! {
    Joy => "joy",
    Surprise => "surprise",
    Excited => "excited",
    Enthusiastic => "enthusiastic",
    Inspired => "inspired",
    Active => "active",
    Anticipation => "anticipation",
    Fear => "fear",
    Upset => "upset",
    Proud => "proud",
    Nervous => "nervous",
    Afraid => "afraid",
    Anger => "anger",
    Acceptance => "acceptance",
    Strong => "strong",
    Irritable => "irritable",
    Determined => "determined",
    Disgust => "disgust",
    Interested => "interested",
    Guilty => "guilty",
    Alert => "alert",
    Attentive => "attentive",
    Sadness => "sadness",
    Distressed => "distressed",
    Hostile => "hostile",
    Ashamed => "ashamed",
    Jittery => "jittery",
}

impl EmotionName {
    pub fn is_reportable(self) -> bool {
        self != EmotionName::Neutral
    }

    pub fn basic(self) -> Option<BasicEmotion> {
        BasicEmotion::ALL.into_iter().find(|b| EmotionName::from(*b) == self)
    }
}

/// Case-insensitive parse over the 27 reportable names plus `neutral`.
pub fn parse_emotion(token: &str) -> Result<EmotionName, EmotionError> {
    let lowered = token.trim().to_ascii_lowercase();
    EmotionName::from_token(&lowered).ok_or_else(|| EmotionError::UnknownEmotion(token.to_string()))
}

/// Like [`parse_emotion`] but rejects `neutral`.
pub fn parse_reportable(token: &str) -> Result<EmotionName, EmotionError> {
    match parse_emotion(token)? {
        EmotionName::Neutral => Err(EmotionError::NeutralNotReportable),
        name => Ok(name),
    }
}

impl FromStr for EmotionName {
    type Err = EmotionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_emotion(s)
    }
}

impl fmt::Display for EmotionName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for EmotionName {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for EmotionName {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let token = String::deserialize(deserializer)?;
        parse_emotion(&token).map_err(serde::de::Error::custom)
    }
}

/// The eight basic emotions for which co-occurrence patterns were analysed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BasicEmotion {
    Joy,
    Anticipation,
    Anger,
    Disgust,
    Sadness,
    Surprise,
    Fear,
    Acceptance,
}

impl BasicEmotion {
    pub const ALL: [BasicEmotion; 8] = [
        BasicEmotion::Joy,
        BasicEmotion::Anticipation,
        BasicEmotion::Anger,
        BasicEmotion::Disgust,
        BasicEmotion::Sadness,
        BasicEmotion::Surprise,
        BasicEmotion::Fear,
        BasicEmotion::Acceptance,
    ];

    pub fn name(self) -> EmotionName {
        EmotionName::from(self)
    }

    pub fn as_str(self) -> &'static str {
        self.name().as_str()
    }
}

impl From<BasicEmotion> for EmotionName {
    fn from(b: BasicEmotion) -> Self {
        match b {
            BasicEmotion::Joy => EmotionName::Joy,
            BasicEmotion::Anticipation => EmotionName::Anticipation,
            BasicEmotion::Anger => EmotionName::Anger,
            BasicEmotion::Disgust => EmotionName::Disgust,
            BasicEmotion::Sadness => EmotionName::Sadness,
            BasicEmotion::Surprise => EmotionName::Surprise,
            BasicEmotion::Fear => EmotionName::Fear,
            BasicEmotion::Acceptance => EmotionName::Acceptance,
        }
    }
}

impl TryFrom<EmotionName> for BasicEmotion {
    type Error = EmotionError;

    fn try_from(name: EmotionName) -> Result<Self, Self::Error> {
        name.basic().ok_or(EmotionError::NotBasic(name))
    }
}

impl FromStr for BasicEmotion {
    type Err = EmotionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        BasicEmotion::try_from(parse_emotion(s)?)
    }
}

impl fmt::Display for BasicEmotion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for BasicEmotion {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for BasicEmotion {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let token = String::deserialize(deserializer)?;
        token.parse().map_err(serde::de::Error::custom)
    }
}

/// Continuous emotion intensity in `[0, 4]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct Level(f64);

impl Level {
    pub const ZERO: Level = Level(0.0);
    pub const MAX: Level = Level(MAX_LEVEL);

    pub fn new(value: f64) -> Result<Level, EmotionError> {
        if (0.0..=MAX_LEVEL).contains(&value) {
            Ok(Level(value))
        } else {
            Err(EmotionError::LevelOutOfRange(value))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl<'de> Deserialize<'de> for Level {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        Level::new(f64::deserialize(deserializer)?).map_err(serde::de::Error::custom)
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<LevelClass> for Level {
    fn from(c: LevelClass) -> Self {
        Level(c.0 as f64)
    }
}

/// Discrete intensity class, 0 (absent) to 4 (strongest).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct LevelClass(u8);

impl LevelClass {
    pub const ALL: [LevelClass; LEVEL_CLASSES] =
        [LevelClass(0), LevelClass(1), LevelClass(2), LevelClass(3), LevelClass(4)];

    pub fn new(value: i64) -> Result<LevelClass, EmotionError> {
        if (0..=4).contains(&value) {
            Ok(LevelClass(value as u8))
        } else {
            Err(EmotionError::ClassOutOfRange(value))
        }
    }

    pub fn value(self) -> u8 {
        self.0
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    /// Nearest class to a continuous level, halves rounding up.
    pub fn nearest(level: Level) -> LevelClass {
        LevelClass(level.value().round().clamp(0.0, MAX_LEVEL) as u8)
    }
}

impl<'de> Deserialize<'de> for LevelClass {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        LevelClass::new(i64::deserialize(deserializer)?).map_err(serde::de::Error::custom)
    }
}

impl fmt::Display for LevelClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Level expressed as a percentage of the scale maximum.
pub fn percent(level: Level) -> f64 {
    level.value() / MAX_LEVEL * 100.0
}

/// Checked variant of [`percent`] for raw numbers.
pub fn percent_of(value: f64) -> Result<f64, EmotionError> {
    Level::new(value).map(percent)
}

pub fn level_from_percent(p: f64) -> Result<Level, EmotionError> {
    if !(0.0..=100.0).contains(&p) {
        return Err(EmotionError::PercentOutOfRange(p));
    }
    Ok(Level((p / 100.0 * MAX_LEVEL).clamp(0.0, MAX_LEVEL)))
}

/// Estimated intensities of a set of emotions.
pub type EmotionProfile = BTreeMap<EmotionName, Level>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Region {
    Europe,
    MiddleEast,
    SouthEastAsia,
    EastAsia,
    Other,
}

impl Region {
    pub const ALL: [Region; 5] =
        [Region::Europe, Region::MiddleEast, Region::SouthEastAsia, Region::EastAsia, Region::Other];

    pub fn as_str(self) -> &'static str {
        match self {
            Region::Europe => "europe",
            Region::MiddleEast => "middle_east",
            Region::SouthEastAsia => "south_east_asia",
            Region::EastAsia => "east_asia",
            Region::Other => "other",
        }
    }
}

impl FromStr for Region {
    type Err = EmotionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let normalized: String = s
            .trim()
            .chars()
            .map(|c| if c == ' ' || c == '-' { '_' } else { c.to_ascii_lowercase() })
            .collect();
        Region::ALL
            .into_iter()
            .find(|r| r.as_str() == normalized)
            .ok_or_else(|| EmotionError::UnknownRegion(s.to_string()))
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for Region {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for Region {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let token = String::deserialize(deserializer)?;
        token.parse().map_err(serde::de::Error::custom)
    }
}

/// One experience-sampling answer: all 27 emotions rated 0..=4.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SelfReport {
    pub ts: u64,
    pub participant: String,
    pub region: Option<Region>,
    pub levels: BTreeMap<EmotionName, LevelClass>,
}

impl SelfReport {
    /// Builds a validated report.
    pub fn new(
        ts: u64,
        participant: impl Into<String>,
        region: Option<Region>,
        levels: BTreeMap<EmotionName, LevelClass>,
    ) -> Result<SelfReport, EmotionError> {
        let report = SelfReport { ts, participant: participant.into(), region, levels };
        report.validate()?;
        Ok(report)
    }

    /// A report with every emotion at 0.
    pub fn all_zero(ts: u64, participant: impl Into<String>, region: Option<Region>) -> SelfReport {
        let levels = EmotionName::REPORTABLE.iter().map(|e| (*e, LevelClass::ALL[0])).collect();
        SelfReport { ts, participant: participant.into(), region, levels }
    }

    pub fn validate(&self) -> Result<(), EmotionError> {
        if self.levels.contains_key(&EmotionName::Neutral) {
            return Err(EmotionError::NeutralNotReportable);
        }
        let missing: Vec<EmotionName> = EmotionName::REPORTABLE
            .iter()
            .copied()
            .filter(|e| !self.levels.contains_key(e))
            .collect();
        if !missing.is_empty() {
            return Err(EmotionError::MissingEmotions(missing));
        }
        Ok(())
    }

    pub fn level(&self, emotion: EmotionName) -> Option<LevelClass> {
        self.levels.get(&emotion).copied()
    }
}
