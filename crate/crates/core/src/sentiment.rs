//! Polarity of player-authored texts.
//!
//! [`Classifier`] is the plug-in point; [`LexiconClassifier`] is the bundled
//! deterministic baseline that counts hits in a positive and a negative word
//! list.

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use chrono::Duration;
use serde::{Deserialize, Serialize};

use crate::ids::PlayerId;
use crate::model::Timestamp;

/// Half-width of the neutral band around 0.
pub const NEUTRAL_BAND: f64 = 0.1;

/// Days covered by [`SentimentLog::rolling_polarity`].
pub const ROLLING_WINDOW_DAYS: i64 = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Polarity {
    Positive,
    Negative,
    Neutral,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarityResult {
    pub label: Polarity,
    pub score: f64,
}

impl PolarityResult {
    /// Clamps `score` into `[-1, 1]` and derives the label from it.
    pub fn from_score(score: f64) -> Self {
        let score = if score.is_nan() { 0.0 } else { score.clamp(-1.0, 1.0) };
        let label = if score > NEUTRAL_BAND {
            Polarity::Positive
        } else if score < -NEUTRAL_BAND {
            Polarity::Negative
        } else {
            Polarity::Neutral
        };
        Self { label, score }
    }
}

pub trait Classifier: Send + Sync {
    fn name(&self) -> &str;
    fn classify(&self, text: &str) -> PolarityResult;
}

#[derive(Debug, Clone, PartialEq)]
pub struct LexiconClassifier {
    positive: BTreeSet<String>,
    negative: BTreeSet<String>,
}

const BUNDLED_POSITIVE: &str = include_str!("../data/positive.txt");
const BUNDLED_NEGATIVE: &str = include_str!("../data/negative.txt");

fn words(list: &str) -> BTreeSet<String> {
    list.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_lowercase)
        .collect()
}

/// Lowercased runs of letters.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphabetic())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

impl LexiconClassifier {
    /// Builds a classifier from two lexicons, one word per line.
    pub fn from_lists(positive: &str, negative: &str) -> Self {
        Self {
            positive: words(positive),
            negative: words(negative),
        }
    }

    pub fn bundled() -> Self {
        Self::from_lists(BUNDLED_POSITIVE, BUNDLED_NEGATIVE)
    }
}

impl Default for LexiconClassifier {
    fn default() -> Self {
        Self::bundled()
    }
}

impl Classifier for LexiconClassifier {
    fn name(&self) -> &str {
        "lexicon"
    }

    /// `(P − N) / max(1, P + N)` over lexicon hits.
    fn classify(&self, text: &str) -> PolarityResult {
        let (mut pos, mut neg) = (0u32, 0u32);
        for token in tokenize(text) {
            if self.positive.contains(&token) {
                pos += 1;
            }
            if self.negative.contains(&token) {
                neg += 1;
            }
        }
        let score = (f64::from(pos) - f64::from(neg)) / f64::from((pos + neg).max(1));
        PolarityResult::from_score(score)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ClassifiedText {
    pub player_id: PlayerId,
    pub text: String,
    pub result: PolarityResult,
    pub at: Timestamp,
}

/// Append-only log of classified texts.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SentimentLog {
    texts: Vec<ClassifiedText>,
}

impl SentimentLog {
    pub fn record(&mut self, classifier: &dyn Classifier, player: &PlayerId, text: &str, at: Timestamp) -> PolarityResult {
        let result = classifier.classify(text);
        self.texts.push(ClassifiedText {
            player_id: player.clone(),
            text: text.to_string(),
            result,
            at,
        });
        result
    }

    pub fn texts_of<'a>(&'a self, player: &'a str) -> impl Iterator<Item = &'a ClassifiedText> + 'a {
        self.texts.iter().filter(move |t| t.player_id.as_str() == player)
    }

    /// Mean score of the player's texts in `(now − 5 days, now]`; 0 if none.
    pub fn rolling_polarity(&self, player: &str, now: Timestamp) -> f64 {
        let since = now - Duration::days(ROLLING_WINDOW_DAYS);
        let (sum, count) = self
            .texts_of(player)
            .filter(|t| t.at > since && t.at <= now)
            .fold((0.0, 0u32), |(s, c), t| (s + t.result.score, c + 1));
        if count == 0 {
            0.0
        } else {
            sum / f64::from(count)
        }
    }
}
