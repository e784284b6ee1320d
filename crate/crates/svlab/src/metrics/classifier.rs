//! Marker-lexicon text classification for behavioral metrics.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SvError};
use crate::tasks::{detox_markers, sentiment_markers};

/// Marker word lists; a word may appear on only one side.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Lexicon {
    pub positive: Vec<String>,
    pub negative: Vec<String>,
}

impl Lexicon {
    /// Checks both sides are nonempty and disjoint.
    ///
    /// # Errors
    /// Validation error listing empty sides and any word on both sides.
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if self.positive.is_empty() {
            problems.push("positive marker list is empty".to_string());
        }
        if self.negative.is_empty() {
            problems.push("negative marker list is empty".to_string());
        }
        for word in &self.positive {
            if self.negative.contains(word) {
                problems.push(format!("marker {word:?} appears on both sides"));
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(SvError::Validation(problems))
        }
    }

    /// Loads a `{"positive": [...], "negative": [...]}` JSON file.
    ///
    /// # Errors
    /// I/O and JSON errors, plus validation failures.
    pub fn load(path: &Path) -> Result<Self> {
        let raw = fs::read_to_string(path)?;
        let lexicon: Lexicon = serde_json::from_str(&raw)?;
        lexicon.validate()?;
        Ok(lexicon)
    }
}

/// Classifier verdict classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Label {
    Positive,
    Negative,
}

/// A classifier verdict: the predicted label and its probability (always at
/// least one half; ties go to positive).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifierOutput {
    pub label: Label,
    pub probability: f64,
}

/// Anything that labels a text positive or negative with a confidence.
pub trait TextClassifier: Send + Sync {
    fn classify(&self, text: &str) -> ClassifierOutput;
}

/// Logistic marker counter: with `net` the positive-minus-negative marker
/// count, the positive-class probability is `sigmoid(ln(9) · net)`, so one
/// net marker pins the predicted label's probability at exactly 0.9.
#[derive(Debug, Clone)]
pub struct LexiconClassifier {
    lexicon: Lexicon,
}

impl LexiconClassifier {
    /// # Errors
    /// Propagates lexicon validation failures.
    pub fn new(lexicon: Lexicon) -> Result<Self> {
        lexicon.validate()?;
        Ok(LexiconClassifier { lexicon })
    }
}

impl TextClassifier for LexiconClassifier {
    fn classify(&self, text: &str) -> ClassifierOutput {
        let mut net: i32 = 0;
        for token in text.split_whitespace() {
            let word = token.trim_matches(|c: char| c.is_ascii_punctuation());
            if self.lexicon.positive.iter().any(|m| m == word) {
                net += 1;
            } else if self.lexicon.negative.iter().any(|m| m == word) {
                net -= 1;
            }
        }
        // sigmoid(ln(9)·net) written as odds 9^net / (9^net + 1); computing
        // through the odds keeps one-net-marker probabilities at exactly 0.9.
        let label = if net >= 0 { Label::Positive } else { Label::Negative };
        let odds = 9.0_f64.powi(net.abs().min(100));
        let probability = odds / (odds + 1.0);
        ClassifierOutput { label, probability }
    }
}

/// Task-name-keyed classifier lookup.
pub struct ClassifierRegistry {
    by_task: HashMap<String, Box<dyn TextClassifier>>,
}

impl ClassifierRegistry {
    #[must_use]
    pub fn new() -> Self {
        ClassifierRegistry {
            by_task: HashMap::new(),
        }
    }

    /// Registry covering the bundled behavioral tasks.
    ///
    /// # Errors
    /// Propagates lexicon validation failures (not expected for bundled data).
    pub fn builtin() -> Result<Self> {
        let mut registry = ClassifierRegistry::new();
        let (positive, negative) = detox_markers();
        registry.insert(
            "detox-marker",
            Box::new(LexiconClassifier::new(Lexicon { positive, negative })?),
        );
        let (positive, negative) = sentiment_markers();
        registry.insert(
            "sentiment-marker",
            Box::new(LexiconClassifier::new(Lexicon { positive, negative })?),
        );
        Ok(registry)
    }

    pub fn insert(&mut self, task: &str, classifier: Box<dyn TextClassifier>) {
        self.by_task.insert(task.to_string(), classifier);
    }

    #[must_use]
    pub fn get(&self, task: &str) -> Option<&dyn TextClassifier> {
        self.by_task.get(task).map(Box::as_ref)
    }
}

impl Default for ClassifierRegistry {
    fn default() -> Self {
        ClassifierRegistry::new()
    }
}
