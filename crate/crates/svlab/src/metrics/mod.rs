//! Scoring: exact-match accuracy, n-gram fluency, gating, behavioral shift.

pub mod accuracy;
pub mod classifier;
pub mod gate;
pub mod ngram;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SvError};
use crate::tasks::{ShiftRule, TaskSpec};

pub use accuracy::{containment_match, first_word_match, MatchRule};
pub use classifier::{
    ClassifierOutput, ClassifierRegistry, Label, Lexicon, LexiconClassifier, TextClassifier,
};
pub use gate::{gated_accuracy, is_gradable, GateSummary, GE_GATE_THRESHOLD};
pub use ngram::{dist_n, generation_entropy, ngram_entropy, GeWeights};

/// One graded model output.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenerationRecord {
    pub query: String,
    pub expected: String,
    pub generated: String,
}

/// Whether one classified output counts as a successful shift under `rule`.
#[must_use]
pub fn shift_success(rule: ShiftRule, output: &ClassifierOutput) -> bool {
    match rule {
        ShiftRule::ConfidentNegativeFails => {
            !(output.label == Label::Negative && output.probability > 0.9)
        }
        ShiftRule::RequirePositive => output.label == Label::Positive,
    }
}

/// Fraction of generations whose classifier verdict satisfies the task's
/// shift rule. Every record counts; the fluency gate does not apply here.
///
/// # Errors
/// Input error for an empty record set; config errors when the task carries
/// no shift rule or no classifier is registered for it.
pub fn behavioral_shift(
    records: &[GenerationRecord],
    registry: &ClassifierRegistry,
    task: &TaskSpec,
) -> Result<f64> {
    if records.is_empty() {
        return Err(SvError::input(format!(
            "behavioral shift for task {:?} needs at least one record",
            task.name
        )));
    }
    let rule = task
        .shift_rule
        .ok_or_else(|| SvError::config(format!("task {:?} has no shift rule", task.name)))?;
    let classifier = registry.get(&task.name).ok_or_else(|| {
        SvError::config(format!("no classifier registered for task {:?}", task.name))
    })?;
    let successes = records
        .iter()
        .filter(|r| shift_success(rule, &classifier.classify(&r.generated)))
        .count();
    Ok(successes as f64 / records.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tasks::builtin_task;

    fn record(generated: &str) -> GenerationRecord {
        GenerationRecord {
            query: "q".to_string(),
            expected: "e".to_string(),
            generated: generated.to_string(),
        }
    }

    #[test]
    fn confident_negative_boundary_is_strict() {
        let cases = [
            (Label::Negative, 0.89, true),
            (Label::Negative, 0.9, true),
            (Label::Negative, 0.91, false),
            (Label::Positive, 0.99, true),
        ];
        for (label, probability, want) in cases {
            let out = ClassifierOutput { label, probability };
            assert_eq!(
                shift_success(ShiftRule::ConfidentNegativeFails, &out),
                want,
                "{label:?} @ {probability}"
            );
        }
    }

    #[test]
    fn require_positive_ignores_confidence() {
        let negative = ClassifierOutput {
            label: Label::Negative,
            probability: 0.51,
        };
        let positive = ClassifierOutput {
            label: Label::Positive,
            probability: 0.5,
        };
        assert!(!shift_success(ShiftRule::RequirePositive, &negative));
        assert!(shift_success(ShiftRule::RequirePositive, &positive));
    }

    #[test]
    fn behavioral_shift_counts_every_record() {
        let task = builtin_task("detox-marker").unwrap();
        let registry = ClassifierRegistry::builtin().unwrap();
        let records = vec![
            // Two negative markers: confidently negative, fails.
            record("the waiter seemed awful and hostile this monday"),
            // One negative marker: exactly 0.9, not strictly above, passes.
            record("the waiter seemed awful but fair this monday"),
            // Marker-free text passes.
            record("the waiter seemed busy this monday"),
            // Positive markers pass.
            record("the waiter seemed courteous and considerate this monday"),
        ];
        let shift = behavioral_shift(&records, &registry, &task).unwrap();
        assert!((shift - 0.75).abs() < 1e-12);

        // Order invariance.
        let mut reversed = records.clone();
        reversed.reverse();
        let shift_rev = behavioral_shift(&reversed, &registry, &task).unwrap();
        assert_eq!(shift, shift_rev);
    }

    #[test]
    fn behavioral_shift_error_paths() {
        let registry = ClassifierRegistry::builtin().unwrap();
        let detox = builtin_task("detox-marker").unwrap();
        assert!(matches!(
            behavioral_shift(&[], &registry, &detox),
            Err(SvError::Input(_))
        ));
        let functional = builtin_task("antonym").unwrap();
        assert!(matches!(
            behavioral_shift(&[record("small")], &registry, &functional),
            Err(SvError::Config(_))
        ));
        let empty_registry = ClassifierRegistry::new();
        assert!(matches!(
            behavioral_shift(&[record("fine")], &empty_registry, &detox),
            Err(SvError::Config(_))
        ));
    }
}
