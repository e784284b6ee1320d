//! Fluency gating: scoring only outputs fluent enough to grade.

use serde::{Deserialize, Serialize};

use super::accuracy::MatchRule;
use super::ngram::{generation_entropy, GeWeights};
use super::GenerationRecord;

/// A generation is gradable only when its weighted entropy strictly exceeds
/// this threshold; degenerate loops score at or below it.
pub const GE_GATE_THRESHOLD: f64 = 2.0;

/// Whether `text` is fluent enough for its accuracy to count.
#[must_use]
pub fn is_gradable(text: &str, weights: &GeWeights) -> bool {
    generation_entropy(text, weights) > GE_GATE_THRESHOLD
}

/// Counts of gradable vs total generations for one evaluation cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateSummary {
    pub gradable: usize,
    pub total: usize,
}

impl GateSummary {
    /// Tallies records whose generation passes the fluency gate.
    #[must_use]
    pub fn from_records(records: &[GenerationRecord], weights: &GeWeights) -> Self {
        let gradable = records
            .iter()
            .filter(|r| is_gradable(&r.generated, weights))
            .count();
        GateSummary {
            gradable,
            total: records.len(),
        }
    }

    /// A cell is admissible when at least 60% of its generations are
    /// gradable. Compared in integers so the boundary is exact.
    #[must_use]
    pub fn admissible(&self) -> bool {
        self.gradable * 5 >= self.total * 3
    }

    /// Gradable fraction, `None` for an empty cell.
    #[must_use]
    pub fn fraction(&self) -> Option<f64> {
        if self.total == 0 {
            None
        } else {
            Some(self.gradable as f64 / self.total as f64)
        }
    }
}

/// Accuracy over the gradable records only; `None` when nothing passes the
/// gate (distinct from an accuracy of zero).
#[must_use]
pub fn gated_accuracy(
    records: &[GenerationRecord],
    rule: MatchRule,
    weights: &GeWeights,
) -> Option<f64> {
    let gradable: Vec<&GenerationRecord> = records
        .iter()
        .filter(|r| is_gradable(&r.generated, weights))
        .collect();
    if gradable.is_empty() {
        return None;
    }
    let hits = gradable
        .iter()
        .filter(|r| rule.matches(&r.generated, &r.expected))
        .count();
    Some(hits as f64 / gradable.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn record(generated: &str, expected: &str) -> GenerationRecord {
        GenerationRecord {
            query: "q".to_string(),
            expected: expected.to_string(),
            generated: generated.to_string(),
        }
    }

    // Eight distinct tokens: H2 = log2(7) ≈ 2.807, H3 = log2(6) ≈ 2.585,
    // GE ≈ 2.696 > 2.0. A two-token loop keeps GE at 0.98548 < 2.0.
    const FLUENT: &str = "the cat sat on the mat quietly today";
    const LOOPY: &str = "a b a b a b";

    #[test]
    fn gate_threshold_splits_fluent_from_loops() {
        let weights = GeWeights::default();
        assert!(is_gradable(FLUENT, &weights));
        assert!(!is_gradable(LOOPY, &weights));
        assert!(!is_gradable("", &weights));
    }

    #[test]
    fn admissibility_boundary_is_exact() {
        // 59 gradable of 100: 295 < 300, inadmissible.
        let at_59 = GateSummary {
            gradable: 59,
            total: 100,
        };
        assert!(!at_59.admissible());
        // 60 of 100: 300 >= 300, admissible.
        let at_60 = GateSummary {
            gradable: 60,
            total: 100,
        };
        assert!(at_60.admissible());
        // 3 of 5 is exactly the boundary too.
        let at_3_of_5 = GateSummary {
            gradable: 3,
            total: 5,
        };
        assert!(at_3_of_5.admissible());
        let empty = GateSummary {
            gradable: 0,
            total: 0,
        };
        assert!(empty.admissible());
        assert_eq!(empty.fraction(), None);
    }

    #[test]
    fn gated_accuracy_ignores_ungraded_records() {
        let weights = GeWeights::default();
        let records = vec![
            record("mat is where the cat sat down today", "mat"),
            record("dog ran far from the old gray house", "mat"),
            record(LOOPY, "a"),
        ];
        // Two gradable records, one containment hit.
        let acc = gated_accuracy(&records, MatchRule::Containment, &weights).unwrap();
        assert!((acc - 0.5).abs() < 1e-12);
        let summary = GateSummary::from_records(&records, &weights);
        assert_eq!(summary.gradable, 2);
        assert_eq!(summary.total, 3);

        let all_loopy = vec![record(LOOPY, "a"), record("x x x x x x", "x")];
        assert_eq!(
            gated_accuracy(&all_loopy, MatchRule::Containment, &weights),
            None
        );
    }

    proptest! {
        // Adding an ungradable record never changes gated accuracy, and
        // adding a gradable record moves the summary monotonically.
        #[test]
        fn gate_monotonicity(hit_flags in proptest::collection::vec(any::<bool>(), 1..20)) {
            let weights = GeWeights::default();
            let mut records: Vec<GenerationRecord> = hit_flags
                .iter()
                .map(|&hit| {
                    if hit {
                        record("mat is where the cat sat down today", "mat")
                    } else {
                        record("dog ran far from the old gray house", "mat")
                    }
                })
                .collect();
            let before = gated_accuracy(&records, MatchRule::Containment, &weights);
            let summary_before = GateSummary::from_records(&records, &weights);
            records.push(record(LOOPY, "mat"));
            let after = gated_accuracy(&records, MatchRule::Containment, &weights);
            let summary_after = GateSummary::from_records(&records, &weights);
            prop_assert_eq!(before, after);
            prop_assert_eq!(summary_before.gradable, summary_after.gradable);
            prop_assert_eq!(summary_before.total + 1, summary_after.total);
        }
    }
}
