//! Task definitions: input/output pairs, categories, splits, templates.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SvError};
use crate::rng::{derive_rng, name_tag};

/// Functional tasks map inputs to checkable outputs; behavioral tasks pair a
/// negative-style sentence with a positive-style rewrite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TaskCategory {
    Functional,
    Behavioral,
}

/// How a behavioral generation counts as a success.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShiftRule {
    /// Success unless the classifier labels the generation negative-class
    /// with probability strictly above 0.9 (detox-style safety rule).
    ConfidentNegativeFails,
    /// Success iff the classifier labels the generation positive-class.
    RequirePositive,
}

/// One task example.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskPair {
    pub input: String,
    pub output: String,
}

impl TaskPair {
    pub fn new(input: impl Into<String>, output: impl Into<String>) -> Self {
        TaskPair {
            input: input.into(),
            output: output.into(),
        }
    }
}

/// Disjoint train/test index sets over a task's pair list.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Splits {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Which side of the split an operation draws from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Split {
    Train,
    Test,
}

/// The default 80/20 split, shuffled by a stream derived from the task name
/// so the same dataset always splits the same way.
#[must_use]
pub fn default_splits(n_pairs: usize, task_name: &str) -> Splits {
    use rand::seq::SliceRandom;
    let mut indices: Vec<usize> = (0..n_pairs).collect();
    let mut rng = derive_rng(name_tag(task_name), &[name_tag("splits")]);
    indices.shuffle(&mut rng);
    let n_train = n_pairs * 4 / 5;
    let test = indices.split_off(n_train);
    Splits {
        train: indices,
        test,
    }
}

/// A complete task: examples, split, templates, and category metadata.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskSpec {
    pub name: String,
    pub category: TaskCategory,
    pub pairs: Vec<TaskPair>,
    pub splits: Splits,
    /// Natural-text prompt templates, each with exactly one `{q}` slot.
    pub natural_templates: Vec<String>,
    /// Success rule for behavioral tasks; `None` for functional ones.
    pub shift_rule: Option<ShiftRule>,
}

impl TaskSpec {
    /// Functional task with default splits and validation.
    ///
    /// # Errors
    /// Returns the validation failures of [`TaskSpec::validate`].
    pub fn functional(
        name: impl Into<String>,
        pairs: Vec<TaskPair>,
        natural_templates: Vec<String>,
    ) -> Result<Self> {
        let name = name.into();
        let splits = default_splits(pairs.len(), &name);
        let spec = TaskSpec {
            name,
            category: TaskCategory::Functional,
            pairs,
            splits,
            natural_templates,
            shift_rule: None,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Behavioral task with default splits and validation.
    ///
    /// # Errors
    /// Returns the validation failures of [`TaskSpec::validate`].
    pub fn behavioral(
        name: impl Into<String>,
        pairs: Vec<TaskPair>,
        shift_rule: ShiftRule,
    ) -> Result<Self> {
        let name = name.into();
        let splits = default_splits(pairs.len(), &name);
        let spec = TaskSpec {
            name,
            category: TaskCategory::Behavioral,
            pairs,
            splits,
            natural_templates: Vec::new(),
            shift_rule: Some(shift_rule),
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Checks every structural invariant, collecting all offenders.
    ///
    /// # Errors
    /// A validation error listing each problem: empty/duplicate inputs, empty
    /// outputs, multi-word functional outputs, overlapping or out-of-range
    /// splits, templates without exactly one `{q}` slot, and a missing or
    /// spurious shift rule.
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if self.name.is_empty() {
            problems.push("task name is empty".to_string());
        }
        if self.pairs.is_empty() {
            problems.push("task has no pairs".to_string());
        }
        let mut seen: HashMap<&str, usize> = HashMap::new();
        for (i, pair) in self.pairs.iter().enumerate() {
            if pair.input.is_empty() {
                problems.push(format!("pair {i}: empty input"));
            }
            if pair.output.is_empty() {
                problems.push(format!("pair {i}: empty output"));
            }
            if let Some(&first) = seen.get(pair.input.as_str()) {
                problems.push(format!(
                    "duplicate input {:?} (pairs {first} and {i})",
                    pair.input
                ));
            } else {
                seen.insert(&pair.input, i);
            }
            if self.category == TaskCategory::Functional
                && pair.output.chars().any(char::is_whitespace)
            {
                problems.push(format!(
                    "pair {i}: functional output {:?} is not a single word",
                    pair.output
                ));
            }
        }
        for (which, indices) in [("train", &self.splits.train), ("test", &self.splits.test)] {
            for &idx in indices {
                if idx >= self.pairs.len() {
                    problems.push(format!("{which} split index {idx} out of range"));
                }
            }
        }
        for &t in &self.splits.train {
            if self.splits.test.contains(&t) {
                problems.push(format!("splits overlap at index {t}"));
            }
        }
        for (i, template) in self.natural_templates.iter().enumerate() {
            if template.matches("{q}").count() != 1 {
                problems.push(format!(
                    "template {i} must contain exactly one {{q}} slot: {template:?}"
                ));
            }
        }
        match (self.category, self.shift_rule) {
            (TaskCategory::Behavioral, None) => {
                problems.push("behavioral task needs a shift rule".to_string());
            }
            (TaskCategory::Functional, Some(_)) => {
                problems.push("functional task must not carry a shift rule".to_string());
            }
            _ => {}
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(SvError::Validation(problems))
        }
    }

    /// Index set of one split side.
    #[must_use]
    pub fn split_indices(&self, split: Split) -> &[usize] {
        match split {
            Split::Train => &self.splits.train,
            Split::Test => &self.splits.test,
        }
    }

    /// The pairs of one split side, in split order.
    #[must_use]
    pub fn split_pairs(&self, split: Split) -> Vec<&TaskPair> {
        self.split_indices(split)
            .iter()
            .map(|&i| &self.pairs[i])
            .collect()
    }
}

/// Loads a functional task from a JSON-lines file of
/// `{"input": ..., "output": ...}` records. The task is named after the file
/// stem and gets default splits and no templates.
///
/// # Errors
/// Input error naming the line for malformed records; validation errors for
/// duplicate inputs or empty outputs.
pub fn load_task(path: &Path) -> Result<TaskSpec> {
    let raw = fs::read_to_string(path)?;
    let mut pairs = Vec::new();
    for (i, line) in raw.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let pair: TaskPair = serde_json::from_str(line)
            .map_err(|e| SvError::Input(format!("{}:{}: {e}", path.display(), i + 1)))?;
        pairs.push(pair);
    }
    let name = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("task")
        .to_string();
    TaskSpec::functional(name, pairs, Vec::new())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pairs(data: &[(&str, &str)]) -> Vec<TaskPair> {
        data.iter().map(|&(a, b)| TaskPair::new(a, b)).collect()
    }

    #[test]
    fn functional_task_validates() {
        let task = TaskSpec::functional(
            "demo",
            pairs(&[("big", "small"), ("hot", "cold")]),
            vec!["the opposite of {q} is".into()],
        )
        .unwrap();
        assert_eq!(task.pairs.len(), 2);
        assert_eq!(task.splits.train.len() + task.splits.test.len(), 2);
    }

    #[test]
    fn duplicate_inputs_listed() {
        let err = TaskSpec::functional("dup", pairs(&[("a", "x"), ("a", "y")]), vec![]);
        match err {
            Err(SvError::Validation(problems)) => {
                assert!(problems.iter().any(|p| p.contains("duplicate input")), "{problems:?}");
            }
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn empty_output_and_multiword_output_listed() {
        let err = TaskSpec::functional("bad", pairs(&[("a", ""), ("b", "two words")]), vec![]);
        match err {
            Err(SvError::Validation(problems)) => {
                assert!(problems.iter().any(|p| p.contains("empty output")));
                assert!(problems.iter().any(|p| p.contains("not a single word")));
            }
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn slotless_template_rejected() {
        let err = TaskSpec::functional(
            "slotless",
            pairs(&[("a", "b")]),
            vec!["no slot here".into()],
        );
        assert!(matches!(err, Err(SvError::Validation(_))));
        let err = TaskSpec::functional(
            "twoslots",
            pairs(&[("a", "b")]),
            vec!["{q} and {q}".into()],
        );
        assert!(matches!(err, Err(SvError::Validation(_))));
    }

    #[test]
    fn behavioral_requires_shift_rule() {
        let mut task = TaskSpec::behavioral(
            "beh",
            pairs(&[("bad words here", "good words here")]),
            ShiftRule::ConfidentNegativeFails,
        )
        .unwrap();
        task.shift_rule = None;
        assert!(task.validate().is_err());
    }

    #[test]
    fn splits_are_deterministic_and_disjoint() {
        let a = default_splits(100, "some-task");
        let b = default_splits(100, "some-task");
        assert_eq!(a, b);
        assert_eq!(a.train.len(), 80);
        assert_eq!(a.test.len(), 20);
        for idx in &a.train {
            assert!(!a.test.contains(idx));
        }
        let c = default_splits(100, "other-task");
        assert_ne!(a, c);
    }

    #[test]
    fn load_task_reports_line_numbers() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("mini.jsonl");
        std::fs::write(&path, "{\"input\":\"a\",\"output\":\"b\"}\nbroken\n").unwrap();
        match load_task(&path) {
            Err(SvError::Input(msg)) => assert!(msg.contains(":2:"), "{msg}"),
            other => panic!("expected input error, got {other:?}"),
        }
    }

    #[test]
    fn load_task_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("mini.jsonl");
        std::fs::write(
            &path,
            "{\"input\":\"big\",\"output\":\"small\"}\n{\"input\":\"hot\",\"output\":\"cold\"}\n",
        )
        .unwrap();
        let task = load_task(&path).unwrap();
        assert_eq!(task.name, "mini");
        assert_eq!(task.category, TaskCategory::Functional);
        assert_eq!(task.pairs.len(), 2);
    }
}
