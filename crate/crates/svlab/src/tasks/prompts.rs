//! Prompt construction: zero-shot, few-shot, shuffled-label, natural-text.
//!
//! Formats are byte-exact contracts used by extraction, training, and
//! evaluation alike. A demonstration block renders as `"Q: {x}\n A: {y}\n\n"`
//! (note the space before `A:`) while the trailing query renders as
//! `"Q: {query}\nA:"`; the model answers after the final colon.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SvError};
use crate::tasks::spec::{TaskPair, TaskSpec};

// ------------------------------------------------------------------
// Prompt styles
// ------------------------------------------------------------------

/// The prompt families evaluations run over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PromptKind {
    ZeroShot,
    FewShot,
    ShuffledFewShot,
    NaturalText,
}

/// A fully specified prompt style: the family plus its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptStyle {
    pub kind: PromptKind,
    /// Demonstration count; zero for zero-shot and natural-text prompts.
    #[serde(default)]
    pub n_shots: usize,
    /// Which natural template to use; ignored by the other kinds.
    #[serde(default)]
    pub template_index: usize,
}

impl PromptStyle {
    #[must_use]
    pub fn zero_shot() -> Self {
        PromptStyle {
            kind: PromptKind::ZeroShot,
            n_shots: 0,
            template_index: 0,
        }
    }

    #[must_use]
    pub fn few_shot(n_shots: usize) -> Self {
        PromptStyle {
            kind: PromptKind::FewShot,
            n_shots,
            template_index: 0,
        }
    }

    #[must_use]
    pub fn shuffled(n_shots: usize) -> Self {
        PromptStyle {
            kind: PromptKind::ShuffledFewShot,
            n_shots,
            template_index: 0,
        }
    }

    #[must_use]
    pub fn natural(template_index: usize) -> Self {
        PromptStyle {
            kind: PromptKind::NaturalText,
            n_shots: 0,
            template_index,
        }
    }

    /// Checks the shot count matches the kind.
    ///
    /// # Errors
    /// Input error when a few-shot kind has zero shots or a shot-free kind
    /// has a nonzero count.
    pub fn validate(&self) -> Result<()> {
        let needs_shots = matches!(self.kind, PromptKind::FewShot | PromptKind::ShuffledFewShot);
        if needs_shots && self.n_shots == 0 {
            return Err(SvError::input("few-shot prompt style needs n_shots >= 1"));
        }
        if !needs_shots && self.n_shots != 0 {
            return Err(SvError::input(
                "zero-shot and natural-text styles take no demonstrations",
            ));
        }
        Ok(())
    }
}

// ------------------------------------------------------------------
// Builders
// ------------------------------------------------------------------

/// `"Q: {query}\nA:"`.
///
/// # Errors
/// Input error on an empty query.
pub fn build_zero_shot(query: &str) -> Result<String> {
    if query.is_empty() {
        return Err(SvError::input("zero-shot query is empty"));
    }
    Ok(format!("Q: {query}\nA:"))
}

/// Demonstration blocks followed by the zero-shot tail:
/// `"Q: {x}\n A: {y}\n\n" * demos + "Q: {query}\nA:"`.
///
/// # Errors
/// Input error when `demos` is empty or the query is empty.
pub fn build_few_shot(demos: &[TaskPair], query: &str) -> Result<String> {
    if demos.is_empty() {
        return Err(SvError::input("few-shot prompt needs at least one demo"));
    }
    let mut prompt = String::new();
    for demo in demos {
        prompt.push_str(&format!("Q: {}\n A: {}\n\n", demo.input, demo.output));
    }
    prompt.push_str(&build_zero_shot(query)?);
    Ok(prompt)
}

/// Reassigns demo outputs by a uniformly drawn non-identity permutation,
/// preserving the output multiset while breaking every input/output link it
/// can. Identity draws are rejected and re-sampled.
///
/// # Errors
/// Input error when fewer than two demos are given (no non-identity
/// permutation exists for one demo).
pub fn shuffle_labels<R: Rng>(demos: &[TaskPair], rng: &mut R) -> Result<Vec<TaskPair>> {
    if demos.len() < 2 {
        return Err(SvError::input(
            "label shuffling needs at least two demos to derange",
        ));
    }
    let mut perm: Vec<usize> = (0..demos.len()).collect();
    loop {
        perm.shuffle(rng);
        if perm.iter().enumerate().any(|(i, &p)| i != p) {
            break;
        }
    }
    Ok(demos
        .iter()
        .zip(&perm)
        .map(|(demo, &p)| TaskPair::new(demo.input.clone(), demos[p].output.clone()))
        .collect())
}

/// Instantiates one of the task's natural-text templates with the query.
///
/// # Errors
/// Config error when the task has no template at `template_index`.
pub fn build_natural(task: &TaskSpec, template_index: usize, query: &str) -> Result<String> {
    let template = task.natural_templates.get(template_index).ok_or_else(|| {
        SvError::config(format!(
            "task {:?} has no natural template {template_index} ({} available)",
            task.name,
            task.natural_templates.len()
        ))
    })?;
    Ok(template.replacen("{q}", query, 1))
}
