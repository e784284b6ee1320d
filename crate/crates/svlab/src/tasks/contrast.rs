//! Contrastive demonstration pairs for vector extraction.
//!
//! A contrast pair is a (negative, positive) string pair whose activation
//! difference carries the target behavior. Functional tasks usually wrap the
//! example in the question/answer format with a non-committal filler as the
//! negative side; behavioral tasks contrast the raw sentence pair.

use rand::seq::index::sample;
use rand::Rng;

use crate::error::{Result, SvError};
use crate::steering::ContrastPair;
use crate::tasks::spec::{Split, TaskSpec};

/// Non-committal filler completions for negative demonstrations, each one to
/// five words long.
pub const FILLER_PHRASES: [&str; 64] = [
    "quite so",
    "well then",
    "as it happens",
    "more or less",
    "so to speak",
    "in a way",
    "now and then",
    "fair enough",
    "be that as it may",
    "for the time being",
    "such is life",
    "come what may",
    "at any rate",
    "by and large",
    "all in good time",
    "so it goes",
    "who can say",
    "time will tell",
    "that remains to be seen",
    "one never knows",
    "hard to say",
    "as you like",
    "if you will",
    "in due course",
    "on the whole",
    "for what it is worth",
    "give or take",
    "here and there",
    "once in a while",
    "every so often",
    "sooner or later",
    "by all means",
    "as a rule",
    "in any case",
    "at first glance",
    "truth be told",
    "oddly enough",
    "funnily enough",
    "sure enough",
    "naturally",
    "indeed",
    "perhaps",
    "possibly",
    "presumably",
    "apparently",
    "evidently",
    "arguably",
    "roughly speaking",
    "broadly speaking",
    "generally speaking",
    "strictly speaking",
    "loosely speaking",
    "in essence",
    "in theory",
    "in practice",
    "at best",
    "at worst",
    "after a fashion",
    "to a degree",
    "up to a point",
    "within reason",
    "all told",
    "as such",
    "in passing",
];

/// Which contrast construction to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DemoKind {
    /// Raw `(input, output)` strings, the original construction.
    Style1,
    /// Question/answer wrapping with a filler answer on the negative side.
    Style2,
    /// Raw `(negative, positive)` sentences for behavioral tasks.
    BehavioralRaw,
}

/// A contrast construction plus its filler pool.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct DemoStyle {
    pub kind: DemoKind,
    /// Filler completions for [`DemoKind::Style2`]; unused otherwise.
    pub fillers: Vec<String>,
}

impl DemoStyle {
    #[must_use]
    pub fn style1() -> Self {
        DemoStyle {
            kind: DemoKind::Style1,
            fillers: Vec::new(),
        }
    }

    /// Style 2 with the bundled filler pool.
    #[must_use]
    pub fn style2() -> Self {
        DemoStyle {
            kind: DemoKind::Style2,
            fillers: FILLER_PHRASES.iter().map(|&f| f.to_string()).collect(),
        }
    }

    #[must_use]
    pub fn behavioral_raw() -> Self {
        DemoStyle {
            kind: DemoKind::BehavioralRaw,
            fillers: Vec::new(),
        }
    }

    /// Checks the filler pool suits the kind.
    ///
    /// # Errors
    /// Input error when style 2 has no fillers or a filler is empty or longer
    /// than five words.
    pub fn validate(&self) -> Result<()> {
        if self.kind == DemoKind::Style2 {
            if self.fillers.is_empty() {
                return Err(SvError::input("style 2 needs a nonempty filler pool"));
            }
            for filler in &self.fillers {
                let words = filler.split_whitespace().count();
                if !(1..=5).contains(&words) {
                    return Err(SvError::input(format!(
                        "filler {filler:?} must be one to five words"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Samples `k` distinct train-split pairs and renders them as contrast pairs
/// under the given style.
///
/// Style 2 renders the negative side as `"Q: {a}\nA: {c}"` with a filler `c`
/// and the positive side as `"Q: {a}\nA: {b}"`; styles 1 and behavioral-raw
/// pass `(a, b)` through unchanged.
///
/// # Errors
/// Input error when `k` is zero or exceeds the train split, or when the style
/// fails validation.
pub fn make_contrast_pairs<R: Rng>(
    task: &TaskSpec,
    style: &DemoStyle,
    k: usize,
    rng: &mut R,
) -> Result<Vec<ContrastPair>> {
    style.validate()?;
    if k == 0 {
        return Err(SvError::input("contrast extraction needs k >= 1 pairs"));
    }
    let train = task.split_indices(Split::Train);
    if train.len() < k {
        return Err(SvError::input(format!(
            "task {:?} has {} train pairs, fewer than the {k} requested",
            task.name,
            train.len()
        )));
    }
    let chosen = sample(rng, train.len(), k);
    let mut out = Vec::with_capacity(k);
    for pos in chosen.iter() {
        let pair = &task.pairs[train[pos]];
        let (negative, positive) = match style.kind {
            DemoKind::Style1 | DemoKind::BehavioralRaw => {
                (pair.input.clone(), pair.output.clone())
            }
            DemoKind::Style2 => {
                let filler = &style.fillers[rng.random_range(0..style.fillers.len())];
                (
                    format!("Q: {}\nA: {filler}", pair.input),
                    format!("Q: {}\nA: {}", pair.input, pair.output),
                )
            }
        };
        out.push(ContrastPair { negative, positive });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::derive_rng;
    use crate::tasks::spec::TaskPair;

    fn toy_task() -> TaskSpec {
        let pairs: Vec<TaskPair> = (0..10)
            .map(|i| TaskPair::new(format!("in{i}"), format!("out{i}")))
            .collect();
        TaskSpec::functional("toy", pairs, vec![]).unwrap()
    }

    #[test]
    fn filler_pool_shape() {
        assert_eq!(FILLER_PHRASES.len(), 64);
        assert!(FILLER_PHRASES.contains(&"quite so"));
        for filler in FILLER_PHRASES {
            let words = filler.split_whitespace().count();
            assert!((1..=5).contains(&words), "{filler:?}");
        }
    }

    #[test]
    fn style2_golden() {
        let task = TaskSpec::functional(
            "capitalize-mini",
            vec![TaskPair::new("apple", "Apple")],
            vec![],
        )
        .unwrap();
        let style = DemoStyle {
            kind: DemoKind::Style2,
            fillers: vec!["quite so".into()],
        };
        // Single train pair, k = 1: sampling is forced, filler is forced.
        let mut task = task;
        task.splits.train = vec![0];
        task.splits.test = vec![];
        let mut rng = derive_rng(0, &[]);
        let pairs = make_contrast_pairs(&task, &style, 1, &mut rng).unwrap();
        assert_eq!(pairs[0].negative, "Q: apple\nA: quite so");
        assert_eq!(pairs[0].positive, "Q: apple\nA: Apple");
    }

    #[test]
    fn style2_sides_share_question_prefix() {
        let task = toy_task();
        let mut rng = derive_rng(1, &[]);
        let pairs = make_contrast_pairs(&task, &DemoStyle::style2(), 5, &mut rng).unwrap();
        for pair in pairs {
            let neg_prefix = pair.negative.rsplit_once("A:").map(|(head, _)| head);
            let pos_prefix = pair.positive.rsplit_once("A:").map(|(head, _)| head);
            assert_eq!(neg_prefix, pos_prefix);
            assert!(pair.negative.starts_with("Q: "));
        }
    }

    #[test]
    fn style1_passes_raw_strings() {
        let task = toy_task();
        let mut rng = derive_rng(2, &[]);
        let pairs = make_contrast_pairs(&task, &DemoStyle::style1(), 3, &mut rng).unwrap();
        for pair in &pairs {
            assert!(pair.negative.starts_with("in"));
            assert!(pair.positive.starts_with("out"));
        }
    }

    #[test]
    fn rejects_zero_and_oversized_k() {
        let task = toy_task();
        let mut rng = derive_rng(3, &[]);
        assert!(make_contrast_pairs(&task, &DemoStyle::style1(), 0, &mut rng).is_err());
        let train_len = task.splits.train.len();
        assert!(make_contrast_pairs(&task, &DemoStyle::style1(), train_len + 1, &mut rng).is_err());
    }

    #[test]
    fn bad_filler_rejected() {
        let style = DemoStyle {
            kind: DemoKind::Style2,
            fillers: vec!["one two three four five six".into()],
        };
        assert!(style.validate().is_err());
        let empty = DemoStyle {
            kind: DemoKind::Style2,
            fillers: vec![],
        };
        assert!(empty.validate().is_err());
    }
}
