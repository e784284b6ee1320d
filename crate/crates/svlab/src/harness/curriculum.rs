//! Curriculum synthesis: turns task suites into the episode bag and probe
//! set that induce in-context learning on the toy model.
//!
//! Functional episodes are few-shot blocks ending in a completed answer, so
//! the model learns to read demonstrations and to continue `"Q: {q}\nA:"`
//! with the mapped word. Behavioral episodes pair two same-polarity
//! sentences per exchange, teaching the model to continue a conversation in
//! the style it was opened with — the momentum that steering vectors then
//! push around. Probes are held-out few-shot prompts used as the trainer's
//! in-context-learning gauge.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Result, SvError};
use crate::lm::{Curriculum, IclProbe};
use crate::rng::{derive_rng, name_tag};
use crate::tasks::{build_few_shot, TaskCategory, TaskPair, TaskSpec};

/// Demonstrations per probe prompt.
const PROBE_SHOTS: usize = 5;
/// Probes per functional task.
const PROBES_PER_TASK: usize = 10;

// ------------------------------------------------------------------
// Episode builders
// ------------------------------------------------------------------

/// Draws `n` distinct pairs from the full task, falling back to sampling
/// with replacement when the task is smaller than the request.
///
/// Episodes deliberately cover train- and test-split mappings alike: the toy
/// model stands in for a pretrained one, which knows every word pair before
/// steering is ever measured. Held-out always means an unseen prompt, never
/// an unlearnable mapping — a word-level model has no way to produce a pair
/// it was never shown.
fn draw_pairs<R: Rng>(task: &TaskSpec, n: usize, rng: &mut R) -> Vec<TaskPair> {
    if n <= task.pairs.len() {
        rand::seq::index::sample(rng, task.pairs.len(), n)
            .into_iter()
            .map(|i| task.pairs[i].clone())
            .collect()
    } else {
        (0..n)
            .map(|_| task.pairs[rng.random_range(0..task.pairs.len())].clone())
            .collect()
    }
}

/// Draws `n` distinct train-split pairs for probe demonstrations, matching
/// the demo policy of extraction and evaluation.
fn draw_train_demos<R: Rng>(task: &TaskSpec, n: usize, rng: &mut R) -> Vec<TaskPair> {
    let train = &task.splits.train;
    if n <= train.len() {
        rand::seq::index::sample(rng, train.len(), n)
            .into_iter()
            .map(|i| task.pairs[train[i]].clone())
            .collect()
    } else {
        (0..n)
            .map(|_| task.pairs[train[rng.random_range(0..train.len())]].clone())
            .collect()
    }
}

/// A few-shot block whose final exchange carries its answer:
/// demos plus `"Q: {q}\nA: {a}\n"`.
fn functional_episode<R: Rng>(task: &TaskSpec, rng: &mut R) -> Result<String> {
    // Mostly short contexts with a long tail, so both brief and crowded
    // prompts are in-distribution.
    let n_shots = if rng.random_range(0..100) < 88 {
        rng.random_range(1..=6)
    } else {
        rng.random_range(12..=18)
    };
    let mut pairs = draw_pairs(task, n_shots + 1, rng);
    let query = pairs.pop().expect("drew n_shots + 1 pairs");
    let prompt = build_few_shot(&pairs, &query.input)?;
    Ok(format!("{prompt} {}\n", query.output))
}

/// Same-polarity sentences for one side of a behavioral task.
fn side_sentences<R: Rng>(task: &TaskSpec, positive: bool, n: usize, rng: &mut R) -> Vec<String> {
    draw_pairs(task, n, rng)
        .into_iter()
        .map(|pair| if positive { pair.output } else { pair.input })
        .collect()
}

/// A style-momentum episode: every exchange answers a sentence with another
/// sentence of the same polarity, never a copy.
fn behavioral_episode<R: Rng>(task: &TaskSpec, rng: &mut R) -> Result<String> {
    let positive = rng.random_range(0..2) == 1;
    let n_exchanges = if rng.random_range(0..100) < 70 {
        1
    } else {
        rng.random_range(2..=3)
    };
    let sentences = side_sentences(task, positive, 2 * n_exchanges, rng);
    let mut text = String::new();
    for i in 0..n_exchanges {
        let (q, a) = (&sentences[2 * i], &sentences[2 * i + 1]);
        if i + 1 < n_exchanges {
            text.push_str(&format!("Q: {q}\n A: {a}\n\n"));
        } else {
            text.push_str(&format!("Q: {q}\nA: {a}\n"));
        }
    }
    Ok(text)
}

// ------------------------------------------------------------------
// Curriculum assembly
// ------------------------------------------------------------------

/// Builds `n_episodes` training episodes plus held-out probes for the given
/// tasks. Episodes draw on the full pair set, so every mapping is learnable;
/// probes pair train-split demonstrations with validation-half queries, so
/// the trainer's gate measures in-context task inference on prompts never
/// seen in training. The mix is roughly 65% functional to 35% behavioral
/// when both categories are present.
///
/// # Errors
/// Input error when no tasks are given; prompt-building failures pass
/// through.
pub fn build_curriculum(tasks: &[TaskSpec], n_episodes: usize, seed: u64) -> Result<Curriculum> {
    if tasks.is_empty() {
        return Err(SvError::input("curriculum needs at least one task"));
    }
    let functional: Vec<&TaskSpec> = tasks
        .iter()
        .filter(|t| t.category == TaskCategory::Functional)
        .collect();
    let behavioral: Vec<&TaskSpec> = tasks
        .iter()
        .filter(|t| t.category == TaskCategory::Behavioral)
        .collect();

    let mut rng = derive_rng(seed, &[name_tag("curriculum")]);
    let mut episodes = Vec::with_capacity(n_episodes);
    for _ in 0..n_episodes {
        let use_functional = if behavioral.is_empty() {
            true
        } else if functional.is_empty() {
            false
        } else {
            rng.random_range(0..100) < 65
        };
        let episode = if use_functional {
            let task = functional[rng.random_range(0..functional.len())];
            functional_episode(task, &mut rng)?
        } else {
            let task = behavioral[rng.random_range(0..behavioral.len())];
            behavioral_episode(task, &mut rng)?
        };
        episodes.push(episode);
    }

    let mut probes = Vec::new();
    for task in &functional {
        let mut prng = derive_rng(seed, &[name_tag("curriculum-probes"), name_tag(&task.name)]);
        // Queries come from the front half of the test split, leaving the
        // back half untouched by any training-time accuracy gate.
        let test = &task.splits.test;
        let pool = &test[..(test.len() / 2).max(1)];
        for p in 0..PROBES_PER_TASK {
            let mut demos = draw_train_demos(task, PROBE_SHOTS, &mut prng);
            demos.shuffle(&mut prng);
            let query = &task.pairs[pool[p % pool.len()]];
            probes.push(IclProbe {
                task: task.name.clone(),
                prompt: build_few_shot(&demos, &query.input)?,
                expected: query.output.clone(),
            });
        }
    }

    Ok(Curriculum { episodes, probes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::{ClassifierRegistry, Label};
    use crate::tasks::builtin_tasks;

    fn curriculum() -> Curriculum {
        build_curriculum(&builtin_tasks().unwrap(), 400, 7).unwrap()
    }

    #[test]
    fn episode_counts_and_mix_are_as_configured() {
        let c = curriculum();
        assert_eq!(c.episodes.len(), 400);
        assert_eq!(c.probes.len(), 4 * PROBES_PER_TASK);

        // Behavioral episodes are recognizable by their marker words: every
        // exchange line carries two, so some polarity classifier is highly
        // confident about every line. Functional lines carry at most one
        // marker by accident, which caps confidence at exactly 0.9.
        let registry = ClassifierRegistry::builtin().unwrap();
        let detox = registry.get("detox-marker").unwrap();
        let sentiment = registry.get("sentiment-marker").unwrap();
        let behavioral = c
            .episodes
            .iter()
            .filter(|e| {
                e.lines().filter(|l| !l.trim().is_empty()).all(|l| {
                    detox.classify(l).probability > 0.9
                        || sentiment.classify(l).probability > 0.9
                })
            })
            .count();
        let fraction = behavioral as f64 / c.episodes.len() as f64;
        assert!(
            (0.25..=0.45).contains(&fraction),
            "behavioral fraction {fraction}"
        );
    }

    #[test]
    fn behavioral_episodes_keep_one_polarity_and_never_copy() {
        let tasks = builtin_tasks().unwrap();
        let detox = tasks.iter().find(|t| t.name == "detox-marker").unwrap();
        let registry = ClassifierRegistry::builtin().unwrap();
        let classifier = registry.get("detox-marker").unwrap();
        let mut rng = derive_rng(3, &[name_tag("test")]);
        let mut saw = [false, false];
        for _ in 0..50 {
            let episode = behavioral_episode(detox, &mut rng).unwrap();
            let mut labels = Vec::new();
            let mut sentences = Vec::new();
            for line in episode.lines() {
                let line = line.trim();
                if line.is_empty() {
                    continue;
                }
                let sentence = line
                    .trim_start_matches("Q:")
                    .trim_start_matches("A:")
                    .trim();
                let output = classifier.classify(sentence);
                assert!(output.probability > 0.9, "unmarked line {line:?}");
                labels.push(output.label);
                sentences.push(sentence.to_string());
            }
            assert!(labels.windows(2).all(|w| w[0] == w[1]), "{episode}");
            saw[usize::from(labels[0] == Label::Positive)] = true;
            let unique: std::collections::HashSet<&String> = sentences.iter().collect();
            assert_eq!(unique.len(), sentences.len(), "copied sentence: {episode}");
        }
        assert_eq!(saw, [true, true], "both polarities appear");
    }

    #[test]
    fn functional_episodes_complete_the_final_answer() {
        let tasks = builtin_tasks().unwrap();
        let antonym = tasks.iter().find(|t| t.name == "antonym").unwrap();
        let mut rng = derive_rng(5, &[name_tag("test")]);
        for _ in 0..30 {
            let episode = functional_episode(antonym, &mut rng).unwrap();
            assert!(episode.ends_with('\n'));
            let lines: Vec<&str> = episode.lines().collect();
            let last = lines[lines.len() - 1];
            let q_line = lines[lines.len() - 2];
            assert!(q_line.starts_with("Q: "), "{episode:?}");
            assert!(last.starts_with("A: "), "{episode:?}");
            let answer = last.trim_start_matches("A: ");
            let query = q_line.trim_start_matches("Q: ");
            assert!(antonym
                .pairs
                .iter()
                .any(|p| p.input == query && p.output == answer));
        }
    }

    #[test]
    fn probes_hold_out_their_queries() {
        let tasks = builtin_tasks().unwrap();
        let c = curriculum();
        for probe in &c.probes {
            let task = tasks.iter().find(|t| t.name == probe.task).unwrap();
            assert_eq!(task.category, TaskCategory::Functional);
            // The probe's query line maps to a test-split pair.
            let query_line = probe
                .prompt
                .lines()
                .rev()
                .find(|l| l.starts_with("Q: "))
                .unwrap();
            let query = query_line.trim_start_matches("Q: ");
            let index = task
                .pairs
                .iter()
                .position(|p| p.input == query && p.output == probe.expected)
                .unwrap();
            assert!(task.splits.test.contains(&index), "probe query not held out");
            assert!(!task.splits.train.contains(&index));
        }
    }

    #[test]
    fn episodes_cover_mappings_from_both_splits() {
        // The toy stands in for a pretrained model: every mapping, test
        // split included, must be learnable from the curriculum. Probes and
        // evaluations hold out prompts, not word pairs.
        let tasks = builtin_tasks().unwrap();
        let antonym = tasks.iter().find(|t| t.name == "antonym").unwrap();
        let mut seen = vec![false; antonym.pairs.len()];
        let mut rng = derive_rng(9, &[name_tag("test")]);
        for _ in 0..400 {
            let episode = functional_episode(antonym, &mut rng).unwrap();
            for line in episode.lines() {
                if let Some(q) = line.trim().strip_prefix("Q: ") {
                    if let Some(i) = antonym.pairs.iter().position(|p| p.input == q) {
                        seen[i] = true;
                    }
                }
            }
        }
        let train_seen = antonym.splits.train.iter().filter(|&&i| seen[i]).count();
        let test_seen = antonym.splits.test.iter().filter(|&&i| seen[i]).count();
        assert!(
            train_seen * 10 >= antonym.splits.train.len() * 9,
            "train coverage {train_seen}/{}",
            antonym.splits.train.len()
        );
        assert!(
            test_seen * 10 >= antonym.splits.test.len() * 9,
            "test coverage {test_seen}/{}",
            antonym.splits.test.len()
        );
    }

    #[test]
    fn curriculum_is_deterministic_per_seed() {
        let a = curriculum();
        let b = curriculum();
        assert_eq!(a, b);
        let c = build_curriculum(&builtin_tasks().unwrap(), 400, 8).unwrap();
        assert_ne!(a.episodes, c.episodes);
    }
}
