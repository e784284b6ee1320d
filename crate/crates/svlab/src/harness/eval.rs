//! Baseline and steered evaluation over held-out queries.
//!
//! Query and demonstration sampling is keyed by (seed, task, style, item
//! index) alone — never by the vector under test — so every steered run is
//! compared against baseline records built from identical prompts, and
//! results are independent of worker scheduling.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SvError};
use crate::lm::{HookSet, ModelBundle};
use crate::metrics::{
    dist_n, generation_entropy, is_gradable, shift_success, ClassifierRegistry, GeWeights, Label,
    MatchRule,
};
use crate::rng::{derive_rng, name_tag};
use crate::steering::Steering;
use crate::tasks::{
    build_few_shot, build_natural, build_zero_shot, shuffle_labels, PromptKind, PromptStyle,
    Split, TaskCategory, TaskPair, TaskSpec,
};

// ------------------------------------------------------------------
// Records
// ------------------------------------------------------------------

/// Which vector produced a steered record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VectorMeta {
    pub method: String,
    pub source_task: String,
    pub strength: f32,
    /// Contrastive demonstrations behind an ICV.
    pub n_demos: Option<usize>,
    /// Head budget behind a function vector.
    pub k: Option<usize>,
    /// Layers the injection actually touched.
    pub layers: Vec<usize>,
}

/// One graded generation with every metric attached.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub task: String,
    pub method: String,
    pub style: PromptStyle,
    pub seed: u64,
    pub query_index: usize,
    pub query: String,
    pub expected: String,
    pub generated: String,
    /// Task-rule match; absent for behavioral tasks.
    pub correct: Option<bool>,
    pub gradable: bool,
    pub ge: f64,
    pub dist_1: f64,
    pub dist_2: f64,
    pub classifier_label: Option<Label>,
    pub classifier_probability: Option<f64>,
    pub shift_success: Option<bool>,
    pub vector: Option<VectorMeta>,
    pub config_hash: String,
}

/// A human-readable style key for grouping and reports.
#[must_use]
pub fn style_label(style: &PromptStyle) -> String {
    match style.kind {
        PromptKind::ZeroShot => "zero-shot".to_string(),
        PromptKind::FewShot => format!("few-shot-{}", style.n_shots),
        PromptKind::ShuffledFewShot => format!("shuffled-{}", style.n_shots),
        PromptKind::NaturalText => format!("natural-{}", style.template_index),
    }
}

// ------------------------------------------------------------------
// Context and query pools
// ------------------------------------------------------------------

/// Shared evaluation state: the model, classifiers, and metric knobs.
pub struct EvalContext<'a> {
    pub model: &'a ModelBundle,
    pub registry: &'a ClassifierRegistry,
    pub weights: GeWeights,
    pub max_new_tokens: usize,
    pub config_hash: String,
}

/// Which half of the held-out split queries come from. Sweeps select on the
/// validation half; headline numbers come from the disjoint held-out half.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QueryPool {
    Validation,
    Heldout,
}

/// The test-split pair indices backing a pool: the validation half is the
/// first half of the (already shuffled) test indices, held-out the second.
#[must_use]
pub fn pool_indices(task: &TaskSpec, pool: QueryPool) -> Vec<usize> {
    let test = task.split_indices(Split::Test);
    let mid = test.len() / 2;
    match pool {
        QueryPool::Validation => test[..mid].to_vec(),
        QueryPool::Heldout => test[mid..].to_vec(),
    }
}

fn style_tags(task: &TaskSpec, style: &PromptStyle) -> [u64; 4] {
    let kind = match style.kind {
        PromptKind::ZeroShot => "zero-shot",
        PromptKind::FewShot => "few-shot",
        PromptKind::ShuffledFewShot => "shuffled-few-shot",
        PromptKind::NaturalText => "natural-text",
    };
    [
        name_tag(&task.name),
        name_tag(kind),
        style.n_shots as u64,
        style.template_index as u64,
    ]
}

// ------------------------------------------------------------------
// Evaluation
// ------------------------------------------------------------------

struct WorkItem {
    seed: u64,
    query_index: usize,
    query: String,
    expected: String,
    prompt: String,
}

/// Headline evaluation: the vector at its default placement, queries from
/// the held-out half.
///
/// # Errors
/// Configuration error for a behavioral task on a non-zero-shot style or a
/// missing classifier; input errors for empty seeds or an exhausted pool.
pub fn evaluate(
    ctx: &EvalContext,
    vector: Option<&Steering>,
    task: &TaskSpec,
    style: &PromptStyle,
    n: usize,
    seeds: &[u64],
) -> Result<Vec<EvalRecord>> {
    evaluate_detailed(ctx, vector, None, task, style, n, seeds, QueryPool::Heldout)
}

/// Full-control evaluation: explicit layer placement and query pool.
///
/// # Errors
/// As [`evaluate`], plus placement errors from the vector's hooks.
#[allow(clippy::too_many_arguments)]
pub fn evaluate_detailed(
    ctx: &EvalContext,
    vector: Option<&Steering>,
    layer_override: Option<&[usize]>,
    task: &TaskSpec,
    style: &PromptStyle,
    n: usize,
    seeds: &[u64],
    pool: QueryPool,
) -> Result<Vec<EvalRecord>> {
    style.validate()?;
    if task.category == TaskCategory::Behavioral && style.kind != PromptKind::ZeroShot {
        return Err(SvError::Config(format!(
            "behavioral task {:?} is evaluated zero-shot only, got {}",
            task.name,
            style_label(style)
        )));
    }
    if n == 0 {
        return Err(SvError::input("evaluation needs n >= 1 queries"));
    }
    if seeds.is_empty() {
        return Err(SvError::input("evaluation needs at least one seed"));
    }
    let shift_rule = match task.category {
        TaskCategory::Behavioral => {
            let rule = task.shift_rule.ok_or_else(|| {
                SvError::config(format!("task {:?} has no shift rule", task.name))
            })?;
            if ctx.registry.get(&task.name).is_none() {
                return Err(SvError::Config(format!(
                    "no classifier registered for task {:?}",
                    task.name
                )));
            }
            Some(rule)
        }
        TaskCategory::Functional => None,
    };

    let pool_pairs = pool_indices(task, pool);
    if pool_pairs.is_empty() {
        return Err(SvError::Input(format!(
            "task {:?} has no held-out queries in this pool",
            task.name
        )));
    }

    let hooks = match vector {
        Some(v) => v.hooks(layer_override)?,
        None => HookSet::default(),
    };
    let meta = vector.map(|v| vector_meta(v, layer_override, ctx.model.config.n_layers));
    let match_rule = match style.kind {
        PromptKind::NaturalText => MatchRule::Containment,
        _ => MatchRule::FirstWord,
    };

    // Sampling and prompt construction run up front on one thread; only the
    // generation fan-out is parallel, and it aggregates in item order.
    let mut items = Vec::with_capacity(seeds.len() * n);
    for &seed in seeds {
        let mut qrng = derive_rng(seed, &{
            let t = style_tags(task, style);
            [name_tag("eval-queries"), t[0], t[1], t[2], t[3]]
        });
        let chosen: Vec<usize> = if n <= pool_pairs.len() {
            rand::seq::index::sample(&mut qrng, pool_pairs.len(), n).into_vec()
        } else {
            (0..n)
                .map(|_| qrng.random_range(0..pool_pairs.len()))
                .collect()
        };
        for (query_index, &pos) in chosen.iter().enumerate() {
            let pair = &task.pairs[pool_pairs[pos]];
            let prompt = build_prompt(task, style, pair, seed, query_index)?;
            items.push(WorkItem {
                seed,
                query_index,
                query: pair.input.clone(),
                expected: pair.output.clone(),
                prompt,
            });
        }
    }

    let outputs: Vec<Result<EvalRecord>> = items
        .par_iter()
        .map(|item| -> Result<EvalRecord> {
            let ids = ctx.model.tokenizer.encode(&item.prompt);
            let generated_ids = ctx
                .model
                .generate(&ids, ctx.max_new_tokens, &hooks, None)?;
            let generated = ctx.model.tokenizer.decode(&generated_ids);

            let ge = generation_entropy(&generated, &ctx.weights);
            let gradable = is_gradable(&generated, &ctx.weights);
            let dist_1 = dist_n(&generated, 1);
            let dist_2 = dist_n(&generated, 2);
            let (correct, label, probability, shifted) = match shift_rule {
                None => (
                    Some(match_rule.matches(&generated, &item.expected)),
                    None,
                    None,
                    None,
                ),
                Some(rule) => {
                    let classifier = ctx
                        .registry
                        .get(&task.name)
                        .expect("classifier checked above");
                    let out = classifier.classify(&generated);
                    (
                        None,
                        Some(out.label),
                        Some(out.probability),
                        Some(shift_success(rule, &out)),
                    )
                }
            };
            Ok(EvalRecord {
                task: task.name.clone(),
                method: vector.map_or("baseline", Steering::method_name).to_string(),
                style: *style,
                seed: item.seed,
                query_index: item.query_index,
                query: item.query.clone(),
                expected: item.expected.clone(),
                generated,
                correct,
                gradable,
                ge,
                dist_1,
                dist_2,
                classifier_label: label,
                classifier_probability: probability,
                shift_success: shifted,
                vector: meta.clone(),
                config_hash: ctx.config_hash.clone(),
            })
        })
        .collect();
    outputs.into_iter().collect()
}

fn build_prompt(
    task: &TaskSpec,
    style: &PromptStyle,
    pair: &TaskPair,
    seed: u64,
    query_index: usize,
) -> Result<String> {
    match style.kind {
        PromptKind::ZeroShot => build_zero_shot(&pair.input),
        PromptKind::NaturalText => build_natural(task, style.template_index, &pair.input),
        PromptKind::FewShot | PromptKind::ShuffledFewShot => {
            let mut drng = derive_rng(seed, &{
                let t = style_tags(task, style);
                [name_tag("eval-demos"), t[0], t[1], t[2], query_index as u64]
            });
            let train = task.split_indices(Split::Train);
            if train.len() < style.n_shots {
                return Err(SvError::Input(format!(
                    "task {:?} has {} train pairs, fewer than the {} demos requested",
                    task.name,
                    train.len(),
                    style.n_shots
                )));
            }
            let mut demos: Vec<TaskPair> =
                rand::seq::index::sample(&mut drng, train.len(), style.n_shots)
                    .iter()
                    .map(|pos| task.pairs[train[pos]].clone())
                    .collect();
            if style.kind == PromptKind::ShuffledFewShot {
                demos = shuffle_labels(&demos, &mut drng)?;
            }
            build_few_shot(&demos, &pair.input)
        }
    }
}

fn vector_meta(
    vector: &Steering,
    layer_override: Option<&[usize]>,
    n_layers: usize,
) -> VectorMeta {
    let default_layers: Vec<usize> = match vector {
        Steering::Icv(_) => (0..n_layers).collect(),
        Steering::Fv(fv) => fv.target_layers.clone(),
    };
    let layers = layer_override.map_or(default_layers, <[usize]>::to_vec);
    match vector {
        Steering::Icv(icv) => VectorMeta {
            method: "icv".to_string(),
            source_task: icv.source_task.clone(),
            strength: icv.strength,
            n_demos: Some(icv.n_demos),
            k: None,
            layers,
        },
        Steering::Fv(fv) => VectorMeta {
            method: "fv".to_string(),
            source_task: fv.source_task.clone(),
            strength: 1.0,
            n_demos: None,
            k: Some(fv.k),
            layers,
        },
    }
}
