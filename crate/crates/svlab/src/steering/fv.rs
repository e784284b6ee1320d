//! Function vectors: a single residual-stream vector summarizing the
//! attention heads that carry a task's input-output mapping.
//!
//! Extraction averages each head's final-token output over informative
//! few-shot prompts, scores every head by its average indirect effect (AIE)
//! under label-shuffled prompts, and sums the projections of the top heads'
//! mean outputs into one vector. Injection adds that vector, at strength
//! one, to the final token position of a small set of middle layers.

use ndarray::{Array1, Array2, Array3, ArrayView1};
use rand::Rng;
use rayon::prelude::*;

use crate::error::{Result, SvError};
use crate::lm::{
    CaptureFlags, HeadSubstitute, HookSet, ModelBundle, PositionRule, ResidualAdd, TokenPos,
    UNK_ID,
};
use crate::rng::{derive_rng, name_tag};
use crate::tasks::{build_few_shot, shuffle_labels, Split, TaskPair, TaskSpec};

/// Demonstrations per corrupted prompt when scoring heads.
pub const AIE_SHOTS: usize = 10;

// ------------------------------------------------------------------
// Mean head activations
// ------------------------------------------------------------------

/// Per-head mean final-token activations over informative prompts, plus the
/// sampling settings that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct HeadMeans {
    /// `[n_layers × n_heads × d_head]` mean pre-projection head outputs.
    pub values: Array3<f32>,
    pub n_prompts: usize,
    pub n_shots: usize,
    pub seed: u64,
    pub source_task: String,
}

impl HeadMeans {
    /// The mean activation of one head.
    ///
    /// # Panics
    /// Panics if the indices are out of range.
    #[must_use]
    pub fn mean(&self, layer: usize, head: usize) -> ArrayView1<'_, f32> {
        self.values.slice(ndarray::s![layer, head, ..])
    }

    /// The mean as an owned buffer, the shape hook replacements take.
    /// One head's mean as an owned vector, ready for a substitution hook.
    #[must_use]
    pub fn mean_vec(&self, layer: usize, head: usize) -> Vec<f32> {
        self.values
            .slice(ndarray::s![layer, head, ..])
            .iter()
            .copied()
            .collect()
    }
}

/// Samples `(demos, query)` bundles of distinct train pairs.
///
/// # Errors
/// Input error when the train split cannot supply `n_shots + 1` distinct
/// pairs or `n_prompts` is zero.
pub fn informative_prompts<R: Rng>(
    task: &TaskSpec,
    n_prompts: usize,
    n_shots: usize,
    rng: &mut R,
) -> Result<Vec<(Vec<TaskPair>, TaskPair)>> {
    let train = task.split_indices(Split::Train);
    if train.len() < n_shots + 1 {
        return Err(SvError::input(format!(
            "task {:?} has {} train pairs; informative prompts need n_shots + 1 = {}",
            task.name,
            train.len(),
            n_shots + 1
        )));
    }
    if n_prompts == 0 {
        return Err(SvError::input("prompt sampling needs n_prompts >= 1"));
    }
    let mut out = Vec::with_capacity(n_prompts);
    for _ in 0..n_prompts {
        let picks = rand::seq::index::sample(rng, train.len(), n_shots + 1);
        let mut pairs: Vec<TaskPair> = picks
            .iter()
            .map(|pos| task.pairs[train[pos]].clone())
            .collect();
        let query = pairs.pop().expect("n_shots + 1 >= 1");
        out.push((pairs, query));
    }
    Ok(out)
}

/// Averages each head's final-token output over `n_prompts` informative
/// `n_shots`-shot prompts drawn from the task's train split.
///
/// # Errors
/// Input error when the train split cannot supply `n_shots + 1` distinct
/// pairs or `n_prompts` is zero; forward errors propagate.
pub fn mean_head_activations(
    model: &ModelBundle,
    task: &TaskSpec,
    n_prompts: usize,
    n_shots: usize,
    seed: u64,
) -> Result<HeadMeans> {
    let mut rng = derive_rng(seed, &[name_tag("fv-means"), name_tag(&task.name)]);
    let prompts = informative_prompts(task, n_prompts, n_shots, &mut rng)?;
    let (l, h, dh) = (
        model.config.n_layers,
        model.config.n_heads,
        model.config.d_head,
    );
    let per_prompt: Vec<Array3<f32>> = prompts
        .par_iter()
        .map(|(demos, query)| -> Result<Array3<f32>> {
            let text = build_few_shot(demos, &query.input)?;
            let tokens = model.tokenizer.encode(&text);
            let hooks = HookSet {
                capture: CaptureFlags {
                    head_out: true,
                    ..CaptureFlags::none()
                },
                ..HookSet::default()
            };
            let (_, trace) = model.forward(&tokens, &hooks)?;
            let mut acts = Array3::<f32>::zeros((l, h, dh));
            for layer in 0..l {
                let concat = trace.head_out_concat(layer)?;
                let final_row = concat.row(concat.nrows() - 1);
                for head in 0..h {
                    for k in 0..dh {
                        acts[(layer, head, k)] = final_row[head * dh + k];
                    }
                }
            }
            Ok(acts)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut values = Array3::<f32>::zeros((l, h, dh));
    for acts in &per_prompt {
        values += acts;
    }
    values /= n_prompts as f32;
    Ok(HeadMeans {
        values,
        n_prompts,
        n_shots,
        seed,
        source_task: task.name.clone(),
    })
}

// ------------------------------------------------------------------
// Average indirect effect
// ------------------------------------------------------------------

fn softmax_prob_f64(logits: ArrayView1<'_, f32>, token: u32) -> f64 {
    let max = logits.iter().copied().fold(f32::NEG_INFINITY, f32::max) as f64;
    let mut denom = 0.0_f64;
    for &v in logits {
        denom += (f64::from(v) - max).exp();
    }
    (f64::from(logits[token as usize]) - max).exp() / denom
}

/// Checks every pair's answer starts with a single known token and returns
/// those first tokens, indexed like `task.pairs`.
fn answer_tokens(model: &ModelBundle, task: &TaskSpec) -> Result<Vec<u32>> {
    task.pairs
        .iter()
        .map(|pair| {
            let toks = model.tokenizer.encode(&pair.output);
            match toks.first() {
                Some(&t) if t != UNK_ID => Ok(t),
                _ => Err(SvError::config(format!(
                    "task {:?}: answer {:?} does not start with a known token, \
                     so answer probabilities are undefined",
                    task.name, pair.output
                ))),
            }
        })
        .collect()
}

/// Scores every head by its average indirect effect: the mean rise in the
/// correct first answer token's probability when the head's final-token
/// output is replaced by its task mean inside a label-shuffled prompt.
///
/// # Errors
/// Config error when some answer lacks a single known first token; input
/// error when the train split cannot supply `AIE_SHOTS + 1` pairs or
/// `n_prompts` is zero.
pub fn compute_aie(
    model: &ModelBundle,
    task: &TaskSpec,
    means: &HeadMeans,
    n_prompts: usize,
    seed: u64,
) -> Result<Array2<f64>> {
    let first_tokens = answer_tokens(model, task)?;
    let mut rng = derive_rng(seed, &[name_tag("aie"), name_tag(&task.name)]);
    let bundles = informative_prompts(task, n_prompts, AIE_SHOTS, &mut rng)?;
    // Pair each bundle with its shuffled demos up front so the stream of
    // random draws is independent of evaluation order.
    let corrupted: Vec<(Vec<TaskPair>, TaskPair)> = bundles
        .into_iter()
        .map(|(demos, query)| Ok((shuffle_labels(&demos, &mut rng)?, query)))
        .collect::<Result<Vec<_>>>()?;
    let (l, h) = (model.config.n_layers, model.config.n_heads);
    let per_prompt: Vec<Array2<f64>> = corrupted
        .par_iter()
        .map(|(demos, query)| -> Result<Array2<f64>> {
            let text = build_few_shot(demos, &query.input)?;
            let tokens = model.tokenizer.encode(&text);
            let answer = first_tokens[task
                .pairs
                .iter()
                .position(|p| p == query)
                .expect("query comes from task.pairs")];
            let (base_logits, _) = model.forward(&tokens, &HookSet::default())?;
            let p_base = softmax_prob_f64(base_logits.row(base_logits.nrows() - 1), answer);
            let mut effects = Array2::<f64>::zeros((l, h));
            for layer in 0..l {
                for head in 0..h {
                    let mut hooks = HookSet::default();
                    hooks.head_substitute.push(HeadSubstitute {
                        layer,
                        head,
                        pos: TokenPos::Final,
                        replacement: means.mean_vec(layer, head),
                    });
                    let (logits, _) = model.forward(&tokens, &hooks)?;
                    let p_patch = softmax_prob_f64(logits.row(logits.nrows() - 1), answer);
                    effects[(layer, head)] = p_patch - p_base;
                }
            }
            Ok(effects)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut aie = Array2::<f64>::zeros((l, h));
    for effects in &per_prompt {
        aie += effects;
    }
    aie /= n_prompts as f64;
    Ok(aie)
}

// ------------------------------------------------------------------
// Vector assembly
// ------------------------------------------------------------------

/// One head's AIE score.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct HeadScore {
    pub layer: usize,
    pub head: usize,
    pub score: f64,
}

/// All heads sorted by descending score, ties broken by ascending
/// `(layer, head)` so rankings never depend on input traversal order.
#[must_use]
pub fn rank_heads(scores: &Array2<f64>) -> Vec<HeadScore> {
    let mut ranked: Vec<HeadScore> = scores
        .indexed_iter()
        .map(|((layer, head), &score)| HeadScore { layer, head, score })
        .collect();
    ranked.sort_by(|a, b| {
        b.score
            .partial_cmp(&a.score)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| (a.layer, a.head).cmp(&(b.layer, b.head)))
    });
    ranked
}

/// The default injection layer: one third of the way into the stack.
#[must_use]
pub fn default_target_layer(n_layers: usize) -> usize {
    (n_layers as f64 / 3.0).round() as usize
}

/// The default head budget, scaled from a 20-of-1024 reference ratio with a
/// floor of two heads.
#[must_use]
pub fn default_top_k(total_heads: usize) -> usize {
    (((total_heads as f64) * 20.0 / 1024.0).round() as usize).max(2)
}

/// A function vector: the summed projection of the top heads' mean outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionVector {
    /// Residual-stream vector, length `d_model`.
    pub vector: Array1<f32>,
    /// The chosen `(layer, head)` set, in ranking order.
    pub head_set: Vec<(usize, usize)>,
    /// Layers the vector is injected at by default.
    pub target_layers: Vec<usize>,
    pub k: usize,
    pub source_task: String,
}

/// Sums the projections of the given heads' mean outputs through the output
/// projection, yielding a residual-stream vector.
///
/// # Errors
/// Config error when a head index is out of range.
pub fn build_fv_from_heads(
    model: &ModelBundle,
    means: &HeadMeans,
    head_set: &[(usize, usize)],
) -> Result<Array1<f32>> {
    let mut vector = Array1::<f32>::zeros(model.config.d_model);
    for &(layer, head) in head_set {
        vector += &model.project_head(layer, head, &means.mean_vec(layer, head))?;
    }
    Ok(vector)
}

/// Builds the function vector from the top `k` heads by AIE.
///
/// # Errors
/// Input error when `k` is zero or exceeds the head count, or when the score
/// grid does not match the model shape.
pub fn build_fv(
    model: &ModelBundle,
    means: &HeadMeans,
    scores: &Array2<f64>,
    k: usize,
) -> Result<FunctionVector> {
    let total = model.config.total_heads();
    if k == 0 {
        return Err(SvError::input("function vector needs k >= 1 heads"));
    }
    if k > total {
        return Err(SvError::input(format!(
            "k = {k} exceeds the model's {total} heads"
        )));
    }
    if scores.dim() != (model.config.n_layers, model.config.n_heads) {
        return Err(SvError::input(format!(
            "score grid {:?} does not match model shape ({}, {})",
            scores.dim(),
            model.config.n_layers,
            model.config.n_heads
        )));
    }
    let head_set: Vec<(usize, usize)> = rank_heads(scores)
        .into_iter()
        .take(k)
        .map(|s| (s.layer, s.head))
        .collect();
    let vector = build_fv_from_heads(model, means, &head_set)?;
    Ok(FunctionVector {
        vector,
        head_set,
        target_layers: vec![default_target_layer(model.config.n_layers)],
        k,
        source_task: means.source_task.clone(),
    })
}

/// The mean and sum of the top-`k` head scores. The mean is the headline
/// number; the sum is reported alongside.
///
/// # Errors
/// Input error when `k` is zero or exceeds the head count.
pub fn total_mean_cie(scores: &Array2<f64>, k: usize) -> Result<(f64, f64)> {
    if k == 0 || k > scores.len() {
        return Err(SvError::input(format!(
            "top-k of {k} is out of range for {} heads",
            scores.len()
        )));
    }
    let sum: f64 = rank_heads(scores).iter().take(k).map(|s| s.score).sum();
    Ok((sum / k as f64, sum))
}

/// Hooks that add the vector, at strength one, to the final token position
/// of the target layers (re-evaluated every decode step). The strength is
/// part of the vector's definition and is deliberately not a knob.
///
/// # Errors
/// Input error for an empty layer override.
pub fn make_fv_hooks(fv: &FunctionVector, layer_override: Option<&[usize]>) -> Result<HookSet> {
    let layers: Vec<usize> = match layer_override {
        Some([]) => {
            return Err(SvError::input(
                "layer override for injection must name at least one layer",
            ))
        }
        Some(set) => set.to_vec(),
        None => fv.target_layers.clone(),
    };
    let vectors = vec![fv.vector.to_vec(); layers.len()];
    let mut hooks = HookSet::default();
    hooks.residual_add.push(ResidualAdd {
        layers,
        vectors,
        strength: 1.0,
        rule: PositionRule::Final,
        renormalize: false,
    });
    Ok(hooks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lm::{ModelConfig, Tokenizer};

    fn tiny_task_and_model(n_layers: usize, n_heads: usize) -> (ModelBundle, TaskSpec) {
        let n_pairs = 16;
        let mut words = Vec::new();
        let mut pairs = Vec::new();
        for i in 0..n_pairs {
            words.push(format!("in{i}"));
            words.push(format!("out{i}"));
            pairs.push(TaskPair::new(format!("in{i}"), format!("out{i}")));
        }
        let tokenizer = Tokenizer::from_words(&words).unwrap();
        let d_head = 8;
        let config = ModelConfig {
            n_layers,
            n_heads,
            d_model: n_heads * d_head,
            d_head,
            vocab_size: tokenizer.vocab_size(),
            max_seq_len: 256,
            seed: 23,
        };
        let model = ModelBundle::init(config, tokenizer).unwrap();
        let mut task = TaskSpec::functional("tiny", pairs, vec![]).unwrap();
        // Everything in train: sampling needs AIE_SHOTS + 1 = 11 pairs.
        task.splits.train = (0..n_pairs).collect();
        task.splits.test = vec![];
        (model, task)
    }

    #[test]
    fn means_match_direct_capture_for_one_prompt() {
        let (model, task) = tiny_task_and_model(2, 2);
        let seed = 5;
        let means = mean_head_activations(&model, &task, 1, 3, seed).unwrap();
        // Replay the sampling stream to recover the prompt.
        let mut rng = derive_rng(seed, &[name_tag("fv-means"), name_tag(&task.name)]);
        let bundles = informative_prompts(&task, 1, 3, &mut rng).unwrap();
        let (demos, query) = &bundles[0];
        let text = build_few_shot(demos, &query.input).unwrap();
        let tokens = model.tokenizer.encode(&text);
        let hooks = HookSet {
            capture: CaptureFlags {
                head_out: true,
                ..CaptureFlags::none()
            },
            ..HookSet::default()
        };
        let (_, trace) = model.forward(&tokens, &hooks).unwrap();
        for layer in 0..2 {
            let concat = trace.head_out_concat(layer).unwrap();
            let final_row = concat.row(concat.nrows() - 1);
            for head in 0..2 {
                for k in 0..8 {
                    assert_eq!(means.values[(layer, head, k)], final_row[head * 8 + k]);
                }
            }
        }
    }

    #[test]
    fn aie_matches_brute_force_patching() {
        let (model, task) = tiny_task_and_model(1, 2);
        let seed = 9;
        let means = mean_head_activations(&model, &task, 4, 3, seed).unwrap();
        let n_prompts = 4;
        let aie = compute_aie(&model, &task, &means, n_prompts, seed).unwrap();

        // Brute force: replay sampling, then patch one head per forward.
        let first_tokens = answer_tokens(&model, &task).unwrap();
        let mut rng = derive_rng(seed, &[name_tag("aie"), name_tag(&task.name)]);
        let bundles = informative_prompts(&task, n_prompts, AIE_SHOTS, &mut rng).unwrap();
        let corrupted: Vec<(Vec<TaskPair>, TaskPair)> = bundles
            .into_iter()
            .map(|(demos, query)| (shuffle_labels(&demos, &mut rng).unwrap(), query))
            .collect();
        let mut want = Array2::<f64>::zeros((1, 2));
        for (demos, query) in &corrupted {
            let text = build_few_shot(demos, &query.input).unwrap();
            let tokens = model.tokenizer.encode(&text);
            let answer =
                first_tokens[task.pairs.iter().position(|p| p == query).unwrap()];
            let (base, _) = model.forward(&tokens, &HookSet::default()).unwrap();
            let p_base = softmax_prob_f64(base.row(base.nrows() - 1), answer);
            for head in 0..2 {
                let mut hooks = HookSet::default();
                hooks.head_substitute.push(HeadSubstitute {
                    layer: 0,
                    head,
                    pos: TokenPos::Final,
                    replacement: means.mean_vec(0, head),
                });
                let (logits, _) = model.forward(&tokens, &hooks).unwrap();
                let p_patch = softmax_prob_f64(logits.row(logits.nrows() - 1), answer);
                want[(0, head)] += (p_patch - p_base) / n_prompts as f64;
            }
        }
        for head in 0..2 {
            assert!(
                (aie[(0, head)] - want[(0, head)]).abs() < 1e-6,
                "head {head}: {} vs {}",
                aie[(0, head)],
                want[(0, head)]
            );
        }
    }

    #[test]
    fn identity_substitution_changes_nothing() {
        let (model, task) = tiny_task_and_model(2, 2);
        let text = build_few_shot(&task.pairs[..2], &task.pairs[2].input).unwrap();
        let tokens = model.tokenizer.encode(&text);
        let capture = HookSet {
            capture: CaptureFlags {
                head_out: true,
                ..CaptureFlags::none()
            },
            ..HookSet::default()
        };
        let (base, trace) = model.forward(&tokens, &capture).unwrap();
        for layer in 0..2 {
            let concat = trace.head_out_concat(layer).unwrap();
            let final_row = concat.row(concat.nrows() - 1);
            for head in 0..2 {
                let replacement: Vec<f32> =
                    final_row.iter().skip(head * 8).take(8).copied().collect();
                let mut hooks = HookSet::default();
                hooks.head_substitute.push(HeadSubstitute {
                    layer,
                    head,
                    pos: TokenPos::Final,
                    replacement,
                });
                let (patched, _) = model.forward(&tokens, &hooks).unwrap();
                assert_eq!(base, patched, "head ({layer}, {head})");
            }
        }
    }

    #[test]
    fn missing_answer_token_is_config_error() {
        let (model, mut task) = tiny_task_and_model(1, 2);
        task.pairs[3].output = "unseen-word".to_string();
        let means = HeadMeans {
            values: Array3::zeros((1, 2, 8)),
            n_prompts: 1,
            n_shots: 1,
            seed: 0,
            source_task: task.name.clone(),
        };
        assert!(matches!(
            compute_aie(&model, &task, &means, 2, 0),
            Err(SvError::Config(_))
        ));
    }

    #[test]
    fn ranking_breaks_ties_by_position() {
        let scores = ndarray::array![[1.0, 3.0], [3.0, 0.5]];
        let ranked = rank_heads(&scores);
        assert_eq!(ranked[0].layer, 0);
        assert_eq!(ranked[0].head, 1);
        assert_eq!(ranked[1].layer, 1);
        assert_eq!(ranked[1].head, 0);
        assert_eq!(ranked[3].score, 0.5);
    }

    #[test]
    fn fv_is_sum_of_projected_means() {
        let (model, task) = tiny_task_and_model(2, 2);
        let means = mean_head_activations(&model, &task, 3, 3, 1).unwrap();
        let scores = ndarray::array![[0.5, 0.1], [0.9, 0.2]];
        let fv = build_fv(&model, &means, &scores, 2).unwrap();
        assert_eq!(fv.head_set, vec![(1, 0), (0, 0)]);
        assert_eq!(fv.target_layers, vec![1]);
        let recomputed = build_fv_from_heads(&model, &means, &fv.head_set).unwrap();
        for (a, b) in fv.vector.iter().zip(recomputed.iter()) {
            assert!((a - b).abs() < 1e-6);
        }
        assert!(build_fv(&model, &means, &scores, 0).is_err());
        assert!(build_fv(&model, &means, &scores, 5).is_err());
    }

    #[test]
    fn defaults_follow_model_size() {
        assert_eq!(default_target_layer(4), 1);
        assert_eq!(default_target_layer(32), 11);
        assert_eq!(default_top_k(32), 2);
        assert_eq!(default_top_k(1024), 20);
    }

    #[test]
    fn cie_summary() {
        let scores = ndarray::array![[0.2, 0.2], [0.2, 0.2]];
        let (mean, sum) = total_mean_cie(&scores, 3).unwrap();
        assert!((mean - 0.2).abs() < 1e-12);
        assert!((sum - 0.6).abs() < 1e-12);
        let varied = ndarray::array![[0.1, 0.9], [0.3, 0.5]];
        let (max_mean, _) = total_mean_cie(&varied, 1).unwrap();
        assert!((max_mean - 0.9).abs() < 1e-12);
        assert!(total_mean_cie(&varied, 0).is_err());
        assert!(total_mean_cie(&varied, 5).is_err());
    }

    #[test]
    fn fv_hooks_pin_strength_and_position() {
        let (model, task) = tiny_task_and_model(2, 2);
        let means = mean_head_activations(&model, &task, 2, 3, 2).unwrap();
        let scores = Array2::zeros((2, 2));
        let fv = build_fv(&model, &means, &scores, 2).unwrap();
        let hooks = make_fv_hooks(&fv, None).unwrap();
        let add = &hooks.residual_add[0];
        assert_eq!(add.layers, fv.target_layers);
        assert_eq!(add.strength, 1.0);
        assert_eq!(add.rule, PositionRule::Final);
        assert!(!add.renormalize);
        assert!(make_fv_hooks(&fv, Some(&[])).is_err());
        let both = make_fv_hooks(&fv, Some(&[0, 1])).unwrap();
        assert_eq!(both.residual_add[0].layers, vec![0, 1]);
    }
}
