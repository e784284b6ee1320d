//! Seeded trainer that induces in-context-learning behavior on the toy model.
//!
//! The curriculum is a bag of few-shot-formatted episodes (plain text) plus
//! held-out probes; training minimizes next-token cross-entropy with Adam,
//! linear warmup, and global-norm gradient clipping. Everything is
//! single-threaded and deterministic for a fixed seed: the same inputs yield
//! byte-identical weight files.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use ndarray::{s, Array1, Array2};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SvError};
use crate::lm::config::ModelConfig;
use crate::lm::model::{ModelBundle, Weights, LN_EPS};
use crate::lm::tokenizer::Tokenizer;
use crate::lm::hooks::HookSet;
use crate::rng::{derive_rng, name_tag};

// ---------------------------------------------------------------------------
// Curriculum
// ---------------------------------------------------------------------------

/// A held-out in-context-learning probe: a few-shot prompt whose correct
/// continuation starts with `expected`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IclProbe {
    pub task: String,
    pub prompt: String,
    pub expected: String,
}

/// Training data: formatted episodes plus held-out probes.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Curriculum {
    pub episodes: Vec<String>,
    pub probes: Vec<IclProbe>,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum CurriculumRecord {
    Episode {
        text: String,
    },
    Probe {
        task: String,
        prompt: String,
        expected: String,
    },
}

impl Curriculum {
    /// Writes the curriculum as JSON lines, episodes first.
    ///
    /// # Errors
    /// Propagates I/O and serialization failures.
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut out = String::new();
        for text in &self.episodes {
            out.push_str(&serde_json::to_string(&CurriculumRecord::Episode {
                text: text.clone(),
            })?);
            out.push('\n');
        }
        for probe in &self.probes {
            out.push_str(&serde_json::to_string(&CurriculumRecord::Probe {
                task: probe.task.clone(),
                prompt: probe.prompt.clone(),
                expected: probe.expected.clone(),
            })?);
            out.push('\n');
        }
        fs::write(path, out)?;
        Ok(())
    }

    /// Reads a JSON-lines curriculum.
    ///
    /// # Errors
    /// Input error naming the line for any malformed record.
    pub fn load(path: &Path) -> Result<Self> {
        let raw = fs::read_to_string(path)?;
        let mut curriculum = Curriculum::default();
        for (i, line) in raw.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let record: CurriculumRecord = serde_json::from_str(line)
                .map_err(|e| SvError::Input(format!("{}:{}: {e}", path.display(), i + 1)))?;
            match record {
                CurriculumRecord::Episode { text } => curriculum.episodes.push(text),
                CurriculumRecord::Probe {
                    task,
                    prompt,
                    expected,
                } => curriculum.probes.push(IclProbe {
                    task,
                    prompt,
                    expected,
                }),
            }
        }
        Ok(curriculum)
    }
}

// ---------------------------------------------------------------------------
// Parameters and report
// ---------------------------------------------------------------------------

/// Optimization knobs. `icl_threshold` is the held-out 5-shot accuracy every
/// probed task must reach after a non-zero number of steps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainParams {
    pub steps: usize,
    pub lr: f32,
    pub batch_size: usize,
    pub warmup_steps: usize,
    pub clip_norm: f32,
    /// Decoupled weight decay on projection and embedding matrices
    /// (LayerNorm gains and biases are exempt). Keeping weights small keeps
    /// residual-stream norms small, which keeps unit-norm steering vectors
    /// at config-scale strengths effective.
    pub weight_decay: f32,
    pub icl_threshold: f64,
    /// Print a progress line every this many steps (0 = silent).
    pub log_every: usize,
}

impl Default for TrainParams {
    fn default() -> Self {
        TrainParams {
            steps: 2000,
            lr: 1e-3,
            batch_size: 4,
            warmup_steps: 100,
            clip_norm: 1.0,
            weight_decay: 0.1,
            icl_threshold: 0.8,
            log_every: 0,
        }
    }
}

impl TrainParams {
    fn validate(&self) -> Result<()> {
        if !(self.lr.is_finite() && self.lr > 0.0) {
            return Err(SvError::config("learning rate must be positive and finite"));
        }
        if self.batch_size == 0 {
            return Err(SvError::config("batch_size must be at least 1"));
        }
        if !(self.clip_norm.is_finite() && self.clip_norm > 0.0) {
            return Err(SvError::config("clip_norm must be positive and finite"));
        }
        if !(self.weight_decay.is_finite() && self.weight_decay >= 0.0) {
            return Err(SvError::config("weight_decay must be finite and >= 0"));
        }
        if !(0.0..=1.0).contains(&self.icl_threshold) {
            return Err(SvError::config("icl_threshold must lie in [0, 1]"));
        }
        Ok(())
    }
}

/// What training measured on its way out.
#[derive(Debug, Clone, Serialize)]
pub struct TrainReport {
    pub steps_run: usize,
    pub final_loss: f64,
    /// Held-out probe accuracy per task.
    pub probe_accuracy: BTreeMap<String, f64>,
}

// ---------------------------------------------------------------------------
// Training entry point
// ---------------------------------------------------------------------------

/// Trains a fresh toy model on the curriculum.
///
/// With `params.steps == 0` the returned weights equal the seeded
/// initialization and no probe threshold is enforced. Otherwise each probed
/// task's held-out accuracy must reach `params.icl_threshold`.
///
/// # Errors
/// Input error for an empty curriculum or an episode that tokenizes to fewer
/// than 2 or more than `max_seq_len` tokens; training error (with the step
/// index) on divergence or a missed probe threshold.
pub fn train_toy(
    curriculum: &Curriculum,
    config: &ModelConfig,
    tokenizer: &Tokenizer,
    params: &TrainParams,
) -> Result<(ModelBundle, TrainReport)> {
    if curriculum.episodes.is_empty() {
        return Err(SvError::input("curriculum has no episodes"));
    }
    config.validate()?;
    params.validate()?;
    let mut model = ModelBundle::init(config.clone(), tokenizer.clone())?;

    let tokenized: Vec<Vec<u32>> = curriculum
        .episodes
        .iter()
        .map(|text| tokenizer.encode(text))
        .collect();
    for (i, toks) in tokenized.iter().enumerate() {
        if toks.len() < 2 {
            return Err(SvError::Input(format!(
                "episode {i} tokenizes to {} tokens; need at least 2",
                toks.len()
            )));
        }
        if toks.len() > config.max_seq_len {
            return Err(SvError::Input(format!(
                "episode {i} tokenizes to {} tokens; max_seq_len is {}",
                toks.len(),
                config.max_seq_len
            )));
        }
    }
    let skips: Vec<Option<usize>> = tokenized
        .iter()
        .map(|toks| contextless_answer_target(toks))
        .collect();

    let mut final_loss = f64::NAN;
    if params.steps > 0 {
        let mut rng = derive_rng(config.seed, &[name_tag("train")]);
        let mut order: Vec<usize> = (0..tokenized.len()).collect();
        let mut cursor = order.len();
        let mut grads = Weights::zeros_like(config)?;
        let mut opt = Adam::new(&model.weights);

        for step in 1..=params.steps {
            for slice in grads.param_slices_mut() {
                slice.fill(0.0);
            }
            let mut batch_loss = 0.0f64;
            for _ in 0..params.batch_size {
                if cursor >= order.len() {
                    order.shuffle(&mut rng);
                    cursor = 0;
                }
                let episode = &tokenized[order[cursor]];
                let skip = skips[order[cursor]];
                cursor += 1;
                let loss = forward_backward(
                    &model.weights,
                    config,
                    episode,
                    skip,
                    &mut grads,
                    1.0 / params.batch_size as f32,
                );
                batch_loss += f64::from(loss) / params.batch_size as f64;
            }
            if !batch_loss.is_finite() {
                return Err(SvError::Training {
                    step,
                    reason: format!("loss became non-finite ({batch_loss})"),
                });
            }
            clip_global_norm(&mut grads, params.clip_norm);
            let warmup = (step as f32 / params.warmup_steps.max(1) as f32).min(1.0);
            opt.step(
                &mut model.weights,
                &grads,
                params.lr * warmup,
                params.weight_decay,
            );
            final_loss = batch_loss;
            if params.log_every > 0 && (step % params.log_every == 0 || step == params.steps) {
                eprintln!("train: step {step}/{} loss {batch_loss:.4}", params.steps);
            }
        }
    }

    let probe_accuracy = probe_accuracy(&model, &curriculum.probes)?;
    if params.steps > 0 {
        for (task, &acc) in &probe_accuracy {
            if acc < params.icl_threshold {
                return Err(SvError::Training {
                    step: params.steps,
                    reason: format!(
                        "held-out probe accuracy {acc:.3} on task {task:?} is below the \
                         configured threshold {}",
                        params.icl_threshold
                    ),
                });
            }
        }
    }
    let report = TrainReport {
        steps_run: params.steps,
        final_loss,
        probe_accuracy,
    };
    Ok((model, report))
}

/// Held-out probe accuracy per task: the first generated token must decode to
/// the expected word.
///
/// # Errors
/// Propagates forward-pass failures (e.g. an over-long probe prompt).
pub fn probe_accuracy(model: &ModelBundle, probes: &[IclProbe]) -> Result<BTreeMap<String, f64>> {
    let mut hits: BTreeMap<String, (usize, usize)> = BTreeMap::new();
    for probe in probes {
        let prompt = model.tokenizer.encode(&probe.prompt);
        let generated = model.generate(&prompt, 1, &HookSet::default(), None)?;
        let word = model.tokenizer.token(generated[0]);
        let entry = hits.entry(probe.task.clone()).or_insert((0, 0));
        entry.1 += 1;
        if word == probe.expected {
            entry.0 += 1;
        }
    }
    Ok(hits
        .into_iter()
        .map(|(task, (ok, total))| (task, ok as f64 / total as f64))
        .collect())
}

/// The loss-target position an episode's opening answer occupies: the token
/// right after the first `A:` marker. That token answers a context holding no
/// demonstrations, so there is no mapping to learn there — supervising it
/// would train a spurious zero-context marginal over every task's outputs,
/// exactly the prior that in-context evidence and steering are meant to set.
fn contextless_answer_target(tokens: &[u32]) -> Option<usize> {
    tokens
        .iter()
        .position(|&t| t == crate::lm::tokenizer::A_MARKER_ID)
        .filter(|&i| i + 1 < tokens.len())
}

// ---------------------------------------------------------------------------
// Adam
// ---------------------------------------------------------------------------

struct Adam {
    m: Vec<Vec<f32>>,
    v: Vec<Vec<f32>>,
    decay: Vec<bool>,
    t: i32,
}

const BETA1: f32 = 0.9;
const BETA2: f32 = 0.999;
const ADAM_EPS: f32 = 1e-8;

impl Adam {
    fn new(weights: &Weights) -> Self {
        let shapes: Vec<usize> = weights.param_slices().iter().map(|s| s.len()).collect();
        Adam {
            m: shapes.iter().map(|&n| vec![0.0; n]).collect(),
            v: shapes.iter().map(|&n| vec![0.0; n]).collect(),
            decay: weights.decay_flags(),
            t: 0,
        }
    }

    fn step(&mut self, weights: &mut Weights, grads: &Weights, lr: f32, weight_decay: f32) {
        self.t += 1;
        let bc1 = 1.0 - BETA1.powi(self.t);
        let bc2 = 1.0 - BETA2.powi(self.t);
        let grad_slices = grads.param_slices();
        for (i, w) in weights.param_slices_mut().into_iter().enumerate() {
            let g = grad_slices[i];
            let m = &mut self.m[i];
            let v = &mut self.v[i];
            let shrink = if self.decay[i] {
                1.0 - lr * weight_decay
            } else {
                1.0
            };
            for j in 0..w.len() {
                m[j] = BETA1 * m[j] + (1.0 - BETA1) * g[j];
                v[j] = BETA2 * v[j] + (1.0 - BETA2) * g[j] * g[j];
                let m_hat = m[j] / bc1;
                let v_hat = v[j] / bc2;
                w[j] = shrink * w[j] - lr * m_hat / (v_hat.sqrt() + ADAM_EPS);
            }
        }
    }
}

fn clip_global_norm(grads: &mut Weights, clip: f32) {
    let mut total = 0.0f64;
    for slice in grads.param_slices() {
        total += slice.iter().map(|&g| f64::from(g) * f64::from(g)).sum::<f64>();
    }
    let norm = total.sqrt() as f32;
    if norm > clip {
        let scale = clip / norm;
        for slice in grads.param_slices_mut() {
            for g in slice.iter_mut() {
                *g *= scale;
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Tape-based forward/backward
// ---------------------------------------------------------------------------

struct LnStats {
    y: Array2<f32>,
    mean: Array1<f32>,
    inv: Array1<f32>,
}

fn ln_forward(x: &Array2<f32>, g: &Array1<f32>, b: &Array1<f32>) -> LnStats {
    let (t, d) = x.dim();
    let mut y = Array2::zeros((t, d));
    let mut mean = Array1::zeros(t);
    let mut inv = Array1::zeros(t);
    for i in 0..t {
        let row = x.row(i);
        let mu = row.sum() / d as f32;
        let var = row.iter().map(|&v| (v - mu) * (v - mu)).sum::<f32>() / d as f32;
        let iv = 1.0 / (var + LN_EPS).sqrt();
        mean[i] = mu;
        inv[i] = iv;
        for j in 0..d {
            y[[i, j]] = (x[[i, j]] - mu) * iv * g[j] + b[j];
        }
    }
    LnStats { y, mean, inv }
}

/// Backward through LayerNorm; returns dx and accumulates dgain/dbias.
fn ln_backward(
    dy: &Array2<f32>,
    x: &Array2<f32>,
    stats: &LnStats,
    g: &Array1<f32>,
    dgain: &mut [f32],
    dbias: &mut [f32],
) -> Array2<f32> {
    let (t, d) = x.dim();
    let mut dx = Array2::zeros((t, d));
    for i in 0..t {
        let inv = stats.inv[i];
        let mu = stats.mean[i];
        let mut sum_dxhat = 0.0f32;
        let mut sum_dxhat_xhat = 0.0f32;
        for j in 0..d {
            let xhat = (x[[i, j]] - mu) * inv;
            let dyv = dy[[i, j]];
            dgain[j] += dyv * xhat;
            dbias[j] += dyv;
            let dxhat = dyv * g[j];
            sum_dxhat += dxhat;
            sum_dxhat_xhat += dxhat * xhat;
        }
        let inv_d = 1.0 / d as f32;
        for j in 0..d {
            let xhat = (x[[i, j]] - mu) * inv;
            let dxhat = dy[[i, j]] * g[j];
            dx[[i, j]] = inv * (dxhat - sum_dxhat * inv_d - xhat * sum_dxhat_xhat * inv_d);
        }
    }
    dx
}

struct LayerTape {
    x_in: Array2<f32>,
    ln1: LnStats,
    q: Array2<f32>,
    k: Array2<f32>,
    v: Array2<f32>,
    attn: Vec<Array2<f32>>,
    heads: Array2<f32>,
    x_mid: Array2<f32>,
    ln2: LnStats,
    h_pre: Array2<f32>,
}

struct Tape {
    layers: Vec<LayerTape>,
    x_out: Array2<f32>,
    lnf: LnStats,
    logits: Array2<f32>,
}

/// Full-sequence forward pass that records every intermediate needed by the
/// backward pass. Mirrors `ModelBundle::forward` with no hooks.
fn train_forward(w: &Weights, cfg: &ModelConfig, tokens: &[u32]) -> Tape {
    let t_len = tokens.len();
    let d = cfg.d_model;
    let scale = 1.0 / (cfg.d_head as f32).sqrt();

    let mut x = Array2::<f32>::zeros((t_len, d));
    for (i, &tok) in tokens.iter().enumerate() {
        let mut row = x.row_mut(i);
        row.assign(&w.embed.row(tok as usize));
        row += &w.pos.row(i);
    }

    let mut layers = Vec::with_capacity(cfg.n_layers);
    for lw in &w.layers {
        let x_in = x.clone();
        let ln1 = ln_forward(&x_in, &lw.ln1_g, &lw.ln1_b);
        let q = ln1.y.dot(&lw.wq);
        let k = ln1.y.dot(&lw.wk);
        let v = ln1.y.dot(&lw.wv);

        let mut heads = Array2::<f32>::zeros((t_len, d));
        let mut attn = Vec::with_capacity(cfg.n_heads);
        for h in 0..cfg.n_heads {
            let cols = h * cfg.d_head..(h + 1) * cfg.d_head;
            let q_h = q.slice(s![.., cols.clone()]);
            let k_h = k.slice(s![.., cols.clone()]);
            let v_h = v.slice(s![.., cols.clone()]);
            let mut scores = q_h.dot(&k_h.t());
            scores *= scale;
            for i in 0..t_len {
                for j in (i + 1)..t_len {
                    scores[[i, j]] = f32::NEG_INFINITY;
                }
                crate::lm::model::softmax_inplace(scores.row_mut(i));
            }
            let out = scores.dot(&v_h);
            heads.slice_mut(s![.., cols]).assign(&out);
            attn.push(scores);
        }
        x += &heads.dot(&lw.wo);
        let x_mid = x.clone();

        let ln2 = ln_forward(&x_mid, &lw.ln2_g, &lw.ln2_b);
        let h_pre = ln2.y.dot(&lw.w1);
        let h_relu = h_pre.mapv(|v| v.max(0.0));
        x += &h_relu.dot(&lw.w2);

        layers.push(LayerTape {
            x_in,
            ln1,
            q,
            k,
            v,
            attn,
            heads,
            x_mid,
            ln2,
            h_pre,
        });
    }

    let x_out = x;
    let lnf = ln_forward(&x_out, &w.lnf_g, &w.lnf_b);
    let logits = lnf.y.dot(&w.unembed);
    Tape {
        layers,
        x_out,
        lnf,
        logits,
    }
}

/// One episode's forward + backward. Gradients of `scale * mean-CE` are added
/// into `grads`; returns the (unscaled) mean cross-entropy over the episode's
/// next-token positions.
fn forward_backward(
    w: &Weights,
    cfg: &ModelConfig,
    tokens: &[u32],
    skip_target: Option<usize>,
    grads: &mut Weights,
    scale: f32,
) -> f32 {
    let tape = train_forward(w, cfg, tokens);
    let t_len = tokens.len();
    let n_pred = t_len - 1;
    let skipped = usize::from(skip_target.is_some_and(|s| s < n_pred));
    let supervised = (n_pred - skipped).max(1);

    // Softmax + cross-entropy at every position with a target.
    let mut dlogits = Array2::<f32>::zeros(tape.logits.raw_dim());
    let mut loss = 0.0f32;
    for i in 0..n_pred {
        if skip_target == Some(i) {
            continue;
        }
        let row = tape.logits.row(i);
        let max = row.iter().copied().fold(f32::NEG_INFINITY, f32::max);
        let mut denom = 0.0f32;
        for &v in row {
            denom += (v - max).exp();
        }
        let target = tokens[i + 1] as usize;
        let log_p = (tape.logits[[i, target]] - max) - denom.ln();
        loss -= log_p;
        let coeff = scale / supervised as f32;
        for j in 0..row.len() {
            let p = (row[j] - max).exp() / denom;
            dlogits[[i, j]] = p * coeff;
        }
        dlogits[[i, target]] -= coeff;
    }
    loss /= supervised as f32;

    // Unembedding and final LayerNorm.
    grads.unembed += &tape.lnf.y.t().dot(&dlogits);
    let dxf = dlogits.dot(&w.unembed.t());
    let mut dx = ln_backward(
        &dxf,
        &tape.x_out,
        &tape.lnf,
        &w.lnf_g,
        grads.lnf_g.as_slice_mut().expect("standard layout"),
        grads.lnf_b.as_slice_mut().expect("standard layout"),
    );

    let scale_attn = 1.0 / (cfg.d_head as f32).sqrt();
    for (l, tape_l) in tape.layers.iter().enumerate().rev() {
        let lw = &w.layers[l];
        let gl = &mut grads.layers[l];

        // Feed-forward branch.
        let h_relu = tape_l.h_pre.mapv(|v| v.max(0.0));
        gl.w2 += &h_relu.t().dot(&dx);
        let mut dh = dx.dot(&lw.w2.t());
        ndarray::Zip::from(&mut dh).and(&tape_l.h_pre).for_each(|g, &h| {
            if h <= 0.0 {
                *g = 0.0;
            }
        });
        gl.w1 += &tape_l.ln2.y.t().dot(&dh);
        let dxn2 = dh.dot(&lw.w1.t());
        let dx_ln2 = ln_backward(
            &dxn2,
            &tape_l.x_mid,
            &tape_l.ln2,
            &lw.ln2_g,
            gl.ln2_g.as_slice_mut().expect("standard layout"),
            gl.ln2_b.as_slice_mut().expect("standard layout"),
        );
        let dx_mid = &dx + &dx_ln2;

        // Attention branch.
        gl.wo += &tape_l.heads.t().dot(&dx_mid);
        let dheads = dx_mid.dot(&lw.wo.t());
        let mut dq = Array2::<f32>::zeros(tape_l.q.raw_dim());
        let mut dk = Array2::<f32>::zeros(tape_l.k.raw_dim());
        let mut dv = Array2::<f32>::zeros(tape_l.v.raw_dim());
        for h in 0..cfg.n_heads {
            let cols = h * cfg.d_head..(h + 1) * cfg.d_head;
            let attn = &tape_l.attn[h];
            let do_h = dheads.slice(s![.., cols.clone()]);
            let v_h = tape_l.v.slice(s![.., cols.clone()]);
            let k_h = tape_l.k.slice(s![.., cols.clone()]);
            let q_h = tape_l.q.slice(s![.., cols.clone()]);

            let dw = do_h.dot(&v_h.t());
            dv.slice_mut(s![.., cols.clone()])
                .assign(&attn.t().dot(&do_h));
            // Softmax backward, row by row; masked entries have zero weight
            // and therefore zero gradient.
            let mut ds = Array2::<f32>::zeros(dw.raw_dim());
            for i in 0..t_len {
                let mut dot = 0.0f32;
                for j in 0..=i {
                    dot += dw[[i, j]] * attn[[i, j]];
                }
                for j in 0..=i {
                    ds[[i, j]] = attn[[i, j]] * (dw[[i, j]] - dot);
                }
            }
            let mut dq_h = ds.dot(&k_h);
            dq_h *= scale_attn;
            dq.slice_mut(s![.., cols.clone()]).assign(&dq_h);
            let mut dk_h = ds.t().dot(&q_h);
            dk_h *= scale_attn;
            dk.slice_mut(s![.., cols]).assign(&dk_h);
        }
        gl.wq += &tape_l.ln1.y.t().dot(&dq);
        gl.wk += &tape_l.ln1.y.t().dot(&dk);
        gl.wv += &tape_l.ln1.y.t().dot(&dv);
        let dxn1 = dq.dot(&lw.wq.t()) + dk.dot(&lw.wk.t()) + dv.dot(&lw.wv.t());
        let dx_ln1 = ln_backward(
            &dxn1,
            &tape_l.x_in,
            &tape_l.ln1,
            &lw.ln1_g,
            gl.ln1_g.as_slice_mut().expect("standard layout"),
            gl.ln1_b.as_slice_mut().expect("standard layout"),
        );
        dx = dx_mid + dx_ln1;
    }

    // Embeddings.
    for (i, &tok) in tokens.iter().enumerate() {
        let mut erow = grads.embed.row_mut(tok as usize);
        erow += &dx.row(i);
        let mut prow = grads.pos.row_mut(i);
        prow += &dx.row(i);
    }

    loss
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_setup() -> (ModelConfig, Tokenizer) {
        let tokenizer = Tokenizer::from_words(["aa", "bb", "cc", "dd"]).unwrap();
        let config = ModelConfig {
            n_layers: 2,
            n_heads: 2,
            d_model: 16,
            d_head: 8,
            vocab_size: tokenizer.vocab_size(),
            max_seq_len: 64,
            seed: 5,
        };
        (config, tokenizer)
    }

    fn tiny_curriculum() -> Curriculum {
        let episodes = vec![
            "Q: aa\nA: bb\n".to_string(),
            "Q: bb\nA: aa\n".to_string(),
            "Q: cc\nA: dd\n".to_string(),
            "Q: dd\nA: cc\n".to_string(),
        ];
        Curriculum {
            episodes,
            probes: vec![],
        }
    }

    #[test]
    fn train_forward_matches_inference_forward() {
        let (config, tokenizer) = tiny_setup();
        let model = ModelBundle::init(config.clone(), tokenizer.clone()).unwrap();
        let tokens = tokenizer.encode("Q: aa bb\nA: cc dd\n\nQ: bb\nA:");
        let tape = train_forward(&model.weights, &config, &tokens);
        let (logits, _) = model.forward(&tokens, &HookSet::default()).unwrap();
        let max_diff = (&tape.logits - &logits)
            .iter()
            .fold(0.0f32, |m, &d| m.max(d.abs()));
        assert!(max_diff < 1e-4, "training forward drifted by {max_diff}");
    }

    #[test]
    fn gradients_match_finite_differences() {
        let tokenizer = Tokenizer::from_words(["aa", "bb"]).unwrap();
        let config = ModelConfig {
            n_layers: 1,
            n_heads: 1,
            d_model: 8,
            d_head: 8,
            vocab_size: tokenizer.vocab_size(),
            max_seq_len: 64,
            seed: 11,
        };
        let model = ModelBundle::init(config.clone(), tokenizer.clone()).unwrap();
        let tokens = tokenizer.encode("Q: aa\nA: bb\nQ: bb\nA: aa");

        let mut grads = Weights::zeros_like(&config).unwrap();
        forward_backward(&model.weights, &config, &tokens, None, &mut grads, 1.0);

        let loss_at = |w: &Weights| -> f64 {
            let tape = train_forward(w, &config, &tokens);
            let mut loss = 0.0f64;
            for i in 0..tokens.len() - 1 {
                let row = tape.logits.row(i);
                let max = row.iter().copied().fold(f32::NEG_INFINITY, f32::max);
                let denom: f64 = row.iter().map(|&v| f64::from(v - max).exp()).sum();
                let target = tokens[i + 1] as usize;
                loss -= f64::from(row[target] - max) - denom.ln();
            }
            loss / (tokens.len() - 1) as f64
        };

        // Check the highest-magnitude gradient entries in a few tensors.
        let grad_slices = grads.param_slices();
        let mut checked = 0usize;
        for tensor in [0usize, 2, 5, 6, 7, 14] {
            let slice = grad_slices[tensor];
            let (j, &g) = slice
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.abs().partial_cmp(&b.1.abs()).unwrap())
                .unwrap();
            if g.abs() < 1e-5 {
                continue;
            }
            let eps = 3e-3f32;
            let mut plus = model.weights.clone();
            plus.param_slices_mut()[tensor][j] += eps;
            let mut minus = model.weights.clone();
            minus.param_slices_mut()[tensor][j] -= eps;
            let fd = (loss_at(&plus) - loss_at(&minus)) / (2.0 * f64::from(eps));
            let g = f64::from(g);
            let tol = 0.08 * g.abs().max(0.02);
            assert!(
                (fd - g).abs() <= tol,
                "tensor {tensor} entry {j}: finite diff {fd:.6} vs grad {g:.6}"
            );
            checked += 1;
        }
        assert!(checked >= 4, "too few gradient entries were checkable");
    }

    #[test]
    fn zero_steps_returns_initialization() {
        let (config, tokenizer) = tiny_setup();
        let params = TrainParams {
            steps: 0,
            ..TrainParams::default()
        };
        let (model, report) = train_toy(&tiny_curriculum(), &config, &tokenizer, &params).unwrap();
        let fresh = ModelBundle::init(config, tokenizer).unwrap();
        assert_eq!(
            crate::lm::serialize::model_to_bytes(&model),
            crate::lm::serialize::model_to_bytes(&fresh)
        );
        assert_eq!(report.steps_run, 0);
    }

    #[test]
    fn same_seed_trains_to_identical_bytes() {
        let (config, tokenizer) = tiny_setup();
        let params = TrainParams {
            steps: 25,
            warmup_steps: 5,
            batch_size: 2,
            icl_threshold: 0.0,
            ..TrainParams::default()
        };
        let (a, _) = train_toy(&tiny_curriculum(), &config, &tokenizer, &params).unwrap();
        let (b, _) = train_toy(&tiny_curriculum(), &config, &tokenizer, &params).unwrap();
        assert_eq!(
            crate::lm::serialize::model_to_bytes(&a),
            crate::lm::serialize::model_to_bytes(&b)
        );
    }

    #[test]
    fn training_lowers_loss() {
        let (config, tokenizer) = tiny_setup();
        let curriculum = tiny_curriculum();
        let short = TrainParams {
            steps: 5,
            warmup_steps: 5,
            icl_threshold: 0.0,
            ..TrainParams::default()
        };
        let long = TrainParams {
            steps: 150,
            warmup_steps: 10,
            icl_threshold: 0.0,
            ..TrainParams::default()
        };
        let (_, early) = train_toy(&curriculum, &config, &tokenizer, &short).unwrap();
        let (_, late) = train_toy(&curriculum, &config, &tokenizer, &long).unwrap();
        assert!(
            late.final_loss < early.final_loss,
            "loss did not improve: {} -> {}",
            early.final_loss,
            late.final_loss
        );
    }

    #[test]
    fn empty_curriculum_rejected() {
        let (config, tokenizer) = tiny_setup();
        let empty = Curriculum::default();
        assert!(train_toy(&empty, &config, &tokenizer, &TrainParams::default()).is_err());
    }

    #[test]
    fn curriculum_round_trips_through_jsonl() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("curriculum.jsonl");
        let mut curriculum = tiny_curriculum();
        curriculum.probes.push(IclProbe {
            task: "pairs".into(),
            prompt: "Q: aa\nA:".into(),
            expected: "bb".into(),
        });
        curriculum.save(&path).unwrap();
        let back = Curriculum::load(&path).unwrap();
        assert_eq!(back, curriculum);
    }

    #[test]
    fn malformed_curriculum_line_names_the_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.jsonl");
        std::fs::write(&path, "{\"kind\":\"episode\",\"text\":\"ok\"}\n{nope}\n").unwrap();
        match Curriculum::load(&path) {
            Err(SvError::Input(msg)) => assert!(msg.contains(":2:"), "{msg}"),
            other => panic!("expected input error, got {other:?}"),
        }
    }
}
