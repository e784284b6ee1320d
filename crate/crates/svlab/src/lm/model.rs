//! The toy decoder-only transformer: seeded weights, hooked forward pass,
//! and greedy generation with a KV cache.
//!
//! Architecture: learned token + position embeddings, pre-LayerNorm blocks
//! (causal multi-head attention, then a ReLU feed-forward of width
//! `4*d_model`), a final LayerNorm, and an untied unembedding. All math is
//! f32 and single-threaded per call; a model is read-only during forward and
//! generate, so many calls may run concurrently over one instance.

use ndarray::{s, Array1, Array2, ArrayView1, ArrayViewMut1};
use rand_distr::{Distribution, Normal};

use crate::error::{Result, SvError};
use crate::lm::config::ModelConfig;
use crate::lm::hooks::HookSet;
use crate::lm::tokenizer::Tokenizer;
use crate::lm::trace::ActivationTrace;
use crate::rng::{derive_rng, name_tag};

/// LayerNorm variance epsilon.
pub const LN_EPS: f32 = 1e-5;

// ---------------------------------------------------------------------------
// Weights
// ---------------------------------------------------------------------------

/// One transformer block's parameters.
#[derive(Debug, Clone)]
pub struct LayerWeights {
    /// Query/key/value projections, each `[d_model x d_model]`.
    pub wq: Array2<f32>,
    pub wk: Array2<f32>,
    pub wv: Array2<f32>,
    /// Attention output projection `[d_model x d_model]`; row block
    /// `h*d_head..(h+1)*d_head` maps head `h` into residual space.
    pub wo: Array2<f32>,
    /// Feed-forward in/out, `[d_model x d_ff]` and `[d_ff x d_model]`.
    pub w1: Array2<f32>,
    pub w2: Array2<f32>,
    pub ln1_g: Array1<f32>,
    pub ln1_b: Array1<f32>,
    pub ln2_g: Array1<f32>,
    pub ln2_b: Array1<f32>,
}

/// All model parameters.
#[derive(Debug, Clone)]
pub struct Weights {
    /// Token embeddings `[vocab_size x d_model]`.
    pub embed: Array2<f32>,
    /// Learned position embeddings `[max_seq_len x d_model]`.
    pub pos: Array2<f32>,
    pub layers: Vec<LayerWeights>,
    pub lnf_g: Array1<f32>,
    pub lnf_b: Array1<f32>,
    /// Unembedding `[d_model x vocab_size]`, untied from `embed`.
    pub unembed: Array2<f32>,
}

impl Weights {
    /// Seeded initialization: every projection is Normal(0, 0.02), with the
    /// residual-writing projections (`wo`, `w2`) scaled down by
    /// `1/sqrt(2*n_layers)`; LayerNorms start at gain 1, bias 0.
    pub fn init(config: &ModelConfig) -> Result<Self> {
        config.validate()?;
        let mut rng = derive_rng(config.seed, &[name_tag("init")]);
        let base = Normal::new(0.0f32, 0.02).expect("finite std");
        let residual_std = 0.02 / ((2 * config.n_layers) as f32).sqrt();
        let scaled = Normal::new(0.0f32, residual_std).expect("finite std");

        let mut draw = |rows: usize, cols: usize, dist: Normal<f32>| -> Array2<f32> {
            let data: Vec<f32> = (0..rows * cols).map(|_| dist.sample(&mut rng)).collect();
            Array2::from_shape_vec((rows, cols), data).expect("shape matches data")
        };

        let d = config.d_model;
        let embed = draw(config.vocab_size, d, base);
        let pos = draw(config.max_seq_len, d, base);
        let layers = (0..config.n_layers)
            .map(|_| LayerWeights {
                wq: draw(d, d, base),
                wk: draw(d, d, base),
                wv: draw(d, d, base),
                wo: draw(d, d, scaled),
                w1: draw(d, config.d_ff(), base),
                w2: draw(config.d_ff(), d, scaled),
                ln1_g: Array1::ones(d),
                ln1_b: Array1::zeros(d),
                ln2_g: Array1::ones(d),
                ln2_b: Array1::zeros(d),
            })
            .collect();
        let unembed = draw(d, config.vocab_size, base);
        Ok(Weights {
            embed,
            pos,
            layers,
            lnf_g: Array1::ones(d),
            lnf_b: Array1::zeros(d),
            unembed,
        })
    }

    /// Zero-filled parameters with the same shapes (gradient buffers).
    pub fn zeros_like(config: &ModelConfig) -> Result<Self> {
        config.validate()?;
        let d = config.d_model;
        let layers = (0..config.n_layers)
            .map(|_| LayerWeights {
                wq: Array2::zeros((d, d)),
                wk: Array2::zeros((d, d)),
                wv: Array2::zeros((d, d)),
                wo: Array2::zeros((d, d)),
                w1: Array2::zeros((d, config.d_ff())),
                w2: Array2::zeros((config.d_ff(), d)),
                ln1_g: Array1::zeros(d),
                ln1_b: Array1::zeros(d),
                ln2_g: Array1::zeros(d),
                ln2_b: Array1::zeros(d),
            })
            .collect();
        Ok(Weights {
            embed: Array2::zeros((config.vocab_size, d)),
            pos: Array2::zeros((config.max_seq_len, d)),
            layers,
            lnf_g: Array1::zeros(d),
            lnf_b: Array1::zeros(d),
            unembed: Array2::zeros((d, config.vocab_size)),
        })
    }

    /// Every parameter tensor as a flat slice, in the canonical order used by
    /// serialization and the optimizer: `embed`, `pos`, then per layer
    /// `[wq wk wv wo w1 w2 ln1_g ln1_b ln2_g ln2_b]`, then `lnf_g`, `lnf_b`,
    /// `unembed`.
    #[must_use]
    pub fn param_slices(&self) -> Vec<&[f32]> {
        let mut out: Vec<&[f32]> = Vec::new();
        out.push(self.embed.as_slice().expect("standard layout"));
        out.push(self.pos.as_slice().expect("standard layout"));
        for lw in &self.layers {
            out.push(lw.wq.as_slice().expect("standard layout"));
            out.push(lw.wk.as_slice().expect("standard layout"));
            out.push(lw.wv.as_slice().expect("standard layout"));
            out.push(lw.wo.as_slice().expect("standard layout"));
            out.push(lw.w1.as_slice().expect("standard layout"));
            out.push(lw.w2.as_slice().expect("standard layout"));
            out.push(lw.ln1_g.as_slice().expect("standard layout"));
            out.push(lw.ln1_b.as_slice().expect("standard layout"));
            out.push(lw.ln2_g.as_slice().expect("standard layout"));
            out.push(lw.ln2_b.as_slice().expect("standard layout"));
        }
        out.push(self.lnf_g.as_slice().expect("standard layout"));
        out.push(self.lnf_b.as_slice().expect("standard layout"));
        out.push(self.unembed.as_slice().expect("standard layout"));
        out
    }

    /// Mutable view of [`Weights::param_slices`], same order.
    #[must_use]
    pub fn param_slices_mut(&mut self) -> Vec<&mut [f32]> {
        let mut out: Vec<&mut [f32]> = Vec::new();
        out.push(self.embed.as_slice_mut().expect("standard layout"));
        out.push(self.pos.as_slice_mut().expect("standard layout"));
        for lw in &mut self.layers {
            out.push(lw.wq.as_slice_mut().expect("standard layout"));
            out.push(lw.wk.as_slice_mut().expect("standard layout"));
            out.push(lw.wv.as_slice_mut().expect("standard layout"));
            out.push(lw.wo.as_slice_mut().expect("standard layout"));
            out.push(lw.w1.as_slice_mut().expect("standard layout"));
            out.push(lw.w2.as_slice_mut().expect("standard layout"));
            out.push(lw.ln1_g.as_slice_mut().expect("standard layout"));
            out.push(lw.ln1_b.as_slice_mut().expect("standard layout"));
            out.push(lw.ln2_g.as_slice_mut().expect("standard layout"));
            out.push(lw.ln2_b.as_slice_mut().expect("standard layout"));
        }
        out.push(self.lnf_g.as_slice_mut().expect("standard layout"));
        out.push(self.lnf_b.as_slice_mut().expect("standard layout"));
        out.push(self.unembed.as_slice_mut().expect("standard layout"));
        out
    }
}

// ---------------------------------------------------------------------------
// Model bundle
// ---------------------------------------------------------------------------

/// Weights plus the tokenizer and config they were built with.
#[derive(Debug, Clone)]
pub struct ModelBundle {
    pub config: ModelConfig,
    pub tokenizer: Tokenizer,
    pub weights: Weights,
}

/// Per-layer key/value cache for incremental decoding.
struct KvCache {
    k: Vec<Array2<f32>>,
    v: Vec<Array2<f32>>,
}

impl KvCache {
    fn new(config: &ModelConfig, capacity: usize) -> Self {
        let make = || {
            (0..config.n_layers)
                .map(|_| Array2::zeros((capacity, config.d_model)))
                .collect()
        };
        KvCache { k: make(), v: make() }
    }
}

/// Capture buffers filled while a chunk runs.
#[derive(Default)]
struct ChunkCapture {
    residual: Option<Vec<Array2<f32>>>,
    head_out: Option<Vec<Array2<f32>>>,
}

impl ModelBundle {
    /// Fresh model with seeded initial weights.
    ///
    /// # Errors
    /// Returns a configuration error when the config is invalid or the
    /// tokenizer size disagrees with `config.vocab_size`.
    pub fn init(config: ModelConfig, tokenizer: Tokenizer) -> Result<Self> {
        if tokenizer.vocab_size() != config.vocab_size {
            return Err(SvError::Config(format!(
                "tokenizer has {} tokens but config.vocab_size is {}",
                tokenizer.vocab_size(),
                config.vocab_size
            )));
        }
        let weights = Weights::init(&config)?;
        Ok(ModelBundle {
            config,
            tokenizer,
            weights,
        })
    }

    fn check_tokens(&self, tokens: &[u32]) -> Result<()> {
        if tokens.is_empty() {
            return Err(SvError::input("token sequence must be non-empty"));
        }
        if tokens.len() > self.config.max_seq_len {
            return Err(SvError::Input(format!(
                "sequence of {} tokens exceeds max_seq_len {}",
                tokens.len(),
                self.config.max_seq_len
            )));
        }
        if let Some(&bad) = tokens.iter().find(|&&t| (t as usize) >= self.config.vocab_size) {
            return Err(SvError::Input(format!(
                "token id {bad} out of range (vocab_size {})",
                self.config.vocab_size
            )));
        }
        Ok(())
    }

    /// Hooked forward pass over a whole sequence.
    ///
    /// Returns next-token logits for every position (`[token x vocab_size]`)
    /// and a trace populated per `hooks.capture`. Deterministic for fixed
    /// inputs.
    ///
    /// # Errors
    /// Input error for an empty/over-long/out-of-vocabulary sequence;
    /// configuration error for out-of-range hook indices or sizes.
    pub fn forward(&self, tokens: &[u32], hooks: &HookSet) -> Result<(Array2<f32>, ActivationTrace)> {
        self.check_tokens(tokens)?;
        hooks.validate(&self.config)?;
        let mut cache = KvCache::new(&self.config, tokens.len());
        let mut capture = ChunkCapture {
            residual: hooks.capture.residual.then(Vec::new),
            head_out: hooks.capture.head_out.then(Vec::new),
        };
        let logits = self.forward_chunk(tokens, 0, tokens.len(), &mut cache, hooks, &mut capture);
        let mut trace = ActivationTrace::new(&self.config);
        if let Some(residual) = capture.residual {
            trace.set_residual(residual);
        }
        if let Some(head_out) = capture.head_out {
            trace.set_head_out(head_out);
        }
        if hooks.capture.logits {
            trace.set_logits(logits.clone());
        }
        Ok((logits, trace))
    }

    /// Greedy decoding. Hooks are re-applied at every step with position
    /// rules evaluated against the sequence as it stands, so an "every
    /// position" rule covers generated tokens and a "final position" rule
    /// follows the moving end of the sequence.
    ///
    /// Returns the generated continuation (prompt excluded). Decoding stops
    /// after `max_new` tokens, immediately after emitting `stop` if given, or
    /// when the context window fills. Capture flags are ignored here.
    ///
    /// # Errors
    /// Input error when `max_new` is 0 or the prompt is empty, over-long, or
    /// out of vocabulary; configuration error for bad hook indices.
    pub fn generate(
        &self,
        prompt: &[u32],
        max_new: usize,
        hooks: &HookSet,
        stop: Option<u32>,
    ) -> Result<Vec<u32>> {
        if max_new == 0 {
            return Err(SvError::input("max_new must be at least 1"));
        }
        self.check_tokens(prompt)?;
        hooks.validate(&self.config)?;
        let capacity = (prompt.len() + max_new).min(self.config.max_seq_len);
        let mut cache = KvCache::new(&self.config, capacity);
        let mut no_capture = ChunkCapture::default();

        let logits = self.forward_chunk(prompt, 0, prompt.len(), &mut cache, hooks, &mut no_capture);
        let mut next = argmax(logits.row(logits.nrows() - 1));
        let mut seq_len = prompt.len();
        let mut out = Vec::with_capacity(max_new);
        loop {
            out.push(next);
            seq_len += 1;
            if out.len() >= max_new || stop == Some(next) || seq_len >= self.config.max_seq_len {
                break;
            }
            let logits =
                self.forward_chunk(&[next], seq_len - 1, seq_len, &mut cache, hooks, &mut no_capture);
            next = argmax(logits.row(0));
        }
        Ok(out)
    }

    /// Projects one head's activation (size `d_head`) into residual space
    /// through its block of the attention output projection.
    ///
    /// # Errors
    /// Configuration error for out-of-range indices or a wrong-sized
    /// activation.
    pub fn project_head(&self, layer: usize, head: usize, activation: &[f32]) -> Result<Array1<f32>> {
        if layer >= self.config.n_layers || head >= self.config.n_heads {
            return Err(SvError::Config(format!(
                "head ({layer}, {head}) out of range for {} layers x {} heads",
                self.config.n_layers, self.config.n_heads
            )));
        }
        if activation.len() != self.config.d_head {
            return Err(SvError::Config(format!(
                "activation has size {}, want d_head {}",
                activation.len(),
                self.config.d_head
            )));
        }
        let start = head * self.config.d_head;
        let block = self.weights.layers[layer]
            .wo
            .slice(s![start..start + self.config.d_head, ..]);
        let a = ndarray::aview1(activation);
        Ok(a.dot(&block))
    }

    /// Runs `tokens` (absolute positions `offset..offset+len`) through every
    /// block, extending the cache, and returns logits for the new rows.
    /// `seq_len` is the full current sequence length used by position rules.
    fn forward_chunk(
        &self,
        tokens: &[u32],
        offset: usize,
        seq_len: usize,
        cache: &mut KvCache,
        hooks: &HookSet,
        capture: &mut ChunkCapture,
    ) -> Array2<f32> {
        let cfg = &self.config;
        let t_new = tokens.len();
        let d = cfg.d_model;

        let mut x = Array2::<f32>::zeros((t_new, d));
        for (i, &tok) in tokens.iter().enumerate() {
            let mut row = x.row_mut(i);
            row.assign(&self.weights.embed.row(tok as usize));
            row += &self.weights.pos.row(offset + i);
        }

        let scale = 1.0 / (cfg.d_head as f32).sqrt();
        for (l, lw) in self.weights.layers.iter().enumerate() {
            // Residual-stream write hooks fire at the layer input; captures
            // record what the layer actually sees.
            for add in &hooks.residual_add {
                if let Some(vector) = add.vector_for(l) {
                    for i in 0..t_new {
                        if add.rule.matches(offset + i, seq_len) {
                            add_to_row(x.row_mut(i), vector, add.strength, add.renormalize);
                        }
                    }
                }
            }
            if let Some(rows) = capture.residual.as_mut() {
                rows.push(x.clone());
            }

            // Attention.
            let xn = layer_norm(&x, &lw.ln1_g, &lw.ln1_b);
            let q = xn.dot(&lw.wq);
            let k_new = xn.dot(&lw.wk);
            let v_new = xn.dot(&lw.wv);
            cache.k[l]
                .slice_mut(s![offset..offset + t_new, ..])
                .assign(&k_new);
            cache.v[l]
                .slice_mut(s![offset..offset + t_new, ..])
                .assign(&v_new);

            let mut heads = Array2::<f32>::zeros((t_new, d));
            for h in 0..cfg.n_heads {
                let cols = h * cfg.d_head..(h + 1) * cfg.d_head;
                for i in 0..t_new {
                    let ctx = offset + i + 1;
                    let k_ctx = cache.k[l].slice(s![..ctx, cols.clone()]);
                    let v_ctx = cache.v[l].slice(s![..ctx, cols.clone()]);
                    let q_h = q.slice(s![i, cols.clone()]);
                    let mut scores = k_ctx.dot(&q_h);
                    scores *= scale;
                    softmax_inplace(scores.view_mut());
                    let head_out = scores.dot(&v_ctx);
                    heads.slice_mut(s![i, cols.clone()]).assign(&head_out);
                }
            }
            for sub in &hooks.head_substitute {
                if sub.layer == l {
                    let cols = sub.head * cfg.d_head..(sub.head + 1) * cfg.d_head;
                    for i in 0..t_new {
                        if sub.pos.matches(offset + i, seq_len) {
                            heads
                                .slice_mut(s![i, cols.clone()])
                                .assign(&ndarray::aview1(&sub.replacement));
                        }
                    }
                }
            }
            if let Some(rows) = capture.head_out.as_mut() {
                rows.push(heads.clone());
            }
            x += &heads.dot(&lw.wo);

            // Feed-forward.
            let xn2 = layer_norm(&x, &lw.ln2_g, &lw.ln2_b);
            let mut hidden = xn2.dot(&lw.w1);
            hidden.mapv_inplace(|v| v.max(0.0));
            x += &hidden.dot(&lw.w2);
        }

        let xf = layer_norm(&x, &self.weights.lnf_g, &self.weights.lnf_b);
        xf.dot(&self.weights.unembed)
    }
}

// ---------------------------------------------------------------------------
// Numeric helpers
// ---------------------------------------------------------------------------

/// Row-wise LayerNorm with learned gain and bias.
pub(crate) fn layer_norm(x: &Array2<f32>, g: &Array1<f32>, b: &Array1<f32>) -> Array2<f32> {
    let d = x.ncols();
    let mut out = Array2::zeros(x.raw_dim());
    for (row, mut dst) in x.outer_iter().zip(out.outer_iter_mut()) {
        let mean = row.sum() / d as f32;
        let var = row.iter().map(|&v| (v - mean) * (v - mean)).sum::<f32>() / d as f32;
        let inv = 1.0 / (var + LN_EPS).sqrt();
        for (j, &v) in row.iter().enumerate() {
            dst[j] = (v - mean) * inv * g[j] + b[j];
        }
    }
    out
}

/// Numerically safe softmax over one score vector.
pub(crate) fn softmax_inplace(mut scores: ArrayViewMut1<'_, f32>) {
    let max = scores.iter().copied().fold(f32::NEG_INFINITY, f32::max);
    let mut sum = 0.0f32;
    for v in scores.iter_mut() {
        *v = (*v - max).exp();
        sum += *v;
    }
    for v in scores.iter_mut() {
        *v /= sum;
    }
}

/// Index of the largest value; the first one wins a tie.
pub(crate) fn argmax(row: ArrayView1<'_, f32>) -> u32 {
    let mut best = 0usize;
    let mut best_val = f32::NEG_INFINITY;
    for (i, &v) in row.iter().enumerate() {
        if v > best_val {
            best_val = v;
            best = i;
        }
    }
    best as u32
}

fn add_to_row(mut row: ArrayViewMut1<'_, f32>, vector: &[f32], strength: f32, renormalize: bool) {
    let pre_norm = row.iter().map(|&v| v * v).sum::<f32>().sqrt();
    for (r, &v) in row.iter_mut().zip(vector.iter()) {
        *r += strength * v;
    }
    if renormalize {
        let new_norm = row.iter().map(|&v| v * v).sum::<f32>().sqrt();
        if new_norm > 0.0 {
            let scale = pre_norm / new_norm;
            row.mapv_inplace(|v| v * scale);
        }
    }
}
