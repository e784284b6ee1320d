//! Model hyperparameters.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SvError};

/// Shape and seed of a toy transformer.
///
/// `d_model` is always `n_heads * d_head`; the feed-forward width is fixed at
/// `4 * d_model`. `max_seq_len` must leave room for 10-shot prompts on the
/// bundled tasks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub n_layers: usize,
    pub n_heads: usize,
    pub d_model: usize,
    pub d_head: usize,
    pub vocab_size: usize,
    pub max_seq_len: usize,
    pub seed: u64,
}

impl ModelConfig {
    /// The shipped toy scale: 4 layers, 8 heads, d_model 128.
    /// `vocab_size` is filled in once the tokenizer is built.
    pub fn toy(vocab_size: usize, seed: u64) -> Self {
        ModelConfig {
            n_layers: 4,
            n_heads: 8,
            d_model: 128,
            d_head: 16,
            vocab_size,
            max_seq_len: 256,
            seed,
        }
    }

    /// Feed-forward hidden width.
    #[must_use]
    pub fn d_ff(&self) -> usize {
        4 * self.d_model
    }

    /// Checks the structural invariants.
    ///
    /// # Errors
    /// Returns a configuration error when any dimension is zero, when
    /// `n_heads * d_head != d_model`, or when `max_seq_len < 64`.
    pub fn validate(&self) -> Result<()> {
        if self.n_layers == 0
            || self.n_heads == 0
            || self.d_model == 0
            || self.d_head == 0
            || self.vocab_size == 0
        {
            return Err(SvError::config("all model dimensions must be positive"));
        }
        if self.n_heads * self.d_head != self.d_model {
            return Err(SvError::Config(format!(
                "n_heads ({}) x d_head ({}) must equal d_model ({})",
                self.n_heads, self.d_head, self.d_model
            )));
        }
        if self.max_seq_len < 64 {
            return Err(SvError::Config(format!(
                "max_seq_len must be at least 64, got {}",
                self.max_seq_len
            )));
        }
        Ok(())
    }

    /// Total number of attention heads across all layers.
    #[must_use]
    pub fn total_heads(&self) -> usize {
        self.n_layers * self.n_heads
    }
}
