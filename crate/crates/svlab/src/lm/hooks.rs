//! Forward-pass hooks: residual-stream additions, head-output substitution,
//! and capture flags.
//!
//! Hooks never touch model weights; they edit or record activations while a
//! forward pass runs. Position rules are evaluated against the sequence as it
//! exists at the step a position is computed, so during incremental decoding
//! "final" means the last token of the current sequence at each step.

use crate::error::{Result, SvError};
use crate::lm::config::ModelConfig;

// ---------------------------------------------------------------------------
// Position selectors
// ---------------------------------------------------------------------------

/// Which token positions a residual addition targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PositionRule {
    /// Every token position, including tokens generated later.
    Every,
    /// Only the final position of the current sequence (re-evaluated each
    /// decode step).
    Final,
}

/// Which single token position a head substitution targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenPos {
    /// The final position of the current sequence.
    Final,
    /// An absolute position index.
    Index(usize),
}

impl TokenPos {
    /// Whether an absolute position matches, given the current sequence
    /// length.
    #[must_use]
    pub fn matches(self, position: usize, seq_len: usize) -> bool {
        match self {
            TokenPos::Final => position + 1 == seq_len,
            TokenPos::Index(i) => position == i,
        }
    }
}

impl PositionRule {
    /// Whether an absolute position matches, given the current sequence
    /// length.
    #[must_use]
    pub fn matches(self, position: usize, seq_len: usize) -> bool {
        match self {
            PositionRule::Every => true,
            PositionRule::Final => position + 1 == seq_len,
        }
    }
}

// ---------------------------------------------------------------------------
// Write hooks
// ---------------------------------------------------------------------------

/// Adds `strength * vector` to the residual stream at the input of each
/// listed layer, at every position the rule selects. `layers` and `vectors`
/// are aligned: `vectors[i]` is injected at `layers[i]`.
#[derive(Debug, Clone)]
pub struct ResidualAdd {
    pub layers: Vec<usize>,
    pub vectors: Vec<Vec<f32>>,
    pub strength: f32,
    pub rule: PositionRule,
    /// Rescale the updated row back to its pre-update Euclidean norm.
    pub renormalize: bool,
}

impl ResidualAdd {
    /// The vector injected at `layer`, if this entry targets it.
    #[must_use]
    pub fn vector_for(&self, layer: usize) -> Option<&[f32]> {
        self.layers
            .iter()
            .position(|&l| l == layer)
            .map(|i| self.vectors[i].as_slice())
    }
}

/// Replaces one attention head's output (before the output projection) at a
/// single token position.
#[derive(Debug, Clone)]
pub struct HeadSubstitute {
    pub layer: usize,
    pub head: usize,
    pub pos: TokenPos,
    /// Replacement activation of size `d_head`.
    pub replacement: Vec<f32>,
}

// ---------------------------------------------------------------------------
// Capture flags
// ---------------------------------------------------------------------------

/// Which activation classes a forward pass records into its trace.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CaptureFlags {
    /// Residual stream at each layer input (after write hooks).
    pub residual: bool,
    /// Per-head attention outputs before the output projection.
    pub head_out: bool,
    /// Next-token logits at every position.
    pub logits: bool,
}

impl CaptureFlags {
    /// Capture everything.
    #[must_use]
    pub fn all() -> Self {
        CaptureFlags {
            residual: true,
            head_out: true,
            logits: true,
        }
    }

    /// Capture nothing (the default).
    #[must_use]
    pub fn none() -> Self {
        CaptureFlags::default()
    }
}

// ---------------------------------------------------------------------------
// Hook set
// ---------------------------------------------------------------------------

/// The full set of interventions and captures for one forward/generate call.
///
/// Entries apply in list order; an empty set leaves the pass untouched.
#[derive(Debug, Clone, Default)]
pub struct HookSet {
    pub residual_add: Vec<ResidualAdd>,
    pub head_substitute: Vec<HeadSubstitute>,
    pub capture: CaptureFlags,
}

impl HookSet {
    /// A hook set that only records activations.
    #[must_use]
    pub fn capture_only(capture: CaptureFlags) -> Self {
        HookSet {
            capture,
            ..HookSet::default()
        }
    }

    /// True when the set neither writes nor captures.
    #[must_use]
    pub fn is_empty(&self) -> bool {
        self.residual_add.is_empty()
            && self.head_substitute.is_empty()
            && self.capture == CaptureFlags::none()
    }

    /// True when the set contains no write hooks (captures are fine).
    #[must_use]
    pub fn is_read_only(&self) -> bool {
        self.residual_add.is_empty() && self.head_substitute.is_empty()
    }

    /// Checks every index and dimension against a model shape.
    ///
    /// # Errors
    /// Returns a configuration error naming the first offending entry.
    pub fn validate(&self, config: &ModelConfig) -> Result<()> {
        for (i, add) in self.residual_add.iter().enumerate() {
            if add.layers.len() != add.vectors.len() {
                return Err(SvError::Config(format!(
                    "residual_add[{i}]: {} layers but {} vectors",
                    add.layers.len(),
                    add.vectors.len()
                )));
            }
            if add.layers.is_empty() {
                return Err(SvError::Config(format!(
                    "residual_add[{i}]: empty layer set"
                )));
            }
            for (j, &layer) in add.layers.iter().enumerate() {
                if layer >= config.n_layers {
                    return Err(SvError::Config(format!(
                        "residual_add[{i}]: layer {layer} out of range (model has {} layers)",
                        config.n_layers
                    )));
                }
                if add.layers[..j].contains(&layer) {
                    return Err(SvError::Config(format!(
                        "residual_add[{i}]: layer {layer} listed twice"
                    )));
                }
                if add.vectors[j].len() != config.d_model {
                    return Err(SvError::Config(format!(
                        "residual_add[{i}]: vector for layer {layer} has size {}, want d_model {}",
                        add.vectors[j].len(),
                        config.d_model
                    )));
                }
            }
            if !add.strength.is_finite() {
                return Err(SvError::Config(format!(
                    "residual_add[{i}]: strength must be finite"
                )));
            }
        }
        for (i, sub) in self.head_substitute.iter().enumerate() {
            if sub.layer >= config.n_layers {
                return Err(SvError::Config(format!(
                    "head_substitute[{i}]: layer {} out of range (model has {} layers)",
                    sub.layer, config.n_layers
                )));
            }
            if sub.head >= config.n_heads {
                return Err(SvError::Config(format!(
                    "head_substitute[{i}]: head {} out of range (model has {} heads)",
                    sub.head, config.n_heads
                )));
            }
            if sub.replacement.len() != config.d_head {
                return Err(SvError::Config(format!(
                    "head_substitute[{i}]: replacement has size {}, want d_head {}",
                    sub.replacement.len(),
                    config.d_head
                )));
            }
        }
        Ok(())
    }
}
