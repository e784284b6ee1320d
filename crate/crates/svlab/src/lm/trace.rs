//! Activation traces recorded during a forward pass.

use ndarray::{Array2, ArrayView2, s};

use crate::error::{Result, SvError};
use crate::lm::config::ModelConfig;

/// Activations captured by one forward pass, populated per capture flags.
///
/// Logical shapes: `residual` is `[layer x token x d_model]` (the residual
/// stream at each layer's input, after write hooks), `head_out` is
/// `[layer x head x token x d_head]` (attention head outputs before the
/// output projection), `logits` is `[token x vocab_size]`. Head outputs are
/// stored per layer as `[token x d_model]` with heads concatenated; the
/// per-head view is exposed through [`ActivationTrace::head_out`].
#[derive(Debug, Clone, Default)]
pub struct ActivationTrace {
    residual: Option<Vec<Array2<f32>>>,
    head_out: Option<Vec<Array2<f32>>>,
    logits: Option<Array2<f32>>,
    d_head: usize,
}

impl ActivationTrace {
    pub(crate) fn new(config: &ModelConfig) -> Self {
        ActivationTrace {
            residual: None,
            head_out: None,
            logits: None,
            d_head: config.d_head,
        }
    }

    pub(crate) fn set_residual(&mut self, per_layer: Vec<Array2<f32>>) {
        self.residual = Some(per_layer);
    }

    pub(crate) fn set_head_out(&mut self, per_layer: Vec<Array2<f32>>) {
        self.head_out = Some(per_layer);
    }

    pub(crate) fn set_logits(&mut self, logits: Array2<f32>) {
        self.logits = Some(logits);
    }

    /// Residual stream at `layer`'s input, shape `[token x d_model]`.
    ///
    /// # Errors
    /// Returns an input error when residuals were not captured or the layer
    /// is out of range.
    pub fn residual(&self, layer: usize) -> Result<&Array2<f32>> {
        let layers = self
            .residual
            .as_ref()
            .ok_or_else(|| SvError::input("trace did not capture residuals"))?;
        layers.get(layer).ok_or_else(|| {
            SvError::Input(format!(
                "residual layer {layer} out of range ({} captured)",
                layers.len()
            ))
        })
    }

    /// One head's output at `layer`, shape `[token x d_head]`, taken before
    /// the attention output projection.
    ///
    /// # Errors
    /// Returns an input error when head outputs were not captured or an index
    /// is out of range.
    pub fn head_out(&self, layer: usize, head: usize) -> Result<ArrayView2<'_, f32>> {
        let layers = self
            .head_out
            .as_ref()
            .ok_or_else(|| SvError::input("trace did not capture head outputs"))?;
        let concat = layers.get(layer).ok_or_else(|| {
            SvError::Input(format!(
                "head_out layer {layer} out of range ({} captured)",
                layers.len()
            ))
        })?;
        let n_heads = concat.ncols() / self.d_head;
        if head >= n_heads {
            return Err(SvError::Input(format!(
                "head {head} out of range ({n_heads} heads)"
            )));
        }
        let start = head * self.d_head;
        Ok(concat.slice(s![.., start..start + self.d_head]))
    }

    /// All heads of one layer, concatenated: shape `[token x d_model]`.
    ///
    /// # Errors
    /// Returns an input error when head outputs were not captured or the
    /// layer is out of range.
    pub fn head_out_concat(&self, layer: usize) -> Result<&Array2<f32>> {
        let layers = self
            .head_out
            .as_ref()
            .ok_or_else(|| SvError::input("trace did not capture head outputs"))?;
        layers.get(layer).ok_or_else(|| {
            SvError::Input(format!(
                "head_out layer {layer} out of range ({} captured)",
                layers.len()
            ))
        })
    }

    /// Next-token logits, shape `[token x vocab_size]`.
    ///
    /// # Errors
    /// Returns an input error when logits were not captured.
    pub fn logits(&self) -> Result<&Array2<f32>> {
        self.logits
            .as_ref()
            .ok_or_else(|| SvError::input("trace did not capture logits"))
    }

    /// Number of layers with captured residuals, if any.
    #[must_use]
    pub fn residual_layers(&self) -> Option<usize> {
        self.residual.as_ref().map(Vec::len)
    }
}
