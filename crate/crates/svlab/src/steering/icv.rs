//! In-context vectors: a per-layer steering direction distilled from the
//! activation differences of contrastive demonstration pairs.
//!
//! Extraction runs each pair side through the model, takes the final-token
//! residual state at every layer, stacks the per-pair differences into a
//! matrix, and keeps its first principal direction. Injection adds the
//! layer's slice of that direction, scaled by a strength, to every token
//! position at every chosen layer, renormalizing each updated state back to
//! its previous norm by default.

use ndarray::{Array1, Array2, ArrayView1};
use rayon::prelude::*;

use crate::error::{Result, SvError};
use crate::lm::{CaptureFlags, HookSet, ModelBundle, PositionRule, ResidualAdd};
use crate::steering::pca::{principal_direction, PcaOptions};
use crate::tasks::DemoKind;

/// One contrastive demonstration: the two strings whose activation
/// difference points toward the target behavior.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct ContrastPair {
    pub negative: String,
    pub positive: String,
}

/// Extraction settings for [`build_icv`], echoed into the vector metadata.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct IcvOptions {
    /// Injection strength λ.
    pub strength: f32,
    /// Center the difference matrix before the principal direction.
    pub center: bool,
    /// Renormalize updated residual states to their pre-update norm.
    pub renormalize: bool,
    /// Seeds the power-iteration start vector.
    pub seed: u64,
    /// Which contrast construction produced the pairs.
    pub demo_kind: DemoKind,
    /// Task the pairs were drawn from.
    pub source_task: String,
}

impl Default for IcvOptions {
    fn default() -> Self {
        IcvOptions {
            strength: 0.1,
            center: false,
            renormalize: true,
            seed: 0,
            demo_kind: DemoKind::Style2,
            source_task: String::new(),
        }
    }
}

/// A trained in-context vector plus the settings that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct InContextVector {
    /// Unit-norm direction, one row per layer: row `l` is the slice added to
    /// the residual stream entering layer `l`.
    pub direction: Array2<f32>,
    pub strength: f32,
    pub renormalize: bool,
    pub n_demos: usize,
    pub demo_kind: DemoKind,
    pub source_task: String,
    pub centered: bool,
    pub seed: u64,
}

impl InContextVector {
    /// The layer-`l` slice of the direction.
    ///
    /// # Panics
    /// Panics if `layer` is out of range.
    #[must_use]
    pub fn slice(&self, layer: usize) -> ArrayView1<'_, f32> {
        self.direction.row(layer)
    }

    /// The same vector at a different injection strength.
    #[must_use]
    pub fn with_strength(&self, strength: f32) -> Self {
        let mut out = self.clone();
        out.strength = strength;
        out
    }

    #[must_use]
    pub fn n_layers(&self) -> usize {
        self.direction.nrows()
    }
}

/// Stacks per-pair final-token residual differences into an
/// `[n_pairs × n_layers·d_model]` matrix. Row `i` concatenates, in layer
/// order `0..n_layers`, the positive-minus-negative residual state at the
/// final token of pair `i`.
///
/// # Errors
/// Input error naming the pair when a side is empty or tokenizes past the
/// model context.
pub fn collect_differences(model: &ModelBundle, pairs: &[ContrastPair]) -> Result<Array2<f32>> {
    if pairs.is_empty() {
        return Err(SvError::input("contrast extraction got no pairs"));
    }
    let n_layers = model.config.n_layers;
    let d_model = model.config.d_model;
    let rows: Vec<Vec<f32>> = pairs
        .par_iter()
        .enumerate()
        .map(|(i, pair)| -> Result<Vec<f32>> {
            let mut row = Vec::with_capacity(n_layers * d_model);
            let states = |text: &str, side: &str| -> Result<Vec<Array1<f32>>> {
                let tokens = model.tokenizer.encode(text);
                if tokens.is_empty() {
                    return Err(SvError::input(format!(
                        "contrast pair {i}: {side} side is empty"
                    )));
                }
                if tokens.len() > model.config.max_seq_len {
                    return Err(SvError::input(format!(
                        "contrast pair {i}: {side} side tokenizes to {} tokens, \
                         over the {}-token context",
                        tokens.len(),
                        model.config.max_seq_len
                    )));
                }
                let capture = HookSet::capture_only(CaptureFlags {
                    residual: true,
                    ..CaptureFlags::none()
                });
                let (_, trace) = model.forward(&tokens, &capture)?;
                (0..n_layers)
                    .map(|l| {
                        let res = trace.residual(l)?;
                        Ok(res.row(res.nrows() - 1).to_owned())
                    })
                    .collect()
            };
            let neg = states(&pair.negative, "negative")?;
            let pos = states(&pair.positive, "positive")?;
            for l in 0..n_layers {
                row.extend((&pos[l] - &neg[l]).iter());
            }
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    let flat: Vec<f32> = rows.into_iter().flatten().collect();
    Array2::from_shape_vec((pairs.len(), n_layers * d_model), flat)
        .map_err(|e| SvError::input(format!("difference matrix shape: {e}")))
}

/// Extracts an in-context vector from contrast pairs.
///
/// The unit-norm principal direction of the difference matrix becomes the
/// steering direction; if the principal direction is degenerate the mean
/// difference row stands in, and only an identically zero matrix (where the
/// mean is zero too) fails.
///
/// # Errors
/// Propagates extraction errors from [`collect_differences`]; degenerate
/// error when no direction exists.
pub fn build_icv(
    model: &ModelBundle,
    pairs: &[ContrastPair],
    options: &IcvOptions,
) -> Result<InContextVector> {
    let matrix = collect_differences(model, pairs)?;
    let pca = PcaOptions {
        center: options.center,
        seed: options.seed,
        ..PcaOptions::default()
    };
    let flat = match principal_direction(matrix.view(), &pca) {
        Ok(direction) => direction,
        Err(SvError::Degenerate(_)) => {
            let mean = matrix
                .mean_axis(ndarray::Axis(0))
                .expect("nonempty matrix");
            let norm = mean.dot(&mean).sqrt();
            if norm == 0.0 {
                return Err(SvError::Degenerate(
                    "contrast differences are identically zero".to_string(),
                ));
            }
            mean / norm
        }
        Err(other) => return Err(other),
    };
    let direction = Array2::from_shape_vec(
        (model.config.n_layers, model.config.d_model),
        flat.to_vec(),
    )
    .map_err(|e| SvError::input(format!("direction shape: {e}")))?;
    Ok(InContextVector {
        direction,
        strength: options.strength,
        renormalize: options.renormalize,
        n_demos: pairs.len(),
        demo_kind: options.demo_kind,
        source_task: options.source_task.clone(),
        centered: options.center,
        seed: options.seed,
    })
}

/// Hooks that inject the vector at every token position of the chosen layers
/// (all layers when `layer_override` is `None`).
///
/// # Errors
/// Input error for an empty or out-of-range layer override.
pub fn make_icv_hooks(
    icv: &InContextVector,
    layer_override: Option<&[usize]>,
) -> Result<HookSet> {
    let layers: Vec<usize> = match layer_override {
        Some([]) => {
            return Err(SvError::input(
                "layer override for injection must name at least one layer",
            ))
        }
        Some(set) => set.to_vec(),
        None => (0..icv.n_layers()).collect(),
    };
    let mut vectors = Vec::with_capacity(layers.len());
    for &layer in &layers {
        if layer >= icv.n_layers() {
            return Err(SvError::input(format!(
                "layer override names layer {layer}, but the vector covers {} layers",
                icv.n_layers()
            )));
        }
        vectors.push(icv.slice(layer).to_vec());
    }
    let mut hooks = HookSet::default();
    hooks.residual_add.push(ResidualAdd {
        layers,
        vectors,
        strength: icv.strength,
        rule: PositionRule::Every,
        renormalize: icv.renormalize,
    });
    Ok(hooks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lm::{CaptureFlags, ModelConfig, Tokenizer};

    fn tiny_bundle() -> ModelBundle {
        let words: Vec<String> = [
            "big", "small", "hot", "cold", "apple", "Apple", "quite", "so", "wide", "narrow",
        ]
        .iter()
        .map(|&w| w.to_string())
        .collect();
        let tokenizer = Tokenizer::from_words(&words).unwrap();
        let config = ModelConfig {
            n_layers: 2,
            n_heads: 2,
            d_model: 16,
            d_head: 8,
            vocab_size: tokenizer.vocab_size(),
            max_seq_len: 64,
            seed: 17,
        };
        ModelBundle::init(config, tokenizer).unwrap()
    }

    fn fixed_pairs() -> Vec<ContrastPair> {
        [
            ("Q: big\nA: quite so", "Q: big\nA: small"),
            ("Q: hot\nA: quite so", "Q: hot\nA: cold"),
            ("Q: apple\nA: so", "Q: apple\nA: Apple"),
        ]
        .iter()
        .map(|&(n, p)| ContrastPair {
            negative: n.to_string(),
            positive: p.to_string(),
        })
        .collect()
    }

    #[test]
    fn differences_match_per_pair_captures() {
        let model = tiny_bundle();
        let pairs = fixed_pairs();
        let matrix = collect_differences(&model, &pairs).unwrap();
        assert_eq!(matrix.dim(), (3, 2 * 16));
        let hooks = HookSet {
            capture: CaptureFlags {
                residual: true,
                ..CaptureFlags::none()
            },
            ..HookSet::default()
        };
        for (i, pair) in pairs.iter().enumerate() {
            let neg = model.tokenizer.encode(&pair.negative);
            let pos = model.tokenizer.encode(&pair.positive);
            let (_, neg_trace) = model.forward(&neg, &hooks).unwrap();
            let (_, pos_trace) = model.forward(&pos, &hooks).unwrap();
            for l in 0..2 {
                let n = neg_trace.residual(l).unwrap();
                let p = pos_trace.residual(l).unwrap();
                let diff = &p.row(p.nrows() - 1) - &n.row(n.nrows() - 1);
                for (j, &want) in diff.iter().enumerate() {
                    assert_eq!(matrix[(i, l * 16 + j)], want, "pair {i} layer {l} dim {j}");
                }
            }
        }
    }

    #[test]
    fn build_icv_unit_norm_and_shape() {
        let model = tiny_bundle();
        let icv = build_icv(&model, &fixed_pairs(), &IcvOptions::default()).unwrap();
        assert_eq!(icv.direction.dim(), (2, 16));
        let norm: f32 = icv.direction.iter().map(|&v| v * v).sum::<f32>().sqrt();
        assert!((norm - 1.0).abs() < 1e-5, "norm = {norm}");
        let again = build_icv(&model, &fixed_pairs(), &IcvOptions::default()).unwrap();
        assert_eq!(icv.direction, again.direction);
    }

    #[test]
    fn identical_sides_are_degenerate() {
        let model = tiny_bundle();
        let pairs = vec![ContrastPair {
            negative: "Q: big\nA: small".to_string(),
            positive: "Q: big\nA: small".to_string(),
        }];
        assert!(matches!(
            build_icv(&model, &pairs, &IcvOptions::default()),
            Err(SvError::Degenerate(_))
        ));
    }

    #[test]
    fn overlong_pair_names_the_pair() {
        let model = tiny_bundle();
        let long = vec!["big"; 70].join(" ");
        let pairs = vec![
            ContrastPair {
                negative: "Q: big\nA: so".to_string(),
                positive: "Q: big\nA: small".to_string(),
            },
            ContrastPair {
                negative: long,
                positive: "Q: hot\nA: cold".to_string(),
            },
        ];
        match collect_differences(&model, &pairs) {
            Err(SvError::Input(msg)) => {
                assert!(msg.contains("pair 1"), "{msg}");
                assert!(msg.contains("negative"), "{msg}");
            }
            other => panic!("expected input error, got {other:?}"),
        }
    }

    #[test]
    fn zero_strength_injection_is_bitwise_identity() {
        let model = tiny_bundle();
        let icv = build_icv(&model, &fixed_pairs(), &IcvOptions::default()).unwrap();
        let hooks = make_icv_hooks(&icv.with_strength(0.0), None).unwrap();
        let tokens = model.tokenizer.encode("Q: wide\nA:");
        let (base, _) = model.forward(&tokens, &HookSet::default()).unwrap();
        let (steered, _) = model.forward(&tokens, &hooks).unwrap();
        assert_eq!(base, steered);
    }

    #[test]
    fn hooks_cover_requested_layers() {
        let model = tiny_bundle();
        let icv = build_icv(&model, &fixed_pairs(), &IcvOptions::default()).unwrap();
        let all = make_icv_hooks(&icv, None).unwrap();
        assert_eq!(all.residual_add[0].layers, vec![0, 1]);
        assert_eq!(all.residual_add[0].rule, PositionRule::Every);
        let one = make_icv_hooks(&icv, Some(&[1])).unwrap();
        assert_eq!(one.residual_add[0].layers, vec![1]);
        assert_eq!(
            one.residual_add[0].vectors[0],
            icv.slice(1).to_vec(),
            "layer slice must follow the override"
        );
        assert!(make_icv_hooks(&icv, Some(&[])).is_err());
        assert!(make_icv_hooks(&icv, Some(&[5])).is_err());
    }
}
