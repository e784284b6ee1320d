//! Layer-placement ablations: the same vector re-applied at named locations.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SvError};
use crate::harness::config::LocationSet;
use crate::harness::eval::{evaluate_detailed, EvalContext, EvalRecord, QueryPool};
use crate::harness::sweep::cell_metric;
use crate::steering::Steering;
use crate::tasks::{PromptStyle, TaskSpec};

/// Which steering family an ablation applies to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VectorKind {
    Icv,
    Fv,
}

impl VectorKind {
    #[must_use]
    pub fn label(self) -> &'static str {
        match self {
            VectorKind::Icv => "icv",
            VectorKind::Fv => "fv",
        }
    }
}

/// The placements to visit and the family they are meant for.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AblationSpec {
    pub locations: Vec<LocationSet>,
    pub applies_to: VectorKind,
}

impl AblationSpec {
    /// # Errors
    /// Configuration error when no placements are listed or the delta
    /// reference (default placement) is missing.
    pub fn validate(&self) -> Result<()> {
        if self.locations.is_empty() {
            return Err(SvError::config("ablation lists no placements"));
        }
        if !self.locations.contains(&LocationSet::DefaultPlacement) {
            return Err(SvError::config(
                "ablation placements must include default-placement (the delta reference)",
            ));
        }
        Ok(())
    }
}

/// One line of the ablation table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationRow {
    pub location: LocationSet,
    /// Layers actually touched; the vector's own placement for the default.
    pub layers: Vec<usize>,
    pub metric: Option<f64>,
    pub delta_vs_default: Option<f64>,
    pub ge_mean: f64,
    pub gradable: usize,
    pub total: usize,
}

/// Re-evaluates `vector` at every placement in the spec.
///
/// # Errors
/// Configuration errors when the spec does not match the vector's family or
/// a placement does not fit the model; evaluation errors pass through.
pub fn ablate(
    ctx: &EvalContext,
    vector: &Steering,
    task: &TaskSpec,
    spec: &AblationSpec,
    style: &PromptStyle,
    n: usize,
    seeds: &[u64],
) -> Result<Vec<(LocationSet, Vec<EvalRecord>)>> {
    spec.validate()?;
    let kind = match vector {
        Steering::Icv(_) => VectorKind::Icv,
        Steering::Fv(_) => VectorKind::Fv,
    };
    if kind != spec.applies_to {
        return Err(SvError::Config(format!(
            "ablation spec applies to {}, got an {} vector",
            spec.applies_to.label(),
            kind.label()
        )));
    }
    let n_layers = ctx.model.config.n_layers;
    let mut out = Vec::with_capacity(spec.locations.len());
    for &location in &spec.locations {
        let layers = location.resolve(n_layers)?;
        let records = evaluate_detailed(
            ctx,
            Some(vector),
            layers.as_deref(),
            task,
            style,
            n,
            seeds,
            QueryPool::Heldout,
        )?;
        out.push((location, records));
    }
    Ok(out)
}

/// Collapses per-location records into the delta table. Deltas are relative
/// to the default placement, which is zero by construction.
///
/// # Errors
/// Input error when the default placement is missing from `results`.
pub fn summarize_ablation(
    task: &TaskSpec,
    results: &[(LocationSet, Vec<EvalRecord>)],
) -> Result<Vec<AblationRow>> {
    let default_metric = results
        .iter()
        .find(|(loc, _)| *loc == LocationSet::DefaultPlacement)
        .map(|(_, records)| cell_metric(task, records))
        .ok_or_else(|| SvError::input("ablation results lack the default placement"))?;

    let mut rows = Vec::with_capacity(results.len());
    for (location, records) in results {
        let metric = cell_metric(task, records);
        let delta = match (metric, default_metric) {
            (Some(m), Some(d)) => Some(m - d),
            _ => None,
        };
        let ge_mean = if records.is_empty() {
            0.0
        } else {
            records.iter().map(|r| r.ge).sum::<f64>() / records.len() as f64
        };
        let layers = records
            .first()
            .and_then(|r| r.vector.as_ref())
            .map(|v| v.layers.clone())
            .unwrap_or_default();
        rows.push(AblationRow {
            location: *location,
            layers,
            metric,
            delta_vs_default: delta,
            ge_mean,
            gradable: records.iter().filter(|r| r.gradable).count(),
            total: records.len(),
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lm::{ModelBundle, ModelConfig, Tokenizer};
    use crate::metrics::{ClassifierRegistry, GeWeights};
    use crate::rng::derive_rng;
    use crate::steering::{build_icv, IcvOptions};
    use crate::tasks::{builtin_task, builtin_vocabulary, make_contrast_pairs, DemoStyle};

    fn tiny_model() -> ModelBundle {
        let tokenizer = Tokenizer::from_words(builtin_vocabulary()).unwrap();
        let config = ModelConfig {
            n_layers: 4,
            n_heads: 2,
            d_model: 32,
            d_head: 16,
            vocab_size: tokenizer.vocab_size(),
            max_seq_len: 128,
            seed: 5,
        };
        ModelBundle::init(config, tokenizer).unwrap()
    }

    #[test]
    fn ablation_covers_locations_and_default_delta_is_zero() {
        let model = tiny_model();
        let registry = ClassifierRegistry::builtin().unwrap();
        let ctx = EvalContext {
            model: &model,
            registry: &registry,
            weights: GeWeights::default(),
            max_new_tokens: 6,
            config_hash: "t".to_string(),
        };
        // A behavioral task keeps the metric defined regardless of gating.
        let task = builtin_task("detox-marker").unwrap();
        let mut rng = derive_rng(0, &[1]);
        let pairs =
            make_contrast_pairs(&task, &DemoStyle::behavioral_raw(), 3, &mut rng).unwrap();
        let icv = build_icv(
            &model,
            &pairs,
            &IcvOptions {
                strength: 0.05,
                source_task: task.name.clone(),
                ..IcvOptions::default()
            },
        )
        .unwrap();
        let spec = AblationSpec {
            locations: vec![
                LocationSet::DefaultPlacement,
                LocationSet::Middle1,
                LocationSet::AllLayers,
            ],
            applies_to: VectorKind::Icv,
        };
        let results = ablate(
            &ctx,
            &Steering::Icv(icv),
            &task,
            &spec,
            &PromptStyle::zero_shot(),
            3,
            &[0],
        )
        .unwrap();
        assert_eq!(results.len(), 3);
        let rows = summarize_ablation(&task, &results).unwrap();
        assert_eq!(rows[0].location, LocationSet::DefaultPlacement);
        assert_eq!(rows[0].delta_vs_default, Some(0.0));
        assert_eq!(rows[0].layers, vec![0, 1, 2, 3]);
        assert_eq!(rows[1].layers, vec![2]);
        assert!(rows.iter().all(|r| r.total == 3));
    }

    #[test]
    fn spec_mismatch_and_missing_default_are_rejected() {
        let model = tiny_model();
        let registry = ClassifierRegistry::builtin().unwrap();
        let ctx = EvalContext {
            model: &model,
            registry: &registry,
            weights: GeWeights::default(),
            max_new_tokens: 6,
            config_hash: "t".to_string(),
        };
        let task = builtin_task("antonym").unwrap();
        let mut rng = derive_rng(0, &[1]);
        let pairs = make_contrast_pairs(&task, &DemoStyle::style2(), 3, &mut rng).unwrap();
        let icv = build_icv(
            &model,
            &pairs,
            &IcvOptions {
                source_task: task.name.clone(),
                ..IcvOptions::default()
            },
        )
        .unwrap();

        let fv_spec = AblationSpec {
            locations: vec![LocationSet::DefaultPlacement],
            applies_to: VectorKind::Fv,
        };
        let err = ablate(
            &ctx,
            &Steering::Icv(icv),
            &task,
            &fv_spec,
            &PromptStyle::zero_shot(),
            2,
            &[0],
        );
        assert!(matches!(err, Err(SvError::Config(_))));

        let no_default = AblationSpec {
            locations: vec![LocationSet::Middle1],
            applies_to: VectorKind::Icv,
        };
        assert!(no_default.validate().is_err());
    }
}
