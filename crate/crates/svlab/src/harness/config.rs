//! Declarative run configuration: one JSON document describes an experiment.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Result, SvError};
use crate::lm::TrainParams;
use crate::metrics::GeWeights;
use crate::tasks::{DemoKind, DemoStyle, PromptStyle, TaskCategory, TaskSpec};

/// The only config schema this binary reads.
pub const CONFIG_VERSION: u32 = 1;

// ------------------------------------------------------------------
// Layer placement sets
// ------------------------------------------------------------------

/// Named intervention placements for ablations. `middle-n` resolves to the
/// `n` layers centered at `floor(L/2)`, left-biased for even spans.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LocationSet {
    #[serde(rename = "default-placement")]
    DefaultPlacement,
    #[serde(rename = "middle-1")]
    Middle1,
    #[serde(rename = "middle-2")]
    Middle2,
    #[serde(rename = "middle-4")]
    Middle4,
    #[serde(rename = "all-layers")]
    AllLayers,
}

impl LocationSet {
    #[must_use]
    pub fn label(self) -> &'static str {
        match self {
            LocationSet::DefaultPlacement => "default-placement",
            LocationSet::Middle1 => "middle-1",
            LocationSet::Middle2 => "middle-2",
            LocationSet::Middle4 => "middle-4",
            LocationSet::AllLayers => "all-layers",
        }
    }

    /// The layer indices this set names on an `n_layers`-deep model, or
    /// `None` for the vector's own default placement.
    ///
    /// # Errors
    /// Configuration error when the span does not fit the model.
    pub fn resolve(self, n_layers: usize) -> Result<Option<Vec<usize>>> {
        let span = match self {
            LocationSet::DefaultPlacement => return Ok(None),
            LocationSet::AllLayers => return Ok(Some((0..n_layers).collect())),
            LocationSet::Middle1 => 1,
            LocationSet::Middle2 => 2,
            LocationSet::Middle4 => 4,
        };
        if span > n_layers {
            return Err(SvError::Config(format!(
                "{} does not fit a {n_layers}-layer model",
                self.label()
            )));
        }
        let start = n_layers / 2 - span / 2;
        Ok(Some((start..start + span).collect()))
    }
}

/// Every placement, in report order.
pub const ALL_LOCATION_SETS: [LocationSet; 5] = [
    LocationSet::DefaultPlacement,
    LocationSet::Middle1,
    LocationSet::Middle2,
    LocationSet::Middle4,
    LocationSet::AllLayers,
];

// ------------------------------------------------------------------
// Section settings
// ------------------------------------------------------------------

/// The ICV strength / demonstration-count search space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepGrid {
    /// Injection strengths λ to try.
    pub strengths: Vec<f32>,
    /// Contrastive demonstration counts to try.
    pub demo_counts: Vec<usize>,
    /// Per-task demonstration style override; tasks not listed use style 2
    /// when functional and raw pairs when behavioral.
    pub demo_styles: BTreeMap<String, DemoKind>,
}

impl Default for SweepGrid {
    fn default() -> Self {
        SweepGrid {
            strengths: (1..=10).map(|i| i as f32 * 0.02).collect(),
            demo_counts: vec![5, 10, 20],
            demo_styles: BTreeMap::new(),
        }
    }
}

impl SweepGrid {
    /// # Errors
    /// Configuration error for empty lists, negative or non-finite
    /// strengths, or a zero demonstration count.
    pub fn validate(&self) -> Result<()> {
        if self.strengths.is_empty() {
            return Err(SvError::config("sweep grid has no strengths"));
        }
        if self.demo_counts.is_empty() {
            return Err(SvError::config("sweep grid has no demo counts"));
        }
        for &s in &self.strengths {
            if !s.is_finite() || s < 0.0 {
                return Err(SvError::Config(format!(
                    "sweep strength {s} must be finite and >= 0"
                )));
            }
        }
        if self.demo_counts.contains(&0) {
            return Err(SvError::config("sweep demo counts must be >= 1"));
        }
        Ok(())
    }

    /// The demonstration style a sweep or extraction uses for `task`.
    #[must_use]
    pub fn style_for(&self, task: &TaskSpec) -> DemoStyle {
        match self.demo_styles.get(&task.name) {
            Some(DemoKind::Style1) => DemoStyle::style1(),
            Some(DemoKind::Style2) => DemoStyle::style2(),
            Some(DemoKind::BehavioralRaw) => DemoStyle::behavioral_raw(),
            None => match task.category {
                TaskCategory::Functional => DemoStyle::style2(),
                TaskCategory::Behavioral => DemoStyle::behavioral_raw(),
            },
        }
    }
}

/// Settings for direct (non-swept) ICV extraction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IcvSettings {
    pub strength: f32,
    pub demo_count: usize,
    pub seed: u64,
}

impl Default for IcvSettings {
    fn default() -> Self {
        IcvSettings {
            strength: 0.1,
            demo_count: 10,
            seed: 0,
        }
    }
}

/// Settings for function-vector extraction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FvSettings {
    /// Prompts averaged into the per-head mean activations.
    pub n_mean_prompts: usize,
    /// Shuffled-label prompts behind each indirect-effect estimate.
    pub n_aie_prompts: usize,
    /// Heads summed into the vector; the model-scaled default when absent.
    pub top_k: Option<usize>,
    pub seed: u64,
}

impl Default for FvSettings {
    fn default() -> Self {
        FvSettings {
            n_mean_prompts: 40,
            n_aie_prompts: 24,
            top_k: None,
            seed: 0,
        }
    }
}

/// Training-stage settings: optimizer knobs plus curriculum size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainSettings {
    pub params: TrainParams,
    pub n_episodes: usize,
    pub seed: u64,
}

impl Default for TrainSettings {
    fn default() -> Self {
        TrainSettings {
            params: TrainParams {
                log_every: 200,
                ..TrainParams::default()
            },
            n_episodes: 4000,
            seed: 0,
        }
    }
}

/// Metric knobs.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MetricSettings {
    pub ge_weights: GeWeights,
}

/// Which placements the ablation runner visits.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AblationSettings {
    pub locations: Vec<LocationSet>,
}

impl Default for AblationSettings {
    fn default() -> Self {
        AblationSettings {
            locations: ALL_LOCATION_SETS.to_vec(),
        }
    }
}

// ------------------------------------------------------------------
// Run configuration
// ------------------------------------------------------------------

fn default_version() -> u32 {
    CONFIG_VERSION
}

fn default_tasks() -> Vec<String> {
    [
        "antonym",
        "synonym",
        "capitalize",
        "country-capital",
        "detox-marker",
        "sentiment-marker",
    ]
    .map(str::to_string)
    .to_vec()
}

fn default_styles() -> Vec<PromptStyle> {
    vec![
        PromptStyle::zero_shot(),
        PromptStyle::shuffled(3),
        PromptStyle::natural(0),
    ]
}

fn default_n_eval() -> usize {
    100
}

fn default_seeds() -> Vec<u64> {
    vec![0, 1, 2]
}

fn default_max_new_tokens() -> usize {
    12
}

fn default_out_dir() -> String {
    "out".to_string()
}

fn default_version_tag() -> String {
    "v1".to_string()
}

/// Everything a run needs. A run is reproducible from this document plus the
/// task data and model file it names.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub version: u32,
    /// Model file; empty means `{out_dir}/model.svlm`.
    #[serde(default)]
    pub model_path: String,
    #[serde(default = "default_tasks")]
    pub tasks: Vec<String>,
    #[serde(default = "default_styles")]
    pub styles: Vec<PromptStyle>,
    /// Held-out queries per task, style, and seed.
    #[serde(default = "default_n_eval")]
    pub n_eval: usize,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    /// Generation budget per query; fixed-length so fluency is measurable.
    #[serde(default = "default_max_new_tokens")]
    pub max_new_tokens: usize,
    #[serde(default)]
    pub icv: IcvSettings,
    #[serde(default)]
    pub sweep: SweepGrid,
    #[serde(default)]
    pub fv: FvSettings,
    #[serde(default)]
    pub train: TrainSettings,
    #[serde(default)]
    pub metrics: MetricSettings,
    #[serde(default)]
    pub ablation: AblationSettings,
    #[serde(default = "default_out_dir")]
    pub out_dir: String,
    #[serde(default = "default_version_tag")]
    pub version_tag: String,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            version: default_version(),
            model_path: String::new(),
            tasks: default_tasks(),
            styles: default_styles(),
            n_eval: default_n_eval(),
            seeds: default_seeds(),
            max_new_tokens: default_max_new_tokens(),
            icv: IcvSettings::default(),
            sweep: SweepGrid::default(),
            fv: FvSettings::default(),
            train: TrainSettings::default(),
            metrics: MetricSettings::default(),
            ablation: AblationSettings::default(),
            out_dir: default_out_dir(),
            version_tag: default_version_tag(),
        }
    }
}

impl RunConfig {
    /// Reads and validates a JSON config file.
    ///
    /// # Errors
    /// I/O and JSON errors (unknown keys rejected), plus validation failures.
    pub fn load(path: &Path) -> Result<Self> {
        let raw = fs::read_to_string(path)?;
        let config: RunConfig = serde_json::from_str(&raw)?;
        config.validate()?;
        Ok(config)
    }

    /// Checks the version pin and every section.
    ///
    /// # Errors
    /// Configuration error naming the first offending field.
    pub fn validate(&self) -> Result<()> {
        if self.version != CONFIG_VERSION {
            return Err(SvError::Config(format!(
                "config version {} is not supported; this binary reads version {CONFIG_VERSION}",
                self.version
            )));
        }
        if self.tasks.is_empty() {
            return Err(SvError::config("config lists no tasks"));
        }
        if self.styles.is_empty() {
            return Err(SvError::config("config lists no prompt styles"));
        }
        for style in &self.styles {
            style.validate()?;
        }
        if self.n_eval == 0 {
            return Err(SvError::config("n_eval must be at least 1"));
        }
        if self.seeds.is_empty() {
            return Err(SvError::config("config lists no seeds"));
        }
        if self.max_new_tokens < 3 {
            return Err(SvError::config(
                "max_new_tokens must be at least 3 so entropy is defined",
            ));
        }
        self.sweep.validate()?;
        if self.icv.demo_count == 0 {
            return Err(SvError::config("icv.demo_count must be at least 1"));
        }
        if self.fv.n_mean_prompts == 0 || self.fv.n_aie_prompts == 0 {
            return Err(SvError::config("fv prompt counts must be at least 1"));
        }
        if self.ablation.locations.is_empty() {
            return Err(SvError::config("ablation lists no placements"));
        }
        if !self
            .ablation
            .locations
            .contains(&LocationSet::DefaultPlacement)
        {
            return Err(SvError::config(
                "ablation placements must include default-placement (the delta reference)",
            ));
        }
        Ok(())
    }

    /// The model file this config points at.
    #[must_use]
    pub fn resolved_model_path(&self) -> PathBuf {
        if self.model_path.is_empty() {
            Path::new(&self.out_dir).join("model.svlm")
        } else {
            PathBuf::from(&self.model_path)
        }
    }

    /// Canonical-JSON digest prefix stamped onto every record this config
    /// produces.
    ///
    /// # Errors
    /// Propagates serialization failures.
    pub fn config_hash(&self) -> Result<String> {
        let canonical = serde_json::to_string(self)?;
        let digest = Sha256::digest(canonical.as_bytes());
        let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
        Ok(hex[..16].to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate_and_pin_the_sweep_grid() {
        let config = RunConfig::default();
        config.validate().unwrap();
        let grid = &config.sweep;
        assert_eq!(grid.strengths.len(), 10);
        assert!((grid.strengths[0] - 0.02).abs() < 1e-6);
        assert!((grid.strengths[9] - 0.20).abs() < 1e-6);
        assert_eq!(grid.demo_counts, vec![5, 10, 20]);
        assert_eq!(config.n_eval, 100);
        assert_eq!(config.seeds, vec![0, 1, 2]);
        assert_eq!(config.tasks.len(), 6);
    }

    #[test]
    fn version_pin_and_unknown_keys_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("config.json");

        std::fs::write(&path, "{\"version\": 1}").unwrap();
        RunConfig::load(&path).unwrap();

        std::fs::write(&path, "{\"version\": 2}").unwrap();
        assert!(matches!(RunConfig::load(&path), Err(SvError::Config(_))));

        std::fs::write(&path, "{\"version\": 1, \"bogus\": true}").unwrap();
        assert!(matches!(RunConfig::load(&path), Err(SvError::Json(_))));
    }

    #[test]
    fn location_sets_resolve_left_biased() {
        let cases: [(LocationSet, usize, Option<&[usize]>); 7] = [
            (LocationSet::DefaultPlacement, 4, None),
            (LocationSet::Middle1, 4, Some(&[2])),
            (LocationSet::Middle2, 4, Some(&[1, 2])),
            (LocationSet::Middle4, 4, Some(&[0, 1, 2, 3])),
            (LocationSet::AllLayers, 4, Some(&[0, 1, 2, 3])),
            (LocationSet::Middle1, 5, Some(&[2])),
            (LocationSet::Middle2, 5, Some(&[1, 2])),
        ];
        for (set, n_layers, want) in cases {
            let got = set.resolve(n_layers).unwrap();
            assert_eq!(got.as_deref(), want, "{} on {n_layers}", set.label());
        }
        assert!(matches!(
            LocationSet::Middle4.resolve(2),
            Err(SvError::Config(_))
        ));
    }

    #[test]
    fn grid_validation_rejects_bad_entries() {
        let mut grid = SweepGrid::default();
        grid.strengths.clear();
        assert!(grid.validate().is_err());

        let mut grid = SweepGrid::default();
        grid.strengths[0] = -0.5;
        assert!(grid.validate().is_err());

        let mut grid = SweepGrid {
            strengths: vec![0.0],
            ..SweepGrid::default()
        };
        grid.validate().unwrap();
        grid.demo_counts = vec![0];
        assert!(grid.validate().is_err());
    }

    #[test]
    fn demo_style_defaults_follow_task_category() {
        let grid = SweepGrid::default();
        let antonym = crate::tasks::builtin_task("antonym").unwrap();
        let detox = crate::tasks::builtin_task("detox-marker").unwrap();
        assert_eq!(grid.style_for(&antonym).kind, DemoKind::Style2);
        assert_eq!(grid.style_for(&detox).kind, DemoKind::BehavioralRaw);

        let mut grid = SweepGrid::default();
        grid.demo_styles
            .insert("antonym".to_string(), DemoKind::Style1);
        assert_eq!(grid.style_for(&antonym).kind, DemoKind::Style1);
    }

    #[test]
    fn config_hash_tracks_content() {
        let a = RunConfig::default();
        let mut b = RunConfig::default();
        assert_eq!(a.config_hash().unwrap(), b.config_hash().unwrap());
        assert_eq!(a.config_hash().unwrap().len(), 16);
        b.n_eval = 7;
        assert_ne!(a.config_hash().unwrap(), b.config_hash().unwrap());
    }

    #[test]
    fn ablation_must_keep_the_delta_reference() {
        let mut config = RunConfig::default();
        config.ablation.locations = vec![LocationSet::Middle1];
        assert!(matches!(config.validate(), Err(SvError::Config(_))));
    }

    #[test]
    fn model_path_defaults_into_out_dir() {
        let config = RunConfig::default();
        assert_eq!(
            config.resolved_model_path(),
            PathBuf::from("out").join("model.svlm")
        );
        let explicit = RunConfig {
            model_path: "elsewhere/m.svlm".to_string(),
            ..RunConfig::default()
        };
        assert_eq!(
            explicit.resolved_model_path(),
            PathBuf::from("elsewhere/m.svlm")
        );
    }
}
