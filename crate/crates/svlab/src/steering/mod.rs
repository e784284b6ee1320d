//! Steering vectors: extraction, injection hooks, and persistence.
//!
//! Two families are implemented. In-context vectors distill the principal
//! direction of contrastive activation differences and are added across all
//! layers and positions at a tunable strength. Function vectors sum the
//! projected mean outputs of the heads with the highest average indirect
//! effect and are added at the final token of a middle layer at strength one.

pub mod fv;
pub mod icv;
pub mod pca;
pub mod store;

pub use fv::{
    build_fv, build_fv_from_heads, compute_aie, default_target_layer, default_top_k,
    informative_prompts, make_fv_hooks, mean_head_activations, rank_heads, total_mean_cie,
    FunctionVector, HeadMeans, HeadScore, AIE_SHOTS,
};
pub use icv::{
    build_icv, collect_differences, make_icv_hooks, ContrastPair, IcvOptions, InContextVector,
};
pub use pca::{principal_direction, PcaOptions};
pub use store::{load_steering, save_steering};

use crate::error::Result;
use crate::lm::HookSet;

/// Either steering method, for code paths that treat them uniformly.
#[derive(Debug, Clone, PartialEq)]
pub enum Steering {
    Icv(InContextVector),
    Fv(FunctionVector),
}

impl Steering {
    /// Injection hooks at the method's default placement, or at an explicit
    /// layer set.
    ///
    /// # Errors
    /// Input error for an empty or out-of-range layer override.
    pub fn hooks(&self, layer_override: Option<&[usize]>) -> Result<HookSet> {
        match self {
            Steering::Icv(icv) => make_icv_hooks(icv, layer_override),
            Steering::Fv(fv) => make_fv_hooks(fv, layer_override),
        }
    }

    #[must_use]
    pub fn method_name(&self) -> &'static str {
        match self {
            Steering::Icv(_) => "icv",
            Steering::Fv(_) => "fv",
        }
    }

    #[must_use]
    pub fn source_task(&self) -> &str {
        match self {
            Steering::Icv(icv) => &icv.source_task,
            Steering::Fv(fv) => &fv.source_task,
        }
    }
}
