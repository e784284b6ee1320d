//! svlab: a steering-vector laboratory.
//!
//! The crate builds a small, fully deterministic, hookable decoder-only
//! transformer and implements two steering-vector families on top of it:
//! in-context vectors (principal direction of contrastive activation
//! differences, injected at every layer and token position) and function
//! vectors (task-conditioned mean attention-head outputs ranked by average
//! indirect effect, injected at a single layer). Around the vectors sits the
//! full evaluation protocol: prompt styles, task suites, text metrics,
//! strength/demo sweeps, layer-placement ablations, and CIE correlation
//! reports, all reproducible byte-for-byte from a config and a seed.
//!
//! Modules:
//! - [`lm`]: the toy transformer (tokenizer, forward with hooks, greedy
//!   generation, trainer, weight serialization).
//! - [`steering`]: ICV and FV extraction and application.
//! - [`tasks`]: bundled task datasets, prompt builders, contrast pairs.
//! - [`metrics`]: accuracy, entropy/diversity, classifiers, fluency gating.
//! - [`harness`]: evaluation orchestration, sweeps, ablations, reports, CLI
//!   plumbing.

pub mod cli;
pub mod error;
pub mod harness;
pub mod lm;
pub mod metrics;
pub mod rng;
pub mod steering;
pub mod tasks;

pub use error::{Result, SvError};
