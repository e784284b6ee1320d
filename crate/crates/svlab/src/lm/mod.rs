//! A deterministic, hookable decoder-only transformer: tokenizer, weights,
//! forward/generate with activation hooks, serialization, and a tiny trainer
//! that induces in-context-learning behavior on synthetic mapping tasks.

pub mod config;
pub mod hooks;
pub mod model;
pub mod serialize;
pub mod tokenizer;
pub mod trace;
pub mod train;

pub use config::ModelConfig;
pub use hooks::{CaptureFlags, HeadSubstitute, HookSet, PositionRule, ResidualAdd, TokenPos};
pub use model::{ModelBundle, Weights};
pub use serialize::{load_model, model_digest, save_model};
pub use tokenizer::{Tokenizer, A_MARKER_ID, NEWLINE_ID, Q_MARKER_ID, UNK_ID};
pub use trace::ActivationTrace;
pub use train::{train_toy, Curriculum, IclProbe, TrainParams, TrainReport};
