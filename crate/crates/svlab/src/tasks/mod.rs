//! Task suites and prompt construction.
//!
//! A task is a list of input/output pairs with train/test splits, a
//! category (functional or behavioral), and optional natural-text templates.
//! This module bundles six tasks, builds every prompt style used by the
//! harness, and renders contrastive demonstration pairs for extraction.

pub mod builtin;
pub mod contrast;
pub mod prompts;
pub mod spec;

pub use builtin::{
    builtin_task, builtin_tasks, builtin_vocabulary, detox_markers, sentiment_markers,
};
pub use contrast::{make_contrast_pairs, DemoKind, DemoStyle, FILLER_PHRASES};
pub use prompts::{
    build_few_shot, build_natural, build_zero_shot, shuffle_labels, PromptKind, PromptStyle,
};
pub use spec::{
    default_splits, load_task, ShiftRule, Split, Splits, TaskCategory, TaskPair, TaskSpec,
};
