//! The experiment harness: configuration, evaluation, sweeps, ablations,
//! causal-effect maps, and report emission.
//!
//! Everything downstream of the model is deterministic for a fixed config:
//! sampling is keyed by (seed, task, style, item index), parallel sections
//! aggregate in item order, and every emitted file is byte-stable.

pub mod ablate;
pub mod cie;
pub mod config;
pub mod curriculum;
pub mod eval;
pub mod provenance;
pub mod report;
pub mod runner;
pub mod sweep;

pub use ablate::{ablate, summarize_ablation, AblationRow, AblationSpec, VectorKind};
pub use cie::{
    average_ranks, cie_report, compute_cie_row, spearman_correlation, CieReport, CieRow,
};
pub use config::{
    AblationSettings, FvSettings, IcvSettings, LocationSet, MetricSettings, RunConfig, SweepGrid,
    TrainSettings, ALL_LOCATION_SETS, CONFIG_VERSION,
};
pub use curriculum::build_curriculum;
pub use eval::{
    evaluate, evaluate_detailed, pool_indices, style_label, EvalContext, EvalRecord, QueryPool,
    VectorMeta,
};
pub use provenance::{task_digest, write_provenance, Provenance};
pub use report::{
    bar_chart_svg, emit_report, line_chart_svg, read_results_jsonl, scatter_svg, summarize,
    write_results_jsonl, write_summary_csv, BarSeries, SummaryRow,
};
pub use runner::{
    run_ablate, run_cie_map, run_eval, run_extract_fv, run_extract_icv, run_report, run_sweep,
    run_train_toy, tasks_for,
};
pub use sweep::{
    cell_metric, mean_std, select_best, sweep_icv, SweepBest, SweepCell, SweepOutcome,
    SweepSummary,
};
