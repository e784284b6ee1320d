//! Causal-indirect-effect summaries against steering gains.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::harness::eval::{evaluate, EvalContext};
use crate::harness::sweep::cell_metric;
use crate::steering::{
    build_fv, compute_aie, default_top_k, mean_head_activations, total_mean_cie, Steering,
    AIE_SHOTS,
};
use crate::tasks::{PromptStyle, TaskSpec};

/// One task's causal summary next to the gain its function vector delivers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CieRow {
    pub task: String,
    pub k: usize,
    pub total_mean_cie: f64,
    pub cie_sum: f64,
    /// Zero-shot baseline metric on the held-out half.
    pub baseline: f64,
    /// Zero-shot metric with the function vector applied.
    pub steered: f64,
    pub gain: f64,
}

/// The correlation table. `spearman` is absent — and the report flagged
/// degenerate — with fewer than two tasks or a constant column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CieReport {
    pub rows: Vec<CieRow>,
    pub spearman: Option<f64>,
    pub degenerate: bool,
}

/// Ranks with ties sharing their average rank (1-based).
#[must_use]
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman rank correlation with average ranks for ties; `None` for fewer
/// than two points or a constant column.
#[must_use]
pub fn spearman_correlation(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    let rx = average_ranks(xs);
    let ry = average_ranks(ys);
    let n = rx.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut vx = 0.0;
    let mut vy = 0.0;
    for (a, b) in rx.iter().zip(&ry) {
        cov += (a - mx) * (b - my);
        vx += (a - mx).powi(2);
        vy += (b - my).powi(2);
    }
    if vx == 0.0 || vy == 0.0 {
        return None;
    }
    Some(cov / (vx * vy).sqrt())
}

/// Correlates total mean CIE with steering gain across the rows.
#[must_use]
pub fn cie_report(rows: Vec<CieRow>) -> CieReport {
    let xs: Vec<f64> = rows.iter().map(|r| r.total_mean_cie).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.gain).collect();
    let spearman = spearman_correlation(&xs, &ys);
    CieReport {
        degenerate: spearman.is_none(),
        spearman,
        rows,
    }
}

/// Computes one task's row: head means, indirect effects, the function
/// vector they select, and its zero-shot gain over baseline.
///
/// # Errors
/// Propagates extraction and evaluation failures.
#[allow(clippy::too_many_arguments)]
pub fn compute_cie_row(
    ctx: &EvalContext,
    task: &TaskSpec,
    n_mean_prompts: usize,
    n_aie_prompts: usize,
    top_k: Option<usize>,
    fv_seed: u64,
    n_eval: usize,
    seeds: &[u64],
) -> Result<CieRow> {
    let means = mean_head_activations(ctx.model, task, n_mean_prompts, AIE_SHOTS, fv_seed)?;
    let scores = compute_aie(ctx.model, task, &means, n_aie_prompts, fv_seed)?;
    let k = top_k.unwrap_or_else(|| default_top_k(ctx.model.config.total_heads()));
    let (cie_mean, cie_sum) = total_mean_cie(&scores, k)?;
    let fv = build_fv(ctx.model, &means, &scores, k)?;

    let style = PromptStyle::zero_shot();
    let baseline_records = evaluate(ctx, None, task, &style, n_eval, seeds)?;
    let steered_records = evaluate(ctx, Some(&Steering::Fv(fv)), task, &style, n_eval, seeds)?;
    let baseline = cell_metric(task, &baseline_records).unwrap_or(0.0);
    let steered = cell_metric(task, &steered_records).unwrap_or(0.0);

    Ok(CieRow {
        task: task.name.clone(),
        k,
        total_mean_cie: cie_mean,
        cie_sum,
        baseline,
        steered,
        gain: steered - baseline,
    })
}
