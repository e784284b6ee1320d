//! Strength × demonstration-count sweeps that pick the best ICV per task.
//!
//! Each (demo count, seed) draws its own demonstration sample and extracts
//! one direction; every strength reuses that direction, so the grid costs
//! one extraction per (k, seed) plus one evaluation per cell. Selection runs
//! on the validation half of the held-out split, keeping headline numbers on
//! the disjoint evaluation half untouched by the choice.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SvError};
use crate::harness::config::SweepGrid;
use crate::harness::eval::{evaluate_detailed, EvalContext, EvalRecord, QueryPool};
use crate::metrics::GateSummary;
use crate::rng::{derive_rng, name_tag};
use crate::steering::{build_icv, IcvOptions, InContextVector, Steering};
use crate::tasks::{make_contrast_pairs, PromptStyle, TaskCategory, TaskSpec};

// ------------------------------------------------------------------
// Table rows
// ------------------------------------------------------------------

/// One grid cell: a (λ, demo count, seed) evaluation on the validation half.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub strength: f32,
    pub demo_count: usize,
    pub seed: u64,
    /// Task metric: gated accuracy for functional tasks (absent when nothing
    /// passes the gate), shift rate for behavioral tasks.
    pub metric: Option<f64>,
    pub gradable: usize,
    pub total: usize,
    pub admissible: bool,
    pub ge_mean: f64,
}

/// Cross-seed aggregate for one (λ, demo count) cell group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub strength: f32,
    pub demo_count: usize,
    pub mean: Option<f64>,
    pub std: Option<f64>,
    /// Seeds that produced a metric.
    pub n: usize,
}

/// The winning cell and its vector.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepBest {
    pub strength: f32,
    pub demo_count: usize,
    pub seed: u64,
    pub metric: f64,
    pub vector: InContextVector,
}

/// A full sweep: every cell, cross-seed summaries, and the winner (absent
/// when no cell is admissible).
#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub task: String,
    pub cells: Vec<SweepCell>,
    pub summaries: Vec<SweepSummary>,
    pub best: Option<SweepBest>,
}

// ------------------------------------------------------------------
// Sweep
// ------------------------------------------------------------------

/// The cell metric from already-graded records: accuracy over gradable
/// records for functional tasks (absent when nothing passes the gate), shift
/// rate over all records for behavioral tasks.
#[must_use]
pub fn cell_metric(task: &TaskSpec, records: &[EvalRecord]) -> Option<f64> {
    match task.category {
        TaskCategory::Functional => {
            let gradable = records.iter().filter(|r| r.gradable).count();
            if gradable == 0 {
                return None;
            }
            let hits = records
                .iter()
                .filter(|r| r.gradable && r.correct == Some(true))
                .count();
            Some(hits as f64 / gradable as f64)
        }
        TaskCategory::Behavioral => {
            if records.is_empty() {
                return None;
            }
            let hits = records
                .iter()
                .filter(|r| r.shift_success == Some(true))
                .count();
            Some(hits as f64 / records.len() as f64)
        }
    }
}

/// Sample mean and (n-1)-normalized standard deviation; std is zero for a
/// single value.
#[must_use]
pub fn mean_std(values: &[f64]) -> Option<(f64, f64)> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let std = if values.len() < 2 {
        0.0
    } else {
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        var.sqrt()
    };
    Some((mean, std))
}

/// Picks the winning cell: highest metric among admissible cells, ties going
/// to the smaller strength, then the smaller demo count, then the smaller
/// seed.
#[must_use]
pub fn select_best(cells: &[SweepCell]) -> Option<(f32, usize, u64, f64)> {
    let mut best: Option<(f32, usize, u64, f64)> = None;
    for cell in cells {
        let Some(metric) = cell.metric else { continue };
        if !cell.admissible {
            continue;
        }
        let candidate = (cell.strength, cell.demo_count, cell.seed, metric);
        best = Some(match best {
            None => candidate,
            Some(current) => {
                let better = metric > current.3
                    || (metric == current.3
                        && (candidate.0, candidate.1, candidate.2)
                            < (current.0, current.1, current.2));
                if better {
                    candidate
                } else {
                    current
                }
            }
        });
    }
    best
}

/// Runs the full grid for one task, zero-shot, on the validation half.
///
/// # Errors
/// Propagates grid validation, extraction, and evaluation failures.
pub fn sweep_icv(
    ctx: &EvalContext,
    task: &TaskSpec,
    grid: &SweepGrid,
    n: usize,
    seeds: &[u64],
) -> Result<SweepOutcome> {
    grid.validate()?;
    if seeds.is_empty() {
        return Err(SvError::input("sweep needs at least one seed"));
    }
    let style = PromptStyle::zero_shot();
    let demo_style = grid.style_for(task);

    let mut cells = Vec::with_capacity(grid.strengths.len() * grid.demo_counts.len() * seeds.len());
    let mut directions: Vec<(usize, u64, InContextVector)> = Vec::new();
    for &demo_count in &grid.demo_counts {
        for &seed in seeds {
            let mut drng = derive_rng(
                seed,
                &[
                    name_tag("icv-demos"),
                    name_tag(&task.name),
                    demo_count as u64,
                ],
            );
            let pairs = make_contrast_pairs(task, &demo_style, demo_count, &mut drng)?;
            let base = build_icv(
                ctx.model,
                &pairs,
                &IcvOptions {
                    strength: 0.0,
                    seed,
                    demo_kind: demo_style.kind,
                    source_task: task.name.clone(),
                    ..IcvOptions::default()
                },
            )?;
            for &strength in &grid.strengths {
                let icv = base.with_strength(strength);
                let records = evaluate_detailed(
                    ctx,
                    Some(&Steering::Icv(icv)),
                    None,
                    task,
                    &style,
                    n,
                    &[seed],
                    QueryPool::Validation,
                )?;
                let gate = records.iter().filter(|r| r.gradable).count();
                let ge_mean = records.iter().map(|r| r.ge).sum::<f64>() / records.len() as f64;
                let summary = GateSummary {
                    gradable: gate,
                    total: records.len(),
                };
                cells.push(SweepCell {
                    strength,
                    demo_count,
                    seed,
                    metric: cell_metric(task, &records),
                    gradable: summary.gradable,
                    total: summary.total,
                    admissible: summary.admissible(),
                    ge_mean,
                });
            }
            directions.push((demo_count, seed, base));
        }
    }
    cells.sort_by(|a, b| {
        a.strength
            .total_cmp(&b.strength)
            .then(a.demo_count.cmp(&b.demo_count))
            .then(a.seed.cmp(&b.seed))
    });

    let mut summaries = Vec::new();
    for &strength in &grid.strengths {
        for &demo_count in &grid.demo_counts {
            let values: Vec<f64> = cells
                .iter()
                .filter(|c| c.strength == strength && c.demo_count == demo_count)
                .filter_map(|c| c.metric)
                .collect();
            let stats = mean_std(&values);
            summaries.push(SweepSummary {
                strength,
                demo_count,
                mean: stats.map(|(m, _)| m),
                std: stats.map(|(_, s)| s),
                n: values.len(),
            });
        }
    }
    summaries.sort_by(|a, b| {
        a.strength
            .total_cmp(&b.strength)
            .then(a.demo_count.cmp(&b.demo_count))
    });

    let best = select_best(&cells).map(|(strength, demo_count, seed, metric)| {
        let base = directions
            .iter()
            .find(|(k, s, _)| *k == demo_count && *s == seed)
            .map(|(_, _, v)| v)
            .expect("winning cell came from an extracted direction");
        SweepBest {
            strength,
            demo_count,
            seed,
            metric,
            vector: base.with_strength(strength),
        }
    });

    Ok(SweepOutcome {
        task: task.name.clone(),
        cells,
        summaries,
        best,
    })
}
