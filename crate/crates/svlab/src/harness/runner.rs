//! Command implementations: each `run_*` function executes one pipeline
//! stage against a [`RunConfig`], writes its artifacts under the output
//! directory, and leaves a provenance manifest beside them.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Result, SvError};
use crate::harness::ablate::{ablate, summarize_ablation, AblationRow, AblationSpec, VectorKind};
use crate::harness::cie::{cie_report, compute_cie_row, CieReport};
use crate::harness::config::RunConfig;
use crate::harness::curriculum::build_curriculum;
use crate::harness::eval::{evaluate, EvalContext, EvalRecord};
use crate::harness::provenance::{write_provenance, Provenance};
use crate::harness::report::{
    bar_chart_svg, emit_report, line_chart_svg, read_results_jsonl, scatter_svg, BarSeries,
};
use crate::harness::sweep::{sweep_icv, SweepOutcome};
use crate::lm::{
    load_model, model_digest, save_model, train_toy, ModelBundle, ModelConfig, Tokenizer,
};
use crate::metrics::ClassifierRegistry;
use crate::rng::{derive_rng, name_tag};
use crate::steering::{
    build_fv, build_icv, compute_aie, default_top_k, load_steering, mean_head_activations,
    save_steering, IcvOptions, Steering, AIE_SHOTS,
};
use crate::tasks::{
    builtin_task, builtin_vocabulary, make_contrast_pairs, PromptKind, PromptStyle, TaskCategory,
    TaskSpec,
};

// ------------------------------------------------------------------
// Shared plumbing
// ------------------------------------------------------------------

/// Resolves the configured task names against the bundled suites.
///
/// # Errors
/// Configuration error for an unknown task name.
pub fn tasks_for(config: &RunConfig) -> Result<Vec<TaskSpec>> {
    config.tasks.iter().map(|name| builtin_task(name)).collect()
}

fn out_dir(config: &RunConfig) -> PathBuf {
    PathBuf::from(&config.out_dir)
}

fn vector_stem(config: &RunConfig, method: &str, task: &str) -> PathBuf {
    out_dir(config).join(format!("{method}_{task}"))
}

fn load_model_for(config: &RunConfig) -> Result<(ModelBundle, String)> {
    let path = config.resolved_model_path();
    let model = load_model(&path)?;
    let digest = model_digest(&model);
    eprintln!(
        "loaded model {} ({} layers, {} heads, d_model {})",
        path.display(),
        model.config.n_layers,
        model.config.n_heads,
        model.config.d_model
    );
    Ok((model, digest))
}

fn finish_provenance(
    command: &str,
    config: &RunConfig,
    model_digest: Option<String>,
    tasks: &[TaskSpec],
) -> Result<()> {
    let mut provenance = Provenance::new(command, config)?;
    provenance.model_digest = model_digest;
    let refs: Vec<&TaskSpec> = tasks.iter().collect();
    provenance.record_tasks(&refs)?;
    write_provenance(&provenance, &out_dir(config))?;
    Ok(())
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text)?;
    Ok(())
}

fn opt_fmt(value: Option<f64>) -> String {
    value.map_or(String::new(), |v| format!("{v:.6}"))
}

fn layers_fmt(layers: &[usize]) -> String {
    layers
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(" ")
}

/// Loads a previously extracted vector if its sidecar exists.
fn try_load_vector(config: &RunConfig, method: &str, task: &str) -> Result<Option<Steering>> {
    let meta = vector_stem(config, method, task).with_extension("json");
    if meta.exists() {
        Ok(Some(load_steering(&meta)?))
    } else {
        Ok(None)
    }
}

// ------------------------------------------------------------------
// train-toy
// ------------------------------------------------------------------

/// Builds the curriculum, trains the toy model, and saves both.
///
/// # Errors
/// Curriculum, training, and I/O failures pass through.
pub fn run_train_toy(config: &RunConfig) -> Result<()> {
    let tasks = tasks_for(config)?;
    let out = out_dir(config);
    fs::create_dir_all(&out)?;

    let tokenizer = Tokenizer::from_words(builtin_vocabulary())?;
    eprintln!(
        "building curriculum: {} episodes over {} tasks",
        config.train.n_episodes,
        tasks.len()
    );
    let curriculum = build_curriculum(&tasks, config.train.n_episodes, config.train.seed)?;
    curriculum.save(&out.join("curriculum.jsonl"))?;

    let model_config = ModelConfig::toy(tokenizer.vocab_size(), config.train.seed);
    eprintln!(
        "training: {} steps, batch {}, lr {}",
        config.train.params.steps, config.train.params.batch_size, config.train.params.lr
    );
    let (model, report) = train_toy(&curriculum, &model_config, &tokenizer, &config.train.params)?;

    let model_path = config.resolved_model_path();
    if let Some(parent) = model_path.parent() {
        fs::create_dir_all(parent)?;
    }
    save_model(&model, &model_path)?;
    let mut report_json = serde_json::to_string_pretty(&report)?;
    report_json.push('\n');
    write_text(&out.join("train_report.json"), &report_json)?;

    for (task, accuracy) in &report.probe_accuracy {
        eprintln!("probe accuracy {task}: {accuracy:.3}");
    }
    eprintln!(
        "saved model {} (final loss {:.4})",
        model_path.display(),
        report.final_loss
    );
    finish_provenance("train-toy", config, Some(model_digest(&model)), &tasks)
}

// ------------------------------------------------------------------
// extract-icv / extract-fv
// ------------------------------------------------------------------

/// Extracts one ICV per task at the configured strength and demo count.
///
/// The demonstration stream is keyed exactly like a sweep cell, so an
/// extraction at `(demo_count, seed)` reproduces that cell's direction.
///
/// # Errors
/// Extraction and I/O failures pass through.
pub fn run_extract_icv(config: &RunConfig) -> Result<()> {
    let tasks = tasks_for(config)?;
    let (model, digest) = load_model_for(config)?;
    fs::create_dir_all(out_dir(config))?;

    for task in &tasks {
        let style = config.sweep.style_for(task);
        let mut drng = derive_rng(
            config.icv.seed,
            &[
                name_tag("icv-demos"),
                name_tag(&task.name),
                config.icv.demo_count as u64,
            ],
        );
        let pairs = make_contrast_pairs(task, &style, config.icv.demo_count, &mut drng)?;
        let icv = build_icv(
            &model,
            &pairs,
            &IcvOptions {
                strength: config.icv.strength,
                seed: config.icv.seed,
                demo_kind: style.kind,
                source_task: task.name.clone(),
                ..IcvOptions::default()
            },
        )?;
        let stem = vector_stem(config, "icv", &task.name);
        save_steering(&Steering::Icv(icv), &stem)?;
        eprintln!(
            "extracted icv for {} (lambda {}, {} demos) -> {}",
            task.name,
            config.icv.strength,
            config.icv.demo_count,
            stem.with_extension("json").display()
        );
    }
    finish_provenance("extract-icv", config, Some(digest), &tasks)
}

/// Extracts one function vector per task and writes the per-head effect map.
///
/// # Errors
/// Extraction and I/O failures pass through.
pub fn run_extract_fv(config: &RunConfig) -> Result<()> {
    let tasks = tasks_for(config)?;
    let (model, digest) = load_model_for(config)?;
    fs::create_dir_all(out_dir(config))?;

    let k = config
        .fv
        .top_k
        .unwrap_or_else(|| default_top_k(model.config.total_heads()));
    for task in &tasks {
        eprintln!(
            "scoring {} heads on {} ({} mean prompts, {} effect prompts)",
            model.config.total_heads(),
            task.name,
            config.fv.n_mean_prompts,
            config.fv.n_aie_prompts
        );
        let means = mean_head_activations(
            &model,
            task,
            config.fv.n_mean_prompts,
            AIE_SHOTS,
            config.fv.seed,
        )?;
        let scores = compute_aie(&model, task, &means, config.fv.n_aie_prompts, config.fv.seed)?;
        let fv = build_fv(&model, &means, &scores, k)?;

        let mut csv = String::from("layer,head,score\n");
        for ((layer, head), score) in scores.indexed_iter() {
            let _ = writeln!(csv, "{layer},{head},{score:.6e}");
        }
        write_text(&out_dir(config).join(format!("aie_{}.csv", task.name)), &csv)?;

        let stem = vector_stem(config, "fv", &task.name);
        save_steering(&Steering::Fv(fv.clone()), &stem)?;
        eprintln!(
            "extracted fv for {} (k {}, layers {:?}) -> {}",
            task.name,
            fv.k,
            fv.target_layers,
            stem.with_extension("json").display()
        );
    }
    finish_provenance("extract-fv", config, Some(digest), &tasks)
}

// ------------------------------------------------------------------
// eval
// ------------------------------------------------------------------

/// The styles a task is evaluated under: behavioral tasks are zero-shot
/// only, so richer styles are dropped with a note.
fn styles_for(config: &RunConfig, task: &TaskSpec) -> Vec<PromptStyle> {
    if task.category == TaskCategory::Functional {
        return config.styles.clone();
    }
    let kept: Vec<PromptStyle> = config
        .styles
        .iter()
        .copied()
        .filter(|s| s.kind == PromptKind::ZeroShot)
        .collect();
    if kept.len() < config.styles.len() {
        eprintln!(
            "note: {} is behavioral; evaluating zero-shot only",
            task.name
        );
    }
    if kept.is_empty() {
        vec![PromptStyle::zero_shot()]
    } else {
        kept
    }
}

/// Evaluates baseline and every extracted vector over the configured tasks
/// and styles, then emits the full report.
///
/// # Errors
/// Evaluation and I/O failures pass through.
pub fn run_eval(config: &RunConfig) -> Result<Vec<EvalRecord>> {
    let tasks = tasks_for(config)?;
    let (model, digest) = load_model_for(config)?;
    let registry = ClassifierRegistry::builtin()?;
    let ctx = EvalContext {
        model: &model,
        registry: &registry,
        weights: config.metrics.ge_weights,
        max_new_tokens: config.max_new_tokens,
        config_hash: config.config_hash()?,
    };

    let mut records = Vec::new();
    for task in &tasks {
        let mut arms: Vec<(String, Option<Steering>)> = vec![("baseline".to_string(), None)];
        for method in ["icv", "fv"] {
            if let Some(vector) = try_load_vector(config, method, &task.name)? {
                arms.push((method.to_string(), Some(vector)));
            }
        }
        for style in styles_for(config, task) {
            for (label, vector) in &arms {
                eprintln!(
                    "evaluating {} / {} / {} ({} queries x {} seeds)",
                    task.name,
                    label,
                    crate::harness::eval::style_label(&style),
                    config.n_eval,
                    config.seeds.len()
                );
                let batch = evaluate(
                    &ctx,
                    vector.as_ref(),
                    task,
                    &style,
                    config.n_eval,
                    &config.seeds,
                )?;
                records.extend(batch);
            }
        }
    }

    let paths = emit_report(&records, &out_dir(config))?;
    for path in &paths {
        eprintln!("wrote {}", path.display());
    }
    finish_provenance("eval", config, Some(digest), &tasks)?;
    Ok(records)
}

// ------------------------------------------------------------------
// sweep
// ------------------------------------------------------------------

fn write_sweep_csv(outcome: &SweepOutcome, path: &Path) -> Result<()> {
    let mut csv = String::from("strength,demo_count,seed,metric,gradable,total,admissible,ge_mean\n");
    for cell in &outcome.cells {
        let _ = writeln!(
            csv,
            "{:.6},{},{},{},{},{},{},{:.6}",
            cell.strength,
            cell.demo_count,
            cell.seed,
            opt_fmt(cell.metric),
            cell.gradable,
            cell.total,
            cell.admissible,
            cell.ge_mean
        );
    }
    write_text(path, &csv)
}

fn sweep_chart(outcome: &SweepOutcome) -> String {
    let mut strengths: Vec<f64> = outcome
        .summaries
        .iter()
        .map(|s| f64::from(s.strength))
        .collect();
    strengths.sort_by(f64::total_cmp);
    strengths.dedup();
    let mut demo_counts: Vec<usize> = outcome.summaries.iter().map(|s| s.demo_count).collect();
    demo_counts.sort_unstable();
    demo_counts.dedup();

    let series: Vec<(String, Vec<Option<f64>>)> = demo_counts
        .iter()
        .map(|&k| {
            let values = strengths
                .iter()
                .map(|&lambda| {
                    outcome
                        .summaries
                        .iter()
                        .find(|s| s.demo_count == k && (f64::from(s.strength) - lambda).abs() < 1e-12)
                        .and_then(|s| s.mean)
                })
                .collect();
            (format!("{k} demos"), values)
        })
        .collect();
    line_chart_svg(
        &format!("ICV sweep: {}", outcome.task),
        &strengths,
        &series,
        "injection strength",
        "validation metric",
    )
}

/// Sweeps the ICV grid per task, saving each winner as that task's ICV.
///
/// # Errors
/// Sweep and I/O failures pass through.
pub fn run_sweep(config: &RunConfig) -> Result<()> {
    let tasks = tasks_for(config)?;
    let (model, digest) = load_model_for(config)?;
    let registry = ClassifierRegistry::builtin()?;
    let ctx = EvalContext {
        model: &model,
        registry: &registry,
        weights: config.metrics.ge_weights,
        max_new_tokens: config.max_new_tokens,
        config_hash: config.config_hash()?,
    };
    fs::create_dir_all(out_dir(config))?;

    let mut combined =
        String::from("task,strength,demo_count,metric_mean,metric_std,seeds_with_metric\n");
    for task in &tasks {
        eprintln!(
            "sweeping {}: {} strengths x {} demo counts x {} seeds",
            task.name,
            config.sweep.strengths.len(),
            config.sweep.demo_counts.len(),
            config.seeds.len()
        );
        let outcome = sweep_icv(&ctx, task, &config.sweep, config.n_eval, &config.seeds)?;
        write_sweep_csv(
            &outcome,
            &out_dir(config).join(format!("sweep_{}.csv", task.name)),
        )?;
        for summary in &outcome.summaries {
            let _ = writeln!(
                combined,
                "{},{:.6},{},{},{},{}",
                outcome.task,
                summary.strength,
                summary.demo_count,
                opt_fmt(summary.mean),
                opt_fmt(summary.std),
                summary.n
            );
        }
        write_text(
            &out_dir(config).join(format!("sweep_{}.svg", task.name)),
            &sweep_chart(&outcome),
        )?;

        match &outcome.best {
            Some(best) => {
                let stem = vector_stem(config, "icv", &task.name);
                save_steering(&Steering::Icv(best.vector.clone()), &stem)?;
                eprintln!(
                    "best icv for {}: lambda {:.2}, {} demos, seed {} (metric {:.3}) -> {}",
                    task.name,
                    best.strength,
                    best.demo_count,
                    best.seed,
                    best.metric,
                    stem.with_extension("json").display()
                );
            }
            None => eprintln!("no admissible ICV for {}", task.name),
        }
    }
    write_text(&out_dir(config).join("sweep_summary.csv"), &combined)?;
    finish_provenance("sweep", config, Some(digest), &tasks)
}

// ------------------------------------------------------------------
// ablate
// ------------------------------------------------------------------

fn write_ablation_csv(rows: &[AblationRow], path: &Path) -> Result<()> {
    let mut csv = String::from("location,layers,metric,delta_vs_default,ge_mean,gradable,total\n");
    for row in rows {
        let _ = writeln!(
            csv,
            "{},{},{},{},{:.6},{},{}",
            row.location.label(),
            layers_fmt(&row.layers),
            opt_fmt(row.metric),
            opt_fmt(row.delta_vs_default),
            row.ge_mean,
            row.gradable,
            row.total
        );
    }
    write_text(path, &csv)
}

/// Re-evaluates every extracted vector at each configured placement.
///
/// # Errors
/// Ablation and I/O failures pass through; tasks without extracted vectors
/// are skipped with a note.
pub fn run_ablate(config: &RunConfig) -> Result<()> {
    let tasks = tasks_for(config)?;
    let (model, digest) = load_model_for(config)?;
    let registry = ClassifierRegistry::builtin()?;
    let ctx = EvalContext {
        model: &model,
        registry: &registry,
        weights: config.metrics.ge_weights,
        max_new_tokens: config.max_new_tokens,
        config_hash: config.config_hash()?,
    };
    fs::create_dir_all(out_dir(config))?;

    let style = PromptStyle::zero_shot();
    let mut combined =
        String::from("task,method,location,layers,metric,delta_vs_default,ge_mean,gradable,total\n");
    // Mean generation entropy per (method, location) for the chart.
    let mut ge_cells: Vec<(VectorKind, String, f64)> = Vec::new();

    for kind in [VectorKind::Icv, VectorKind::Fv] {
        for task in &tasks {
            let Some(vector) = try_load_vector(config, kind.label(), &task.name)? else {
                eprintln!("no {} extracted for {}; skipping", kind.label(), task.name);
                continue;
            };
            eprintln!("ablating {} {} over {} placements",
                kind.label(), task.name, config.ablation.locations.len());
            let spec = AblationSpec {
                locations: config.ablation.locations.clone(),
                applies_to: kind,
            };
            let results = ablate(&ctx, &vector, task, &spec, &style, config.n_eval, &config.seeds)?;
            let rows = summarize_ablation(task, &results)?;
            write_ablation_csv(
                &rows,
                &out_dir(config).join(format!("ablation_{}_{}.csv", kind.label(), task.name)),
            )?;
            for row in &rows {
                let _ = writeln!(
                    combined,
                    "{},{},{},{},{},{},{:.6},{},{}",
                    task.name,
                    kind.label(),
                    row.location.label(),
                    layers_fmt(&row.layers),
                    opt_fmt(row.metric),
                    opt_fmt(row.delta_vs_default),
                    row.ge_mean,
                    row.gradable,
                    row.total
                );
                ge_cells.push((kind, row.location.label().to_string(), row.ge_mean));
            }
        }
    }
    if ge_cells.is_empty() {
        return Err(SvError::input(
            "no vectors to ablate; run extract-icv, extract-fv, or sweep first",
        ));
    }
    write_text(&out_dir(config).join("ablation.csv"), &combined)?;

    let locations: Vec<String> = config
        .ablation
        .locations
        .iter()
        .map(|l| l.label().to_string())
        .collect();
    let series: Vec<BarSeries> = [VectorKind::Icv, VectorKind::Fv]
        .iter()
        .map(|&kind| BarSeries {
            name: kind.label().to_string(),
            values: locations
                .iter()
                .map(|loc| {
                    let values: Vec<f64> = ge_cells
                        .iter()
                        .filter(|(k, l, _)| *k == kind && l == loc)
                        .map(|(_, _, ge)| *ge)
                        .collect();
                    crate::harness::sweep::mean_std(&values).map(|(m, _)| m)
                })
                .collect(),
        })
        .collect();
    write_text(
        &out_dir(config).join("ablation_ge.svg"),
        &bar_chart_svg(
            "Generation entropy by placement (mean over tasks)",
            &locations,
            &series,
            "generation entropy",
        ),
    )?;
    finish_provenance("ablate", config, Some(digest), &tasks)
}

// ------------------------------------------------------------------
// cie-map
// ------------------------------------------------------------------

/// Builds the causal-effect map and its correlation with steering gains.
///
/// # Errors
/// Extraction, evaluation, and I/O failures pass through.
pub fn run_cie_map(config: &RunConfig) -> Result<CieReport> {
    let tasks = tasks_for(config)?;
    let (model, digest) = load_model_for(config)?;
    let registry = ClassifierRegistry::builtin()?;
    let ctx = EvalContext {
        model: &model,
        registry: &registry,
        weights: config.metrics.ge_weights,
        max_new_tokens: config.max_new_tokens,
        config_hash: config.config_hash()?,
    };
    fs::create_dir_all(out_dir(config))?;

    let mut rows = Vec::with_capacity(tasks.len());
    for task in &tasks {
        eprintln!("mapping indirect effects on {}", task.name);
        let row = compute_cie_row(
            &ctx,
            task,
            config.fv.n_mean_prompts,
            config.fv.n_aie_prompts,
            config.fv.top_k,
            config.fv.seed,
            config.n_eval,
            &config.seeds,
        )?;
        eprintln!(
            "{}: mean effect {:.4e}, gain {:+.3}",
            row.task, row.total_mean_cie, row.gain
        );
        rows.push(row);
    }
    let report = cie_report(rows);

    let mut csv = String::from("task,k,total_mean_cie,cie_sum,baseline,steered,gain\n");
    for row in &report.rows {
        let _ = writeln!(
            csv,
            "{},{},{:.6e},{:.6e},{:.6},{:.6},{:.6}",
            row.task, row.k, row.total_mean_cie, row.cie_sum, row.baseline, row.steered, row.gain
        );
    }
    write_text(&out_dir(config).join("cie.csv"), &csv)?;
    let mut json = serde_json::to_string_pretty(&report)?;
    json.push('\n');
    write_text(&out_dir(config).join("cie.json"), &json)?;

    let points: Vec<(f64, f64, String)> = report
        .rows
        .iter()
        .map(|r| (r.total_mean_cie, r.gain, r.task.clone()))
        .collect();
    write_text(
        &out_dir(config).join("cie_scatter.svg"),
        &scatter_svg(
            "Mean indirect effect vs function-vector gain",
            &points,
            "total mean indirect effect (top-k)",
            "zero-shot gain",
        ),
    )?;

    match report.spearman {
        Some(rho) => eprintln!("rank correlation (effect vs gain): {rho:.3}"),
        None => eprintln!("rank correlation undefined (degenerate inputs)"),
    }
    finish_provenance("cie-map", config, Some(digest), &tasks)?;
    Ok(report)
}

// ------------------------------------------------------------------
// report
// ------------------------------------------------------------------

/// Re-emits summary tables and charts from an existing results.jsonl.
///
/// # Errors
/// Input error when the results file is missing or empty.
pub fn run_report(config: &RunConfig) -> Result<Vec<PathBuf>> {
    let results_path = out_dir(config).join("results.jsonl");
    if !results_path.exists() {
        return Err(SvError::Input(format!(
            "{} not found; run eval first",
            results_path.display()
        )));
    }
    let records = read_results_jsonl(&results_path)?;
    let tasks = tasks_for(config)?;
    let paths = emit_report(&records, &out_dir(config))?;
    for path in &paths {
        eprintln!("wrote {}", path.display());
    }
    finish_provenance("report", config, None, &tasks)?;
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lm::TrainParams;
    use crate::harness::config::TrainSettings;

    /// An end-to-end pipeline against an untrained (steps = 0) model, small
    /// enough for a unit test: every command runs and leaves its artifacts.
    #[test]
    fn pipeline_produces_all_artifacts_on_an_untrained_model() {
        let dir = tempfile::tempdir().unwrap();
        let config = RunConfig {
            tasks: vec!["antonym".to_string(), "detox-marker".to_string()],
            styles: vec![PromptStyle::zero_shot(), PromptStyle::shuffled(3)],
            n_eval: 3,
            seeds: vec![0],
            train: TrainSettings {
                params: TrainParams {
                    steps: 0,
                    log_every: 0,
                    ..TrainParams::default()
                },
                n_episodes: 40,
                seed: 0,
            },
            sweep: crate::harness::config::SweepGrid {
                strengths: vec![0.0, 0.1],
                demo_counts: vec![3],
                ..crate::harness::config::SweepGrid::default()
            },
            fv: crate::harness::config::FvSettings {
                n_mean_prompts: 4,
                n_aie_prompts: 2,
                top_k: Some(2),
                seed: 0,
            },
            out_dir: dir.path().to_str().unwrap().to_string(),
            ..RunConfig::default()
        };
        config.validate().unwrap();

        run_train_toy(&config).unwrap();
        assert!(config.resolved_model_path().exists());
        assert!(dir.path().join("curriculum.jsonl").exists());
        assert!(dir.path().join("train_report.json").exists());

        run_extract_icv(&config).unwrap();
        assert!(dir.path().join("icv_antonym.json").exists());
        assert!(dir.path().join("icv_antonym.bin").exists());

        run_extract_fv(&config).unwrap();
        assert!(dir.path().join("fv_antonym.json").exists());
        assert!(dir.path().join("aie_detox-marker.csv").exists());

        let records = run_eval(&config).unwrap();
        // 2 tasks; antonym gets 2 styles x 3 arms, detox gets 1 style x 3
        // arms; 3 queries x 1 seed each.
        assert_eq!(records.len(), (2 * 3 + 3) * 3);
        assert!(dir.path().join("results.jsonl").exists());
        assert!(dir.path().join("summary.csv").exists());
        assert!(dir.path().join("accuracy.svg").exists());

        run_sweep(&config).unwrap();
        assert!(dir.path().join("sweep_antonym.csv").exists());
        assert!(dir.path().join("sweep_summary.csv").exists());

        run_ablate(&config).unwrap();
        assert!(dir.path().join("ablation_icv_antonym.csv").exists());
        assert!(dir.path().join("ablation.csv").exists());
        assert!(dir.path().join("ablation_ge.svg").exists());

        let report = run_cie_map(&config).unwrap();
        assert_eq!(report.rows.len(), 2);
        assert!(dir.path().join("cie.csv").exists());
        assert!(dir.path().join("cie_scatter.svg").exists());

        let paths = run_report(&config).unwrap();
        assert!(!paths.is_empty());
        assert!(dir.path().join("provenance.json").exists());
    }
}
