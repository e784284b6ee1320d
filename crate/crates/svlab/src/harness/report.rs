//! Report emission: results.jsonl, summary.csv, and static SVG charts.
//!
//! Every writer is byte-stable: identical records produce identical files,
//! whatever the thread count that computed them.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Result, SvError};
use crate::harness::eval::{style_label, EvalRecord};
use crate::harness::sweep::mean_std;

// ------------------------------------------------------------------
// JSONL
// ------------------------------------------------------------------

/// Writes one record per line.
///
/// # Errors
/// Input error for an empty record set; I/O and JSON errors pass through.
pub fn write_results_jsonl(records: &[EvalRecord], path: &Path) -> Result<()> {
    if records.is_empty() {
        return Err(SvError::input("no records to write"));
    }
    let mut out = String::new();
    for record in records {
        out.push_str(&serde_json::to_string(record)?);
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

/// Reads a results.jsonl file back.
///
/// # Errors
/// Input error naming the line for any malformed record.
pub fn read_results_jsonl(path: &Path) -> Result<Vec<EvalRecord>> {
    let raw = fs::read_to_string(path)?;
    let mut records = Vec::new();
    for (i, line) in raw.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let record: EvalRecord = serde_json::from_str(line)
            .map_err(|e| SvError::Input(format!("{}:{}: {e}", path.display(), i + 1)))?;
        records.push(record);
    }
    Ok(records)
}

// ------------------------------------------------------------------
// Summary table
// ------------------------------------------------------------------

/// One `summary.csv` line: a metric's cross-seed mean for a (task, method,
/// style) group.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub task: String,
    pub method: String,
    pub style: String,
    pub metric: String,
    pub mean: f64,
    pub std: f64,
    /// Seeds contributing a value.
    pub n: usize,
}

fn method_rank(method: &str) -> u8 {
    match method {
        "baseline" => 0,
        "icv" => 1,
        "fv" => 2,
        _ => 3,
    }
}

/// Per-seed value lists for one metric within a group: accuracy over
/// gradable records only, shift over all records, the rest plain means.
fn seed_values(group: &[&EvalRecord], metric: &str) -> Vec<f64> {
    let seeds: BTreeSet<u64> = group.iter().map(|r| r.seed).collect();
    let mut values = Vec::new();
    for seed in seeds {
        let of_seed: Vec<&&EvalRecord> = group.iter().filter(|r| r.seed == seed).collect();
        let value = match metric {
            "accuracy" => {
                let gradable = of_seed.iter().filter(|r| r.gradable).count();
                if gradable == 0 {
                    continue;
                }
                let hits = of_seed
                    .iter()
                    .filter(|r| r.gradable && r.correct == Some(true))
                    .count();
                hits as f64 / gradable as f64
            }
            "shift" => {
                let hits = of_seed
                    .iter()
                    .filter(|r| r.shift_success == Some(true))
                    .count();
                hits as f64 / of_seed.len() as f64
            }
            "ge" => of_seed.iter().map(|r| r.ge).sum::<f64>() / of_seed.len() as f64,
            "dist_1" => of_seed.iter().map(|r| r.dist_1).sum::<f64>() / of_seed.len() as f64,
            "dist_2" => of_seed.iter().map(|r| r.dist_2).sum::<f64>() / of_seed.len() as f64,
            "gradable_fraction" => {
                of_seed.iter().filter(|r| r.gradable).count() as f64 / of_seed.len() as f64
            }
            _ => unreachable!("unknown summary metric {metric}"),
        };
        values.push(value);
    }
    values
}

/// Collapses records into the fixed-schema summary table, sorted by task,
/// method (baseline first), style, and metric name.
#[must_use]
pub fn summarize(records: &[EvalRecord]) -> Vec<SummaryRow> {
    let mut groups: BTreeMap<(String, String, String), Vec<&EvalRecord>> = BTreeMap::new();
    for record in records {
        groups
            .entry((
                record.task.clone(),
                record.method.clone(),
                style_label(&record.style),
            ))
            .or_default()
            .push(record);
    }

    let mut rows = Vec::new();
    for ((task, method, style), group) in &groups {
        let graded = group.iter().any(|r| r.correct.is_some());
        let shifted = group.iter().any(|r| r.shift_success.is_some());
        let mut metrics = Vec::new();
        if graded {
            metrics.push("accuracy");
        }
        if shifted {
            metrics.push("shift");
        }
        metrics.extend(["ge", "dist_1", "dist_2", "gradable_fraction"]);
        for metric in metrics {
            let values = seed_values(group, metric);
            if let Some((mean, std)) = mean_std(&values) {
                rows.push(SummaryRow {
                    task: task.clone(),
                    method: method.clone(),
                    style: style.clone(),
                    metric: metric.to_string(),
                    mean,
                    std,
                    n: values.len(),
                });
            }
        }
    }
    rows.sort_by(|a, b| {
        a.task
            .cmp(&b.task)
            .then(method_rank(&a.method).cmp(&method_rank(&b.method)))
            .then(a.method.cmp(&b.method))
            .then(a.style.cmp(&b.style))
            .then(a.metric.cmp(&b.metric))
    });
    rows
}

/// Writes the `task,method,style,metric,mean,std,n` table.
///
/// # Errors
/// I/O errors pass through.
pub fn write_summary_csv(rows: &[SummaryRow], path: &Path) -> Result<()> {
    let mut out = String::from("task,method,style,metric,mean,std,n\n");
    for row in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{:.6},{:.6},{}",
            row.task, row.method, row.style, row.metric, row.mean, row.std, row.n
        );
    }
    fs::write(path, out)?;
    Ok(())
}

// ------------------------------------------------------------------
// SVG charts
// ------------------------------------------------------------------

const SVG_W: f64 = 720.0;
const SVG_H: f64 = 420.0;
const MARGIN_L: f64 = 64.0;
const MARGIN_R: f64 = 24.0;
const MARGIN_T: f64 = 48.0;
const MARGIN_B: f64 = 72.0;

/// Series colors, fixed so identical inputs render identically.
pub const PALETTE: [&str; 6] = [
    "#4878a8", "#e49444", "#5a9e6f", "#b65d60", "#857aab", "#8c8c8c",
];

fn svg_open(title: &str) -> String {
    let mut s = String::new();
    let _ = write!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SVG_W:.0}\" height=\"{SVG_H:.0}\" \
         viewBox=\"0 0 {SVG_W:.0} {SVG_H:.0}\" font-family=\"sans-serif\">\n\
         <rect width=\"{SVG_W:.0}\" height=\"{SVG_H:.0}\" fill=\"#ffffff\"/>\n\
         <text x=\"{:.4}\" y=\"24\" font-size=\"15\" text-anchor=\"middle\" fill=\"#222222\">{}</text>\n",
        SVG_W / 2.0,
        xml_escape(title)
    );
    s
}

fn xml_escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

struct Scale {
    min: f64,
    max: f64,
}

impl Scale {
    fn from_values<I: IntoIterator<Item = f64>>(values: I, include_zero: bool) -> Scale {
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        for v in values {
            min = min.min(v);
            max = max.max(v);
        }
        if !min.is_finite() || !max.is_finite() {
            min = 0.0;
            max = 1.0;
        }
        if include_zero {
            min = min.min(0.0);
            max = max.max(0.0);
        }
        if (max - min).abs() < 1e-12 {
            max = min + 1.0;
        }
        Scale { min, max }
    }

    fn y(&self, v: f64) -> f64 {
        let plot_h = SVG_H - MARGIN_T - MARGIN_B;
        MARGIN_T + plot_h * (1.0 - (v - self.min) / (self.max - self.min))
    }
}

fn axes(s: &mut String, scale: &Scale, y_label: &str) {
    let x0 = MARGIN_L;
    let x1 = SVG_W - MARGIN_R;
    let y0 = SVG_H - MARGIN_B;
    let _ = write!(
        s,
        "<line x1=\"{x0:.4}\" y1=\"{y0:.4}\" x2=\"{x1:.4}\" y2=\"{y0:.4}\" stroke=\"#444444\"/>\n\
         <line x1=\"{x0:.4}\" y1=\"{:.4}\" x2=\"{x0:.4}\" y2=\"{y0:.4}\" stroke=\"#444444\"/>\n",
        MARGIN_T
    );
    for i in 0..=4 {
        let v = scale.min + (scale.max - scale.min) * f64::from(i) / 4.0;
        let y = scale.y(v);
        let _ = write!(
            s,
            "<line x1=\"{:.4}\" y1=\"{y:.4}\" x2=\"{x0:.4}\" y2=\"{y:.4}\" stroke=\"#444444\"/>\n\
             <text x=\"{:.4}\" y=\"{:.4}\" font-size=\"11\" text-anchor=\"end\" fill=\"#222222\">{v:.3}</text>\n",
            x0 - 4.0,
            x0 - 7.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        s,
        "<text x=\"16\" y=\"{:.4}\" font-size=\"12\" fill=\"#222222\" \
         transform=\"rotate(-90 16 {:.4})\" text-anchor=\"middle\">{}</text>",
        (MARGIN_T + SVG_H - MARGIN_B) / 2.0,
        (MARGIN_T + SVG_H - MARGIN_B) / 2.0,
        xml_escape(y_label)
    );
}

fn legend(s: &mut String, names: &[String]) {
    let mut x = MARGIN_L;
    let y = 34.0;
    for (i, name) in names.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let _ = write!(
            s,
            "<rect x=\"{x:.4}\" y=\"{:.4}\" width=\"10\" height=\"10\" fill=\"{color}\"/>\n\
             <text x=\"{:.4}\" y=\"{:.4}\" font-size=\"11\" fill=\"#222222\">{}</text>\n",
            y - 9.0,
            x + 14.0,
            y,
            xml_escape(name)
        );
        x += 14.0 + 7.0 * (name.len() as f64) + 18.0;
    }
}

/// One named series of per-group values; a missing value skips the bar.
#[derive(Debug, Clone)]
pub struct BarSeries {
    pub name: String,
    pub values: Vec<Option<f64>>,
}

/// A grouped bar chart, one slot per group label, one bar per series.
#[must_use]
pub fn bar_chart_svg(title: &str, group_labels: &[String], series: &[BarSeries], y_label: &str) -> String {
    let mut s = svg_open(title);
    let scale = Scale::from_values(
        series
            .iter()
            .flat_map(|sr| sr.values.iter().copied().flatten()),
        true,
    );
    axes(&mut s, &scale, y_label);
    legend(&mut s, &series.iter().map(|sr| sr.name.clone()).collect::<Vec<_>>());

    let plot_w = SVG_W - MARGIN_L - MARGIN_R;
    let n_groups = group_labels.len().max(1);
    let slot = plot_w / n_groups as f64;
    let band = slot * 0.8;
    let bar_w = band / series.len().max(1) as f64;
    let zero_y = scale.y(0.0);

    for (g, label) in group_labels.iter().enumerate() {
        let slot_x = MARGIN_L + slot * g as f64;
        for (i, sr) in series.iter().enumerate() {
            let Some(v) = sr.values.get(g).copied().flatten() else {
                continue;
            };
            let x = slot_x + slot * 0.1 + bar_w * i as f64;
            let y = scale.y(v);
            let (top, height) = if y <= zero_y {
                (y, zero_y - y)
            } else {
                (zero_y, y - zero_y)
            };
            let _ = writeln!(
                s,
                "<rect x=\"{x:.4}\" y=\"{top:.4}\" width=\"{:.4}\" height=\"{height:.4}\" fill=\"{}\"/>",
                bar_w * 0.92,
                PALETTE[i % PALETTE.len()]
            );
        }
        let _ = writeln!(
            s,
            "<text x=\"{:.4}\" y=\"{:.4}\" font-size=\"11\" text-anchor=\"middle\" fill=\"#222222\">{}</text>",
            slot_x + slot / 2.0,
            SVG_H - MARGIN_B + 16.0,
            xml_escape(label)
        );
    }
    s.push_str("</svg>\n");
    s
}

/// A line chart over shared x positions; missing points break the line.
#[must_use]
pub fn line_chart_svg(
    title: &str,
    xs: &[f64],
    series: &[(String, Vec<Option<f64>>)],
    x_label: &str,
    y_label: &str,
) -> String {
    let mut s = svg_open(title);
    let scale = Scale::from_values(
        series
            .iter()
            .flat_map(|(_, vs)| vs.iter().copied().flatten()),
        false,
    );
    axes(&mut s, &scale, y_label);
    legend(&mut s, &series.iter().map(|(n, _)| n.clone()).collect::<Vec<_>>());

    let plot_w = SVG_W - MARGIN_L - MARGIN_R;
    let x_scale = Scale::from_values(xs.iter().copied(), false);
    let to_x = |v: f64| MARGIN_L + plot_w * (v - x_scale.min) / (x_scale.max - x_scale.min);

    for (i, (_, values)) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let mut segment: Vec<String> = Vec::new();
        let flush = |seg: &mut Vec<String>, s: &mut String| {
            if seg.len() >= 2 {
                let _ = writeln!(
                    s,
                    "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"2\"/>",
                    seg.join(" ")
                );
            }
            seg.clear();
        };
        for (&x, v) in xs.iter().zip(values) {
            match v {
                Some(v) => {
                    let px = to_x(x);
                    let py = scale.y(*v);
                    segment.push(format!("{px:.4},{py:.4}"));
                    let _ = writeln!(
                        s,
                        "<circle cx=\"{px:.4}\" cy=\"{py:.4}\" r=\"3\" fill=\"{color}\"/>"
                    );
                }
                None => flush(&mut segment, &mut s),
            }
        }
        flush(&mut segment, &mut s);
    }
    for &x in xs {
        let _ = writeln!(
            s,
            "<text x=\"{:.4}\" y=\"{:.4}\" font-size=\"10\" text-anchor=\"middle\" fill=\"#222222\">{x:.2}</text>",
            to_x(x),
            SVG_H - MARGIN_B + 16.0
        );
    }
    let _ = writeln!(
        s,
        "<text x=\"{:.4}\" y=\"{:.4}\" font-size=\"12\" text-anchor=\"middle\" fill=\"#222222\">{}</text>",
        MARGIN_L + plot_w / 2.0,
        SVG_H - MARGIN_B + 40.0,
        xml_escape(x_label)
    );
    s.push_str("</svg>\n");
    s
}

/// A labeled scatter plot.
#[must_use]
pub fn scatter_svg(title: &str, points: &[(f64, f64, String)], x_label: &str, y_label: &str) -> String {
    let mut s = svg_open(title);
    let scale = Scale::from_values(points.iter().map(|p| p.1), false);
    axes(&mut s, &scale, y_label);
    let plot_w = SVG_W - MARGIN_L - MARGIN_R;
    let x_scale = Scale::from_values(points.iter().map(|p| p.0), false);
    let to_x = |v: f64| MARGIN_L + plot_w * (v - x_scale.min) / (x_scale.max - x_scale.min);

    for (x, y, label) in points {
        let px = to_x(*x);
        let py = scale.y(*y);
        let _ = write!(
            s,
            "<circle cx=\"{px:.4}\" cy=\"{py:.4}\" r=\"4\" fill=\"{}\"/>\n\
             <text x=\"{:.4}\" y=\"{:.4}\" font-size=\"10\" fill=\"#222222\">{}</text>\n",
            PALETTE[0],
            px + 6.0,
            py - 6.0,
            xml_escape(label)
        );
    }
    for i in 0..=4 {
        let v = x_scale.min + (x_scale.max - x_scale.min) * f64::from(i) / 4.0;
        let _ = writeln!(
            s,
            "<text x=\"{:.4}\" y=\"{:.4}\" font-size=\"10\" text-anchor=\"middle\" fill=\"#222222\">{v:.4}</text>",
            to_x(v),
            SVG_H - MARGIN_B + 16.0
        );
    }
    let _ = writeln!(
        s,
        "<text x=\"{:.4}\" y=\"{:.4}\" font-size=\"12\" text-anchor=\"middle\" fill=\"#222222\">{}</text>",
        MARGIN_L + plot_w / 2.0,
        SVG_H - MARGIN_B + 40.0,
        xml_escape(x_label)
    );
    s.push_str("</svg>\n");
    s
}

// ------------------------------------------------------------------
// Report emission
// ------------------------------------------------------------------

/// The headline group value for charts: accuracy when graded, else shift.
fn chart_value(rows: &[SummaryRow], task: &str, method: &str, style: &str) -> Option<f64> {
    rows.iter()
        .find(|r| {
            r.task == task
                && r.method == method
                && r.style == style
                && (r.metric == "accuracy" || r.metric == "shift")
        })
        .map(|r| r.mean)
}

fn metric_mean(rows: &[SummaryRow], task: &str, method: &str, style: &str, metric: &str) -> Option<f64> {
    rows.iter()
        .find(|r| r.task == task && r.method == method && r.style == style && r.metric == metric)
        .map(|r| r.mean)
}

/// Writes results.jsonl, summary.csv, and the SVG charts; returns the paths.
///
/// # Errors
/// Input error for an empty record set; I/O errors pass through.
pub fn emit_report(records: &[EvalRecord], out_dir: &Path) -> Result<Vec<PathBuf>> {
    if records.is_empty() {
        return Err(SvError::input("no records to report"));
    }
    fs::create_dir_all(out_dir)?;
    let mut written = Vec::new();

    let results_path = out_dir.join("results.jsonl");
    write_results_jsonl(records, &results_path)?;
    written.push(results_path);

    let rows = summarize(records);
    let summary_path = out_dir.join("summary.csv");
    write_summary_csv(&rows, &summary_path)?;
    written.push(summary_path);

    let tasks: Vec<String> = {
        let set: BTreeSet<&str> = records.iter().map(|r| r.task.as_str()).collect();
        set.into_iter().map(str::to_string).collect()
    };
    let mut methods: Vec<String> = {
        let set: BTreeSet<&str> = records.iter().map(|r| r.method.as_str()).collect();
        set.into_iter().map(str::to_string).collect()
    };
    methods.sort_by(|a, b| method_rank(a).cmp(&method_rank(b)).then(a.cmp(b)));
    let styles: Vec<String> = {
        let set: BTreeSet<String> = records.iter().map(|r| style_label(&r.style)).collect();
        set.into_iter().collect()
    };

    // Zero-shot headline metric per task and method.
    if styles.iter().any(|s| s == "zero-shot") {
        let series: Vec<BarSeries> = methods
            .iter()
            .map(|m| BarSeries {
                name: m.clone(),
                values: tasks
                    .iter()
                    .map(|t| chart_value(&rows, t, m, "zero-shot"))
                    .collect(),
            })
            .collect();
        let svg = bar_chart_svg(
            "Zero-shot task metric by method",
            &tasks,
            &series,
            "accuracy / shift rate",
        );
        let path = out_dir.join("accuracy.svg");
        fs::write(&path, svg)?;
        written.push(path);

        let series: Vec<BarSeries> = methods
            .iter()
            .map(|m| BarSeries {
                name: m.clone(),
                values: tasks
                    .iter()
                    .map(|t| metric_mean(&rows, t, m, "zero-shot", "ge"))
                    .collect(),
            })
            .collect();
        let svg = bar_chart_svg(
            "Generation entropy by method (zero-shot)",
            &tasks,
            &series,
            "generation entropy",
        );
        let path = out_dir.join("fluency.svg");
        fs::write(&path, svg)?;
        written.push(path);
    }

    // Style robustness: the headline metric per style, averaged over tasks.
    if styles.len() > 1 {
        let series: Vec<BarSeries> = methods
            .iter()
            .map(|m| BarSeries {
                name: m.clone(),
                values: styles
                    .iter()
                    .map(|style| {
                        let values: Vec<f64> = tasks
                            .iter()
                            .filter_map(|t| chart_value(&rows, t, m, style))
                            .collect();
                        mean_std(&values).map(|(mean, _)| mean)
                    })
                    .collect(),
            })
            .collect();
        let svg = bar_chart_svg(
            "Task metric by prompt style (mean over tasks)",
            &styles,
            &series,
            "accuracy / shift rate",
        );
        let path = out_dir.join("styles.svg");
        fs::write(&path, svg)?;
        written.push(path);
    }

    Ok(written)
}
