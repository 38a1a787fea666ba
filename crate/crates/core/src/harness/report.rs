//! Aggregation of run records into accuracy/loss tables and trend data.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use super::{MethodKind, RunRecord};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregateRow {
    pub dataset: String,
    pub method: MethodKind,
    pub runs: usize,
    pub accuracy_mean: Option<f64>,
    pub accuracy_std: Option<f64>,
    pub final_loss_mean: f64,
    pub final_loss_std: f64,
    pub final_clipped_loss_mean: f64,
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

fn grouped(records: &[RunRecord]) -> BTreeMap<(String, MethodKind), Vec<&RunRecord>> {
    let mut groups: BTreeMap<(String, MethodKind), Vec<&RunRecord>> = BTreeMap::new();
    for r in records {
        groups.entry((r.dataset.clone(), r.method)).or_default().push(r);
    }
    groups
}

/// One row per (dataset, method), sorted by dataset then method.
pub fn aggregate(records: &[RunRecord]) -> Vec<AggregateRow> {
    grouped(records)
        .into_iter()
        .map(|((dataset, method), runs)| {
            let accs: Option<Vec<f64>> = runs.iter().map(|r| r.summary.accuracy).collect();
            let acc = accs.map(|a| mean_std(&a));
            let finals: Vec<f64> = runs.iter().map(|r| r.final_avg_loss()).collect();
            let clipped: Vec<f64> = runs.iter().map(|r| r.final_avg_loss_clipped()).collect();
            let (final_loss_mean, final_loss_std) = mean_std(&finals);
            AggregateRow {
                dataset,
                method,
                runs: runs.len(),
                accuracy_mean: acc.map(|a| a.0),
                accuracy_std: acc.map(|a| a.1),
                final_loss_mean,
                final_loss_std,
                final_clipped_loss_mean: mean_std(&clipped).0,
            }
        })
        .collect()
}

/// Plain-text table: one line per dataset, accuracy `mean±std` per method,
/// followed by the same layout for the final average cumulative loss (raw,
/// then clipped).
pub fn format_table(rows: &[AggregateRow]) -> String {
    let mut by_dataset: BTreeMap<&str, BTreeMap<MethodKind, &AggregateRow>> = BTreeMap::new();
    for r in rows {
        by_dataset.entry(&r.dataset).or_default().insert(r.method, r);
    }
    let methods: Vec<MethodKind> = MethodKind::ALL
        .into_iter()
        .filter(|m| rows.iter().any(|r| r.method == *m))
        .collect();

    let mut out = String::new();
    let mut section = |title: &str, cell: &dyn Fn(&AggregateRow) -> String| {
        writeln!(out, "# {title}").unwrap();
        write!(out, "{:<14}", "dataset").unwrap();
        for m in &methods {
            write!(out, " {:>15}", m.display_name()).unwrap();
        }
        writeln!(out).unwrap();
        for (dataset, cols) in &by_dataset {
            write!(out, "{dataset:<14}").unwrap();
            for m in &methods {
                let text = cols.get(m).map_or_else(|| "-".to_string(), |r| cell(r));
                write!(out, " {text:>15}").unwrap();
            }
            writeln!(out).unwrap();
        }
        writeln!(out).unwrap();
    };
    section("accuracy (mean±std over runs)", &|r| match (r.accuracy_mean, r.accuracy_std) {
        (Some(m), Some(s)) => format!("{m:.3}±{s:.3}"),
        _ => "n/a".to_string(),
    });
    section("final average cumulative loss", &|r| {
        format!("{:.4}±{:.4}", r.final_loss_mean, r.final_loss_std)
    });
    section("final average cumulative loss, clipped to [0, 1]", &|r| {
        format!("{:.4}", r.final_clipped_loss_mean)
    });
    out
}

/// CSV with the seed-averaged running mean loss per new-only round:
/// `dataset,method,t,avg_loss,avg_loss_clipped`.
pub fn trend_csv(records: &[RunRecord]) -> String {
    let mut out = String::from("dataset,method,t,avg_loss,avg_loss_clipped\n");
    for ((dataset, method), runs) in grouped(records) {
        let len = runs.iter().map(|r| r.avg_cum_loss.len()).min().unwrap_or(0);
        let n = runs.len() as f64;
        for t in 0..len {
            let raw = runs.iter().map(|r| r.avg_cum_loss[t]).sum::<f64>() / n;
            let clipped = runs.iter().map(|r| r.avg_cum_loss_clipped[t]).sum::<f64>() / n;
            writeln!(out, "{dataset},{},{},{raw},{clipped}", method.as_str(), t + 1).unwrap();
        }
    }
    out
}
