//! CSV and sparse (`label idx:val ...`) dataset readers.
//!
//! CSV rows are comma separated with the label in the last column. Sparse rows
//! use 1-based feature indices; the dimension comes from `LoadOptions::dim`, a
//! `# dim <d>` header line, or the largest index seen, in that order.
//! Lines starting with `#` and blank lines are ignored.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use nalgebra::DMatrix;

use super::BatchData;
use crate::error::{FeslError, Result};
use crate::types::Task;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BatchFormat {
    Csv,
    SparseSvm,
}

impl FromStr for BatchFormat {
    type Err = FeslError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(BatchFormat::Csv),
            "svm" | "libsvm" | "sparse" => Ok(BatchFormat::SparseSvm),
            other => Err(FeslError::invalid(format!("unknown format '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct LoadOptions {
    /// Forces the task; inferred from the label set when absent.
    pub task: Option<Task>,
    /// Declared dimension for sparse input.
    pub dim: Option<usize>,
}

pub fn load_batch(path: &Path, format: BatchFormat, opts: &LoadOptions) -> Result<BatchData> {
    let text = fs::read_to_string(path).map_err(|e| FeslError::io(path, e))?;
    parse_batch(&text, format, opts)
}

pub fn parse_batch(text: &str, format: BatchFormat, opts: &LoadOptions) -> Result<BatchData> {
    // typographic minus signs show up in hand-edited files
    let text = text.replace('\u{2212}', "-");
    let (rows, labels, dim) = match format {
        BatchFormat::Csv => parse_csv(&text)?,
        BatchFormat::SparseSvm => parse_sparse(&text, opts.dim)?,
    };
    let (labels, task) = normalize_labels(labels, opts.task)?;
    let n = rows.len();
    let features = DMatrix::from_row_iterator(n, dim, rows.into_iter().flatten());
    Ok(BatchData {
        features,
        labels,
        task,
    })
}

fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_number(line: usize, s: &str) -> Result<f64> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| FeslError::format(line, format!("'{s}' is not a number")))?;
    if !v.is_finite() {
        return Err(FeslError::format(line, format!("'{s}' is not finite")));
    }
    Ok(v)
}

type Parsed = (Vec<Vec<f64>>, Vec<(usize, f64)>, usize);

fn parse_csv(text: &str) -> Result<Parsed> {
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    let mut width = None;
    for (line, content) in data_lines(text) {
        let cells = content
            .split(',')
            .map(|c| parse_number(line, c))
            .collect::<Result<Vec<f64>>>()?;
        if cells.len() < 2 {
            return Err(FeslError::format(line, "need at least one feature and a label"));
        }
        match width {
            None => width = Some(cells.len()),
            Some(w) if w != cells.len() => {
                return Err(FeslError::format(
                    line,
                    format!("ragged row: expected {w} columns, found {}", cells.len()),
                ))
            }
            _ => {}
        }
        let (label, feats) = cells.split_last().unwrap();
        labels.push((line, *label));
        rows.push(feats.to_vec());
    }
    let width = width.ok_or_else(|| FeslError::format(1, "no data rows"))?;
    Ok((rows, labels, width - 1))
}

fn parse_sparse(text: &str, declared: Option<usize>) -> Result<Parsed> {
    let mut header_dim = None;
    for (i, l) in text.lines().enumerate() {
        let l = l.trim();
        if let Some(rest) = l.strip_prefix("# dim") {
            header_dim = Some(rest.trim().parse::<usize>().map_err(|_| {
                FeslError::format(i + 1, format!("bad dimension header '{l}'"))
            })?);
        }
    }
    let declared = declared.or(header_dim);

    let mut entries = Vec::new();
    let mut labels = Vec::new();
    let mut max_index = 0;
    for (line, content) in data_lines(text) {
        let mut tokens = content.split_whitespace();
        let label = parse_number(line, tokens.next().unwrap())?;
        let mut row = Vec::new();
        for tok in tokens {
            let (idx, val) = tok
                .split_once(':')
                .ok_or_else(|| FeslError::format(line, format!("expected idx:val, got '{tok}'")))?;
            let idx: usize = idx
                .parse()
                .map_err(|_| FeslError::format(line, format!("bad index '{idx}'")))?;
            if idx == 0 {
                return Err(FeslError::format(line, "feature indices are 1-based"));
            }
            if let Some(d) = declared {
                if idx > d {
                    return Err(FeslError::format(
                        line,
                        format!("index {idx} exceeds declared dimension {d}"),
                    ));
                }
            }
            max_index = max_index.max(idx);
            row.push((idx - 1, parse_number(line, val)?));
        }
        labels.push((line, label));
        entries.push(row);
    }
    if entries.is_empty() {
        return Err(FeslError::format(1, "no data rows"));
    }
    let dim = declared.unwrap_or(max_index);
    if dim == 0 {
        return Err(FeslError::format(1, "no features and no declared dimension"));
    }
    let rows = entries
        .into_iter()
        .map(|sparse| {
            let mut dense = vec![0.0; dim];
            for (i, v) in sparse {
                dense[i] = v;
            }
            dense
        })
        .collect();
    Ok((rows, labels, dim))
}

/// Maps two-class label sets {0,1}, {1,2} and {-1,1} onto {-1,+1}.
fn normalize_labels(labels: Vec<(usize, f64)>, task: Option<Task>) -> Result<(Vec<f64>, Task)> {
    let distinct: BTreeSet<u64> = labels.iter().map(|(_, v)| v.to_bits()).collect();
    let task = task.unwrap_or(if distinct.len() <= 2 {
        Task::Classification
    } else {
        Task::Regression
    });
    if task == Task::Regression {
        return Ok((labels.into_iter().map(|(_, v)| v).collect(), task));
    }
    let mut values: Vec<f64> = distinct.iter().map(|b| f64::from_bits(*b)).collect();
    values.sort_by(f64::total_cmp);
    let negative = match values.as_slice() {
        [a, b] if [(0.0, 1.0), (1.0, 2.0), (-1.0, 1.0)].contains(&(*a, *b)) => Some(*a),
        // a one-class file: 0 and -1 are negative, 1 and 2 positive
        [a] if *a == -1.0 || *a == 0.0 => Some(*a),
        [a] if *a == 1.0 || *a == 2.0 => None,
        _ => {
            let line = labels.first().map(|(l, _)| *l).unwrap_or(1);
            return Err(FeslError::format(
                line,
                format!("cannot map labels {values:?} onto -1/+1"),
            ));
        }
    };
    let mapped = labels
        .into_iter()
        .map(|(_, v)| if Some(v) == negative { -1.0 } else { 1.0 })
        .collect();
    Ok((mapped, task))
}
