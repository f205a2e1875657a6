//! Dense CSV and LIBSVM readers.
//!
//! CSV rows are `x_1,…,x_d,label`. LIBSVM rows are `label idx:value …` with
//! 1-based indices; missing entries are zero. Every parse error carries the
//! 1-based line number of the offending row.

use std::path::Path;

use stochkit::problems::Dataset;
use stochkit::{Matrix, Vector};

use crate::config::{FileFormat, LabelKind};
use crate::error::{HarnessError, Result};

struct Rows {
    features: Vec<Vec<f64>>,
    labels: Vec<f64>,
    lines: Vec<usize>,
}

pub fn load_dataset(path: &Path, format: FileFormat, labels: LabelKind, features: Option<usize>) -> Result<Dataset> {
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    parse_dataset(&text, path, format, labels, features)
}

/// Parses file contents; `path` is only used in error messages.
pub fn parse_dataset(
    text: &str,
    path: &Path,
    format: FileFormat,
    labels: LabelKind,
    features: Option<usize>,
) -> Result<Dataset> {
    let rows = match format {
        FileFormat::Csv => parse_csv(text, path)?,
        FileFormat::Libsvm => parse_libsvm(text, path, features)?,
    };
    if rows.labels.is_empty() {
        return Err(HarnessError::Parse {
            path: path.into(),
            line: 0,
            reason: "no samples".into(),
        });
    }
    let d = rows.features[0].len();
    let n = rows.labels.len();
    let x = Matrix::from_fn(n, d, |i, j| rows.features[i][j]);
    let (y, classes) = convert_labels(&rows, labels, path)?;
    let mut data = Dataset::from_samples(x, y)?;
    data.classes = classes;
    Ok(data)
}

fn parse_error(path: &Path, line: usize, reason: impl Into<String>) -> HarnessError {
    HarnessError::Parse {
        path: path.into(),
        line,
        reason: reason.into(),
    }
}

fn parse_csv(text: &str, path: &Path) -> Result<Rows> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut rows = Rows {
        features: Vec::new(),
        labels: Vec::new(),
        lines: Vec::new(),
    };
    let mut width = None;
    for (k, record) in reader.records().enumerate() {
        let record = record?;
        let line = record.position().map_or(k + 1, |p| p.line() as usize);
        if record.iter().all(str::is_empty) {
            continue;
        }
        let parsed: Vec<Option<f64>> = record.iter().map(|f| f.parse().ok()).collect();
        // a first row without a single number is a header
        if rows.labels.is_empty() && width.is_none() && parsed.iter().all(Option::is_none) {
            width = Some(record.len());
            continue;
        }
        let expected = *width.get_or_insert(record.len());
        if record.len() != expected {
            return Err(parse_error(
                path,
                line,
                format!("expected {expected} fields, found {}", record.len()),
            ));
        }
        if expected < 2 {
            return Err(parse_error(path, line, "need at least one feature and a label"));
        }
        let mut values = Vec::with_capacity(expected);
        for (col, (field, v)) in record.iter().zip(parsed).enumerate() {
            match v {
                Some(v) if v.is_finite() => values.push(v),
                _ => {
                    return Err(parse_error(
                        path,
                        line,
                        format!("field {} `{field}` is not a finite number", col + 1),
                    ))
                }
            }
        }
        let label = values.pop().expect("at least two fields");
        rows.features.push(values);
        rows.labels.push(label);
        rows.lines.push(line);
    }
    Ok(rows)
}

fn parse_libsvm(text: &str, path: &Path, features: Option<usize>) -> Result<Rows> {
    let mut sparse: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut rows = Rows {
        features: Vec::new(),
        labels: Vec::new(),
        lines: Vec::new(),
    };
    let mut max_index = 0;
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut tokens = content.split_whitespace();
        let label_tok = tokens.next().expect("non-empty line has a token");
        let label: f64 = label_tok
            .parse()
            .ok()
            .filter(|v: &f64| v.is_finite())
            .ok_or_else(|| parse_error(path, line, format!("label `{label_tok}` is not a number")))?;
        let mut entries = Vec::new();
        for tok in tokens {
            if tok.starts_with("qid:") {
                continue;
            }
            let (idx, val) = tok
                .split_once(':')
                .ok_or_else(|| parse_error(path, line, format!("entry `{tok}` is not index:value")))?;
            let idx: usize = idx
                .parse()
                .ok()
                .filter(|&i| i >= 1)
                .ok_or_else(|| parse_error(path, line, format!("index `{idx}` is not a positive integer")))?;
            let val: f64 = val
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite())
                .ok_or_else(|| parse_error(path, line, format!("value `{val}` is not a finite number")))?;
            if let Some(d) = features {
                if idx > d {
                    return Err(parse_error(
                        path,
                        line,
                        format!("index {idx} exceeds the {d} declared features"),
                    ));
                }
            }
            max_index = max_index.max(idx);
            entries.push((idx - 1, val));
        }
        sparse.push(entries);
        rows.labels.push(label);
        rows.lines.push(line);
    }
    let d = features.unwrap_or(max_index).max(1);
    rows.features = sparse
        .into_iter()
        .map(|entries| {
            let mut row = vec![0.0; d];
            for (j, v) in entries {
                row[j] = v;
            }
            row
        })
        .collect();
    Ok(rows)
}

fn convert_labels(rows: &Rows, kind: LabelKind, path: &Path) -> Result<(Vector, Option<usize>)> {
    let y = &rows.labels;
    let first_bad = |ok: &dyn Fn(f64) -> bool, what: &str| -> Result<()> {
        match y.iter().position(|&v| !ok(v)) {
            Some(i) => Err(parse_error(
                path,
                rows.lines[i],
                format!("label {} is not {what}", y[i]),
            )),
            None => Ok(()),
        }
    };
    match kind {
        LabelKind::Real => Ok((Vector::from_column_slice(y), None)),
        LabelKind::Binary => {
            if y.iter().all(|&v| v == 0.0 || v == 1.0) {
                return Ok((Vector::from_iterator(y.len(), y.iter().map(|&v| 2.0 * v - 1.0)), None));
            }
            first_bad(&|v| v == 1.0 || v == -1.0, "±1 (or 0/1)")?;
            Ok((Vector::from_column_slice(y), None))
        }
        LabelKind::Class => {
            first_bad(&|v| v >= 0.0 && v.fract() == 0.0, "a non-negative class index")?;
            let shift = if y.iter().all(|&v| v >= 1.0) { 1.0 } else { 0.0 };
            let labels = Vector::from_iterator(y.len(), y.iter().map(|&v| v - shift));
            let classes = labels.max() as usize + 1;
            Ok((labels, Some(classes.max(2))))
        }
    }
}
