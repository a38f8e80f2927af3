//! CSV ingestion, min-max scaling, binary splitting and the repeated
//! random-split protocol for real data.
//!
//! Files are comma-separated with a header row and `.` decimals. Dataset
//! files use the columns `f0, ..., f{d-1}, y`.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::bench::{Classifier, TrainingSet};
use crate::dataset::{Label, SourceDataset};
use crate::error::{Error, Result};
use crate::exec::{map_indexed, Execution};
use crate::geometry::PointSet;
use crate::seed::derive;

/// Rectangular numeric table with a binary label and an optional split column.
#[derive(Debug, Clone, PartialEq)]
pub struct TabularDataset {
    pub feature_names: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub labels: Vec<Label>,
    pub split: Option<(String, Vec<f64>)>,
    /// Rows dropped at load time for missing or non-numeric entries.
    pub dropped: usize,
}

impl TabularDataset {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

fn column_index(headers: &csv::StringRecord, name: &str) -> Result<usize> {
    headers
        .iter()
        .position(|h| h.trim() == name)
        .ok_or_else(|| Error::MissingColumn(name.to_string()))
}

fn parse_cell(cell: &str) -> Option<f64> {
    cell.trim().parse::<f64>().ok().filter(|v| v.is_finite())
}

fn binary(value: f64, row: usize, what: &str) -> Result<Label> {
    if value == 0.0 {
        Ok(0)
    } else if value == 1.0 {
        Ok(1)
    } else {
        Err(Error::InvalidRow {
            row,
            message: format!("{what} value {value} is not 0 or 1"),
        })
    }
}

pub fn load_csv(
    path: impl AsRef<Path>,
    label_column: &str,
    feature_columns: &[&str],
    split_column: Option<&str>,
) -> Result<TabularDataset> {
    let file = File::open(path.as_ref())?;
    read_csv(file, label_column, feature_columns, split_column)
}

pub fn read_csv<R: Read>(
    input: R,
    label_column: &str,
    feature_columns: &[&str],
    split_column: Option<&str>,
) -> Result<TabularDataset> {
    let mut reader = csv::ReaderBuilder::new().flexible(true).from_reader(input);
    let headers = reader.headers()?.clone();
    let label_idx = column_index(&headers, label_column)?;
    let feature_idx = feature_columns
        .iter()
        .map(|c| column_index(&headers, c))
        .collect::<Result<Vec<_>>>()?;
    let split_idx = split_column.map(|c| column_index(&headers, c)).transpose()?;

    let mut out = TabularDataset {
        feature_names: feature_columns.iter().map(|s| s.to_string()).collect(),
        rows: Vec::new(),
        labels: Vec::new(),
        split: split_column.map(|c| (c.to_string(), Vec::new())),
        dropped: 0,
    };
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        // header is line 1
        let line = i + 2;
        let cell = |j: usize| record.get(j).and_then(parse_cell);
        let features: Option<Vec<f64>> = feature_idx.iter().map(|&j| cell(j)).collect();
        let (Some(features), Some(label)) = (features, cell(label_idx)) else {
            out.dropped += 1;
            continue;
        };
        let split = match split_idx {
            Some(j) => match cell(j) {
                Some(v) => Some(v),
                None => {
                    out.dropped += 1;
                    continue;
                }
            },
            None => None,
        };
        out.labels.push(binary(label, line, "label")?);
        out.rows.push(features);
        if let (Some((_, values)), Some(v)) = (out.split.as_mut(), split) {
            values.push(v);
        }
    }
    if out.rows.is_empty() {
        return Err(Error::EmptyDataset(format!(
            "no complete rows ({} dropped)",
            out.dropped
        )));
    }
    Ok(out)
}

/// Rescales each feature to `[0, 1]`; constant columns become 0.
pub fn normalize_minmax(dataset: &TabularDataset) -> TabularDataset {
    let d = dataset.feature_names.len();
    let mut lo = vec![f64::INFINITY; d];
    let mut hi = vec![f64::NEG_INFINITY; d];
    for row in &dataset.rows {
        for (j, &v) in row.iter().enumerate() {
            lo[j] = lo[j].min(v);
            hi[j] = hi[j].max(v);
        }
    }
    let rows = dataset
        .rows
        .iter()
        .map(|row| {
            row.iter()
                .enumerate()
                .map(|(j, &v)| {
                    let span = hi[j] - lo[j];
                    if span > 0.0 {
                        ((v - lo[j]) / span).clamp(0.0, 1.0)
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect();
    TabularDataset {
        rows,
        ..dataset.clone()
    }
}

/// Rows with split value 1 become P-data, value 0 Q-data; order is kept.
pub fn split_by_binary(dataset: &TabularDataset) -> Result<(SourceDataset, SourceDataset)> {
    let (name, values) = dataset
        .split
        .as_ref()
        .ok_or_else(|| Error::InvalidParameter("dataset has no split column".into()))?;
    let d = dataset.feature_names.len();
    let mut p = SourceDataset::empty("P", d);
    let mut q = SourceDataset::empty("Q", d);
    for (i, ((row, &y), &s)) in dataset.rows.iter().zip(&dataset.labels).zip(values).enumerate() {
        let target = match binary(s, i, name)? {
            1 => &mut p,
            _ => &mut q,
        };
        target.push(row, y)?;
    }
    Ok((p, q))
}

pub fn write_source_csv<W: Write>(out: W, data: &SourceDataset) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = (0..data.dim()).map(|j| format!("f{j}")).collect();
    header.push("y".into());
    w.write_record(&header)?;
    for (x, y) in data.rows() {
        let mut record: Vec<String> = x.iter().map(f64::to_string).collect();
        record.push(y.to_string());
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a dataset file: every column other than `y` is a feature.
pub fn read_source_csv(path: impl AsRef<Path>, tag: &str) -> Result<SourceDataset> {
    let (features, labels) = read_points_csv(path)?;
    let labels = labels.ok_or_else(|| Error::MissingColumn("y".into()))?;
    let dim = features.first().map_or(0, Vec::len);
    let mut out = SourceDataset::empty(tag, dim);
    for (i, (x, y)) in features.iter().zip(labels).enumerate() {
        out.push(x, y).map_err(|e| Error::InvalidRow {
            row: i + 2,
            message: e.to_string(),
        })?;
    }
    Ok(out)
}

/// Point rows plus labels, when the file has them.
pub type PointsWithLabels = (Vec<Vec<f64>>, Option<Vec<Label>>);

/// Reads query points, and labels when a `y` column is present.
pub fn read_points_csv(path: impl AsRef<Path>) -> Result<PointsWithLabels> {
    let mut reader = csv::Reader::from_reader(File::open(path.as_ref())?);
    let headers = reader.headers()?.clone();
    let y_idx = headers.iter().position(|h| h.trim() == "y");
    let mut points = Vec::new();
    let mut labels = y_idx.map(|_| Vec::new());
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let line = i + 2;
        let mut x = Vec::with_capacity(record.len());
        for (j, cell) in record.iter().enumerate() {
            let v = parse_cell(cell).ok_or_else(|| Error::InvalidRow {
                row: line,
                message: format!("non-numeric entry `{cell}`"),
            })?;
            if Some(j) == y_idx {
                if let Some(ls) = labels.as_mut() {
                    ls.push(binary(v, line, "label")?);
                }
            } else {
                x.push(v);
            }
        }
        points.push(x);
    }
    Ok((points, labels))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RealDataSummary {
    pub n_q_train: usize,
    pub classifier: Classifier,
    /// Mean test accuracy over replications, as a fraction.
    pub accuracy: f64,
    /// Standard error of the mean over replications.
    pub stderr: f64,
}

/// Repeated random splits of the target sample: each replication trains on
/// all P-data plus `n_q_train` Q-rows drawn without replacement and tests on
/// the remaining Q-rows.
pub fn real_data_protocol(
    p: &SourceDataset,
    q: &SourceDataset,
    n_q_train: usize,
    replications: usize,
    seed: u64,
    classifiers: &[Classifier],
    exec: Execution,
) -> Result<Vec<RealDataSummary>> {
    if n_q_train >= q.len() {
        return Err(Error::InvalidParameter(format!(
            "n_q_train = {n_q_train} leaves no test rows out of {}",
            q.len()
        )));
    }
    if replications == 0 {
        return Err(Error::InvalidParameter("replications must be >= 1".into()));
    }
    let per_rep = map_indexed(replications, exec, |r| -> Result<Vec<f64>> {
        let mut idx: Vec<usize> = (0..q.len()).collect();
        idx.shuffle(&mut ChaCha8Rng::seed_from_u64(derive(seed, r as u64)));
        let train = q.subset("Q", &idx[..n_q_train]);
        let test = &idx[n_q_train..];
        let training = TrainingSet::new(p, &train)?;
        classifiers
            .iter()
            .map(|&c| {
                let mut hits = 0usize;
                for &i in test {
                    let (label, _) = training.predict(c, q.point(i))?;
                    hits += usize::from(label == q.label(i));
                }
                Ok(hits as f64 / test.len() as f64)
            })
            .collect()
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let reps = replications as f64;
    Ok(classifiers
        .iter()
        .enumerate()
        .map(|(j, &classifier)| {
            let mean = per_rep.iter().map(|a| a[j]).sum::<f64>() / reps;
            let var = if replications > 1 {
                per_rep.iter().map(|a| (a[j] - mean).powi(2)).sum::<f64>() / (reps - 1.0)
            } else {
                0.0
            };
            RealDataSummary {
                n_q_train,
                classifier,
                accuracy: mean,
                stderr: (var / reps).sqrt(),
            }
        })
        .collect())
}

pub fn write_real_data_csv<W: Write>(out: W, rows: &[RealDataSummary]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["n_q_train", "classifier", "accuracy", "stderr"])?;
    for r in rows {
        w.write_record([
            r.n_q_train.to_string(),
            r.classifier.to_string(),
            r.accuracy.to_string(),
            r.stderr.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
