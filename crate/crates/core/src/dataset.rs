use crate::error::{Error, Result};
use crate::geometry::{FeatureVector, PointSet};

/// Binary class label, `0` or `1`.
pub type Label = u8;

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSample {
    pub x: FeatureVector,
    pub y: Label,
}

impl LabeledSample {
    pub fn new(x: FeatureVector, y: Label) -> Result<Self> {
        if y > 1 {
            return Err(Error::NonBinaryLabel(f64::from(y)));
        }
        Ok(Self { x, y })
    }
}

/// An immutable set of labeled samples drawn from one source.
///
/// Points are kept row-major in one buffer; `tag` names the source
/// (`"P"`, `"Q"`, `"P_2"`, ...).
#[derive(Debug, Clone, PartialEq)]
pub struct SourceDataset {
    tag: String,
    dim: usize,
    points: Vec<f64>,
    labels: Vec<Label>,
}

impl SourceDataset {
    /// An empty dataset of dimension `dim`.
    pub fn empty(tag: impl Into<String>, dim: usize) -> Self {
        Self {
            tag: tag.into(),
            dim,
            points: Vec::new(),
            labels: Vec::new(),
        }
    }

    pub fn from_samples(tag: impl Into<String>, samples: Vec<LabeledSample>) -> Result<Self> {
        let dim = samples.first().map_or(0, |s| s.x.dim());
        let mut out = Self::empty(tag, dim);
        for s in samples {
            out.push(s.x.coords(), s.y)?;
        }
        Ok(out)
    }

    /// Builds a dataset from raw rows, validating every coordinate and label.
    pub fn from_rows(tag: impl Into<String>, rows: &[Vec<f64>], labels: &[Label]) -> Result<Self> {
        if rows.len() != labels.len() {
            return Err(Error::InvalidParameter(format!(
                "{} rows but {} labels",
                rows.len(),
                labels.len()
            )));
        }
        let dim = rows.first().map_or(0, Vec::len);
        let mut out = Self::empty(tag, dim);
        for (row, &y) in rows.iter().zip(labels) {
            out.push(row, y)?;
        }
        Ok(out)
    }

    pub(crate) fn push(&mut self, x: &[f64], y: Label) -> Result<()> {
        if self.labels.is_empty() && self.dim == 0 {
            self.dim = x.len();
        }
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: x.len(),
            });
        }
        if x.is_empty() {
            return Err(Error::EmptyVector);
        }
        for (index, &value) in x.iter().enumerate() {
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::CoordinateOutOfRange { index, value });
            }
        }
        if y > 1 {
            return Err(Error::NonBinaryLabel(f64::from(y)));
        }
        self.points.extend_from_slice(x);
        self.labels.push(y);
        Ok(())
    }

    pub fn tag(&self) -> &str {
        &self.tag
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn label(&self, index: usize) -> Label {
        self.labels[index]
    }

    pub fn sample(&self, index: usize) -> LabeledSample {
        LabeledSample {
            x: FeatureVector::new(self.point(index).to_vec()).expect("validated on insert"),
            y: self.labels[index],
        }
    }

    pub fn rows(&self) -> impl Iterator<Item = (&[f64], Label)> + '_ {
        self.points
            .chunks_exact(self.dim.max(1))
            .zip(self.labels.iter().copied())
    }

    /// The rows at `indices`, in that order, under a new tag.
    pub fn subset(&self, tag: impl Into<String>, indices: &[usize]) -> Self {
        let mut out = Self::empty(tag, self.dim);
        for &i in indices {
            out.points.extend_from_slice(self.point(i));
            out.labels.push(self.labels[i]);
        }
        out
    }

    pub(crate) fn check_query(&self, query: &[f64]) -> Result<()> {
        if !self.is_empty() && query.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: query.len(),
            });
        }
        Ok(())
    }
}

impl PointSet for SourceDataset {
    fn dim(&self) -> usize {
        self.dim
    }

    fn len(&self) -> usize {
        self.labels.len()
    }

    fn point(&self, index: usize) -> &[f64] {
        &self.points[index * self.dim..(index + 1) * self.dim]
    }
}
