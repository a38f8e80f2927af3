//! Monte Carlo harness comparing the adaptive classifier with its
//! competitors on simulated data.
//!
//! Each trial draws fresh P-data, Q-data and query covariates from seeds
//! derived from `(master_seed, trial_index)`, so results do not depend on
//! how trials are scheduled. Accuracy is agreement with the Bayes label of
//! the target distribution.

use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::adaptive::{adaptive_two_source, scan_threshold, two_source_r};
use crate::dataset::{Label, SourceDataset};
use crate::error::{Error, Result};
use crate::estimators::plug_in_classify;
use crate::exec::{map_indexed, Execution};
use crate::geometry::{NeighborOrder, PointSet};
use crate::seed::derive;
use crate::synth::{bayes_label, sample_covariates, sample_dataset, DgpConfig, Role};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Classifier {
    /// Two-source adaptive scan over `max(n_P, n_Q)` attempts.
    Adaptive,
    /// Pooled-ordering scan over `n_P + n_Q` attempts.
    KnnCwLike,
    /// Plug-in kNN on Q-data only.
    KnnQ,
    /// Plug-in kNN on the pooled data.
    KnnAll,
    /// The Bayes rule itself; a harness self-check.
    Bayes,
}

impl Classifier {
    pub const COMPETITORS: [Classifier; 4] = [
        Classifier::Adaptive,
        Classifier::KnnCwLike,
        Classifier::KnnQ,
        Classifier::KnnAll,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Classifier::Adaptive => "ADAPTIVE",
            Classifier::KnnCwLike => "KNN_CW_LIKE",
            Classifier::KnnQ => "KNN_Q",
            Classifier::KnnAll => "KNN_ALL",
            Classifier::Bayes => "BAYES",
        }
    }
}

impl fmt::Display for Classifier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Classifier {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_uppercase().replace('-', "_");
        match norm.as_str() {
            "ADAPTIVE" => Ok(Classifier::Adaptive),
            "KNN_CW_LIKE" | "CW_LIKE" | "KNNCW" => Ok(Classifier::KnnCwLike),
            "KNN_Q" | "KNNQ" => Ok(Classifier::KnnQ),
            "KNN_ALL" | "KNNALL" => Ok(Classifier::KnnAll),
            "BAYES" => Ok(Classifier::Bayes),
            _ => Err(Error::InvalidParameter(format!("unknown classifier `{s}`"))),
        }
    }
}

/// `round(n^(2 / (2 + d)))` clamped to `[1, n]`.
pub fn baseline_k(n: usize, d: usize) -> usize {
    let k = (n as f64).powf(2.0 / (2.0 + d as f64)).round() as usize;
    k.clamp(1, n.max(1))
}

fn plug_in_knn(data: &SourceDataset, query: &[f64]) -> Result<Label> {
    let k = baseline_k(data.len(), query.len());
    let mut order = NeighborOrder::new(data, query)?;
    let positives = order
        .prefix(k)
        .iter()
        .filter(|nb| data.label(nb.index) == 1)
        .count();
    Ok(plug_in_classify(positives as f64 / k as f64))
}

pub fn knn_q_baseline(q: &SourceDataset, query: &[f64]) -> Result<Label> {
    if q.is_empty() {
        return Err(Error::EmptyDataset("Q-data is empty".into()));
    }
    plug_in_knn(q, query)
}

pub fn knn_all_baseline(p: &SourceDataset, q: &SourceDataset, query: &[f64]) -> Result<Label> {
    PooledSources::new(p, q)?.knn(query)
}

pub fn knn_cw_like(p: &SourceDataset, q: &SourceDataset, query: &[f64]) -> Result<(Label, usize)> {
    PooledSources::new(p, q)?.cw_like(query)
}

/// P-data followed by Q-data in one point set.
#[derive(Debug, Clone)]
pub struct PooledSources {
    data: SourceDataset,
    n_p: usize,
}

impl PooledSources {
    pub fn new(p: &SourceDataset, q: &SourceDataset) -> Result<Self> {
        if p.is_empty() && q.is_empty() {
            return Err(Error::EmptyDataset("both samples are empty".into()));
        }
        let dim = if p.is_empty() { q.dim() } else { p.dim() };
        let mut data = SourceDataset::empty("P+Q", dim);
        for (x, y) in p.rows().chain(q.rows()) {
            data.push(x, y)?;
        }
        Ok(Self { data, n_p: p.len() })
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Plug-in kNN on the pooled sample.
    pub fn knn(&self, query: &[f64]) -> Result<Label> {
        plug_in_knn(&self.data, query)
    }

    /// Stand-in for the exhaustive comparison method: walks the pooled
    /// neighbor ordering one point at a time (one attempt per prefix
    /// length), splits each prefix into its P and Q counts and applies the
    /// two-source statistic and threshold. Returns the label and the number
    /// of attempts.
    pub fn cw_like(&self, query: &[f64]) -> Result<(Label, usize)> {
        let out = self.cw_like_detail(query)?;
        Ok((out.label, out.attempts))
    }

    pub fn cw_like_detail(&self, query: &[f64]) -> Result<CwLikeOutcome> {
        let n = self.data.len();
        let threshold = scan_threshold(query.len(), n);
        let mut order = NeighborOrder::new(&self.data, query)?;
        let (mut k_p, mut k_q, mut pos_p, mut pos_q) = (0usize, 0usize, 0usize, 0usize);
        for k in 1..=n {
            let nb = order.get(k - 1);
            let y = usize::from(self.data.label(nb.index));
            if nb.index < self.n_p {
                k_p += 1;
                pos_p += y;
            } else {
                k_q += 1;
                pos_q += y;
            }
            let r = two_source_r(k_p, pos_p, k_q, pos_q);
            if r > threshold || k == n {
                return Ok(CwLikeOutcome {
                    label: Label::from(2 * (pos_p + pos_q) >= k_p + k_q),
                    attempts: k,
                    k_p,
                    k_q,
                    r,
                    threshold,
                });
            }
        }
        unreachable!("scan always stops at k = n")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CwLikeOutcome {
    pub label: Label,
    pub attempts: usize,
    pub k_p: usize,
    pub k_q: usize,
    pub r: f64,
    pub threshold: f64,
}

/// Training data for one trial, with the pooled set built once.
pub struct TrainingSet<'a> {
    pub p: &'a SourceDataset,
    pub q: &'a SourceDataset,
    pooled: Option<PooledSources>,
}

impl<'a> TrainingSet<'a> {
    pub fn new(p: &'a SourceDataset, q: &'a SourceDataset) -> Result<Self> {
        let pooled = if p.is_empty() && q.is_empty() {
            None
        } else {
            Some(PooledSources::new(p, q)?)
        };
        Ok(Self { p, q, pooled })
    }

    fn pooled(&self) -> Result<&PooledSources> {
        self.pooled
            .as_ref()
            .ok_or_else(|| Error::EmptyDataset("both samples are empty".into()))
    }

    /// Label and attempts for one query. Fixed-k baselines count one attempt.
    pub fn predict(&self, classifier: Classifier, query: &[f64]) -> Result<(Label, usize)> {
        match classifier {
            Classifier::Adaptive => {
                let (label, sel) = adaptive_two_source(self.p, self.q, query)?;
                Ok((label, sel.iterations))
            }
            Classifier::KnnCwLike => self.pooled()?.cw_like(query),
            Classifier::KnnQ => Ok((knn_q_baseline(self.q, query)?, 1)),
            Classifier::KnnAll => Ok((self.pooled()?.knn(query)?, 1)),
            Classifier::Bayes => Err(Error::InvalidParameter(
                "the Bayes rule needs a known data-generating process".into(),
            )),
        }
    }
}

fn default_test_points() -> usize {
    200
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub dgp: DgpConfig,
    pub n_p: usize,
    pub n_q: usize,
    pub trials: usize,
    #[serde(default = "default_test_points")]
    pub test_points: usize,
    pub classifiers: Vec<Classifier>,
    pub master_seed: u64,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.dgp.validate()?;
        if self.trials == 0 || self.test_points == 0 {
            return Err(Error::InvalidParameter("trials and test_points must be >= 1".into()));
        }
        if self.classifiers.is_empty() {
            return Err(Error::InvalidParameter("no classifiers selected".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Tally {
    pub agreements: usize,
    pub attempts: usize,
    pub elapsed: Duration,
}

/// Per-classifier tallies of one trial, in `config.classifiers` order.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub tallies: Vec<Tally>,
}

pub fn run_trial(config: &ExperimentConfig, trial_index: usize) -> Result<TrialOutcome> {
    let seed = derive(config.master_seed, trial_index as u64);
    let dgp = &config.dgp;
    let p = sample_dataset(dgp, Role::P, config.n_p, derive(seed, 0))?;
    let q = sample_dataset(dgp, Role::Q, config.n_q, derive(seed, 1))?;
    let queries = sample_covariates(dgp.d, config.test_points, derive(seed, 2));
    let truth: Vec<Label> = queries.iter().map(|x| bayes_label(dgp, x)).collect();
    let training = TrainingSet::new(&p, &q)?;

    let tallies = config
        .classifiers
        .iter()
        .map(|&classifier| {
            let mut tally = Tally::default();
            let start = Instant::now();
            for (x, &y) in queries.iter().zip(&truth) {
                let (label, attempts) = match classifier {
                    Classifier::Bayes => (bayes_label(dgp, x), 0),
                    other => training.predict(other, x)?,
                };
                tally.agreements += usize::from(label == y);
                tally.attempts += attempts;
            }
            tally.elapsed = start.elapsed();
            Ok(tally)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TrialOutcome { tallies })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierSummary {
    pub classifier: Classifier,
    pub accuracy: f64,
    pub stderr: f64,
    pub mean_attempts: f64,
    pub wall_time_seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub summaries: Vec<ClassifierSummary>,
}

impl ExperimentResult {
    pub fn get(&self, classifier: Classifier) -> Option<&ClassifierSummary> {
        self.summaries.iter().find(|s| s.classifier == classifier)
    }

    /// Same result with every wall time zeroed, for exact comparisons.
    pub fn without_timing(&self) -> Self {
        let mut out = self.clone();
        for s in &mut out.summaries {
            s.wall_time_seconds = 0.0;
        }
        out
    }
}

/// Binomial standard error of a proportion.
pub fn binomial_stderr(p: f64, n: usize) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

pub fn aggregate(config: &ExperimentConfig, outcomes: &[TrialOutcome]) -> ExperimentResult {
    let queries = outcomes.len() * config.test_points;
    let summaries = config
        .classifiers
        .iter()
        .enumerate()
        .map(|(j, &classifier)| {
            let mut total = Tally::default();
            for o in outcomes {
                let t = o.tallies[j];
                total.agreements += t.agreements;
                total.attempts += t.attempts;
                total.elapsed += t.elapsed;
            }
            let accuracy = total.agreements as f64 / queries as f64;
            ClassifierSummary {
                classifier,
                accuracy,
                stderr: binomial_stderr(accuracy, queries),
                mean_attempts: total.attempts as f64 / queries as f64,
                wall_time_seconds: total.elapsed.as_secs_f64(),
            }
        })
        .collect();
    ExperimentResult {
        config: config.clone(),
        summaries,
    }
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult> {
    run_experiment_with(config, Execution::default())
}

pub fn run_experiment_with(config: &ExperimentConfig, exec: Execution) -> Result<ExperimentResult> {
    config.validate()?;
    let outcomes = map_indexed(config.trials, exec, |i| run_trial(config, i))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(aggregate(config, &outcomes))
}

pub const RESULT_HEADER: [&str; 14] = [
    "dgp",
    "kappa",
    "gamma",
    "d",
    "n_p",
    "n_q",
    "trials",
    "test_points",
    "seed",
    "classifier",
    "accuracy",
    "stderr",
    "mean_attempts",
    "wall_time_seconds",
];

/// One row per `(config point, classifier)`.
pub fn write_results_csv<W: Write>(out: W, results: &[ExperimentResult]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RESULT_HEADER)?;
    for r in results {
        let c = &r.config;
        for s in &r.summaries {
            w.write_record([
                c.dgp.dgp.to_string(),
                c.dgp.kappa.to_string(),
                c.dgp.gamma.to_string(),
                c.dgp.d.to_string(),
                c.n_p.to_string(),
                c.n_q.to_string(),
                c.trials.to_string(),
                c.test_points.to_string(),
                c.master_seed.to_string(),
                s.classifier.to_string(),
                s.accuracy.to_string(),
                s.stderr.to_string(),
                s.mean_attempts.to_string(),
                s.wall_time_seconds.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}
