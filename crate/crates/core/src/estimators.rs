//! Fixed-parameter kNN estimates and the weighted multi-source classifier.

use crate::dataset::{Label, SourceDataset};
use crate::error::{Error, Result};
use crate::geometry::{NeighborOrder, PointSet};
use crate::theory::{Branch, RateParams};

/// kNN estimate of `P(Y = 1 | X = query)` from the `k` nearest points.
pub fn knn_regress(dataset: &SourceDataset, query: &[f64], k: usize) -> Result<f64> {
    if k == 0 || k > dataset.len() {
        return Err(Error::InvalidK { k, n: dataset.len() });
    }
    let mut order = NeighborOrder::new(dataset, query)?;
    let positives = order
        .prefix(k)
        .iter()
        .filter(|nb| dataset.label(nb.index) == 1)
        .count();
    Ok(positives as f64 / k as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceEstimate {
    pub k: usize,
    pub estimate: f64,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedEstimate {
    pub value: f64,
    pub per_source: Vec<SourceEstimate>,
}

/// `sum w_j k_j eta_j / sum w_j k_j`; sources with `k = 0` carry no mass.
pub fn weighted_posterior(per_source: &[SourceEstimate]) -> Result<f64> {
    let mut mass = 0.0;
    let mut acc = 0.0;
    for s in per_source {
        if !(s.weight > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "weights must be positive, got {}",
                s.weight
            )));
        }
        if s.k == 0 {
            continue;
        }
        let m = s.weight * s.k as f64;
        mass += m;
        acc += m * s.estimate;
    }
    if mass == 0.0 {
        return Err(Error::Degenerate("every source has k = 0".into()));
    }
    // keep the convex combination inside the hull despite rounding
    let (lo, hi) = per_source
        .iter()
        .filter(|s| s.k > 0)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| {
            (lo.min(s.estimate), hi.max(s.estimate))
        });
    Ok((acc / mass).clamp(lo, hi))
}

/// `1` iff `eta_hat >= 1/2`.
pub fn plug_in_classify(eta_hat: f64) -> Label {
    Label::from(eta_hat >= 0.5)
}

/// Per-source weights and neighbor counts for the fixed weighted classifier.
#[derive(Debug, Clone, PartialEq)]
pub struct TuningPlan {
    pub delta: f64,
    pub weights: Vec<f64>,
    pub ks: Vec<usize>,
}

pub fn fixed_weighted_knn(
    sources: &[SourceDataset],
    plan: &TuningPlan,
    query: &[f64],
) -> Result<(Label, WeightedEstimate)> {
    if sources.len() != plan.ks.len() || sources.len() != plan.weights.len() {
        return Err(Error::InvalidParameter(format!(
            "{} sources but plan has {} ks and {} weights",
            sources.len(),
            plan.ks.len(),
            plan.weights.len()
        )));
    }
    let per_source = sources
        .iter()
        .zip(plan.ks.iter().zip(&plan.weights))
        .map(|(ds, (&k, &weight))| {
            let estimate = if k == 0 {
                ds.check_query(query)?;
                0.5
            } else {
                knn_regress(ds, query, k)?
            };
            Ok(SourceEstimate { k, estimate, weight })
        })
        .collect::<Result<Vec<_>>>()?;
    let value = weighted_posterior(&per_source)?;
    Ok((plug_in_classify(value), WeightedEstimate { value, per_source }))
}

/// Rate-optimal `(w_P, w_Q, k_P, k_Q)` with all proportionality constants
/// set to one. The returned plan lists P first, then Q.
pub fn theorem3_tuning(params: &RateParams) -> Result<TuningPlan> {
    params.validate()?;
    let (n_p, n_q) = (params.n_p, params.n_q);
    if n_p + n_q == 0 {
        return Err(Error::InvalidParameter("n_p + n_q must be >= 1".into()));
    }
    let RateParams {
        beta_p,
        beta_q,
        gamma,
        ..
    } = *params;
    let d = params.d as f64;
    let (np, nq) = (n_p as f64, n_q as f64);
    let (delta, k_power) = match params.branch() {
        Branch::SmoothSource => {
            if beta_p <= 0.0 {
                return Err(Error::InvalidParameter("beta_p must be positive".into()));
            }
            let base = np.powf((2.0 * beta_p + gamma * d) / (gamma * (2.0 * beta_p + d))) + nq;
            (
                base.powf(-beta_p / (2.0 * beta_p + gamma * d)),
                gamma * d / beta_p,
            )
        }
        Branch::SmoothTarget => {
            if beta_q <= 0.0 {
                return Err(Error::InvalidParameter("beta_q must be positive".into()));
            }
            let base = np.powf((2.0 * beta_q + d) / (2.0 * gamma * beta_q + d)) + nq;
            (base.powf(-beta_q / (2.0 * beta_q + d)), d / beta_q)
        }
    };
    let shrink = delta.powf(k_power);
    let pick = |n: u64| -> usize {
        if n == 0 {
            0
        } else {
            ((n as f64 * shrink).round() as usize).clamp(1, n as usize)
        }
    };
    Ok(TuningPlan {
        delta,
        weights: vec![delta.powf(gamma), delta],
        ks: vec![pick(n_p), pick(n_q)],
    })
}
