//! Pointwise-adaptive selection of neighbor counts.
//!
//! Each routine scans the largest source's neighbor count upward, ties the
//! other sources' counts to it proportionally (`k_j = floor(k_1 n_j / n_1)`)
//! and stops at the first count whose signal-to-noise statistic exceeds
//! `sqrt((d + ln N) ln N)`, `N` being the total sample size. One pass of the
//! outer loop is one attempt, so a query never costs more than `max_j n_j`
//! attempts.
//!
//! The kNN estimates are running means over each source's neighbor
//! ordering, so a query costs one distance pass per source plus a scan that
//! only sorts as far as it reads.

use crate::dataset::{Label, SourceDataset};
use crate::error::{Error, Result};
use crate::geometry::{NeighborOrder, PointSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    ThresholdCrossed,
    Exhausted,
}

impl StopReason {
    pub fn as_str(self) -> &'static str {
        match self {
            StopReason::ThresholdCrossed => "threshold_crossed",
            StopReason::Exhausted => "exhausted",
        }
    }
}

/// Outcome of one adaptive scan.
///
/// `ks` and `positives` are in the caller's source order; `positives[j]`
/// counts the 1-labels among the `ks[j]` nearest points of source `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct AdaptiveSelection {
    pub ks: Vec<usize>,
    pub positives: Vec<usize>,
    pub r_final: f64,
    /// `+inf` when the total sample size is 1 and no threshold exists.
    pub threshold: f64,
    pub iterations: usize,
    pub stop_reason: StopReason,
}

impl AdaptiveSelection {
    /// kNN estimates at the selected counts, `1/2` for sources with `k = 0`.
    pub fn estimates(&self) -> Vec<f64> {
        self.ks
            .iter()
            .zip(&self.positives)
            .map(|(&k, &pos)| estimate(k, pos))
            .collect()
    }

    /// `1[sum_j k_j (eta_j - 1/2) >= 0]`, evaluated exactly as
    /// `2 sum_j positives_j >= sum_j k_j`.
    pub fn label(&self) -> Label {
        let twice_pos: usize = self.positives.iter().map(|p| 2 * p).sum();
        let total: usize = self.ks.iter().sum();
        Label::from(twice_pos >= total)
    }
}

pub fn attempt_count(selection: &AdaptiveSelection) -> usize {
    selection.iterations
}

/// `sqrt((d + ln n) ln n)`.
pub fn stopping_threshold(d: usize, n_total: usize) -> Result<f64> {
    if n_total < 2 {
        return Err(Error::InvalidParameter(format!(
            "threshold needs at least 2 samples, got {n_total}"
        )));
    }
    let log_n = (n_total as f64).ln();
    Ok(((d as f64 + log_n) * log_n).sqrt())
}

pub(crate) fn scan_threshold(d: usize, n_total: usize) -> f64 {
    stopping_threshold(d, n_total).unwrap_or(f64::INFINITY)
}

#[inline]
fn estimate(k: usize, positives: usize) -> f64 {
    if k == 0 {
        0.5
    } else {
        positives as f64 / k as f64
    }
}

/// `k (eta - 1/2)^2`, the squared signal-to-noise mass of one source.
#[inline]
fn snr_mass(k: usize, eta: f64) -> f64 {
    let dev = eta - 0.5;
    k as f64 * dev * dev
}

/// `max(r+, r-)` where `r+` (`r-`) is the root of the summed masses
/// `k_j (eta_j - 1/2)^2` over sources with `eta_j >= 1/2` (`< 1/2`).
/// Entries with `k = 0` are ignored.
pub fn signal_to_noise_r(estimates: &[(usize, f64)]) -> Result<f64> {
    if estimates.iter().all(|&(k, _)| k == 0) {
        return Err(Error::Degenerate("every source has k = 0".into()));
    }
    let (mut plus, mut minus) = (0.0, 0.0);
    for &(k, eta) in estimates.iter().filter(|e| e.0 > 0) {
        if eta >= 0.5 {
            plus += snr_mass(k, eta);
        } else {
            minus += snr_mass(k, eta);
        }
    }
    Ok(f64::max(plus.sqrt(), minus.sqrt()))
}

/// Two-source statistic: the root of both masses when the estimates lie on
/// the same side of 1/2 (an estimate of exactly 1/2 counts as agreeing),
/// otherwise the larger single-source root.
pub(crate) fn two_source_r(k_a: usize, pos_a: usize, k_b: usize, pos_b: usize) -> f64 {
    let (eta_a, eta_b) = (estimate(k_a, pos_a), estimate(k_b, pos_b));
    let (dev_a, dev_b) = (eta_a - 0.5, eta_b - 0.5);
    let (mass_a, mass_b) = (snr_mass(k_a, eta_a), snr_mass(k_b, eta_b));
    let disagree = (dev_a > 0.0 && dev_b < 0.0) || (dev_a < 0.0 && dev_b > 0.0);
    if disagree {
        f64::max(mass_a.sqrt(), mass_b.sqrt())
    } else {
        (mass_a + mass_b).sqrt()
    }
}

/// Running kNN estimate over one source's neighbor ordering.
struct SourceScan<'a> {
    data: &'a SourceDataset,
    order: NeighborOrder,
    k: usize,
    positives: usize,
}

impl<'a> SourceScan<'a> {
    fn new(data: &'a SourceDataset, query: &[f64]) -> Result<Self> {
        Ok(Self {
            data,
            order: NeighborOrder::new(data, query)?,
            k: 0,
            positives: 0,
        })
    }

    fn advance_to(&mut self, k: usize) {
        while self.k < k {
            let nb = self.order.get(self.k);
            self.positives += usize::from(self.data.label(nb.index));
            self.k += 1;
        }
    }

    fn eta(&self) -> f64 {
        estimate(self.k, self.positives)
    }
}

fn tied_count(k_lead: usize, n: usize, n_lead: usize) -> usize {
    (k_lead as u128 * n as u128 / n_lead as u128) as usize
}

fn stop_reason(r: f64, threshold: f64, k: usize, n: usize) -> Option<StopReason> {
    if r > threshold {
        Some(StopReason::ThresholdCrossed)
    } else if k == n {
        Some(StopReason::Exhausted)
    } else {
        None
    }
}

/// Adaptive kNN on a single sample.
pub fn adaptive_single_source(p: &SourceDataset, query: &[f64]) -> Result<(Label, AdaptiveSelection)> {
    let n = p.len();
    if n == 0 {
        return Err(Error::EmptyDataset("adaptive scan needs a nonempty sample".into()));
    }
    let threshold = scan_threshold(query.len(), n);
    let mut scan = SourceScan::new(p, query)?;
    for k in 1..=n {
        scan.advance_to(k);
        let r = snr_mass(k, scan.eta()).sqrt();
        if let Some(reason) = stop_reason(r, threshold, k, n) {
            let selection = AdaptiveSelection {
                ks: vec![k],
                positives: vec![scan.positives],
                r_final: r,
                threshold,
                iterations: k,
                stop_reason: reason,
            };
            return Ok((selection.label(), selection));
        }
    }
    unreachable!("scan always stops at k = n")
}

/// Adaptive weighted kNN on a source sample `p` and a target sample `q`.
///
/// The larger sample drives the loop (ties go to `p`).
pub fn adaptive_two_source(
    p: &SourceDataset,
    q: &SourceDataset,
    query: &[f64],
) -> Result<(Label, AdaptiveSelection)> {
    let flipped = q.len() > p.len();
    let (lead, other) = if flipped { (q, p) } else { (p, q) };
    let (n_lead, n_other) = (lead.len(), other.len());
    if n_lead == 0 {
        return Err(Error::EmptyDataset("both samples are empty".into()));
    }
    let threshold = scan_threshold(query.len(), n_lead + n_other);
    let mut a = SourceScan::new(lead, query)?;
    let mut b = SourceScan::new(other, query)?;
    for k_a in 1..=n_lead {
        let k_b = tied_count(k_a, n_other, n_lead);
        a.advance_to(k_a);
        b.advance_to(k_b);
        let r = two_source_r(k_a, a.positives, k_b, b.positives);
        if let Some(reason) = stop_reason(r, threshold, k_a, n_lead) {
            let (ks, positives) = if flipped {
                (vec![k_b, k_a], vec![b.positives, a.positives])
            } else {
                (vec![k_a, k_b], vec![a.positives, b.positives])
            };
            let selection = AdaptiveSelection {
                ks,
                positives,
                r_final: r,
                threshold,
                iterations: k_a,
                stop_reason: reason,
            };
            return Ok((selection.label(), selection));
        }
    }
    unreachable!("scan always stops at k = n_lead")
}

/// Adaptive weighted kNN over any number of samples.
///
/// Sources are visited in order of decreasing size (stable for equal
/// sizes); the selection is reported in the caller's order.
pub fn adaptive_multi_source(
    sources: &[SourceDataset],
    query: &[f64],
) -> Result<(Label, AdaptiveSelection)> {
    let mut order: Vec<usize> = (0..sources.len()).collect();
    order.sort_by(|&i, &j| sources[j].len().cmp(&sources[i].len()));
    let n_lead = order.first().map_or(0, |&i| sources[i].len());
    if n_lead == 0 {
        return Err(Error::EmptyDataset("every sample is empty".into()));
    }
    let n_total: usize = sources.iter().map(PointSet::len).sum();
    let threshold = scan_threshold(query.len(), n_total);
    let mut scans = order
        .iter()
        .map(|&i| SourceScan::new(&sources[i], query))
        .collect::<Result<Vec<_>>>()?;
    let mut current = Vec::with_capacity(scans.len());
    for k_lead in 1..=n_lead {
        current.clear();
        for scan in scans.iter_mut() {
            scan.advance_to(tied_count(k_lead, scan.data.len(), n_lead));
            current.push((scan.k, scan.eta()));
        }
        let r = signal_to_noise_r(&current)?;
        if let Some(reason) = stop_reason(r, threshold, k_lead, n_lead) {
            let mut ks = vec![0; sources.len()];
            let mut positives = vec![0; sources.len()];
            for (scan, &i) in scans.iter().zip(&order) {
                ks[i] = scan.k;
                positives[i] = scan.positives;
            }
            let selection = AdaptiveSelection {
                ks,
                positives,
                r_final: r,
                threshold,
                iterations: k_lead,
                stop_reason: reason,
            };
            return Ok((selection.label(), selection));
        }
    }
    unreachable!("scan always stops at k = n_lead")
}
