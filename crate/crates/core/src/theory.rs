//! Closed-form minimax rates, phase-transition regimes and attempt ratios.
//!
//! Rates are returned with unit constants: only the exponent structure is
//! meaningful, not the absolute value of the risk.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smoothness, noise and transfer exponents plus the two sample sizes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateParams {
    /// Tsybakov noise exponent.
    pub alpha: f64,
    pub beta_p: f64,
    pub beta_q: f64,
    /// Relative signal exponent of P with respect to Q.
    pub gamma: f64,
    pub d: usize,
    pub n_p: u64,
    pub n_q: u64,
}

/// Which formula governs the rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// `beta_p > gamma * beta_q`: the source is smoother than the transferred target.
    SmoothSource,
    /// `beta_p <= gamma * beta_q`.
    SmoothTarget,
}

impl RateParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return bad(format!("alpha must be >= 0, got {}", self.alpha));
        }
        for (name, b) in [("beta_p", self.beta_p), ("beta_q", self.beta_q)] {
            if !(0.0..=1.0).contains(&b) {
                return bad(format!("{name} must lie in [0, 1], got {b}"));
            }
        }
        if self.beta_p.max(self.beta_q) <= 0.0 {
            return bad("at least one of beta_p, beta_q must be positive".into());
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return bad(format!("gamma must be > 0, got {}", self.gamma));
        }
        if self.d == 0 {
            return bad("dimension must be >= 1".into());
        }
        Ok(())
    }

    pub fn branch(&self) -> Branch {
        if self.beta_p > self.gamma * self.beta_q {
            Branch::SmoothSource
        } else {
            Branch::SmoothTarget
        }
    }

    /// Validates and checks that the smoothness order used by the active
    /// branch is positive.
    pub(crate) fn active_branch(&self) -> Result<Branch> {
        self.validate()?;
        let branch = self.branch();
        match branch {
            Branch::SmoothSource if self.beta_p <= 0.0 => Err(Error::InvalidParameter(
                "beta_p must be positive in the smooth-source branch".into(),
            )),
            Branch::SmoothTarget if self.beta_q <= 0.0 => Err(Error::InvalidParameter(
                "beta_q must be positive in the smooth-target branch".into(),
            )),
            _ => Ok(branch),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RegimeClass {
    Nonparametric,
    Fast,
    SuperFast,
}

impl std::fmt::Display for RegimeClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            RegimeClass::Nonparametric => "Nonparametric",
            RegimeClass::Fast => "Fast",
            RegimeClass::SuperFast => "SuperFast",
        })
    }
}

/// Rate exponent for `n_q = 0`, with a flag telling whether the matching
/// lower bound applies (so the rate is minimax-exact rather than an upper
/// bound only).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingleSourceExponent {
    pub exponent: f64,
    pub exact: bool,
    pub branch: Branch,
}

pub fn minimax_exponent_single(params: &RateParams) -> Result<SingleSourceExponent> {
    if params.n_q != 0 {
        return Err(Error::InvalidParameter(
            "single-source exponent requires n_q = 0".into(),
        ));
    }
    let branch = params.active_branch()?;
    let RateParams {
        alpha,
        beta_p,
        beta_q,
        gamma,
        ..
    } = *params;
    let d = params.d as f64;
    let (exponent, exact) = match branch {
        Branch::SmoothSource => (
            (1.0 + alpha) * beta_p / (gamma * (2.0 * beta_p + d)),
            alpha * beta_p <= gamma * d,
        ),
        Branch::SmoothTarget => (
            (1.0 + alpha) * beta_q / (2.0 * gamma * beta_q + d),
            alpha * beta_q <= d,
        ),
    };
    Ok(SingleSourceExponent {
        exponent,
        exact,
        branch,
    })
}

/// Effective sample size and rate exponent of the two-sample bound:
/// the rate is `effective^(-exponent)`.
fn two_sample_terms(params: &RateParams) -> Result<(f64, f64)> {
    let branch = params.active_branch()?;
    if params.n_p + params.n_q == 0 {
        return Err(Error::InvalidParameter("n_p + n_q must be >= 1".into()));
    }
    let RateParams {
        alpha,
        beta_p,
        beta_q,
        gamma,
        ..
    } = *params;
    let d = params.d as f64;
    let (n_p, n_q) = (params.n_p as f64, params.n_q as f64);
    Ok(match branch {
        Branch::SmoothSource => (
            n_p.powf((2.0 * beta_p + gamma * d) / (gamma * (2.0 * beta_p + d))) + n_q,
            beta_p * (1.0 + alpha) / (2.0 * beta_p + gamma * d),
        ),
        Branch::SmoothTarget => (
            n_p.powf((2.0 * beta_q + d) / (2.0 * gamma * beta_q + d)) + n_q,
            beta_q * (1.0 + alpha) / (2.0 * beta_q + d),
        ),
    })
}

/// Minimax excess-risk order at `(n_p, n_q)`.
pub fn minimax_rate_general(params: &RateParams) -> Result<f64> {
    let (effective, exponent) = two_sample_terms(params)?;
    Ok(effective.powf(-exponent))
}

/// Upper bound over the larger class (without the reverse relative-signal
/// condition) in the smooth-source branch. Never tighter than
/// [`minimax_rate_general`] when `n_q > 0`.
pub fn suboptimal_upper_bound(params: &RateParams) -> Result<f64> {
    params.validate()?;
    if params.branch() != Branch::SmoothSource {
        return Err(Error::InvalidParameter(
            "suboptimal bound is defined only for beta_p > gamma * beta_q".into(),
        ));
    }
    if params.beta_q <= 0.0 {
        return Err(Error::InvalidParameter("beta_q must be positive".into()));
    }
    if params.n_p + params.n_q == 0 {
        return Err(Error::InvalidParameter("n_p + n_q must be >= 1".into()));
    }
    let RateParams {
        alpha,
        beta_p,
        beta_q,
        gamma,
        ..
    } = *params;
    let d = params.d as f64;
    let power = (2.0 * beta_q + d) * beta_p / (gamma * (2.0 * beta_p + d) * beta_q);
    let effective = (params.n_p as f64).powf(power) + params.n_q as f64;
    Ok(effective.powf(-beta_q * (1.0 + alpha) / (2.0 * beta_q + d)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SourceParams {
    pub beta: f64,
    pub gamma: f64,
    pub n: u64,
}

/// Parameters of an `m`-source problem with target smoothness `beta_q`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiSourceParams {
    pub alpha: f64,
    pub beta_q: f64,
    pub d: usize,
    pub sources: Vec<SourceParams>,
}

impl MultiSourceParams {
    /// `min(beta_j / gamma_j, beta_q)`.
    pub fn beta_star(&self) -> f64 {
        self.sources
            .iter()
            .map(|s| s.beta / s.gamma)
            .fold(self.beta_q, f64::min)
    }
}

pub fn multi_source_rate(params: &MultiSourceParams) -> Result<f64> {
    if params.sources.is_empty() {
        return Err(Error::InvalidParameter("at least one source required".into()));
    }
    if !(params.alpha >= 0.0) || params.d == 0 || !(0.0..=1.0).contains(&params.beta_q) {
        return Err(Error::InvalidParameter("invalid alpha, d or beta_q".into()));
    }
    for s in &params.sources {
        if !(0.0..=1.0).contains(&s.beta) || !(s.gamma > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "source beta must lie in [0, 1] and gamma be > 0, got ({}, {})",
                s.beta, s.gamma
            )));
        }
    }
    if params.sources.iter().all(|s| s.n == 0) {
        return Err(Error::InvalidParameter("total sample size must be >= 1".into()));
    }
    let beta = params.beta_star();
    if beta <= 0.0 {
        return Err(Error::InvalidParameter("beta* must be positive".into()));
    }
    let d = params.d as f64;
    let effective: f64 = params
        .sources
        .iter()
        .map(|s| (s.n as f64).powf((2.0 * beta + d) / (2.0 * s.gamma * beta + d)))
        .sum();
    Ok(effective.powf(-beta * (1.0 + params.alpha) / (2.0 * beta + d)))
}

/// Regime of the single-source rate: super-fast at exponent >= 1, fast at
/// exponent >= 1/2, nonparametric below.
pub fn classify_regime(params: &RateParams) -> Result<RegimeClass> {
    let e = minimax_exponent_single(params)?.exponent;
    Ok(if e >= 1.0 {
        RegimeClass::SuperFast
    } else if e >= 0.5 {
        RegimeClass::Fast
    } else {
        RegimeClass::Nonparametric
    })
}

/// Attempts needed by a full `(n_1 + ... + n_m)`-point search relative to a
/// scan over the largest sample only.
pub fn attempt_ratio(sample_sizes: &[u64]) -> Result<f64> {
    let max = sample_sizes.iter().copied().max().unwrap_or(0);
    if max == 0 {
        return Err(Error::InvalidParameter("at least one sample size must be positive".into()));
    }
    let total: u64 = sample_sizes.iter().sum();
    Ok(total as f64 / max as f64)
}
