//! The two simulation designs, their Bayes labeler and seeded samplers.
//!
//! Both designs are radial in `t = ||x|| / sqrt(2)` with the decision
//! boundary at `t = 1/2`. Roughness enters through the parity of the digit
//! in the `10^-10` place of `t`, which switches between two signal strengths
//! on an extremely fine scale.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::{Label, SourceDataset};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum DgpId {
    /// Smooth source, rough target.
    Dgp1,
    /// Smooth target, rough source.
    Dgp2,
}

impl std::fmt::Display for DgpId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            DgpId::Dgp1 => "1",
            DgpId::Dgp2 => "2",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Role {
    P,
    Q,
}

impl Role {
    pub fn tag(self) -> &'static str {
        match self {
            Role::P => "P",
            Role::Q => "Q",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DgpConfig {
    pub dgp: DgpId,
    pub kappa: f64,
    pub gamma: f64,
    pub d: usize,
}

impl DgpConfig {
    pub fn new(dgp: DgpId, kappa: f64, gamma: f64, d: usize) -> Result<Self> {
        let cfg = Self { dgp, kappa, gamma, d };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.kappa) {
            return Err(Error::InvalidParameter(format!("kappa must lie in [0, 1], got {}", self.kappa)));
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(Error::InvalidParameter(format!("gamma must be > 0, got {}", self.gamma)));
        }
        if self.d == 0 {
            return Err(Error::InvalidParameter("dimension must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

/// `||x|| / sqrt(2)`.
pub fn radial_coordinate(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt() / std::f64::consts::SQRT_2
}

/// Parity of `floor(v * 10^10)`, i.e. of the ten-billionths digit of `v`.
pub fn parity_digit(v: f64) -> Parity {
    let scaled = (v * 1e10).floor() as u64;
    if scaled.is_multiple_of(2) {
        Parity::Even
    } else {
        Parity::Odd
    }
}

fn linear(scale: f64, s: f64) -> f64 {
    scale * s + 0.5
}

fn power(scale: f64, gamma: f64, s: f64) -> f64 {
    // sign(s) * scale^gamma * |s|^gamma; zero at s = 0
    if s == 0.0 {
        return 0.5;
    }
    s.signum() * scale.powf(gamma) * s.abs().powf(gamma) + 0.5
}

/// Regression function of `role` at `x`, clamped to `[0, 1]`.
pub fn eta(cfg: &DgpConfig, role: Role, x: &[f64]) -> f64 {
    let t = radial_coordinate(x);
    eta_radial(cfg, role, t, parity_digit(t))
}

/// Regression function in terms of the radial coordinate and its digit
/// parity.
pub fn eta_radial(cfg: &DgpConfig, role: Role, t: f64, parity: Parity) -> f64 {
    let s = t - 0.5;
    let DgpConfig { kappa, gamma, .. } = *cfg;
    let raw = match (cfg.dgp, role) {
        (DgpId::Dgp1, Role::Q) => match parity {
            Parity::Even => linear(kappa, s),
            Parity::Odd => linear(kappa.powf(gamma), s),
        },
        (DgpId::Dgp1, Role::P) => power(kappa, gamma, s),
        (DgpId::Dgp2, Role::Q) => linear(kappa, s),
        (DgpId::Dgp2, Role::P) => match parity {
            Parity::Even => power(kappa, gamma, s),
            Parity::Odd => power(1.2 * kappa, gamma, s),
        },
    };
    raw.clamp(0.0, 1.0)
}

/// Bayes classifier under the target: `1[eta_Q(x) >= 1/2]`.
pub fn bayes_label(cfg: &DgpConfig, x: &[f64]) -> Label {
    Label::from(eta(cfg, Role::Q, x) >= 0.5)
}

/// Draws `n` uniform covariates on `[0, 1]^d` and Bernoulli labels from
/// `eta_role`.
pub fn sample_dataset(cfg: &DgpConfig, role: Role, n: usize, seed: u64) -> Result<SourceDataset> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = SourceDataset::empty(role.tag(), cfg.d);
    let mut x = vec![0.0; cfg.d];
    for _ in 0..n {
        for v in x.iter_mut() {
            *v = rng.random::<f64>();
        }
        let y = Label::from(rng.random::<f64>() < eta(cfg, role, &x));
        out.push(&x, y)?;
    }
    Ok(out)
}

/// `n` uniform query points on `[0, 1]^d`.
pub fn sample_covariates(d: usize, n: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| (0..d).map(|_| rng.random::<f64>()).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::PointSet;

    fn cfg(dgp: DgpId, kappa: f64, gamma: f64) -> DgpConfig {
        DgpConfig::new(dgp, kappa, gamma, 2).unwrap()
    }

    /// A point with radial coordinate `t` and requested parity, found by
    /// nudging along the diagonal.
    fn point_with(t: f64, parity: Parity) -> Vec<f64> {
        let mut step = 0i64;
        loop {
            let tt = t + step as f64 * 1e-11;
            let x = vec![tt, tt];
            let got = radial_coordinate(&x);
            if (got - t).abs() < 1e-9 && parity_digit(got) == parity {
                return x;
            }
            step += 1;
        }
    }

    #[test]
    fn radial_examples() {
        assert_eq!(radial_coordinate(&[0.0, 0.0]), 0.0);
        assert!((radial_coordinate(&[1.0, 1.0]) - 1.0).abs() < 1e-15);
        assert!((radial_coordinate(&[0.6, 0.8]) - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn parity_examples() {
        assert_eq!(parity_digit(0.5), Parity::Even);
        assert_eq!(parity_digit(1.5e-10), Parity::Odd);
        assert_eq!(parity_digit(0.0), Parity::Even);
        assert_eq!(parity_digit(0.123_456_789_3), Parity::Odd);
    }

    #[test]
    fn eta_fixture_values() {
        let c = cfg(DgpId::Dgp1, 0.2, 0.6);
        assert!((eta_radial(&c, Role::Q, 0.75, Parity::Even) - 0.55).abs() < 1e-12);
        assert!((eta_radial(&c, Role::Q, 0.75, Parity::Odd) - 0.595_182_696_935_794).abs() < 1e-12);
        assert!((eta_radial(&c, Role::P, 0.75, Parity::Even) - 0.665_722_700_866_999_4).abs() < 1e-12);
        assert_eq!(
            eta_radial(&c, Role::P, 0.75, Parity::Odd),
            eta_radial(&c, Role::P, 0.75, Parity::Even)
        );
        let c2 = cfg(DgpId::Dgp2, 0.2, 0.6);
        assert!((eta_radial(&c2, Role::Q, 0.75, Parity::Odd) - 0.55).abs() < 1e-12);
        // (1.2 * 0.2)^0.6 * 0.25^0.6 + 0.5
        let odd = 0.24f64.powf(0.6) * 0.25f64.powf(0.6) + 0.5;
        assert!((eta_radial(&c2, Role::P, 0.75, Parity::Odd) - odd).abs() < 1e-12);
        assert!(eta_radial(&c2, Role::P, 0.25, Parity::Odd) < 0.5);

        // through a covariate: the nudged points sit within 1e-9 of t = 0.75
        let even = point_with(0.75, Parity::Even);
        let odd = point_with(0.75, Parity::Odd);
        assert!((eta(&c, Role::Q, &even) - 0.55).abs() < 1e-9);
        assert!((eta(&c, Role::Q, &odd) - 0.595_182_696_935_794).abs() < 1e-9);

        for dgp in [DgpId::Dgp1, DgpId::Dgp2] {
            for role in [Role::P, Role::Q] {
                assert_eq!(eta(&cfg(dgp, 0.7, 0.6), role, &[0.5, 0.5]), 0.5);
            }
        }
    }

    #[test]
    fn clamp_engages_for_large_kappa() {
        let c = cfg(DgpId::Dgp1, 0.9, 0.6);
        let unclamped = 0.9f64.powf(0.6) * 0.5f64.powf(0.6) + 0.5;
        assert!((unclamped - 1.119_337_687_6).abs() < 1e-9);
        assert_eq!(eta(&c, Role::P, &[1.0, 1.0]), 1.0);
    }

    #[test]
    fn bayes_examples() {
        let c = cfg(DgpId::Dgp1, 0.4, 0.6);
        assert_eq!(bayes_label(&c, &point_with(0.75, Parity::Odd)), 1);
        assert_eq!(bayes_label(&c, &point_with(0.25, Parity::Even)), 0);
        assert_eq!(bayes_label(&c, &[0.5, 0.5]), 1);
    }

    #[test]
    fn sampling_is_seeded() {
        let c = cfg(DgpId::Dgp2, 0.5, 0.6);
        let a = sample_dataset(&c, Role::P, 300, 11).unwrap();
        let b = sample_dataset(&c, Role::P, 300, 11).unwrap();
        let other = sample_dataset(&c, Role::P, 300, 12).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, other);
        assert!(sample_dataset(&c, Role::Q, 0, 1).unwrap().is_empty());
    }

    #[test]
    fn zero_kappa_gives_fair_coins() {
        let c = cfg(DgpId::Dgp1, 0.0, 0.6);
        let n = 20_000;
        let ds = sample_dataset(&c, Role::Q, n, 5).unwrap();
        let mean = ds.labels().iter().map(|&y| f64::from(y)).sum::<f64>() / n as f64;
        assert!((mean - 0.5).abs() < 3.0 / (n as f64).sqrt());
    }

    #[test]
    fn label_frequency_matches_integrated_eta() {
        // kappa = gamma = 1: eta_Q = t + 0 on both parities, so P(Y = 1 | t > 1/2)
        // equals the average of t over that region under the uniform law
        let c = cfg(DgpId::Dgp1, 1.0, 1.0);
        let n = 200_000;
        let ds = sample_dataset(&c, Role::Q, n, 9).unwrap();
        let (mut hits, mut count) = (0usize, 0usize);
        for (x, y) in ds.rows() {
            if radial_coordinate(x) > 0.5 {
                count += 1;
                hits += usize::from(y);
            }
        }
        let empirical = hits as f64 / count as f64;
        // midpoint-rule integral of eta over {t > 1/2} in the unit square
        let m = 2000;
        let (mut num, mut den) = (0.0, 0.0);
        for i in 0..m {
            for j in 0..m {
                let x = [(i as f64 + 0.5) / m as f64, (j as f64 + 0.5) / m as f64];
                let t = radial_coordinate(&x);
                if t > 0.5 {
                    num += t;
                    den += 1.0;
                }
            }
        }
        let expected = num / den;
        let se = (expected * (1.0 - expected) / count as f64).sqrt();
        assert!((empirical - expected).abs() < 4.0 * se, "{empirical} vs {expected}");
    }

    #[test]
    fn sign_agreement_and_relative_signal_on_grid() {
        for dgp in [DgpId::Dgp1, DgpId::Dgp2] {
            for &kappa in &[0.1, 0.5, 0.9] {
                let c = cfg(dgp, kappa, 0.6);
                for i in 0..=100 {
                    for j in 0..=100 {
                        let x = [i as f64 / 100.0, j as f64 / 100.0];
                        let (ep, eq) = (eta(&c, Role::P, &x), eta(&c, Role::Q, &x));
                        assert!((ep - 0.5) * (eq - 0.5) >= 0.0);
                    }
                }
            }
        }
    }

    #[test]
    fn relative_signal_bounds_dgp1() {
        let gamma = 0.6;
        for &kappa in &[0.1, 0.3, 0.5, 0.7, 0.9] {
            let c = cfg(DgpId::Dgp1, kappa, gamma);
            for i in 0..=100 {
                for j in 0..=100 {
                    let x = [i as f64 / 100.0, j as f64 / 100.0];
                    let s = radial_coordinate(&x) - 0.5;
                    let unclamped = s.signum() * kappa.powf(gamma) * s.abs().powf(gamma) + 0.5;
                    // near t = 1/2 the deviation from 1/2 is below f64 resolution
                    if !(0.0..=1.0).contains(&unclamped) || s.abs() < 1e-9 {
                        continue;
                    }
                    let dq = (eta(&c, Role::Q, &x) - 0.5).abs();
                    let dp = (eta(&c, Role::P, &x) - 0.5).abs();
                    let lo = kappa.powf(gamma * (1.0 - gamma)) * dq.powf(gamma);
                    assert!(lo <= dp * (1.0 + 1e-12) + 1e-15, "lower bound at {x:?}");
                    assert!(dp <= dq.powf(gamma) * (1.0 + 1e-12) + 1e-15, "upper bound at {x:?}");
                }
            }
        }
    }

    #[test]
    fn invalid_configs() {
        assert!(DgpConfig::new(DgpId::Dgp1, 1.2, 0.6, 2).is_err());
        assert!(DgpConfig::new(DgpId::Dgp1, 0.5, 0.0, 2).is_err());
        assert!(DgpConfig::new(DgpId::Dgp1, 0.5, 0.6, 0).is_err());
    }
}
