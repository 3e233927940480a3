//! Retrospective test for a single change in the mean of a finite window.
//!
//! The statistic is the max-type CUSUM `M = max_n C_n^2 / Ω̂`, where
//! `C_n = (S_n - (n/N) S_N) / √N` and `Ω̂` is the Bartlett long-run
//! variance of the window. Under no change `M` converges to
//! `sup_{t∈[0,1]} B(t)^2` for a Brownian bridge `B`, whose quantiles come
//! from [`crate::critical`].

use serde::{Deserialize, Serialize};

use crate::critical::CriticalTable;
use crate::error::{Error, Result};
use crate::series::{autocov_centered, sample_mean};

/// Shortest window the offline test accepts.
pub const MIN_OFFLINE_LEN: usize = 20;

pub const DEFAULT_VARIANCE_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Bandwidth {
    /// Truncation lag `q` fixed by the caller.
    FixedLag(usize),
    /// `q = floor(N^(1/3))`.
    Automatic,
}

impl Bandwidth {
    pub fn lag_for(self, n: usize) -> usize {
        let q = match self {
            Bandwidth::FixedLag(q) => q,
            Bandwidth::Automatic => (n as f64).cbrt().floor() as usize,
        };
        q.min(n.saturating_sub(1))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LrvConfig {
    pub bandwidth: Bandwidth,
    pub min_variance_floor: f64,
}

impl Default for LrvConfig {
    fn default() -> Self {
        Self { bandwidth: Bandwidth::Automatic, min_variance_floor: DEFAULT_VARIANCE_FLOOR }
    }
}

impl LrvConfig {
    pub fn fixed_lag(q: usize) -> Self {
        Self { bandwidth: Bandwidth::FixedLag(q), ..Self::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OfflineTestResult {
    pub statistic: f64,
    pub critical_value: f64,
    pub reject_h0: bool,
    /// Index of the first sample after the estimated change.
    pub cp_index: Option<usize>,
    pub cp_fraction: Option<f64>,
}

/// CUSUM path `C_1..C_N`.
pub fn cusum_path(x: &[f64]) -> Result<Vec<f64>> {
    let n = x.len();
    if n < 2 {
        return Err(Error::InsufficientData { needed: 2, got: n });
    }
    let total: f64 = x.iter().sum();
    let scale = 1.0 / (n as f64).sqrt();
    let nf = n as f64;
    let mut partial = 0.0;
    let mut path = Vec::with_capacity(n);
    for (i, v) in x.iter().enumerate() {
        partial += v;
        let k = (i + 1) as f64;
        path.push(scale * (partial - k / nf * total));
    }
    // telescopes to zero; pin it so rounding never leaks into the argmax
    path[n - 1] = 0.0;
    Ok(path)
}

/// Bartlett-kernel long-run variance
/// `γ(0) + 2 Σ_{s=1..q} (1 - s/(q+1)) γ(s)` with biased autocovariances.
pub fn bartlett_lrv(x: &[f64], cfg: &LrvConfig) -> Result<f64> {
    let n = x.len();
    if n < 4 {
        return Err(Error::InsufficientData { needed: 4, got: n });
    }
    let floor = cfg.min_variance_floor;
    let mean = sample_mean(x)?;
    let gamma0 = autocov_centered(x, mean, 0);
    if gamma0 <= floor {
        return Err(Error::DegenerateVariance { value: gamma0, floor });
    }
    let q = cfg.bandwidth.lag_for(n);
    let mut lrv = gamma0;
    for s in 1..=q {
        let w = 1.0 - s as f64 / (q as f64 + 1.0);
        lrv += 2.0 * w * autocov_centered(x, mean, s);
    }
    if lrv <= floor {
        return Err(Error::DegenerateVariance { value: lrv, floor });
    }
    Ok(lrv)
}

/// `M` and its argmax (count of samples before the change) for a given
/// long-run variance.
pub fn offline_statistic(x: &[f64], lrv: f64) -> Result<(f64, usize)> {
    let path = cusum_path(x)?;
    let (arg, best) = path
        .iter()
        .enumerate()
        .map(|(i, c)| (i + 1, c * c))
        .fold((1, f64::NEG_INFINITY), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
    Ok((best / lrv, arg))
}

pub fn offline_test_with_critical(
    x: &[f64],
    cfg: &LrvConfig,
    critical_value: f64,
) -> Result<OfflineTestResult> {
    let n = x.len();
    if n < MIN_OFFLINE_LEN {
        return Err(Error::InsufficientData { needed: MIN_OFFLINE_LEN, got: n });
    }
    let lrv = bartlett_lrv(x, cfg)?;
    let (statistic, arg) = offline_statistic(x, lrv)?;
    let reject_h0 = statistic >= critical_value;
    let (cp_index, cp_fraction) = if reject_h0 {
        (Some(arg), Some(arg as f64 / n as f64))
    } else {
        (None, None)
    };
    Ok(OfflineTestResult { statistic, critical_value, reject_h0, cp_index, cp_fraction })
}

/// Offline test at confidence level `alpha` (e.g. 0.95).
pub fn offline_test(
    x: &[f64],
    cfg: &LrvConfig,
    alpha: f64,
    table: &CriticalTable,
) -> Result<OfflineTestResult> {
    offline_test_with_critical(x, cfg, table.offline(alpha)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal, StandardNormal};

    #[test]
    fn cusum_constant_is_zero() {
        assert_eq!(cusum_path(&[2.5; 4]).unwrap(), vec![0.0; 4]);
    }

    #[test]
    fn cusum_hand_example() {
        let p = cusum_path(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        let expected = [-0.75, -1.0, -0.75, 0.0];
        for (a, b) in p.iter().zip(expected) {
            assert!((a - b).abs() < 1e-12, "{p:?}");
        }
    }

    #[test]
    fn cusum_needs_two_samples() {
        assert!(matches!(cusum_path(&[1.0]), Err(Error::InsufficientData { .. })));
    }

    #[test]
    fn zero_bandwidth_is_variance() {
        let x = [0.3, -1.2, 2.2, 0.1, 0.7, -0.4];
        let lrv = bartlett_lrv(&x, &LrvConfig::fixed_lag(0)).unwrap();
        let g0 = crate::series::sample_autocovariance(&x, 0).unwrap();
        assert_eq!(lrv, g0);
    }

    #[test]
    fn constant_window_is_degenerate() {
        let err = bartlett_lrv(&[5.0; 5], &LrvConfig::default()).unwrap_err();
        assert!(matches!(err, Error::DegenerateVariance { .. }));
        let err = offline_test_with_critical(&[5.0; 30], &LrvConfig::default(), 1.0).unwrap_err();
        assert!(matches!(err, Error::DegenerateVariance { .. }));
    }

    #[test]
    fn ar1_long_run_variance() {
        // innovations N(0,1), phi = 0.5: long-run variance 1 / (1 - 0.5)^2 = 4
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut x = Vec::with_capacity(10_000);
        let mut prev = 0.0;
        for _ in 0..10_200 {
            let e: f64 = StandardNormal.sample(&mut rng);
            prev = 0.5 * prev + e;
            x.push(prev);
        }
        let x = &x[200..];
        // the cube-root lag (21) leaves a small Bartlett bias at this length
        let lrv = bartlett_lrv(x, &LrvConfig::default()).unwrap();
        assert!((lrv - 4.0).abs() / 4.0 < 0.15, "lrv = {lrv}");
    }

    #[test]
    fn step_change_is_located() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let noise = Normal::new(0.0, 0.1).unwrap();
        let x: Vec<f64> = (0..300)
            .map(|i| if i < 150 { 0.0 } else { 5.0 } + noise.sample(&mut rng))
            .collect();
        let r = offline_test_with_critical(&x, &LrvConfig::default(), 2.0).unwrap();
        assert!(r.reject_h0);
        let cp = r.cp_index.unwrap();
        assert!((145..=155).contains(&cp), "cp = {cp}");
        // brute force: argmax of the squared numerator
        let total: f64 = x.iter().sum();
        let brute = (1..=300)
            .max_by(|&a, &b| {
                let f = |n: usize| {
                    let s: f64 = x[..n].iter().sum();
                    (s - n as f64 / 300.0 * total).powi(2)
                };
                f(a).partial_cmp(&f(b)).unwrap()
            })
            .unwrap();
        assert_eq!(cp, brute);
        assert!((r.cp_fraction.unwrap() - cp as f64 / 300.0).abs() < 1e-15);
    }

    #[test]
    fn short_window_rejected() {
        let x: Vec<f64> = (0..19).map(|i| i as f64).collect();
        assert!(matches!(
            offline_test_with_critical(&x, &LrvConfig::default(), 1.0),
            Err(Error::InsufficientData { needed: 20, got: 19 })
        ));
    }

    proptest! {
        #[test]
        fn location_invariance(v in prop::collection::vec(-10.0f64..10.0, 20..120), c in -100.0f64..100.0) {
            let shifted: Vec<f64> = v.iter().map(|x| x + c).collect();
            let cfg = LrvConfig::default();
            let (a, b) = match (offline_test_with_critical(&v, &cfg, 1.5), offline_test_with_critical(&shifted, &cfg, 1.5)) {
                (Ok(a), Ok(b)) => (a, b),
                _ => return Ok(()),
            };
            prop_assert!((a.statistic - b.statistic).abs() <= 1e-6 * a.statistic.max(1.0));
            if a.reject_h0 == b.reject_h0 {
                prop_assert_eq!(a.cp_index, b.cp_index);
            }
        }

        #[test]
        fn scale_equivariance(v in prop::collection::vec(-10.0f64..10.0, 20..120), c in 0.1f64..50.0, omega in 0.1f64..10.0) {
            let scaled: Vec<f64> = v.iter().map(|x| c * x).collect();
            let p = cusum_path(&v).unwrap();
            let ps = cusum_path(&scaled).unwrap();
            for (a, b) in p.iter().zip(&ps) {
                prop_assert!((c * a - b).abs() <= 1e-9 * (1.0 + b.abs()));
            }
            let (m, _) = offline_statistic(&v, omega).unwrap();
            let (ms, _) = offline_statistic(&scaled, c * c * omega).unwrap();
            prop_assert!((m - ms).abs() <= 1e-9 * (1.0 + m));
        }

        #[test]
        fn cusum_ends_at_zero(v in prop::collection::vec(-1e3f64..1e3, 2..200)) {
            prop_assert_eq!(*cusum_path(&v).unwrap().last().unwrap(), 0.0);
        }
    }
}
