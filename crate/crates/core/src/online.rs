//! Sequential CUSUM monitoring after a change-free training period.
//!
//! With `m` training samples and `k` monitored samples the detector is
//!
//! ```text
//! Γ(m,k) = (Σ_{i=m+1}^{m+k} X_i - (k/m) Σ_{i=1}^{m} X_i) / ω̂_m
//! ```
//!
//! and monitoring stops at the first `k` with `|Γ(m,k)| ≥ c · g_γ(m,k)`,
//! `g_γ(m,k) = √m (1 + k/m) (k/(k+m))^γ`. `ω̂_m` is the long-run standard
//! deviation of the training sample (square root of the Bartlett estimate)
//! and stays frozen while monitoring.

use serde::{Deserialize, Serialize};

use crate::critical::{check_gamma, CriticalTable};
use crate::error::{invalid, Error, Result};
use crate::offline::{bartlett_lrv, LrvConfig};

pub const DEFAULT_MIN_TRAINING: usize = 250;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OnlineConfig {
    pub gamma: f64,
    /// Confidence level; the false-alarm probability is `1 - alpha`.
    pub alpha: f64,
    /// Monitoring horizon `K`.
    pub horizon: usize,
    pub min_training: usize,
    pub lrv: LrvConfig,
}

impl Default for OnlineConfig {
    fn default() -> Self {
        Self {
            gamma: 0.0,
            alpha: 0.95,
            horizon: 100,
            min_training: DEFAULT_MIN_TRAINING,
            lrv: LrvConfig::default(),
        }
    }
}

impl OnlineConfig {
    pub fn validate(&self) -> Result<()> {
        check_gamma(self.gamma)?;
        if self.horizon == 0 {
            return Err(invalid("monitoring horizon K must be positive"));
        }
        if self.min_training < 2 {
            return Err(invalid("minimum training length must be at least 2"));
        }
        Ok(())
    }
}

/// `g_γ(m,k)`. Zero at `k = 0` whenever `γ > 0`.
pub fn weight(m: usize, k: usize, gamma: f64) -> f64 {
    let (m, k) = (m as f64, k as f64);
    m.sqrt() * (1.0 + k / m) * (k / (k + m)).powf(gamma)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Decision {
    Continue,
    Detected(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OnlineMonitorState {
    m: usize,
    train_sum: f64,
    omega_hat: f64,
    critical_value: f64,
    k: usize,
    monitor_sum: f64,
    detector: f64,
    stopped_at: Option<usize>,
}

impl OnlineMonitorState {
    /// Trains on `training` using the critical value for `cfg.alpha`/`cfg.gamma`.
    pub fn train(training: &[f64], cfg: &OnlineConfig, table: &CriticalTable) -> Result<Self> {
        Self::train_with_critical(training, cfg, table.online(cfg.alpha, cfg.gamma)?)
    }

    pub fn train_with_critical(
        training: &[f64],
        cfg: &OnlineConfig,
        critical_value: f64,
    ) -> Result<Self> {
        cfg.validate()?;
        if training.len() < cfg.min_training {
            return Err(Error::InsufficientTraining {
                needed: cfg.min_training,
                got: training.len(),
            });
        }
        let omega_hat = bartlett_lrv(training, &cfg.lrv)?.sqrt();
        Self::with_omega(training, omega_hat, critical_value)
    }

    /// Skips estimation and uses the supplied long-run standard deviation.
    pub fn with_omega(training: &[f64], omega_hat: f64, critical_value: f64) -> Result<Self> {
        if training.is_empty() {
            return Err(Error::InsufficientTraining { needed: 1, got: 0 });
        }
        if omega_hat.is_nan() || omega_hat <= 0.0 {
            return Err(Error::DegenerateVariance { value: omega_hat, floor: 0.0 });
        }
        Ok(Self {
            m: training.len(),
            train_sum: training.iter().sum(),
            omega_hat,
            critical_value,
            k: 0,
            monitor_sum: 0.0,
            detector: 0.0,
            stopped_at: None,
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn omega_hat(&self) -> f64 {
        self.omega_hat
    }

    pub fn critical_value(&self) -> f64 {
        self.critical_value
    }

    pub fn train_mean(&self) -> f64 {
        self.train_sum / self.m as f64
    }

    /// Current `Γ(m,k)`.
    pub fn detector(&self) -> f64 {
        self.detector
    }

    /// `c · g_γ(m,k)` at the current `k`.
    pub fn threshold(&self, gamma: f64) -> f64 {
        self.critical_value * weight(self.m, self.k, gamma)
    }

    pub fn stopped_at(&self) -> Option<usize> {
        self.stopped_at
    }

    /// Consumes one monitored sample.
    pub fn step(&self, x: f64, cfg: &OnlineConfig) -> Result<(Self, Decision)> {
        let mut next = *self;
        let d = next.step_mut(x, cfg)?;
        Ok((next, d))
    }

    pub fn step_mut(&mut self, x: f64, cfg: &OnlineConfig) -> Result<Decision> {
        if let Some(k) = self.stopped_at {
            return Err(Error::AlreadyStopped(k));
        }
        if self.k >= cfg.horizon {
            return Err(Error::HorizonExhausted(cfg.horizon));
        }
        self.k += 1;
        self.monitor_sum += x;
        let k = self.k as f64;
        self.detector = (self.monitor_sum - k / self.m as f64 * self.train_sum) / self.omega_hat;
        if self.detector.abs() >= self.threshold(cfg.gamma) {
            self.stopped_at = Some(self.k);
            Ok(Decision::Detected(self.k))
        } else {
            Ok(Decision::Continue)
        }
    }
}

/// One point of a monitoring run, for plotting and diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub k: usize,
    pub detector: f64,
    pub threshold: f64,
}

/// Folds [`OnlineMonitorState::step`] over `monitored` (up to the horizon),
/// returning the final state and the detector trajectory.
pub fn monitor_window(
    mut state: OnlineMonitorState,
    monitored: &[f64],
    cfg: &OnlineConfig,
) -> Result<(OnlineMonitorState, Vec<TrajectoryPoint>)> {
    let mut traj = Vec::with_capacity(monitored.len().min(cfg.horizon));
    for &x in monitored.iter().take(cfg.horizon) {
        let d = state.step_mut(x, cfg)?;
        traj.push(TrajectoryPoint {
            k: state.k,
            detector: state.detector,
            threshold: state.threshold(cfg.gamma),
        });
        if let Decision::Detected(_) = d {
            break;
        }
    }
    Ok((state, traj))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn cfg(horizon: usize) -> OnlineConfig {
        OnlineConfig { horizon, min_training: 4, ..OnlineConfig::default() }
    }

    #[test]
    fn weight_examples() {
        assert!((weight(100, 100, 0.0) - 20.0).abs() < 1e-12);
        let expected = 20.0 * 0.5f64.powf(0.25);
        assert!((weight(100, 100, 0.25) - expected).abs() < 1e-12);
        assert!((weight(100, 100, 0.25) - 16.818).abs() < 1e-3);
        assert_eq!(weight(100, 0, 0.3), 0.0);
        let w: Vec<f64> = (1..200).map(|k| weight(50, k, 0.0)).collect();
        assert!(w.windows(2).all(|p| p[1] > p[0]));
    }

    #[test]
    fn hand_example_detector() {
        let s = OnlineMonitorState::with_omega(&[1.0; 4], 1.0, 1e9).unwrap();
        let c = cfg(10);
        let (s, d1) = s.step(3.0, &c).unwrap();
        assert_eq!(d1, Decision::Continue);
        let (s, _) = s.step(3.0, &c).unwrap();
        assert_eq!(s.k(), 2);
        assert!((s.detector() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn mean_level_never_fires() {
        let train = [1.0, 3.0, 2.0, 2.0, 1.0, 3.0];
        let mut s = OnlineMonitorState::with_omega(&train, 0.5, 1e-6).unwrap();
        for _ in 0..50 {
            let d = s.step_mut(2.0, &cfg(50)).unwrap();
            assert_eq!(s.detector(), 0.0);
            // threshold is tiny but positive, |Γ| = 0 stays below it
            assert_eq!(d, Decision::Continue);
        }
        assert!(matches!(s.step_mut(2.0, &cfg(50)), Err(Error::HorizonExhausted(50))));
    }

    #[test]
    fn stopped_state_is_terminal() {
        let mut s = OnlineMonitorState::with_omega(&[0.0, 1.0], 1.0, 0.1).unwrap();
        let c = cfg(10);
        assert_eq!(s.step_mut(10.0, &c).unwrap(), Decision::Detected(1));
        assert_eq!(s.stopped_at(), Some(1));
        assert!(matches!(s.step(0.5, &c), Err(Error::AlreadyStopped(1))));
        assert_eq!(s.stopped_at(), Some(1));
    }

    #[test]
    fn training_errors() {
        let c = OnlineConfig::default();
        assert!(matches!(
            OnlineMonitorState::train_with_critical(&[1.0; 250], &c, 2.0),
            Err(Error::DegenerateVariance { .. })
        ));
        let x: Vec<f64> = (0..249).map(|i| (i % 7) as f64).collect();
        assert!(matches!(
            OnlineMonitorState::train_with_critical(&x, &c, 2.0),
            Err(Error::InsufficientTraining { needed: 250, got: 249 })
        ));
    }

    #[test]
    fn omega_hat_on_standard_noise() {
        // sampling spread of the Bartlett estimate at m = 250 over 200 seeds
        let c = OnlineConfig::default();
        for seed in 0..200 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x: Vec<f64> = (0..250).map(|_| StandardNormal.sample(&mut rng)).collect();
            let s = OnlineMonitorState::train_with_critical(&x, &c, 2.0).unwrap();
            assert!((0.6..=1.4).contains(&s.omega_hat()), "seed {seed}: {}", s.omega_hat());
        }
    }

    #[test]
    fn noiseless_shift_grows() {
        let mut s = OnlineMonitorState::with_omega(&[0.0, 1.0, 0.0, 1.0], 1.0, 1e9).unwrap();
        let c = cfg(200);
        let mut prev = 0.0;
        for k in 1..=150 {
            s.step_mut(1.5, &c).unwrap();
            if k >= 20 {
                assert!(s.detector().abs() > prev);
            }
            prev = s.detector().abs();
        }
    }

    proptest! {
        #[test]
        fn location_invariance(
            train in prop::collection::vec(-5.0f64..5.0, 10..40),
            mon in prop::collection::vec(-5.0f64..5.0, 1..30),
            c in -1e3f64..1e3,
        ) {
            let shift = |v: &[f64]| v.iter().map(|x| x + c).collect::<Vec<_>>();
            let cf = OnlineConfig { horizon: 100, ..cfg(100) };
            let a = OnlineMonitorState::with_omega(&train, 1.3, 1e9).unwrap();
            let b = OnlineMonitorState::with_omega(&shift(&train), 1.3, 1e9).unwrap();
            let (a, _) = monitor_window(a, &mon, &cf).unwrap();
            let (b, _) = monitor_window(b, &shift(&mon), &cf).unwrap();
            prop_assert!((a.detector() - b.detector()).abs() < 1e-7 * (1.0 + c.abs()));
        }
    }
}
