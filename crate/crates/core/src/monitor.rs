//! The full detection loop over one metric stream.
//!
//! 1. Fix the monitoring start `m_s` and horizon `K`.
//! 2. Run the offline test on the history since the last accepted change
//!    point. A rejection moves the start of the training sample to the
//!    estimated change point. Training shorter than `min_training` is
//!    extended forward in time, which pushes `m_s` back.
//! 3. Train the online detector on `[start, m_s)` and monitor `(m_s, m_s + K]`.
//! 4. On a stop, label the direction with the MACD histogram.
//! 5. Restart at `k_cp + d` after a detection, or at `m_s + K` otherwise.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::critical::CriticalTable;
use crate::error::{Error, Result};
use crate::offline::{offline_test_with_critical, LrvConfig, MIN_OFFLINE_LEN};
use crate::online::{
    monitor_window, OnlineConfig, OnlineMonitorState, TrajectoryPoint,
    DEFAULT_MIN_TRAINING,
};
use crate::series::{sample_mean, MetricKind, MetricSeries};
use crate::trend::{trend_indicator, MacdConfig};

/// Samples on each side of a change used for the magnitude estimate.
const MAGNITUDE_SPAN: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    Up,
    Down,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Up => "up",
            Direction::Down => "down",
        }
    }
}

impl std::str::FromStr for Direction {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "up" => Ok(Direction::Up),
            "down" => Ok(Direction::Down),
            o => Err(Error::Parse(format!("unknown direction `{o}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChangeEvent {
    /// Index (within the analysed series) of the sample that stopped the monitor.
    pub cp_index: usize,
    pub direction: Direction,
    pub metric: MetricKind,
    /// Monitored samples consumed before stopping (`k*`).
    pub detection_delay: usize,
    /// Mean after minus mean before `cp_index`.
    pub magnitude: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonitorConfig {
    pub horizon: usize,
    pub alpha: f64,
    pub gamma: f64,
    /// Quiet period after a detection before monitoring resumes.
    pub quiet_period: usize,
    pub min_training: usize,
    pub macd: MacdConfig,
    pub lrv: LrvConfig,
}

impl Default for MonitorConfig {
    fn default() -> Self {
        Self {
            horizon: 100,
            alpha: 0.95,
            gamma: 0.0,
            quiet_period: 10,
            min_training: DEFAULT_MIN_TRAINING,
            macd: MacdConfig::default(),
            lrv: LrvConfig::default(),
        }
    }
}

impl MonitorConfig {
    pub fn online(&self) -> OnlineConfig {
        OnlineConfig {
            gamma: self.gamma,
            alpha: self.alpha,
            horizon: self.horizon,
            min_training: self.min_training,
            lrv: self.lrv,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.online().validate()?;
        self.macd.validate()
    }
}

/// One pass of steps 2-3, kept for diagnostics and plotting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowRecord {
    pub train_start: usize,
    pub monitor_start: usize,
    pub m: usize,
    pub omega_hat: f64,
    pub trajectory: Vec<TrajectoryPoint>,
    pub stopped_at: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MonitorRun {
    pub events: Vec<ChangeEvent>,
    pub windows: Vec<WindowRecord>,
}

pub fn run_monitor(
    series: &MetricSeries,
    cfg: &MonitorConfig,
    table: &CriticalTable,
) -> Result<Vec<ChangeEvent>> {
    Ok(run_monitor_detailed(series.values(), series.kind(), cfg, table)?.events)
}

pub fn run_monitor_detailed(
    x: &[f64],
    metric: MetricKind,
    cfg: &MonitorConfig,
    table: &CriticalTable,
) -> Result<MonitorRun> {
    cfg.validate()?;
    let offline_cv = table.offline(cfg.alpha)?;
    let online_cv = table.online(cfg.alpha, cfg.gamma)?;
    run_with_critical(x, metric, cfg, offline_cv, online_cv)
}

pub fn run_with_critical(
    x: &[f64],
    metric: MetricKind,
    cfg: &MonitorConfig,
    offline_cv: f64,
    online_cv: f64,
) -> Result<MonitorRun> {
    let n = x.len();
    if n < cfg.min_training + 1 {
        return Err(Error::InsufficientData { needed: cfg.min_training + 1, got: n });
    }
    let online = cfg.online();
    let mut run = MonitorRun::default();
    let mut seg_start = 0;
    let mut ms = cfg.min_training;

    while ms < n {
        if ms - seg_start >= MIN_OFFLINE_LEN {
            match offline_test_with_critical(&x[seg_start..ms], &cfg.lrv, offline_cv) {
                Ok(r) => {
                    if let Some(cp) = r.cp_index {
                        seg_start += cp;
                    }
                }
                Err(Error::DegenerateVariance { .. }) => {}
                Err(e) => return Err(e),
            }
        }
        if ms - seg_start < cfg.min_training {
            ms = seg_start + cfg.min_training;
            continue;
        }

        let training = &x[seg_start..ms];
        let state = match OnlineMonitorState::train_with_critical(training, &online, online_cv) {
            Ok(s) => s,
            // a flat history cannot be normalised; nothing to monitor against
            Err(Error::DegenerateVariance { .. }) => {
                ms += cfg.horizon;
                continue;
            }
            Err(e) => return Err(e),
        };
        let end = (ms + cfg.horizon).min(n);
        let (state, trajectory) = monitor_window(state, &x[ms..end], &online)?;
        run.windows.push(WindowRecord {
            train_start: seg_start,
            monitor_start: ms,
            m: state.m(),
            omega_hat: state.omega_hat(),
            trajectory,
            stopped_at: state.stopped_at(),
        });

        match state.stopped_at() {
            Some(k) => {
                let t = ms + k - 1;
                let magnitude = magnitude_at(x, t)?;
                let direction = match trend_indicator(x, t, &cfg.macd) {
                    Ok(ti) if ti > 0.0 => Direction::Up,
                    Ok(ti) if ti < 0.0 => Direction::Down,
                    _ if magnitude >= 0.0 => Direction::Up,
                    _ => Direction::Down,
                };
                run.events.push(ChangeEvent {
                    cp_index: t,
                    direction,
                    metric,
                    detection_delay: k,
                    magnitude,
                });
                ms = t + cfg.quiet_period.max(1);
            }
            None => ms += cfg.horizon,
        }
    }
    Ok(run)
}

fn magnitude_at(x: &[f64], t: usize) -> Result<f64> {
    let span = MAGNITUDE_SPAN.min(t).min(x.len() - t);
    if span == 0 {
        return Ok(0.0);
    }
    Ok(sample_mean(&x[t..t + span])? - sample_mean(&x[t - span..t])?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AttackHint {
    FdffLike,
    FniLike,
    Unknown,
}

impl AttackHint {
    pub fn as_str(self) -> &'static str {
        match self {
            AttackHint::FdffLike => "fdff-like",
            AttackHint::FniLike => "fni-like",
            AttackHint::Unknown => "unknown",
        }
    }
}

/// Infers the attack type from which metric changed first: control overhead
/// reacts first to flow-request flooding, delivery rate to topology poisoning.
pub fn classify_attack_hint(events_by_metric: &BTreeMap<MetricKind, Vec<ChangeEvent>>) -> AttackHint {
    let first = |m: MetricKind| {
        events_by_metric.get(&m).and_then(|ev| ev.iter().map(|e| e.cp_index).min())
    };
    match (first(MetricKind::ControlOverhead), first(MetricKind::DataDeliveryRate)) {
        (Some(c), Some(d)) if c < d => AttackHint::FdffLike,
        (Some(c), Some(d)) if d < c => AttackHint::FniLike,
        (Some(_), None) => AttackHint::FdffLike,
        (None, Some(_)) => AttackHint::FniLike,
        _ => AttackHint::Unknown,
    }
}
