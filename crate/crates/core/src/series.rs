//! Fixed-interval metric streams and the small amount of descriptive
//! statistics the detectors share.

use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default aggregation window of the simulated network.
pub const DEFAULT_SAMPLE_INTERVAL: Duration = Duration::from_secs(120);

/// Samples dropped from the head of every trace while the network bootstraps.
pub const DEFAULT_BOOTSTRAP_DISCARD: usize = 15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MetricKind {
    DataDeliveryRate,
    ControlOverhead,
}

impl MetricKind {
    pub const ALL: [MetricKind; 2] = [MetricKind::DataDeliveryRate, MetricKind::ControlOverhead];

    /// Short tag used in file names and CSV columns.
    pub fn tag(self) -> &'static str {
        match self {
            MetricKind::DataDeliveryRate => "delivery",
            MetricKind::ControlOverhead => "control",
        }
    }
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for MetricKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "delivery" | "delivery_rate" | "DataDeliveryRate" => Ok(MetricKind::DataDeliveryRate),
            "control" | "control_overhead" | "ControlOverhead" => Ok(MetricKind::ControlOverhead),
            other => Err(Error::Parse(format!("unknown metric kind `{other}`"))),
        }
    }
}

/// Ordered samples of one network metric taken at a uniform interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSeries {
    kind: MetricKind,
    values: Vec<f64>,
    sample_interval: Duration,
    start_index_offset: usize,
}

impl MetricSeries {
    pub fn new(kind: MetricKind, values: Vec<f64>) -> Result<Self> {
        Self::with_layout(kind, values, DEFAULT_SAMPLE_INTERVAL, 0)
    }

    pub fn with_layout(
        kind: MetricKind,
        values: Vec<f64>,
        sample_interval: Duration,
        start_index_offset: usize,
    ) -> Result<Self> {
        if sample_interval.is_zero() {
            return Err(Error::InvalidParameter("sample interval must be positive".into()));
        }
        for (i, &v) in values.iter().enumerate() {
            let ok = match kind {
                MetricKind::DataDeliveryRate => (0.0..=1.0).contains(&v),
                MetricKind::ControlOverhead => v.is_finite() && v >= 0.0,
            };
            if !ok {
                return Err(Error::InvalidParameter(format!(
                    "{kind} sample {i} out of range: {v}"
                )));
            }
        }
        Ok(Self { kind, values, sample_interval, start_index_offset })
    }

    pub fn kind(&self) -> MetricKind {
        self.kind
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sample_interval(&self) -> Duration {
        self.sample_interval
    }

    /// Index of `values()[0]` in the raw trace this series came from.
    pub fn start_index_offset(&self) -> usize {
        self.start_index_offset
    }

    /// Contiguous subseries `[from, to)`; the offset tracks the raw trace index.
    pub fn slice(&self, from: usize, to: usize) -> Result<Self> {
        if from >= to || to > self.values.len() {
            return Err(Error::Range { from, to, len: self.values.len() });
        }
        Ok(Self {
            kind: self.kind,
            values: self.values[from..to].to_vec(),
            sample_interval: self.sample_interval,
            start_index_offset: self.start_index_offset + from,
        })
    }

    /// Drops the first `n` samples (network bootstrap). Detector indices are
    /// relative to the returned series.
    pub fn discard_bootstrap(&self, n: usize) -> Result<Self> {
        self.slice(n, self.values.len())
    }

    /// Writes the `index,value` trace format, indices counted in the raw trace.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "index,value")?;
        for (i, v) in self.values.iter().enumerate() {
            writeln!(w, "{},{}", i + self.start_index_offset, v)?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(kind: MetricKind, r: R) -> Result<Self> {
        let mut lines = r.lines();
        match lines.next() {
            Some(Ok(h)) if h.trim() == "index,value" => {}
            Some(Ok(h)) => return Err(Error::Parse(format!("bad trace header `{h}`"))),
            Some(Err(e)) => return Err(e.into()),
            None => return Err(Error::Parse("empty trace file".into())),
        }
        let mut values = Vec::new();
        let mut first_index = None;
        for (row, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let (idx, val) = line
                .split_once(',')
                .ok_or_else(|| Error::Parse(format!("trace row {row}: `{line}`")))?;
            let idx: usize = idx
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("trace row {row}: bad index `{idx}`")))?;
            let val: f64 = val
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("trace row {row}: bad value `{val}`")))?;
            let start = *first_index.get_or_insert(idx);
            if idx != start + values.len() {
                return Err(Error::Parse(format!("trace row {row}: non-contiguous index {idx}")));
            }
            values.push(val);
        }
        Self::with_layout(kind, values, DEFAULT_SAMPLE_INTERVAL, first_index.unwrap_or(0))
    }
}

/// Training / monitoring layout over one series.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WindowSpec {
    pub train_start: usize,
    pub monitor_start: usize,
    pub monitor_length: usize,
}

impl WindowSpec {
    pub fn new(train_start: usize, monitor_start: usize, monitor_length: usize) -> Result<Self> {
        if train_start >= monitor_start {
            return Err(Error::InvalidParameter(format!(
                "training start {train_start} must precede monitoring start {monitor_start}"
            )));
        }
        if monitor_length == 0 {
            return Err(Error::InvalidParameter("monitoring length must be positive".into()));
        }
        Ok(Self { train_start, monitor_start, monitor_length })
    }

    pub fn is_complete_for(&self, len: usize) -> bool {
        self.monitor_start + self.monitor_length <= len
    }
}

pub fn sample_mean(x: &[f64]) -> Result<f64> {
    if x.is_empty() {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    Ok(x.iter().sum::<f64>() / x.len() as f64)
}

/// Biased (divide-by-N) sample autocovariance at `lag`.
pub fn sample_autocovariance(x: &[f64], lag: usize) -> Result<f64> {
    let n = x.len();
    if lag >= n {
        return Err(Error::Range { from: lag, to: lag + 1, len: n });
    }
    if n < lag + 2 {
        return Err(Error::InsufficientData { needed: lag + 2, got: n });
    }
    let mean = sample_mean(x)?;
    Ok(autocov_centered(x, mean, lag))
}

pub(crate) fn autocov_centered(x: &[f64], mean: f64, lag: usize) -> f64 {
    let n = x.len();
    let s: f64 = x[lag..]
        .iter()
        .zip(&x[..n - lag])
        .map(|(a, b)| (a - mean) * (b - mean))
        .sum();
    s / n as f64
}
