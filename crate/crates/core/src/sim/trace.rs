use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::config::ScenarioConfig;
use super::topology::NodeId;
use crate::error::{Error, Result};
use crate::series::{MetricKind, MetricSeries, DEFAULT_BOOTSTRAP_DISCARD};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowCounts {
    pub data_sent: u64,
    /// Packets generated in this window that eventually reached the sink.
    pub data_received: u64,
    pub control_sent: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimTrace {
    pub delivery_rate: MetricSeries,
    pub control_overhead: MetricSeries,
    pub attack_onset_index: usize,
    pub per_window_counts: Vec<WindowCounts>,
    pub attackers: Vec<NodeId>,
}

impl SimTrace {
    pub(crate) fn from_counts(cfg: &ScenarioConfig, counts: Vec<WindowCounts>, attackers: Vec<NodeId>) -> Result<Self> {
        let interval = Duration::from_secs(cfg.window_s);
        let delivery = counts
            .iter()
            .map(|c| if c.data_sent == 0 { 0.0 } else { c.data_received as f64 / c.data_sent as f64 })
            .collect();
        let control = counts.iter().map(|c| c.control_sent as f64).collect();
        Ok(Self {
            delivery_rate: MetricSeries::with_layout(MetricKind::DataDeliveryRate, delivery, interval, 0)?,
            control_overhead: MetricSeries::with_layout(MetricKind::ControlOverhead, control, interval, 0)?,
            attack_onset_index: cfg.onset_window(),
            per_window_counts: counts,
            attackers,
        })
    }

    pub fn series(&self, kind: MetricKind) -> &MetricSeries {
        match kind {
            MetricKind::DataDeliveryRate => &self.delivery_rate,
            MetricKind::ControlOverhead => &self.control_overhead,
        }
    }
}

/// Sidecar of a trace pair: `key=value` lines.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceMeta {
    pub attack_onset_index: usize,
    pub seed: u64,
    pub nodes: usize,
    pub attack: String,
    pub attackers_pct: f64,
    pub discard: usize,
}

impl TraceMeta {
    pub fn for_run(cfg: &ScenarioConfig) -> Self {
        Self {
            attack_onset_index: cfg.onset_window(),
            seed: cfg.seed,
            nodes: cfg.node_count,
            attack: cfg.attack_kind.to_string(),
            attackers_pct: cfg.attacker_fraction * 100.0,
            discard: DEFAULT_BOOTSTRAP_DISCARD,
        }
    }

    pub fn to_text(&self) -> String {
        format!(
            "attack_onset_index={}\nseed={}\nnodes={}\nattack={}\nattackers_pct={}\ndiscard={}\n",
            self.attack_onset_index, self.seed, self.nodes, self.attack, self.attackers_pct, self.discard
        )
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut kv = BTreeMap::new();
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("meta line without `=`: {line}")))?;
            kv.insert(k.trim().to_string(), v.trim().to_string());
        }
        fn field<T: std::str::FromStr>(kv: &BTreeMap<String, String>, key: &str) -> Result<T> {
            kv.get(key)
                .ok_or_else(|| Error::Parse(format!("meta is missing `{key}`")))?
                .parse()
                .map_err(|_| Error::Parse(format!("meta field `{key}` is malformed")))
        }
        Ok(Self {
            attack_onset_index: field(&kv, "attack_onset_index")?,
            seed: field(&kv, "seed")?,
            nodes: field(&kv, "nodes").unwrap_or(0),
            attack: kv.get("attack").cloned().unwrap_or_else(|| "none".into()),
            attackers_pct: field(&kv, "attackers_pct").unwrap_or(0.0),
            discard: field(&kv, "discard").unwrap_or(DEFAULT_BOOTSTRAP_DISCARD),
        })
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse(&fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_text())?;
        Ok(())
    }
}
