use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AttackKind {
    None,
    Fdff,
    Fni,
}

impl AttackKind {
    pub fn as_str(self) -> &'static str {
        match self {
            AttackKind::None => "none",
            AttackKind::Fdff => "fdff",
            AttackKind::Fni => "fni",
        }
    }
}

impl fmt::Display for AttackKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AttackKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "none" => Ok(AttackKind::None),
            "fdff" => Ok(AttackKind::Fdff),
            "fni" => Ok(AttackKind::Fni),
            o => Err(Error::Parse(format!("unknown attack kind `{o}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Neighborhood {
    /// Up, down, left, right.
    Four,
    /// Including diagonals.
    Eight,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvictionPolicy {
    /// A full table rejects new rules.
    Reject,
    /// A full table evicts its least recently used rule.
    Lru,
}

/// Traffic and attack constants. These are not taken from any measured
/// network: they were tuned once so that the attack impacts land in the
/// target bands and then frozen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimTuning {
    /// Hard timeout of an installed flow rule.
    pub rule_timeout_s: f64,
    /// A node re-sends a flow request after this long without a reply.
    pub request_timeout_s: f64,
    /// Packets buffered per node while waiting for rules.
    pub pending_buffer: usize,
    /// Per-hop radio latency.
    pub hop_delay_ms: u64,
    /// Controller processing latency.
    pub controller_delay_ms: u64,
    /// Relative jitter of the periodic data and report timers.
    pub timer_jitter: f64,
    /// Loss probability of an idle channel.
    pub base_loss: f64,
    /// Extra loss probability per transmission heard in the previous
    /// contention bin (own node plus radio neighbours).
    pub loss_per_load: f64,
    pub max_loss: f64,
    pub contention_bin_ms: u64,
    /// Period at which each FDFF attacker hits every neighbour.
    pub fdff_period_s: f64,
    /// Probability that an FNI attacker rewrites an intercepted report.
    pub fni_rewrite_prob: f64,
    /// False neighbours written into a rewritten report.
    pub fni_fake_neighbors: usize,
    /// A failed unicast (next hop is not a radio neighbour) makes the sender
    /// drop the rule and tell the controller that the link is down.
    pub repair_on_failure: bool,
    /// The controller forgets a link that has not been reported for this long.
    pub link_ttl_s: f64,
    /// Flow requests re-sent before buffered packets are given up.
    pub max_request_retries: u32,
}

impl Default for SimTuning {
    fn default() -> Self {
        Self {
            rule_timeout_s: 300.0,
            request_timeout_s: 2.0,
            pending_buffer: 4,
            hop_delay_ms: 12,
            controller_delay_ms: 30,
            timer_jitter: 0.1,
            base_loss: 0.002,
            loss_per_load: 0.0,
            max_loss: 0.5,
            contention_bin_ms: 5_000,
            fdff_period_s: 39.0,
            fni_rewrite_prob: 0.25,
            fni_fake_neighbors: 1,
            repair_on_failure: true,
            link_ttl_s: 250.0,
            max_request_retries: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScenarioConfig {
    pub node_count: usize,
    pub attacker_fraction: f64,
    pub attack_kind: AttackKind,
    pub duration_s: u64,
    pub attack_onset_s: u64,
    pub window_s: u64,
    pub data_period_s: f64,
    pub neighbor_report_period_s: f64,
    pub tx_success: f64,
    /// `None` means unbounded.
    pub flow_table_capacity: Option<usize>,
    pub seed: u64,
    pub neighborhood: Neighborhood,
    pub eviction: EvictionPolicy,
    /// Keep attackers off the grid cells adjacent to the controller and sinks.
    pub exclude_near_infrastructure: bool,
    pub tuning: SimTuning,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            node_count: 36,
            attacker_fraction: 0.05,
            attack_kind: AttackKind::None,
            duration_s: 10 * 3600,
            attack_onset_s: 8 * 3600,
            window_s: 120,
            data_period_s: 60.0,
            neighbor_report_period_s: 120.0,
            tx_success: 1.0,
            flow_table_capacity: Some(8),
            seed: 1,
            neighborhood: Neighborhood::Four,
            eviction: EvictionPolicy::Reject,
            exclude_near_infrastructure: false,
            tuning: SimTuning::default(),
        }
    }
}

impl ScenarioConfig {
    pub fn new(node_count: usize, attack_kind: AttackKind, attacker_fraction: f64, seed: u64) -> Self {
        Self { node_count, attack_kind, attacker_fraction, seed, ..Self::default() }
    }

    pub fn grid_side(&self) -> usize {
        (self.node_count as f64).sqrt().round() as usize
    }

    /// `round(fraction * nodes)`, at least one when an attack is configured.
    pub fn attacker_count(&self) -> usize {
        if self.attack_kind == AttackKind::None {
            return 0;
        }
        ((self.attacker_fraction * self.node_count as f64).round() as usize).max(1)
    }

    pub fn window_count(&self) -> usize {
        (self.duration_s / self.window_s) as usize
    }

    pub fn onset_window(&self) -> usize {
        (self.attack_onset_s / self.window_s) as usize
    }

    pub fn validate(&self) -> Result<()> {
        let side = self.grid_side();
        if side < 3 || side * side != self.node_count {
            return Err(invalid(format!(
                "node count {} is not a square grid of side >= 3",
                self.node_count
            )));
        }
        if self.window_s == 0 || self.duration_s < self.window_s {
            return Err(invalid("duration must cover at least one window"));
        }
        if self.attack_onset_s >= self.duration_s {
            return Err(invalid("attack onset must precede the end of the run"));
        }
        if !(self.data_period_s > 0.0 && self.neighbor_report_period_s > 0.0) {
            return Err(invalid("traffic periods must be positive"));
        }
        if !(self.tx_success > 0.0 && self.tx_success <= 1.0) {
            return Err(invalid(format!("tx_success must lie in (0,1], got {}", self.tx_success)));
        }
        if self.flow_table_capacity == Some(0) {
            return Err(invalid("flow table capacity must be positive"));
        }
        if !(0.0..=1.0).contains(&self.attacker_fraction) {
            return Err(invalid("attacker fraction must lie in [0,1]"));
        }
        if self.attack_kind != AttackKind::None && self.attacker_fraction * self.node_count as f64 <= 0.0 {
            return Err(invalid("an attack needs at least one attacker"));
        }
        let t = &self.tuning;
        if !(t.fdff_period_s > 0.0 && t.rule_timeout_s > 0.0 && t.request_timeout_s > 0.0 && t.link_ttl_s > 0.0) {
            return Err(invalid("timer constants must be positive"));
        }
        if !(0.0..=1.0).contains(&t.fni_rewrite_prob) || !(0.0..1.0).contains(&t.timer_jitter) {
            return Err(invalid("probabilities must lie in [0,1]"));
        }
        if t.contention_bin_ms == 0 {
            return Err(invalid("contention bin must be positive"));
        }
        Ok(())
    }

    /// Parses a JSON scenario; omitted fields keep their defaults.
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }
}
