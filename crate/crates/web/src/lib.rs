//! wasm-bindgen bindings for the browser demo in `www/`.
//!
//! Every export returns a JSON string. The pure functions behind them are
//! plain Rust so they can be tested natively.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use serde::Serialize;
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use sdwsn_cpd::critical::{CriticalTable, McSettings, DEFAULT_ALPHAS};
use sdwsn_cpd::experiment::EXPERIMENT_MIN_TRAINING;
use sdwsn_cpd::monitor::{classify_attack_hint, run_monitor_detailed, MonitorConfig, WindowRecord};
use sdwsn_cpd::offline::{bartlett_lrv, cusum_path, offline_test_with_critical, LrvConfig};
use sdwsn_cpd::series::{MetricKind, DEFAULT_BOOTSTRAP_DISCARD};
use sdwsn_cpd::sim::{simulate, AttackKind, ScenarioConfig};
use sdwsn_cpd::Result;

/// Smaller Monte-Carlo budget than the CLI so the page stays responsive.
const DEMO_MC: McSettings = McSettings { paths: 20_000, grid: 250, seed: 7 };

fn table() -> Result<&'static CriticalTable> {
    static TABLE: OnceLock<CriticalTable> = OnceLock::new();
    if let Some(t) = TABLE.get() {
        return Ok(t);
    }
    let t = CriticalTable::compute(&DEFAULT_ALPHAS, &[0.0], &DEMO_MC)?;
    Ok(TABLE.get_or_init(|| t))
}

pub fn simulate_json(nodes: usize, attack: &str, attackers_pct: f64, seed: u64) -> Result<Value> {
    let attack: AttackKind = attack.parse()?;
    let frac = if attack == AttackKind::None { 0.0 } else { attackers_pct / 100.0 };
    let trace = simulate(&ScenarioConfig::new(nodes, attack, frac, seed))?;
    Ok(json!({
        "delivery": trace.delivery_rate.values(),
        "control": trace.control_overhead.values(),
        "onset": trace.attack_onset_index,
        "attackers": trace.attackers,
        "discard": DEFAULT_BOOTSTRAP_DISCARD,
    }))
}

#[derive(Serialize)]
struct Window {
    monitor_start: usize,
    train_start: usize,
    stopped_at: Option<usize>,
    detector: Vec<f64>,
    threshold: Vec<f64>,
}

impl Window {
    fn shifted(w: &WindowRecord, offset: usize) -> Self {
        Self {
            monitor_start: w.monitor_start + offset,
            train_start: w.train_start + offset,
            stopped_at: w.stopped_at,
            detector: w.trajectory.iter().map(|p| p.detector).collect(),
            threshold: w.trajectory.iter().map(|p| p.threshold).collect(),
        }
    }
}

/// Runs the monitor on both metrics after dropping the bootstrap samples.
/// Indices in the result refer to the full series.
pub fn detect_json(delivery: &[f64], control: &[f64], horizon: usize, alpha: f64) -> Result<Value> {
    let cfg = MonitorConfig { horizon, alpha, min_training: EXPERIMENT_MIN_TRAINING, ..MonitorConfig::default() };
    let off = DEFAULT_BOOTSTRAP_DISCARD.min(delivery.len()).min(control.len());
    let mut events = BTreeMap::new();
    let mut out = serde_json::Map::new();
    for (kind, x) in [(MetricKind::DataDeliveryRate, delivery), (MetricKind::ControlOverhead, control)] {
        let mut run = run_monitor_detailed(&x[off..], kind, &cfg, table()?)?;
        for e in &mut run.events {
            e.cp_index += off;
        }
        let windows: Vec<Window> = run.windows.iter().map(|w| Window::shifted(w, off)).collect();
        out.insert(kind.tag().to_string(), json!({ "events": run.events, "windows": windows }));
        events.insert(kind, run.events);
    }
    out.insert("hint".into(), json!(format!("{:?}", classify_attack_hint(&events))));
    Ok(Value::Object(out))
}

/// Normalised CUSUM path of a segment with the offline test decision.
pub fn offline_json(x: &[f64], alpha: f64) -> Result<Value> {
    let lrv_cfg = LrvConfig::default();
    let cv = table()?.offline(alpha)?;
    let res = offline_test_with_critical(x, &lrv_cfg, cv)?;
    let lrv = bartlett_lrv(x, &lrv_cfg)?;
    let path: Vec<f64> = cusum_path(x)?.into_iter().map(|c| c * c / lrv).collect();
    Ok(json!({
        "path": path,
        "statistic": res.statistic,
        "critical": res.critical_value,
        "reject": res.reject_h0,
        "cp_index": res.cp_index,
    }))
}

fn to_js(r: Result<Value>) -> std::result::Result<String, JsValue> {
    r.map(|v| v.to_string()).map_err(|e| JsValue::from_str(&format!("{} ({})", e, e.kind())))
}

#[wasm_bindgen(js_name = simulateTrace)]
pub fn simulate_trace(nodes: usize, attack: &str, attackers_pct: f64, seed: u32) -> std::result::Result<String, JsValue> {
    to_js(simulate_json(nodes, attack, attackers_pct, seed.into()))
}

#[wasm_bindgen(js_name = detectChanges)]
pub fn detect_changes(delivery: Vec<f64>, control: Vec<f64>, horizon: usize, alpha: f64) -> std::result::Result<String, JsValue> {
    to_js(detect_json(&delivery, &control, horizon, alpha))
}

#[wasm_bindgen(js_name = offlineScan)]
pub fn offline_scan(values: Vec<f64>, alpha: f64) -> std::result::Result<String, JsValue> {
    to_js(offline_json(&values, alpha))
}
