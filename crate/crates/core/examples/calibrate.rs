//! Prints pre/post-onset metric levels for a few seeds of each attack.

use std::time::Instant;

use sdwsn_cpd::sim::{simulate, AttackKind, ScenarioConfig};

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

fn merge(a: &mut serde_json::Value, b: &serde_json::Value) {
    match (a, b) {
        (serde_json::Value::Object(a), serde_json::Value::Object(b)) => {
            for (k, v) in b {
                merge(a.entry(k.clone()).or_insert(serde_json::Value::Null), v);
            }
        }
        (a, b) => *a = b.clone(),
    }
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let nodes: usize = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(100);
    let frac: f64 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(0.2);
    let reps: u64 = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(5);
    for kind in [AttackKind::None, AttackKind::Fdff, AttackKind::Fni] {
        let (mut cr, mut dd, mut pre_d) = (0.0, 0.0, 0.0);
        let t0 = Instant::now();
        for seed in 1..=reps {
            let mut v = serde_json::to_value(ScenarioConfig::new(nodes, kind, frac, seed)).unwrap();
            if let Ok(extra) = std::env::var("SIM_OVERRIDE") {
                let extra: serde_json::Value = serde_json::from_str(&extra).unwrap();
                merge(&mut v, &extra);
            }
            let cfg: ScenarioConfig = serde_json::from_value(v).unwrap();
            let tr = simulate(&cfg).unwrap();
            let d = tr.delivery_rate.values();
            let c = tr.control_overhead.values();
            let on = tr.attack_onset_index;
            let (dp, cp) = (mean(&d[15..on]), mean(&c[15..on]));
            let (dq, cq) = (mean(&d[on + 30..]), mean(&c[on + 30..]));
            if std::env::var("PER_SEED").is_ok() {
                println!("    {kind} seed {seed}: ratio {:.2} drop {:.2} attackers {:?}", cq / cp, 100.0 * (dp - dq), tr.attackers);
            }
            cr += cq / cp;
            dd += 100.0 * (dp - dq);
            pre_d += dp;
            if seed == 1 {
                let show = |v: &[f64]| v.iter().map(|x| format!("{x:.3}")).collect::<Vec<_>>().join(" ");
                println!("  {kind} d[{}..]: {}", on - 5, show(&d[on - 5..on + 20]));
                println!("  {kind} c[{}..]: {}", on - 5, show(&c[on - 5..on + 20]));
            }
        }
        let r = reps as f64;
        println!(
            "{kind}: pre delivery {:.4}  control ratio {:.3}  delivery drop {:.2} pts  ({:.2}s/run)",
            pre_d / r,
            cr / r,
            dd / r,
            t0.elapsed().as_secs_f64() / r
        );
    }
}
