//! Acceptance suite. Runs without the libtest harness so that every
//! criterion prints exactly one PASS/FAIL line; the process fails when any
//! criterion fails.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use sdwsn_cpd::critical::{CriticalTable, McSettings};
use sdwsn_cpd::eval::{mad, EvalCell};
use sdwsn_cpd::experiment::{evaluate_results, run_scenario, DetectorGrid, ReplicationResult, Scenario};
use sdwsn_cpd::monitor::AttackHint;
use sdwsn_cpd::offline::{cusum_path, offline_test, LrvConfig};
use sdwsn_cpd::online::{monitor_window, OnlineConfig, OnlineMonitorState};
use sdwsn_cpd::series::MetricKind;
use sdwsn_cpd::sim::{simulate, AttackKind, ScenarioConfig};

const REPS: usize = 30;
const BASE_SEED: u64 = 1;

struct Report {
    failures: usize,
}

impl Report {
    fn check(&mut self, id: u32, name: &str, pass: bool, detail: String) {
        println!("criterion {id:>2} {:<34} {}  {detail}", format!("[{name}]"), if pass { "PASS" } else { "FAIL" });
        if !pass {
            self.failures += 1;
        }
    }
}

fn noise(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| StandardNormal.sample(rng)).collect()
}

fn median_usize(v: &mut [usize]) -> f64 {
    v.sort_unstable();
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2] as f64
    } else {
        (v[n / 2 - 1] + v[n / 2]) as f64 / 2.0
    }
}

/// Root of a monotone increasing function on `[lo, hi]`.
fn bisect(f: impl Fn(f64) -> f64, target: f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `P(sup_[0,1] |W| <= x)`.
fn sup_abs_wiener_cdf(x: f64) -> f64 {
    let pi = std::f64::consts::PI;
    (0..200)
        .map(|k| {
            let j = (2 * k + 1) as f64;
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            sign / j * (-(pi * pi) * j * j / (8.0 * x * x)).exp()
        })
        .sum::<f64>()
        * 4.0
        / pi
}

/// Kolmogorov distribution `P(sup |B| <= x)`.
fn kolmogorov_cdf(x: f64) -> f64 {
    1.0 - 2.0
        * (1..200)
            .map(|k| {
                let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
                sign * (-2.0 * (k * k) as f64 * x * x).exp()
            })
            .sum::<f64>()
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// 30-replication means of the post/pre control ratio and the delivery drop
/// in points. Pre is windows 15..onset, post the last 30 windows.
fn impact(attack: AttackKind) -> (f64, f64) {
    let (mut ratio, mut drop) = (0.0, 0.0);
    for rep in 0..REPS {
        let t = simulate(&ScenarioConfig::new(100, attack, 0.2, BASE_SEED + rep as u64)).unwrap();
        let on = t.attack_onset_index;
        let (d, c) = (t.delivery_rate.values(), t.control_overhead.values());
        let tail = d.len() - 30;
        ratio += mean(&c[tail..]) / mean(&c[15..on]);
        drop += 100.0 * (mean(&d[15..on]) - mean(&d[tail..]));
    }
    (ratio / REPS as f64, drop / REPS as f64)
}

fn cell(cells: &[EvalCell], metric: MetricKind, horizon: usize, alpha: f64) -> &EvalCell {
    cells
        .iter()
        .find(|c| c.metric == metric && c.horizon == horizon && (c.alpha - alpha).abs() < 1e-9)
        .expect("cell exists")
}

fn dtm_or_inf(c: &EvalCell) -> f64 {
    c.dtm.unwrap_or(f64::INFINITY)
}

fn hint_share(results: &[ReplicationResult], want: AttackHint) -> (usize, usize) {
    let mut detected = 0;
    let mut right = 0;
    for r in results {
        let c = r.cells.iter().find(|c| c.horizon == 100 && (c.alpha - 0.95).abs() < 1e-9).unwrap();
        if c.events.values().any(|e| !e.is_empty()) {
            detected += 1;
            if r.hint(100, 0.95) == Some(want) {
                right += 1;
            }
        }
    }
    (right, detected)
}

fn main() {
    let mut report = Report { failures: 0 };
    let t0 = Instant::now();
    let table = CriticalTable::standard().expect("critical values");
    println!("critical values computed in {:.1}s", t0.elapsed().as_secs_f64());
    let lrv = LrvConfig::default();

    // 1: empirical size of the offline test
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let rejections = (0..1000)
        .filter(|_| offline_test(&noise(&mut rng, 300), &lrv, 0.95, &table).unwrap().reject_h0)
        .count();
    let rate = rejections as f64 / 10.0;
    let secs = t.elapsed().as_secs_f64();
    report.check(
        1,
        "offline test size",
        (2.0..=8.0).contains(&rate) && secs < 60.0,
        format!("rejection rate {rate:.1}% (band 2-8%), {secs:.2}s"),
    );

    // 2: offline change-point location
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    let mut errs: Vec<usize> = (0..500)
        .map(|_| {
            let mut x = noise(&mut rng, 300);
            x[150..].iter_mut().for_each(|v| *v += 2.0);
            let r = offline_test(&x, &lrv, 0.95, &table).unwrap();
            r.cp_index.map_or(usize::MAX, |cp| cp.abs_diff(150))
        })
        .collect();
    let med = median_usize(&mut errs);
    report.check(2, "offline CP location", med <= 5.0, format!("median |cp - 150| = {med} (max 5)"));

    // 3 and 4: online false alarms and power
    let cfg = OnlineConfig { horizon: 150, alpha: 0.95, gamma: 0.0, ..OnlineConfig::default() };
    let run = |x: &[f64]| -> Option<usize> {
        let state = OnlineMonitorState::train(&x[..250], &cfg, &table).unwrap();
        monitor_window(state, &x[250..], &cfg).unwrap().0.stopped_at()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    let alarms = (0..1000).filter(|_| run(&noise(&mut rng, 400)).is_some()).count();
    let far = alarms as f64 / 10.0;
    report.check(3, "online false-alarm bound", far <= 8.0, format!("stopping frequency {far:.1}% (max 8%)"));

    let mut rng = ChaCha8Rng::seed_from_u64(104);
    let stops: Vec<Option<usize>> = (0..1000)
        .map(|_| {
            let mut x = noise(&mut rng, 400);
            x[250..].iter_mut().for_each(|v| *v += 2.0);
            run(&x)
        })
        .collect();
    let power = stops.iter().filter(|s| s.is_some()).count() as f64 / 10.0;
    let mut ks: Vec<usize> = stops.iter().map(|s| s.unwrap_or(usize::MAX)).collect();
    let med_k = median_usize(&mut ks);
    report.check(
        4,
        "online power",
        power >= 99.0 && med_k <= 25.0,
        format!("detection {power:.1}% (min 99%), median k* {med_k} (max 25)"),
    );

    // 5: Monte-Carlo quantiles against analytic series
    let online_exact = bisect(sup_abs_wiener_cdf, 0.95, 0.5, 5.0);
    let ks_exact = bisect(kolmogorov_cdf, 0.95, 0.3, 3.0);
    let online_mc = table.online(0.95, 0.0).unwrap();
    let offline_mc = table.offline(0.95).unwrap().sqrt();
    let mc = McSettings::default();
    report.check(
        5,
        "critical-value oracles",
        (online_mc - online_exact).abs() <= 0.02 && (offline_mc - ks_exact).abs() <= 0.02,
        format!(
            "sup|W| {online_mc:.4} vs {online_exact:.4}, sqrt offline {offline_mc:.4} vs KS {ks_exact:.4} ({} paths, grid {})",
            mc.paths, mc.grid
        ),
    );

    // 6: hand-computed values
    let path = cusum_path(&[1.0, 2.0, 3.0, 4.0]).unwrap();
    let path_ok = path.iter().zip([-0.75, -1.0, -0.75, 0.0]).all(|(a, b)| (a - b).abs() <= 1e-12);
    let gcfg = OnlineConfig { horizon: 10, min_training: 1, ..OnlineConfig::default() };
    let mut s = OnlineMonitorState::with_omega(&[1.0; 4], 1.0, 1e9).unwrap();
    s.step_mut(3.0, &gcfg).unwrap();
    s.step_mut(3.0, &gcfg).unwrap();
    let gamma_ok = (s.detector() - 4.0).abs() <= 1e-12;
    let m = mad(&[2.0, 3.0, 5.0, 9.0]).unwrap();
    report.check(
        6,
        "hand-computed exactness",
        path_ok && gamma_ok && m == 1.5,
        format!("cusum {path:?}, Gamma {}, mad {m}", s.detector()),
    );

    // 7 and 8: simulator calibration on the 100-node grid
    let (r, d) = impact(AttackKind::Fdff);
    report.check(
        7,
        "FDFF calibration",
        (2.5..=3.5).contains(&r) && (2.0..=4.0).contains(&d),
        format!("control ratio {r:.2} (2.5-3.5), delivery drop {d:.2} pts (2-4)"),
    );
    let (r, d) = impact(AttackKind::Fni);
    report.check(
        8,
        "FNI calibration",
        (1.7..=2.3).contains(&r) && (20.0..=70.0).contains(&d),
        format!("control ratio {r:.2} (1.7-2.3), delivery drop {d:.2} pts (20-70)"),
    );

    // 9 to 12: end-to-end runs
    let sweep_start = Instant::now();
    let grid = DetectorGrid::default();
    let fdff = run_scenario(&Scenario::new(100, AttackKind::Fdff, 0.2), REPS, BASE_SEED, &grid, &table).unwrap();
    let fdff_cells = evaluate_results(&fdff, &grid);
    let ctrl = cell(&fdff_cells, MetricKind::ControlOverhead, 100, 0.95);
    let mut faster = true;
    let mut worst = String::new();
    for &k in &grid.horizons {
        for &a in &grid.alphas {
            let c = dtm_or_inf(cell(&fdff_cells, MetricKind::ControlOverhead, k, a));
            let dlv = dtm_or_inf(cell(&fdff_cells, MetricKind::DataDeliveryRate, k, a));
            if c > dlv {
                faster = false;
                worst = format!(" (K={k} alpha={a}: {c} > {dlv})");
            }
        }
    }
    report.check(
        9,
        "FDFF end-to-end",
        ctrl.dr >= 85.0 && faster,
        format!(
            "control DR {:.0}% at K=100 (min 85), control DTM <= delivery DTM in all cells: {faster}{worst}; DTM {:?} vs {:?}",
            ctrl.dr,
            ctrl.dtm,
            cell(&fdff_cells, MetricKind::DataDeliveryRate, 100, 0.95).dtm
        ),
    );

    let fni = run_scenario(&Scenario::new(100, AttackKind::Fni, 0.2), REPS, BASE_SEED, &grid, &table).unwrap();
    let fni_cells = evaluate_results(&fni, &grid);
    let mut ok = true;
    let mut detail = Vec::new();
    for k in [50, 100] {
        let d = cell(&fni_cells, MetricKind::DataDeliveryRate, k, 0.95);
        let c = cell(&fni_cells, MetricKind::ControlOverhead, k, 0.95);
        ok &= d.dr >= 90.0 && dtm_or_inf(d) < dtm_or_inf(c);
        detail.push(format!("K={k}: delivery DR {:.0}% DTM {:?} vs control DTM {:?}", d.dr, d.dtm, c.dtm));
    }
    report.check(10, "FNI end-to-end", ok, detail.join("; "));

    let (fd_right, fd_det) = hint_share(&fdff, AttackHint::FdffLike);
    let (fn_right, fn_det) = hint_share(&fni, AttackHint::FniLike);
    let share = |r: usize, n: usize| if n == 0 { 0.0 } else { 100.0 * r as f64 / n as f64 };
    report.check(
        11,
        "attack-type hint",
        share(fd_right, fd_det) >= 80.0 && share(fn_right, fn_det) >= 80.0,
        format!(
            "FDFF {fd_right}/{fd_det} ({:.0}%), FNI {fn_right}/{fn_det} ({:.0}%), min 80%",
            share(fd_right, fd_det),
            share(fn_right, fn_det)
        ),
    );

    let mut worst_fpr: f64 = 0.0;
    for nodes in [36, 100] {
        let res = run_scenario(&Scenario::new(nodes, AttackKind::None, 0.0), REPS, BASE_SEED, &grid, &table).unwrap();
        for c in evaluate_results(&res, &grid) {
            worst_fpr = worst_fpr.max(c.fpr);
        }
    }
    report.check(12, "no-attack FPR", worst_fpr <= 10.0, format!("worst cell FPR {worst_fpr:.1}% (max 10%)"));

    let sweep_secs = sweep_start.elapsed().as_secs_f64();
    let t = Instant::now();
    simulate(&ScenarioConfig::new(100, AttackKind::Fni, 0.2, 77)).unwrap();
    let sim_secs = t.elapsed().as_secs_f64();
    report.check(
        13,
        "desk-scale runtime",
        sweep_secs < 600.0 && sim_secs < 5.0,
        format!("criteria 9-12 sweep {sweep_secs:.1}s (max 600), one 100-node run {sim_secs:.3}s (max 5)"),
    );

    if report.failures > 0 {
        println!("{} criteria failed", report.failures);
        std::process::exit(1);
    }
    println!("all 13 criteria passed");
}
