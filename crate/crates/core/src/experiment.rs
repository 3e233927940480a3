//! Reproducible simulate / detect / evaluate pipeline over a scenario grid.
//!
//! Layout under the output directory:
//!
//! ```text
//! traces/<scenario>/repNNN_delivery.csv, repNNN_control.csv, repNNN.meta
//! events/<scenario>/K<K>_a<alpha%>/repNNN.csv
//! events/<scenario>/repNNN.meta
//! tables/<scenario>.csv, tables/<scenario>.txt
//! critical_values.csv
//! ```
//!
//! Replication `i` of every scenario uses seed `base_seed + i`, so any single
//! replication can be rerun in isolation.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::critical::{CriticalTable, McSettings, DEFAULT_ALPHAS};
use crate::error::{invalid, Error, Result};
use crate::eval::{classify_replication, EvalCell, Outcome};
use crate::monitor::{classify_attack_hint, run_monitor, AttackHint, ChangeEvent, Direction, MonitorConfig};
use crate::series::{MetricKind, MetricSeries, DEFAULT_BOOTSTRAP_DISCARD};
use crate::sim::{simulate, AttackKind, ScenarioConfig, SimTrace, TraceMeta};

pub const DEFAULT_HORIZONS: [usize; 3] = [50, 100, 150];
pub const DEFAULT_REPLICATIONS: usize = 30;
/// After the 15-sample discard a 10 h trace has 285 samples and the attack
/// starts at 225, so the default of 250 training samples would begin
/// monitoring after the onset.
pub const EXPERIMENT_MIN_TRAINING: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scenario {
    pub nodes: usize,
    pub attack: AttackKind,
    pub attacker_fraction: f64,
}

impl Scenario {
    pub fn new(nodes: usize, attack: AttackKind, attacker_fraction: f64) -> Self {
        Self { nodes, attack, attacker_fraction }
    }

    /// `n{nodes}_{attack}_{pct}`, e.g. `n100_fdff_20`.
    pub fn name(&self) -> String {
        format!("n{}_{}_{}", self.nodes, self.attack, (self.attacker_fraction * 100.0).round() as i64)
    }

    pub fn config(&self, seed: u64) -> ScenarioConfig {
        ScenarioConfig::new(self.nodes, self.attack, self.attacker_fraction, seed)
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} nodes, {}% attackers, {}",
            self.nodes,
            (self.attacker_fraction * 100.0).round(),
            self.attack.as_str().to_uppercase()
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectorGrid {
    pub horizons: Vec<usize>,
    pub alphas: Vec<f64>,
    pub gamma: f64,
}

impl Default for DetectorGrid {
    fn default() -> Self {
        Self { horizons: DEFAULT_HORIZONS.to_vec(), alphas: DEFAULT_ALPHAS.to_vec(), gamma: 0.0 }
    }
}

impl DetectorGrid {
    pub fn validate(&self) -> Result<()> {
        if self.horizons.is_empty() || self.alphas.is_empty() {
            return Err(invalid("detector grid is empty"));
        }
        for cfg in self.configs() {
            cfg.validate()?;
        }
        Ok(())
    }

    pub fn configs(&self) -> Vec<MonitorConfig> {
        let mut out = Vec::new();
        for &horizon in &self.horizons {
            for &alpha in &self.alphas {
                out.push(MonitorConfig {
                    horizon,
                    alpha,
                    gamma: self.gamma,
                    min_training: EXPERIMENT_MIN_TRAINING,
                    ..MonitorConfig::default()
                });
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub scenarios: Vec<Scenario>,
    pub detector: DetectorGrid,
    pub replications: usize,
    pub base_seed: u64,
    pub out: PathBuf,
    pub mc: McSettings,
}

impl ExperimentSpec {
    /// Both topologies, both attacker shares, all three attack settings.
    pub fn full(out: impl Into<PathBuf>) -> Self {
        let mut scenarios = Vec::new();
        for nodes in [36, 100] {
            for attack in [AttackKind::Fdff, AttackKind::Fni] {
                for frac in [0.05, 0.20] {
                    scenarios.push(Scenario::new(nodes, attack, frac));
                }
            }
            scenarios.push(Scenario::new(nodes, AttackKind::None, 0.0));
        }
        Self {
            scenarios,
            detector: DetectorGrid::default(),
            replications: DEFAULT_REPLICATIONS,
            base_seed: 1,
            out: out.into(),
            mc: McSettings::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.scenarios.is_empty() {
            return Err(invalid("scenario grid is empty"));
        }
        if self.replications == 0 {
            return Err(invalid("at least one replication is required"));
        }
        for s in &self.scenarios {
            s.config(self.base_seed).validate()?;
        }
        self.detector.validate()
    }

    pub fn critical_path(&self) -> PathBuf {
        self.out.join("critical_values.csv")
    }

    pub fn critical_table(&self) -> Result<CriticalTable> {
        CriticalTable::load_or_compute(&self.critical_path(), &self.detector.alphas, &[self.detector.gamma], &self.mc)
    }
}

pub fn replication_seed(base_seed: u64, rep: usize) -> u64 {
    base_seed + rep as u64
}

fn rep_stem(rep: usize) -> String {
    format!("rep{rep:03}")
}

fn cell_dir(horizon: usize, alpha: f64) -> String {
    format!("K{}_a{}", horizon, (alpha * 100.0).round() as i64)
}

#[cfg(feature = "parallel")]
fn par_map<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn par_map<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    items.iter().map(f).collect()
}

/// Events of one replication for one detector setting, indices in the raw trace.
#[derive(Debug, Clone, PartialEq)]
pub struct CellEvents {
    pub horizon: usize,
    pub alpha: f64,
    pub events: BTreeMap<MetricKind, Vec<ChangeEvent>>,
}

/// Runs the detector grid on both metrics of one trace.
pub fn detect_trace(
    delivery: &MetricSeries,
    control: &MetricSeries,
    discard: usize,
    grid: &DetectorGrid,
    table: &CriticalTable,
) -> Result<Vec<CellEvents>> {
    let mut out = Vec::new();
    for cfg in grid.configs() {
        let mut events = BTreeMap::new();
        for series in [delivery, control] {
            let trimmed = series.discard_bootstrap(discard)?;
            let offset = trimmed.start_index_offset();
            let mut ev = run_monitor(&trimmed, &cfg, table)?;
            for e in &mut ev {
                e.cp_index += offset;
            }
            events.insert(series.kind(), ev);
        }
        out.push(CellEvents { horizon: cfg.horizon, alpha: cfg.alpha, events });
    }
    Ok(out)
}

/// Ground-truth onset used for classification; a run without an attack has
/// none, so every event counts as a false positive.
pub fn scoring_onset(attack: AttackKind, onset_index: usize) -> usize {
    if attack == AttackKind::None {
        usize::MAX
    } else {
        onset_index
    }
}

/// Everything the evaluation needs from one replication.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicationResult {
    pub seed: u64,
    pub onset: usize,
    pub cells: Vec<CellEvents>,
}

impl ReplicationResult {
    pub fn outcome(&self, metric: MetricKind, horizon: usize, alpha: f64) -> Option<Outcome> {
        self.cells
            .iter()
            .find(|c| c.horizon == horizon && (c.alpha - alpha).abs() < 1e-9)
            .map(|c| classify_replication(c.events.get(&metric).map_or(&[][..], Vec::as_slice), self.onset))
    }

    pub fn hint(&self, horizon: usize, alpha: f64) -> Option<AttackHint> {
        self.cells
            .iter()
            .find(|c| c.horizon == horizon && (c.alpha - alpha).abs() < 1e-9)
            .map(|c| classify_attack_hint(&c.events))
    }
}

/// Table cells for one scenario, ordered metric, K, alpha.
pub fn evaluate_results(results: &[ReplicationResult], grid: &DetectorGrid) -> Vec<EvalCell> {
    let mut cells = Vec::new();
    for metric in MetricKind::ALL {
        for &horizon in &grid.horizons {
            for &alpha in &grid.alphas {
                let outcomes: Vec<Outcome> =
                    results.iter().filter_map(|r| r.outcome(metric, horizon, alpha)).collect();
                cells.push(EvalCell::from_outcomes(metric, horizon, alpha, &outcomes));
            }
        }
    }
    cells
}

/// Simulates and scores one scenario in memory.
pub fn run_scenario(
    scenario: &Scenario,
    replications: usize,
    base_seed: u64,
    grid: &DetectorGrid,
    table: &CriticalTable,
) -> Result<Vec<ReplicationResult>> {
    let reps: Vec<usize> = (0..replications).collect();
    par_map(&reps, |&rep| {
        let seed = replication_seed(base_seed, rep);
        let trace = simulate(&scenario.config(seed))?;
        let cells = detect_trace(&trace.delivery_rate, &trace.control_overhead, DEFAULT_BOOTSTRAP_DISCARD, grid, table)?;
        Ok(ReplicationResult { seed, onset: scoring_onset(scenario.attack, trace.attack_onset_index), cells })
    })
    .into_iter()
    .collect()
}

fn write_file(path: &Path, f: impl FnOnce(&mut BufWriter<fs::File>) -> Result<()>) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let mut w = BufWriter::new(file);
    f(&mut w)?;
    w.flush()?;
    Ok(())
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

pub fn write_trace(dir: &Path, rep: usize, cfg: &ScenarioConfig, trace: &SimTrace) -> Result<()> {
    let stem = rep_stem(rep);
    for kind in MetricKind::ALL {
        write_file(&dir.join(format!("{stem}_{}.csv", kind.tag())), |w| trace.series(kind).write_csv(w))?;
    }
    TraceMeta::for_run(cfg).write(&dir.join(format!("{stem}.meta")))
}

pub fn read_trace(dir: &Path, rep: usize) -> Result<(MetricSeries, MetricSeries, TraceMeta)> {
    let stem = rep_stem(rep);
    let meta = TraceMeta::read(&dir.join(format!("{stem}.meta")))?;
    let read = |kind: MetricKind| -> Result<MetricSeries> {
        let path = dir.join(format!("{stem}_{}.csv", kind.tag()));
        let f = fs::File::open(&path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        MetricSeries::read_csv(kind, BufReader::new(f)).map_err(|e| match e {
            Error::Parse(m) => Error::Parse(format!("{}: {m}", path.display())),
            other => other,
        })
    };
    Ok((read(MetricKind::DataDeliveryRate)?, read(MetricKind::ControlOverhead)?, meta))
}

/// Replication numbers present in a directory, judged by any `repNNN*` file.
fn replications_in(dir: &Path) -> Result<Vec<usize>> {
    let mut reps = std::collections::BTreeSet::new();
    let entries = fs::read_dir(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    for entry in entries {
        let name = entry?.file_name().to_string_lossy().into_owned();
        if let Some(rest) = name.strip_prefix("rep") {
            if let Ok(n) = rest.chars().take_while(char::is_ascii_digit).collect::<String>().parse() {
                reps.insert(n);
            }
        }
    }
    Ok(reps.into_iter().collect())
}

fn subdirs(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    let entries = fs::read_dir(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    for entry in entries {
        let p = entry?.path();
        if p.is_dir() {
            out.push(p);
        }
    }
    out.sort();
    Ok(out)
}

/// Writes two trace CSVs and a meta file per replication of every scenario.
pub fn cmd_simulate(spec: &ExperimentSpec) -> Result<Vec<PathBuf>> {
    spec.validate()?;
    let mut dirs = Vec::new();
    for scenario in &spec.scenarios {
        let dir = spec.out.join("traces").join(scenario.name());
        create_dir(&dir)?;
        let reps: Vec<usize> = (0..spec.replications).collect();
        par_map(&reps, |&rep| {
            let cfg = scenario.config(replication_seed(spec.base_seed, rep));
            write_trace(&dir, rep, &cfg, &simulate(&cfg)?)
        })
        .into_iter()
        .collect::<Result<Vec<()>>>()?;
        dirs.push(dir);
    }
    Ok(dirs)
}

pub fn write_events<W: Write>(events: &BTreeMap<MetricKind, Vec<ChangeEvent>>, mut w: W) -> Result<()> {
    writeln!(w, "metric,cp_index,direction,delay,magnitude")?;
    let mut all: Vec<&ChangeEvent> = events.values().flatten().collect();
    all.sort_by_key(|e| (e.cp_index, e.metric));
    for e in all {
        writeln!(w, "{},{},{},{},{}", e.metric, e.cp_index, e.direction.as_str(), e.detection_delay, e.magnitude)?;
    }
    Ok(())
}

pub fn read_events<R: BufRead>(r: R) -> Result<BTreeMap<MetricKind, Vec<ChangeEvent>>> {
    let mut out: BTreeMap<MetricKind, Vec<ChangeEvent>> = MetricKind::ALL.iter().map(|&k| (k, Vec::new())).collect();
    let mut lines = r.lines();
    match lines.next() {
        Some(Ok(h)) if h.trim() == "metric,cp_index,direction,delay,magnitude" => {}
        _ => return Err(Error::Parse("event log lacks the `metric,cp_index,direction,delay,magnitude` header".into())),
    }
    for (row, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').map(str::trim).collect();
        if cols.len() != 5 {
            return Err(Error::Parse(format!("event row {row}: `{line}`")));
        }
        let bad = |what: &str| Error::Parse(format!("event row {row}: bad {what}"));
        let metric: MetricKind = cols[0].parse()?;
        let event = ChangeEvent {
            metric,
            cp_index: cols[1].parse().map_err(|_| bad("cp_index"))?,
            direction: cols[2].parse::<Direction>()?,
            detection_delay: cols[3].parse().map_err(|_| bad("delay"))?,
            magnitude: cols[4].parse().map_err(|_| bad("magnitude"))?,
        };
        out.entry(metric).or_default().push(event);
    }
    Ok(out)
}

/// Runs the detector grid on every trace under `traces_root` and writes the
/// event logs, copying each meta file next to them.
pub fn cmd_detect(
    traces_root: &Path,
    events_root: &Path,
    grid: &DetectorGrid,
    table: &CriticalTable,
) -> Result<usize> {
    grid.validate()?;
    let mut written = 0;
    for dir in subdirs(traces_root)? {
        let name = dir.file_name().expect("subdirectory has a name").to_owned();
        let out_dir = events_root.join(&name);
        let reps = replications_in(&dir)?;
        for cfg in grid.configs() {
            create_dir(&out_dir.join(cell_dir(cfg.horizon, cfg.alpha)))?;
        }
        let counts = par_map(&reps, |&rep| -> Result<usize> {
            let (delivery, control, meta) = read_trace(&dir, rep)?;
            meta.write(&out_dir.join(format!("{}.meta", rep_stem(rep))))?;
            let cells = detect_trace(&delivery, &control, meta.discard, grid, table)?;
            for c in &cells {
                let path = out_dir.join(cell_dir(c.horizon, c.alpha)).join(format!("{}.csv", rep_stem(rep)));
                write_file(&path, |w| write_events(&c.events, w))?;
            }
            Ok(cells.len())
        });
        for c in counts {
            written += c?;
        }
    }
    if written == 0 {
        return Err(Error::Io(format!("no traces found under {}", traces_root.display())));
    }
    Ok(written)
}

/// Reads the event logs of every scenario and writes one table per scenario.
pub fn cmd_evaluate(
    events_root: &Path,
    tables_root: &Path,
    grid: &DetectorGrid,
) -> Result<Vec<(String, Vec<EvalCell>)>> {
    let mut tables = Vec::new();
    create_dir(tables_root)?;
    for dir in subdirs(events_root)? {
        let name = dir.file_name().expect("subdirectory has a name").to_string_lossy().into_owned();
        let mut results = Vec::new();
        for rep in replications_in(&dir)? {
            let meta = TraceMeta::read(&dir.join(format!("{}.meta", rep_stem(rep))))?;
            let attack: AttackKind = meta.attack.parse()?;
            let mut cells = Vec::new();
            for cfg in grid.configs() {
                let path = dir.join(cell_dir(cfg.horizon, cfg.alpha)).join(format!("{}.csv", rep_stem(rep)));
                let f = fs::File::open(&path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
                cells.push(CellEvents {
                    horizon: cfg.horizon,
                    alpha: cfg.alpha,
                    events: read_events(BufReader::new(f))?,
                });
            }
            results.push(ReplicationResult {
                seed: meta.seed,
                onset: scoring_onset(attack, meta.attack_onset_index),
                cells,
            });
        }
        if results.is_empty() {
            return Err(Error::Io(format!("no event logs under {}", dir.display())));
        }
        let cells = evaluate_results(&results, grid);
        write_file(&tables_root.join(format!("{name}.csv")), |w| crate::eval::write_table_csv(&cells, w))?;
        fs::write(tables_root.join(format!("{name}.txt")), crate::eval::render_table(&name, &cells))?;
        tables.push((name, cells));
    }
    if tables.is_empty() {
        return Err(Error::Io(format!("no event logs found under {}", events_root.display())));
    }
    Ok(tables)
}

pub fn cmd_critical_values(path: &Path, alphas: &[f64], gammas: &[f64], mc: &McSettings) -> Result<CriticalTable> {
    let table = CriticalTable::compute(alphas, gammas, mc)?;
    if let Some(dir) = path.parent() {
        create_dir(dir)?;
    }
    write_file(path, |w| table.write(w))?;
    Ok(table)
}

/// simulate, detect and evaluate in one go.
pub fn sweep(spec: &ExperimentSpec) -> Result<Vec<(String, Vec<EvalCell>)>> {
    spec.validate()?;
    let table = spec.critical_table()?;
    cmd_simulate(spec)?;
    cmd_detect(&spec.out.join("traces"), &spec.out.join("events"), &spec.detector, &table)?;
    cmd_evaluate(&spec.out.join("events"), &spec.out.join("tables"), &spec.detector)
}
