use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use sdwsn_cpd::critical::{CriticalTable, McSettings, DEFAULT_ALPHAS};
use sdwsn_cpd::eval::{render_table, EvalCell};
use sdwsn_cpd::experiment::{
    cmd_critical_values, cmd_detect, cmd_evaluate, cmd_simulate, sweep, DetectorGrid, ExperimentSpec, Scenario,
    DEFAULT_HORIZONS, DEFAULT_REPLICATIONS,
};
use sdwsn_cpd::sim::AttackKind;
use sdwsn_cpd::{Error, Result};

/// Change-point detection experiments on a simulated software-defined WSN.
#[derive(Parser, Debug)]
#[command(name = "sdwsn-cpd", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate replications and write trace CSVs plus meta files to OUT/traces.
    Simulate {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Run the detector grid over OUT/traces and write event logs to OUT/events.
    Detect {
        #[command(flatten)]
        detector: DetectorArgs,
        #[command(flatten)]
        mc: McArgs,
        #[arg(long, default_value = "results")]
        out: PathBuf,
    },
    /// Score OUT/events and write one table per scenario to OUT/tables.
    Evaluate {
        #[command(flatten)]
        detector: DetectorArgs,
        #[arg(long, default_value = "results")]
        out: PathBuf,
    },
    /// Regenerate the Monte-Carlo critical-value cache OUT/critical_values.csv.
    CriticalValues {
        #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_ALPHAS)]
        alpha: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_values_t = [0.0])]
        gamma: Vec<f64>,
        #[command(flatten)]
        mc: McArgs,
        #[arg(long, default_value = "results")]
        out: PathBuf,
    },
    /// Full grid: 36 and 100 nodes, 5% and 20% attackers, FDFF, FNI and no attack.
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        mc: McArgs,
    },
}

#[derive(Args, Debug)]
struct ScenarioArgs {
    #[arg(long, value_delimiter = ',', default_values_t = [100])]
    nodes: Vec<usize>,
    /// none, fdff or fni
    #[arg(long, value_delimiter = ',', default_values_t = [AttackKind::Fdff])]
    attack: Vec<AttackKind>,
    /// Share of eligible nodes turned malicious, in percent.
    #[arg(long = "attackers-pct", value_delimiter = ',', default_values_t = [20.0])]
    attackers_pct: Vec<f64>,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[arg(long, default_value_t = DEFAULT_REPLICATIONS)]
    reps: usize,
    /// Replication i uses seed SEED + i.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value = "results")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct DetectorArgs {
    /// Monitoring horizons K.
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_HORIZONS)]
    k: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_ALPHAS)]
    alpha: Vec<f64>,
    #[arg(long, default_value_t = 0.0)]
    gamma: f64,
}

#[derive(Args, Debug)]
struct McArgs {
    /// Monte-Carlo paths per critical value.
    #[arg(long)]
    paths: Option<usize>,
    /// Grid points per path.
    #[arg(long)]
    grid: Option<usize>,
}

impl McArgs {
    fn settings(&self) -> McSettings {
        let mut mc = McSettings::default();
        if let Some(p) = self.paths {
            mc.paths = p;
        }
        if let Some(g) = self.grid {
            mc.grid = g;
        }
        mc
    }
}

impl DetectorArgs {
    fn grid(&self) -> DetectorGrid {
        DetectorGrid { horizons: self.k.clone(), alphas: self.alpha.clone(), gamma: self.gamma }
    }
}

fn scenarios(args: &ScenarioArgs) -> Vec<Scenario> {
    let mut out = Vec::new();
    for &nodes in &args.nodes {
        for &attack in &args.attack {
            if attack == AttackKind::None {
                out.push(Scenario::new(nodes, attack, 0.0));
                continue;
            }
            for &pct in &args.attackers_pct {
                out.push(Scenario::new(nodes, attack, pct / 100.0));
            }
        }
    }
    out
}

fn print_tables(tables: &[(String, Vec<EvalCell>)]) {
    for (name, cells) in tables {
        println!("{}", render_table(name, cells));
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate { scenario, run } => {
            let spec = ExperimentSpec {
                scenarios: scenarios(&scenario),
                replications: run.reps,
                base_seed: run.seed,
                out: run.out,
                ..ExperimentSpec::full("")
            };
            for dir in cmd_simulate(&spec)? {
                println!("wrote {}", dir.display());
            }
        }
        Command::Detect { detector, mc, out } => {
            let grid = detector.grid();
            grid.validate()?;
            let table = CriticalTable::load_or_compute(
                &out.join("critical_values.csv"),
                &grid.alphas,
                &[grid.gamma],
                &mc.settings(),
            )?;
            let n = cmd_detect(&out.join("traces"), &out.join("events"), &grid, &table)?;
            println!("wrote {n} event logs to {}", out.join("events").display());
        }
        Command::Evaluate { detector, out } => {
            let grid = detector.grid();
            grid.validate()?;
            print_tables(&cmd_evaluate(&out.join("events"), &out.join("tables"), &grid)?);
        }
        Command::CriticalValues { alpha, gamma, mc, out } => {
            let path = out.join("critical_values.csv");
            let table = cmd_critical_values(&path, &alpha, &gamma, &mc.settings())?;
            for &a in &alpha {
                print!("alpha={a} offline={:.4}", table.offline(a)?);
                for &g in &gamma {
                    print!(" online(gamma={g})={:.4}", table.online(a, g)?);
                }
                println!();
            }
            println!("wrote {}", path.display());
        }
        Command::Sweep { run, mc } => {
            let spec = ExperimentSpec {
                replications: run.reps,
                base_seed: run.seed,
                mc: mc.settings(),
                ..ExperimentSpec::full(run.out)
            };
            print_tables(&sweep(&spec)?);
        }
    }
    Ok(())
}

fn one_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ").replace('"', "'")
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            eprintln!("error: kind=usage message=\"{}\"", one_line(&e.to_string()));
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            report(&e);
            ExitCode::FAILURE
        }
    }
}

fn report(e: &Error) {
    eprintln!("error: kind={} message=\"{}\"", e.kind(), one_line(&e.to_string()));
}
