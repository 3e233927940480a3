//! Detection-performance metrics over replications.
//!
//! Each replication lands in exactly one class, decided by its earliest
//! event: before the attack onset it is a false positive, at or after the
//! onset a true positive (delay = event index - onset), and no event at all
//! is a false negative. DR, FPR and FNR are the class shares, so a cell's
//! rates add up to 100.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::monitor::ChangeEvent;
use crate::series::MetricKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Outcome {
    TruePositive(usize),
    FalsePositive,
    FalseNegative,
}

pub fn classify_replication(events: &[ChangeEvent], onset: usize) -> Outcome {
    match events.iter().map(|e| e.cp_index).min() {
        None => Outcome::FalseNegative,
        Some(i) if i < onset => Outcome::FalsePositive,
        Some(i) => Outcome::TruePositive(i - onset),
    }
}

/// Sample median; even counts average the two middle values.
pub fn median(x: &[f64]) -> Result<f64> {
    if x.is_empty() {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    let mut v = x.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    Ok(if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) })
}

/// Median absolute deviation `median(|X_i - median(X)|)`.
pub fn mad(times: &[f64]) -> Result<f64> {
    let centre = median(times)?;
    let dev: Vec<f64> = times.iter().map(|t| (t - centre).abs()).collect();
    median(&dev)
}

/// One `(metric, K, alpha)` cell of a results table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalCell {
    pub metric: MetricKind,
    pub horizon: usize,
    pub alpha: f64,
    pub dr: f64,
    pub fpr: f64,
    pub fnr: f64,
    pub dtm: Option<f64>,
    pub mad: Option<f64>,
    pub n_replications: usize,
}

impl EvalCell {
    pub fn from_outcomes(metric: MetricKind, horizon: usize, alpha: f64, outcomes: &[Outcome]) -> Self {
        let n = outcomes.len();
        let mut delays = Vec::new();
        let (mut fp, mut fnc) = (0usize, 0usize);
        for o in outcomes {
            match *o {
                Outcome::TruePositive(d) => delays.push(d as f64),
                Outcome::FalsePositive => fp += 1,
                Outcome::FalseNegative => fnc += 1,
            }
        }
        let pct = |c: usize| if n == 0 { 0.0 } else { 100.0 * c as f64 / n as f64 };
        Self {
            metric,
            horizon,
            alpha,
            dr: pct(delays.len()),
            fpr: pct(fp),
            fnr: pct(fnc),
            dtm: median(&delays).ok(),
            mad: mad(&delays).ok(),
            n_replications: n,
        }
    }

    /// Integer percentages as printed in the tables.
    pub fn rounded_rates(&self) -> (i64, i64, i64) {
        (self.dr.round() as i64, self.fpr.round() as i64, self.fnr.round() as i64)
    }

    /// Rounded rates no longer add up to exactly 100.
    pub fn rounding_flag(&self) -> bool {
        let (a, b, c) = self.rounded_rates();
        a + b + c != 100
    }
}

/// Outcomes of every replication for one cell, keyed by the cell coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct CellOutcomes {
    pub metric: MetricKind,
    pub horizon: usize,
    pub alpha: f64,
    pub outcomes: Vec<Outcome>,
}

pub fn aggregate(cells: &[CellOutcomes]) -> Vec<EvalCell> {
    cells
        .iter()
        .map(|c| EvalCell::from_outcomes(c.metric, c.horizon, c.alpha, &c.outcomes))
        .collect()
}

fn alpha_pct(alpha: f64) -> i64 {
    (alpha * 100.0).round() as i64
}

/// `metric,K,alpha,DTM,MAD,DR,FPR,FNR`; undefined DTM/MAD are left blank.
pub fn write_table_csv<W: Write>(cells: &[EvalCell], mut w: W) -> Result<()> {
    writeln!(w, "metric,K,alpha,DTM,MAD,DR,FPR,FNR")?;
    let opt = |v: Option<f64>| v.map(|x| format!("{x}")).unwrap_or_default();
    for c in cells {
        let (dr, fpr, fnr) = c.rounded_rates();
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            c.metric,
            c.horizon,
            alpha_pct(c.alpha),
            opt(c.dtm),
            opt(c.mad),
            dr,
            fpr,
            fnr
        )?;
    }
    Ok(())
}

/// Aligned text in the layout of the published tables: one block per
/// metric, columns ordered by `K` then `alpha`.
pub fn render_table(title: &str, cells: &[EvalCell]) -> String {
    let mut out = format!("{title}\n");
    for metric in MetricKind::ALL {
        let mut row: Vec<&EvalCell> = cells.iter().filter(|c| c.metric == metric).collect();
        if row.is_empty() {
            continue;
        }
        row.sort_by(|a, b| a.horizon.cmp(&b.horizon).then(a.alpha.total_cmp(&b.alpha)));
        let name = match metric {
            MetricKind::DataDeliveryRate => "Data packets delivery rate",
            MetricKind::ControlOverhead => "Control overhead",
        };
        out.push_str(&format!("  {name}\n"));
        let line = |label: &str, f: &dyn Fn(&EvalCell) -> String| {
            let mut s = format!("  {label:<6}");
            for c in &row {
                s.push_str(&format!("{:>6}", f(c)));
            }
            s.push('\n');
            s
        };
        let num = |v: Option<f64>| v.map(|x| format!("{}", x.round() as i64)).unwrap_or("-".into());
        out.push_str(&line("K", &|c| c.horizon.to_string()));
        out.push_str(&line("alpha", &|c| alpha_pct(c.alpha).to_string()));
        out.push_str(&line("DTM", &|c| num(c.dtm)));
        out.push_str(&line("MAD", &|c| num(c.mad)));
        out.push_str(&line("DR", &|c| c.rounded_rates().0.to_string()));
        out.push_str(&line("FPR", &|c| c.rounded_rates().1.to_string()));
        out.push_str(&line("FNR", &|c| {
            let flag = if c.rounding_flag() { "*" } else { "" };
            format!("{}{flag}", c.rounded_rates().2)
        }));
    }
    out
}
