//! MACD indicator used to label the direction of a detected change.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Which MACD quantity serves as the trend indicator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MacdForm {
    /// `EMA_s - EMA_l`. Keeps the sign of a step for as long as the long
    /// EMA lags, so late detections are still labelled correctly.
    Line,
    /// `MACD - EMA_sig(MACD)`. Reacts faster but flips sign about ten
    /// samples after a clean step.
    Histogram,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MacdConfig {
    pub short_span: usize,
    pub long_span: usize,
    pub signal_span: usize,
    pub form: MacdForm,
}

impl Default for MacdConfig {
    fn default() -> Self {
        Self { short_span: 12, long_span: 26, signal_span: 9, form: MacdForm::Line }
    }
}

impl MacdConfig {
    pub fn validate(&self) -> Result<()> {
        if self.short_span == 0 || self.short_span >= self.long_span {
            return Err(invalid(format!(
                "MACD spans need 0 < short ({}) < long ({})",
                self.short_span, self.long_span
            )));
        }
        if self.signal_span == 0 {
            return Err(invalid("MACD signal span must be positive"));
        }
        Ok(())
    }
}

/// Recursive EMA with factor `2/(span+1)`, seeded with the first sample.
pub fn ema(x: &[f64], span: usize) -> Result<Vec<f64>> {
    if span == 0 {
        return Err(invalid("EMA span must be at least 1"));
    }
    let first = *x.first().ok_or(Error::InsufficientData { needed: 1, got: 0 })?;
    let a = 2.0 / (span as f64 + 1.0);
    let mut out = Vec::with_capacity(x.len());
    let mut prev = first;
    for &v in x {
        prev += a * (v - prev);
        out.push(prev);
    }
    Ok(out)
}

/// MACD line or histogram at index `at`, computed on `x[..=at]`.
/// Positive means the level is rising.
pub fn trend_indicator(x: &[f64], at: usize, cfg: &MacdConfig) -> Result<f64> {
    cfg.validate()?;
    if at < cfg.long_span || at >= x.len() {
        return Err(Error::InsufficientData { needed: cfg.long_span + 1, got: at.min(x.len()) + 1 });
    }
    let hist = &x[..=at];
    let short = ema(hist, cfg.short_span)?;
    let long = ema(hist, cfg.long_span)?;
    let macd: Vec<f64> = short.iter().zip(&long).map(|(s, l)| s - l).collect();
    Ok(match cfg.form {
        MacdForm::Line => macd[at],
        MacdForm::Histogram => macd[at] - ema(&macd, cfg.signal_span)?[at],
    })
}
