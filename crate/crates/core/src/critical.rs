//! Monte-Carlo critical values for the offline and online detectors.
//!
//! Offline: quantiles of `sup_{t∈[0,1]} B(t)^2`, `B` a Brownian bridge.
//! Online: quantiles of `sup_{t∈[0,1]} |W(t)| / t^γ`, `W` a Wiener process.
//!
//! Paths are generated on a uniform grid. Between grid points the path is a
//! Brownian bridge with known endpoints, so the supremum over each cell is
//! drawn from its exact conditional law instead of being read off the grid
//! points. Cells whose endpoints sit far below the running maximum are
//! skipped (their chance of exceeding it is below `exp(-SKIP_EXPONENT)`).
//!
//! Every path owns its own ChaCha stream keyed by the path index, so results
//! are identical with or without the `parallel` feature.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Error, Result};

pub const DEFAULT_ALPHAS: [f64; 3] = [0.90, 0.95, 0.99];
pub const DEFAULT_PATHS: usize = 100_000;
pub const DEFAULT_GRID: usize = 1000;
pub const DEFAULT_MC_SEED: u64 = 0x5eed_c0de;

const SKIP_EXPONENT: f64 = 36.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McSettings {
    pub paths: usize,
    pub grid: usize,
    pub seed: u64,
}

impl Default for McSettings {
    fn default() -> Self {
        Self { paths: DEFAULT_PATHS, grid: DEFAULT_GRID, seed: DEFAULT_MC_SEED }
    }
}

impl McSettings {
    fn validate(&self) -> Result<()> {
        if self.paths < 100 {
            return Err(invalid(format!("need at least 100 Monte-Carlo paths, got {}", self.paths)));
        }
        if self.grid < 10 {
            return Err(invalid(format!("grid must have at least 10 steps, got {}", self.grid)));
        }
        Ok(())
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(invalid(format!("confidence level must lie in (0,1), got {alpha}")));
    }
    Ok(())
}

pub(crate) fn check_gamma(gamma: f64) -> Result<()> {
    if !(0.0..0.5).contains(&gamma) {
        return Err(invalid(format!("gamma must lie in [0, 0.5), got {gamma}")));
    }
    Ok(())
}

/// Empirical quantile `x_(ceil(alpha n))` of an unsorted sample.
pub fn empirical_quantile(sample: &[f64], alpha: f64) -> f64 {
    let mut v = sample.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    quantile_sorted(&v, alpha)
}

fn quantile_sorted(sorted: &[f64], alpha: f64) -> f64 {
    let n = sorted.len();
    let rank = ((alpha * n as f64).ceil() as usize).clamp(1, n);
    sorted[rank - 1]
}

/// Largest value of a Brownian bridge of variance `dt` pinned at `a` and `b`.
#[inline]
fn bridge_max(a: f64, b: f64, dt: f64, u: f64) -> f64 {
    let d = b - a;
    0.5 * (a + b + (d * d - 2.0 * dt * u.ln()).sqrt())
}

/// Updates `sup |path| / weight` over one grid cell `[a, b]`.
#[inline]
fn cell_abs_sup(rng: &mut ChaCha8Rng, a: f64, b: f64, dt: f64, weight: f64, sup: &mut f64) {
    let level = *sup * weight;
    // upper excursion
    let (hi_a, hi_b) = (level - a, level - b);
    if hi_a <= 0.0 || hi_b <= 0.0 || 2.0 * hi_a * hi_b / dt < SKIP_EXPONENT {
        let u = 1.0 - rng.random::<f64>();
        let m = bridge_max(a, b, dt, u) / weight;
        if m > *sup {
            *sup = m;
        }
    }
    let level = *sup * weight;
    let (lo_a, lo_b) = (level + a, level + b);
    if lo_a <= 0.0 || lo_b <= 0.0 || 2.0 * lo_a * lo_b / dt < SKIP_EXPONENT {
        let u = 1.0 - rng.random::<f64>();
        let m = bridge_max(-a, -b, dt, u) / weight;
        if m > *sup {
            *sup = m;
        }
    }
}

struct PathSuprema {
    bridge_sq: f64,
    weighted: Vec<f64>,
}

fn simulate_path(index: usize, gammas: &[f64], s: &McSettings, with_bridge: bool) -> PathSuprema {
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
    rng.set_stream(index as u64);
    let n = s.grid;
    let dt = 1.0 / n as f64;
    let sd = dt.sqrt();
    let mut w = Vec::with_capacity(n + 1);
    w.push(0.0);
    let mut acc = 0.0;
    for _ in 0..n {
        let z: f64 = rng.sample(StandardNormal);
        acc += sd * z;
        w.push(acc);
    }

    let bridge_sq = if with_bridge {
        let end = w[n];
        let b: Vec<f64> = w.iter().enumerate().map(|(i, v)| v - i as f64 * dt * end).collect();
        let mut sup = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for i in 0..n {
            cell_abs_sup(&mut rng, b[i], b[i + 1], dt, 1.0, &mut sup);
        }
        sup * sup
    } else {
        0.0
    };

    let weighted = gammas
        .iter()
        .map(|&g| {
            let weights: Vec<f64> = (1..=n).map(|i| (i as f64 * dt).powf(g)).collect();
            let mut sup = (1..=n).fold(0.0f64, |m, i| m.max(w[i].abs() / weights[i - 1]));
            for i in 0..n {
                // t^γ at the right end of the cell; exact when γ = 0
                cell_abs_sup(&mut rng, w[i], w[i + 1], dt, weights[i], &mut sup);
            }
            sup
        })
        .collect();

    PathSuprema { bridge_sq, weighted }
}

fn simulate_all(gammas: &[f64], s: &McSettings, with_bridge: bool) -> Vec<PathSuprema> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..s.paths).into_par_iter().map(|i| simulate_path(i, gammas, s, with_bridge)).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..s.paths).map(|i| simulate_path(i, gammas, s, with_bridge)).collect()
    }
}

/// Simulated draws of `sup B(t)^2`.
pub fn simulate_bridge_suprema(s: &McSettings) -> Result<Vec<f64>> {
    s.validate()?;
    Ok(simulate_all(&[], s, true).into_iter().map(|p| p.bridge_sq).collect())
}

/// Simulated draws of `sup |W(t)| / t^γ`.
pub fn simulate_weighted_wiener_suprema(gamma: f64, s: &McSettings) -> Result<Vec<f64>> {
    s.validate()?;
    check_gamma(gamma)?;
    Ok(simulate_all(&[gamma], s, false).into_iter().map(|p| p.weighted[0]).collect())
}

pub fn offline_critical_value(alpha: f64, s: &McSettings) -> Result<f64> {
    check_alpha(alpha)?;
    Ok(empirical_quantile(&simulate_bridge_suprema(s)?, alpha))
}

pub fn online_critical_value(alpha: f64, gamma: f64, s: &McSettings) -> Result<f64> {
    check_alpha(alpha)?;
    Ok(empirical_quantile(&simulate_weighted_wiener_suprema(gamma, s)?, alpha))
}

/// Key with enough resolution for the alpha/gamma values used in practice.
fn key(x: f64) -> i64 {
    (x * 1e6).round() as i64
}

/// Cached critical values for a set of confidence levels and sensitivities.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CriticalTable {
    offline: BTreeMap<i64, f64>,
    online: BTreeMap<(i64, i64), f64>,
}

impl CriticalTable {
    /// Computes every offline value for `alphas` and every online value for
    /// `alphas x gammas` from one batch of simulated paths.
    pub fn compute(alphas: &[f64], gammas: &[f64], s: &McSettings) -> Result<Self> {
        s.validate()?;
        for &a in alphas {
            check_alpha(a)?;
        }
        for &g in gammas {
            check_gamma(g)?;
        }
        let draws = simulate_all(gammas, s, true);
        let mut table = Self::default();
        let mut bridge: Vec<f64> = draws.iter().map(|p| p.bridge_sq).collect();
        bridge.sort_by(|a, b| a.total_cmp(b));
        for &a in alphas {
            table.offline.insert(key(a), quantile_sorted(&bridge, a));
        }
        for (gi, &g) in gammas.iter().enumerate() {
            let mut sup: Vec<f64> = draws.iter().map(|p| p.weighted[gi]).collect();
            sup.sort_by(|a, b| a.total_cmp(b));
            for &a in alphas {
                table.online.insert((key(a), key(g)), quantile_sorted(&sup, a));
            }
        }
        Ok(table)
    }

    /// Default table: alphas 0.90/0.95/0.99, gamma 0, 100000 paths on a 1000-step grid.
    pub fn standard() -> Result<Self> {
        Self::compute(&DEFAULT_ALPHAS, &[0.0], &McSettings::default())
    }

    pub fn offline(&self, alpha: f64) -> Result<f64> {
        self.offline
            .get(&key(alpha))
            .copied()
            .ok_or_else(|| Error::MissingCriticalValue(format!("offline alpha={alpha}")))
    }

    pub fn online(&self, alpha: f64, gamma: f64) -> Result<f64> {
        self.online
            .get(&(key(alpha), key(gamma)))
            .copied()
            .ok_or_else(|| Error::MissingCriticalValue(format!("online alpha={alpha} gamma={gamma}")))
    }

    pub fn insert_offline(&mut self, alpha: f64, value: f64) {
        self.offline.insert(key(alpha), value);
    }

    pub fn insert_online(&mut self, alpha: f64, gamma: f64, value: f64) {
        self.online.insert((key(alpha), key(gamma)), value);
    }

    pub fn covers(&self, alphas: &[f64], gammas: &[f64]) -> bool {
        alphas.iter().all(|&a| {
            self.offline(a).is_ok() && gammas.iter().all(|&g| self.online(a, g).is_ok())
        })
    }

    /// `alpha,gamma,value` rows; gamma is blank for offline values.
    pub fn write<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "alpha,gamma,value")?;
        for (&a, v) in &self.offline {
            writeln!(w, "{},,{}", a as f64 / 1e6, v)?;
        }
        for (&(a, g), v) in &self.online {
            writeln!(w, "{},{},{}", a as f64 / 1e6, g as f64 / 1e6, v)?;
        }
        Ok(())
    }

    pub fn read<R: BufRead>(r: R) -> Result<Self> {
        let mut table = Self::default();
        for (i, line) in r.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || (i == 0 && line == "alpha,gamma,value") {
                continue;
            }
            let cols: Vec<&str> = line.split(',').map(str::trim).collect();
            if cols.len() != 3 {
                return Err(Error::Parse(format!("critical-value row {i}: `{line}`")));
            }
            let num = |s: &str| {
                s.parse::<f64>()
                    .map_err(|_| Error::Parse(format!("critical-value row {i}: bad number `{s}`")))
            };
            let alpha = num(cols[0])?;
            let value = num(cols[2])?;
            if cols[1].is_empty() {
                table.insert_offline(alpha, value);
            } else {
                table.insert_online(alpha, num(cols[1])?, value);
            }
        }
        Ok(table)
    }

    /// Loads the cache file if it covers the request, otherwise recomputes
    /// and rewrites it.
    pub fn load_or_compute(
        path: &Path,
        alphas: &[f64],
        gammas: &[f64],
        s: &McSettings,
    ) -> Result<Self> {
        if let Ok(f) = std::fs::File::open(path) {
            let cached = Self::read(std::io::BufReader::new(f))?;
            if cached.covers(alphas, gammas) {
                return Ok(cached);
            }
        }
        let table = Self::compute(alphas, gammas, s)?;
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir)?;
        }
        table.write(std::io::BufWriter::new(std::fs::File::create(path)?))?;
        Ok(table)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bridge_max_is_above_endpoints() {
        for u in [1e-9, 0.1, 0.5, 0.999_999] {
            let m = bridge_max(0.2, -0.4, 0.001, u);
            assert!(m >= 0.2);
        }
        assert!((bridge_max(0.2, -0.4, 0.001, 1.0) - 0.2).abs() < 1e-15);
    }

    #[test]
    fn quantile_rank_convention() {
        let v: Vec<f64> = (1..=100).map(f64::from).collect();
        assert_eq!(empirical_quantile(&v, 0.95), 95.0);
        assert_eq!(empirical_quantile(&v, 0.951), 96.0);
        assert_eq!(empirical_quantile(&v, 1e-9), 1.0);
    }

    #[test]
    fn parameter_validation() {
        let s = McSettings { paths: 1000, grid: 100, seed: 1 };
        assert!(online_critical_value(0.95, 0.5, &s).is_err());
        assert!(online_critical_value(1.0, 0.0, &s).is_err());
        assert!(offline_critical_value(0.95, &McSettings { paths: 10, ..s }).is_err());
    }

    #[test]
    fn deterministic_under_seed() {
        let s = McSettings { paths: 2000, grid: 200, seed: 9 };
        let a = CriticalTable::compute(&[0.95], &[0.0, 0.25], &s).unwrap();
        let b = CriticalTable::compute(&[0.95], &[0.0, 0.25], &s).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn quantiles_monotone_in_alpha() {
        let s = McSettings { paths: 5000, grid: 300, seed: 4 };
        let t = CriticalTable::compute(&DEFAULT_ALPHAS, &[0.0], &s).unwrap();
        assert!(t.offline(0.99).unwrap() > t.offline(0.95).unwrap());
        assert!(t.offline(0.95).unwrap() > t.offline(0.90).unwrap());
        assert!(t.online(0.99, 0.0).unwrap() > t.online(0.95, 0.0).unwrap());
    }

    #[test]
    fn cache_roundtrip() {
        let mut t = CriticalTable::default();
        t.insert_offline(0.95, 1.8445);
        t.insert_online(0.95, 0.0, 2.2414);
        t.insert_online(0.9, 0.25, 2.5);
        let mut buf = Vec::new();
        t.write(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.contains("0.95,,1.8445"));
        assert_eq!(CriticalTable::read(&buf[..]).unwrap(), t);
        assert!(t.covers(&[0.95], &[0.0]));
        assert!(!t.covers(&[0.99], &[0.0]));
    }

    #[test]
    fn load_or_compute_writes_then_reuses() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cv.csv");
        let s = McSettings { paths: 500, grid: 50, seed: 2 };
        let first = CriticalTable::load_or_compute(&path, &[0.95], &[0.0], &s).unwrap();
        assert!(path.exists());
        // a different seed would give different values; the cache wins
        let again =
            CriticalTable::load_or_compute(&path, &[0.95], &[0.0], &McSettings { seed: 3, ..s })
                .unwrap();
        assert!((first.offline(0.95).unwrap() - again.offline(0.95).unwrap()).abs() < 1e-12);
    }
}
