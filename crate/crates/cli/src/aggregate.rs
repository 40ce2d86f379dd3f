//! Per-run rows and their order statistics.
//!
//! A lifetime metric that never happened (say, 30% of nodes never died
//! before the round cap) counts as +infinity: that run outlived every run
//! where it did happen.

use minen_core::RunSummary;

pub const METRICS: [&str; 4] = ["first_death", "rounds_30pct", "rounds_50pct", "rounds_total"];

#[derive(Debug, Clone, PartialEq)]
pub struct RunRow {
    pub variant: String,
    pub seed: u64,
    pub values: [Option<u64>; 4],
}

impl RunRow {
    pub fn from_summary(variant: &str, s: &RunSummary) -> Self {
        Self {
            variant: variant.to_string(),
            seed: s.seed,
            values: [
                s.first_death_round,
                s.rounds_to_30pct_dead,
                s.rounds_to_50pct_dead,
                Some(s.rounds_total),
            ],
        }
    }
}

fn as_f64(v: Option<u64>) -> f64 {
    v.map_or(f64::INFINITY, |x| x as f64)
}

/// Linear-interpolation quantile of sorted data, `q` in [0, 1].
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    if lo == hi || sorted[lo] == sorted[hi] {
        return sorted[lo];
    }
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spread {
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    pub iqr: f64,
}

pub fn spread(values: impl IntoIterator<Item = Option<u64>>) -> Spread {
    let mut v: Vec<f64> = values.into_iter().map(as_f64).collect();
    v.sort_by(f64::total_cmp);
    let q1 = quantile(&v, 0.25);
    let q3 = quantile(&v, 0.75);
    let iqr = if q3 == f64::INFINITY { f64::INFINITY } else { q3 - q1 };
    Spread {
        median: quantile(&v, 0.5),
        q1,
        q3,
        iqr,
    }
}

/// Integers print without a decimal point, infinity as `inf`.
pub fn fmt_stat(x: f64) -> String {
    if x.is_infinite() {
        "inf".to_string()
    } else {
        x.to_string()
    }
}

pub fn fmt_value(v: Option<u64>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}
