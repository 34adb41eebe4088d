//! Per-run parameter summaries and Pearson correlation tables.

#[cfg(feature = "parallel")]
use rayon::prelude::*;
use thiserror::Error;

use crate::ingest::{SynchronizedRecord, Tide};

#[derive(Debug, Error, PartialEq)]
pub enum StatsError {
    #[error("series lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("need at least 2 paired values, got {0}")]
    TooFew(usize),
    #[error("correlation undefined: {0} series is constant")]
    ConstantSeries(&'static str),
    #[error("no values for parameter '{0}'")]
    EmptyInput(String),
}

/// Sample Pearson correlation coefficient.
///
/// Two-pass, mean-subtracted accumulation; the result is clamped into
/// `[-1, 1]` against rounding overshoot on exactly affine data.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64, StatsError> {
    if xs.len() != ys.len() {
        return Err(StatsError::LengthMismatch(xs.len(), ys.len()));
    }
    let n = xs.len();
    if n < 2 {
        return Err(StatsError::TooFew(n));
    }
    let nf = n as f64;
    let mean_x = xs.iter().sum::<f64>() / nf;
    let mean_y = ys.iter().sum::<f64>() / nf;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        let dx = x - mean_x;
        let dy = y - mean_y;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return Err(StatsError::ConstantSeries("first"));
    }
    if syy == 0.0 {
        return Err(StatsError::ConstantSeries("second"));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Range and mean of one parameter over a set of records.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub parameter: String,
    pub count: usize,
    pub min: f64,
    pub max: f64,
    /// `max - min`, the per-run "maximum deviation" of the parameter.
    pub max_deviation: f64,
    pub mean: f64,
}

/// Summarizes the non-missing values of `parameter`.
pub fn summarize(
    records: &[SynchronizedRecord],
    parameter: &str,
) -> Result<SummaryRow, StatsError> {
    let values: Vec<f64> = records.iter().filter_map(|r| r.value(parameter)).collect();
    if values.is_empty() {
        return Err(StatsError::EmptyInput(parameter.to_string()));
    }
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    Ok(SummaryRow {
        parameter: parameter.to_string(),
        count: values.len(),
        min,
        max,
        max_deviation: max - min,
        mean: mean.clamp(min, max),
    })
}

/// Which subset of records a correlation entry was computed over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorrelationGroup {
    /// All records regardless of tide tag.
    Pooled,
    /// Records tagged with one tidal condition.
    Tide(Tide),
    /// One point per run (run means), pooled across runs.
    RunMean,
}

impl CorrelationGroup {
    pub fn label(&self) -> &'static str {
        match self {
            CorrelationGroup::Pooled => "pooled",
            CorrelationGroup::Tide(Tide::High) => "high",
            CorrelationGroup::Tide(Tide::Low) => "low",
            CorrelationGroup::Tide(Tide::Untagged) => "untagged",
            CorrelationGroup::RunMean => "run_mean",
        }
    }
}

/// One row of a correlation table. `r` is `None` when the correlation is
/// undefined for this pair and group (fewer than two complete pairs, or a
/// constant series); `n` still reports how many pairs were available.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationEntry {
    pub param_x: String,
    pub param_y: String,
    pub group: CorrelationGroup,
    pub n: usize,
    pub r: Option<f64>,
}

fn complete_pairs(
    records: &[SynchronizedRecord],
    px: &str,
    py: &str,
    tide: Option<Tide>,
) -> (Vec<f64>, Vec<f64>) {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for r in records {
        if let Some(want) = tide {
            if r.tide != want {
                continue;
            }
        }
        if let (Some(x), Some(y)) = (r.value(px), r.value(py)) {
            xs.push(x);
            ys.push(y);
        }
    }
    (xs, ys)
}

fn entry_for(
    records: &[SynchronizedRecord],
    px: &str,
    py: &str,
    group: CorrelationGroup,
) -> CorrelationEntry {
    let tide = match group {
        CorrelationGroup::Tide(t) => Some(t),
        _ => None,
    };
    let (xs, ys) = complete_pairs(records, px, py, tide);
    CorrelationEntry {
        param_x: px.to_string(),
        param_y: py.to_string(),
        group,
        n: xs.len(),
        r: pearson(&xs, &ys).ok(),
    }
}

/// Record-level correlation per requested pair: a pooled entry always, plus
/// one entry per tidal condition when `group_by_tide` is set. Entries with
/// undefined correlations are reported, not dropped.
pub fn correlate_pairs(
    records: &[SynchronizedRecord],
    pairs: &[(String, String)],
    group_by_tide: bool,
) -> Vec<CorrelationEntry> {
    let mut jobs: Vec<(&str, &str, CorrelationGroup)> = Vec::new();
    for (px, py) in pairs {
        jobs.push((px, py, CorrelationGroup::Pooled));
        if group_by_tide {
            jobs.push((px, py, CorrelationGroup::Tide(Tide::High)));
            jobs.push((px, py, CorrelationGroup::Tide(Tide::Low)));
        }
    }
    #[cfg(feature = "parallel")]
    {
        jobs.par_iter()
            .map(|&(px, py, group)| entry_for(records, px, py, group))
            .collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        jobs.iter()
            .map(|&(px, py, group)| entry_for(records, px, py, group))
            .collect()
    }
}

/// Cross-run correlation: each run collapses to the mean of its complete
/// pairs, giving one point per run.
pub fn correlate_run_means(
    runs: &[Vec<SynchronizedRecord>],
    pairs: &[(String, String)],
) -> Vec<CorrelationEntry> {
    pairs
        .iter()
        .map(|(px, py)| {
            let mut xs = Vec::new();
            let mut ys = Vec::new();
            for run in runs {
                let (rx, ry) = complete_pairs(run, px, py, None);
                if !rx.is_empty() {
                    xs.push(rx.iter().sum::<f64>() / rx.len() as f64);
                    ys.push(ry.iter().sum::<f64>() / ry.len() as f64);
                }
            }
            CorrelationEntry {
                param_x: px.clone(),
                param_y: py.clone(),
                group: CorrelationGroup::RunMean,
                n: xs.len(),
                r: pearson(&xs, &ys).ok(),
            }
        })
        .collect()
}
