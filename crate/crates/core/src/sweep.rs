//! Batches of independent runs and their aggregate statistics.
//!
//! Runs share nothing and are fully determined by their configuration, so a
//! batch gives the same results in any execution order.

use std::fmt::Write as _;

use serde::Serialize;

use crate::sim::{RunMetrics, ScenarioConfig};

/// Copies of `base` with seeds `start..start + count`.
pub fn seed_configs(base: &ScenarioConfig, start: u64, count: u64) -> Vec<ScenarioConfig> {
    (start..start + count)
        .map(|seed| ScenarioConfig { seed, ..base.clone() })
        .collect()
}

/// Applies `f` to every configuration in order on the calling thread.
pub fn map_sequential<T, F>(configs: &[ScenarioConfig], f: F) -> Vec<T>
where
    F: Fn(usize, &ScenarioConfig) -> T,
{
    configs.iter().enumerate().map(|(i, c)| f(i, c)).collect()
}

/// Applies `f` to every configuration on the rayon pool. Output order
/// matches input order.
#[cfg(feature = "parallel")]
pub fn map_parallel<T, F>(configs: &[ScenarioConfig], f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize, &ScenarioConfig) -> T + Sync + Send,
{
    use rayon::prelude::*;
    configs.par_iter().enumerate().map(|(i, c)| f(i, c)).collect()
}

/// Parallel when the `parallel` feature is enabled, sequential otherwise.
pub fn map_runs<T, F>(configs: &[ScenarioConfig], f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize, &ScenarioConfig) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        map_parallel(configs, f)
    }
    #[cfg(not(feature = "parallel"))]
    {
        map_sequential(configs, f)
    }
}

/// Outcome of one run in a batch.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BatchRow {
    pub seed: u64,
    pub metrics: Option<RunMetrics>,
    /// Abort or configuration error, if the run did not complete.
    pub error: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Summary {
    pub count: usize,
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub max: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = if values.len() > 1 {
            values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        Some(Self {
            count: values.len(),
            mean,
            std: var.sqrt(),
            min: values.iter().copied().fold(f64::INFINITY, f64::min),
            max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Aggregate {
    pub runs: usize,
    pub completed: usize,
    pub settled: usize,
    pub settle_time_2pct: Option<Summary>,
    pub steady_state_error: Option<Summary>,
    pub overshoot: Option<Summary>,
    pub max_glidepath_deviation: Option<Summary>,
    pub touchdown_vertical_error: Option<Summary>,
    pub observer_rms_error: Option<Summary>,
    pub pitch_tracking_rms: Option<Summary>,
}

pub fn aggregate(rows: &[BatchRow]) -> Aggregate {
    let done: Vec<&RunMetrics> = rows.iter().filter_map(|r| r.metrics.as_ref()).collect();
    let col = |f: fn(&RunMetrics) -> Option<f64>| Summary::of(&done.iter().filter_map(|m| f(m)).collect::<Vec<_>>());
    Aggregate {
        runs: rows.len(),
        completed: done.len(),
        settled: done.iter().filter(|m| m.settle_time_2pct.is_some()).count(),
        settle_time_2pct: col(|m| m.settle_time_2pct),
        steady_state_error: col(|m| Some(m.steady_state_error)),
        overshoot: col(|m| Some(m.overshoot)),
        max_glidepath_deviation: col(|m| Some(m.max_glidepath_deviation)),
        touchdown_vertical_error: col(|m| m.touchdown_vertical_error),
        observer_rms_error: col(|m| Some(m.observer_rms_error)),
        pitch_tracking_rms: col(|m| Some(m.pitch_tracking_rms)),
    }
}

pub const TABLE_HEADER: &str = "seed,status,settle_time_2pct,steady_state_error,overshoot,max_glidepath_deviation,\
touchdown_vertical_error,elevator_saturation_count,thrust_saturation_count,observer_rms_error,pitch_tracking_rms";

/// One CSV line per run; empty cells for values that do not apply.
pub fn table_csv(rows: &[BatchRow]) -> String {
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    let mut out = format!("{TABLE_HEADER}\n");
    for r in rows {
        match &r.metrics {
            Some(m) => {
                let status = if m.settle_time_2pct.is_some() || m.touchdown_time.is_some() {
                    "ok"
                } else {
                    "unsettled"
                };
                let _ = writeln!(
                    out,
                    "{},{status},{},{},{},{},{},{},{},{},{}",
                    r.seed,
                    opt(m.settle_time_2pct),
                    m.steady_state_error,
                    m.overshoot,
                    m.max_glidepath_deviation,
                    opt(m.touchdown_vertical_error),
                    m.elevator_saturation_count,
                    m.thrust_saturation_count,
                    m.observer_rms_error,
                    m.pitch_tracking_rms,
                );
            }
            None => {
                let _ = writeln!(out, "{},abort,,,,,,,,,", r.seed);
            }
        }
    }
    out
}
