use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::experiment::{Experiment, Predictions};
use super::stats::{binomial_half_width, StepStats};
use super::trial::{run_trial, RunRecord, Winner};
use crate::error::{Error, Result};
use crate::graph::SpectralProfile;

/// Runs `f` on a dedicated pool of `workers` threads, or on the global pool.
pub fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match workers {
        None => Ok(f()),
        Some(0) => Err(Error::Parameter("workers must be at least 1".into())),
        Some(w) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(w)
                .build()
                .map_err(|e| Error::Internal(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchSummary {
    pub n: usize,
    pub a0: usize,
    pub trials: usize,
    pub max_steps: u64,
    pub wins_one: usize,
    pub wins_zero: usize,
    pub timeouts: usize,
    pub win1_frequency: f64,
    pub win1_ci_half_width: f64,
    /// over all trials that reached consensus
    pub consensus_step: Option<StepStats>,
    /// over trials won by opinion 1
    pub consensus_step_win1: Option<StepStats>,
    pub spectral: SpectralProfile,
    pub predictions: Predictions,
}

#[derive(Debug, Clone)]
pub struct BatchResult {
    pub records: Vec<RunRecord>,
    pub summary: BatchSummary,
}

/// Runs every trial of the experiment. Trials are independent work items;
/// results are reduced in trial-index order, so the output does not depend
/// on the worker count.
pub fn run_batch(exp: &Experiment, workers: Option<usize>) -> Result<BatchResult> {
    let trials = exp.config.trials as u64;
    let records: Vec<RunRecord> =
        with_workers(workers, || (0..trials).into_par_iter().map(|i| run_trial(exp, i)).collect())?;
    let summary = summarize(exp, &records);
    Ok(BatchResult { records, summary })
}

pub fn summarize(exp: &Experiment, records: &[RunRecord]) -> BatchSummary {
    let count = |w: Winner| records.iter().filter(|r| r.winner == w).count();
    let (wins_one, wins_zero, timeouts) = (count(Winner::One), count(Winner::Zero), count(Winner::Timeout));
    let trials = records.len();
    let freq = wins_one as f64 / trials as f64;
    let steps: Vec<f64> = records.iter().filter_map(|r| r.consensus_step).map(|s| s as f64).collect();
    let win_steps: Vec<f64> = records
        .iter()
        .filter(|r| r.winner == Winner::One)
        .filter_map(|r| r.consensus_step)
        .map(|s| s as f64)
        .collect();
    BatchSummary {
        n: exp.graph.n(),
        a0: exp.a0,
        trials,
        max_steps: exp.max_steps,
        wins_one,
        wins_zero,
        timeouts,
        win1_frequency: freq,
        win1_ci_half_width: binomial_half_width(freq, trials),
        consensus_step: StepStats::from_values(&steps),
        consensus_step_win1: StepStats::from_values(&win_steps),
        spectral: exp.spectral,
        predictions: exp.predictions.clone(),
    }
}
