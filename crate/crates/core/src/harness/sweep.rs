use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::batch::{run_batch, BatchSummary};
use super::config::{ExperimentConfig, GraphKind, InitialCondition};
use super::experiment::{Experiment, Predictions};
use super::stats::linear_fit;
use crate::error::{Error, Result};
use crate::graph::second_eigenvalue_lenient;
use crate::graph::{SpectralOptions, SpectralProfile};
use crate::rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub fraction: f64,
    pub a0: usize,
    pub trials: usize,
    pub win1_frequency: f64,
    pub win1_ci_half_width: f64,
    pub mean_step: Option<f64>,
    pub median_step: Option<f64>,
    pub timeouts: usize,
    pub max_steps: u64,
    pub predictions: Predictions,
}

impl SweepPoint {
    fn from_summary(fraction: f64, s: &BatchSummary) -> Self {
        SweepPoint {
            fraction,
            a0: s.a0,
            trials: s.trials,
            win1_frequency: s.win1_frequency,
            win1_ci_half_width: s.win1_ci_half_width,
            mean_step: s.consensus_step.map(|c| c.mean),
            median_step: s.consensus_step.map(|c| c.median),
            timeouts: s.timeouts,
            max_steps: s.max_steps,
            predictions: s.predictions.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub n: usize,
    pub spectral: SpectralProfile,
    /// 2-choices threshold at the measured lambda (2-choices sweeps only)
    pub threshold: Option<f64>,
    pub points: Vec<SweepPoint>,
}

/// One batch per initial fraction, all on the same graph.
pub fn sweep_initial_fraction(
    config: &ExperimentConfig,
    fractions: &[f64],
    workers: Option<usize>,
) -> Result<SweepResult> {
    config.validate()?;
    if let Some(f) = fractions.iter().find(|f| !(0.0..=1.0).contains(*f)) {
        return Err(Error::Config(vec![format!("fractions: {f} outside [0, 1]")]));
    }
    let graph = Arc::new(config.graph.build(config.root_seed)?);
    graph.require_connected()?;
    let spectral = second_eigenvalue_lenient(&graph, &SpectralOptions::default())?;
    let mut points = Vec::with_capacity(fractions.len());
    let mut threshold = None;
    for &f in fractions {
        let mut cfg = config.clone();
        cfg.initial = InitialCondition::Fraction(f);
        let exp = Experiment::with_spectral(&cfg, graph.clone(), spectral)?;
        let batch = run_batch(&exp, workers)?;
        threshold = threshold.or(batch.summary.predictions.threshold);
        points.push(SweepPoint::from_summary(f, &batch.summary));
    }
    Ok(SweepResult { n: graph.n(), spectral, threshold, points })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub n: usize,
    pub ln_n: f64,
    pub a0: usize,
    pub graph_seed: Option<u64>,
    pub lambda: f64,
    pub trials: usize,
    pub win1_frequency: f64,
    pub timeouts: usize,
    pub median_step: Option<f64>,
    pub mean_step: Option<f64>,
    pub predicted_steps: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingResult {
    pub rows: Vec<ScalingRow>,
    /// least-squares fit of median consensus step against `ln n`
    pub slope: f64,
    pub intercept: f64,
    /// median at the largest size over median at the smallest
    pub median_ratio: Option<f64>,
}

/// Fresh graph and batch for every size in `sizes` (non-decreasing). Row
/// `i` of a random-regular study gets graph seed `derive_seed(base, i)`, so a
/// repeated size is run on a different graph.
pub fn scaling_study(template: &ExperimentConfig, sizes: &[usize], workers: Option<usize>) -> Result<ScalingResult> {
    if sizes.is_empty() || sizes.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::Config(vec!["sizes: must be non-empty and non-decreasing".into()]));
    }
    if template.graph.kind == GraphKind::File || template.graph.kind == GraphKind::Petersen {
        return Err(Error::Config(vec![format!("graph.kind: cannot rescale a {} graph", template.graph.kind)]));
    }
    let base_seed = template.graph.seed.unwrap_or_else(|| rng::derive_labeled(template.root_seed, "graph"));
    let mut rows = Vec::with_capacity(sizes.len());
    for (i, &n) in sizes.iter().enumerate() {
        let mut cfg = template.clone();
        cfg.graph.n = n;
        cfg.graph.seed = (cfg.graph.kind == GraphKind::RandomRegular).then(|| rng::derive_seed(base_seed, i as u64));
        let exp = Experiment::prepare(&cfg)?;
        let s = run_batch(&exp, workers)?.summary;
        rows.push(ScalingRow {
            n,
            ln_n: (n as f64).ln(),
            a0: s.a0,
            graph_seed: exp.config.graph.seed,
            lambda: s.spectral.lambda,
            trials: s.trials,
            win1_frequency: s.win1_frequency,
            timeouts: s.timeouts,
            median_step: s.consensus_step.map(|c| c.median),
            mean_step: s.consensus_step.map(|c| c.mean),
            predicted_steps: s.predictions.total_steps(cfg.rule),
        });
    }
    let fitted: Vec<(f64, f64)> = rows.iter().filter_map(|r| r.median_step.map(|m| (r.ln_n, m))).collect();
    let (x, y): (Vec<f64>, Vec<f64>) = fitted.into_iter().unzip();
    let (slope, intercept) = if x.len() >= 2 { linear_fit(&x, &y) } else { (f64::NAN, f64::NAN) };
    let median_ratio = match (rows.first().and_then(|r| r.median_step), rows.last().and_then(|r| r.median_step)) {
        (Some(a), Some(b)) if a > 0.0 => Some(b / a),
        _ => None,
    };
    Ok(ScalingResult { rows, slope, intercept, median_ratio })
}
