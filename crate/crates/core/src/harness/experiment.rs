use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use crate::dynamics::{BiasParams, Rule};
use crate::error::Result;
use crate::graph::second_eigenvalue_lenient;
use crate::graph::{Graph, SpectralOptions, SpectralProfile};
use crate::theory::{
    default_gamma, default_margin, two_choices_phase_times, two_choices_threshold, voter_phase_times,
    TwoChoicesPrediction, VoterPrediction,
};

pub const FALLBACK_MAX_STEPS: u64 = 10_000;
pub const MAX_STEPS_FACTOR: u64 = 50;

/// Theory attached to an experiment, evaluated at the measured `lambda`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Predictions {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub voter: Option<VoterPrediction>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub two_choices: Option<TwoChoicesPrediction>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    /// why a prediction is missing
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl Predictions {
    /// `T1 + T2` of the prediction matching `rule`.
    pub fn total_steps(&self, rule: Rule) -> Option<u64> {
        match rule {
            Rule::Voter => self.voter.map(|p| p.total_steps()),
            Rule::TwoChoices => self.two_choices.and_then(|p| p.total_steps()),
        }
    }

    pub fn compute(
        rule: Rule,
        n: usize,
        a0: usize,
        spectral: &SpectralProfile,
        bias: &BiasParams,
        c: Option<f64>,
        gamma: Option<f64>,
    ) -> Self {
        let mut out = Predictions::default();
        let lambda = spectral.lambda;
        match rule {
            Rule::Voter => {
                // the Cheeger lower bound is a certified conductance floor
                let phi = spectral.phi_lower;
                if a0 == 0 {
                    out.notes.push("voter phase times need A0 >= 1".into());
                } else if phi <= 0.0 {
                    out.notes.push("Cheeger lower bound is zero (lambda = 1)".into());
                } else {
                    match voter_phase_times(n, a0, phi, bias) {
                        Ok(p) => out.voter = Some(p),
                        Err(e) => out.notes.push(format!("voter: {e}")),
                    }
                }
            }
            Rule::TwoChoices => {
                out.threshold = Some(two_choices_threshold(n, lambda, bias));
                let c = c.or_else(|| default_margin(lambda, bias));
                match c {
                    None => out.notes.push("no admissible spectral margin c (lambda^2 too large)".into()),
                    Some(c) => {
                        let gamma = gamma.unwrap_or_else(|| default_gamma(c));
                        match two_choices_phase_times(n, n - a0, lambda, gamma, c, bias) {
                            Ok(p) => out.two_choices = Some(p),
                            Err(e) => out.notes.push(format!("two-choices: {e}")),
                        }
                    }
                }
            }
        }
        out
    }
}

/// A validated config bound to its graph, spectral profile and predictions.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub graph: Arc<Graph>,
    pub spectral: SpectralProfile,
    pub predictions: Predictions,
    pub a0: usize,
    pub max_steps: u64,
}

impl Experiment {
    pub fn prepare(config: &ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let graph = config.graph.build(config.root_seed)?;
        Self::on_graph(config, Arc::new(graph))
    }

    /// Binds `config` to an already built graph (sweeps reuse one graph).
    pub fn on_graph(config: &ExperimentConfig, graph: Arc<Graph>) -> Result<Self> {
        let spectral = second_eigenvalue_lenient(&graph, &SpectralOptions::default())?;
        Self::with_spectral(config, graph, spectral)
    }

    pub fn with_spectral(config: &ExperimentConfig, graph: Arc<Graph>, spectral: SpectralProfile) -> Result<Self> {
        config.validate()?;
        graph.require_connected()?;
        let mut config = config.clone();
        config.graph = config.graph.resolved(config.root_seed);
        config.graph.n = graph.n();
        let n = graph.n();
        let a0 = config.initial.resolve(n);
        if a0 > n {
            return Err(crate::Error::Config(vec![format!("initial: count {a0} exceeds n = {n}")]));
        }
        let predictions = Predictions::compute(
            config.rule,
            n,
            a0,
            &spectral,
            &config.bias,
            config.theory.c,
            config.theory.gamma,
        );
        let max_steps = config.max_steps.unwrap_or_else(|| {
            predictions
                .total_steps(config.rule)
                .map(|t| (MAX_STEPS_FACTOR * t).max(1))
                .unwrap_or(FALLBACK_MAX_STEPS)
        });
        Ok(Experiment { config, graph, spectral, predictions, a0, max_steps })
    }
}
