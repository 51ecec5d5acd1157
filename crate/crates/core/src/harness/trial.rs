use std::fmt;

use serde::{Deserialize, Serialize};

use super::config::Placement;
use super::experiment::Experiment;
use crate::dynamics::{adversary_shuffle, step_into, AdversaryMode, Opinion, OpinionState};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Winner {
    #[serde(rename = "0")]
    Zero,
    #[serde(rename = "1")]
    One,
    #[serde(rename = "timeout")]
    Timeout,
}

impl fmt::Display for Winner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Winner::Zero => "0",
            Winner::One => "1",
            Winner::Timeout => "timeout",
        })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DriftSummary {
    pub rounds: u64,
    pub total_up: u64,
    pub total_down: u64,
    /// rounds with a net loss of opinion-1 agents
    pub negative_rounds: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub trial_index: u64,
    pub trial_seed: u64,
    pub winner: Winner,
    /// `None` on timeout
    pub consensus_step: Option<u64>,
    pub final_count_one: usize,
    /// `(t, A_t)` every `trajectory_stride` rounds plus the last round; empty
    /// unless trajectories are recorded
    pub trajectory: Vec<(u64, usize)>,
    pub drift: DriftSummary,
}

/// Runs one trial to consensus or `max_steps`, deterministic in
/// `(root_seed, trial_index)`.
pub fn run_trial(exp: &Experiment, trial_index: u64) -> RunRecord {
    let cfg = &exp.config;
    let g = exp.graph.as_ref();
    let n = g.n();
    let trial_seed = rng::derive_seed(cfg.root_seed, trial_index);
    let mut rng = rng::stream(trial_seed);

    let mut state = match cfg.placement {
        Placement::Uniform => OpinionState::random_with_count(n, exp.a0, &mut rng),
        Placement::Prefix => OpinionState::from_ones(n, &(0..exp.a0).collect::<Vec<_>>()),
    };
    if cfg.adversary != AdversaryMode::None {
        state = adversary_shuffle(g, &state, cfg.adversary, &mut rng);
    }

    let stride = cfg.trajectory_stride.max(1) as u64;
    let mut trajectory = Vec::new();
    if cfg.record_trajectory {
        trajectory.push((0, state.count_one()));
    }
    let mut drift = DriftSummary::default();
    let mut next = OpinionState::uniform(n, false);
    let mut t = 0u64;
    while state.is_consensus().is_none() && t < exp.max_steps {
        let d = step_into(g, cfg.rule, &state, &cfg.bias, &mut rng, &mut next);
        std::mem::swap(&mut state, &mut next);
        if cfg.adversary != AdversaryMode::None {
            state = adversary_shuffle(g, &state, cfg.adversary, &mut rng);
        }
        t += 1;
        drift.rounds += 1;
        drift.total_up += d.delta_ba as u64;
        drift.total_down += d.delta_ab as u64;
        drift.negative_rounds += (d.delta < 0) as u64;
        if cfg.record_trajectory && t.is_multiple_of(stride) {
            trajectory.push((t, state.count_one()));
        }
    }
    if cfg.record_trajectory && trajectory.last().map(|p| p.0) != Some(t) {
        trajectory.push((t, state.count_one()));
    }
    let (winner, consensus_step) = match state.is_consensus() {
        Some(Opinion::One) => (Winner::One, Some(t)),
        Some(Opinion::Zero) => (Winner::Zero, Some(t)),
        None => (Winner::Timeout, None),
    };
    RunRecord {
        trial_index,
        trial_seed,
        winner,
        consensus_step,
        final_count_one: state.count_one(),
        trajectory,
        drift,
    }
}
