//! Synchronous biased update rules, drift decomposition and the
//! opinion-redistributing adversary.

mod adversary;
mod rules;
mod state;

pub use adversary::{adversary_shuffle, AdversaryMode};
pub use rules::{
    exact_expected_drift, expected_flows, next_one_probability, quadratic_imbalance, step,
    step_into, two_choices_step, voter_step, BiasParams, DriftSample, Rule,
};
pub use state::{Opinion, OpinionState};
