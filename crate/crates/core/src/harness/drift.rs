use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::batch::with_workers;
use super::stats::mean_and_sd;
use crate::dynamics::{
    adversary_shuffle, exact_expected_drift, quadratic_imbalance, step_into, AdversaryMode, BiasParams, OpinionState,
    Rule,
};
use crate::error::{Error, Result};
use crate::graph::{cut_edges, Graph, SpectralProfile};
use crate::rng;
use crate::theory::{
    default_margin, epsilon_prime, quadratic_imbalance_lb, refined_drift_lb, two_choices_drift_lb, voter_drift_lb,
};

/// Slack allowed when comparing a bound with an exact expectation.
pub const BOUND_REL_TOL: f64 = 1e-9;

fn bound_holds(lb: f64, exact: f64) -> bool {
    lb <= exact + BOUND_REL_TOL * exact.abs().max(1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftCheckConfig {
    pub states: usize,
    pub replays: usize,
    /// allowed |z| of the empirical mean against the exact drift
    pub sigma: f64,
    pub seed: u64,
    pub rules: Vec<Rule>,
    /// spectral margin for the refined bound; defaults from `lambda`
    pub c: Option<f64>,
}

impl DriftCheckConfig {
    pub fn new(states: usize, replays: usize, seed: u64) -> Self {
        DriftCheckConfig { states, replays, sigma: 4.0, seed, rules: vec![Rule::Voter, Rule::TwoChoices], c: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftRow {
    pub rule: Rule,
    pub state_index: usize,
    /// `uniform` or `cluster`
    pub placement: String,
    pub a: usize,
    pub b: usize,
    pub cut: usize,
    pub exact: f64,
    pub empirical_mean: f64,
    pub empirical_se: f64,
    pub z: f64,
    pub empirical_ok: bool,
    /// voter: Cheeger-based bound; 2-choices: the `lambda`-only bound
    pub lower_bound: Option<f64>,
    pub lower_bound_ok: Option<bool>,
    pub eps_prime: Option<f64>,
    /// `None` where `eps' < 2 lambda^2` or no margin `c` is admissible
    pub refined_lb: Option<f64>,
    pub refined_ok: Option<bool>,
    pub quadratic: Option<f64>,
    pub quadratic_lb: Option<f64>,
    pub quadratic_ok: Option<bool>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct DriftTally {
    pub rows: usize,
    pub empirical_outliers: usize,
    pub lower_bound_violations: usize,
    pub refined_checked: usize,
    pub refined_skipped: usize,
    pub refined_violations: usize,
    pub quadratic_violations: usize,
    pub max_abs_z: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftReport {
    pub n: usize,
    pub d: usize,
    pub spectral: SpectralProfile,
    pub bias: BiasParams,
    pub c: Option<f64>,
    pub config: DriftCheckConfig,
    pub rows: Vec<DriftRow>,
    pub tally: DriftTally,
}

impl DriftReport {
    pub fn passed(&self) -> bool {
        let t = &self.tally;
        t.empirical_outliers == 0
            && t.lower_bound_violations == 0
            && t.refined_violations == 0
            && t.quadratic_violations == 0
    }
}

/// Test state `i`: even indices place `A` uniformly, odd ones pack the ones
/// into a greedy low-cut cluster. `A` is uniform in `[1, n - 1]`.
pub fn drift_test_state(g: &Graph, seed: u64, i: usize) -> (OpinionState, &'static str) {
    let mut r = rng::stream(rng::derive_seed(rng::derive_labeled(seed, "states"), i as u64));
    let n = g.n();
    let a = rand::Rng::random_range(&mut r, 1..n);
    let s = OpinionState::random_with_count(n, a, &mut r);
    if i.is_multiple_of(2) {
        (s, "uniform")
    } else {
        (adversary_shuffle(g, &s, AdversaryMode::CutMinimizingGreedy, &mut r), "cluster")
    }
}

/// Compares exact one-step drift with replayed rounds and with every
/// applicable lower bound, on `cfg.states` test states.
pub fn drift_check(
    g: &Graph,
    spectral: &SpectralProfile,
    bias: &BiasParams,
    cfg: &DriftCheckConfig,
    workers: Option<usize>,
) -> Result<DriftReport> {
    bias.validate()?;
    let mut issues = Vec::new();
    if g.n() < 2 {
        issues.push("graph.n: need at least 2 vertices".to_string());
    }
    if cfg.states == 0 {
        issues.push("states: must be at least 1".to_string());
    }
    if cfg.replays < 2 {
        issues.push("replays: must be at least 2".to_string());
    }
    if !(cfg.sigma > 0.0) {
        issues.push("sigma: must be positive".to_string());
    }
    if cfg.rules.is_empty() {
        issues.push("rules: must name at least one rule".to_string());
    }
    let lambda = spectral.lambda;
    if let Some(c) = cfg.c {
        if !(c > 0.0 && c <= bias.superior_share() - lambda * lambda) {
            issues.push(format!("c: {c} outside (0, q0/(q0+q1) - lambda^2]"));
        }
    }
    if !issues.is_empty() {
        return Err(Error::Config(issues));
    }
    g.require_connected()?;
    let c = cfg.c.or_else(|| default_margin(lambda, bias));

    let jobs: Vec<(Rule, usize)> =
        cfg.rules.iter().flat_map(|&rule| (0..cfg.states).map(move |i| (rule, i))).collect();
    let rows: Vec<DriftRow> = with_workers(workers, || {
        jobs.par_iter().map(|&(rule, i)| check_state(g, spectral, bias, cfg, c, rule, i)).collect()
    })?;

    let mut tally = DriftTally { rows: rows.len(), ..Default::default() };
    for r in &rows {
        tally.empirical_outliers += !r.empirical_ok as usize;
        tally.lower_bound_violations += (r.lower_bound_ok == Some(false)) as usize;
        tally.quadratic_violations += (r.quadratic_ok == Some(false)) as usize;
        if r.rule == Rule::TwoChoices {
            match r.refined_ok {
                Some(ok) => {
                    tally.refined_checked += 1;
                    tally.refined_violations += !ok as usize;
                }
                None => tally.refined_skipped += 1,
            }
        }
        if r.z.is_finite() {
            tally.max_abs_z = tally.max_abs_z.max(r.z.abs());
        }
    }
    Ok(DriftReport { n: g.n(), d: g.d(), spectral: *spectral, bias: *bias, c, config: cfg.clone(), rows, tally })
}

fn check_state(
    g: &Graph,
    spectral: &SpectralProfile,
    bias: &BiasParams,
    cfg: &DriftCheckConfig,
    c: Option<f64>,
    rule: Rule,
    i: usize,
) -> DriftRow {
    let (s, placement) = drift_test_state(g, cfg.seed, i);
    let (a, b) = (s.count_one(), s.count_zero());
    let cut = cut_edges(g, &s).expect("state built for this graph");
    let exact = exact_expected_drift(g, &s, bias, rule);

    let label = format!("replay-{rule}");
    let mut r = rng::stream(rng::derive_seed(rng::derive_labeled(cfg.seed, &label), i as u64));
    let mut next = OpinionState::uniform(g.n(), false);
    let deltas: Vec<f64> =
        (0..cfg.replays).map(|_| step_into(g, rule, &s, bias, &mut r, &mut next).delta as f64).collect();
    let (mean, sd) = mean_and_sd(&deltas);
    let se = sd / (cfg.replays as f64).sqrt();
    let diff = mean - exact;
    let z = if se > 0.0 { diff / se } else if diff.abs() < 1e-12 { 0.0 } else { f64::INFINITY };
    let empirical_ok = z.abs() <= cfg.sigma;

    let lambda = spectral.lambda;
    let mut row = DriftRow {
        rule,
        state_index: i,
        placement: placement.to_string(),
        a,
        b,
        cut,
        exact,
        empirical_mean: mean,
        empirical_se: se,
        z,
        empirical_ok,
        lower_bound: None,
        lower_bound_ok: None,
        eps_prime: None,
        refined_lb: None,
        refined_ok: None,
        quadratic: None,
        quadratic_lb: None,
        quadratic_ok: None,
    };
    match rule {
        Rule::Voter => {
            // needs q0 > q1 and a positive certified conductance
            if let Ok(lb) = voter_drift_lb(a.min(b), spectral.phi_lower, bias) {
                row.lower_bound = Some(lb);
                row.lower_bound_ok = Some(bound_holds(lb, exact));
            }
        }
        Rule::TwoChoices => {
            let lb = two_choices_drift_lb(a, b, lambda, bias);
            row.lower_bound = Some(lb);
            row.lower_bound_ok = Some(bound_holds(lb, exact));
            let eps = epsilon_prime(a, b, bias);
            row.eps_prime = Some(eps);
            if let Some(c) = c {
                if eps >= 2.0 * lambda * lambda {
                    let rlb = refined_drift_lb(b, bias.q1, c, eps);
                    row.refined_lb = Some(rlb);
                    row.refined_ok = Some(bound_holds(rlb, exact));
                }
            }
            let quad = quadratic_imbalance(g, &s);
            let qlb = quadratic_imbalance_lb(a, b, cut, g.d(), lambda);
            row.quadratic = Some(quad);
            row.quadratic_lb = Some(qlb);
            row.quadratic_ok = Some(bound_holds(qlb, quad));
        }
    }
    row
}
