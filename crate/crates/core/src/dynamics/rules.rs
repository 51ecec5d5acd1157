use std::fmt;
use std::str::FromStr;

use rand::distr::{Bernoulli, Distribution};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::OpinionState;
use crate::error::{Error, Result};
use crate::graph::{cut_edges, neighbor_ones, Graph};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rule {
    Voter,
    TwoChoices,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Rule::Voter => "voter",
            Rule::TwoChoices => "two-choices",
        })
    }
}

impl FromStr for Rule {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "voter" => Ok(Rule::Voter),
            "two-choices" | "2-choices" | "two_choices" => Ok(Rule::TwoChoices),
            other => Err(Error::Parameter(format!("unknown rule '{other}'"))),
        }
    }
}

/// Update probabilities: an opinion-0 agent updates with `q0`, an
/// opinion-1 agent with `q1`.
///
/// Only `0 <= q1 <= q0 <= 1` is enforced here so the unbiased `q0 == q1`
/// chain stays available; operations that need a strict bias check it
/// themselves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BiasParams {
    pub q0: f64,
    pub q1: f64,
}

impl BiasParams {
    pub fn new(q0: f64, q1: f64) -> Result<Self> {
        let b = BiasParams { q0, q1 };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        let (q0, q1) = (self.q0, self.q1);
        if !(0.0..=1.0).contains(&q0) || !(0.0..=1.0).contains(&q1) {
            return Err(Error::Bias(format!("q0 = {q0}, q1 = {q1} must lie in [0, 1]")));
        }
        if q1 > q0 {
            return Err(Error::Bias(format!("need q1 <= q0, got q0 = {q0}, q1 = {q1}")));
        }
        Ok(())
    }

    /// Errors unless `q1 < q0`.
    pub fn require_strict(&self) -> Result<()> {
        self.validate()?;
        if self.q1 >= self.q0 {
            return Err(Error::Bias(format!(
                "biased theory needs q1 < q0, got q0 = {}, q1 = {}",
                self.q0, self.q1
            )));
        }
        Ok(())
    }

    #[inline]
    pub fn rate(&self, opinion: bool) -> f64 {
        if opinion {
            self.q1
        } else {
            self.q0
        }
    }

    /// `q1 / (q0 + q1)`
    pub fn inferior_share(&self) -> f64 {
        self.q1 / (self.q0 + self.q1)
    }

    /// `q0 / (q0 + q1)`
    pub fn superior_share(&self) -> f64 {
        self.q0 / (self.q0 + self.q1)
    }
}

/// Realized one-round change in the number of opinion-1 agents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct DriftSample {
    /// agents flipping 0 -> 1
    pub delta_ba: usize,
    /// agents flipping 1 -> 0
    pub delta_ab: usize,
    pub delta: i64,
}

/// Runs one synchronous round into `next`, reading only `old`.
///
/// Coins are drawn agent by agent in vertex order: first the update coin
/// (`q0` or `q1` by current opinion), then, only if the agent updates, one
/// neighbor index (voter) or two (2-choices), each uniform over the
/// neighborhood and drawn with replacement.
pub fn step_into<R: Rng + ?Sized>(
    g: &Graph,
    rule: Rule,
    old: &OpinionState,
    bias: &BiasParams,
    rng: &mut R,
    next: &mut OpinionState,
) -> DriftSample {
    let n = g.n();
    let d = g.d();
    assert_eq!(old.len(), n, "state length must match the graph");
    if next.len() != n {
        *next = OpinionState::uniform(n, false);
    }
    let coin = [
        Bernoulli::new(bias.q0).expect("q0 validated"),
        Bernoulli::new(bias.q1).expect("q1 validated"),
    ];
    let adj = g.adjacency();
    let src = old.words();
    let bit = |v: u32| (src[v as usize >> 6] >> (v & 63)) & 1 == 1;
    let (mut up, mut down, mut ones) = (0usize, 0usize, 0usize);
    for (w, out) in next.words_mut().iter_mut().enumerate() {
        let mut word = 0u64;
        for u in w * 64..(w * 64 + 64).min(n) {
            let x = (src[w] >> (u & 63)) & 1 == 1;
            let mut y = x;
            if coin[x as usize].sample(rng) {
                let nb = &adj[u * d..(u + 1) * d];
                y = match rule {
                    Rule::Voter => bit(nb[rng.random_range(0..d)]),
                    Rule::TwoChoices => {
                        let a = bit(nb[rng.random_range(0..d)]);
                        let b = bit(nb[rng.random_range(0..d)]);
                        // majority of {x, a, b}
                        if a == b {
                            a
                        } else {
                            x
                        }
                    }
                };
            }
            word |= (y as u64) << (u & 63);
            up += (!x && y) as usize;
            down += (x && !y) as usize;
        }
        ones += word.count_ones() as usize;
        *out = word;
    }
    next.set_count_one(ones);
    DriftSample { delta_ba: up, delta_ab: down, delta: up as i64 - down as i64 }
}

pub fn step<R: Rng + ?Sized>(
    g: &Graph,
    rule: Rule,
    s: &OpinionState,
    bias: &BiasParams,
    rng: &mut R,
) -> (OpinionState, DriftSample) {
    let mut next = OpinionState::uniform(g.n(), false);
    let drift = step_into(g, rule, s, bias, rng, &mut next);
    (next, drift)
}

/// Biased voter round: an updating agent copies one uniformly sampled
/// neighbor.
pub fn voter_step<R: Rng + ?Sized>(
    g: &Graph,
    s: &OpinionState,
    bias: &BiasParams,
    rng: &mut R,
) -> (OpinionState, DriftSample) {
    step(g, Rule::Voter, s, bias, rng)
}

/// Biased 2-choices round: an updating agent adopts the majority of its own
/// opinion and two neighbors sampled with replacement.
pub fn two_choices_step<R: Rng + ?Sized>(
    g: &Graph,
    s: &OpinionState,
    bias: &BiasParams,
    rng: &mut R,
) -> (OpinionState, DriftSample) {
    step(g, Rule::TwoChoices, s, bias, rng)
}

/// Probability that agent `u` holds opinion 1 after the next round.
pub fn next_one_probability(g: &Graph, s: &OpinionState, bias: &BiasParams, rule: Rule, u: usize) -> f64 {
    let d = g.d() as f64;
    let frac_one = neighbor_ones(g, s, u) as f64 / d;
    let x = s.get(u);
    match (rule, x) {
        (Rule::Voter, false) => bias.q0 * frac_one,
        (Rule::Voter, true) => 1.0 - bias.q1 * (1.0 - frac_one),
        (Rule::TwoChoices, false) => bias.q0 * frac_one * frac_one,
        (Rule::TwoChoices, true) => 1.0 - bias.q1 * (1.0 - frac_one) * (1.0 - frac_one),
    }
}

/// Conditional expectations `(E[delta_ba], E[delta_ab])` given the state.
pub fn expected_flows(g: &Graph, s: &OpinionState, bias: &BiasParams, rule: Rule) -> (f64, f64) {
    assert_eq!(s.len(), g.n(), "state length must match the graph");
    let d = g.d() as f64;
    match rule {
        Rule::Voter => {
            let cut = cut_edges(g, s).expect("length checked") as f64;
            (bias.q0 * cut / d, bias.q1 * cut / d)
        }
        Rule::TwoChoices => {
            let up: f64 = s.zeros().map(|u| (neighbor_ones(g, s, u) as f64 / d).powi(2)).sum();
            let down: f64 = s
                .ones()
                .map(|u| ((g.d() - neighbor_ones(g, s, u)) as f64 / d).powi(2))
                .sum();
            (bias.q0 * up, bias.q1 * down)
        }
    }
}

/// Exact `E[delta | state]`.
///
/// Voter: `(q0 - q1) E(A,B) / d`. 2-choices:
/// `sum_{i in B} q0 (d_i^A/d)^2 - sum_{i in A} q1 (d_i^B/d)^2`.
pub fn exact_expected_drift(g: &Graph, s: &OpinionState, bias: &BiasParams, rule: Rule) -> f64 {
    let (up, down) = expected_flows(g, s, bias, rule);
    up - down
}

/// `sum_{i in B} (d_i^A/d)^2 - sum_{i in A} (d_i^B/d)^2`, the unweighted
/// 2-choices imbalance.
pub fn quadratic_imbalance(g: &Graph, s: &OpinionState) -> f64 {
    let unit = BiasParams { q0: 1.0, q1: 1.0 };
    exact_expected_drift(g, s, &unit, Rule::TwoChoices)
}
