//! Exact analysis of the full opinion chain on tiny graphs.
//!
//! States are encoded as `n`-bit integers (bit `u` is agent `u`'s opinion).
//! Agents update independently given the current state, so the next state
//! is a product of per-agent Bernoulli laws and `E[f(X') | X = s]` can be
//! computed by contracting `f` one agent at a time in `O(2^n)`. Absorption
//! probabilities and expected absorption times come from Gauss-Seidel
//! sweeps over the first-step equations.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::dynamics::{next_one_probability, BiasParams, OpinionState, Rule};
use crate::error::{Error, Result};
use crate::graph::Graph;

pub const MAX_ORACLE_N: usize = 14;

#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_sweeps: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { tol: 1e-12, max_sweeps: 200_000 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChainSolution {
    pub n: usize,
    pub rule: Rule,
    pub bias: BiasParams,
    /// indexed by state
    pub absorb_prob_one: Vec<f64>,
    /// indexed by state
    pub expected_time: Vec<f64>,
    pub sweeps: usize,
}

impl ChainSolution {
    /// Average absorption probability and expected time over all placements
    /// of `a` ones, i.e. for a uniformly random start with `A0 = a`.
    pub fn uniform_start(&self, a: usize) -> (f64, f64) {
        let (mut p, mut t, mut k) = (0.0, 0.0, 0usize);
        for (s, (&pi, &ti)) in self.absorb_prob_one.iter().zip(&self.expected_time).enumerate() {
            if s.count_ones() as usize == a {
                p += pi;
                t += ti;
                k += 1;
            }
        }
        (p / k as f64, t / k as f64)
    }

    /// CSV with columns `state_bits,absorb_prob_one,expected_time`; the bit
    /// string lists agent 0 first.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["state_bits", "absorb_prob_one", "expected_time"])?;
        for s in 0..self.absorb_prob_one.len() {
            let bits = OpinionState::from_index(self.n, s as u64).bit_string();
            w.write_record([
                bits,
                self.absorb_prob_one[s].to_string(),
                self.expected_time[s].to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Pairs `(state, agent)` where switching the agent from 0 to 1 lowers
    /// the absorption probability by more than `tol`.
    pub fn monotonicity_violations(&self, tol: f64) -> Vec<(u64, usize)> {
        let mut out = Vec::new();
        for s in 0..self.absorb_prob_one.len() {
            for u in 0..self.n {
                if s & (1 << u) == 0 && self.absorb_prob_one[s | (1 << u)] < self.absorb_prob_one[s] - tol {
                    out.push((s as u64, u));
                }
            }
        }
        out
    }
}

fn check_capacity(g: &Graph) -> Result<()> {
    if g.n() > MAX_ORACLE_N {
        return Err(Error::Capacity(format!(
            "exact chain analysis needs n <= {MAX_ORACLE_N}, got {}",
            g.n()
        )));
    }
    Ok(())
}

/// Probability that each agent holds opinion 1 after one round from `s`.
fn next_one_probabilities(g: &Graph, s: &OpinionState, bias: &BiasParams, rule: Rule) -> Vec<f64> {
    (0..g.n()).map(|u| next_one_probability(g, s, bias, rule, u)).collect()
}

/// One-step transition probability `P(s_from -> s_to)`.
pub fn transition_probability(
    g: &Graph,
    from: &OpinionState,
    to: &OpinionState,
    bias: &BiasParams,
    rule: Rule,
) -> Result<f64> {
    check_capacity(g)?;
    if from.len() != g.n() || to.len() != g.n() {
        return Err(Error::Parameter("state length must match the graph".into()));
    }
    Ok(next_one_probabilities(g, from, bias, rule)
        .iter()
        .enumerate()
        .map(|(u, &p)| if to.get(u) { p } else { 1.0 - p })
        .product())
}

/// `E[f(X')]` for independent bits `X'_u ~ Bernoulli(pi[u])`, using `buf`
/// as scratch; `f` is indexed by state.
fn contract(f: &[f64], pi: &[f64], buf: &mut [f64]) -> f64 {
    buf.copy_from_slice(f);
    for k in (0..pi.len()).rev() {
        let half = 1usize << k;
        let (p1, p0) = (pi[k], 1.0 - pi[k]);
        let (lo, hi) = buf[..2 * half].split_at_mut(half);
        for (a, &b) in lo.iter_mut().zip(hi.iter()) {
            *a = p0 * *a + p1 * b;
        }
    }
    buf[0]
}

pub fn solve_absorption(g: &Graph, bias: &BiasParams, rule: Rule) -> Result<ChainSolution> {
    solve_absorption_with(g, bias, rule, &SolverOptions::default())
}

/// Solves `p = T p` with `p(1^n) = 1`, `p(0^n) = 0` and `t = 1 + T t` with
/// `t = 0` on both absorbing states.
pub fn solve_absorption_with(
    g: &Graph,
    bias: &BiasParams,
    rule: Rule,
    opts: &SolverOptions,
) -> Result<ChainSolution> {
    check_capacity(g)?;
    bias.validate()?;
    g.require_connected()?;
    let n = g.n();
    let size = 1usize << n;
    let full = size - 1;

    let mut pis = Vec::with_capacity(size);
    let mut stays = Vec::with_capacity(size);
    for s in 0..size {
        let state = OpinionState::from_index(n, s as u64);
        let pi = next_one_probabilities(g, &state, bias, rule);
        let stay: f64 = pi
            .iter()
            .enumerate()
            .map(|(u, &p)| if s & (1 << u) != 0 { p } else { 1.0 - p })
            .product();
        if s != 0 && s != full && 1.0 - stay < 1e-14 {
            return Err(Error::Structure(format!(
                "state {} never leaves itself; the chain is not absorbing",
                state.bit_string()
            )));
        }
        pis.push(pi);
        stays.push(stay);
    }

    let mut p: Vec<f64> = (0..size).map(|s| s.count_ones() as f64 / n as f64).collect();
    let mut t = vec![0.0; size];
    let mut buf = vec![0.0; size];
    for sweep in 1..=opts.max_sweeps {
        let mut change = 0.0f64;
        for s in 1..full {
            let stay = stays[s];
            let ep = contract(&p, &pis[s], &mut buf);
            let et = contract(&t, &pis[s], &mut buf);
            let p_new = (ep - stay * p[s]) / (1.0 - stay);
            let t_new = (1.0 + et - stay * t[s]) / (1.0 - stay);
            change = change
                .max((p_new - p[s]).abs())
                .max((t_new - t[s]).abs() / t_new.max(1.0));
            p[s] = p_new;
            t[s] = t_new;
        }
        if change <= opts.tol {
            return Ok(ChainSolution {
                n,
                rule,
                bias: *bias,
                absorb_prob_one: p.iter().map(|v| v.clamp(0.0, 1.0)).collect(),
                expected_time: t,
                sweeps: sweep,
            });
        }
    }
    Err(Error::Structure(format!(
        "Gauss-Seidel did not reach {} within {} sweeps",
        opts.tol, opts.max_sweeps
    )))
}
