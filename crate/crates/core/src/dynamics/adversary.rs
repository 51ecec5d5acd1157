use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::OpinionState;
use crate::error::{Error, Result};
use crate::graph::Graph;

/// How the adversary rearranges opinions between rounds. Every mode keeps
/// both opinion counts unchanged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AdversaryMode {
    #[default]
    None,
    /// Uniformly random placement of the same opinion multiset.
    RandomShuffle,
    /// Packs the minority opinion into one connected cluster to shrink the
    /// cut. A heuristic stress strategy, not an optimal adversary.
    CutMinimizingGreedy,
}

impl fmt::Display for AdversaryMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AdversaryMode::None => "none",
            AdversaryMode::RandomShuffle => "random-shuffle",
            AdversaryMode::CutMinimizingGreedy => "cut-minimizing-greedy",
        })
    }
}

impl FromStr for AdversaryMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(AdversaryMode::None),
            "random-shuffle" | "random_shuffle" | "shuffle" => Ok(AdversaryMode::RandomShuffle),
            "cut-minimizing-greedy" | "cut_minimizing_greedy" | "greedy" => {
                Ok(AdversaryMode::CutMinimizingGreedy)
            }
            other => Err(Error::Parameter(format!("unknown adversary mode '{other}'"))),
        }
    }
}

/// Redistributes opinions over the vertices without changing how many
/// agents hold each one. `AdversaryMode::None` returns the state unchanged.
pub fn adversary_shuffle<R: Rng + ?Sized>(
    g: &Graph,
    s: &OpinionState,
    mode: AdversaryMode,
    rng: &mut R,
) -> OpinionState {
    assert_eq!(s.len(), g.n(), "state length must match the graph");
    let n = g.n();
    let a = s.count_one();
    if a == 0 || a == n {
        return s.clone();
    }
    match mode {
        AdversaryMode::None => s.clone(),
        AdversaryMode::RandomShuffle => OpinionState::random_with_count(n, a, rng),
        AdversaryMode::CutMinimizingGreedy => {
            let minority_is_one = a <= n - a;
            let k = a.min(n - a);
            let cluster = grow_cluster(g, k, rng.random_range(0..n));
            let mut out = OpinionState::uniform(n, !minority_is_one);
            for u in cluster {
                out.set(u, minority_is_one);
            }
            out
        }
    }
}

/// Grows a vertex set of size `k` from `start`, always adding the frontier
/// vertex with the most neighbors already inside (lowest index on ties).
fn grow_cluster(g: &Graph, k: usize, start: usize) -> Vec<usize> {
    let n = g.n();
    let mut inside = vec![false; n];
    let mut links = vec![0usize; n];
    let mut heap = BinaryHeap::new();
    let mut cluster = Vec::with_capacity(k);
    heap.push((0usize, Reverse(start)));
    while cluster.len() < k {
        let next = loop {
            match heap.pop() {
                Some((l, Reverse(v))) if !inside[v] && l == links[v] => break Some(v),
                Some(_) => continue,
                None => break None,
            }
        };
        // an exhausted frontier only happens on disconnected graphs
        let v = next.unwrap_or_else(|| (0..n).find(|&u| !inside[u]).expect("k < n"));
        inside[v] = true;
        cluster.push(v);
        for &w in g.neighbors(v) {
            let w = w as usize;
            if !inside[w] {
                links[w] += 1;
                heap.push((links[w], Reverse(w)));
            }
        }
    }
    cluster
}
