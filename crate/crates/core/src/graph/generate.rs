use std::collections::{BTreeMap, HashSet};

use rand::seq::SliceRandom;

use super::Graph;
use crate::error::{Error, Result};
use crate::rng;

pub const DEFAULT_RESTART_BUDGET: usize = 1000;

/// Pairs degree stubs uniformly at random, rejecting loops and repeated
/// edges pair by pair. Stubs left over from rejected pairs are reshuffled and
/// paired again; the whole attempt restarts only when no admissible pair
/// remains among the leftovers.
pub(super) fn random_regular(n: usize, d: usize, seed: u64, budget: usize) -> Result<Graph> {
    if d == 0 || d >= n {
        return Err(Error::Parameter(format!("need 1 <= d < n, got n = {n}, d = {d}")));
    }
    if !(n * d).is_multiple_of(2) {
        return Err(Error::Parameter(format!("n*d must be even, got n = {n}, d = {d}")));
    }
    let mut rng = rng::stream(seed);
    for _ in 0..=budget {
        if let Some(edges) = try_pairing(n, d, &mut rng) {
            let mut lists = vec![Vec::with_capacity(d); n];
            for (u, v) in edges {
                lists[u as usize].push(v);
                lists[v as usize].push(u);
            }
            return Graph::from_neighbor_lists(lists);
        }
    }
    Err(Error::GenerationFailure { n, d, restarts: budget })
}

fn try_pairing(n: usize, d: usize, rng: &mut rng::SimRng) -> Option<HashSet<(u32, u32)>> {
    let mut edges = HashSet::with_capacity(n * d / 2);
    let mut stubs: Vec<u32> = (0..n as u32).flat_map(|u| std::iter::repeat_n(u, d)).collect();
    while !stubs.is_empty() {
        // BTreeMap keeps the leftover order, and hence the run, deterministic.
        let mut leftover: BTreeMap<u32, usize> = BTreeMap::new();
        stubs.shuffle(rng);
        for pair in stubs.chunks_exact(2) {
            let (a, b) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
            if a == b || !edges.insert((a, b)) {
                *leftover.entry(a).or_default() += 1;
                *leftover.entry(b).or_default() += 1;
            }
        }
        if !has_admissible_pair(&edges, &leftover) {
            return None;
        }
        stubs = leftover
            .iter()
            .flat_map(|(&u, &k)| std::iter::repeat_n(u, k))
            .collect();
    }
    Some(edges)
}

fn has_admissible_pair(edges: &HashSet<(u32, u32)>, leftover: &BTreeMap<u32, usize>) -> bool {
    if leftover.is_empty() {
        return true;
    }
    let keys: Vec<u32> = leftover.keys().copied().collect();
    keys.iter()
        .enumerate()
        .any(|(i, &a)| keys[i + 1..].iter().any(|&b| !edges.contains(&(a, b))))
}

pub(super) fn complete(n: usize) -> Result<Graph> {
    if n < 2 {
        return Err(Error::Parameter(format!("complete graph needs n >= 2, got {n}")));
    }
    let lists = (0..n as u32)
        .map(|u| (0..n as u32).filter(|&v| v != u).collect())
        .collect();
    Graph::from_neighbor_lists(lists)
}

pub(super) fn cycle(n: usize) -> Result<Graph> {
    if n < 3 {
        return Err(Error::Parameter(format!("cycle needs n >= 3, got {n}")));
    }
    let n32 = n as u32;
    let lists = (0..n32).map(|u| vec![(u + 1) % n32, (u + n32 - 1) % n32]).collect();
    Graph::from_neighbor_lists(lists)
}

pub(super) fn petersen() -> Graph {
    let mut edges = Vec::with_capacity(15);
    for i in 0..5u32 {
        edges.push((i, (i + 1) % 5));
        edges.push((i, i + 5));
        edges.push((5 + i, 5 + (i + 2) % 5));
    }
    Graph::from_edges(10, &edges).expect("Petersen graph is 3-regular")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::tests::assert_invariants;
    use proptest::prelude::*;

    #[test]
    fn four_vertex_cubic_is_k4() {
        for seed in 0..5 {
            let g = Graph::random_regular(4, 3, seed).unwrap();
            assert_eq!(g, Graph::complete(4).unwrap());
        }
    }

    #[test]
    fn odd_stub_count_rejected() {
        assert!(matches!(Graph::random_regular(5, 3, 1), Err(Error::Parameter(_))));
        assert!(matches!(Graph::random_regular(4, 4, 1), Err(Error::Parameter(_))));
        assert!(matches!(Graph::random_regular(4, 0, 1), Err(Error::Parameter(_))));
    }

    #[test]
    fn hundred_vertex_cubic() {
        let g = Graph::random_regular(100, 3, 7).unwrap();
        assert_eq!((g.n(), g.d()), (100, 3));
        assert_invariants(&g);
        assert!(g.is_connected());
    }

    #[test]
    fn dense_degrees_generate() {
        let g = Graph::random_regular(200, 10, 3).unwrap();
        assert_invariants(&g);
        let g = Graph::random_regular(4096, 8, 11).unwrap();
        assert_invariants(&g);
        assert!(g.is_connected());
    }

    #[test]
    fn zero_budget_can_still_succeed_on_first_attempt() {
        assert!(Graph::random_regular_with_budget(10, 3, 1, 0).is_ok());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn generated_graphs_are_simple_regular(n in 4usize..60, d in 1usize..8, seed: u64) {
            prop_assume!(d < n && (n * d) % 2 == 0);
            let g = Graph::random_regular(n, d, seed).unwrap();
            assert_invariants(&g);
        }

        #[test]
        fn generation_is_deterministic(seed: u64) {
            let a = Graph::random_regular(30, 4, seed).unwrap();
            let b = Graph::random_regular(30, 4, seed).unwrap();
            prop_assert_eq!(a.adjacency(), b.adjacency());
        }
    }
}
