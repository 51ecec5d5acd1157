//! Regular undirected graphs: the arena for every dynamics run.

mod cut;
mod generate;
mod io;
mod spectral;

pub use cut::{cut_edges, exact_conductance, neighbor_ones, MAX_CONDUCTANCE_N};
pub use generate::DEFAULT_RESTART_BUDGET;
pub use io::{read_edge_list, write_edge_list};
pub use spectral::{second_eigenvalue, SpectralOptions, SpectralProfile};
pub(crate) use spectral::second_eigenvalue_lenient;

use std::collections::VecDeque;

use crate::error::{Error, Result};

/// Immutable `d`-regular simple graph.
///
/// Neighbors live in one flat array; vertex `u` owns the sorted slice
/// `adjacency[u * d..(u + 1) * d]`, so the offsets are implicit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    d: usize,
    adjacency: Vec<u32>,
    connected: bool,
}

impl Graph {
    /// Builds a graph from per-vertex neighbor lists, checking regularity,
    /// symmetry and simplicity.
    pub fn from_neighbor_lists(lists: Vec<Vec<u32>>) -> Result<Self> {
        let n = lists.len();
        if n == 0 {
            return Err(Error::Parameter("graph must have at least one vertex".into()));
        }
        if n > u32::MAX as usize {
            return Err(Error::Capacity(format!("n = {n} exceeds u32 vertex ids")));
        }
        let d = lists[0].len();
        if d == 0 {
            return Err(Error::Parameter("degree must be positive".into()));
        }
        let mut adjacency = Vec::with_capacity(n * d);
        for (u, mut list) in lists.into_iter().enumerate() {
            if list.len() != d {
                return Err(Error::Structure(format!(
                    "vertex {u} has degree {} but vertex 0 has degree {d}",
                    list.len()
                )));
            }
            list.sort_unstable();
            for w in list.windows(2) {
                if w[0] == w[1] {
                    return Err(Error::Structure(format!("repeated edge {u}-{}", w[0])));
                }
            }
            if let Some(&v) = list.iter().find(|&&v| v as usize >= n || v as usize == u) {
                return Err(Error::Structure(format!("invalid neighbor {v} of vertex {u}")));
            }
            adjacency.extend_from_slice(&list);
        }
        let mut g = Graph { n, d, adjacency, connected: false };
        for u in 0..n {
            for &v in g.neighbors(u) {
                if g.neighbors(v as usize).binary_search(&(u as u32)).is_err() {
                    return Err(Error::Structure(format!("edge {u}-{v} is not symmetric")));
                }
            }
        }
        g.connected = g.traverse_connected();
        Ok(g)
    }

    /// Builds a graph from an undirected edge list.
    pub fn from_edges(n: usize, edges: &[(u32, u32)]) -> Result<Self> {
        let mut lists = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u as usize >= n || v as usize >= n {
                return Err(Error::Structure(format!("edge {u}-{v} out of range for n = {n}")));
            }
            lists[u as usize].push(v);
            lists[v as usize].push(u);
        }
        Self::from_neighbor_lists(lists)
    }

    /// Random simple `d`-regular graph on `n` vertices, deterministic in `seed`.
    pub fn random_regular(n: usize, d: usize, seed: u64) -> Result<Self> {
        generate::random_regular(n, d, seed, DEFAULT_RESTART_BUDGET)
    }

    pub fn random_regular_with_budget(n: usize, d: usize, seed: u64, budget: usize) -> Result<Self> {
        generate::random_regular(n, d, seed, budget)
    }

    /// Complete graph `K_n`, `n >= 2`.
    pub fn complete(n: usize) -> Result<Self> {
        generate::complete(n)
    }

    /// Cycle `C_n`, `n >= 3`.
    pub fn cycle(n: usize) -> Result<Self> {
        generate::cycle(n)
    }

    /// The Petersen graph (10 vertices, 3-regular).
    pub fn petersen() -> Self {
        generate::petersen()
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn edge_count(&self) -> usize {
        self.n * self.d / 2
    }

    pub fn is_connected(&self) -> bool {
        self.connected
    }

    #[inline]
    pub fn neighbors(&self, u: usize) -> &[u32] {
        &self.adjacency[u * self.d..(u + 1) * self.d]
    }

    pub fn adjacency(&self) -> &[u32] {
        &self.adjacency
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.neighbors(u).binary_search(&(v as u32)).is_ok()
    }

    /// Edges `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        (0..self.n).flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .filter(move |&&v| (v as usize) > u)
                .map(move |&v| (u as u32, v))
        })
    }

    /// Errors unless the graph is connected.
    pub fn require_connected(&self) -> Result<()> {
        if self.connected {
            Ok(())
        } else {
            Err(Error::Structure("graph is disconnected".into()))
        }
    }

    fn traverse_connected(&self) -> bool {
        let mut seen = vec![false; self.n];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        let mut reached = 1;
        while let Some(u) = queue.pop_front() {
            for &v in self.neighbors(u) {
                let v = v as usize;
                if !seen[v] {
                    seen[v] = true;
                    reached += 1;
                    queue.push_back(v);
                }
            }
        }
        reached == self.n
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn assert_invariants(g: &Graph) {
        assert_eq!((g.n() * g.d()) % 2, 0);
        for u in 0..g.n() {
            let nb = g.neighbors(u);
            assert_eq!(nb.len(), g.d());
            assert!(nb.windows(2).all(|w| w[0] < w[1]), "unsorted or repeated at {u}");
            for &v in nb {
                assert_ne!(v as usize, u, "self-loop at {u}");
                assert!(g.has_edge(v as usize, u), "asymmetric {u}-{v}");
            }
        }
    }

    #[test]
    fn complete_graph_shape() {
        let g = Graph::complete(4).unwrap();
        assert_eq!(g.edge_count(), 6);
        assert_eq!(g.d(), 3);
        assert_invariants(&g);

        let k2 = Graph::complete(2).unwrap();
        assert_eq!(k2.edge_count(), 1);
        assert_eq!(k2.d(), 1);
        assert!(k2.is_connected());
    }

    #[test]
    fn cycle_shape() {
        let g = Graph::cycle(5).unwrap();
        assert_eq!(g.edge_count(), 5);
        assert_eq!(g.d(), 2);
        assert_invariants(&g);
    }

    #[test]
    fn below_minimum_sizes_rejected() {
        assert!(matches!(Graph::cycle(2), Err(Error::Parameter(_))));
        assert!(matches!(Graph::complete(1), Err(Error::Parameter(_))));
    }

    #[test]
    fn petersen_is_cubic_and_connected() {
        let g = Graph::petersen();
        assert_eq!((g.n(), g.d(), g.edge_count()), (10, 3, 15));
        assert!(g.is_connected());
        assert_invariants(&g);
    }

    #[test]
    fn rejects_irregular_and_asymmetric_lists() {
        assert!(matches!(
            Graph::from_neighbor_lists(vec![vec![1], vec![0, 2], vec![1]]),
            Err(Error::Structure(_))
        ));
        assert!(matches!(
            Graph::from_neighbor_lists(vec![vec![1], vec![2], vec![0]]),
            Err(Error::Structure(_))
        ));
        assert!(matches!(
            Graph::from_neighbor_lists(vec![vec![0], vec![1]]),
            Err(Error::Structure(_))
        ));
    }

    #[test]
    fn two_disjoint_triangles_are_disconnected() {
        let g = Graph::from_edges(6, &[(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]).unwrap();
        assert!(!g.is_connected());
        assert!(matches!(g.require_connected(), Err(Error::Structure(_))));
    }

    #[test]
    fn edges_are_canonical() {
        let g = Graph::cycle(4).unwrap();
        let e: Vec<_> = g.edges().collect();
        assert_eq!(e, vec![(0, 1), (0, 3), (1, 2), (2, 3)]);
    }
}
