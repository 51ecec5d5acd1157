use super::Graph;
use crate::dynamics::OpinionState;
use crate::error::{Error, Result};

/// Largest vertex count accepted by [`exact_conductance`].
pub const MAX_CONDUCTANCE_N: usize = 22;

/// Number of neighbors of `u` holding opinion 1 (`d_u^A`).
#[inline]
pub fn neighbor_ones(g: &Graph, s: &OpinionState, u: usize) -> usize {
    g.neighbors(u).iter().filter(|&&v| s.get(v as usize)).count()
}

/// `E(A, B)`: edges whose endpoints hold different opinions.
pub fn cut_edges(g: &Graph, s: &OpinionState) -> Result<usize> {
    if s.len() != g.n() {
        return Err(Error::Parameter(format!(
            "state has {} agents but graph has {} vertices",
            s.len(),
            g.n()
        )));
    }
    Ok(s.ones().map(|u| g.d() - neighbor_ones(g, s, u)).sum())
}

/// Conductance `min_{0 < |S| <= n/2} E(S, S^c) / (d |S|)` by enumerating
/// every vertex subset in Gray-code order, so each subset costs O(1).
pub fn exact_conductance(g: &Graph) -> Result<f64> {
    let n = g.n();
    if n > MAX_CONDUCTANCE_N {
        return Err(Error::Capacity(format!(
            "exact conductance needs n <= {MAX_CONDUCTANCE_N}, got {n}"
        )));
    }
    if n < 2 {
        return Err(Error::Parameter("conductance needs at least two vertices".into()));
    }
    let masks: Vec<u32> = (0..n)
        .map(|u| g.neighbors(u).iter().fold(0u32, |m, &v| m | (1 << v)))
        .collect();
    let d = g.d() as i64;
    let mut set = 0u32;
    let mut size = 0usize;
    let mut cut = 0i64;
    // best ratio kept as the fraction best_cut / best_size
    let (mut best_cut, mut best_size) = (i64::MAX, 1i64);
    for i in 1u64..(1u64 << n) {
        let v = i.trailing_zeros() as usize;
        let bit = 1u32 << v;
        if set & bit == 0 {
            cut += d - 2 * (masks[v] & set).count_ones() as i64;
            set |= bit;
            size += 1;
        } else {
            set &= !bit;
            cut -= d - 2 * (masks[v] & set).count_ones() as i64;
            size -= 1;
        }
        if size >= 1 && 2 * size <= n && cut * best_size < best_cut * size as i64 {
            best_cut = cut;
            best_size = size as i64;
        }
    }
    Ok(best_cut as f64 / (d * best_size) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute_conductance(g: &Graph) -> f64 {
        let n = g.n();
        let mut best = f64::INFINITY;
        for mask in 1u32..(1 << n) {
            let size = mask.count_ones() as usize;
            if 2 * size > n {
                continue;
            }
            let cut = g
                .edges()
                .filter(|&(u, v)| ((mask >> u) & 1) != ((mask >> v) & 1))
                .count();
            best = best.min(cut as f64 / (g.d() * size) as f64);
        }
        best
    }

    #[test]
    fn k4_conductance_is_two_thirds() {
        let g = Graph::complete(4).unwrap();
        assert!((exact_conductance(&g).unwrap() - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn c6_conductance_is_one_third() {
        let g = Graph::cycle(6).unwrap();
        assert!((exact_conductance(&g).unwrap() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn gray_code_matches_direct_enumeration() {
        for g in [
            Graph::petersen(),
            Graph::cycle(9).unwrap(),
            Graph::complete(7).unwrap(),
            Graph::random_regular(12, 3, 5).unwrap(),
            Graph::random_regular(14, 4, 9).unwrap(),
        ] {
            assert!((exact_conductance(&g).unwrap() - brute_conductance(&g)).abs() < 1e-15);
        }
    }

    #[test]
    fn conductance_capacity() {
        let g = Graph::cycle(23).unwrap();
        assert!(matches!(exact_conductance(&g), Err(Error::Capacity(_))));
    }

    #[test]
    fn cut_on_k4_with_two_ones() {
        let g = Graph::complete(4).unwrap();
        let s = OpinionState::from_ones(4, &[0, 1]);
        assert_eq!(cut_edges(&g, &s).unwrap(), 4);
        assert_eq!(cut_edges(&g, &OpinionState::uniform(4, true)).unwrap(), 0);
    }

    #[test]
    fn cut_length_mismatch() {
        let g = Graph::complete(4).unwrap();
        assert!(matches!(
            cut_edges(&g, &OpinionState::uniform(5, false)),
            Err(Error::Parameter(_))
        ));
    }

    proptest! {
        #[test]
        fn cut_is_symmetric_and_bounded_by_conductance(
            seed: u64,
            bits in proptest::collection::vec(any::<bool>(), 16),
        ) {
            let g = Graph::random_regular(16, 3, seed).unwrap();
            let s = OpinionState::from_bools(&bits);
            let cut = cut_edges(&g, &s).unwrap();
            prop_assert_eq!(cut, cut_edges(&g, &s.complement()).unwrap());
            let phi = exact_conductance(&g).unwrap();
            let m = s.count_one().min(s.count_zero());
            prop_assert!(cut as f64 >= phi * (g.d() * m) as f64 - 1e-9);
        }
    }
}
