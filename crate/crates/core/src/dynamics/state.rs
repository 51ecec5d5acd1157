use bitvec::prelude::*;
use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Opinion {
    #[serde(rename = "0")]
    Zero,
    #[serde(rename = "1")]
    One,
}

impl Opinion {
    pub fn as_bool(self) -> bool {
        matches!(self, Opinion::One)
    }
}

/// Opinions of all agents as a bit vector (`1` = superior opinion), with the
/// count of ones cached.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OpinionState {
    bits: BitVec<u64, Lsb0>,
    count_one: usize,
}

impl OpinionState {
    pub fn uniform(n: usize, opinion: bool) -> Self {
        OpinionState { bits: BitVec::repeat(opinion, n), count_one: if opinion { n } else { 0 } }
    }

    /// Agents listed in `ones` hold opinion 1, everyone else opinion 0.
    pub fn from_ones(n: usize, ones: &[usize]) -> Self {
        let mut s = Self::uniform(n, false);
        for &u in ones {
            s.set(u, true);
        }
        s
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let bits: BitVec<u64, Lsb0> = bits.iter().copied().collect();
        let count_one = bits.count_ones();
        OpinionState { bits, count_one }
    }

    /// State whose agent `u` holds bit `u` of `index` (`n <= 64`).
    pub fn from_index(n: usize, index: u64) -> Self {
        assert!(n <= 64, "index encoding supports at most 64 agents");
        let mut bits = BitVec::repeat(false, n);
        bits.store_le::<u64>(index);
        let count_one = bits.count_ones();
        OpinionState { bits, count_one }
    }

    pub fn to_index(&self) -> Option<u64> {
        (self.len() <= 64).then(|| if self.is_empty() { 0 } else { self.bits.load_le::<u64>() })
    }

    /// Exactly `a` agents with opinion 1, placed uniformly at random.
    pub fn random_with_count<R: Rng + ?Sized>(n: usize, a: usize, rng: &mut R) -> Self {
        assert!(a <= n, "count {a} exceeds population {n}");
        let mut s = Self::uniform(n, false);
        for u in rand::seq::index::sample(rng, n, a) {
            s.set(u, true);
        }
        s
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    #[inline]
    pub fn get(&self, u: usize) -> bool {
        self.bits[u]
    }

    #[inline]
    pub fn set(&mut self, u: usize, opinion: bool) {
        let old = self.bits.replace(u, opinion);
        match (old, opinion) {
            (false, true) => self.count_one += 1,
            (true, false) => self.count_one -= 1,
            _ => {}
        }
    }

    /// `A`: agents holding opinion 1.
    #[inline]
    pub fn count_one(&self) -> usize {
        self.count_one
    }

    /// `B`: agents holding opinion 0.
    #[inline]
    pub fn count_zero(&self) -> usize {
        self.len() - self.count_one
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.iter_ones()
    }

    pub fn zeros(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.iter_zeros()
    }

    pub fn complement(&self) -> Self {
        OpinionState { bits: !self.bits.clone(), count_one: self.count_zero() }
    }

    pub fn is_consensus(&self) -> Option<Opinion> {
        if self.count_one == self.len() {
            Some(Opinion::One)
        } else if self.count_one == 0 {
            Some(Opinion::Zero)
        } else {
            None
        }
    }

    pub fn bit_string(&self) -> String {
        self.bits.iter().map(|b| if *b { '1' } else { '0' }).collect()
    }

    /// Overwrites `self` from a raw bit slice and recount; used by step
    /// routines that fill a reusable buffer.
    pub(crate) fn set_count_one(&mut self, count_one: usize) {
        debug_assert_eq!(count_one, self.bits.count_ones());
        self.count_one = count_one;
    }

    /// Backing words, agent `u` at bit `u % 64` of word `u / 64`. Bits past
    /// `len()` are zero.
    pub(crate) fn words(&self) -> &[u64] {
        self.bits.as_raw_slice()
    }

    pub(crate) fn words_mut(&mut self) -> &mut [u64] {
        self.bits.as_raw_mut_slice()
    }
}
