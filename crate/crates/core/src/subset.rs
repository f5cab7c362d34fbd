use std::fmt;

use serde::{Serialize, Serializer};

/// A subset of the dense vertex range `0..universe`, stored as a bitset.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct VertexSubset {
    universe: usize,
    words: Vec<u64>,
}

impl VertexSubset {
    pub fn empty(universe: usize) -> Self {
        VertexSubset {
            universe,
            words: vec![0; universe.div_ceil(64)],
        }
    }

    pub fn full(universe: usize) -> Self {
        let mut s = Self::empty(universe);
        for v in 0..universe as u32 {
            s.insert(v);
        }
        s
    }

    /// Builds a subset from vertex ids. Panics if an id is `>= universe`.
    pub fn from_iter<I: IntoIterator<Item = u32>>(universe: usize, iter: I) -> Self {
        let mut s = Self::empty(universe);
        for v in iter {
            s.insert(v);
        }
        s
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    #[inline]
    pub fn contains(&self, v: u32) -> bool {
        let v = v as usize;
        v < self.universe && self.words[v / 64] >> (v % 64) & 1 == 1
    }

    /// Returns `true` if `v` was not present before.
    #[inline]
    pub fn insert(&mut self, v: u32) -> bool {
        let v = v as usize;
        assert!(v < self.universe, "vertex {v} outside universe {}", self.universe);
        let bit = 1u64 << (v % 64);
        let fresh = self.words[v / 64] & bit == 0;
        self.words[v / 64] |= bit;
        fresh
    }

    #[inline]
    pub fn remove(&mut self, v: u32) -> bool {
        let v = v as usize;
        if v >= self.universe {
            return false;
        }
        let bit = 1u64 << (v % 64);
        let present = self.words[v / 64] & bit != 0;
        self.words[v / 64] &= !bit;
        present
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = u32> + '_ {
        self.words.iter().enumerate().flat_map(|(i, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let t = w.trailing_zeros();
                w &= w - 1;
                Some(i as u32 * 64 + t)
            })
        })
    }

    /// Members in increasing order.
    pub fn to_vec(&self) -> Vec<u32> {
        self.iter().collect()
    }

    pub fn is_disjoint(&self, other: &Self) -> bool {
        self.words.iter().zip(&other.words).all(|(a, b)| a & b == 0)
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.words.iter().zip(other.words.iter().chain(std::iter::repeat(&0))).all(|(a, b)| a & !b == 0)
    }

    pub fn intersection_len(&self, other: &Self) -> usize {
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    pub fn union_with(&mut self, other: &Self) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    pub fn difference_with(&mut self, other: &Self) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= !b;
        }
    }

    pub fn difference(&self, other: &Self) -> Self {
        let mut s = self.clone();
        s.difference_with(other);
        s
    }

    pub fn union(&self, other: &Self) -> Self {
        let mut s = self.clone();
        s.union_with(other);
        s
    }

    /// Complement within the universe.
    pub fn complement(&self) -> Self {
        let mut s = Self::full(self.universe);
        s.difference_with(self);
        s
    }

    /// Number of vertices of `edge` that lie in the subset.
    #[inline]
    pub fn count_in(&self, edge: &[u32]) -> usize {
        edge.iter().filter(|&&v| self.contains(v)).count()
    }

    #[inline]
    pub fn contains_all(&self, vs: &[u32]) -> bool {
        vs.iter().all(|&v| self.contains(v))
    }
}

impl fmt::Debug for VertexSubset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl Serialize for VertexSubset {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_seq(self.iter())
    }
}
