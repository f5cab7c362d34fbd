//! Immutable k-uniform hypergraphs on the dense vertex range `0..n`.
//!
//! Two representations sit behind one type: an explicit edge list with a
//! codegree (link) index, and an implicit complete hypergraph `K_n^k` whose
//! queries are answered in closed form. The implicit form keeps instances
//! such as `K_1024^3` (about 1.8e8 edges) usable by the sampling pipeline.

use std::collections::HashMap;
use std::fmt;
use std::ops::Deref;

use rand::seq::index::sample as sample_indices;
use rand::Rng;
use serde::Serialize;

use crate::combo::{binomial, for_each_combination};
use crate::error::{Error, Result};
use crate::subset::VertexSubset;

pub type VertexId = u32;

/// A k-set of vertices stored in strictly increasing order.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct Edge(Vec<VertexId>);

impl Edge {
    /// Sorts the vertices and rejects repeats.
    pub fn new(mut vertices: Vec<VertexId>) -> Result<Self> {
        vertices.sort_unstable();
        if vertices.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::BadEdge {
                edge: vertices,
                reason: "repeated vertex",
            });
        }
        Ok(Edge(vertices))
    }

    /// Wraps vertices that are already strictly increasing.
    pub(crate) fn from_sorted(vertices: Vec<VertexId>) -> Self {
        debug_assert!(vertices.windows(2).all(|w| w[0] < w[1]));
        Edge(vertices)
    }

    pub fn as_slice(&self) -> &[VertexId] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<VertexId> {
        self.0
    }

    pub fn is_disjoint(&self, other: &[VertexId]) -> bool {
        self.0.iter().all(|v| !other.contains(v))
    }
}

impl Deref for Edge {
    type Target = [VertexId];
    fn deref(&self) -> &[VertexId] {
        &self.0
    }
}

impl AsRef<[VertexId]> for Edge {
    fn as_ref(&self) -> &[VertexId] {
        &self.0
    }
}

impl fmt::Debug for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.0.iter()).finish()
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

#[derive(Clone)]
struct Explicit {
    /// Flat, lexicographically sorted edge list, `k` ids per edge.
    edges: Vec<VertexId>,
    /// Sorted `(k-1)`-set -> sorted completing vertices.
    link: HashMap<Box<[VertexId]>, Vec<VertexId>>,
    /// Edge indices through each vertex, increasing.
    incidence: Vec<Vec<u32>>,
}

#[derive(Clone)]
enum Repr {
    Complete,
    Explicit(Explicit),
}

/// An immutable k-uniform hypergraph on vertices `0..n`.
#[derive(Clone)]
pub struct Hypergraph {
    k: usize,
    n: usize,
    repr: Repr,
}

/// Result of [`Hypergraph::regularity_estimate`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RegularityEstimate {
    pub density: f64,
    pub violations: usize,
}

fn check_dims(k: usize, n: usize) -> Result<()> {
    if k < 2 || n < k {
        return Err(Error::InvalidUniformity { k, n });
    }
    Ok(())
}

impl Hypergraph {
    /// Validates and deduplicates `edges`. Vertex order inside an edge is free.
    pub fn build<I, E>(k: usize, n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = E>,
        E: AsRef<[VertexId]>,
    {
        check_dims(k, n)?;
        let mut list: Vec<Vec<VertexId>> = Vec::new();
        for e in edges {
            let e = e.as_ref();
            if e.len() != k {
                return Err(Error::BadEdge {
                    edge: e.to_vec(),
                    reason: "wrong size",
                });
            }
            if e.iter().any(|&v| v as usize >= n) {
                return Err(Error::BadEdge {
                    edge: e.to_vec(),
                    reason: "vertex out of range",
                });
            }
            list.push(Edge::new(e.to_vec())?.into_vec());
        }
        list.sort_unstable();
        list.dedup();
        let flat: Vec<VertexId> = list.into_iter().flatten().collect();
        Ok(Self::from_sorted_flat(k, n, flat))
    }

    /// `flat` must hold strictly sorted, lexicographically ordered, distinct edges.
    pub(crate) fn from_sorted_flat(k: usize, n: usize, flat: Vec<VertexId>) -> Self {
        debug_assert_eq!(flat.len() % k, 0);
        let m = flat.len() / k;
        let mut link: HashMap<Box<[VertexId]>, Vec<VertexId>> = HashMap::new();
        let mut incidence = vec![Vec::new(); n];
        let mut key = Vec::with_capacity(k - 1);
        for (idx, e) in flat.chunks_exact(k).enumerate() {
            for (skip, &v) in e.iter().enumerate() {
                incidence[v as usize].push(idx as u32);
                key.clear();
                key.extend(e.iter().enumerate().filter(|&(i, _)| i != skip).map(|(_, &u)| u));
                link.entry(key.clone().into_boxed_slice()).or_default().push(v);
            }
        }
        for completions in link.values_mut() {
            completions.sort_unstable();
        }
        debug_assert_eq!(incidence.iter().map(Vec::len).sum::<usize>(), k * m);
        Hypergraph {
            k,
            n,
            repr: Repr::Explicit(Explicit {
                edges: flat,
                link,
                incidence,
            }),
        }
    }

    /// `K_n^k`, stored implicitly.
    pub fn complete(k: usize, n: usize) -> Result<Self> {
        check_dims(k, n)?;
        Ok(Hypergraph {
            k,
            n,
            repr: Repr::Complete,
        })
    }

    pub fn empty(k: usize, n: usize) -> Result<Self> {
        check_dims(k, n)?;
        Ok(Self::from_sorted_flat(k, n, Vec::new()))
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Whether the hypergraph is held in the implicit complete form.
    pub fn is_implicit_complete(&self) -> bool {
        matches!(self.repr, Repr::Complete)
    }

    pub fn edge_count(&self) -> u64 {
        match &self.repr {
            Repr::Complete => binomial(self.n as u64, self.k as u64),
            Repr::Explicit(x) => (x.edges.len() / self.k) as u64,
        }
    }

    /// Membership test for a strictly increasing vertex list.
    pub fn contains_edge(&self, e: &[VertexId]) -> bool {
        if e.len() != self.k || e.iter().any(|&v| v as usize >= self.n) {
            return false;
        }
        debug_assert!(e.windows(2).all(|w| w[0] < w[1]), "edge must be sorted");
        match &self.repr {
            Repr::Complete => e.windows(2).all(|w| w[0] < w[1]),
            Repr::Explicit(x) => x
                .link
                .get(&e[..self.k - 1])
                .is_some_and(|c| c.binary_search(&e[self.k - 1]).is_ok()),
        }
    }

    /// Visits every edge in lexicographic order. Stops when `f` returns `false`.
    pub fn for_each_edge<F: FnMut(&[VertexId]) -> bool>(&self, mut f: F) {
        match &self.repr {
            Repr::Complete => {
                let all: Vec<VertexId> = (0..self.n as u32).collect();
                for_each_combination(&all, self.k, f);
            }
            Repr::Explicit(x) => {
                for e in x.edges.chunks_exact(self.k) {
                    if !f(e) {
                        break;
                    }
                }
            }
        }
    }

    /// All edges, materialised.
    pub fn edges(&self) -> Vec<Edge> {
        let mut out = Vec::with_capacity(self.edge_count().min(1 << 24) as usize);
        self.for_each_edge(|e| {
            out.push(Edge::from_sorted(e.to_vec()));
            true
        });
        out
    }

    /// Converts the implicit complete form into an explicit edge list.
    pub fn to_explicit(&self) -> Hypergraph {
        match &self.repr {
            Repr::Explicit(_) => self.clone(),
            Repr::Complete => {
                let mut flat = Vec::with_capacity(self.edge_count() as usize * self.k);
                self.for_each_edge(|e| {
                    flat.extend_from_slice(e);
                    true
                });
                Self::from_sorted_flat(self.k, self.n, flat)
            }
        }
    }

    fn check_set(&self, s: &[VertexId]) -> Result<()> {
        if s.is_empty() || s.len() >= self.k {
            return Err(Error::BadArity {
                d: s.len(),
                max: self.k - 1,
            });
        }
        if s.iter().any(|&v| v as usize >= self.n) || s.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::BadEdge {
                edge: s.to_vec(),
                reason: "vertex set must be strictly increasing and in range",
            });
        }
        Ok(())
    }

    /// Number of edges containing every vertex of `s` (`1 <= |s| <= k-1`).
    pub fn degree(&self, s: &[VertexId]) -> Result<u64> {
        self.check_set(s)?;
        Ok(self.degree_unchecked(s))
    }

    fn degree_unchecked(&self, s: &[VertexId]) -> u64 {
        match &self.repr {
            Repr::Complete => binomial((self.n - s.len()) as u64, (self.k - s.len()) as u64),
            Repr::Explicit(x) => {
                if s.len() == self.k - 1 {
                    x.link.get(s).map_or(0, |c| c.len() as u64)
                } else {
                    x.incidence[s[0] as usize]
                        .iter()
                        .filter(|&&i| {
                            let e = &x.edges[i as usize * self.k..(i as usize + 1) * self.k];
                            s[1..].iter().all(|v| e.binary_search(v).is_ok())
                        })
                        .count() as u64
                }
            }
        }
    }

    /// Number of edges `e ⊇ s` with `e \ s ⊆ within`.
    pub fn degree_within(&self, s: &[VertexId], within: &VertexSubset) -> u64 {
        match &self.repr {
            Repr::Complete => {
                let room = within.len() - s.iter().filter(|&&v| within.contains(v)).count();
                binomial(room as u64, (self.k - s.len()) as u64)
            }
            Repr::Explicit(_) => {
                let mut count = 0;
                self.for_each_extension(s, within, |_| {
                    count += 1;
                    true
                });
                count
            }
        }
    }

    /// Enumerates every `(k-|s|)`-set `T ⊆ within \ s` with `s ∪ T` an edge.
    /// `s` must be strictly increasing with `1 <= |s| < k`.
    pub fn for_each_extension<F>(&self, s: &[VertexId], within: &VertexSubset, mut f: F)
    where
        F: FnMut(&[VertexId]) -> bool,
    {
        let r = self.k - s.len();
        match &self.repr {
            Repr::Complete => {
                let pool: Vec<VertexId> = within.iter().filter(|v| !s.contains(v)).collect();
                for_each_combination(&pool, r, f);
            }
            Repr::Explicit(x) => {
                if r == 1 {
                    if let Some(c) = x.link.get(s) {
                        for &v in c {
                            if within.contains(v) && !f(&[v]) {
                                return;
                            }
                        }
                    }
                    return;
                }
                let mut rest = Vec::with_capacity(r);
                for &i in &x.incidence[s[0] as usize] {
                    let e = &x.edges[i as usize * self.k..(i as usize + 1) * self.k];
                    if !s[1..].iter().all(|v| e.binary_search(v).is_ok()) {
                        continue;
                    }
                    rest.clear();
                    rest.extend(e.iter().copied().filter(|v| !s.contains(v)));
                    if rest.iter().all(|&v| within.contains(v)) && !f(&rest) {
                        return;
                    }
                }
            }
        }
    }

    /// Minimum d-degree over all d-subsets of the vertex set.
    pub fn min_d_degree(&self, d: usize) -> Result<u64> {
        if d == 0 || d >= self.k {
            return Err(Error::BadArity { d, max: self.k - 1 });
        }
        if let Repr::Complete = self.repr {
            return Ok(binomial((self.n - d) as u64, (self.k - d) as u64));
        }
        let all: Vec<VertexId> = (0..self.n as u32).collect();
        let mut best = u64::MAX;
        for_each_combination(&all, d, |s| {
            best = best.min(self.degree_unchecked(s));
            best > 0
        });
        Ok(if best == u64::MAX { 0 } else { best })
    }

    /// Sub-hypergraph induced on `u`, relabelled to `0..|u|` in increasing
    /// order. The returned map sends new ids to old ids.
    pub fn induced(&self, u: &VertexSubset) -> (Hypergraph, Vec<VertexId>) {
        let map: Vec<VertexId> = u.iter().filter(|&v| (v as usize) < self.n).collect();
        let m = map.len();
        let k = self.k;
        match &self.repr {
            Repr::Complete if m >= k => (
                Hypergraph {
                    k,
                    n: m,
                    repr: Repr::Complete,
                },
                map,
            ),
            _ => {
                let mut back = vec![u32::MAX; self.n];
                for (new, &old) in map.iter().enumerate() {
                    back[old as usize] = new as u32;
                }
                let mut flat = Vec::new();
                if m >= k {
                    self.for_each_edge(|e| {
                        if e.iter().all(|&v| back[v as usize] != u32::MAX) {
                            // the relabelling is monotone so edges stay sorted
                            flat.extend(e.iter().map(|&v| back[v as usize]));
                        }
                        true
                    });
                }
                // Edges keep lexicographic order under a monotone relabelling.
                let n = m.max(k);
                (Self::from_sorted_flat(k, n, flat), map)
            }
        }
    }

    /// All k-subsets absent from `self`.
    pub fn complement(&self) -> Hypergraph {
        match &self.repr {
            Repr::Complete => Self::from_sorted_flat(self.k, self.n, Vec::new()),
            Repr::Explicit(_) => {
                let all: Vec<VertexId> = (0..self.n as u32).collect();
                let mut flat = Vec::new();
                for_each_combination(&all, self.k, |e| {
                    if !self.contains_edge(e) {
                        flat.extend_from_slice(e);
                    }
                    true
                });
                Self::from_sorted_flat(self.k, self.n, flat)
            }
        }
    }

    fn part_index(&self, parts: &[VertexSubset]) -> Result<Vec<u8>> {
        let mut owner = vec![u8::MAX; self.n];
        for (i, p) in parts.iter().enumerate() {
            for v in p.iter() {
                if v as usize >= self.n {
                    return Err(Error::BadParts(format!("vertex {v} out of range")));
                }
                if owner[v as usize] != u8::MAX {
                    return Err(Error::OverlappingParts);
                }
                owner[v as usize] = i as u8;
            }
        }
        Ok(owner)
    }

    /// Number of edges with exactly one vertex in each of the `k` parts.
    pub fn partite_count(&self, parts: &[VertexSubset]) -> Result<u64> {
        if parts.len() != self.k {
            return Err(Error::BadParts(format!(
                "expected {} parts, got {}",
                self.k,
                parts.len()
            )));
        }
        let owner = self.part_index(parts)?;
        if let Repr::Complete = self.repr {
            return Ok(parts.iter().map(|p| p.len() as u64).product());
        }
        Ok(self.count_partite_edges(&owner))
    }

    fn count_partite_edges(&self, owner: &[u8]) -> u64 {
        let mut count = 0u64;
        let mut seen = vec![false; self.k];
        self.for_each_edge(|e| {
            seen.iter_mut().for_each(|s| *s = false);
            let mut ok = true;
            for &v in e {
                let o = owner[v as usize];
                if o == u8::MAX || seen[o as usize] {
                    ok = false;
                    break;
                }
                seen[o as usize] = true;
            }
            count += u64::from(ok);
            true
        });
        count
    }

    /// Sampled check of ε-regularity for a k-tuple of disjoint parts.
    ///
    /// Each sample draws sub-parts `W_i ⊆ V_i` with `∏|W_i| >= ε ∏|V_i|` and
    /// counts it as a violation when its partite density deviates from the
    /// whole tuple's density by more than `eps`. Zero violations is evidence,
    /// not proof.
    pub fn regularity_estimate<R: Rng + ?Sized>(
        &self,
        parts: &[VertexSubset],
        eps: f64,
        samples: usize,
        rng: &mut R,
    ) -> Result<RegularityEstimate> {
        if samples == 0 {
            return Err(Error::Config("samples must be >= 1".into()));
        }
        if parts.iter().any(VertexSubset::is_empty) {
            return Err(Error::BadParts("parts must be nonempty".into()));
        }
        let total = self.partite_count(parts)?;
        let volume: f64 = parts.iter().map(|p| p.len() as f64).product();
        let density = total as f64 / volume;
        let members: Vec<Vec<VertexId>> = parts.iter().map(VertexSubset::to_vec).collect();
        let root = eps.clamp(0.0, 1.0).powf(1.0 / self.k as f64);
        let mut violations = 0;
        for _ in 0..samples {
            let sub: Vec<VertexSubset> = members
                .iter()
                .map(|m| {
                    let lo = ((root * m.len() as f64).ceil() as usize).clamp(1, m.len());
                    let size = rng.random_range(lo..=m.len());
                    let picked = sample_indices(rng, m.len(), size);
                    VertexSubset::from_iter(self.n, picked.iter().map(|i| m[i]))
                })
                .collect();
            let sub_volume: f64 = sub.iter().map(|p| p.len() as f64).product();
            let sub_density = self.partite_count(&sub)? as f64 / sub_volume;
            if (sub_density - density).abs() > eps {
                violations += 1;
            }
        }
        Ok(RegularityEstimate {
            density,
            violations,
        })
    }

    /// Edges of `self` restricted to those satisfying `keep`, same vertex set.
    pub fn filter_edges<F: FnMut(&[VertexId]) -> bool>(&self, mut keep: F) -> Hypergraph {
        let mut flat = Vec::new();
        self.for_each_edge(|e| {
            if keep(e) {
                flat.extend_from_slice(e);
            }
            true
        });
        Self::from_sorted_flat(self.k, self.n, flat)
    }

    /// Union of the edge sets of two hypergraphs on the same vertex set.
    pub fn union(&self, other: &Hypergraph) -> Result<Hypergraph> {
        if self.k != other.k || self.n != other.n {
            return Err(Error::InvalidUniformity {
                k: other.k,
                n: other.n,
            });
        }
        if self.is_implicit_complete() || other.is_implicit_complete() {
            return Hypergraph::complete(self.k, self.n);
        }
        let mut all = self.edges();
        all.extend(other.edges());
        all.sort_unstable();
        all.dedup();
        let flat = all.into_iter().flat_map(Edge::into_vec).collect();
        Ok(Self::from_sorted_flat(self.k, self.n, flat))
    }

    /// Rebuilds the codegree index from the edge list alone and compares.
    /// Used by tests; always `true` for the implicit form.
    pub fn link_index_consistent(&self) -> bool {
        let Repr::Explicit(x) = &self.repr else {
            return true;
        };
        let mut fresh: HashMap<Vec<VertexId>, usize> = HashMap::new();
        let mut key = Vec::new();
        for e in x.edges.chunks_exact(self.k) {
            for skip in 0..self.k {
                key.clear();
                key.extend(e.iter().enumerate().filter(|&(i, _)| i != skip).map(|(_, &v)| v));
                *fresh.entry(key.clone()).or_default() += 1;
            }
        }
        fresh.len() == x.link.len()
            && fresh
                .iter()
                .all(|(s, &d)| x.link.get(s.as_slice()).is_some_and(|c| c.len() == d))
    }

}

impl fmt::Debug for Hypergraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Hypergraph")
            .field("k", &self.k)
            .field("n", &self.n)
            .field("edges", &self.edge_count())
            .field("implicit_complete", &self.is_implicit_complete())
            .finish()
    }
}

impl PartialEq for Hypergraph {
    fn eq(&self, other: &Self) -> bool {
        if self.k != other.k || self.n != other.n || self.edge_count() != other.edge_count() {
            return false;
        }
        let mut same = true;
        self.for_each_edge(|e| {
            same = other.contains_edge(e);
            same
        });
        same
    }
}
