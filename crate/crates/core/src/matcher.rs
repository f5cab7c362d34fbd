//! Exact perfect/optimal matching search and counting, plus greedy baselines.
//!
//! The solver treats matching as exact cover over an array state: each vertex
//! tracks how many edges through it are still fully uncovered (`avail`) and
//! each edge tracks how many of its vertices are covered (`dead`). Covering
//! and uncovering an edge update these counters in mirrored order, so every
//! backtrack restores the state exactly.
//!
//! Branching picks the uncovered vertex with the fewest live edges (ties to
//! the smallest id). That choice is a function of the covered set alone, which
//! makes it sound to memoise failed covered sets. Counting branches on the
//! smallest uncovered vertex so each matching is produced exactly once, and
//! memoises counts per covered set.

use std::collections::HashMap;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::hypergraph::{Edge, Hypergraph, VertexId};
use crate::subset::VertexSubset;

/// Limits for a single exact search. Both limits must be at least 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolveBudget {
    pub max_nodes: u64,
    pub max_millis: u64,
}

impl SolveBudget {
    pub fn new(max_nodes: u64, max_millis: u64) -> Self {
        SolveBudget {
            max_nodes: max_nodes.max(1),
            max_millis: max_millis.max(1),
        }
    }

    pub fn unlimited() -> Self {
        SolveBudget {
            max_nodes: u64::MAX,
            max_millis: u64::MAX,
        }
    }
}

impl Default for SolveBudget {
    fn default() -> Self {
        SolveBudget::new(50_000_000, 60_000)
    }
}

/// A set of pairwise disjoint edges on the vertex range `0..n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matching {
    edges: Vec<Edge>,
    covered: VertexSubset,
}

impl Matching {
    pub fn empty(n: usize) -> Self {
        Matching {
            edges: Vec::new(),
            covered: VertexSubset::empty(n),
        }
    }

    pub fn from_edges<I: IntoIterator<Item = Edge>>(n: usize, edges: I) -> Result<Self> {
        let mut m = Matching::empty(n);
        for e in edges {
            m.push(e)?;
        }
        Ok(m)
    }

    /// Adds an edge. Fails if it meets the current cover or leaves `0..n`.
    pub fn push(&mut self, e: Edge) -> Result<()> {
        if e.iter().any(|&v| v as usize >= self.covered.universe()) {
            return Err(Error::BadEdge {
                edge: e.into_vec(),
                reason: "vertex out of range",
            });
        }
        if e.iter().any(|&v| self.covered.contains(v)) {
            return Err(Error::BadEdge {
                edge: e.into_vec(),
                reason: "edge meets the matching",
            });
        }
        for &v in e.iter() {
            self.covered.insert(v);
        }
        self.edges.push(e);
        Ok(())
    }

    /// Removes the most recently added edge.
    pub fn pop(&mut self) -> Option<Edge> {
        let e = self.edges.pop()?;
        for &v in e.iter() {
            self.covered.remove(v);
        }
        Some(e)
    }

    /// Adds all edges of `other` (same vertex range).
    pub fn extend_from(&mut self, other: &Matching) -> Result<()> {
        for e in &other.edges {
            self.push(e.clone())?;
        }
        Ok(())
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn into_edges(self) -> Vec<Edge> {
        self.edges
    }

    pub fn covered(&self) -> &VertexSubset {
        &self.covered
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn n(&self) -> usize {
        self.covered.universe()
    }

    /// Every edge is an edge of `h` and the cover is consistent.
    pub fn is_valid_in(&self, h: &Hypergraph) -> bool {
        self.n() == h.n()
            && self.edges.iter().all(|e| h.contains_edge(e))
            && self.covered.len() == h.k() * self.edges.len()
    }

    pub fn is_perfect_in(&self, h: &Hypergraph) -> bool {
        self.is_valid_in(h) && self.covered.len() == h.n()
    }

    pub fn is_optimal_in(&self, h: &Hypergraph) -> bool {
        self.is_valid_in(h) && self.edges.len() == h.n() / h.k()
    }

    /// Maps every vertex through `map` into a range of size `n`, e.g. to lift
    /// a matching of an induced sub-hypergraph back to its host.
    pub fn lift(&self, map: &[VertexId], n: usize) -> Matching {
        let mut out = Matching::empty(n);
        for e in &self.edges {
            let lifted = Edge::new(e.iter().map(|&v| map[v as usize]).collect())
                .expect("injective relabelling keeps vertices distinct");
            out.push(lifted).expect("injective relabelling keeps edges disjoint");
        }
        out
    }

    /// Edges sorted, for canonical comparison and output.
    pub fn sorted_edges(&self) -> Vec<Edge> {
        let mut e = self.edges.clone();
        e.sort_unstable();
        e
    }
}

impl Serialize for Matching {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = serializer.serialize_struct("Matching", 2)?;
        st.serialize_field("edges", &self.sorted_edges())?;
        st.serialize_field("size", &self.edges.len())?;
        st.end()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SolveStats {
    pub nodes: u64,
    pub millis: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum SolveOutcome {
    Yes { matching: Matching, stats: SolveStats },
    No { stats: SolveStats },
    Timeout { stats: SolveStats },
}

impl SolveOutcome {
    pub fn stats(&self) -> SolveStats {
        match self {
            SolveOutcome::Yes { stats, .. } | SolveOutcome::No { stats } | SolveOutcome::Timeout { stats } => *stats,
        }
    }

    pub fn status(&self) -> &'static str {
        match self {
            SolveOutcome::Yes { .. } => "Yes",
            SolveOutcome::No { .. } => "No",
            SolveOutcome::Timeout { .. } => "Timeout",
        }
    }

    pub fn matching(&self) -> Option<&Matching> {
        match self {
            SolveOutcome::Yes { matching, .. } => Some(matching),
            _ => None,
        }
    }

    pub fn into_matching(self) -> Option<Matching> {
        match self {
            SolveOutcome::Yes { matching, .. } => Some(matching),
            _ => None,
        }
    }

    pub fn is_yes(&self) -> bool {
        matches!(self, SolveOutcome::Yes { .. })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CountOutcome {
    Count { count: u128, stats: SolveStats },
    Timeout { stats: SolveStats },
}

impl CountOutcome {
    pub fn count(&self) -> Option<u128> {
        match self {
            CountOutcome::Count { count, .. } => Some(*count),
            CountOutcome::Timeout { .. } => None,
        }
    }

    pub fn stats(&self) -> SolveStats {
        match self {
            CountOutcome::Count { stats, .. } | CountOutcome::Timeout { stats } => *stats,
        }
    }
}

struct OutOfBudget;

/// Cap on memo entries so pathological searches cannot exhaust memory.
const MEMO_CAP: usize = 1 << 22;

struct Solver {
    k: usize,
    n: usize,
    edges: Vec<VertexId>,
    inc: Vec<Vec<u32>>,
    covered: Vec<bool>,
    cover_bits: Vec<u64>,
    dead: Vec<u32>,
    avail: Vec<u32>,
    uncovered: usize,
    nodes: u64,
    budget: SolveBudget,
    start: Instant,
}

impl Solver {
    fn new(h: &Hypergraph, budget: SolveBudget) -> Self {
        let (k, n) = (h.k(), h.n());
        let mut edges = Vec::with_capacity(h.edge_count() as usize * k);
        let mut inc = vec![Vec::new(); n];
        let mut idx = 0u32;
        h.for_each_edge(|e| {
            edges.extend_from_slice(e);
            for &v in e {
                inc[v as usize].push(idx);
            }
            idx += 1;
            true
        });
        let avail = inc.iter().map(|l| l.len() as u32).collect();
        Solver {
            k,
            n,
            dead: vec![0; idx as usize],
            edges,
            inc,
            covered: vec![false; n],
            cover_bits: vec![0; n.div_ceil(64)],
            avail,
            uncovered: n,
            nodes: 0,
            budget,
            start: Instant::now(),
        }
    }

    fn edge(&self, f: u32) -> &[VertexId] {
        &self.edges[f as usize * self.k..(f as usize + 1) * self.k]
    }

    fn tick(&mut self) -> std::result::Result<(), OutOfBudget> {
        self.nodes += 1;
        if self.nodes > self.budget.max_nodes {
            return Err(OutOfBudget);
        }
        if self.nodes % 4096 == 0 && self.elapsed() > self.budget.max_millis {
            return Err(OutOfBudget);
        }
        Ok(())
    }

    fn elapsed(&self) -> u64 {
        self.start.elapsed().as_millis() as u64
    }

    fn stats(&self) -> SolveStats {
        SolveStats {
            nodes: self.nodes,
            millis: self.elapsed(),
        }
    }

    /// Marks `v` covered and kills every live edge through it.
    fn cover_vertex(&mut self, v: VertexId) {
        let vi = v as usize;
        self.covered[vi] = true;
        self.cover_bits[vi / 64] |= 1 << (vi % 64);
        self.uncovered -= 1;
        for i in 0..self.inc[vi].len() {
            let f = self.inc[vi][i] as usize;
            if self.dead[f] == 0 {
                for j in 0..self.k {
                    let u = self.edges[f * self.k + j] as usize;
                    self.avail[u] -= 1;
                }
            }
            self.dead[f] += 1;
        }
    }

    fn uncover_vertex(&mut self, v: VertexId) {
        let vi = v as usize;
        for i in (0..self.inc[vi].len()).rev() {
            let f = self.inc[vi][i] as usize;
            self.dead[f] -= 1;
            if self.dead[f] == 0 {
                for j in 0..self.k {
                    let u = self.edges[f * self.k + j] as usize;
                    self.avail[u] += 1;
                }
            }
        }
        self.covered[vi] = false;
        self.cover_bits[vi / 64] &= !(1 << (vi % 64));
        self.uncovered += 1;
    }

    fn cover_edge(&mut self, f: u32) {
        for j in 0..self.k {
            let v = self.edges[f as usize * self.k + j];
            self.cover_vertex(v);
        }
    }

    fn uncover_edge(&mut self, f: u32) {
        for j in (0..self.k).rev() {
            let v = self.edges[f as usize * self.k + j];
            self.uncover_vertex(v);
        }
    }

    fn live_edges(&self, v: usize) -> Vec<u32> {
        self.inc[v].iter().copied().filter(|&f| self.dead[f as usize] == 0).collect()
    }

    /// Uncovered vertex with the fewest live edges, ties to the smallest id.
    fn pick_min_avail(&self) -> Option<usize> {
        let mut best: Option<usize> = None;
        for v in 0..self.n {
            if !self.covered[v] && best.is_none_or(|b| self.avail[v] < self.avail[b]) {
                best = Some(v);
                if self.avail[v] == 0 {
                    break;
                }
            }
        }
        best
    }

    fn stranded(&self) -> usize {
        (0..self.n).filter(|&v| !self.covered[v] && self.avail[v] == 0).count()
    }

    /// Finds edges covering all but at most `skips` vertices. Vertices left
    /// out are "skipped": covered without an edge.
    fn search(
        &mut self,
        skips: usize,
        chosen: &mut Vec<u32>,
        failed: &mut std::collections::HashSet<(Box<[u64]>, usize)>,
    ) -> std::result::Result<bool, OutOfBudget> {
        self.tick()?;
        if self.uncovered == 0 {
            return Ok(true);
        }
        if self.uncovered <= skips {
            return Ok(true);
        }
        if skips > 0 && self.stranded() > skips {
            return Ok(false);
        }
        let key = (self.cover_bits.clone().into_boxed_slice(), skips);
        if failed.contains(&key) {
            return Ok(false);
        }
        let v = self.pick_min_avail().expect("some vertex is uncovered");
        let options = self.live_edges(v);
        for f in options {
            self.cover_edge(f);
            chosen.push(f);
            let found = self.search(skips, chosen, failed);
            if matches!(found, Ok(true)) {
                return found;
            }
            chosen.pop();
            self.uncover_edge(f);
            found?;
        }
        if skips > 0 {
            self.cover_vertex(v as VertexId);
            let found = self.search(skips - 1, chosen, failed);
            if matches!(found, Ok(true)) {
                return found;
            }
            self.uncover_vertex(v as VertexId);
            found?;
        }
        if failed.len() < MEMO_CAP {
            failed.insert(key);
        }
        Ok(false)
    }

    fn count(&mut self, memo: &mut HashMap<Box<[u64]>, u128>) -> std::result::Result<u128, OutOfBudget> {
        self.tick()?;
        if self.uncovered == 0 {
            return Ok(1);
        }
        if let Some(&c) = memo.get(self.cover_bits.as_slice()) {
            return Ok(c);
        }
        let v = (0..self.n).find(|&v| !self.covered[v]).expect("some vertex is uncovered");
        let mut total = 0u128;
        if self.avail[v] > 0 {
            for f in self.live_edges(v) {
                self.cover_edge(f);
                let sub = self.count(memo);
                self.uncover_edge(f);
                total = total.saturating_add(sub?);
            }
        }
        if memo.len() < MEMO_CAP {
            memo.insert(self.cover_bits.clone().into_boxed_slice(), total);
        }
        Ok(total)
    }

    fn enumerate(
        &mut self,
        chosen: &mut Vec<u32>,
        out: &mut Vec<Vec<u32>>,
        limit: usize,
    ) -> std::result::Result<(), OutOfBudget> {
        self.tick()?;
        if out.len() >= limit {
            return Ok(());
        }
        if self.uncovered == 0 {
            out.push(chosen.clone());
            return Ok(());
        }
        let v = (0..self.n).find(|&v| !self.covered[v]).expect("some vertex is uncovered");
        for f in self.live_edges(v) {
            self.cover_edge(f);
            chosen.push(f);
            let r = self.enumerate(chosen, out, limit);
            chosen.pop();
            self.uncover_edge(f);
            r?;
        }
        Ok(())
    }

    /// Branch and bound for a maximum matching. Vertices with no live edge
    /// are retired (covered without an edge) as the search goes.
    fn maximum(
        &mut self,
        chosen: &mut Vec<u32>,
        best: &mut Vec<u32>,
    ) -> std::result::Result<(), OutOfBudget> {
        self.tick()?;
        let coverable = (0..self.n).filter(|&v| !self.covered[v] && self.avail[v] > 0).count();
        if chosen.len() + coverable / self.k <= best.len() {
            return Ok(());
        }
        let Some(v) = (0..self.n).find(|&v| !self.covered[v] && self.avail[v] > 0) else {
            if chosen.len() > best.len() {
                best.clone_from(chosen);
            }
            return Ok(());
        };
        for f in self.live_edges(v) {
            self.cover_edge(f);
            chosen.push(f);
            let r = self.maximum(chosen, best);
            chosen.pop();
            self.uncover_edge(f);
            r?;
        }
        self.cover_vertex(v as VertexId);
        let r = self.maximum(chosen, best);
        self.uncover_vertex(v as VertexId);
        r
    }

    fn to_matching(&self, chosen: &[u32]) -> Matching {
        let edges = chosen.iter().map(|&f| Edge::from_sorted(self.edge(f).to_vec()));
        Matching::from_edges(self.n, edges).expect("solver edges are disjoint")
    }
}

fn solve_with_skips(h: &Hypergraph, skips: usize, budget: SolveBudget) -> SolveOutcome {
    let mut solver = Solver::new(h, budget);
    let mut chosen = Vec::new();
    let mut failed = std::collections::HashSet::new();
    match solver.search(skips, &mut chosen, &mut failed) {
        Ok(true) => SolveOutcome::Yes {
            matching: solver.to_matching(&chosen),
            stats: solver.stats(),
        },
        Ok(false) => SolveOutcome::No { stats: solver.stats() },
        Err(OutOfBudget) => SolveOutcome::Timeout { stats: solver.stats() },
    }
}

/// Decides whether `h` has a perfect matching. Requires `k | n`.
pub fn has_perfect_matching(h: &Hypergraph, budget: SolveBudget) -> Result<SolveOutcome> {
    if h.n() % h.k() != 0 {
        return Err(Error::NotDivisible { k: h.k(), n: h.n() });
    }
    Ok(solve_with_skips(h, 0, budget))
}

/// Decides whether `h` has a matching with `floor(n / k)` edges.
pub fn optimal_matching(h: &Hypergraph, budget: SolveBudget) -> SolveOutcome {
    solve_with_skips(h, h.n() % h.k(), budget)
}

/// Exact number of perfect matchings. Requires `k | n`.
pub fn count_perfect_matchings(h: &Hypergraph, budget: SolveBudget) -> Result<CountOutcome> {
    if h.n() % h.k() != 0 {
        return Err(Error::NotDivisible { k: h.k(), n: h.n() });
    }
    let mut solver = Solver::new(h, budget);
    let mut memo = HashMap::new();
    Ok(match solver.count(&mut memo) {
        Ok(count) => CountOutcome::Count {
            count,
            stats: solver.stats(),
        },
        Err(OutOfBudget) => CountOutcome::Timeout { stats: solver.stats() },
    })
}

/// Lists up to `limit` perfect matchings, each exactly once.
/// `None` if the budget ran out first.
pub fn enumerate_perfect_matchings(
    h: &Hypergraph,
    limit: usize,
    budget: SolveBudget,
) -> Result<Option<Vec<Matching>>> {
    if h.n() % h.k() != 0 {
        return Err(Error::NotDivisible { k: h.k(), n: h.n() });
    }
    let mut solver = Solver::new(h, budget);
    let mut raw = Vec::new();
    if solver.enumerate(&mut Vec::new(), &mut raw, limit).is_err() {
        return Ok(None);
    }
    Ok(Some(raw.iter().map(|c| solver.to_matching(c)).collect()))
}

/// A maximum matching by branch and bound; `None` on budget exhaustion.
pub fn maximum_matching(h: &Hypergraph, budget: SolveBudget) -> Option<Matching> {
    let mut solver = Solver::new(h, budget);
    let mut best = Vec::new();
    solver.maximum(&mut Vec::new(), &mut best).ok()?;
    Some(solver.to_matching(&best))
}

/// Random greedy maximal matching: edges are scanned in uniformly random
/// order and kept when disjoint from the current cover, which is the same as
/// repeatedly picking a uniform edge among those still available.
pub fn greedy_matching<R: Rng + ?Sized>(h: &Hypergraph, rng: &mut R) -> Matching {
    let (k, n) = (h.k(), h.n());
    let mut m = Matching::empty(n);
    if h.is_implicit_complete() {
        let mut order: Vec<VertexId> = (0..n as u32).collect();
        order.shuffle(rng);
        for block in order.chunks_exact(k) {
            m.push(Edge::new(block.to_vec()).expect("distinct")).expect("disjoint");
        }
        return m;
    }
    let mut order = h.edges();
    order.shuffle(rng);
    for e in order {
        if e.iter().all(|&v| !m.covered().contains(v)) {
            m.push(e).expect("checked disjoint");
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::{complete, critical_n};
    use crate::rng::RngSeed;

    fn yes(h: &Hypergraph) -> bool {
        has_perfect_matching(h, SolveBudget::unlimited()).unwrap().is_yes()
    }

    #[test]
    fn perfect_matching_examples() {
        let k6 = complete(6, 3).unwrap();
        let out = has_perfect_matching(&k6, SolveBudget::unlimited()).unwrap();
        assert!(out.matching().unwrap().is_perfect_in(&k6));
        assert!(!yes(&critical_n(3, 6).unwrap().0));
        assert!(!yes(&Hypergraph::empty(3, 6).unwrap()));
        assert!(matches!(
            has_perfect_matching(&complete(7, 3).unwrap(), SolveBudget::unlimited()),
            Err(Error::NotDivisible { .. })
        ));
    }

    #[test]
    fn optimal_matching_examples() {
        let k7 = complete(7, 3).unwrap();
        let out = optimal_matching(&k7, SolveBudget::unlimited());
        assert_eq!(out.matching().unwrap().len(), 2);
        let single = Hypergraph::build(3, 7, [[0, 1, 2]]).unwrap();
        assert!(matches!(optimal_matching(&single, SolveBudget::unlimited()), SolveOutcome::No { .. }));
        // Isolating one vertex of K_10^3 leaves K_9^3 on the rest, which still
        // has 3 disjoint triples.
        let isolated = complete(10, 3).unwrap().to_explicit().filter_edges(|e| !e.contains(&9));
        let out = optimal_matching(&isolated, SolveBudget::unlimited());
        assert!(out.matching().unwrap().is_optimal_in(&isolated));
    }

    #[test]
    fn counting_examples() {
        let count = |h: &Hypergraph| count_perfect_matchings(h, SolveBudget::unlimited()).unwrap().count().unwrap();
        assert_eq!(count(&complete(6, 3).unwrap()), 10);
        assert_eq!(count(&complete(8, 4).unwrap()), 35);
        assert_eq!(count(&critical_n(3, 6).unwrap().0), 0);
        assert_eq!(count(&complete(9, 3).unwrap()), 280);
    }

    #[test]
    fn enumeration_is_exhaustive_and_distinct() {
        let k6 = complete(6, 3).unwrap();
        let all = enumerate_perfect_matchings(&k6, usize::MAX, SolveBudget::unlimited()).unwrap().unwrap();
        assert_eq!(all.len(), 10);
        let mut keys: Vec<Vec<Edge>> = all.iter().map(Matching::sorted_edges).collect();
        keys.sort();
        keys.dedup();
        assert_eq!(keys.len(), 10);
        assert!(all.iter().all(|m| m.is_perfect_in(&k6)));
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let (h, _) = critical_n(3, 18).unwrap();
        let out = has_perfect_matching(&h, SolveBudget::new(10, u64::MAX)).unwrap();
        assert!(matches!(out, SolveOutcome::Timeout { .. }));
        let c = count_perfect_matchings(&complete(12, 3).unwrap(), SolveBudget::new(5, u64::MAX)).unwrap();
        assert!(c.count().is_none());
    }

    #[test]
    fn maximum_matching_sizes() {
        assert_eq!(maximum_matching(&complete(7, 3).unwrap(), SolveBudget::unlimited()).unwrap().len(), 2);
        assert_eq!(maximum_matching(&Hypergraph::empty(3, 7).unwrap(), SolveBudget::unlimited()).unwrap().len(), 0);
        let (h0, _) = critical_n(3, 6).unwrap();
        assert_eq!(maximum_matching(&h0, SolveBudget::unlimited()).unwrap().len(), 1);
    }

    #[test]
    fn greedy_examples() {
        let mut rng = RngSeed::new(3, 0).rng();
        assert!(greedy_matching(&Hypergraph::empty(3, 6).unwrap(), &mut rng).is_empty());
        let k6 = complete(6, 3).unwrap().to_explicit();
        for _ in 0..50 {
            assert_eq!(greedy_matching(&k6, &mut rng).len(), 2);
        }
        assert_eq!(greedy_matching(&complete(6, 3).unwrap(), &mut rng).len(), 2);
        let two = Hypergraph::build(3, 6, [[0, 1, 2], [3, 4, 5]]).unwrap();
        assert_eq!(greedy_matching(&two, &mut rng).len(), 2);
    }

    #[test]
    fn lift_maps_back() {
        let m = Matching::from_edges(3, [Edge::new(vec![0, 1, 2]).unwrap()]).unwrap();
        let up = m.lift(&[4, 7, 9], 10);
        assert_eq!(up.edges()[0].as_slice(), &[4, 7, 9]);
        assert_eq!(up.covered().len(), 3);
    }

    #[test]
    fn push_rejects_overlap() {
        let mut m = Matching::empty(6);
        m.push(Edge::new(vec![0, 1, 2]).unwrap()).unwrap();
        assert!(m.push(Edge::new(vec![2, 3, 4]).unwrap()).is_err());
        assert_eq!(serde_json::to_string(&m).unwrap(), r#"{"edges":[[0,1,2]],"size":1}"#);
    }
}
