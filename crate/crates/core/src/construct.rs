//! Reference constructions and the parity machinery around critical
//! hypergraphs: `H0(k, A, B)`, the standard pair size `a(k, n)`, the codegree
//! value `delta0(k, n)`, extremal types (a)-(e), typical indices, the
//! divisibility condition and the local search for an extremal partition.

use std::fmt;

use rand::seq::SliceRandom;
use rand::RngCore;
use rayon::prelude::*;
use serde::{Deserialize, Serialize, Serializer};

use crate::combo::{binomial, for_each_combination};
use crate::error::{Error, Result};
use crate::hypergraph::{Edge, Hypergraph, VertexId};
use crate::rng::{Rng, RngSeed};
use crate::subset::VertexSubset;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExtremalType {
    A,
    B,
    C,
    D,
    E,
}

impl ExtremalType {
    pub const ALL: [ExtremalType; 5] = [Self::A, Self::B, Self::C, Self::D, Self::E];

    /// Whether the type is defined for uniformity `k`.
    pub fn compatible(self, k: usize) -> bool {
        match self {
            Self::A | Self::B => k % 2 == 1,
            Self::C => k % 2 == 0,
            Self::D => k % 4 == 0,
            Self::E => k % 4 == 2,
        }
    }

    /// The types defined for `k`, in label order.
    pub fn for_k(k: usize) -> Vec<ExtremalType> {
        Self::ALL.into_iter().filter(|t| t.compatible(k)).collect()
    }

    fn check(self, k: usize) -> Result<()> {
        if self.compatible(k) {
            Ok(())
        } else {
            Err(Error::IncompatibleType { alpha: self, k })
        }
    }

    /// Typical layers form `H0(k, A, B)` for (a), (d), (e) and its complement
    /// for (b), (c).
    pub fn follows_critical(self) -> bool {
        matches!(self, Self::A | Self::D | Self::E)
    }
}

impl fmt::Display for ExtremalType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = match self {
            Self::A => "a",
            Self::B => "b",
            Self::C => "c",
            Self::D => "d",
            Self::E => "e",
        };
        f.write_str(c)
    }
}

impl std::str::FromStr for ExtremalType {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim_matches(|c| c == '(' || c == ')') {
            "a" => Ok(Self::A),
            "b" => Ok(Self::B),
            "c" => Ok(Self::C),
            "d" => Ok(Self::D),
            "e" => Ok(Self::E),
            other => Err(Error::Config(format!("unknown extremal type {other:?}"))),
        }
    }
}

/// An ordered partition `(A, B)` of the whole vertex range.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrderedPair {
    pub a: VertexSubset,
    pub b: VertexSubset,
}

impl OrderedPair {
    pub fn new(a: VertexSubset, b: VertexSubset) -> Result<Self> {
        if a.universe() != b.universe() {
            return Err(Error::BadPartition("A and B live in different universes".into()));
        }
        if !a.is_disjoint(&b) {
            return Err(Error::BadPartition("A and B intersect".into()));
        }
        if a.len() + b.len() != a.universe() {
            return Err(Error::BadPartition("A and B do not cover the vertex set".into()));
        }
        Ok(OrderedPair { a, b })
    }

    /// `A = {0, .., size_a - 1}` and `B` the rest.
    pub fn prefix(n: usize, size_a: usize) -> Self {
        let a = VertexSubset::from_iter(n, 0..size_a as u32);
        let b = a.complement();
        OrderedPair { a, b }
    }

    pub fn n(&self) -> usize {
        self.a.universe()
    }

    /// The pair restricted to `keep`, relabelled the same way
    /// [`Hypergraph::induced`] relabels.
    pub fn restrict(&self, keep: &VertexSubset) -> OrderedPair {
        let map: Vec<u32> = keep.to_vec();
        let m = map.len();
        let a = VertexSubset::from_iter(
            m,
            map.iter().enumerate().filter(|(_, &v)| self.a.contains(v)).map(|(i, _)| i as u32),
        );
        let b = a.complement();
        OrderedPair { a, b }
    }
}

impl Serialize for OrderedPair {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = serializer.serialize_struct("OrderedPair", 2)?;
        st.serialize_field("A", &self.a)?;
        st.serialize_field("B", &self.b)?;
        st.end()
    }
}

/// Output of [`find_extremal_partition`].
#[derive(Clone, Debug, PartialEq)]
pub struct ExtremalProfile {
    pub alpha: ExtremalType,
    pub pair: OrderedPair,
    pub atypical_mass: u64,
    pub special_index: usize,
    pub divisibility_ok: bool,
}

impl Serialize for ExtremalProfile {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = serializer.serialize_struct("ExtremalProfile", 6)?;
        st.serialize_field("A", &self.pair.a)?;
        st.serialize_field("B", &self.pair.b)?;
        st.serialize_field("alpha", &self.alpha)?;
        st.serialize_field("atypical_mass", &self.atypical_mass)?;
        st.serialize_field("divisibility_ok", &self.divisibility_ok)?;
        st.serialize_field("special_index", &self.special_index)?;
        st.end()
    }
}

/// `K_n^k`.
pub fn complete(n: usize, k: usize) -> Result<Hypergraph> {
    Hypergraph::complete(k, n)
}

fn check_divides(k: usize, n: usize) -> Result<()> {
    if k < 3 || n == 0 || n % k != 0 {
        return Err(Error::NotDivisible { k, n });
    }
    Ok(())
}

/// Size of `A` in a standard ordered pair.
pub fn a_of(k: usize, n: usize) -> Result<usize> {
    check_divides(k, n)?;
    if k % 2 == 1 {
        // the unique odd integer among (n-2)/2, (n-1)/2, n/2, (n+1)/2
        let candidates = [n as i64 - 2, n as i64 - 1, n as i64, n as i64 + 1];
        let a = candidates
            .iter()
            .filter(|&&x| x % 2 == 0 && (x / 2) % 2 == 1)
            .map(|&x| x / 2)
            .next()
            .expect("exactly one odd candidate exists");
        Ok(a as usize)
    } else {
        let half = n / 2;
        if (n / k) % 2 == 1 && half % 2 == 0 {
            Ok(half)
        } else {
            Ok(half - 1)
        }
    }
}

/// Layer of `e` with respect to `A`: `|e ∩ A|`.
pub fn edge_layer(e: &[VertexId], a: &VertexSubset) -> usize {
    a.count_in(e)
}

fn is_critical_layer(k: usize, r: usize) -> bool {
    if k % 2 == 1 {
        r % 2 == 0
    } else {
        r % 2 == 1
    }
}

/// `H0(k, A, B)`: every k-subset of `A ∪ B` whose layer has the critical
/// parity (even for odd `k`, odd for even `k`).
pub fn critical_pair(k: usize, a: &VertexSubset, b: &VertexSubset) -> Result<Hypergraph> {
    layered(k, a, b, |r| is_critical_layer(k, r))
}

/// All k-subsets of `A ∪ B` whose layer satisfies `keep`.
pub fn layered<F: Fn(usize) -> bool>(
    k: usize,
    a: &VertexSubset,
    b: &VertexSubset,
    keep: F,
) -> Result<Hypergraph> {
    if a.universe() != b.universe() {
        return Err(Error::BadPartition("A and B live in different universes".into()));
    }
    if !a.is_disjoint(b) {
        return Err(Error::BadPartition("A and B intersect".into()));
    }
    let n = a.universe();
    if a.len() + b.len() < k {
        return Err(Error::BadPartition(format!(
            "|A| + |B| = {} is smaller than k = {k}",
            a.len() + b.len()
        )));
    }
    if k < 2 || n < k {
        return Err(Error::InvalidUniformity { k, n });
    }
    let pool = a.union(b).to_vec();
    let mut flat = Vec::new();
    for_each_combination(&pool, k, |e| {
        if keep(a.count_in(e)) {
            flat.extend_from_slice(e);
        }
        true
    });
    Ok(Hypergraph::from_sorted_flat(k, n, flat))
}

/// `H0(k, n)` on the standard pair with `A = {0, .., a(k,n) - 1}`.
pub fn critical_n(k: usize, n: usize) -> Result<(Hypergraph, OrderedPair)> {
    let size_a = a_of(k, n)?;
    let pair = OrderedPair::prefix(n, size_a);
    let h = critical_pair(k, &pair.a, &pair.b)?;
    Ok((h, pair))
}

/// The atypical layer added to `H0(k, n)` by [`critical_plus`]: 1 for odd
/// `k`, 2 for even `k`.
pub fn repair_layer(k: usize) -> usize {
    if k % 2 == 1 {
        1
    } else {
        2
    }
}

/// `H0(k, n)` together with the whole layer [`repair_layer`]. Its minimum
/// codegree exceeds `delta0(k, n)`, so it sits just above the critical value
/// while still being extremal.
pub fn critical_plus(k: usize, n: usize) -> Result<(Hypergraph, OrderedPair)> {
    let size_a = a_of(k, n)?;
    let pair = OrderedPair::prefix(n, size_a);
    let extra = repair_layer(k);
    let h = layered(k, &pair.a, &pair.b, |r| is_critical_layer(k, r) || r == extra)?;
    Ok((h, pair))
}

/// Minimum codegree of `H0(k, n)`.
pub fn delta0(k: usize, n: usize) -> Result<i64> {
    check_divides(k, n)?;
    let (k, n) = (k as i64, n as i64);
    // Work in doubled units so the half-integer cases stay exact.
    let twice = if k % 2 == 1 {
        match n % 4 {
            0 | 2 => n + 2 - 2 * k,
            1 => n + 1 - 2 * k,
            _ => n + 3 - 2 * k,
        }
    } else if (n / k) % 2 == 0 || (k / 2) % 2 == 1 {
        n + 2 - 2 * k
    } else {
        n + 4 - 2 * k
    };
    Ok(twice / 2)
}

/// The codegree Dirac threshold and whether the value is only known to hold
/// for large `n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct MCodegree {
    pub value: i64,
    pub asymptotic_only: bool,
}

/// `delta0(k, n) + 1` when `k | n`, otherwise `floor(n / k)`. Both formulas
/// are proven for sufficiently large `n` only, which the flag records.
pub fn m_codegree(k: usize, n: usize) -> Result<MCodegree> {
    if k < 2 || n < k {
        return Err(Error::InvalidUniformity { k, n });
    }
    let value = if n % k == 0 && k >= 3 {
        delta0(k, n)? + 1
    } else {
        (n / k) as i64
    };
    Ok(MCodegree {
        value,
        asymptotic_only: true,
    })
}

pub fn is_typical(alpha: ExtremalType, r: usize, k: usize) -> Result<bool> {
    if r > k {
        return Err(Error::BadIndex { r, k });
    }
    Ok(match alpha {
        ExtremalType::A | ExtremalType::C => r % 2 == 0,
        _ => r % 2 == 1,
    })
}

pub fn special_index(alpha: ExtremalType, k: usize) -> Result<usize> {
    alpha.check(k)?;
    Ok(match alpha {
        ExtremalType::A => k - 1,
        ExtremalType::B => 1,
        ExtremalType::C => k - 2,
        ExtremalType::D => k / 2 + 1,
        ExtremalType::E => k / 2,
    })
}

/// The divisibility condition for an ordered pair with the given part sizes.
/// `n` must equal `size_a + size_b`.
pub fn divisibility(
    alpha: ExtremalType,
    size_a: usize,
    size_b: usize,
    n: usize,
    k: usize,
) -> Result<bool> {
    alpha.check(k)?;
    if size_a + size_b != n {
        return Err(Error::BadPartition(format!(
            "|A| + |B| = {} but n = {n}",
            size_a + size_b
        )));
    }
    let half_diff = || (size_a as i64 - size_b as i64).div_euclid(2);
    Ok(match alpha {
        ExtremalType::A | ExtremalType::C => size_a % 2 == 0,
        ExtremalType::B => size_b % 2 == 0,
        ExtremalType::D => {
            (size_a + size_b) % 2 == 0 && half_diff().rem_euclid(2) == ((n / k) % 2) as i64
        }
        ExtremalType::E => (size_a + size_b) % 2 == 0 && half_diff().rem_euclid(2) == 0,
    })
}

fn check_pair(h: &Hypergraph, pair: &OrderedPair) -> Result<()> {
    if pair.n() != h.n() || pair.b.universe() != h.n() {
        return Err(Error::BadPartition(format!(
            "pair lives on {} vertices, hypergraph on {}",
            pair.n(),
            h.n()
        )));
    }
    if !pair.a.is_disjoint(&pair.b) || pair.a.len() + pair.b.len() != h.n() {
        return Err(Error::BadPartition("pair does not partition V(H)".into()));
    }
    Ok(())
}

fn typical_volume(alpha: ExtremalType, k: usize, size_a: usize, size_b: usize) -> u64 {
    (0..=k)
        .filter(|&r| r % 2 == usize::from(!matches!(alpha, ExtremalType::A | ExtremalType::C)))
        .map(|r| binomial(size_a as u64, r as u64).saturating_mul(binomial(size_b as u64, (k - r) as u64)))
        .fold(0u64, u64::saturating_add)
}

/// Number of α-typical k-sets (with respect to `pair`) missing from `h`.
pub fn atypical_mass(h: &Hypergraph, alpha: ExtremalType, pair: &OrderedPair) -> Result<u64> {
    check_pair(h, pair)?;
    let k = h.k();
    let volume = typical_volume(alpha, k, pair.a.len(), pair.b.len());
    if h.is_implicit_complete() {
        return Ok(0);
    }
    let mut present = 0u64;
    h.for_each_edge(|e| {
        present += u64::from(is_typical(alpha, pair.a.count_in(e), k).unwrap_or(false));
        true
    });
    Ok(volume - present)
}

/// The α-typical edges of `h` with respect to `pair`.
pub fn typical_subgraph(h: &Hypergraph, alpha: ExtremalType, pair: &OrderedPair) -> Result<Hypergraph> {
    check_pair(h, pair)?;
    let k = h.k();
    Ok(h.filter_edges(|e| is_typical(alpha, pair.a.count_in(e), k).unwrap_or(false)))
}

/// Layers whose edges repair divisibility after removal, per type and
/// whether `pair` already satisfies the condition.
pub fn candidate_layers(alpha: ExtremalType, k: usize, divisible: bool) -> Result<Vec<usize>> {
    let r_star = special_index(alpha, k)?;
    let mut layers = if divisible {
        vec![r_star]
    } else {
        match alpha {
            ExtremalType::A => vec![1, k - 2],
            ExtremalType::B => vec![k - 1, 2],
            ExtremalType::C => vec![1, k - 1],
            ExtremalType::D | ExtremalType::E => vec![2, k - 2],
        }
    };
    layers.sort_unstable();
    layers.dedup();
    Ok(layers)
}

/// Edges `e*` whose removal leaves a pair satisfying divisibility.
pub fn atypical_edge_candidates(
    h: &Hypergraph,
    alpha: ExtremalType,
    pair: &OrderedPair,
) -> Result<Vec<Edge>> {
    check_pair(h, pair)?;
    let k = h.k();
    let ok = divisibility(alpha, pair.a.len(), pair.b.len(), h.n(), k)?;
    let layers = candidate_layers(alpha, k, ok)?;
    let mut out = Vec::new();
    h.for_each_edge(|e| {
        if layers.contains(&pair.a.count_in(e)) {
            out.push(Edge::from_sorted(e.to_vec()));
        }
        true
    });
    Ok(out)
}

/// Profile of `h` under a given pair.
pub fn profile(h: &Hypergraph, alpha: ExtremalType, pair: OrderedPair) -> Result<ExtremalProfile> {
    let atypical_mass = atypical_mass(h, alpha, &pair)?;
    let special_index = special_index(alpha, h.k())?;
    let divisibility_ok = divisibility(alpha, pair.a.len(), pair.b.len(), h.n(), h.k())?;
    Ok(ExtremalProfile {
        alpha,
        pair,
        atypical_mass,
        special_index,
        divisibility_ok,
    })
}

/// Hill-climbing state for one restart of the partition search.
struct SwapSearch<'a> {
    k: usize,
    n: usize,
    edges: &'a [VertexId],
    alpha: ExtremalType,
    in_a: Vec<bool>,
}

impl SwapSearch<'_> {
    fn typical(&self, e: &[VertexId]) -> bool {
        let r = e.iter().filter(|&&v| self.in_a[v as usize]).count();
        is_typical(self.alpha, r, self.k).unwrap_or(false)
    }

    fn typical_edges(&self) -> u64 {
        self.edges.chunks_exact(self.k).filter(|e| self.typical(e)).count() as u64
    }

    /// Applies the best improving A<->B swap. Returns `false` at a local optimum.
    ///
    /// Swapping `u ∈ A` with `w ∈ B` flips the typicality of exactly the edges
    /// that contain one of them but not both, so the gain in typical edges is
    /// `g(u) + g(w) - 2 h(u, w)` with `g(v) = Σ_{e ∋ v} (1 - 2 typ(e))` and
    /// `h` the same sum over edges through both.
    fn improve(&mut self) -> bool {
        let n = self.n;
        let mut g = vec![0i64; n];
        let mut h = vec![0i64; n * n];
        for e in self.edges.chunks_exact(self.k) {
            let w = if self.typical(e) { -1 } else { 1 };
            for (i, &u) in e.iter().enumerate() {
                g[u as usize] += w;
                for &v in &e[i + 1..] {
                    h[u as usize * n + v as usize] += w;
                    h[v as usize * n + u as usize] += w;
                }
            }
        }
        let mut best = (0i64, usize::MAX, usize::MAX);
        for u in (0..n).filter(|&u| self.in_a[u]) {
            for w in (0..n).filter(|&w| !self.in_a[w]) {
                let gain = g[u] + g[w] - 2 * h[u * n + w];
                if gain > best.0 {
                    best = (gain, u, w);
                }
            }
        }
        if best.0 <= 0 {
            return false;
        }
        self.in_a[best.1] = false;
        self.in_a[best.2] = true;
        true
    }
}

/// Seeded local search over standard pairs (`|A| = a(k, n)`) for a partition
/// under which `h` is close to a type in `alpha_candidates`.
///
/// Each (type, restart) combination starts from a uniformly random standard
/// pair and applies best-improvement A<->B swaps until no swap lowers the
/// atypical mass. The minimum is taken over all combinations, ties broken by
/// candidate order and then restart index, so the result depends only on the
/// state of `rng`. Returns `None` when `k ∤ n`, when no candidate type fits
/// `k`, or when the best mass exceeds `eps · n^k`. `None` is not a proof of
/// non-containment.
pub fn find_extremal_partition(
    h: &Hypergraph,
    alpha_candidates: &[ExtremalType],
    eps: f64,
    restarts: usize,
    rng: &mut Rng,
) -> Option<ExtremalProfile> {
    let (k, n) = (h.k(), h.n());
    let size_a = a_of(k, n).ok()?;
    let alphas: Vec<ExtremalType> = alpha_candidates.iter().copied().filter(|t| t.compatible(k)).collect();
    if alphas.is_empty() {
        return None;
    }
    let base = rng.next_u64();
    let restarts = restarts.max(1);
    let starting_pair = |job: usize| {
        let mut r = RngSeed::new(base, job as u64).rng();
        let mut order: Vec<u32> = (0..n as u32).collect();
        order.shuffle(&mut r);
        let a = VertexSubset::from_iter(n, order[..size_a].iter().copied());
        let b = a.complement();
        OrderedPair { a, b }
    };
    let limit = eps * (n as f64).powi(k as i32);

    if h.edge_count() == binomial(n as u64, k as u64) {
        // Every typical set is present whatever the pair.
        let prof = profile(h, alphas[0], starting_pair(0)).ok()?;
        return (prof.atypical_mass as f64 <= limit).then_some(prof);
    }

    let mut flat = Vec::with_capacity(h.edge_count() as usize * k);
    h.for_each_edge(|e| {
        flat.extend_from_slice(e);
        true
    });
    let jobs: Vec<(usize, ExtremalType)> = alphas
        .iter()
        .enumerate()
        .flat_map(|(ai, &t)| (0..restarts).map(move |r| (ai * restarts + r, t)))
        .collect();
    let best = jobs
        .par_iter()
        .map(|&(job, alpha)| {
            let start = starting_pair(job);
            let mut search = SwapSearch {
                k,
                n,
                edges: &flat,
                alpha,
                in_a: (0..n as u32).map(|v| start.a.contains(v)).collect(),
            };
            while search.improve() {}
            let volume = typical_volume(alpha, k, size_a, n - size_a);
            let mass = volume - search.typical_edges();
            (mass, job, alpha, search.in_a)
        })
        .min_by_key(|(mass, job, _, _)| (*mass, *job))?;
    let (mass, _, alpha, in_a) = best;
    if mass as f64 > limit {
        return None;
    }
    let a = VertexSubset::from_iter(n, (0..n as u32).filter(|&v| in_a[v as usize]));
    let b = a.complement();
    let prof = profile(h, alpha, OrderedPair { a, b }).ok()?;
    debug_assert_eq!(prof.atypical_mass, mass);
    Some(prof)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcher::{has_perfect_matching, SolveBudget, SolveOutcome};

    fn brute_min_codegree(h: &Hypergraph) -> u64 {
        let all: Vec<u32> = (0..h.n() as u32).collect();
        let mut best = u64::MAX;
        for_each_combination(&all, h.k() - 1, |s| {
            let mut d = 0;
            for v in 0..h.n() as u32 {
                if !s.contains(&v) {
                    let mut e = s.to_vec();
                    e.push(v);
                    e.sort_unstable();
                    d += u64::from(h.contains_edge(&e));
                }
            }
            best = best.min(d);
            true
        });
        best
    }

    #[test]
    fn complete_examples() {
        assert_eq!(complete(6, 3).unwrap().edge_count(), 20);
        assert_eq!(complete(3, 3).unwrap().edge_count(), 1);
        assert_eq!(complete(8, 4).unwrap().edge_count(), 70);
        assert!(complete(2, 3).is_err());
    }

    #[test]
    fn a_of_examples() {
        assert_eq!(a_of(3, 12).unwrap(), 5);
        assert_eq!(a_of(3, 6).unwrap(), 3);
        assert_eq!(a_of(4, 8).unwrap(), 3);
        assert_eq!(a_of(3, 24).unwrap(), 11);
        // n/k odd, n/2 even: n = 12, k = 4 gives n/k = 3 and n/2 = 6.
        assert_eq!(a_of(4, 12).unwrap(), 6);
        // n/k odd, n/2 odd: n = 6, k = 6... k | n with n/k = 1, n/2 = 3.
        assert_eq!(a_of(6, 6).unwrap(), 2);
        assert!(matches!(a_of(3, 10), Err(Error::NotDivisible { .. })));
        for n in (3..60).step_by(3) {
            let a = a_of(3, n).unwrap();
            assert_eq!(a % 2, 1);
            assert!(2 * a + 2 >= n && 2 * a <= n + 1);
        }
    }

    #[test]
    fn critical_pair_examples() {
        let a = VertexSubset::from_iter(6, 0..3);
        let b = a.complement();
        assert_eq!(critical_pair(3, &a, &b).unwrap().edge_count(), 10);
        let brute = Hypergraph::complete(3, 6)
            .unwrap()
            .edges()
            .iter()
            .filter(|e| a.count_in(e) % 2 == 0)
            .count();
        assert_eq!(brute, 10);

        let empty_a = VertexSubset::empty(7);
        let h = critical_pair(3, &empty_a, &VertexSubset::full(7)).unwrap();
        assert_eq!(h, Hypergraph::complete(3, 7).unwrap());

        let a = VertexSubset::from_iter(8, 0..3);
        let h = critical_pair(4, &a, &a.complement()).unwrap();
        assert_eq!(h.edge_count(), 3 * 10 + 5);

        assert!(matches!(
            critical_pair(3, &VertexSubset::from_iter(6, [0, 1]), &VertexSubset::from_iter(6, [1, 2])),
            Err(Error::BadPartition(_))
        ));
    }

    #[test]
    fn critical_n_examples() {
        let (h, pair) = critical_n(3, 6).unwrap();
        assert_eq!((h.edge_count(), pair.a.len()), (10, 3));
        let (h, pair) = critical_n(3, 12).unwrap();
        assert_eq!(pair.a.len(), 5);
        assert_eq!(h.min_d_degree(2).unwrap(), 4);
        let (h, pair) = critical_n(4, 8).unwrap();
        assert_eq!(pair.a.len(), 3);
        assert_eq!(h.min_d_degree(3).unwrap(), 1);
    }

    #[test]
    fn delta0_examples_and_formula_matches_brute_force() {
        assert_eq!(delta0(3, 12).unwrap(), 4);
        assert_eq!(delta0(3, 9).unwrap(), 2);
        assert_eq!(delta0(4, 8).unwrap(), 1);
        for &(k, n) in &[(3, 6), (3, 9), (3, 12), (3, 15), (3, 18), (4, 8), (4, 12), (5, 10), (6, 12)] {
            let (h, _) = critical_n(k, n).unwrap();
            assert_eq!(
                brute_min_codegree(&h) as i64,
                delta0(k, n).unwrap(),
                "k = {k}, n = {n}"
            );
        }
    }

    #[test]
    fn m_codegree_examples() {
        assert_eq!(m_codegree(3, 12).unwrap().value, 5);
        assert_eq!(m_codegree(3, 10).unwrap().value, 3);
        assert_eq!(m_codegree(4, 8).unwrap().value, 2);
        assert!(m_codegree(3, 10).unwrap().asymptotic_only);
    }

    #[test]
    fn layers_typicality_and_special_index() {
        let a = VertexSubset::from_iter(6, 0..3);
        assert_eq!(edge_layer(&[3, 4, 5], &a), 0);
        assert_eq!(edge_layer(&[0, 1, 2], &a), 3);
        assert_eq!(edge_layer(&[0, 1, 4], &a), 2);

        assert!(is_typical(ExtremalType::A, 2, 3).unwrap());
        assert!(!is_typical(ExtremalType::B, 2, 3).unwrap());
        assert!(is_typical(ExtremalType::E, 3, 6).unwrap());
        assert!(matches!(is_typical(ExtremalType::A, 4, 3), Err(Error::BadIndex { .. })));

        assert_eq!(special_index(ExtremalType::A, 3).unwrap(), 2);
        assert_eq!(special_index(ExtremalType::C, 4).unwrap(), 2);
        assert_eq!(special_index(ExtremalType::E, 6).unwrap(), 3);
        assert!(matches!(special_index(ExtremalType::D, 6), Err(Error::IncompatibleType { .. })));
        assert!(matches!(special_index(ExtremalType::A, 4), Err(Error::IncompatibleType { .. })));
    }

    #[test]
    fn special_index_is_always_typical() {
        for k in 3..=12 {
            for alpha in ExtremalType::for_k(k) {
                let r = special_index(alpha, k).unwrap();
                assert!(is_typical(alpha, r, k).unwrap(), "{alpha} k={k}");
            }
        }
    }

    #[test]
    fn divisibility_examples() {
        assert!(divisibility(ExtremalType::A, 4, 8, 12, 3).unwrap());
        assert!(!divisibility(ExtremalType::B, 5, 7, 12, 3).unwrap());
        assert!(!divisibility(ExtremalType::D, 9, 7, 16, 4).unwrap());
        assert!(divisibility(ExtremalType::D, 10, 6, 16, 4).unwrap());
        assert!(matches!(
            divisibility(ExtremalType::C, 4, 8, 12, 3),
            Err(Error::IncompatibleType { .. })
        ));
    }

    #[test]
    fn atypical_mass_examples() {
        let (h0, pair) = critical_n(3, 6).unwrap();
        assert_eq!(atypical_mass(&h0, ExtremalType::A, &pair).unwrap(), 0);
        let empty = Hypergraph::empty(3, 6).unwrap();
        assert_eq!(atypical_mass(&empty, ExtremalType::A, &pair).unwrap(), 10);
        let minus_one = h0.filter_edges(|e| e != [0, 1, 3]);
        assert_eq!(minus_one.edge_count(), 9);
        assert_eq!(atypical_mass(&minus_one, ExtremalType::A, &pair).unwrap(), 1);
        let bad = OrderedPair::prefix(7, 3);
        assert!(matches!(atypical_mass(&h0, ExtremalType::A, &bad), Err(Error::BadPartition(_))));
    }

    #[test]
    fn atypical_mass_zero_on_own_critical_graph() {
        for k in 3..=6 {
            let alpha = if k % 2 == 1 {
                ExtremalType::A
            } else if k % 4 == 0 {
                ExtremalType::D
            } else {
                ExtremalType::E
            };
            for sa in 0..=8usize {
                for sb in 0..=8usize {
                    let n = sa + sb;
                    if n < k {
                        continue;
                    }
                    let pair = OrderedPair::prefix(n, sa);
                    let h = critical_pair(k, &pair.a, &pair.b).unwrap();
                    assert_eq!(atypical_mass(&h, alpha, &pair).unwrap(), 0, "k={k} |A|={sa} |B|={sb}");
                }
            }
        }
    }

    #[test]
    fn candidates_examples() {
        let (h0, pair) = critical_n(3, 6).unwrap();
        assert!(!divisibility(ExtremalType::A, 3, 3, 6, 3).unwrap());
        assert!(atypical_edge_candidates(&h0, ExtremalType::A, &pair).unwrap().is_empty());

        let mut edges = h0.edges();
        edges.push(Edge::new(vec![0, 3, 4]).unwrap());
        let plus = Hypergraph::build(3, 6, edges).unwrap();
        let cands = atypical_edge_candidates(&plus, ExtremalType::A, &pair).unwrap();
        assert_eq!(cands, vec![Edge::new(vec![0, 3, 4]).unwrap()]);

        // |A| = 4 is even: candidates are the whole special layer r = 2.
        let pair = OrderedPair::prefix(9, 4);
        let k9 = Hypergraph::complete(3, 9).unwrap();
        let cands = atypical_edge_candidates(&k9, ExtremalType::A, &pair).unwrap();
        assert_eq!(cands.len(), 6 * 5);
        assert!(cands.iter().all(|e| pair.a.count_in(e) == 2));
    }

    #[test]
    fn candidate_removal_repairs_divisibility() {
        // Exhaustive over layer choices for every type and small part sizes.
        for k in 3..=8 {
            for alpha in ExtremalType::for_k(k) {
                for sa in 0..=3 * k {
                    for sb in 0..=3 * k {
                        let n = sa + sb;
                        if n % k != 0 || n < 2 * k {
                            continue;
                        }
                        let ok = divisibility(alpha, sa, sb, n, k).unwrap();
                        for r in candidate_layers(alpha, k, ok).unwrap() {
                            if r > sa || k - r > sb {
                                continue;
                            }
                            assert!(
                                divisibility(alpha, sa - r, sb - (k - r), n - k, k).unwrap(),
                                "{alpha} k={k} |A|={sa} |B|={sb} r={r} divisible={ok}"
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn finds_planted_partition() {
        let (h0, planted) = critical_n(3, 12).unwrap();
        let mut rng = RngSeed::new(1, 0).rng();
        let prof = find_extremal_partition(&h0, &ExtremalType::ALL, 0.01, 8, &mut rng).unwrap();
        assert_eq!(prof.alpha, ExtremalType::A);
        assert_eq!(prof.atypical_mass, 0);
        assert_eq!(prof.pair.a.len(), planted.a.len());

        // Delete 5% of the typical edges; the planted pair then has mass equal
        // to the number deleted, and the search must reach it.
        let all = h0.edges();
        let drop = all.len() / 20;
        let kept: Vec<Edge> = all.iter().skip(drop).cloned().collect();
        let thinned = Hypergraph::build(3, 12, kept).unwrap();
        assert_eq!(atypical_mass(&thinned, ExtremalType::A, &planted).unwrap(), drop as u64);
        let mut rng = RngSeed::new(2, 0).rng();
        let prof = find_extremal_partition(&thinned, &[ExtremalType::A], 0.06, 8, &mut rng).unwrap();
        assert_eq!(prof.atypical_mass, drop as u64);
    }

    #[test]
    fn complete_graph_always_contains_the_pattern() {
        // Complete hypergraphs contain every typical set under every pair, so
        // the mass is zero for all partitions. Exhaustive at n = 9.
        let k9 = Hypergraph::complete(3, 9).unwrap().to_explicit();
        let all: Vec<u32> = (0..9).collect();
        for_each_combination(&all, a_of(3, 9).unwrap(), |a| {
            let a = VertexSubset::from_iter(9, a.iter().copied());
            let pair = OrderedPair::new(a.clone(), a.complement()).unwrap();
            assert_eq!(atypical_mass(&k9, ExtremalType::A, &pair).unwrap(), 0);
            assert_eq!(atypical_mass(&k9, ExtremalType::B, &pair).unwrap(), 0);
            true
        });
        let mut rng = RngSeed::new(0, 0).rng();
        let prof = find_extremal_partition(&k9, &[ExtremalType::A], 0.001, 2, &mut rng).unwrap();
        assert_eq!(prof.atypical_mass, 0);
        assert!(find_extremal_partition(&Hypergraph::complete(3, 20).unwrap(), &[ExtremalType::A], 0.001, 2, &mut rng).is_none());
    }

    #[test]
    fn search_is_deterministic() {
        let (h0, _) = critical_n(3, 12).unwrap();
        let thinned = h0.filter_edges(|e| e[0] % 3 != 0 || e[2] < 9);
        let run = |seed| {
            let mut rng = RngSeed::new(seed, 0).rng();
            find_extremal_partition(&thinned, &ExtremalType::ALL, 0.5, 6, &mut rng)
        };
        assert_eq!(run(5), run(5));
    }

    #[test]
    fn critical_graphs_have_no_perfect_matching() {
        for &(k, n) in &[(3, 6), (3, 12), (4, 8), (5, 10)] {
            let (h, _) = critical_n(k, n).unwrap();
            let out = has_perfect_matching(&h, SolveBudget::unlimited()).unwrap();
            assert!(matches!(out, SolveOutcome::No { .. }), "k={k} n={n}");
        }
    }

    #[test]
    fn critical_plus_raises_codegree() {
        let (h, _) = critical_plus(3, 24).unwrap();
        assert!(h.min_d_degree(2).unwrap() as i64 >= delta0(3, 24).unwrap() + 1);
        let (h, _) = critical_plus(4, 12).unwrap();
        assert!(h.min_d_degree(3).unwrap() as i64 >= delta0(4, 12).unwrap() + 1);
    }

    #[test]
    fn profile_json_shape() {
        let (h0, pair) = critical_n(3, 6).unwrap();
        let p = profile(&h0, ExtremalType::A, pair).unwrap();
        let json = serde_json::to_string(&p).unwrap();
        assert_eq!(
            json,
            r#"{"A":[0,1,2],"B":[3,4,5],"alpha":"a","atypical_mass":0,"divisibility_ok":false,"special_index":2}"#
        );
    }
}
