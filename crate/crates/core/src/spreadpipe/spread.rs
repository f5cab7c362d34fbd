use std::collections::{BTreeMap, HashMap};
use std::io::Write;

use rand::seq::index::sample as sample_indices;
use rand::{Rng as _, RngCore};
use rayon::prelude::*;
use serde::ser::{SerializeMap, Serializer};
use serde::Serialize;

use super::sample::{sample_spread_pm, Mode};
use super::PipelineConfig;
use crate::error::{Error, Result};
use crate::hypergraph::{Edge, Hypergraph};
use crate::matcher::{enumerate_perfect_matchings, Matching, SolveBudget};
use crate::rng::{Rng, RngSeed};

/// Anything that draws random matchings of a host hypergraph.
pub trait MatchingSampler: Sync {
    fn sample(&self, h: &Hypergraph, rng: &mut Rng) -> Result<Matching>;
}

/// Uniform choice among all perfect matchings, enumerated up front.
#[derive(Clone, Debug)]
pub struct UniformPmSampler {
    all: Vec<Matching>,
}

impl UniformPmSampler {
    /// Enumerates up to `limit` perfect matchings of `h`; fails when there
    /// are more, when there are none, or when the budget runs out.
    pub fn new(h: &Hypergraph, limit: usize, budget: SolveBudget) -> Result<Self> {
        let all = enumerate_perfect_matchings(h, limit, budget)?
            .ok_or_else(|| Error::TooSmall(format!("more than {limit} perfect matchings or budget hit")))?;
        if all.is_empty() {
            return Err(Error::Exhausted { attempts: 0 });
        }
        Ok(UniformPmSampler { all })
    }

    pub fn len(&self) -> usize {
        self.all.len()
    }

    pub fn is_empty(&self) -> bool {
        self.all.is_empty()
    }
}

impl MatchingSampler for UniformPmSampler {
    fn sample(&self, _h: &Hypergraph, rng: &mut Rng) -> Result<Matching> {
        Ok(self.all[rng.random_range(0..self.all.len())].clone())
    }
}

/// Always returns the same matching.
#[derive(Clone, Debug)]
pub struct FixedSampler(pub Matching);

impl MatchingSampler for FixedSampler {
    fn sample(&self, _h: &Hypergraph, _rng: &mut Rng) -> Result<Matching> {
        Ok(self.0.clone())
    }
}

/// [`sample_spread_pm`] in a fixed mode.
#[derive(Clone, Debug)]
pub struct PipelineSampler {
    pub mode: Mode,
    pub config: PipelineConfig,
}

impl MatchingSampler for PipelineSampler {
    fn sample(&self, h: &Hypergraph, rng: &mut Rng) -> Result<Matching> {
        sample_spread_pm(h, self.mode, &self.config, rng).map(|r| r.matching)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairFrequency {
    pub first: Edge,
    pub second: Edge,
    pub frequency: f64,
}

/// Empirical inclusion frequencies. Frequencies are over successful trials;
/// edges never drawn are absent from `per_edge_freq`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpreadReport {
    pub trials: usize,
    pub failures: usize,
    pub per_edge_freq: BTreeMap<Edge, f64>,
    pub max_single: f64,
    pub pair_sample: Vec<PairFrequency>,
    pub spread_constant_estimate: f64,
}

impl SpreadReport {
    pub fn frequency(&self, e: &[u32]) -> f64 {
        Edge::new(e.to_vec())
            .ok()
            .and_then(|e| self.per_edge_freq.get(&e).copied())
            .unwrap_or(0.0)
    }

    /// `edge,frequency` rows in edge order, vertices space-separated.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        w.write_all(b"edge,frequency\n")?;
        for (e, f) in &self.per_edge_freq {
            writeln!(w, "{e},{f}")?;
        }
        Ok(())
    }
}

struct EdgeMap<'a>(&'a BTreeMap<Edge, f64>);

impl Serialize for EdgeMap<'_> {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.0.len()))?;
        for (e, f) in self.0 {
            map.serialize_entry(&e.to_string(), f)?;
        }
        map.end()
    }
}

impl Serialize for SpreadReport {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = serializer.serialize_struct("SpreadReport", 6)?;
        st.serialize_field("failures", &self.failures)?;
        st.serialize_field("max_single", &self.max_single)?;
        st.serialize_field("pair_sample", &self.pair_sample)?;
        st.serialize_field("per_edge_freq", &EdgeMap(&self.per_edge_freq))?;
        st.serialize_field("spread_constant_estimate", &self.spread_constant_estimate)?;
        st.serialize_field("trials", &self.trials)?;
        st.end()
    }
}

#[derive(Default)]
struct Tally {
    ok: u64,
    failed: u64,
    edges: HashMap<Edge, u64>,
    pairs: Vec<u64>,
}

impl Tally {
    fn merge(mut self, other: Tally) -> Tally {
        self.ok += other.ok;
        self.failed += other.failed;
        for (e, c) in other.edges {
            *self.edges.entry(e).or_default() += c;
        }
        if self.pairs.len() < other.pairs.len() {
            self.pairs.resize(other.pairs.len(), 0);
        }
        for (a, b) in self.pairs.iter_mut().zip(other.pairs) {
            *a += b;
        }
        self
    }
}

/// Up to `count` uniformly random pairs of disjoint edges of `h`.
fn disjoint_pairs(h: &Hypergraph, count: usize, rng: &mut Rng) -> Vec<(Edge, Edge)> {
    let (k, n) = (h.k(), h.n());
    let mut out = Vec::with_capacity(count);
    if count == 0 {
        return out;
    }
    if h.is_implicit_complete() {
        if n < 2 * k {
            return out;
        }
        while out.len() < count {
            let picked: Vec<u32> = sample_indices(rng, n, 2 * k).iter().map(|v| v as u32).collect();
            let a = Edge::new(picked[..k].to_vec()).expect("distinct");
            let b = Edge::new(picked[k..].to_vec()).expect("distinct");
            out.push((a, b));
        }
        return out;
    }
    let edges = h.edges();
    if edges.len() < 2 {
        return out;
    }
    for _ in 0..count * 100 {
        if out.len() == count {
            break;
        }
        let i = rng.random_range(0..edges.len());
        let j = rng.random_range(0..edges.len());
        if edges[i].is_disjoint(&edges[j]) {
            out.push((edges[i].clone(), edges[j].clone()));
        }
    }
    out
}

/// Runs `trials` independent draws (in parallel, one RNG stream per trial)
/// and reports per-edge inclusion frequencies, the frequencies of
/// `pair_samples` random disjoint edge pairs, and
/// `max_single · n^(k-1)`.
pub fn spread_estimate<S: MatchingSampler + ?Sized>(
    sampler: &S,
    h: &Hypergraph,
    trials: usize,
    pair_samples: usize,
    rng: &mut Rng,
) -> Result<SpreadReport> {
    if trials == 0 {
        return Err(Error::Config("trials must be at least 1".into()));
    }
    let base = rng.next_u64();
    let pairs = disjoint_pairs(h, pair_samples, rng);
    let tally = (0..trials)
        .into_par_iter()
        .fold(Tally::default, |mut t, i| {
            let mut r = RngSeed::new(base, i as u64).rng();
            match sampler.sample(h, &mut r) {
                Ok(m) => {
                    t.ok += 1;
                    for e in m.edges() {
                        *t.edges.entry(e.clone()).or_default() += 1;
                    }
                    t.pairs.resize(pairs.len(), 0);
                    for (slot, (a, b)) in t.pairs.iter_mut().zip(&pairs) {
                        if m.edges().contains(a) && m.edges().contains(b) {
                            *slot += 1;
                        }
                    }
                }
                Err(_) => t.failed += 1,
            }
            t
        })
        .reduce(Tally::default, Tally::merge);
    if tally.ok == 0 {
        return Err(Error::Exhausted { attempts: trials });
    }
    let ok = tally.ok as f64;
    let per_edge_freq: BTreeMap<Edge, f64> = tally.edges.into_iter().map(|(e, c)| (e, c as f64 / ok)).collect();
    let max_single = per_edge_freq.values().copied().fold(0.0, f64::max);
    let mut pair_counts = tally.pairs;
    pair_counts.resize(pairs.len(), 0);
    let pair_sample = pairs
        .into_iter()
        .zip(pair_counts)
        .map(|((first, second), c)| PairFrequency { first, second, frequency: c as f64 / ok })
        .collect();
    Ok(SpreadReport {
        trials,
        failures: tally.failed as usize,
        per_edge_freq,
        max_single,
        pair_sample,
        spread_constant_estimate: max_single * (h.n() as f64).powi(h.k() as i32 - 1),
    })
}
