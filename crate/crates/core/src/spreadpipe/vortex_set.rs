use std::collections::HashMap;

use rand::seq::SliceRandom;

use super::tuple::tuple_matching;
use super::PipelineConfig;
use crate::combo::for_each_combination;
use crate::error::{Error, Result};
use crate::hypergraph::{Edge, Hypergraph, VertexId};
use crate::matcher::{greedy_matching, maximum_matching, Matching};
use crate::rng::{fork, Rng};
use crate::subset::VertexSubset;

/// Clusters above this count get a greedy reduced matching instead of an
/// exact one.
const EXACT_REDUCED_MAX: usize = 15;

/// Random almost-perfect matching of `h`.
///
/// The vertices are split uniformly at random into `t_clusters` clusters of
/// equal size (the remainder is discarded). A cluster k-set becomes a
/// reduced edge when the partite density between its clusters is at least
/// `density_floor`; a maximum matching of the reduced hypergraph then picks
/// disjoint cluster tuples, and each tuple is matched by an independent
/// [`tuple_matching`] run with `regular_eps`.
pub fn vortex_set_matching(h: &Hypergraph, config: &PipelineConfig, rng: &mut Rng) -> Result<Matching> {
    let (k, n, t) = (h.k(), h.n(), config.t_clusters);
    if t < k || n < k * t {
        return Err(Error::TooSmall(format!("{n} vertices cannot fill {t} clusters of at least k = {k}")));
    }
    let mut order: Vec<VertexId> = (0..n as u32).collect();
    order.shuffle(rng);
    let m = n / t;
    let clusters: Vec<VertexSubset> = order
        .chunks_exact(m)
        .take(t)
        .map(|c| VertexSubset::from_iter(n, c.iter().copied()))
        .collect();

    let reduced = reduced_hypergraph(h, &clusters, config.density_floor)?;
    let picked = if t <= EXACT_REDUCED_MAX {
        maximum_matching(&reduced, config.solver_budget).unwrap_or_else(|| greedy_matching(&reduced, rng))
    } else {
        greedy_matching(&reduced, rng)
    };

    let mut out = Matching::empty(n);
    for tuple in picked.edges() {
        let parts: Vec<VertexSubset> = tuple.iter().map(|&c| clusters[c as usize].clone()).collect();
        let mut own = fork(rng);
        let (part_matching, _) = tuple_matching(h, &parts, config.regular_eps, &mut own)?;
        out.extend_from(&part_matching)?;
    }
    Ok(out)
}

/// Cluster k-sets whose partite density reaches `floor`, counted in one pass
/// over the edges.
fn reduced_hypergraph(h: &Hypergraph, clusters: &[VertexSubset], floor: f64) -> Result<Hypergraph> {
    let (k, t) = (h.k(), clusters.len());
    let ids: Vec<u32> = (0..t as u32).collect();
    if h.is_implicit_complete() {
        let mut edges = Vec::new();
        if floor <= 1.0 {
            for_each_combination(&ids, k, |c| {
                edges.push(Edge::from_sorted(c.to_vec()));
                true
            });
        }
        return Hypergraph::build(k, t, edges);
    }
    let mut cluster_of = vec![u32::MAX; h.n()];
    for (i, c) in clusters.iter().enumerate() {
        for v in c.iter() {
            cluster_of[v as usize] = i as u32;
        }
    }
    let mut counts: HashMap<Vec<u32>, u64> = HashMap::new();
    let mut key = Vec::with_capacity(k);
    h.for_each_edge(|e| {
        key.clear();
        key.extend(e.iter().map(|&v| cluster_of[v as usize]));
        key.sort_unstable();
        if key[k - 1] != u32::MAX && key.windows(2).all(|w| w[0] < w[1]) {
            *counts.entry(key.clone()).or_default() += 1;
        }
        true
    });
    let volume = (clusters[0].len() as f64).powi(k as i32);
    let mut edges: Vec<Edge> = counts
        .into_iter()
        .filter(|&(_, c)| c as f64 >= floor * volume)
        .map(|(key, _)| Edge::from_sorted(key))
        .collect();
    edges.sort_unstable();
    Hypergraph::build(k, t, edges)
}
