use rand::seq::index::sample as sample_indices;
use rand::Rng as _;

use crate::error::{Error, Result};
use crate::hypergraph::{Edge, Hypergraph, VertexId};
use crate::matcher::Matching;
use crate::rng::Rng;
use crate::subset::VertexSubset;

/// Matches every vertex of `a` by an edge whose other `k-1` vertices come
/// from `b`. Vertices of `a` are handled in increasing id order, each taking
/// a uniformly random `(k-1)`-set among those still available in `b`.
pub fn cover_down(h: &Hypergraph, a: &VertexSubset, b: &VertexSubset, rng: &mut Rng) -> Result<Matching> {
    if !a.is_disjoint(b) {
        return Err(Error::BadParts("A and B must be disjoint".into()));
    }
    let mut avail = b.clone();
    let mut out = Matching::empty(h.n());
    for v in a.iter() {
        let rest = random_extension(h, &[v], &avail, rng).ok_or(Error::Stuck { vertex: v })?;
        for &u in &rest {
            avail.remove(u);
        }
        let mut e = rest;
        e.push(v);
        out.push(Edge::new(e)?)?;
    }
    Ok(out)
}

/// A uniformly random `T ⊆ within \ s` with `s ∪ T ∈ H`, or `None` when no
/// such set exists.
pub(super) fn random_extension(
    h: &Hypergraph,
    s: &[VertexId],
    within: &VertexSubset,
    rng: &mut Rng,
) -> Option<Vec<VertexId>> {
    let need = h.k() - s.len();
    if h.is_implicit_complete() {
        let pool: Vec<VertexId> = within.iter().filter(|v| !s.contains(v)).collect();
        if pool.len() < need {
            return None;
        }
        return Some(sample_indices(rng, pool.len(), need).iter().map(|i| pool[i]).collect());
    }
    let mut options: Vec<Vec<VertexId>> = Vec::new();
    h.for_each_extension(s, within, |t| {
        options.push(t.to_vec());
        true
    });
    if options.is_empty() {
        None
    } else {
        Some(options.swap_remove(rng.random_range(0..options.len())))
    }
}
