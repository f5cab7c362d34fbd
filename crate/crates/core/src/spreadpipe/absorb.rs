use std::collections::HashSet;

use rand::seq::index::sample as sample_indices;
use rand::Rng as _;
use serde::Serialize;

use super::cover::random_extension;
use crate::error::{Error, Result};
use crate::hypergraph::{Edge, Hypergraph, VertexId};
use crate::matcher::{has_perfect_matching, Matching, SolveBudget};
use crate::rng::Rng;
use crate::subset::VertexSubset;

/// Random search attempts per requested absorber.
const ATTEMPTS_PER_ABSORBER: usize = 40;

/// An `S`-absorbing k-matching `{e_1, .., e_k}` together with the
/// `(k+1)`-matching `{e'_1, .., e'_k, f}` that swallows `S = {x_1, .., x_k}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AbsorberK {
    pub target: Vec<VertexId>,
    pub core: Vec<Edge>,
    pub witness: Vec<Edge>,
}

/// An `S`-absorbing `(k+1)`-matching `{e_0, .., e_k}` with its
/// `(k+2)`-matching `{e'_1, .., e'_k, f, f'}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AbsorberK1 {
    pub target: Vec<VertexId>,
    pub core: Vec<Edge>,
    pub witness: Vec<Edge>,
}

/// The unique element of `a \ b`, if there is exactly one.
fn lone_difference(a: &[VertexId], b: &[VertexId]) -> Option<VertexId> {
    let mut it = a.iter().filter(|v| !b.contains(v));
    let first = *it.next()?;
    it.next().is_none().then_some(first)
}

fn is_matching(edges: &[Edge], n: usize) -> bool {
    Matching::from_edges(n, edges.iter().cloned()).is_ok()
}

/// Shared part of both invariant checks: membership, the matching property,
/// `e'_i \ e_i = {x_i}`, and that the witness covers exactly `V(core) ∪ S`.
/// Returns the `y_i` of `e_i \ e'_i` for `i = 1..k` (core indices `offset..`).
fn common_checks(
    h: &Hypergraph,
    target: &[VertexId],
    core: &[Edge],
    witness: &[Edge],
    offset: usize,
) -> Option<Vec<VertexId>> {
    let (k, n) = (h.k(), h.n());
    let all_in = core.iter().chain(witness).all(|e| e.len() == k && h.contains_edge(e));
    if target.len() != k || !all_in || !is_matching(core, n) || !is_matching(witness, n) {
        return None;
    }
    let s = Edge::new(target.to_vec()).ok()?;
    if core.iter().any(|e| !e.is_disjoint(&s)) {
        return None;
    }
    let mut ys = Vec::with_capacity(k);
    for i in 0..k {
        let (e, e_prime) = (&core[offset + i], &witness[i]);
        if lone_difference(e_prime, e)? != target[i] {
            return None;
        }
        ys.push(lone_difference(e, e_prime)?);
    }
    for (i, e) in core.iter().enumerate() {
        for (j, e_prime) in witness[..k].iter().enumerate() {
            if i != offset + j && !e.is_disjoint(e_prime) {
                return None;
            }
        }
    }
    let mut inside = VertexSubset::from_iter(n, target.iter().copied());
    core.iter().for_each(|e| e.iter().for_each(|&v| _ = inside.insert(v)));
    let covered = Matching::from_edges(n, witness.iter().cloned()).ok()?;
    (covered.covered() == &inside).then_some(ys)
}

impl AbsorberK {
    /// Whether (AM1)-(AM3) hold in `h`.
    pub fn check(&self, h: &Hypergraph) -> bool {
        let k = h.k();
        if self.core.len() != k || self.witness.len() != k + 1 {
            return false;
        }
        let Some(ys) = common_checks(h, &self.target, &self.core, &self.witness, 0) else {
            return false;
        };
        Edge::new(ys).is_ok_and(|f| f == self.witness[k])
    }
}

impl AbsorberK1 {
    /// Whether (AM1')-(AM3') hold in `h`.
    pub fn check(&self, h: &Hypergraph) -> bool {
        let k = h.k();
        if self.core.len() != k + 1 || self.witness.len() != k + 2 {
            return false;
        }
        let Some(ys) = common_checks(h, &self.target, &self.core, &self.witness, 1) else {
            return false;
        };
        let (e0, e1, f, f_prime) = (&self.core[0], &self.core[1], &self.witness[k], &self.witness[k + 1]);
        let meets_e1: Vec<VertexId> = f.iter().copied().filter(|v| e1.contains(v)).collect();
        if meets_e1 != [ys[0]] || lone_difference(f, e0) != Some(ys[0]) {
            return false;
        }
        let Some(y0) = lone_difference(e0, f) else {
            return false;
        };
        let mut expected = vec![y0];
        expected.extend_from_slice(&ys[1..]);
        Edge::new(expected).is_ok_and(|g| &g == f_prime)
    }
}

fn validate_target(h: &Hypergraph, s: &[VertexId]) -> Result<Vec<VertexId>> {
    let e = Edge::new(s.to_vec())?;
    if e.len() != h.k() || e.iter().any(|&v| v as usize >= h.n()) {
        return Err(Error::BadEdge {
            edge: s.to_vec(),
            reason: "target must be k distinct vertices of H",
        });
    }
    Ok(s.to_vec())
}

/// Draws `T_i` with `T_i ∪ {x_i} ∈ H`, then `y_i` with `T_i ∪ {y_i} ∈ H`, all
/// fresh. Returns `(T_i, y_i)` pairs and the vertices still unused.
fn draw_switches(
    h: &Hypergraph,
    target: &[VertexId],
    avail: &mut VertexSubset,
    rng: &mut Rng,
) -> Option<Vec<(Vec<VertexId>, VertexId)>> {
    let mut ts = Vec::with_capacity(target.len());
    for &x in target {
        let t = random_extension(h, &[x], avail, rng)?;
        t.iter().for_each(|&v| _ = avail.remove(v));
        ts.push(t);
    }
    let mut out = Vec::with_capacity(target.len());
    for t in ts {
        let mut sorted_t = t.clone();
        sorted_t.sort_unstable();
        let y = random_extension(h, &sorted_t, avail, rng)?[0];
        avail.remove(y);
        out.push((t, y));
    }
    Some(out)
}

fn edge_with(t: &[VertexId], v: VertexId) -> Edge {
    let mut e = t.to_vec();
    e.push(v);
    Edge::new(e).expect("fresh vertex")
}

/// Randomized search for up to `limit` distinct `S`-absorbing k-matchings.
/// Every returned absorber passes [`AbsorberK::check`].
pub fn find_absorbers_k(h: &Hypergraph, s: &[VertexId], limit: usize, rng: &mut Rng) -> Result<Vec<AbsorberK>> {
    let target = validate_target(h, s)?;
    let k = h.k();
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    if h.n() < k * k + k {
        return Ok(out);
    }
    for _ in 0..limit * ATTEMPTS_PER_ABSORBER {
        if out.len() == limit {
            break;
        }
        let mut avail = VertexSubset::from_iter(h.n(), target.iter().copied()).complement();
        let Some(switches) = draw_switches(h, &target, &mut avail, rng) else {
            continue;
        };
        let f = Edge::new(switches.iter().map(|&(_, y)| y).collect()).expect("distinct");
        if !h.contains_edge(&f) {
            continue;
        }
        let core: Vec<Edge> = switches.iter().map(|(t, y)| edge_with(t, *y)).collect();
        let mut witness: Vec<Edge> = switches.iter().zip(&target).map(|((t, _), &x)| edge_with(t, x)).collect();
        witness.push(f);
        let absorber = AbsorberK { target: target.clone(), core, witness };
        debug_assert!(absorber.check(h));
        let mut key = absorber.core.clone();
        key.sort_unstable();
        if seen.insert(key) {
            out.push(absorber);
        }
    }
    Ok(out)
}

/// Randomized search for up to `limit` distinct `S`-absorbing
/// `(k+1)`-matchings. Every returned absorber passes [`AbsorberK1::check`].
pub fn find_absorbers_k1(h: &Hypergraph, s: &[VertexId], limit: usize, rng: &mut Rng) -> Result<Vec<AbsorberK1>> {
    let target = validate_target(h, s)?;
    let k = h.k();
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    if h.n() < k * k + 2 * k {
        return Ok(out);
    }
    for _ in 0..limit * ATTEMPTS_PER_ABSORBER {
        if out.len() == limit {
            break;
        }
        let mut avail = VertexSubset::from_iter(h.n(), target.iter().copied()).complement();
        let Some(switches) = draw_switches(h, &target, &mut avail, rng) else {
            continue;
        };
        let y1 = switches[0].1;
        let Some(r) = random_extension(h, &[y1], &avail, rng) else {
            continue;
        };
        r.iter().for_each(|&v| _ = avail.remove(v));
        let mut r_sorted = r.clone();
        r_sorted.sort_unstable();
        let rest_ys: Vec<VertexId> = switches[1..].iter().map(|&(_, y)| y).collect();
        let mut y0_options = Vec::new();
        h.for_each_extension(&r_sorted, &avail, |y| {
            let mut g = rest_ys.clone();
            g.push(y[0]);
            g.sort_unstable();
            if h.contains_edge(&g) {
                y0_options.push(y[0]);
            }
            true
        });
        if y0_options.is_empty() {
            continue;
        }
        let y0 = y0_options[rng.random_range(0..y0_options.len())];
        let mut core = vec![edge_with(&r, y0)];
        core.extend(switches.iter().map(|(t, y)| edge_with(t, *y)));
        let mut witness: Vec<Edge> = switches.iter().zip(&target).map(|((t, _), &x)| edge_with(t, x)).collect();
        witness.push(edge_with(&r, y1));
        witness.push(edge_with(&rest_ys, y0));
        let absorber = AbsorberK1 { target: target.clone(), core, witness };
        debug_assert!(absorber.check(h));
        let mut key = absorber.core.clone();
        key.sort_unstable();
        if seen.insert(key) {
            out.push(absorber);
        }
    }
    Ok(out)
}

fn random_k_set(pool: &[VertexId], k: usize, rng: &mut Rng) -> Vec<VertexId> {
    let mut s: Vec<VertexId> = sample_indices(rng, pool.len(), k).iter().map(|i| pool[i]).collect();
    s.sort_unstable();
    s
}

/// Builds a small absorbing matching inside `u`.
///
/// Up to `cover_samples` random k-sets `S ⊆ u` are drawn; for each, a
/// k-absorber (or, failing that, a (k+1)-absorber) avoiding everything used
/// so far is added while the matching stays within `size_cap` edges, and `S`
/// is certified by its witness. A second round of `cover_samples` random
/// k-sets outside the matching is certified when the exact solver finds a
/// perfect matching of `H[V(M) ∪ S]`. Only certified sets are claimed to be
/// absorbable.
pub fn build_absorbing_matching(
    h: &Hypergraph,
    u: &VertexSubset,
    size_cap: usize,
    cover_samples: usize,
    rng: &mut Rng,
) -> Result<(Matching, Vec<Vec<VertexId>>)> {
    let (k, n) = (h.k(), h.n());
    let mut m = Matching::empty(n);
    let mut certified: Vec<Vec<VertexId>> = Vec::new();
    let mut blocked = u.complement();
    for _ in 0..cover_samples {
        if m.len() + k > size_cap {
            break;
        }
        let pool: Vec<VertexId> = blocked.complement().iter().collect();
        if pool.len() < k {
            break;
        }
        let s = random_k_set(&pool, k, rng);
        let (local, map) = h.induced(&blocked.complement());
        let back: std::collections::HashMap<VertexId, VertexId> =
            map.iter().enumerate().map(|(i, &v)| (v, i as VertexId)).collect();
        let local_s: Vec<VertexId> = s.iter().map(|v| back[v]).collect();
        let core = if let Some(a) = find_absorbers_k(&local, &local_s, 1, rng)?.pop() {
            a.core
        } else if m.len() + k < size_cap {
            match find_absorbers_k1(&local, &local_s, 1, rng)?.pop() {
                Some(a) => a.core,
                None => continue,
            }
        } else {
            continue;
        };
        for e in core {
            let lifted = Edge::new(e.iter().map(|&v| map[v as usize]).collect())?;
            lifted.iter().for_each(|&v| _ = blocked.insert(v));
            m.push(lifted)?;
        }
        s.iter().for_each(|&v| _ = blocked.insert(v));
        certified.push(s);
    }

    let free: Vec<VertexId> = u.iter().filter(|&v| !m.covered().contains(v)).collect();
    let witnessed: HashSet<Vec<VertexId>> = certified.iter().cloned().collect();
    if !m.is_empty() && free.len() >= k {
        for _ in 0..cover_samples {
            let s = random_k_set(&free, k, rng);
            if witnessed.contains(&s) || certified.contains(&s) {
                continue;
            }
            let mut inside = m.covered().clone();
            s.iter().for_each(|&v| _ = inside.insert(v));
            let (local, _) = h.induced(&inside);
            if has_perfect_matching(&local, SolveBudget::new(1_000_000, 2_000))?.is_yes() {
                certified.push(s);
            }
        }
    }
    Ok((m, certified))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::{complete, critical_n};
    use crate::rng::RngSeed;

    fn witness_is_pm(h: &Hypergraph, target: &[VertexId], core: &[Edge], witness: &[Edge]) -> bool {
        let mut inside = VertexSubset::from_iter(h.n(), target.iter().copied());
        core.iter().for_each(|e| e.iter().for_each(|&v| _ = inside.insert(v)));
        let (local, map) = h.induced(&inside);
        let back: std::collections::HashMap<VertexId, VertexId> =
            map.iter().enumerate().map(|(i, &v)| (v, i as VertexId)).collect();
        let relabelled = witness.iter().map(|e| Edge::new(e.iter().map(|v| back[v]).collect()).unwrap());
        let w = Matching::from_edges(local.n(), relabelled).unwrap();
        w.is_perfect_in(&local) && has_perfect_matching(&local, SolveBudget::unlimited()).unwrap().is_yes()
    }

    #[test]
    fn complete_hosts_yield_valid_absorbers() {
        let h = complete(40, 3).unwrap();
        let mut rng = RngSeed::new(3, 0).rng();
        let found = find_absorbers_k(&h, &[5, 11, 30], 5, &mut rng).unwrap();
        assert_eq!(found.len(), 5);
        for a in &found {
            assert!(a.check(&h));
            assert!(witness_is_pm(&h, &a.target, &a.core, &a.witness));
        }
        let h = complete(50, 3).unwrap().to_explicit();
        let found = find_absorbers_k1(&h, &[0, 1, 2], 3, &mut rng).unwrap();
        assert_eq!(found.len(), 3);
        for a in &found {
            assert!(a.check(&h));
            assert!(witness_is_pm(&h, &a.target, &a.core, &a.witness));
        }
    }

    #[test]
    fn no_room_or_no_edges() {
        let mut rng = RngSeed::new(0, 0).rng();
        let empty = Hypergraph::empty(3, 40).unwrap();
        assert!(find_absorbers_k(&empty, &[0, 1, 2], 3, &mut rng).unwrap().is_empty());
        assert!(find_absorbers_k1(&empty, &[0, 1, 2], 3, &mut rng).unwrap().is_empty());
        assert!(find_absorbers_k(&complete(6, 3).unwrap(), &[0, 1, 2], 1, &mut rng).unwrap().is_empty());
        assert!(find_absorbers_k1(&complete(14, 3).unwrap(), &[0, 1, 2], 1, &mut rng).unwrap().is_empty());
        assert!(find_absorbers_k(&complete(12, 3).unwrap(), &[0, 1], 1, &mut rng).is_err());
        let (m, certified) =
            build_absorbing_matching(&empty, &VertexSubset::full(40), 9, 50, &mut rng).unwrap();
        assert!(m.is_empty() && certified.is_empty());
    }

    #[test]
    fn tampered_absorber_fails_check() {
        let h = complete(40, 3).unwrap();
        let mut rng = RngSeed::new(1, 0).rng();
        let mut a = find_absorbers_k(&h, &[0, 1, 2], 1, &mut rng).unwrap().pop().unwrap();
        a.witness.swap(0, 1);
        assert!(!a.check(&h));
        let mut b = find_absorbers_k1(&h, &[0, 1, 2], 1, &mut rng).unwrap().pop().unwrap();
        b.core.swap(0, 1);
        assert!(!b.check(&h));
    }

    #[test]
    fn certified_sets_are_absorbable() {
        let h = complete(60, 3).unwrap();
        let mut rng = RngSeed::new(9, 0).rng();
        let (m, certified) = build_absorbing_matching(&h, &VertexSubset::full(60), 9, 50, &mut rng).unwrap();
        assert!(m.len() <= 9 && !m.is_empty() && !certified.is_empty());
        assert!(m.is_valid_in(&h));
        for s in &certified {
            let mut inside = m.covered().clone();
            s.iter().for_each(|&v| assert!(inside.insert(v)));
            let (local, _) = h.induced(&inside);
            assert!(has_perfect_matching(&local, SolveBudget::unlimited()).unwrap().is_yes());
        }
    }

    #[test]
    fn critical_host_certifies_only_even_a_sets() {
        let (h, pair) = critical_n(3, 30).unwrap();
        let mut rng = RngSeed::new(4, 0).rng();
        let (m, certified) = build_absorbing_matching(&h, &VertexSubset::full(30), 9, 50, &mut rng).unwrap();
        assert!(m.is_valid_in(&h));
        assert!(!certified.is_empty());
        for s in &certified {
            assert_eq!(pair.a.count_in(s) % 2, 0, "{s:?}");
        }
    }
}
