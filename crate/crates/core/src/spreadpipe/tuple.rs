use rand::Rng as _;

use crate::error::{Error, Result};
use crate::hypergraph::{Edge, Hypergraph, VertexId};
use crate::matcher::Matching;
use crate::rng::Rng;
use crate::subset::VertexSubset;

/// Sequential random matching in a k-partite tuple `(V_1, .., V_k)` of equal
/// part size `m`.
///
/// Vertices `u_1, u_2, ..` of `V_1` are taken in increasing id order. While
/// the untouched parts `V_2, .., V_k` still hold at least `2 ε^(1/k) m`
/// vertices each, `u_j` is either matched by a uniformly random partite edge
/// into them or, when fewer than `ε² m^(k-1)` such edges exist, set aside as
/// waste. Returns the matching and the waste set.
pub fn tuple_matching(
    h: &Hypergraph,
    parts: &[VertexSubset],
    eps: f64,
    rng: &mut Rng,
) -> Result<(Matching, VertexSubset)> {
    let (k, n) = (h.k(), h.n());
    if parts.len() != k {
        return Err(Error::BadParts(format!("expected {k} parts, got {}", parts.len())));
    }
    let m = parts[0].len();
    if m == 0 || parts.iter().any(|p| p.len() != m) {
        return Err(Error::BadParts("parts must be nonempty and of equal size".into()));
    }
    let mut owner = vec![usize::MAX; n];
    for (i, p) in parts.iter().enumerate() {
        if p.universe() != n {
            return Err(Error::BadParts("part lives in a different universe".into()));
        }
        for v in p.iter() {
            if owner[v as usize] != usize::MAX {
                return Err(Error::OverlappingParts);
            }
            owner[v as usize] = i;
        }
    }

    let stop_below = 2.0 * eps.powf(1.0 / k as f64) * m as f64;
    let skip_below = eps * eps * (m as f64).powi(k as i32 - 1);
    let mut remaining: Vec<VertexSubset> = parts[1..].to_vec();
    let mut pools: Vec<Vec<VertexId>> = remaining.iter().map(VertexSubset::to_vec).collect();
    let mut matching = Matching::empty(n);
    let mut waste = VertexSubset::empty(n);
    let mut within = VertexSubset::empty(n);
    for r in &remaining {
        within.union_with(r);
    }

    for u in parts[0].iter() {
        if (remaining[0].len() as f64) < stop_below {
            break;
        }
        let chosen: Option<Vec<VertexId>> = if h.is_implicit_complete() {
            let count: f64 = pools.iter().map(|p| p.len() as f64).product();
            if count < skip_below || count == 0.0 {
                None
            } else {
                Some(pools.iter().map(|p| p[rng.random_range(0..p.len())]).collect())
            }
        } else {
            let mut options: Vec<Vec<VertexId>> = Vec::new();
            let mut seen = vec![false; k];
            h.for_each_extension(&[u], &within, |rest| {
                seen.iter_mut().for_each(|s| *s = false);
                let partite = rest.iter().all(|&v| {
                    let o = owner[v as usize];
                    let fresh = o >= 1 && !seen[o];
                    if fresh {
                        seen[o] = true;
                    }
                    fresh
                });
                if partite {
                    options.push(rest.to_vec());
                }
                true
            });
            if (options.len() as f64) < skip_below || options.is_empty() {
                None
            } else {
                Some(options.swap_remove(rng.random_range(0..options.len())))
            }
        };
        match chosen {
            None => {
                waste.insert(u);
            }
            Some(rest) => {
                for &v in &rest {
                    let part = owner[v as usize] - 1;
                    remaining[part].remove(v);
                    within.remove(v);
                    let pos = pools[part].iter().position(|&x| x == v).expect("v is in its pool");
                    pools[part].swap_remove(pos);
                }
                let mut e = rest;
                e.push(u);
                matching.push(Edge::new(e)?)?;
            }
        }
    }
    Ok((matching, waste))
}
