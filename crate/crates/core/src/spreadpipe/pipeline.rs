use rand::Rng as _;
use serde::Serialize;

use super::cover::{cover_down, random_extension};
use super::vortex_set::vortex_set_matching;
use super::PipelineConfig;
use crate::error::{Error, Result};
use crate::hypergraph::{Edge, Hypergraph, VertexId};
use crate::matcher::{greedy_matching, Matching};
use crate::randomize::Vortex;
use crate::rng::Rng;
use crate::subset::VertexSubset;

/// What happened at one level `j` of the pipeline (1-based).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LevelTrace {
    pub j: usize,
    pub size: usize,
    /// Edges placed inside the level.
    pub matched: usize,
    /// Level vertices left uncovered by those edges.
    pub wasted: usize,
    /// Edges pushing the wasted vertices into the next level.
    pub covered_down: usize,
    /// Extra attempts after a stuck cover-down.
    pub retries: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct PipelineRun {
    pub matching: Matching,
    pub trace: Vec<LevelTrace>,
    pub parity_fixed: bool,
}

/// The three output contracts of a pipeline run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ContractReport {
    pub parity_ok: bool,
    pub protected_untouched: bool,
    pub uncovered_in_last: bool,
    pub intrusion: usize,
    pub intrusion_bound: f64,
    pub intrusion_ok: bool,
}

impl ContractReport {
    pub fn all_ok(&self) -> bool {
        self.parity_ok && self.protected_untouched && self.uncovered_in_last && self.intrusion_ok
    }
}

/// Checks a matching against the vortex contracts: `|M| ≡ s (mod 2)` when
/// `s` is given, `U_* ⊆ V \ V(M) ⊆ U_ℓ`, and `|V(M) ∩ U_ℓ| ≤ ε² p_ℓ n`.
pub fn check_contracts(
    m: &Matching,
    vortex: &Vortex,
    u_star: &VertexSubset,
    s: Option<u8>,
    eps: f64,
) -> ContractReport {
    let last = vortex.last();
    let uncovered = m.covered().complement();
    let intrusion = m.covered().intersection_len(last);
    let bound = eps * eps * vortex.p_vec[vortex.ell - 1] * vortex.n() as f64;
    ContractReport {
        parity_ok: s.is_none_or(|s| m.len() % 2 == s as usize),
        protected_untouched: u_star.is_subset(&uncovered),
        uncovered_in_last: uncovered.is_subset(last),
        intrusion,
        intrusion_bound: bound,
        intrusion_ok: intrusion as f64 <= bound,
    }
}

/// Random matching of `h` along a vortex.
///
/// For `j = 1..ℓ-1` the uncovered part of `U_j` is matched by
/// [`vortex_set_matching`] (skipped when the level is too small for the
/// cluster count) and the leftovers are pushed into `U_{j+1} \ U_*` by
/// [`cover_down`]. The vortex-set matching is topped up by a random greedy
/// matching on whatever it left, so few vertices need covering down. A stuck cover-down redraws that level, up to `retry_cap`
/// times. If `s` is given and the parity is wrong, one uniformly random edge
/// inside `U_ℓ \ (V(M) ∪ U_*)` is added.
pub fn vortex_pipeline(
    h: &Hypergraph,
    vortex: &Vortex,
    u_star: &VertexSubset,
    s: Option<u8>,
    config: &PipelineConfig,
    rng: &mut Rng,
) -> Result<PipelineRun> {
    let n = h.n();
    if vortex.n() != n {
        return Err(Error::BadPartition("vortex and hypergraph differ in size".into()));
    }
    if !u_star.is_subset(vortex.last()) {
        return Err(Error::BadPartition("U_* must lie inside the last level".into()));
    }
    if matches!(s, Some(s) if s > 1) {
        return Err(Error::Config("parity target must be 0 or 1".into()));
    }
    let mut m = Matching::empty(n);
    let mut trace = Vec::with_capacity(vortex.ell);
    for j in 0..vortex.ell - 1 {
        let level = vortex.parts[j].difference(m.covered());
        let next = vortex.parts[j + 1].difference(u_star).difference(m.covered());
        let mut retries = 0;
        let (inside, down) = loop {
            let inside = match_level(h, &level, config, rng)?;
            let leftover = level.difference(inside.covered());
            match cover_down(h, &leftover, &next, rng) {
                Ok(down) => break (inside, down),
                Err(Error::Stuck { vertex }) => {
                    retries += 1;
                    if retries >= config.retry_cap {
                        return Err(Error::Stuck { vertex });
                    }
                }
                Err(e) => return Err(e),
            }
        };
        trace.push(LevelTrace {
            j: j + 1,
            size: vortex.parts[j].len(),
            matched: inside.len(),
            wasted: level.len() - inside.covered().len(),
            covered_down: down.len(),
            retries,
        });
        m.extend_from(&inside)?;
        m.extend_from(&down)?;
    }
    let mut parity_fixed = false;
    if let Some(s) = s {
        if m.len() % 2 != s as usize {
            let room = vortex.last().difference(m.covered()).difference(u_star);
            let e = random_edge_inside(h, &room, rng).ok_or(Error::ParityImpossible)?;
            m.push(e)?;
            parity_fixed = true;
        }
    }
    Ok(PipelineRun { matching: m, trace, parity_fixed })
}

fn match_level(h: &Hypergraph, level: &VertexSubset, config: &PipelineConfig, rng: &mut Rng) -> Result<Matching> {
    let (local, map) = h.induced(level);
    let mut inner = match vortex_set_matching(&local, config, rng) {
        Ok(m) => m,
        Err(Error::TooSmall(_)) => Matching::empty(local.n()),
        Err(e) => return Err(e),
    };
    let rest = inner.covered().complement();
    let (leftover, rest_map) = local.induced(&rest);
    inner.extend_from(&greedy_matching(&leftover, rng).lift(&rest_map, local.n()))?;
    Ok(inner.lift(&map, h.n()))
}

/// A uniformly random edge of `H[room]`.
fn random_edge_inside(h: &Hypergraph, room: &VertexSubset, rng: &mut Rng) -> Option<Edge> {
    if h.is_implicit_complete() {
        return random_extension(h, &[], room, rng).and_then(|e| Edge::new(e).ok());
    }
    let mut inside: Vec<Vec<VertexId>> = Vec::new();
    h.for_each_edge(|e| {
        if room.contains_all(e) {
            inside.push(e.to_vec());
        }
        true
    });
    if inside.is_empty() {
        return None;
    }
    Edge::new(inside.swap_remove(rng.random_range(0..inside.len()))).ok()
}
