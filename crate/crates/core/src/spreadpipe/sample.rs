use std::fmt;
use std::str::FromStr;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::absorb::build_absorbing_matching;
use super::pipeline::{vortex_pipeline, LevelTrace};
use super::PipelineConfig;
use crate::combo::binomial;
use crate::construct::{
    atypical_edge_candidates, divisibility, find_extremal_partition, m_codegree, typical_subgraph,
    ExtremalType,
};
use crate::error::{Error, Result};
use crate::hypergraph::{Edge, Hypergraph};
use crate::matcher::{optimal_matching, Matching, SolveOutcome};
use crate::randomize::{clamped_levels, vortex_levels, vortex_with_levels, Vortex};
use crate::rng::Rng;
use crate::subset::VertexSubset;

/// Largest number of (k-1)-sets scanned for the warn-only codegree check.
const CODEGREE_CHECK_LIMIT: u64 = 200_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    #[serde(rename = "general-degree")]
    General,
    CodegreeNonextremal,
    CodegreeExtremal,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::General => "general-degree",
            Mode::CodegreeNonextremal => "codegree-nonextremal",
            Mode::CodegreeExtremal => "codegree-extremal",
        })
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "general" | "general-degree" => Ok(Mode::General),
            "nonextremal" | "codegree-nonextremal" => Ok(Mode::CodegreeNonextremal),
            "extremal" | "codegree-extremal" => Ok(Mode::CodegreeExtremal),
            other => Err(Error::Config(format!("unknown mode `{other}`"))),
        }
    }
}

/// The extremal branch's choices for one successful run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExtremalTrace {
    pub alpha: ExtremalType,
    pub e_star: Edge,
    /// `|e* ∩ A|`.
    pub layer: usize,
    pub candidate_count: usize,
    /// Divisibility of `(A \ e*, B \ e*)` on the remaining vertices.
    pub residual_divisible: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SampleRun {
    pub mode: Mode,
    pub matching: Matching,
    /// Attempts used, including the successful one.
    pub attempts: usize,
    /// Level trace of the successful pipeline run (empty when the host was
    /// too small for a vortex and was solved directly).
    pub trace: Vec<LevelTrace>,
    pub extremal: Option<ExtremalTrace>,
    /// Minimum codegree and the codegree threshold, when cheap to compute.
    /// Informational only: a failed check does not stop the run.
    pub min_codegree: Option<u64>,
    pub codegree_threshold: Option<i64>,
}

/// Draws a random optimal matching of `h` through the vortex pipeline.
///
/// Every attempt draws a fresh vortex, runs the pipeline and completes the
/// uncovered vertices (all inside the last level) with the exact solver.
/// Stuck pipelines, impossible parity fixes and failed or timed-out
/// completions are retried up to `retry_cap` times.
pub fn sample_spread_pm(h: &Hypergraph, mode: Mode, config: &PipelineConfig, rng: &mut Rng) -> Result<SampleRun> {
    let k = h.k();
    config.validate(k)?;
    let (min_codegree, codegree_threshold) = degree_check(h, mode);
    let extremal = match mode {
        Mode::CodegreeExtremal => {
            let prof = find_extremal_partition(
                h,
                &ExtremalType::for_k(k),
                config.extremal_eps,
                config.extremal_restarts,
                rng,
            )
            .ok_or(Error::NoPartition)?;
            let candidates = atypical_edge_candidates(h, prof.alpha, &prof.pair)?;
            if candidates.is_empty() {
                return Err(Error::NoPartition);
            }
            Some((prof, candidates))
        }
        _ => None,
    };

    for attempt in 1..=config.retry_cap {
        let outcome = match (&extremal, mode) {
            (Some((prof, candidates)), _) => {
                extremal_attempt(h, prof.alpha, &prof.pair, candidates, config, rng).map(|(m, t, x)| (m, t, Some(x)))
            }
            (None, Mode::CodegreeNonextremal) => nonextremal_attempt(h, config, rng).map(|(m, t)| (m, t, None)),
            _ => general_attempt(h, config, rng).map(|(m, t)| (m, t, None)),
        };
        match outcome {
            Ok((matching, trace, extremal)) => {
                debug_assert!(matching.is_optimal_in(h));
                return Ok(SampleRun {
                    mode,
                    matching,
                    attempts: attempt,
                    trace,
                    extremal,
                    min_codegree,
                    codegree_threshold,
                });
            }
            Err(Error::Stuck { .. } | Error::ParityImpossible | Error::Exhausted { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::Exhausted { attempts: config.retry_cap })
}

fn degree_check(h: &Hypergraph, mode: Mode) -> (Option<u64>, Option<i64>) {
    let (k, n) = (h.k(), h.n());
    let cheap = h.is_implicit_complete() || binomial(n as u64, k as u64 - 1) <= CODEGREE_CHECK_LIMIT;
    let min = cheap.then(|| h.min_d_degree(k - 1).ok()).flatten();
    let threshold = match mode {
        Mode::General => Some((n / k) as i64),
        _ => m_codegree(k, n).ok().map(|m| m.value),
    };
    (min, threshold)
}

/// A vortex with the standard level count, or with fewer levels when the
/// standard last level would be too small. `None` when not even two levels
/// fit.
fn draw_vortex(h: &Hypergraph, config: &PipelineConfig, rng: &mut Rng) -> Result<Option<Vortex>> {
    let (n, k) = (h.n(), h.k());
    match vortex_with_levels(h, vortex_levels(n, k), config.vortex_params(), rng) {
        Ok(v) => return Ok(Some(v)),
        Err(Error::TooSmall(_)) => {}
        Err(e) => return Err(e),
    }
    let ell = clamped_levels(n, k);
    if ell < 2 {
        return Ok(None);
    }
    vortex_with_levels(h, ell, config.vortex_params(), rng).map(Some)
}

/// Exact optimal matching of `H[rest]`, lifted back to `h`.
fn complete_exactly(h: &Hypergraph, rest: &VertexSubset, config: &PipelineConfig) -> Result<Matching> {
    let (local, map) = h.induced(rest);
    match optimal_matching(&local, config.solver_budget) {
        SolveOutcome::Yes { matching, .. } => Ok(matching.lift(&map, h.n())),
        _ => Err(Error::Exhausted { attempts: 1 }),
    }
}

/// Pipeline with protected set `u_star` and parity `s`, then exact
/// completion.
fn pipeline_then_complete(
    h: &Hypergraph,
    u_star_of: impl FnOnce(&Vortex, &mut Rng) -> Result<VertexSubset>,
    s: Option<u8>,
    config: &PipelineConfig,
    rng: &mut Rng,
) -> Result<(Matching, Vec<LevelTrace>, VertexSubset)> {
    let Some(vortex) = draw_vortex(h, config, rng)? else {
        let full = complete_exactly(h, &VertexSubset::full(h.n()), config)?;
        return Ok((full, Vec::new(), VertexSubset::empty(h.n())));
    };
    let u_star = u_star_of(&vortex, rng)?;
    let run = vortex_pipeline(h, &vortex, &u_star, s, config, rng)?;
    let mut m = run.matching;
    let rest = m.covered().complement();
    let tail = complete_exactly(h, &rest, config)?;
    m.extend_from(&tail)?;
    Ok((m, run.trace, u_star))
}

fn general_attempt(h: &Hypergraph, config: &PipelineConfig, rng: &mut Rng) -> Result<(Matching, Vec<LevelTrace>)> {
    let (m, trace, _) = pipeline_then_complete(h, |v, _| Ok(VertexSubset::empty(v.n())), config.parity_target, config, rng)?;
    Ok((m, trace))
}

/// The absorbing matching built inside `U_ℓ` is the protected set. If the
/// exact completion of the leftover times out, the absorbing matching is
/// kept as it is and only the rest is solved.
fn nonextremal_attempt(h: &Hypergraph, config: &PipelineConfig, rng: &mut Rng) -> Result<(Matching, Vec<LevelTrace>)> {
    let k = h.k();
    let Some(vortex) = draw_vortex(h, config, rng)? else {
        return Ok((complete_exactly(h, &VertexSubset::full(h.n()), config)?, Vec::new()));
    };
    let last = vortex.last();
    let cap = config.absorb_size_cap.min((config.eps * last.len() as f64) as usize / k);
    let (absorbing, _) = build_absorbing_matching(h, last, cap, config.absorb_samples, rng)?;
    let u_star = absorbing.covered().clone();
    let run = vortex_pipeline(h, &vortex, &u_star, config.parity_target, config, rng)?;
    let mut m = run.matching;
    let rest = m.covered().complement();
    let tail = match complete_exactly(h, &rest, config) {
        Ok(t) => t,
        Err(_) if !absorbing.is_empty() => {
            let mut t = complete_exactly(h, &rest.difference(&u_star), config)?;
            t.extend_from(&absorbing)?;
            t
        }
        Err(e) => return Err(e),
    };
    m.extend_from(&tail)?;
    Ok((m, run.trace))
}

/// One extremal-branch attempt: remove a uniformly chosen atypical edge
/// `e*`, keep only typical edges of what remains, and run the pipeline
/// there with even parity for types (d) and (e).
fn extremal_attempt(
    h: &Hypergraph,
    alpha: ExtremalType,
    pair: &crate::construct::OrderedPair,
    candidates: &[Edge],
    config: &PipelineConfig,
    rng: &mut Rng,
) -> Result<(Matching, Vec<LevelTrace>, ExtremalTrace)> {
    let (k, n) = (h.k(), h.n());
    let e_star = candidates[rng.random_range(0..candidates.len())].clone();
    let layer = pair.a.count_in(&e_star);
    let mut keep = VertexSubset::full(n);
    e_star.iter().for_each(|&v| _ = keep.remove(v));
    let (rest, map) = h.induced(&keep);
    let rest_pair = pair.restrict(&keep);
    let residual_divisible = divisibility(alpha, rest_pair.a.len(), rest_pair.b.len(), n - k, k)?;
    let typical = typical_subgraph(&rest, alpha, &rest_pair)?;
    let s = matches!(alpha, ExtremalType::D | ExtremalType::E).then_some(0);
    let (inner, trace, _) = pipeline_then_complete(&typical, |v, _| Ok(VertexSubset::empty(v.n())), s, config, rng)?;
    let mut m = inner.lift(&map, n);
    m.push(e_star.clone())?;
    let info = ExtremalTrace {
        alpha,
        e_star,
        layer,
        candidate_count: candidates.len(),
        residual_divisible,
    };
    Ok((m, trace, info))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::{candidate_layers, complete, critical_plus};
    use crate::matcher::{has_perfect_matching, SolveBudget};
    use crate::rng::RngSeed;

    #[test]
    fn general_mode_on_small_complete_host() {
        let h = complete(24, 3).unwrap();
        let config = PipelineConfig::default();
        for seed in 0..30 {
            let run = sample_spread_pm(&h, Mode::General, &config, &mut RngSeed::new(seed, 0).rng()).unwrap();
            assert!(run.matching.is_perfect_in(&h));
            assert!(!run.trace.is_empty());
        }
    }

    #[test]
    fn optimal_when_k_does_not_divide_n() {
        let h = complete(26, 3).unwrap().to_explicit();
        let config = PipelineConfig::default();
        let run = sample_spread_pm(&h, Mode::General, &config, &mut RngSeed::new(2, 0).rng()).unwrap();
        assert!(run.matching.is_optimal_in(&h));
        assert_eq!(run.matching.len(), 8);
        assert!(run.min_codegree.unwrap() >= 8);
    }

    #[test]
    fn nonextremal_mode_on_complete_host() {
        let h = complete(60, 3).unwrap();
        let config = PipelineConfig::default();
        for seed in 0..5 {
            let run = sample_spread_pm(&h, Mode::CodegreeNonextremal, &config, &mut RngSeed::new(seed, 0).rng())
                .unwrap();
            assert!(run.matching.is_perfect_in(&h));
        }
    }

    #[test]
    fn extremal_mode_repairs_divisibility() {
        let (h, _) = critical_plus(3, 24).unwrap();
        let config = PipelineConfig::default();
        for seed in 0..10 {
            let run = sample_spread_pm(&h, Mode::CodegreeExtremal, &config, &mut RngSeed::new(seed, 0).rng())
                .unwrap();
            assert!(run.matching.is_perfect_in(&h));
            let x = run.extremal.unwrap();
            assert!(x.residual_divisible);
            assert!(candidate_layers(x.alpha, 3, false).unwrap().contains(&x.layer));
        }
        assert!(has_perfect_matching(&h, SolveBudget::unlimited()).unwrap().is_yes());
    }

    #[test]
    fn modes_parse_and_print() {
        for m in [Mode::General, Mode::CodegreeNonextremal, Mode::CodegreeExtremal] {
            assert_eq!(m.to_string().parse::<Mode>().unwrap(), m);
            assert_eq!(serde_json::to_string(&m).unwrap(), format!("\"{m}\""));
        }
        assert!("fast".parse::<Mode>().is_err());
    }
}
