//! The iterative absorption sampler and its building blocks.
//!
//! A run draws a vertex vortex `U_1 ⊇ .. ⊇ U_ℓ` (levels of roughly halving
//! size), matches almost all of each level at random, pushes the few
//! leftovers into the next level with edges that meet the current level once
//! (cover-down), and finishes inside the small last level with the exact
//! solver. [`sample_spread_pm`] composes the pieces for the three supported
//! modes and [`spread_estimate`] measures the resulting inclusion
//! frequencies.

mod absorb;
mod cover;
mod pipeline;
mod sample;
mod spread;
mod tuple;
mod vortex_set;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcher::SolveBudget;
use crate::randomize::VortexParams;

pub use absorb::{build_absorbing_matching, find_absorbers_k, find_absorbers_k1, AbsorberK, AbsorberK1};
pub use cover::cover_down;
pub use pipeline::{check_contracts, vortex_pipeline, ContractReport, LevelTrace, PipelineRun};
pub use sample::{sample_spread_pm, ExtremalTrace, Mode, SampleRun};
pub use spread::{
    spread_estimate, FixedSampler, MatchingSampler, PairFrequency, PipelineSampler, SpreadReport,
    UniformPmSampler,
};
pub use tuple::tuple_matching;
pub use vortex_set::vortex_set_matching;

/// Constants of the pipeline. The theory only orders them
/// (`δ ≪ ε_* ≪ ε ≪ γ`), so every value here is a desk-scale default.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub d: usize,
    pub alpha1: f64,
    pub alpha2: f64,
    pub eps_star: f64,
    pub eps: f64,
    pub gamma: f64,
    pub delta: f64,
    pub t_clusters: usize,
    pub regular_eps: f64,
    pub density_floor: f64,
    /// Required parity of the pipeline matching; `None` leaves it free.
    pub parity_target: Option<u8>,
    pub retry_cap: usize,
    pub solver_budget: SolveBudget,
    /// Maximum number of edges in the absorbing matching (codegree modes).
    pub absorb_size_cap: usize,
    /// Random k-sets tried when building the absorbing matching.
    pub absorb_samples: usize,
    /// Containment tolerance and restarts for the extremal partition search.
    pub extremal_eps: f64,
    pub extremal_restarts: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            d: 2,
            alpha1: 0.15,
            alpha2: 0.15,
            eps_star: 0.05,
            eps: 0.2,
            gamma: 0.3,
            delta: 0.01,
            t_clusters: 12,
            regular_eps: 1e-4,
            density_floor: 0.1,
            parity_target: None,
            retry_cap: 20,
            solver_budget: SolveBudget::new(5_000_000, 20_000),
            absorb_size_cap: 9,
            absorb_samples: 50,
            extremal_eps: 0.05,
            extremal_restarts: 8,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self, k: usize) -> Result<()> {
        if !(0.0 < self.eps_star && self.eps_star < self.eps && self.eps < 1.0) {
            return Err(Error::Config(format!(
                "need 0 < eps_star < eps < 1, got eps_star = {}, eps = {}",
                self.eps_star, self.eps
            )));
        }
        if self.t_clusters < k {
            return Err(Error::Config(format!("t_clusters = {} is below k = {k}", self.t_clusters)));
        }
        if !(self.density_floor > 0.0) {
            return Err(Error::Config("density_floor must be positive".into()));
        }
        if matches!(self.parity_target, Some(s) if s > 1) {
            return Err(Error::Config("parity_target must be 0 or 1".into()));
        }
        if self.retry_cap == 0 {
            return Err(Error::Config("retry_cap must be >= 1".into()));
        }
        Ok(())
    }

    pub fn vortex_params(&self) -> VortexParams {
        VortexParams {
            d: self.d,
            alpha1: self.alpha1,
            alpha2: self.alpha2,
            eps: self.eps_star,
        }
    }
}
