use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use hypermatch::randomize::VortexParams;
use hypermatch::spreadpipe::{Mode, PipelineConfig};
use serde::Deserialize;

/// Vertex counts: one value, a list, or an inclusive stepped range.
#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum NSpec {
    One(usize),
    List(Vec<usize>),
    Range { from: usize, to: usize, step: Option<usize> },
}

impl NSpec {
    pub fn values(&self) -> Result<Vec<usize>> {
        Ok(match self {
            NSpec::One(n) => vec![*n],
            NSpec::List(v) => v.clone(),
            NSpec::Range { from, to, step } => {
                let step = step.unwrap_or(1);
                if step == 0 || from > to {
                    bail!("n range needs from <= to and step >= 1");
                }
                (*from..=*to).step_by(step).collect()
            }
        })
    }
}

/// Probabilities: an explicit list or `count` geometric points from
/// `lo · scale` to `hi · scale` around the isolated-vertex scale.
#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum PGrid {
    List(Vec<f64>),
    Geometric { count: usize, lo: f64, hi: f64 },
}

/// Reproducible experiment settings, read from JSON or TOML. Command-line
/// flags take precedence over anything set here.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: Option<u64>,
    pub k: Option<usize>,
    pub n: Option<NSpec>,
    pub p_grid: Option<PGrid>,
    pub trials: Option<u64>,
    pub mode: Option<Mode>,
    pub base: Option<String>,
    pub input: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub budget_ms: Option<u64>,
    pub budget_nodes: Option<u64>,
    pub pipeline: PipelineConfig,
    pub vortex: VortexParams,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let config: ExperimentConfig = match path.extension().and_then(|e| e.to_str()) {
            Some("toml") => toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?,
            _ => serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == Some(0) {
            bail!("trials must be at least 1");
        }
        match &self.p_grid {
            Some(PGrid::List(ps)) => {
                if let Some(p) = ps.iter().find(|p| !(0.0..=1.0).contains(*p)) {
                    bail!("p = {p} is outside [0, 1]");
                }
            }
            Some(PGrid::Geometric { count, lo, hi }) => {
                if *count == 0 || !(*lo > 0.0 && lo <= hi) {
                    bail!("geometric grid needs count >= 1 and 0 < lo <= hi");
                }
            }
            None => {}
        }
        if let Some(n) = &self.n {
            n.values()?;
        }
        Ok(())
    }
}
