//! Sparsification threshold curves and perfect-matching counts.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::construct::{complete, critical_plus};
use crate::error::{Error, Result};
use crate::hypergraph::Hypergraph;
use crate::matcher::{count_perfect_matchings, optimal_matching, CountOutcome, SolveBudget, SolveOutcome};
use crate::randomize::sparsify;
use crate::rng::RngSeed;

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959964;

/// Wilson score interval for `successes` out of `trials` at quantile `z`.
pub fn wilson(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let t = trials as f64;
    let p = successes as f64 / t;
    let z2 = z * z;
    let denom = 1.0 + z2 / t;
    let centre = (p + z2 / (2.0 * t)) / denom;
    let half = z * (p * (1.0 - p) / t + z2 / (4.0 * t * t)).sqrt() / denom;
    // the endpoints at 0 and 1 are exact; only rounding could move them
    let low = if successes == 0 { 0.0 } else { (centre - half).max(0.0) };
    let high = if successes == trials { 1.0 } else { (centre + half).min(1.0) };
    (low, high)
}

/// `(k-1)! ln n / n^(k-1)`, the scale at which isolated vertices disappear.
pub fn threshold_scale(k: usize, n: usize) -> f64 {
    let fact: f64 = (1..k).map(|i| i as f64).product();
    fact * (n as f64).ln() / (n as f64).powi(k as i32 - 1)
}

/// `points` geometrically spaced probabilities from `lo · scale` to
/// `hi · scale`, clamped to `[0, 1]`.
pub fn geometric_grid(k: usize, n: usize, points: usize, lo: f64, hi: f64) -> Vec<f64> {
    let scale = threshold_scale(k, n);
    if points == 1 {
        return vec![(lo * scale).clamp(0.0, 1.0)];
    }
    let ratio = (hi / lo).powf(1.0 / (points - 1) as f64);
    (0..points)
        .map(|i| (lo * scale * ratio.powi(i as i32)).clamp(0.0, 1.0))
        .collect()
}

/// The default grid: 13 points from a quarter to sixteen times the scale.
pub fn default_grid(k: usize, n: usize) -> Vec<f64> {
    geometric_grid(k, n, 13, 0.25, 16.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BaseKind {
    Complete,
    /// `H0(k, n)` plus the layer that repairs its divisibility.
    #[serde(rename = "critical+1")]
    CriticalPlus,
}

impl FromStr for BaseKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "complete" => Ok(BaseKind::Complete),
            "critical+1" | "critical-plus" => Ok(BaseKind::CriticalPlus),
            other => Err(Error::Config(format!("unknown base `{other}`"))),
        }
    }
}

impl fmt::Display for BaseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BaseKind::Complete => "complete",
            BaseKind::CriticalPlus => "critical+1",
        })
    }
}

pub fn base_hypergraph(kind: BaseKind, k: usize, n: usize) -> Result<Hypergraph> {
    match kind {
        BaseKind::Complete => complete(n, k),
        BaseKind::CriticalPlus => critical_plus(k, n).map(|(h, _)| h),
    }
}

/// One `(n, p)` cell of a threshold curve. Timed-out trials count as
/// failures and are reported in `timeouts`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ThresholdRow {
    pub n: usize,
    pub p: f64,
    pub trials: u64,
    pub successes: u64,
    pub timeouts: u64,
    pub pr_hat: f64,
    pub wilson_low: f64,
    pub wilson_high: f64,
}

impl ThresholdRow {
    pub const CSV_HEADER: &'static str = "n,p,trials,successes,timeouts,pr_hat,wilson_low,wilson_high";

    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            self.n, self.p, self.trials, self.successes, self.timeouts, self.pr_hat, self.wilson_low, self.wilson_high
        )
    }
}

/// Estimates `Pr[H_p has an optimal matching]` for every `(host, p)` cell.
///
/// Cells are listed host by host in grid order. Trial `t` of cell `c` uses
/// stream `c · 2^32 + t` of `seed`, so the output only depends on the inputs.
pub fn threshold_curve(
    hosts: &[(Hypergraph, Vec<f64>)],
    trials: u64,
    budget: SolveBudget,
    seed: u64,
) -> Result<Vec<ThresholdRow>> {
    if trials == 0 {
        return Err(Error::Config("trials must be at least 1".into()));
    }
    let cells: Vec<(&Hypergraph, f64)> =
        hosts.iter().flat_map(|(h, grid)| grid.iter().map(move |&p| (h, p))).collect();
    if let Some(&(_, p)) = cells.iter().find(|(_, p)| !(0.0..=1.0).contains(p)) {
        return Err(Error::BadProbability(p));
    }
    cells
        .par_iter()
        .enumerate()
        .map(|(c, &(h, p))| {
            let outcomes: Vec<Result<Option<bool>>> = (0..trials)
                .into_par_iter()
                .map(|t| {
                    let mut rng = RngSeed::new(seed, ((c as u64) << 32) | t).rng();
                    let sparse = sparsify(h, p, &mut rng)?;
                    Ok(match optimal_matching(&sparse, budget) {
                        SolveOutcome::Yes { .. } => Some(true),
                        SolveOutcome::No { .. } => Some(false),
                        SolveOutcome::Timeout { .. } => None,
                    })
                })
                .collect();
            let mut successes = 0;
            let mut timeouts = 0;
            for o in outcomes {
                match o? {
                    Some(true) => successes += 1,
                    Some(false) => {}
                    None => timeouts += 1,
                }
            }
            let (wilson_low, wilson_high) = wilson(successes, trials, Z95);
            Ok(ThresholdRow {
                n: h.n(),
                p,
                trials,
                successes,
                timeouts,
                pr_hat: successes as f64 / trials as f64,
                wilson_low,
                wilson_high,
            })
        })
        .collect()
}

/// Where a single-`n` curve crosses one half.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HalfPoint {
    pub n: usize,
    /// Log-linear interpolation between the two grid points around the
    /// crossing.
    pub estimate: f64,
    /// Largest `p` whose Wilson interval lies below 1/2.
    pub bracket_low: Option<f64>,
    /// Smallest `p` whose Wilson interval lies above 1/2.
    pub bracket_high: Option<f64>,
}

/// `p_{1/2}` for rows of one `n`, sorted by `p`. `None` if the curve never
/// reaches one half or starts above it.
pub fn half_point(rows: &[ThresholdRow]) -> Option<HalfPoint> {
    let i = rows.iter().position(|r| r.pr_hat >= 0.5)?;
    if i == 0 {
        return None;
    }
    let (a, b) = (&rows[i - 1], &rows[i]);
    let t = (0.5 - a.pr_hat) / (b.pr_hat - a.pr_hat);
    let estimate = (a.p.ln() + t * (b.p.ln() - a.p.ln())).exp();
    Some(HalfPoint {
        n: b.n,
        estimate,
        bracket_low: rows.iter().filter(|r| r.wilson_high < 0.5).map(|r| r.p).reduce(f64::max),
        bracket_high: rows.iter().filter(|r| r.wilson_low > 0.5).map(|r| r.p).reduce(f64::min),
    })
}

/// Adjacent grid steps (rows sorted by `p`) where `pr_hat` drops and the
/// earlier estimate lies outside the later point's Wilson interval.
pub fn monotonicity_violations(rows: &[ThresholdRow]) -> usize {
    rows.windows(2)
        .filter(|w| w[1].pr_hat < w[0].pr_hat && w[0].pr_hat > w[1].wilson_high)
        .count()
}

/// Exact perfect-matching count of `K_n^k` with the leading term
/// `(1 - 1/k) n ln n` of the lower bound for comparison.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CountRow {
    pub n: usize,
    /// `None` when the count timed out.
    pub count: Option<u128>,
    pub log_count: Option<f64>,
    pub leading_term: f64,
}

impl CountRow {
    pub const CSV_HEADER: &'static str = "n,count,log_count,leading_term";

    pub fn csv_line(&self) -> String {
        let opt = |v: Option<String>| v.unwrap_or_else(|| "timeout".into());
        format!(
            "{},{},{},{}",
            self.n,
            opt(self.count.map(|c| c.to_string())),
            opt(self.log_count.map(|c| c.to_string())),
            self.leading_term
        )
    }
}

pub fn count_row(h: &Hypergraph, budget: SolveBudget) -> Result<CountRow> {
    let (k, n) = (h.k() as f64, h.n());
    let count = match count_perfect_matchings(h, budget)? {
        CountOutcome::Count { count, .. } => Some(count),
        CountOutcome::Timeout { .. } => None,
    };
    Ok(CountRow {
        n,
        count,
        log_count: count.map(|c| (c as f64).ln()),
        leading_term: (1.0 - 1.0 / k) * n as f64 * (n as f64).ln(),
    })
}
