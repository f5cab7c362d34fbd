use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use hypermatch::construct::{complete, critical_n, critical_plus};
use hypermatch::experiment::{base_hypergraph, count_row, geometric_grid, threshold_curve, BaseKind, CountRow, ThresholdRow};
use hypermatch::hgr::{read_hgr1, write_hgr1};
use hypermatch::matcher::{optimal_matching, SolveBudget, SolveOutcome};
use hypermatch::randomize::{random_hypergraph, sparsify, vortex_levels, vortex_with_levels};
use hypermatch::spreadpipe::{
    sample_spread_pm, spread_estimate, FixedSampler, MatchingSampler, Mode, PipelineSampler, UniformPmSampler,
};
use hypermatch::{Hypergraph, RngSeed};
use serde::Serialize;
use serde_json::json;

use crate::config::{ExperimentConfig, PGrid};
use crate::{Cli, Command, Family, HostArgs, SamplerKind};

const DEFAULT_SEED: u64 = 0;
const DEFAULT_TRIALS: u64 = 100;
const UNIFORM_LIMIT: usize = 100_000;

/// Flags merged over the config file.
struct Ctx {
    seed: u64,
    trials: Option<u64>,
    budget: SolveBudget,
    out: Option<PathBuf>,
    config: ExperimentConfig,
}

impl Ctx {
    fn rng(&self, stream: u64) -> hypermatch::rng::Rng {
        RngSeed::new(self.seed, stream).rng()
    }

    fn trials(&self) -> u64 {
        self.trials.or(self.config.trials).unwrap_or(DEFAULT_TRIALS)
    }

    fn mode(&self, flag: Option<&str>) -> Result<Mode> {
        match flag {
            Some(m) => Ok(m.parse()?),
            None => Ok(self.config.mode.unwrap_or(Mode::General)),
        }
    }

    fn sink(&self) -> Result<Box<dyn Write>> {
        sink(self.out.as_deref())
    }
}

fn sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// Pretty JSON with sorted keys and a trailing newline.
fn write_json<T: Serialize>(mut w: impl Write, value: &T) -> Result<()> {
    let v = serde_json::to_value(value)?;
    serde_json::to_writer_pretty(&mut w, &v)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

fn read_host(path: &Path) -> Result<Hypergraph> {
    let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    read_hgr1(BufReader::new(f)).with_context(|| format!("reading {}", path.display()))
}

fn host(args: &HostArgs, ctx: &Ctx, stream: u64) -> Result<Hypergraph> {
    if let Some(path) = args.input.as_ref().or(ctx.config.input.as_ref()) {
        return read_host(path);
    }
    let k = args.k.or(ctx.config.k).ok_or_else(|| anyhow!("need --k (or --input)"))?;
    let n = match (args.n, &ctx.config.n) {
        (Some(n), _) => n,
        (None, Some(ns)) => match ns.values()?.as_slice() {
            [n] => *n,
            _ => bail!("this command takes a single n"),
        },
        (None, None) => bail!("need --n (or --input)"),
    };
    let family = match (args.family, ctx.config.base.as_deref()) {
        (Some(f), _) => f,
        (None, Some("critical")) => Family::Critical,
        (None, Some("critical+1")) => Family::CriticalPlus,
        (None, Some("random")) => Family::Random,
        _ => Family::Complete,
    };
    Ok(match family {
        Family::Complete => complete(n, k)?,
        Family::Critical => critical_n(k, n)?.0,
        Family::CriticalPlus => critical_plus(k, n)?.0,
        Family::Random => {
            let p = args.p.ok_or_else(|| anyhow!("the random family needs --p"))?;
            random_hypergraph(n, k, p, &mut ctx.rng(stream))?
        }
    })
}

pub fn run(cli: Cli) -> Result<()> {
    let config = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    let defaults = SolveBudget::default();
    let ctx = Ctx {
        seed: cli.seed.or(config.seed).unwrap_or(DEFAULT_SEED),
        trials: cli.trials,
        budget: SolveBudget::new(
            cli.budget_nodes.or(config.budget_nodes).unwrap_or(defaults.max_nodes),
            cli.budget_ms.or(config.budget_ms).unwrap_or(defaults.max_millis),
        ),
        out: cli.out.clone().or_else(|| config.out.clone()),
        config,
    };
    if ctx.trials == Some(0) {
        bail!("--trials must be at least 1");
    }
    match &cli.command {
        Command::Gen(args) => {
            let h = host(args, &ctx, 0)?;
            write_hgr1(&h, ctx.sink()?)?;
        }
        Command::Sparsify { host: args, keep } => {
            let h = host(args, &ctx, 0)?;
            let sparse = sparsify(&h, *keep, &mut ctx.rng(1))?;
            write_hgr1(&sparse, ctx.sink()?)?;
        }
        Command::Solve(args) => solve(&host(args, &ctx, 0)?, &ctx)?,
        Command::Count { input, k, n } => count(input.as_deref(), *k, n, &ctx)?,
        Command::Vortex { host: args, levels } => {
            let h = host(args, &ctx, 0)?;
            let ell = levels.unwrap_or_else(|| vortex_levels(h.n(), h.k()));
            let vortex = vortex_with_levels(&h, ell, ctx.config.vortex, &mut ctx.rng(1))?;
            write_json(ctx.sink()?, &vortex)?;
        }
        Command::Pipeline { host: args, mode } => {
            let h = host(args, &ctx, 0)?;
            let mode = ctx.mode(mode.as_deref())?;
            let config = pipeline_config(&ctx);
            let run = sample_spread_pm(&h, mode, &config, &mut ctx.rng(1))?;
            write_json(ctx.sink()?, &run)?;
        }
        Command::Spread { host: args, mode, sampler, pairs } => {
            let h = host(args, &ctx, 0)?;
            spread(&h, ctx.mode(mode.as_deref())?, *sampler, *pairs, &ctx)?;
        }
        Command::Threshold { base, input, k, n, p, points, lo, hi } => {
            threshold(base.as_deref(), input.as_deref(), *k, n, p, (*points, *lo, *hi), &ctx)?
        }
    }
    Ok(())
}

fn pipeline_config(ctx: &Ctx) -> hypermatch::spreadpipe::PipelineConfig {
    let mut c = ctx.config.pipeline.clone();
    c.solver_budget = ctx.budget;
    c
}

/// Status, the matching when found, and the node count. Wall-clock time is
/// left out so identical runs print identical bytes.
fn solve(h: &Hypergraph, ctx: &Ctx) -> Result<()> {
    let outcome = optimal_matching(h, ctx.budget);
    let matching = match &outcome {
        SolveOutcome::Yes { matching, .. } => Some(matching),
        _ => None,
    };
    let report = json!({
        "k": h.k(),
        "n": h.n(),
        "status": outcome.status(),
        "matching": matching,
        "nodes": outcome.stats().nodes,
    });
    write_json(ctx.sink()?, &report)
}

fn count(input: Option<&Path>, k: Option<usize>, ns: &[usize], ctx: &Ctx) -> Result<()> {
    let hosts: Vec<Hypergraph> = match input.or(ctx.config.input.as_deref()) {
        Some(path) => vec![read_host(path)?],
        None => {
            let k = k.or(ctx.config.k).ok_or_else(|| anyhow!("need --k (or --input)"))?;
            let ns = if ns.is_empty() {
                ctx.config.n.as_ref().ok_or_else(|| anyhow!("need --n"))?.values()?
            } else {
                ns.to_vec()
            };
            ns.iter().map(|&n| complete(n, k)).collect::<Result<_, _>>()?
        }
    };
    let mut w = ctx.sink()?;
    writeln!(w, "{}", CountRow::CSV_HEADER)?;
    for h in &hosts {
        writeln!(w, "{}", count_row(h, ctx.budget)?.csv_line())?;
    }
    w.flush()?;
    Ok(())
}

fn spread(h: &Hypergraph, mode: Mode, kind: SamplerKind, pairs: usize, ctx: &Ctx) -> Result<()> {
    let trials = ctx.trials() as usize;
    let sampler: Box<dyn MatchingSampler> = match kind {
        SamplerKind::Pipeline => Box::new(PipelineSampler { mode, config: pipeline_config(ctx) }),
        SamplerKind::Uniform => Box::new(UniformPmSampler::new(h, UNIFORM_LIMIT, ctx.budget)?),
        SamplerKind::Fixed => match optimal_matching(h, ctx.budget) {
            SolveOutcome::Yes { matching, .. } => Box::new(FixedSampler(matching)),
            other => bail!("no matching to fix: solver says {}", other.status()),
        },
    };
    let report = spread_estimate(sampler.as_ref(), h, trials, pairs, &mut ctx.rng(1))?;
    write_json(ctx.sink()?, &report)?;
    if let Some(out) = &ctx.out {
        let csv = out.with_extension("csv");
        let mut w = BufWriter::new(File::create(&csv).with_context(|| format!("creating {}", csv.display()))?);
        report.write_csv(&mut w)?;
        w.flush()?;
    }
    Ok(())
}

fn threshold(
    base: Option<&str>,
    input: Option<&Path>,
    k: Option<usize>,
    ns: &[usize],
    ps: &[f64],
    geometric: (usize, f64, f64),
    ctx: &Ctx,
) -> Result<()> {
    let base = base.or(ctx.config.base.as_deref()).unwrap_or("complete");
    let hosts: Vec<Hypergraph> = if base == "file" {
        let path = input.or(ctx.config.input.as_deref()).ok_or_else(|| anyhow!("base=file needs --input"))?;
        vec![read_host(path)?]
    } else {
        let kind: BaseKind = base.parse()?;
        let k = k.or(ctx.config.k).ok_or_else(|| anyhow!("need --k"))?;
        let ns = if ns.is_empty() {
            ctx.config.n.as_ref().ok_or_else(|| anyhow!("need --n"))?.values()?
        } else {
            ns.to_vec()
        };
        ns.iter().map(|&n| base_hypergraph(kind, k, n)).collect::<Result<_, _>>()?
    };
    let grid_for = |h: &Hypergraph| -> Result<Vec<f64>> {
        if !ps.is_empty() {
            return Ok(ps.to_vec());
        }
        Ok(match &ctx.config.p_grid {
            Some(PGrid::List(v)) => v.clone(),
            Some(PGrid::Geometric { count, lo, hi }) => geometric_grid(h.k(), h.n(), *count, *lo, *hi),
            None => {
                let (points, lo, hi) = geometric;
                if points == 0 || !(lo > 0.0 && lo <= hi) {
                    bail!("geometric grid needs points >= 1 and 0 < lo <= hi");
                }
                geometric_grid(h.k(), h.n(), points, lo, hi)
            }
        })
    };
    let cells = hosts
        .into_iter()
        .map(|h| grid_for(&h).map(|g| (h, g)))
        .collect::<Result<Vec<_>>>()?;
    let rows = threshold_curve(&cells, ctx.trials(), ctx.budget, ctx.seed)?;
    let mut w = ctx.sink()?;
    writeln!(w, "{}", ThresholdRow::CSV_HEADER)?;
    for r in &rows {
        writeln!(w, "{}", r.csv_line())?;
    }
    w.flush()?;
    Ok(())
}
