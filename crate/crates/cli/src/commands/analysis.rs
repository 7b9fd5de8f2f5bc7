use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{anyhow, bail};
use tarsim::costmodel::{self, Axis};
use tarsim::stats;
use tarsim::{CostStructure, RunTrace, Strategy};

use crate::error::{data, usage, Classify, CliResult};
use crate::manifest::{Manifest, RunStatus};

fn load_trace(path: &Path) -> CliResult<RunTrace> {
    RunTrace::load(path).data_ctx(format!("reading trace {}", path.display()))
}

fn check_target(g: f64) -> CliResult {
    if g > 0.0 && g <= 1.0 {
        Ok(())
    } else {
        Err(usage(anyhow!("recall target must lie in (0, 1], got {g}")))
    }
}

/// Writes the cost dynamics CSV and returns `(optimal_t, min_cost)`.
pub fn cmd_dynamics(
    trace_path: &Path,
    structure: &str,
    target: Option<f64>,
    out: Option<&Path>,
) -> CliResult<(usize, f64)> {
    let structure: CostStructure = structure.parse().usage_ctx(format!("structure `{structure}`"))?;
    let trace = load_trace(trace_path)?;
    let g = target.unwrap_or(trace.config.recall_target);
    check_target(g)?;
    let dynamics = costmodel::dynamics(&trace, &structure, g).map_err(data)?;
    let (t, cost) = costmodel::optimal_stop(&dynamics).map_err(data)?;

    let mut w = super::output(out)?;
    dynamics.write_csv(&mut w).data_ctx("writing cost dynamics")?;
    w.flush().data_ctx("writing cost dynamics")?;
    drop(w);
    let summary = format!("optimal_t={t} min_cost={cost}");
    if out.is_some() {
        println!("{summary}");
    } else {
        eprintln!("{summary}");
    }
    Ok((t, cost))
}

/// Parses `0,1,5` or `start:stop:step` (inclusive of `stop`).
pub fn parse_x_grid(s: &str) -> anyhow::Result<Vec<f64>> {
    let num = |v: &str| v.trim().parse::<f64>().map_err(|_| anyhow!("`{}` is not a number", v.trim()));
    let xs = if let [a, b, step] = s.split(':').collect::<Vec<_>>()[..] {
        let (a, b, step) = (num(a)?, num(b)?, num(step)?);
        if !(step > 0.0) || !(b >= a) {
            bail!("range `{s}` needs start <= stop and step > 0");
        }
        let n = ((b - a) / step + 1e-9).floor() as usize;
        (0..=n).map(|i| a + i as f64 * step).collect()
    } else {
        s.split(',').map(num).collect::<anyhow::Result<Vec<_>>>()?
    };
    if xs.is_empty() {
        bail!("empty x grid");
    }
    if let Some(x) = xs.iter().find(|x| !(**x >= 0.0)) {
        bail!("x grid values must be >= 0, got {x}");
    }
    Ok(xs)
}

#[derive(Debug, Clone, PartialEq)]
pub struct StoppingRow {
    pub x: f64,
    pub structure: CostStructure,
    pub traces: usize,
    pub mean_optimal_t: f64,
    pub mean_optimal_t_within_quota: f64,
    pub mean_acceptable_count: f64,
    pub truncated: usize,
}

pub struct StoppingArgs<'a> {
    pub pattern: &'a str,
    pub family: &'a str,
    pub x_grid: &'a str,
    pub tolerance: f64,
    pub target: Option<f64>,
    pub out: Option<&'a Path>,
}

/// Mean stopping statistics over all traces matching a glob, one row per x.
pub fn cmd_stopping(args: StoppingArgs<'_>) -> CliResult<Vec<StoppingRow>> {
    let axis: Axis = args.family.parse().usage_ctx(format!("family `{}`", args.family))?;
    let xs = parse_x_grid(args.x_grid).map_err(usage)?;
    if !(args.tolerance >= 0.0) {
        return Err(usage(anyhow!("tolerance must be >= 0, got {}", args.tolerance)));
    }
    if let Some(g) = args.target {
        check_target(g)?;
    }
    let paths: Vec<PathBuf> = glob::glob(args.pattern)
        .usage_ctx(format!("pattern `{}`", args.pattern))?
        .collect::<Result<_, _>>()
        .map_err(data)?;
    if paths.is_empty() {
        return Err(data(anyhow!("no traces match `{}`", args.pattern)));
    }
    let traces = paths.iter().map(|p| load_trace(p)).collect::<CliResult<Vec<_>>>()?;

    let mut rows = Vec::with_capacity(xs.len());
    for &x in &xs {
        let structure = axis.at(x).map_err(usage)?;
        let (mut opt, mut opt_q, mut count, mut truncated) = (0.0, 0.0, 0.0, 0);
        for (trace, path) in traces.iter().zip(&paths) {
            let g = args.target.unwrap_or(trace.config.recall_target);
            let ctx = || format!("analysing {}", path.display());
            let dynamics = costmodel::dynamics(trace, &structure, g).data_ctx(ctx())?;
            let analysis = costmodel::acceptable_range(&dynamics, args.tolerance).data_ctx(ctx())?;
            let (t_q, _) = costmodel::optimal_stop_within_quota(&dynamics).data_ctx(ctx())?;
            opt += analysis.optimal_t as f64;
            opt_q += t_q as f64;
            count += analysis.acceptable_count as f64;
            truncated += usize::from(analysis.truncated);
        }
        let n = traces.len() as f64;
        rows.push(StoppingRow {
            x,
            structure,
            traces: traces.len(),
            mean_optimal_t: opt / n,
            mean_optimal_t_within_quota: opt_q / n,
            mean_acceptable_count: count / n,
            truncated,
        });
    }

    let mut w = csv::Writer::from_writer(super::output(args.out)?);
    let ctx = "writing stopping table";
    w.write_record([
        "x",
        "structure",
        "traces",
        "mean_optimal_t",
        "mean_optimal_t_within_quota",
        "mean_acceptable_count",
        "truncated",
    ])
    .data_ctx(ctx)?;
    for r in &rows {
        w.write_record([
            r.x.to_string(),
            r.structure.to_string(),
            r.traces.to_string(),
            r.mean_optimal_t.to_string(),
            r.mean_optimal_t_within_quota.to_string(),
            r.mean_acceptable_count.to_string(),
            r.truncated.to_string(),
        ])
        .data_ctx(ctx)?;
    }
    w.flush().data_ctx(ctx)?;
    let truncated: usize = rows.iter().map(|r| r.truncated).sum();
    if truncated > 0 {
        eprintln!(
            "warning: {truncated} analyses are truncated (last iteration still within tolerance); \
             extend the runs for a complete acceptable range"
        );
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    One,
    Two,
}

/// A workflow label such as `2p-unc`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Workflow {
    pub phase: Phase,
    pub strategy: Strategy,
}

impl FromStr for Workflow {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> anyhow::Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        let (phase, strategy) = s
            .split_once('-')
            .ok_or_else(|| anyhow!("workflow `{s}` must look like `1p-rel` or `2p-unc`"))?;
        let phase = match phase {
            "1p" => Phase::One,
            "2p" => Phase::Two,
            _ => bail!("workflow `{s}`: phase must be `1p` or `2p`"),
        };
        Ok(Workflow { phase, strategy: strategy.parse()? })
    }
}

impl fmt::Display for Workflow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = match self.phase {
            Phase::One => "1p",
            Phase::Two => "2p",
        };
        write!(f, "{p}-{}", self.strategy.short())
    }
}

impl Workflow {
    pub fn cost(&self, trace: &RunTrace, s: &CostStructure, g: f64) -> tarsim::Result<f64> {
        match self.phase {
            Phase::One => costmodel::one_phase_cost(trace, s, g),
            Phase::Two => costmodel::two_phase_cost(trace, s, g),
        }
    }
}

/// `A:B` pairs, comma separated.
pub fn parse_pairs(specs: &[String]) -> anyhow::Result<Vec<(Workflow, Workflow)>> {
    let mut out = Vec::new();
    for spec in specs {
        for item in spec.split(',').filter(|s| !s.trim().is_empty()) {
            let (a, b) = item
                .split_once(':')
                .ok_or_else(|| anyhow!("pair `{item}` must look like `2p-unc:1p-rel`"))?;
            out.push((a.parse()?, b.parse()?));
        }
    }
    if out.is_empty() {
        bail!("no workflow pairs given");
    }
    Ok(out)
}

pub const DEFAULT_PAIRS: &str = "2p-unc:1p-rel,2p-rel:1p-rel,1p-rel:1p-unc";

#[derive(Debug, Clone, PartialEq)]
pub struct CompareCell {
    pub a: Workflow,
    pub b: Workflow,
    pub structure: CostStructure,
    pub result: stats::ComparisonResult,
}

pub struct CompareArgs<'a> {
    pub manifest: &'a Path,
    pub pairs: &'a [String],
    pub structures: &'a [String],
    pub correction_m: Option<usize>,
    pub level: f64,
    pub target: Option<f64>,
    pub out: Option<&'a Path>,
    pub details: Option<&'a Path>,
}

type Task = (String, u64);

/// Mean relative cost reduction of A over B for every pair and structure,
/// with K-S significance markers after Bonferroni correction.
pub fn cmd_compare(args: CompareArgs<'_>) -> CliResult<Vec<CompareCell>> {
    let pair_specs: Vec<String> = if args.pairs.is_empty() {
        vec![DEFAULT_PAIRS.to_string()]
    } else {
        args.pairs.to_vec()
    };
    let pairs = parse_pairs(&pair_specs).map_err(usage)?;
    if !(args.level > 0.0 && args.level < 1.0) {
        return Err(usage(anyhow!("significance level must lie in (0, 1), got {}", args.level)));
    }
    let manifest = Manifest::load(args.manifest)?;
    let structures: Vec<CostStructure> = if !args.structures.is_empty() {
        args.structures
            .iter()
            .map(|s| s.parse().usage_ctx(format!("structure `{s}`")))
            .collect::<CliResult<_>>()?
    } else if !manifest.structures.is_empty() {
        manifest.structures.clone()
    } else {
        CostStructure::reference_set().to_vec()
    };
    let g = args.target.unwrap_or(manifest.recall_target);
    check_target(g)?;
    let correction_m = args.correction_m.unwrap_or(pairs.len() * structures.len());
    let dir = args.manifest.parent().unwrap_or(Path::new(""));

    let mut ok: BTreeMap<(Strategy, Task), PathBuf> = BTreeMap::new();
    let mut tasks: BTreeSet<Task> = BTreeSet::new();
    for r in &manifest.runs {
        tasks.insert((r.category.clone(), r.seed));
        if r.status == RunStatus::Ok {
            if let Some(p) = r.trace_path(dir) {
                ok.insert((r.strategy, (r.category.clone(), r.seed)), p);
            }
        }
    }

    let mut missing = BTreeSet::new();
    for (a, b) in &pairs {
        for task in &tasks {
            for s in [a.strategy, b.strategy] {
                if !ok.contains_key(&(s, task.clone())) {
                    missing.insert(format!("{} seed {} ({})", task.0, task.1, s));
                }
            }
        }
    }
    if !missing.is_empty() {
        let list: Vec<_> = missing.into_iter().collect();
        return Err(data(anyhow!("unpaired tasks, missing traces for: {}", list.join("; "))));
    }
    if tasks.is_empty() {
        return Err(data(anyhow!("manifest lists no runs")));
    }

    let mut traces: BTreeMap<(Strategy, Task), RunTrace> = BTreeMap::new();
    for (key, path) in &ok {
        if pairs.iter().any(|(a, b)| key.0 == a.strategy || key.0 == b.strategy) {
            traces.insert(key.clone(), load_trace(path)?);
        }
    }

    let mut cells = Vec::new();
    for (a, b) in &pairs {
        for s in &structures {
            let costs = |w: &Workflow| -> CliResult<Vec<f64>> {
                tasks
                    .iter()
                    .map(|task| {
                        let trace = &traces[&(w.strategy, task.clone())];
                        w.cost(trace, s, g).data_ctx(format!("{w} on {} seed {}", task.0, task.1))
                    })
                    .collect()
            };
            let (ca, cb) = (costs(a)?, costs(b)?);
            let result = stats::compare_workflows(&ca, &cb, correction_m, args.level).map_err(data)?;
            cells.push(CompareCell { a: *a, b: *b, structure: *s, result });
        }
    }

    write_table(&cells, &pairs, &structures, args.out)?;
    if let Some(path) = args.details {
        write_details(&cells, path)?;
    }
    Ok(cells)
}

fn write_table(
    cells: &[CompareCell],
    pairs: &[(Workflow, Workflow)],
    structures: &[CostStructure],
    out: Option<&Path>,
) -> CliResult {
    let ctx = "writing comparison table";
    let mut w = csv::Writer::from_writer(super::output(out)?);
    let mut header = vec!["comparison".to_string()];
    header.extend(structures.iter().map(|s| s.to_string()));
    w.write_record(&header).data_ctx(ctx)?;
    for (row, (a, b)) in cells.chunks(structures.len()).zip(pairs) {
        let mut record = vec![format!("{a} vs {b}")];
        record.extend(row.iter().map(|c| {
            let mark = if c.result.is_significant() { "*" } else { "" };
            format!("{:.4}{mark}", c.result.mean_reduction)
        }));
        w.write_record(&record).data_ctx(ctx)?;
    }
    w.flush().data_ctx(ctx)?;
    Ok(())
}

fn write_details(cells: &[CompareCell], path: &Path) -> CliResult {
    let ctx = format!("writing {}", path.display());
    let mut w = csv::Writer::from_writer(super::output(Some(path))?);
    w.write_record([
        "a",
        "b",
        "structure",
        "tasks",
        "mean_reduction",
        "ks_statistic",
        "p_value",
        "corrected_p",
        "significant",
    ])
    .data_ctx(&ctx)?;
    for c in cells {
        let r = &c.result;
        w.write_record([
            c.a.to_string(),
            c.b.to_string(),
            c.structure.to_string(),
            r.reductions.len().to_string(),
            r.mean_reduction.to_string(),
            r.ks_statistic.to_string(),
            r.p_value.to_string(),
            r.corrected_p.to_string(),
            r.is_significant().to_string(),
        ])
        .data_ctx(&ctx)?;
    }
    w.flush().data_ctx(&ctx)?;
    Ok(())
}
