use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use anyhow::anyhow;
use rayon::prelude::*;
use tarsim::{RunConfig, Simulator, Strategy};

use crate::config::ExperimentConfig;
use crate::error::{data, usage, Classify, CliError, CliResult};
use crate::manifest::{sanitize, Manifest, RunEntry, RunStatus};

struct Job {
    category: String,
    strategy: Strategy,
    seed: u64,
    rel_path: String,
}

/// Runs every (category, strategy, seed) combination and writes the traces
/// plus `manifest.json`. Failed runs are recorded and do not stop the grid.
pub fn cmd_run(config_path: &Path, jobs: Option<usize>) -> CliResult<Manifest> {
    let cfg = ExperimentConfig::load(config_path)?;
    let structures = cfg.structures().map_err(usage)?;

    let mut corpus = super::load_corpus(&cfg.corpus)?;
    if let Some(sub) = &cfg.subsample {
        corpus = corpus.subsample(sub.fraction, sub.seed).map_err(usage)?;
    }
    let sim = Simulator::new(&corpus, cfg.bm25(), cfg.train_config()).map_err(usage)?;
    fs::create_dir_all(&cfg.output_dir).data_ctx(format!("creating {}", cfg.output_dir.display()))?;

    let categories = select_categories(&cfg, &sim)?;
    let mut dirs: BTreeMap<String, &str> = BTreeMap::new();
    for name in &categories {
        if let Some(other) = dirs.insert(sanitize(name), name) {
            return Err(usage(anyhow!(
                "categories `{other}` and `{name}` map to the same output directory"
            )));
        }
    }

    let mut grid = Vec::new();
    for category in &categories {
        for &strategy in &cfg.strategies {
            for seed in cfg.seed_range() {
                let rel_path = format!("{}/{}/seed{seed}.json", sanitize(category), strategy.as_str());
                grid.push(Job { category: category.clone(), strategy, seed, rel_path });
            }
        }
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(cfg.jobs))
        .build()
        .map_err(usage)?;
    let runs: Vec<RunEntry> = pool.install(|| {
        grid.par_iter()
            .map(|job| {
                let result = run_one(&sim, &cfg, job);
                RunEntry {
                    category: job.category.clone(),
                    strategy: job.strategy,
                    seed: job.seed,
                    trace: result.is_ok().then(|| job.rel_path.clone()),
                    status: if result.is_ok() { RunStatus::Ok } else { RunStatus::Error },
                    error: result.err().map(|e| format!("{e:#}")),
                }
            })
            .collect()
    });

    let manifest = Manifest {
        recall_target: cfg.recall_target,
        batch_size: cfg.batch_size,
        extension_batches: cfg.extension_batches,
        structures,
        runs,
    };
    let path = cfg.output_dir.join("manifest.json");
    let text = serde_json::to_string_pretty(&manifest).map_err(data)?;
    fs::write(&path, text + "\n").data_ctx(format!("writing {}", path.display()))?;

    let failed = manifest.failures().count();
    println!("runs={} failed={failed} manifest={}", manifest.runs.len(), path.display());
    if failed > 0 {
        for r in manifest.failures() {
            eprintln!(
                "run {} / {} / seed {} failed: {}",
                r.category,
                r.strategy,
                r.seed,
                r.error.as_deref().unwrap_or("")
            );
        }
        return Err(CliError::Partial(format!("{failed} of {} runs failed", manifest.runs.len())));
    }
    Ok(manifest)
}

fn run_one(sim: &Simulator<'_>, cfg: &ExperimentConfig, job: &Job) -> anyhow::Result<()> {
    let config = RunConfig {
        category: job.category.clone(),
        rng_seed: job.seed,
        batch_size: cfg.batch_size,
        recall_target: cfg.recall_target,
        strategy: job.strategy,
        extension_batches: cfg.extension_batches,
    };
    let trace = sim.run(&config)?;
    let path = cfg.output_dir.join(&job.rel_path);
    fs::create_dir_all(path.parent().expect("trace paths have a parent"))?;
    fs::write(&path, trace.to_json()?)?;
    Ok(())
}

fn select_categories(cfg: &ExperimentConfig, sim: &Simulator<'_>) -> CliResult<Vec<String>> {
    let sel = &cfg.categories;
    let corpus = sim.corpus();
    if let Some(names) = &sel.names {
        return Ok(names.clone());
    }
    let Some(per_bin) = sel.sample_per_bin else {
        return Ok(corpus.categories().keys().cloned().collect());
    };
    let (assignments, failed) =
        super::bins::assign_all(corpus, sim.vectors(), sel.split_seed, sel.train_fraction, sim.train_config());
    for (name, why) in &failed {
        eprintln!("skipped category {name}: {why}");
    }
    let path = cfg.output_dir.join("bins.csv");
    let file = fs::File::create(&path).data_ctx(format!("creating {}", path.display()))?;
    super::bins::write_csv(&assignments, file).data_ctx(format!("writing {}", path.display()))?;
    Ok(super::bins::sample_per_bin(&assignments, per_bin, sel.sampling_seed))
}
