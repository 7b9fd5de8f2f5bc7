use std::io::Write;
use std::path::Path;

use tarsim::synth::{self, SynthSpec};

use crate::error::{usage, Classify, CliResult};

pub fn ingest(input: &Path, cache: &Path) -> CliResult {
    let corpus = tarsim::corpus::ingest_jsonl(input).data_ctx(format!("ingesting {}", input.display()))?;
    if let Some(dir) = cache.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).data_ctx(format!("creating {}", dir.display()))?;
    }
    corpus.save_cache(cache).data_ctx(format!("writing {}", cache.display()))?;
    println!(
        "documents={} vocabulary={} categories={}",
        corpus.len(),
        corpus.vocabulary().len(),
        corpus.categories().len()
    );
    Ok(())
}

pub struct SynthArgs<'a> {
    pub out: &'a Path,
    pub seed: u64,
    pub docs: Option<usize>,
    pub prevalence: Option<f64>,
    pub signal: Option<f64>,
}

/// Writes a synthetic single-category corpus as JSONL.
pub fn synth(args: SynthArgs<'_>) -> CliResult {
    let mut spec = SynthSpec::separable(args.seed);
    if let Some(n) = args.docs {
        spec.n_docs = n;
    }
    if let Some(p) = args.prevalence {
        spec.categories[0].prevalence = p;
    }
    if let Some(s) = args.signal {
        spec.categories[0].signal_mean = s;
    }
    let corpus = synth::generate(&spec).map_err(usage)?;
    let mut out = super::output(Some(args.out))?;
    corpus.write_jsonl(&mut out).data_ctx(format!("writing {}", args.out.display()))?;
    out.flush().data_ctx(format!("writing {}", args.out.display()))?;
    println!(
        "documents={} positives={}",
        corpus.len(),
        corpus.positives("target").map_or(0, |p| p.len())
    );
    Ok(())
}
