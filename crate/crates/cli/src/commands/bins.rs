use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tarsim::stats::{self, DifficultyBin, PrevalenceBin};
use tarsim::{BinAssignment, Corpus, FeatureVector, TrainConfig};

use crate::error::{Classify, CliResult};

/// Bins every category; the second list holds categories that could not be
/// scored, with the reason.
pub fn assign_all(
    corpus: &Corpus,
    vectors: &[FeatureVector],
    split_seed: u64,
    train_fraction: f64,
    train: &TrainConfig,
) -> (Vec<BinAssignment>, Vec<(String, String)>) {
    let mut ok = Vec::new();
    let mut failed = Vec::new();
    for name in corpus.categories().keys() {
        match stats::assign_bins_with(corpus, vectors, name, split_seed, train_fraction, train) {
            Ok(a) => ok.push(a),
            Err(e) => failed.push((name.clone(), e.to_string())),
        }
    }
    (ok, failed)
}

pub fn write_csv(assignments: &[BinAssignment], out: impl Write) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["category", "positives", "prevalence_bin", "difficulty_bin", "r_precision"])?;
    for a in assignments {
        w.write_record([
            a.category.clone(),
            a.positives.to_string(),
            a.prevalence_bin.to_string(),
            a.difficulty_bin.to_string(),
            a.r_precision.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Draws up to `per_bin` categories from each inner bin (both extreme
/// prevalence bins are skipped). Bins are visited in a fixed order with one
/// seeded generator, so the choice depends only on the assignments and seed.
pub fn sample_per_bin(assignments: &[BinAssignment], per_bin: usize, seed: u64) -> Vec<String> {
    let mut groups: BTreeMap<(PrevalenceBin, DifficultyBin), Vec<&str>> = BTreeMap::new();
    for a in assignments {
        if matches!(a.prevalence_bin, PrevalenceBin::TooRare | PrevalenceBin::TooCommon) {
            continue;
        }
        groups.entry((a.prevalence_bin, a.difficulty_bin)).or_default().push(&a.category);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen = Vec::new();
    for mut names in groups.into_values() {
        names.sort_unstable();
        let k = per_bin.min(names.len());
        let mut picks: Vec<usize> = rand::seq::index::sample(&mut rng, names.len(), k).into_vec();
        picks.sort_unstable();
        chosen.extend(picks.into_iter().map(|i| names[i].to_string()));
    }
    chosen.sort();
    chosen
}

pub fn cmd_bins(
    corpus_path: &Path,
    split_seed: u64,
    train_fraction: f64,
    out: Option<&Path>,
) -> CliResult {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(crate::error::usage(anyhow::anyhow!(
            "train fraction must lie in (0, 1), got {train_fraction}"
        )));
    }
    let corpus = super::load_corpus(corpus_path)?;
    let vectors = corpus.vectorize_all(Default::default());
    let (assignments, failed) = assign_all(&corpus, &vectors, split_seed, train_fraction, &TrainConfig::default());
    for (name, why) in &failed {
        eprintln!("skipped category {name}: {why}");
    }

    let target = out.map_or_else(|| "stdout".into(), |p| p.display().to_string());
    let mut w = super::output(out)?;
    write_csv(&assignments, &mut w).data_ctx(format!("writing {target}"))?;
    drop(w);

    let mut counts: BTreeMap<(PrevalenceBin, DifficultyBin), usize> = BTreeMap::new();
    for a in &assignments {
        *counts.entry((a.prevalence_bin, a.difficulty_bin)).or_default() += 1;
    }
    let summary = if out.is_some() { println_out } else { eprintln_out };
    for ((p, d), n) in counts {
        summary(format!("{p}/{d}: {n}"));
    }
    summary(format!("binned={} skipped={}", assignments.len(), failed.len()));
    Ok(())
}

fn println_out(s: String) {
    println!("{s}");
}

fn eprintln_out(s: String) {
    eprintln!("{s}");
}
