#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tarsim::simulator::{recall_quota, ReviewedDoc};
use tarsim::{IterationRecord, RunConfig, RunTrace, Strategy};

/// A structurally valid trace over `n` documents with `r` positives. Each
/// iteration ranks the unreviewed documents by a noisy score that favours
/// positives by `bias` and reviews the top `b`.
pub fn random_trace(seed: u64, n: usize, r: usize, b: usize, bias: f64, extension: usize) -> RunTrace {
    assert!(r >= 1 && r <= n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut labels = vec![false; n];
    labels[..r].iter_mut().for_each(|l| *l = true);
    labels.shuffle(&mut rng);

    let mut config = RunConfig::new("synthetic", Strategy::RelevanceFeedback, seed);
    config.batch_size = b;
    config.extension_batches = extension;
    let quota = recall_quota(r, config.recall_target);

    let mut reviewed = vec![false; n];
    let mut batch = vec![labels.iter().position(|&l| l).unwrap()];
    let (mut cum_pos, mut cum_reviewed) = (0, 0);
    let mut reached = None;
    let mut records = Vec::new();
    for t in 0.. {
        for &d in &batch {
            reviewed[d] = true;
            cum_pos += usize::from(labels[d]);
        }
        cum_reviewed += batch.len();
        let mut pool: Vec<(f64, usize)> = (0..n)
            .filter(|&d| !reviewed[d])
            .map(|d| (rng.random::<f64>() + if labels[d] { bias } else { 0.0 }, d))
            .collect();
        pool.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        let gain_positions = pool.iter().enumerate().filter(|(_, (_, d))| labels[*d]).map(|(i, _)| i + 1).collect();
        records.push(IterationRecord {
            t,
            batch: batch.iter().map(|&d| ReviewedDoc { id: format!("d{d}"), positive: labels[d] }).collect(),
            cum_pos,
            cum_reviewed,
            gain_positions,
        });
        if reached.is_none() && cum_pos >= quota {
            reached = Some(t);
        }
        if matches!(reached, Some(s) if t - s >= extension) || pool.is_empty() {
            break;
        }
        batch = pool.iter().take(b).map(|&(_, d)| d).collect();
    }
    RunTrace { config, category_total_positives: r, collection_size: n, records }
}
