//! Batch-mode active-learning runs.
//!
//! A run starts from one randomly chosen positive seed (iteration 0). After
//! each batch the full labeled set trains a fresh model, the unreviewed pool is
//! ranked, and the ranks of the remaining positives are stored as the gain
//! curve of that iteration. The gain curve is what lets the cost model compute
//! the phase-two review depth `rho` for any quota after the fact.
//!
//! While the labeled set holds positives only (always the case at iteration
//! 0), ranking falls back to similarity with the summed positive feature
//! vectors, and the next batch is the top of that ranking for either strategy.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::classifier::{self, TrainConfig};
use crate::corpus::{Bm25Params, Corpus, FeatureVector};
use crate::error::{Error, Result};
use crate::strategies::{self, ScoredPool, Strategy};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub category: String,
    pub rng_seed: u64,
    pub batch_size: usize,
    pub recall_target: f64,
    pub strategy: Strategy,
    /// Iterations to keep running after the recall target is first met.
    pub extension_batches: usize,
}

impl RunConfig {
    pub fn new(category: impl Into<String>, strategy: Strategy, rng_seed: u64) -> Self {
        RunConfig {
            category: category.into(),
            rng_seed,
            batch_size: 200,
            recall_target: 0.8,
            strategy,
            extension_batches: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::domain("batch size must be at least 1"));
        }
        if !(self.recall_target > 0.0 && self.recall_target <= 1.0) {
            return Err(Error::domain(format!(
                "recall target must lie in (0, 1], got {}",
                self.recall_target
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReviewedDoc {
    pub id: String,
    pub positive: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub t: usize,
    pub batch: Vec<ReviewedDoc>,
    /// `Q_t`: positives reviewed so far.
    pub cum_pos: usize,
    /// `N_t`: documents reviewed so far.
    pub cum_reviewed: usize,
    /// 1-based ranks of the unreviewed positives under this iteration's model.
    pub gain_positions: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunTrace {
    pub config: RunConfig,
    pub category_total_positives: usize,
    pub collection_size: usize,
    pub records: Vec<IterationRecord>,
}

impl RunTrace {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        RunTrace::from_json(&std::fs::read_to_string(path)?)
    }

    /// `ceil(g R)` for the given recall target.
    pub fn quota(&self, recall_target: f64) -> usize {
        recall_quota(self.category_total_positives, recall_target)
    }

    pub fn last(&self) -> Option<&IterationRecord> {
        self.records.last()
    }
}

/// `Q = ceil(g R)`, with products within 1e-9 of an integer snapped to it so
/// that e.g. `0.8 * 5` gives 4 rather than 5.
pub fn recall_quota(total_positives: usize, recall_target: f64) -> usize {
    let x = recall_target * total_positives as f64;
    let nearest = x.round();
    if (x - nearest).abs() <= 1e-9 * x.abs().max(1.0) {
        nearest as usize
    } else {
        x.ceil() as usize
    }
}

/// Phase-two review depth needed to reach `q` positives after `record`'s iteration.
pub fn rho(record: &IterationRecord, q: usize) -> Result<usize> {
    if record.cum_pos >= q {
        return Ok(0);
    }
    let need = q - record.cum_pos;
    record.gain_positions.get(need - 1).copied().ok_or_else(|| {
        Error::domain(format!(
            "need {need} more positives but only {} remain unreviewed",
            record.gain_positions.len()
        ))
    })
}

/// First iteration at which `Q_t >= q`.
pub fn one_phase_stop(trace: &RunTrace, q: usize) -> Result<usize> {
    trace
        .records
        .iter()
        .position(|r| r.cum_pos >= q)
        .ok_or_else(|| Error::Analysis(format!("trace never reaches {q} positives")))
}

/// Precomputed features for one corpus; runs borrow it and may execute concurrently.
pub struct Simulator<'c> {
    corpus: &'c Corpus,
    vectors: Vec<FeatureVector>,
    /// Position of each document in ascending id order.
    id_rank: Vec<usize>,
    doc_by_rank: Vec<usize>,
    train: TrainConfig,
}

impl<'c> Simulator<'c> {
    pub fn new(corpus: &'c Corpus, features: Bm25Params, train: TrainConfig) -> Result<Self> {
        features.validate()?;
        train.validate()?;
        let vectors = corpus.vectorize_all(features);
        let docs = corpus.documents();
        let mut order: Vec<usize> = (0..docs.len()).collect();
        order.sort_by(|&a, &b| docs[a].id.cmp(&docs[b].id));
        let mut id_rank = vec![0; docs.len()];
        for (rank, &doc) in order.iter().enumerate() {
            id_rank[doc] = rank;
        }
        Ok(Simulator {
            corpus,
            vectors,
            id_rank,
            doc_by_rank: order,
            train,
        })
    }

    pub fn corpus(&self) -> &Corpus {
        self.corpus
    }

    pub fn vectors(&self) -> &[FeatureVector] {
        &self.vectors
    }

    pub fn train_config(&self) -> &TrainConfig {
        &self.train
    }

    pub fn run(&self, config: &RunConfig) -> Result<RunTrace> {
        config.validate()?;
        let corpus = self.corpus;
        let positives = corpus
            .positives(&config.category)
            .ok_or_else(|| Error::Task(format!("unknown category `{}`", config.category)))?;
        if positives.is_empty() {
            return Err(Error::Task(format!("category `{}` has no positives", config.category)));
        }
        let labels = corpus.label_mask(&config.category).expect("category exists");
        let total_pos = positives.len();
        let quota = recall_quota(total_pos, config.recall_target);
        let n = corpus.len();
        let dim = corpus.vocabulary().len();

        let seed_id = strategies::select_seed(positives, config.rng_seed)?;
        let mut batch = vec![corpus.doc_index(&seed_id).expect("positive ids exist")];

        let mut reviewed = vec![false; n];
        let mut labeled: Vec<usize> = Vec::new();
        let mut profile = vec![0.0; dim];
        let (mut cum_pos, mut cum_reviewed) = (0, 0);
        let mut reached_at: Option<usize> = None;
        let mut records = Vec::new();

        for t in 0.. {
            for &d in &batch {
                reviewed[d] = true;
                labeled.push(d);
                if labels[d] {
                    cum_pos += 1;
                    self.vectors[d].add_to_dense(&mut profile, 1.0);
                }
            }
            cum_reviewed += batch.len();

            let one_class = cum_pos == labeled.len();
            let scores: Vec<(usize, f64)> = if one_class {
                (0..n)
                    .filter(|&d| !reviewed[d])
                    .map(|d| (d, self.vectors[d].dot_dense(&profile)))
                    .collect()
            } else {
                let examples: Vec<_> = labeled.iter().map(|&d| (&self.vectors[d], labels[d])).collect();
                let model = classifier::train(&examples, dim, &self.train)?;
                (0..n)
                    .filter(|&d| !reviewed[d])
                    .map(|d| (d, self.vectors[d].dot_dense(&model.weights) + model.bias))
                    .collect()
            };

            let mut ranked: Vec<&(usize, f64)> = scores.iter().collect();
            ranked.sort_unstable_by(|a, b| self.rank_cmp(a, b));
            let gain_positions: Vec<usize> = ranked
                .iter()
                .enumerate()
                .filter(|(_, (d, _))| labels[*d])
                .map(|(i, _)| i + 1)
                .collect();
            debug_assert_eq!(gain_positions.len(), total_pos - cum_pos);

            records.push(IterationRecord {
                t,
                batch: batch
                    .iter()
                    .map(|&d| ReviewedDoc {
                        id: corpus.documents()[d].id.clone(),
                        positive: labels[d],
                    })
                    .collect(),
                cum_pos,
                cum_reviewed,
                gain_positions,
            });

            if reached_at.is_none() && cum_pos >= quota {
                reached_at = Some(t);
            }
            if matches!(reached_at, Some(r) if t - r >= config.extension_batches) || scores.is_empty() {
                break;
            }

            let pool = ScoredPool::new(scores.iter().map(|&(d, s)| (self.id_rank[d], s)).collect());
            let keys = match (one_class, config.strategy) {
                (true, _) | (false, Strategy::RelevanceFeedback) => {
                    strategies::relevance_feedback_batch(&pool, config.batch_size)
                }
                (false, Strategy::Uncertainty) => {
                    strategies::uncertainty_batch_around(&pool, config.batch_size, 0.0)
                }
            };
            batch = keys.into_iter().map(|k| self.doc_by_rank[k]).collect();
        }

        Ok(RunTrace {
            config: config.clone(),
            category_total_positives: total_pos,
            collection_size: n,
            records,
        })
    }

    fn rank_cmp(&self, a: &(usize, f64), b: &(usize, f64)) -> Ordering {
        b.1.total_cmp(&a.1).then_with(|| self.id_rank[a.0].cmp(&self.id_rank[b.0]))
    }
}

/// Runs with default BM25 and training parameters.
pub fn run(corpus: &Corpus, config: &RunConfig) -> Result<RunTrace> {
    Simulator::new(corpus, Bm25Params::default(), TrainConfig::default())?.run(config)
}
