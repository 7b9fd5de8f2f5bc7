//! Batch selection policies.
//!
//! Pools are keyed by any `Ord` type; ties are always broken by ascending key.
//! With string document ids that is the doc-id tie-break, and the simulator
//! uses each document's position in id order as an equivalent integer key.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    RelevanceFeedback,
    Uncertainty,
}

impl Strategy {
    pub const ALL: [Strategy; 2] = [Strategy::RelevanceFeedback, Strategy::Uncertainty];

    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::RelevanceFeedback => "relevance_feedback",
            Strategy::Uncertainty => "uncertainty",
        }
    }

    /// Short form used in workflow labels such as `2p-unc`.
    pub fn short(self) -> &'static str {
        match self {
            Strategy::RelevanceFeedback => "rel",
            Strategy::Uncertainty => "unc",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "relevance_feedback" | "relevance-feedback" | "rel" => Ok(Strategy::RelevanceFeedback),
            "uncertainty" | "uncertainty_sampling" | "unc" => Ok(Strategy::Uncertainty),
            other => Err(Error::domain(format!("unknown strategy `{other}`"))),
        }
    }
}

/// Scores for every currently unreviewed document.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredPool<K = String> {
    pub entries: Vec<(K, f64)>,
}

impl<K> ScoredPool<K> {
    pub fn new(entries: Vec<(K, f64)>) -> Self {
        ScoredPool { entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Uniform draw from `positives`, deterministic in `rng_seed`.
pub fn select_seed(positives: &BTreeSet<String>, rng_seed: u64) -> Result<String> {
    if positives.is_empty() {
        return Err(Error::Task("cannot pick a seed from an empty positive set".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let pick = rng.random_range(0..positives.len());
    Ok(positives.iter().nth(pick).cloned().expect("index within bounds"))
}

/// Top `b` by score, ordered by (score desc, key asc).
pub fn relevance_feedback_batch<K: Ord + Clone>(pool: &ScoredPool<K>, b: usize) -> Vec<K> {
    top_k(&pool.entries, b, |(ka, sa), (kb, sb)| sb.total_cmp(sa).then_with(|| ka.cmp(kb)))
}

/// The `b` entries closest to the 0.5 decision threshold, ordered by
/// (|score - 0.5| asc, key asc).
pub fn uncertainty_batch<K: Ord + Clone>(pool: &ScoredPool<K>, b: usize) -> Vec<K> {
    uncertainty_batch_around(pool, b, 0.5)
}

/// Uncertainty selection around an arbitrary threshold; `center = 0` applies
/// it to linear scores instead of probabilities.
pub fn uncertainty_batch_around<K: Ord + Clone>(pool: &ScoredPool<K>, b: usize, center: f64) -> Vec<K> {
    top_k(&pool.entries, b, |(ka, sa), (kb, sb)| {
        (sa - center)
            .abs()
            .total_cmp(&(sb - center).abs())
            .then_with(|| ka.cmp(kb))
    })
}

fn top_k<K: Clone, F>(entries: &[(K, f64)], k: usize, cmp: F) -> Vec<K>
where
    F: Fn(&(K, f64), &(K, f64)) -> Ordering,
{
    let k = k.min(entries.len());
    if k == 0 {
        return Vec::new();
    }
    let mut refs: Vec<&(K, f64)> = entries.iter().collect();
    if k < refs.len() {
        refs.select_nth_unstable_by(k - 1, |a, b| cmp(a, b));
        refs.truncate(k);
    }
    refs.sort_unstable_by(|a, b| cmp(a, b));
    refs.into_iter().map(|(key, _)| key.clone()).collect()
}
