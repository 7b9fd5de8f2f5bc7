//! Workflow comparison and task characterization.

use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::classifier::{self, TrainConfig};
use crate::corpus::{Bm25Params, Corpus};
use crate::error::{Error, Result};

const SPLIT_STREAM: u64 = 0x5b1;

/// `1 - cost_a / cost_b`: the fraction of B's cost saved by using A instead.
pub fn relative_cost_reduction(cost_a: f64, cost_b: f64) -> Result<f64> {
    if !(cost_b > 0.0) {
        return Err(Error::domain(format!("reference cost must be positive, got {cost_b}")));
    }
    Ok(1.0 - cost_a / cost_b)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
}

/// Two-sample Kolmogorov-Smirnov test with the asymptotic p-value.
pub fn ks_two_sample(xs: &[f64], ys: &[f64]) -> Result<KsResult> {
    if xs.is_empty() || ys.is_empty() {
        return Err(Error::domain("K-S test needs two non-empty samples"));
    }
    if xs.iter().chain(ys).any(|v| v.is_nan()) {
        return Err(Error::domain("K-S samples must not contain NaN"));
    }
    let statistic = ks_statistic(xs, ys);
    let (m, n) = (xs.len() as f64, ys.len() as f64);
    let ne = m * n / (m + n);
    let lambda = (ne.sqrt() + 0.12 + 0.11 / ne.sqrt()) * statistic;
    Ok(KsResult {
        statistic,
        p_value: kolmogorov_q(lambda),
    })
}

/// Largest gap between the two empirical CDFs, evaluated after every
/// distinct value so ties step both CDFs together.
fn ks_statistic(xs: &[f64], ys: &[f64]) -> f64 {
    let mut a = xs.to_vec();
    let mut b = ys.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let v = if a[i] <= b[j] { a[i] } else { b[j] };
        while i < a.len() && a[i] == v {
            i += 1;
        }
        while j < b.len() && b[j] == v {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Survival function of the Kolmogorov distribution,
/// `Q(λ) = 2 Σ_{k≥1} (-1)^{k-1} exp(-2 k² λ²)`, summed until a term drops
/// below 1e-12. Below λ = 0.2 the value is 1 to within 1e-12 and the series
/// converges slowly, so 1 is returned directly.
pub fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let a = -2.0 * lambda * lambda;
    let mut sum = 0.0;
    let mut sign = 2.0;
    for k in 1..=10_000u32 {
        let term = (a * f64::from(k * k)).exp();
        sum += sign * term;
        if term < 1e-12 {
            break;
        }
        sign = -sign;
    }
    sum.clamp(0.0, 1.0)
}

pub fn bonferroni(p: f64, m: usize) -> f64 {
    (p * m.max(1) as f64).min(1.0)
}

/// Fraction of positives in the top `r` entries of a ranking.
pub fn r_precision(ranked_labels: &[bool], r: usize) -> Result<f64> {
    if r == 0 {
        return Err(Error::domain("R-precision needs R >= 1"));
    }
    if ranked_labels.len() < r {
        return Err(Error::domain(format!(
            "ranking has {} entries, fewer than R = {r}",
            ranked_labels.len()
        )));
    }
    let hits = ranked_labels[..r].iter().filter(|&&p| p).count();
    Ok(hits as f64 / r as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonResult {
    pub mean_reduction: f64,
    pub reductions: Vec<f64>,
    pub ks_statistic: f64,
    pub p_value: f64,
    pub corrected_p: f64,
    /// The level at which the difference is significant after correction.
    pub significant_at: Option<f64>,
}

impl ComparisonResult {
    pub fn is_significant(&self) -> bool {
        self.significant_at.is_some()
    }
}

/// Compares paired per-task costs of workflows A and B. The K-S test runs on
/// the two cost distributions; `correction_m` is the Bonferroni family size.
pub fn compare_workflows(
    costs_a: &[f64],
    costs_b: &[f64],
    correction_m: usize,
    level: f64,
) -> Result<ComparisonResult> {
    if costs_a.len() != costs_b.len() {
        return Err(Error::domain(format!(
            "paired cost lists differ in length: {} vs {}",
            costs_a.len(),
            costs_b.len()
        )));
    }
    let reductions = costs_a
        .iter()
        .zip(costs_b)
        .map(|(&a, &b)| relative_cost_reduction(a, b))
        .collect::<Result<Vec<_>>>()?;
    let ks = ks_two_sample(costs_a, costs_b)?;
    let mean_reduction = reductions.iter().sum::<f64>() / reductions.len() as f64;
    let corrected_p = bonferroni(ks.p_value, correction_m);
    Ok(ComparisonResult {
        mean_reduction,
        reductions,
        ks_statistic: ks.statistic,
        p_value: ks.p_value,
        corrected_p,
        significant_at: (corrected_p < level).then_some(level),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrevalenceBin {
    TooRare,
    Rare,
    Medium,
    Common,
    TooCommon,
}

impl PrevalenceBin {
    /// Left-closed bins on the positive count: [0,500), [500,2000),
    /// [2000,8000), [8000,32000), [32000,∞).
    pub fn of(positives: usize) -> Self {
        match positives {
            0..=499 => PrevalenceBin::TooRare,
            500..=1_999 => PrevalenceBin::Rare,
            2_000..=7_999 => PrevalenceBin::Medium,
            8_000..=31_999 => PrevalenceBin::Common,
            _ => PrevalenceBin::TooCommon,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            PrevalenceBin::TooRare => "too_rare",
            PrevalenceBin::Rare => "rare",
            PrevalenceBin::Medium => "medium",
            PrevalenceBin::Common => "common",
            PrevalenceBin::TooCommon => "too_common",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DifficultyBin {
    Hard,
    Medium,
    Easy,
}

impl DifficultyBin {
    /// [0, 0.65) hard, [0.65, 0.85) medium, [0.85, 1] easy.
    pub fn of(r_precision: f64) -> Self {
        if r_precision < 0.65 {
            DifficultyBin::Hard
        } else if r_precision < 0.85 {
            DifficultyBin::Medium
        } else {
            DifficultyBin::Easy
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            DifficultyBin::Hard => "hard",
            DifficultyBin::Medium => "medium",
            DifficultyBin::Easy => "easy",
        }
    }
}

impl fmt::Display for PrevalenceBin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Display for DifficultyBin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinAssignment {
    pub category: String,
    pub positives: usize,
    pub prevalence_bin: PrevalenceBin,
    pub difficulty_bin: DifficultyBin,
    pub r_precision: f64,
}

/// Trains on a seeded random `train_fraction` of the corpus and scores the
/// category's difficulty as R-precision on the rest.
pub fn assign_bins(
    corpus: &Corpus,
    category: &str,
    split_seed: u64,
    train_fraction: f64,
    features: Bm25Params,
    train: &TrainConfig,
) -> Result<BinAssignment> {
    let vectors = corpus.vectorize_all(features);
    assign_bins_with(corpus, &vectors, category, split_seed, train_fraction, train)
}

/// [`assign_bins`] with precomputed document vectors, for binning many categories.
pub fn assign_bins_with(
    corpus: &Corpus,
    vectors: &[crate::corpus::FeatureVector],
    category: &str,
    split_seed: u64,
    train_fraction: f64,
    train: &TrainConfig,
) -> Result<BinAssignment> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::domain(format!("train fraction must lie in (0, 1), got {train_fraction}")));
    }
    let labels = corpus
        .label_mask(category)
        .ok_or_else(|| Error::Task(format!("unknown category `{category}`")))?;
    let positives = labels.iter().filter(|&&p| p).count();

    let n = corpus.len();
    let n_train = (train_fraction * n as f64).floor() as usize;
    // A dedicated stream keeps the split independent of other samples drawn
    // from the same seed (for instance when the corpus itself was generated).
    let mut rng = ChaCha8Rng::seed_from_u64(split_seed);
    rng.set_stream(SPLIT_STREAM);
    let mut in_train = vec![false; n];
    for i in rand::seq::index::sample(&mut rng, n, n_train) {
        in_train[i] = true;
    }

    let examples: Vec<_> = (0..n).filter(|&i| in_train[i]).map(|i| (&vectors[i], labels[i])).collect();
    let model = classifier::train(&examples, corpus.vocabulary().len(), train)
        .map_err(|e| Error::Binning(format!("category `{category}`: {e}")))?;

    let docs = corpus.documents();
    let mut held_out: Vec<(f64, usize)> = (0..n)
        .filter(|&i| !in_train[i])
        .map(|i| (vectors[i].dot_dense(&model.weights) + model.bias, i))
        .collect();
    held_out.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| docs[a.1].id.cmp(&docs[b.1].id)));
    let ranked: Vec<bool> = held_out.iter().map(|&(_, i)| labels[i]).collect();
    let r = ranked.iter().filter(|&&p| p).count();
    if r == 0 {
        return Err(Error::Binning(format!("category `{category}` has no held-out positives")));
    }
    let rp = r_precision(&ranked, r)?;

    Ok(BinAssignment {
        category: category.to_string(),
        positives,
        prevalence_bin: PrevalenceBin::of(positives),
        difficulty_bin: DifficultyBin::of(rp),
        r_precision: rp,
    })
}
