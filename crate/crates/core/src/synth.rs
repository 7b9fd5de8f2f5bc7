//! Seeded synthetic corpora: Gaussian bag-of-words documents.
//!
//! Every term has a background mean count; each category owns a disjoint
//! block of signal terms whose mean is raised for its members. A document's
//! count for a term is a rounded, zero-clipped normal draw around its mean.

use std::collections::{BTreeMap, BTreeSet};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Document};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthCategory {
    pub name: String,
    pub prevalence: f64,
    pub signal_terms: usize,
    /// Added to the background mean of each signal term for members.
    pub signal_mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub n_docs: usize,
    pub vocab_size: usize,
    pub background_mean: f64,
    pub noise_sd: f64,
    pub seed: u64,
    pub categories: Vec<SynthCategory>,
}

impl SynthSpec {
    /// 2,000 documents with a single 5%-prevalence category whose classes are
    /// linearly separable but noisy enough that early models rank poorly.
    pub fn separable(seed: u64) -> Self {
        SynthSpec {
            n_docs: 2_000,
            vocab_size: 300,
            background_mean: 0.4,
            noise_sd: 0.6,
            seed,
            categories: vec![SynthCategory {
                name: "target".into(),
                prevalence: 0.05,
                signal_terms: 30,
                signal_mean: 0.6,
            }],
        }
    }
}

pub fn term_name(j: usize) -> String {
    format!("w{j:04}")
}

pub fn generate(spec: &SynthSpec) -> Result<Corpus> {
    let signal_total: usize = spec.categories.iter().map(|c| c.signal_terms).sum();
    if signal_total > spec.vocab_size {
        return Err(Error::domain(format!(
            "{signal_total} signal terms do not fit in a vocabulary of {}",
            spec.vocab_size
        )));
    }
    if !(spec.noise_sd >= 0.0) || !(spec.background_mean >= 0.0) {
        return Err(Error::domain("background mean and noise must be non-negative"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let width = spec.n_docs.saturating_sub(1).to_string().len().max(5);
    let ids: Vec<String> = (0..spec.n_docs).map(|i| format!("doc{i:0width$}")).collect();

    let mut means = vec![vec![spec.background_mean; spec.vocab_size]; spec.n_docs];
    let mut categories = BTreeMap::new();
    let mut block_start = 0;
    for cat in &spec.categories {
        if !(0.0..=1.0).contains(&cat.prevalence) {
            return Err(Error::domain(format!("prevalence of `{}` must lie in [0, 1]", cat.name)));
        }
        let k = (cat.prevalence * spec.n_docs as f64).round() as usize;
        let members = rand::seq::index::sample(&mut rng, spec.n_docs, k);
        let mut set = BTreeSet::new();
        for d in members {
            for m in &mut means[d][block_start..block_start + cat.signal_terms] {
                *m += cat.signal_mean;
            }
            set.insert(ids[d].clone());
        }
        categories.insert(cat.name.clone(), set);
        block_start += cat.signal_terms;
    }

    let noise = Normal::new(0.0, spec.noise_sd).map_err(|e| Error::domain(e.to_string()))?;
    let names: Vec<String> = (0..spec.vocab_size).map(term_name).collect();
    let documents = ids
        .into_iter()
        .zip(means)
        .map(|(id, mu)| {
            let mut tokens = Vec::new();
            for (j, m) in mu.into_iter().enumerate() {
                let count = (m + noise.sample(&mut rng)).round().max(0.0) as usize;
                tokens.extend(std::iter::repeat_n(names[j].clone(), count));
            }
            Document::new(id, tokens)
        })
        .collect();
    Corpus::new(documents, categories)
}
