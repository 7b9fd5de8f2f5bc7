//! Simulation laboratory for technology-assisted review (TAR) workflows.
//!
//! The crate is organised bottom-up:
//!
//! - [`corpus`]: ingestion, tokenization and BM25-style term-frequency features.
//! - [`classifier`]: L2-regularized logistic regression trained from scratch.
//! - [`strategies`]: seed selection, relevance feedback and uncertainty sampling.
//! - [`simulator`]: batch-mode active-learning runs recorded as [`RunTrace`]s.
//! - [`costmodel`]: four-parameter cost structures, cost dynamics and stopping analysis.
//! - [`stats`]: workflow comparison (relative cost reduction, two-sample K-S) and
//!   prevalence/difficulty binning.
//! - [`synth`]: seeded synthetic corpora for experiments and tests.
//!
//! A trace records everything needed to price a run under any cost structure and
//! recall target after the fact, so simulation and cost analysis are decoupled.

// `!(x > 0.0)` guards deliberately reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classifier;
pub mod corpus;
pub mod costmodel;
mod error;
pub mod simulator;
pub mod stats;
pub mod strategies;
pub mod synth;

pub use classifier::{LinearModel, TrainConfig};
pub use corpus::{Bm25Params, Corpus, Document, FeatureVector};
pub use costmodel::{CostBreakdown, CostDynamics, CostStructure, Family, StoppingAnalysis};
pub use error::{Error, Result};
pub use simulator::{IterationRecord, RunConfig, RunTrace, Simulator};
pub use stats::{BinAssignment, ComparisonResult};
pub use strategies::{ScoredPool, Strategy};
