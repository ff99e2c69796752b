//! Minimum description length models for anomaly detection in categorical
//! data.
//!
//! Every model here is a two-part code: a hypothesis codelength `L(H)` and a
//! per-record codelength `L(x | H)`, both in bits. A record's anomaly score is
//! its codelength under the fitted hypothesis, so the most anomalous records
//! are the ones the model compresses worst.
//!
//! - [`code`]: uniform, Bernoulli, categorical and product scenarios.
//! - [`avc`]: Attribute Value Coding, a product of per-column categoricals.
//! - [`mixture`]: k-means style fitting of mixtures of any base learner.
//! - [`eval`]: AUC and nDCG of a score vector against ground truth.
//!
//! The crate is `no_std` (with `alloc`) when the default `std` feature is off.

#![cfg_attr(not(any(feature = "std", test)), no_std)]

extern crate alloc;

pub mod avc;
pub mod code;
pub mod error;
pub mod eval;
pub mod mixture;
pub mod ranking;
pub mod table;

pub use avc::{fit_avc, Aggregation, AvcLearner, AvcModel, ProbabilityMode, ScoringConfig};
pub use code::{
    fit_bernoulli, fit_categorical, BernoulliHypothesis, CategoricalHypothesis, ColumnLearner,
    FactorHypothesis, Hypothesis, Learner, ProductHypothesis, ProductLearner, UniformHypothesis,
};
pub use error::{Error, Result};
pub use eval::{auc, ndcg, LabeledRanking};
pub use mixture::{
    fit_mixture, fit_mixture_fixed_k, fit_mixture_with, mixture_score_all, FitReport, FixedKConfig, FixedKFit,
    LabelCoding, LabelModel, MixtureConfig, MixtureHypothesis,
};
pub use ranking::ScoredRanking;
pub use table::CodedTable;
