//! Attribute Value Coding.
//!
//! Each attribute is compressed independently with a categorical code fitted
//! to that column, and a record's score is its codelength under the product
//! of those codes. The default configuration (Laplace-corrected probabilities,
//! summed over attributes) yields true codelengths and is what the mixture
//! learner requires. The `Mle`/`Mean` switches exist to reproduce the
//! normalised, uncorrected scores sometimes quoted for small examples.

use alloc::vec::Vec;

use crate::code::{columns_of, fit_categorical, log2, CategoricalHypothesis, Hypothesis, Learner};
use crate::error::{Error, Result};
use crate::ranking::ScoredRanking;
use crate::table::CodedTable;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ProbabilityMode {
    /// `(count + 1) / (n + k)`.
    #[default]
    Laplace,
    /// `count / n`; unseen values have infinite cost and are rejected.
    Mle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Aggregation {
    #[default]
    Sum,
    /// Sum divided by the number of attributes.
    Mean,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ScoringConfig {
    pub probability: ProbabilityMode,
    pub aggregation: Aggregation,
}

impl ScoringConfig {
    pub const LAPLACE_SUM: Self = Self {
        probability: ProbabilityMode::Laplace,
        aggregation: Aggregation::Sum,
    };

    pub const MLE_MEAN: Self = Self {
        probability: ProbabilityMode::Mle,
        aggregation: Aggregation::Mean,
    };

    /// Whether scores are Kraft-valid codelengths.
    pub fn is_codelength(&self) -> bool {
        *self == Self::LAPLACE_SUM
    }
}

/// Fitted per-attribute categorical codes.
#[derive(Debug, Clone, PartialEq)]
pub struct AvcModel {
    per_attribute: Vec<CategoricalHypothesis>,
    n_records: u64,
    config: ScoringConfig,
}

impl AvcModel {
    /// Reassembles a model from stored counts. All attributes must share the
    /// same sample size.
    pub fn from_parts(
        per_attribute: Vec<CategoricalHypothesis>,
        config: ScoringConfig,
    ) -> Result<Self> {
        let n_records = match per_attribute.first() {
            Some(h) => h.sample_size(),
            None => return Err(Error::InvalidHypothesis("AVC model needs a record count")),
        };
        if per_attribute.iter().any(|h| h.sample_size() != n_records) {
            return Err(Error::InvalidHypothesis(
                "attributes disagree on the number of records",
            ));
        }
        Ok(Self {
            per_attribute,
            n_records,
            config,
        })
    }

    pub fn per_attribute(&self) -> &[CategoricalHypothesis] {
        &self.per_attribute
    }

    pub fn n_records(&self) -> u64 {
        self.n_records
    }

    pub fn config(&self) -> ScoringConfig {
        self.config
    }

    pub fn with_config(mut self, config: ScoringConfig) -> Self {
        self.config = config;
        self
    }

    fn attribute_cost(&self, column: usize, value: u32) -> Result<f64> {
        let h = &self.per_attribute[column];
        match self.config.probability {
            ProbabilityMode::Laplace => h.item_cost(&value),
            ProbabilityMode::Mle => {
                let p = h.mle_probability(value)?;
                if p == 0.0 {
                    return Err(Error::ZeroProbability { column, value });
                }
                Ok(-log2(p))
            }
        }
    }

    /// Codelength of one record under the configured scoring.
    pub fn score(&self, record: &[u32]) -> Result<f64> {
        if record.len() != self.per_attribute.len() {
            return Err(Error::ArityMismatch {
                expected: self.per_attribute.len(),
                found: record.len(),
            });
        }
        let mut total = 0.0;
        for (j, &v) in record.iter().enumerate() {
            total += self.attribute_cost(j, v)?;
        }
        Ok(match self.config.aggregation {
            Aggregation::Sum => total,
            Aggregation::Mean if record.is_empty() => 0.0,
            Aggregation::Mean => total / record.len() as f64,
        })
    }

    pub fn score_all(&self, data: &CodedTable) -> Result<ScoredRanking> {
        let scores = data.rows().map(|r| self.score(r)).collect::<Result<Vec<_>>>()?;
        Ok(ScoredRanking::new(scores))
    }
}

impl Hypothesis for AvcModel {
    type Item = [u32];

    fn hypothesis_cost(&self) -> f64 {
        let mut total = 0.0;
        for h in &self.per_attribute {
            total += h.hypothesis_cost();
        }
        total
    }

    fn item_cost(&self, x: &[u32]) -> Result<f64> {
        self.score(x)
    }
}

/// AVC learner over columns with fixed arities.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AvcLearner {
    pub arities: Vec<u32>,
    pub config: ScoringConfig,
}

impl AvcLearner {
    pub fn new(arities: Vec<u32>) -> Self {
        Self {
            arities,
            config: ScoringConfig::default(),
        }
    }

    pub fn for_table(data: &CodedTable) -> Self {
        Self::new(data.arities().to_vec())
    }
}

impl Learner for AvcLearner {
    type Item = [u32];
    type Hypothesis = AvcModel;

    fn fit(&self, sample: &[&[u32]]) -> Result<AvcModel> {
        if sample.is_empty() {
            return Err(Error::EmptySample);
        }
        if self.arities.is_empty() {
            return Err(Error::InvalidConfig("AVC needs at least one attribute"));
        }
        let columns = columns_of(sample, self.arities.len())?;
        let per_attribute = columns
            .iter()
            .zip(&self.arities)
            .map(|(col, &k)| fit_categorical(col, k))
            .collect::<Result<Vec<_>>>()?;
        Ok(AvcModel {
            per_attribute,
            n_records: sample.len() as u64,
            config: self.config,
        })
    }
}

/// Fits every column of `data` independently.
pub fn fit_avc(data: &CodedTable, config: ScoringConfig) -> Result<AvcModel> {
    let learner = AvcLearner {
        arities: data.arities().to_vec(),
        config,
    };
    learner.fit(&data.row_refs())
}
