//! Two-part codelength models.
//!
//! A model pairs a hypothesis codelength `L(H)` with a per-item codelength
//! `L(x | H)`, both in bits. Learners map a sample to a hypothesis. The
//! concrete scenarios here are the uniform, Bernoulli and categorical
//! processes and their independent products. All per-item codelengths are
//! Laplace corrected, so every observation in the space has a finite cost
//! and `sum_x 2^-L(x|H) <= 1` holds for every hypothesis.
//!
//! Costs are idealized Shannon codelengths (real numbers), not the lengths
//! of an actual bitstream.

use alloc::vec::Vec;

use crate::error::{Error, Result};

/// `log2` in a `no_std` build.
#[inline]
pub fn log2(x: f64) -> f64 {
    libm::log2(x)
}

/// `floor(log2 n)` for `n >= 1`, computed exactly on integers.
#[inline]
pub fn floor_log2(n: u64) -> f64 {
    debug_assert!(n >= 1);
    f64::from(n.ilog2())
}

/// A fitted hypothesis together with its codelength functions.
pub trait Hypothesis {
    type Item: ?Sized;

    /// `L(H)` in bits.
    fn hypothesis_cost(&self) -> f64;

    /// `L(x | H)` in bits.
    fn item_cost(&self, x: &Self::Item) -> Result<f64>;

    /// Costs for a batch of items. Models backed by an expensive process
    /// override this to answer the whole batch at once.
    fn item_costs(&self, xs: &[&Self::Item]) -> Result<Vec<f64>> {
        xs.iter().map(|x| self.item_cost(x)).collect()
    }

    /// `sum_i L(x_i | H)`, summed left to right.
    fn data_cost(&self, xs: &[&Self::Item]) -> Result<f64> {
        let mut total = 0.0;
        for c in self.item_costs(xs)? {
            total += c;
        }
        Ok(total)
    }
}

/// Fits a hypothesis to a sample.
pub trait Learner {
    type Item: ?Sized;
    type Hypothesis: Hypothesis<Item = Self::Item>;

    fn fit(&self, sample: &[&Self::Item]) -> Result<Self::Hypothesis>;
}

/// `sum_x 2^-L(x|H)` over the given observations.
pub fn kraft_sum<'a, H, I>(h: &H, space: I) -> Result<f64>
where
    H: Hypothesis + ?Sized,
    H::Item: 'a,
    I: IntoIterator<Item = &'a H::Item>,
{
    let mut total = 0.0;
    for x in space {
        total += libm::exp2(-h.item_cost(x)?);
    }
    Ok(total)
}

/// The single hypothesis of a uniform process over `domain_size` outcomes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UniformHypothesis {
    domain_size: u32,
}

impl UniformHypothesis {
    pub fn new(domain_size: u32) -> Result<Self> {
        if domain_size == 0 {
            return Err(Error::InvalidHypothesis("uniform domain must be nonempty"));
        }
        Ok(Self { domain_size })
    }

    pub fn domain_size(&self) -> u32 {
        self.domain_size
    }
}

impl Hypothesis for UniformHypothesis {
    type Item = u32;

    fn hypothesis_cost(&self) -> f64 {
        0.0
    }

    fn item_cost(&self, x: &u32) -> Result<f64> {
        if *x >= self.domain_size {
            return Err(Error::UnknownCategory {
                value: *x,
                arity: self.domain_size,
            });
        }
        Ok(log2(f64::from(self.domain_size)))
    }
}

/// `m` ones observed in a sample of `n` bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BernoulliHypothesis {
    ones: u64,
    n: u64,
}

impl BernoulliHypothesis {
    pub fn new(ones: u64, n: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidHypothesis("sample size must be positive"));
        }
        if ones > n {
            return Err(Error::InvalidHypothesis("more ones than samples"));
        }
        Ok(Self { ones, n })
    }

    pub fn ones(&self) -> u64 {
        self.ones
    }

    pub fn sample_size(&self) -> u64 {
        self.n
    }

    /// Laplace-corrected `P(x = 1) = (m + 1) / (n + 2)`.
    pub fn p_one(&self) -> f64 {
        (self.ones + 1) as f64 / (self.n + 2) as f64
    }

    pub fn cost(&self, bit: bool) -> f64 {
        // Both branches are computed from counts directly, so `1 - p` never
        // loses precision.
        let favourable = if bit { self.ones } else { self.n - self.ones };
        -log2((favourable + 1) as f64 / (self.n + 2) as f64)
    }
}

impl Hypothesis for BernoulliHypothesis {
    type Item = bool;

    /// `floor(log2 n)` bits for `m`.
    fn hypothesis_cost(&self) -> f64 {
        floor_log2(self.n)
    }

    fn item_cost(&self, x: &bool) -> Result<f64> {
        Ok(self.cost(*x))
    }
}

pub fn fit_bernoulli(bits: &[bool]) -> Result<BernoulliHypothesis> {
    if bits.is_empty() {
        return Err(Error::EmptySample);
    }
    let ones = bits.iter().filter(|&&b| b).count() as u64;
    BernoulliHypothesis::new(ones, bits.len() as u64)
}

/// Raw outcome counts of a `k`-valued categorical process.
///
/// Outcomes are coded `0..k`. Counts are stored unsmoothed; the Laplace
/// correction is applied when probabilities are derived.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CategoricalHypothesis {
    counts: Vec<u64>,
    n: u64,
}

impl CategoricalHypothesis {
    /// Builds a hypothesis whose sample size is the sum of `counts`.
    pub fn from_counts(counts: Vec<u64>) -> Result<Self> {
        let n = counts.iter().sum();
        Self::with_sample_size(counts, n)
    }

    pub fn with_sample_size(counts: Vec<u64>, n: u64) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::InvalidHypothesis("categorical arity must be at least 1"));
        }
        if counts.len() > u32::MAX as usize {
            return Err(Error::InvalidHypothesis("categorical arity too large"));
        }
        if n == 0 {
            return Err(Error::InvalidHypothesis("sample size must be positive"));
        }
        if counts.iter().any(|&c| c > n) {
            return Err(Error::InvalidHypothesis("count exceeds sample size"));
        }
        Ok(Self { counts, n })
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn sample_size(&self) -> u64 {
        self.n
    }

    pub fn arity(&self) -> u32 {
        self.counts.len() as u32
    }

    fn check(&self, x: u32) -> Result<usize> {
        let i = x as usize;
        if i >= self.counts.len() {
            return Err(Error::UnknownCategory {
                value: x,
                arity: self.arity(),
            });
        }
        Ok(i)
    }

    /// `(count_x + 1) / (n + k)`.
    pub fn probability(&self, x: u32) -> Result<f64> {
        let i = self.check(x)?;
        Ok((self.counts[i] + 1) as f64 / (self.n + self.counts.len() as u64) as f64)
    }

    /// Unsmoothed relative frequency `count_x / n`.
    pub fn mle_probability(&self, x: u32) -> Result<f64> {
        let i = self.check(x)?;
        Ok(self.counts[i] as f64 / self.n as f64)
    }
}

impl Hypothesis for CategoricalHypothesis {
    type Item = u32;

    /// `(k - 1) floor(log2 n)`.
    fn hypothesis_cost(&self) -> f64 {
        (self.counts.len() - 1) as f64 * floor_log2(self.n)
    }

    fn item_cost(&self, x: &u32) -> Result<f64> {
        Ok(-log2(self.probability(*x)?))
    }
}

pub fn fit_categorical(outcomes: &[u32], arity: u32) -> Result<CategoricalHypothesis> {
    if arity == 0 {
        return Err(Error::InvalidHypothesis("categorical arity must be at least 1"));
    }
    if outcomes.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut counts = alloc::vec![0u64; arity as usize];
    for &x in outcomes {
        match counts.get_mut(x as usize) {
            Some(c) => *c += 1,
            None => return Err(Error::UnknownCategory { value: x, arity }),
        }
    }
    CategoricalHypothesis::with_sample_size(counts, outcomes.len() as u64)
}

/// One column of a product scenario.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FactorHypothesis {
    Uniform(UniformHypothesis),
    /// Outcomes `0` and `1`.
    Bernoulli(BernoulliHypothesis),
    Categorical(CategoricalHypothesis),
}

impl Hypothesis for FactorHypothesis {
    type Item = u32;

    fn hypothesis_cost(&self) -> f64 {
        match self {
            Self::Uniform(h) => h.hypothesis_cost(),
            Self::Bernoulli(h) => h.hypothesis_cost(),
            Self::Categorical(h) => h.hypothesis_cost(),
        }
    }

    fn item_cost(&self, x: &u32) -> Result<f64> {
        match self {
            Self::Uniform(h) => h.item_cost(x),
            Self::Bernoulli(h) => match *x {
                0 => Ok(h.cost(false)),
                1 => Ok(h.cost(true)),
                v => Err(Error::UnknownCategory { value: v, arity: 2 }),
            },
            Self::Categorical(h) => h.item_cost(x),
        }
    }
}

/// Learner for a single column.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColumnLearner {
    Uniform { domain_size: u32 },
    Bernoulli,
    Categorical { arity: u32 },
}

impl ColumnLearner {
    pub fn fit(&self, column: &[u32]) -> Result<FactorHypothesis> {
        match *self {
            Self::Uniform { domain_size } => {
                let h = UniformHypothesis::new(domain_size)?;
                for x in column {
                    h.item_cost(x)?;
                }
                Ok(FactorHypothesis::Uniform(h))
            }
            Self::Bernoulli => {
                let mut bits = Vec::with_capacity(column.len());
                for &x in column {
                    match x {
                        0 => bits.push(false),
                        1 => bits.push(true),
                        v => return Err(Error::UnknownCategory { value: v, arity: 2 }),
                    }
                }
                fit_bernoulli(&bits).map(FactorHypothesis::Bernoulli)
            }
            Self::Categorical { arity } => {
                fit_categorical(column, arity).map(FactorHypothesis::Categorical)
            }
        }
    }
}

/// Independent product of per-column hypotheses.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductHypothesis<H> {
    components: Vec<H>,
}

impl<H> ProductHypothesis<H> {
    pub fn new(components: Vec<H>) -> Self {
        Self { components }
    }

    pub fn components(&self) -> &[H] {
        &self.components
    }

    pub fn into_components(self) -> Vec<H> {
        self.components
    }
}

impl<H: Hypothesis<Item = u32>> Hypothesis for ProductHypothesis<H> {
    type Item = [u32];

    fn hypothesis_cost(&self) -> f64 {
        let mut total = 0.0;
        for h in &self.components {
            total += h.hypothesis_cost();
        }
        total
    }

    fn item_cost(&self, x: &[u32]) -> Result<f64> {
        if x.len() != self.components.len() {
            return Err(Error::ArityMismatch {
                expected: self.components.len(),
                found: x.len(),
            });
        }
        let mut total = 0.0;
        for (h, v) in self.components.iter().zip(x) {
            total += h.item_cost(v)?;
        }
        Ok(total)
    }
}

/// Splits rows into columns, checking every row has `width` values.
pub(crate) fn columns_of(rows: &[&[u32]], width: usize) -> Result<Vec<Vec<u32>>> {
    let mut columns: Vec<Vec<u32>> = (0..width).map(|_| Vec::with_capacity(rows.len())).collect();
    for row in rows {
        if row.len() != width {
            return Err(Error::ArityMismatch {
                expected: width,
                found: row.len(),
            });
        }
        for (col, &v) in columns.iter_mut().zip(row.iter()) {
            col.push(v);
        }
    }
    Ok(columns)
}

/// Fits each column with its own learner.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProductLearner {
    pub columns: Vec<ColumnLearner>,
}

impl Learner for ProductLearner {
    type Item = [u32];
    type Hypothesis = ProductHypothesis<FactorHypothesis>;

    fn fit(&self, sample: &[&[u32]]) -> Result<Self::Hypothesis> {
        if sample.is_empty() {
            return Err(Error::EmptySample);
        }
        let columns = columns_of(sample, self.columns.len())?;
        let components = self
            .columns
            .iter()
            .zip(&columns)
            .map(|(learner, col)| learner.fit(col))
            .collect::<Result<Vec<_>>>()?;
        Ok(ProductHypothesis::new(components))
    }
}
