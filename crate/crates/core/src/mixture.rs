//! Mixtures of codelength models.
//!
//! A mixture hypothesis is `(K, label code, K component hypotheses)`. It costs
//! `floor(log2 n)` bits for `K`, plus the label hypothesis, plus every
//! component hypothesis. A record is sent as its cheapest class label
//! followed by the record under that class's component, so
//! `L(x) = min_j L(j | labels) + L(x | H_j)`.
//!
//! Fitting is a k-means style alternation in which codelength replaces
//! distance: refit components on the current clusters, refit the label code
//! on the cluster sizes, move every record to its cheapest class, and
//! evaluate the total two-part cost. The base learner is any [`Learner`]
//! over integer-coded records, so the same procedure wraps AVC or an
//! external compressor.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::code::{floor_log2, CategoricalHypothesis, Hypothesis, Learner, UniformHypothesis};
use crate::error::{Error, Result};
use crate::ranking::ScoredRanking;

/// Generator used for random class initialization.
pub const RNG_ALGORITHM: &str = "ChaCha8 (rand_chacha), per-run seeds from SplitMix64(seed, k, restart)";

/// How class labels are coded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LabelCoding {
    /// Laplace-corrected categorical code fitted to the cluster sizes.
    #[default]
    Optimal,
    /// Every label costs `log2 K`; the label hypothesis is free.
    Uniform,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LabelModel {
    Categorical(CategoricalHypothesis),
    Uniform(UniformHypothesis),
}

impl LabelModel {
    /// Label code for classes of the given sizes.
    pub fn fit(coding: LabelCoding, sizes: &[u64]) -> Result<Self> {
        match coding {
            LabelCoding::Optimal => {
                CategoricalHypothesis::from_counts(sizes.to_vec()).map(Self::Categorical)
            }
            LabelCoding::Uniform => {
                let k = u32::try_from(sizes.len())
                    .map_err(|_| Error::InvalidConfig("too many classes"))?;
                UniformHypothesis::new(k).map(Self::Uniform)
            }
        }
    }

    pub fn classes(&self) -> usize {
        match self {
            Self::Categorical(h) => h.arity() as usize,
            Self::Uniform(h) => h.domain_size() as usize,
        }
    }

    pub fn hypothesis_cost(&self) -> f64 {
        match self {
            Self::Categorical(h) => h.hypothesis_cost(),
            Self::Uniform(h) => h.hypothesis_cost(),
        }
    }

    /// Cost of label `class` in bits.
    ///
    /// # Panics
    /// If `class` is not below [`classes`](Self::classes).
    pub fn cost(&self, class: usize) -> f64 {
        let c = class as u32;
        let r = match self {
            Self::Categorical(h) => h.item_cost(&c),
            Self::Uniform(h) => h.item_cost(&c),
        };
        r.expect("class index within label arity")
    }
}

/// A fitted `K`-component mixture.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureHypothesis<H> {
    labels: LabelModel,
    components: Vec<H>,
    n: u64,
}

impl<H> MixtureHypothesis<H> {
    /// `n` is the size of the dataset the mixture describes; `K` is coded
    /// with `floor(log2 n)` bits.
    pub fn new(labels: LabelModel, components: Vec<H>, n: u64) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidHypothesis("mixture needs at least one component"));
        }
        if labels.classes() != components.len() {
            return Err(Error::InvalidHypothesis(
                "label arity differs from the number of components",
            ));
        }
        if n == 0 {
            return Err(Error::InvalidHypothesis("dataset size must be positive"));
        }
        Ok(Self {
            labels,
            components,
            n,
        })
    }

    pub fn k(&self) -> usize {
        self.components.len()
    }

    pub fn labels(&self) -> &LabelModel {
        &self.labels
    }

    pub fn components(&self) -> &[H] {
        &self.components
    }

    pub fn dataset_size(&self) -> u64 {
        self.n
    }

    pub fn label_cost(&self, class: usize) -> f64 {
        self.labels.cost(class)
    }
}

impl<H: Hypothesis<Item = [u32]>> MixtureHypothesis<H> {
    /// `L(j | labels) + L(x | H_j)` for every class `j`.
    pub fn class_costs(&self, x: &[u32]) -> Result<Vec<f64>> {
        self.components
            .iter()
            .enumerate()
            .map(|(j, h)| Ok(self.label_cost(j) + h.item_cost(x)?))
            .collect()
    }

    /// Cheapest class for `x`; ties go to the lowest index.
    pub fn assign(&self, x: &[u32]) -> Result<usize> {
        Ok(argmin(&self.class_costs(x)?).0)
    }

    /// Row-major `n x K` matrix of class costs. Each component scores the
    /// whole batch in one call.
    pub fn cost_matrix(&self, rows: &[&[u32]]) -> Result<Vec<f64>> {
        let k = self.k();
        let mut matrix = alloc::vec![0.0; rows.len() * k];
        for (j, h) in self.components.iter().enumerate() {
            let label = self.label_cost(j);
            let costs = h.item_costs(rows)?;
            if costs.len() != rows.len() {
                return Err(Error::Backend(alloc::format!(
                    "component {j} returned {} costs for {} records",
                    costs.len(),
                    rows.len()
                )));
            }
            for (i, c) in costs.into_iter().enumerate() {
                matrix[i * k + j] = label + c;
            }
        }
        Ok(matrix)
    }

    /// Mixture codelength of every row.
    pub fn score_all(&self, rows: &[&[u32]]) -> Result<ScoredRanking> {
        let k = self.k();
        let matrix = self.cost_matrix(rows)?;
        let scores = matrix.chunks_exact(k).map(|c| argmin(c).1).collect();
        Ok(ScoredRanking::new(scores))
    }
}

impl<H: Hypothesis<Item = [u32]>> Hypothesis for MixtureHypothesis<H> {
    type Item = [u32];

    fn hypothesis_cost(&self) -> f64 {
        let mut total = floor_log2(self.n) + self.labels.hypothesis_cost();
        for h in &self.components {
            total += h.hypothesis_cost();
        }
        total
    }

    fn item_cost(&self, x: &[u32]) -> Result<f64> {
        Ok(argmin(&self.class_costs(x)?).1)
    }

    fn item_costs(&self, xs: &[&[u32]]) -> Result<Vec<f64>> {
        let k = self.k();
        let matrix = self.cost_matrix(xs)?;
        Ok(matrix.chunks_exact(k).map(|c| argmin(c).1).collect())
    }
}

/// Index and value of the smallest entry; the first one wins ties.
fn argmin(costs: &[f64]) -> (usize, f64) {
    let mut best = (0, costs[0]);
    for (j, &c) in costs.iter().enumerate().skip(1) {
        if c < best.1 {
            best = (j, c);
        }
    }
    best
}

pub fn mixture_score_all<H: Hypothesis<Item = [u32]>>(
    h: &MixtureHypothesis<H>,
    rows: &[&[u32]],
) -> Result<ScoredRanking> {
    h.score_all(rows)
}

/// Settings for a single fixed-`k` fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedKConfig {
    /// Stop once the total cost improves by less than this fraction.
    pub epsilon: f64,
    pub max_iterations: usize,
    pub label_coding: LabelCoding,
}

impl Default for FixedKConfig {
    fn default() -> Self {
        Self {
            epsilon: 1e-3,
            max_iterations: 100,
            label_coding: LabelCoding::Optimal,
        }
    }
}

/// Bookkeeping for one refit/reassign iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationTrace {
    /// Classes that survived into this iteration's refit.
    pub effective_k: usize,
    /// Data cost of the incoming assignment under the freshly fitted hypothesis.
    pub data_cost_before: f64,
    /// Data cost after every record moved to its cheapest class.
    pub data_cost_after: f64,
    /// Hypothesis cost plus `data_cost_after`.
    pub total_cost: f64,
    pub reassigned: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixedKFit<H> {
    pub hypothesis: MixtureHypothesis<H>,
    /// Two-part cost of `hypothesis` over the data.
    pub total_cost: f64,
    /// Cheapest class of every record under `hypothesis`.
    pub assignments: Vec<usize>,
    pub iterations: usize,
    /// False when `max_iterations` ran out first.
    pub converged: bool,
    pub trace: Vec<IterationTrace>,
}

/// Relabels classes to `0..K'` in order of first class index, dropping
/// empty ones. Returns the member lists.
fn compact(assignments: &mut [usize], k: usize) -> Vec<Vec<usize>> {
    let mut members: Vec<Vec<usize>> = (0..k).map(|_| Vec::new()).collect();
    for (i, &y) in assignments.iter().enumerate() {
        members[y].push(i);
    }
    let mut remap = alloc::vec![usize::MAX; k];
    let mut kept = Vec::new();
    for (j, m) in members.into_iter().enumerate() {
        if !m.is_empty() {
            remap[j] = kept.len();
            kept.push(m);
        }
    }
    for y in assignments.iter_mut() {
        *y = remap[*y];
    }
    kept
}

/// Fits a `k`-component mixture from a uniformly random initial assignment.
///
/// Clusters that lose all their records are dropped, so the returned
/// hypothesis may have fewer than `k` components. The lowest-cost iterate is
/// returned.
pub fn fit_mixture_fixed_k<L>(
    rows: &[&[u32]],
    k: usize,
    learner: &L,
    seed: u64,
    config: &FixedKConfig,
) -> Result<FixedKFit<L::Hypothesis>>
where
    L: Learner<Item = [u32]>,
    L::Hypothesis: Clone,
{
    let n = rows.len();
    if n == 0 {
        return Err(Error::EmptySample);
    }
    if k == 0 {
        return Err(Error::InvalidConfig("k must be at least 1"));
    }
    if k > n {
        return Err(Error::TooManyClasses { k, n });
    }
    if !(config.epsilon > 0.0) {
        return Err(Error::InvalidConfig("epsilon must be positive"));
    }
    if config.max_iterations == 0 {
        return Err(Error::InvalidConfig("max_iterations must be positive"));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignments: Vec<usize> = (0..n).map(|_| rng.random_range(0..k)).collect();
    let mut classes = k;

    let mut best: Option<(MixtureHypothesis<L::Hypothesis>, f64, Vec<usize>)> = None;
    let mut trace = Vec::new();
    let mut previous: Option<f64> = None;
    let mut converged = false;

    for _ in 0..config.max_iterations {
        let members = compact(&mut assignments, classes);
        classes = members.len();

        let mut components = Vec::with_capacity(classes);
        for m in &members {
            let sample: Vec<&[u32]> = m.iter().map(|&i| rows[i]).collect();
            components.push(learner.fit(&sample)?);
        }
        let sizes: Vec<u64> = members.iter().map(|m| m.len() as u64).collect();
        let labels = LabelModel::fit(config.label_coding, &sizes)?;
        let hypothesis = MixtureHypothesis::new(labels, components, n as u64)?;

        let matrix = hypothesis.cost_matrix(rows)?;
        let mut before = 0.0;
        let mut after = 0.0;
        let mut reassigned = 0;
        let mut next = Vec::with_capacity(n);
        for (i, costs) in matrix.chunks_exact(classes).enumerate() {
            before += costs[assignments[i]];
            let (j, c) = argmin(costs);
            after += c;
            if j != assignments[i] {
                reassigned += 1;
            }
            next.push(j);
        }
        let total = hypothesis.hypothesis_cost() + after;
        trace.push(IterationTrace {
            effective_k: classes,
            data_cost_before: before,
            data_cost_after: after,
            total_cost: total,
            reassigned,
        });

        if best.as_ref().is_none_or(|b| total < b.1) {
            best = Some((hypothesis, total, next.clone()));
        }

        let stalled = previous.is_some_and(|p| p - total < config.epsilon * p);
        assignments = next;
        previous = Some(total);
        if reassigned == 0 || stalled {
            converged = true;
            break;
        }
    }

    let (hypothesis, total_cost, assignments) = best.expect("at least one iteration ran");
    Ok(FixedKFit {
        hypothesis,
        total_cost,
        assignments,
        iterations: trace.len(),
        converged,
        trace,
    })
}

/// Settings for the search over `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureConfig {
    /// Strictly ascending candidate component counts.
    pub k_schedule: Vec<usize>,
    pub restarts: usize,
    /// Relative-improvement threshold for both the inner loop and the
    /// early stop over `k`.
    pub epsilon: f64,
    pub seed: u64,
    pub max_iterations: usize,
    pub label_coding: LabelCoding,
}

impl Default for MixtureConfig {
    fn default() -> Self {
        Self {
            k_schedule: alloc::vec![1, 2, 4, 8, 16, 20],
            restarts: 10,
            epsilon: 1e-3,
            seed: 0,
            max_iterations: 100,
            label_coding: LabelCoding::Optimal,
        }
    }
}

impl MixtureConfig {
    pub fn fixed_k(&self) -> FixedKConfig {
        FixedKConfig {
            epsilon: self.epsilon,
            max_iterations: self.max_iterations,
            label_coding: self.label_coding,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k_schedule.is_empty() {
            return Err(Error::InvalidConfig("k schedule is empty"));
        }
        if self.k_schedule[0] == 0 {
            return Err(Error::InvalidConfig("k must be at least 1"));
        }
        if self.k_schedule.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidConfig("k schedule must be strictly ascending"));
        }
        if self.restarts == 0 {
            return Err(Error::InvalidConfig("restarts must be at least 1"));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::InvalidConfig("epsilon must be positive"));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidConfig("max_iterations must be positive"));
        }
        Ok(())
    }
}

fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of restart `restart` at `k`, a pure function of its inputs.
pub fn derive_seed(seed: u64, k: usize, restart: usize) -> u64 {
    splitmix64(splitmix64(splitmix64(seed) ^ k as u64) ^ restart as u64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunSummary {
    pub k: usize,
    pub restart: usize,
    pub seed: u64,
    pub total_cost: f64,
    pub iterations: usize,
    pub effective_k: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitReport<H> {
    pub hypothesis: MixtureHypothesis<H>,
    /// Surviving components of the selected hypothesis.
    pub chosen_k: usize,
    /// The `k` value whose run produced the selected hypothesis.
    pub requested_k: usize,
    pub total_cost_bits: f64,
    /// Best cost over restarts for every `k` explored.
    pub per_k_costs: BTreeMap<usize, f64>,
    pub runs: Vec<RunSummary>,
    pub assignments: Vec<usize>,
    pub seed: u64,
    pub rng: &'static str,
}

impl<H> FitReport<H> {
    pub fn iterations_per_restart(&self) -> Vec<usize> {
        self.runs.iter().map(|r| r.iterations).collect()
    }
}

/// Searches `config.k_schedule`, keeping the cheapest run overall.
///
/// Values of `k` above the number of records are skipped. The search stops
/// after the first `k` whose best restart does not beat the incumbent by more
/// than `epsilon` of its cost.
pub fn fit_mixture<L>(
    rows: &[&[u32]],
    learner: &L,
    config: &MixtureConfig,
) -> Result<FitReport<L::Hypothesis>>
where
    L: Learner<Item = [u32]>,
    L::Hypothesis: Clone,
{
    let fixed = config.fixed_k();
    fit_mixture_with(rows, config, |k, seeds| {
        seeds
            .iter()
            .map(|&seed| fit_mixture_fixed_k(rows, k, learner, seed, &fixed))
            .collect()
    })
}

/// [`fit_mixture`] with a caller-supplied runner for the restarts of one `k`.
///
/// `run_restarts(k, seeds)` must return one fixed-`k` fit per seed, in seed
/// order; callers use it to spread restarts over threads. The selection is
/// independent of how the runner schedules its work.
pub fn fit_mixture_with<H, R>(
    rows: &[&[u32]],
    config: &MixtureConfig,
    mut run_restarts: R,
) -> Result<FitReport<H>>
where
    R: FnMut(usize, &[u64]) -> Result<Vec<FixedKFit<H>>>,
{
    config.validate()?;
    if rows.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut runs = Vec::new();
    let mut per_k_costs = BTreeMap::new();
    let mut incumbent: Option<(usize, FixedKFit<H>)> = None;

    for &k in &config.k_schedule {
        if k > rows.len() {
            break;
        }
        let seeds: Vec<u64> = (0..config.restarts)
            .map(|r| derive_seed(config.seed, k, r))
            .collect();
        let fits = run_restarts(k, &seeds)?;
        if fits.len() != seeds.len() {
            return Err(Error::InvalidConfig("restart runner returned the wrong number of fits"));
        }
        let mut best_k: Option<FixedKFit<H>> = None;
        for (restart, (fit, &seed)) in fits.into_iter().zip(&seeds).enumerate() {
            runs.push(RunSummary {
                k,
                restart,
                seed,
                total_cost: fit.total_cost,
                iterations: fit.iterations,
                effective_k: fit.hypothesis.k(),
                converged: fit.converged,
            });
            if best_k.as_ref().is_none_or(|b| fit.total_cost < b.total_cost) {
                best_k = Some(fit);
            }
        }
        let best_k = best_k.expect("restarts >= 1");
        per_k_costs.insert(k, best_k.total_cost);

        let improves = match &incumbent {
            None => true,
            Some((_, inc)) => inc.total_cost - best_k.total_cost > config.epsilon * inc.total_cost,
        };
        if incumbent
            .as_ref()
            .is_none_or(|(_, inc)| best_k.total_cost < inc.total_cost)
        {
            incumbent = Some((k, best_k));
        }
        if !improves {
            break;
        }
    }

    let (requested_k, best) = incumbent.ok_or(Error::TooManyClasses {
        k: config.k_schedule[0],
        n: rows.len(),
    })?;
    Ok(FitReport {
        chosen_k: best.hypothesis.k(),
        requested_k,
        total_cost_bits: best.total_cost,
        assignments: best.assignments,
        hypothesis: best.hypothesis,
        per_k_costs,
        runs,
        seed: config.seed,
        rng: RNG_ALGORITHM,
    })
}
