//! Parallel restarts and the sweep over component counts.
//!
//! Jobs are independent `(k, restart)` fits with seeds derived from the
//! master seed, so results do not depend on the number of threads or the
//! order in which jobs finish. `MDLAD_THREADS` caps the worker count.

use mdlad_core::mixture::{derive_seed, FixedKConfig};
use mdlad_core::{
    auc, fit_mixture_fixed_k, fit_mixture_with, ndcg, FitReport, Hypothesis, Learner,
    MixtureConfig,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};

pub const THREADS_ENV: &str = "MDLAD_THREADS";

/// A worker pool sized by `MDLAD_THREADS` (all cores when unset).
pub fn thread_pool() -> Result<rayon::ThreadPool> {
    let threads = match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => n,
            _ => {
                return Err(Error::Config(format!(
                    "{THREADS_ENV} must be a positive integer, got {v:?}"
                )))
            }
        },
        Err(_) => 0,
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker threads: {e}")))
}

/// `fit_mixture` with the restarts of every `k` run on `pool`. The result
/// is identical to the sequential search.
pub fn fit_mixture_parallel<L>(
    rows: &[&[u32]],
    learner: &L,
    config: &MixtureConfig,
    pool: &rayon::ThreadPool,
) -> Result<FitReport<L::Hypothesis>>
where
    L: Learner<Item = [u32]> + Sync,
    L::Hypothesis: Clone + Send,
{
    let fixed = config.fixed_k();
    let report = fit_mixture_with(rows, config, |k, seeds| {
        pool.install(|| {
            seeds
                .par_iter()
                .map(|&seed| fit_mixture_fixed_k(rows, k, learner, seed, &fixed))
                .collect()
        })
    })?;
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub k_schedule: Vec<usize>,
    pub restarts: usize,
    pub seed: u64,
    pub fixed: FixedKConfig,
}

impl SweepConfig {
    pub fn from_mixture(c: &MixtureConfig) -> Self {
        Self {
            k_schedule: c.k_schedule.clone(),
            restarts: c.restarts,
            seed: c.seed,
            fixed: c.fixed_k(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRun {
    pub k: usize,
    pub restart: usize,
    pub seed: u64,
    pub total_cost_bits: f64,
    pub effective_k: usize,
    pub iterations: usize,
    pub auc: Option<f64>,
    pub ndcg: Option<f64>,
}

/// Summary of all restarts at one `k`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub k: usize,
    pub median_cost_bits: f64,
    /// `median_cost_bits` over the single-component cost.
    pub relative_cost: f64,
    pub median_auc: Option<f64>,
    pub max_auc: Option<f64>,
    pub median_ndcg: Option<f64>,
    pub max_ndcg: Option<f64>,
    pub runs: Vec<SweepRun>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub seed: u64,
    /// Total cost of the single-component model.
    pub base_cost_bits: f64,
    pub rows: Vec<SweepRow>,
}

/// Median with the mean of the middle pair for even counts.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    Some(if v.len() % 2 == 1 {
        v[mid]
    } else {
        (v[mid - 1] + v[mid]) / 2.0
    })
}

fn max(values: &[f64]) -> Option<f64> {
    values.iter().copied().max_by(f64::total_cmp)
}

/// Fits every `(k, restart)` pair and summarises each `k`. Every `k` in the
/// schedule is run (no early stop); values above the record count are
/// skipped. With `labels`, each run's ranking is scored by AUC and nDCG.
pub fn sweep_k<L>(
    rows: &[&[u32]],
    labels: Option<&[bool]>,
    learner: &L,
    config: &SweepConfig,
    pool: &rayon::ThreadPool,
) -> Result<SweepReport>
where
    L: Learner<Item = [u32]> + Sync,
    L::Hypothesis: Clone + Send,
{
    if rows.is_empty() {
        return Err(mdlad_core::Error::EmptySample.into());
    }
    if config.k_schedule.is_empty() || config.k_schedule.contains(&0) {
        return Err(mdlad_core::Error::InvalidConfig("k values must be positive").into());
    }
    if config.restarts == 0 {
        return Err(mdlad_core::Error::InvalidConfig("restarts must be at least 1").into());
    }
    if let Some(l) = labels {
        if l.len() != rows.len() {
            return Err(mdlad_core::Error::LengthMismatch {
                scores: rows.len(),
                labels: l.len(),
            }
            .into());
        }
    }
    let ks: Vec<usize> = config
        .k_schedule
        .iter()
        .copied()
        .filter(|&k| k <= rows.len())
        .collect();
    if ks.is_empty() {
        return Err(mdlad_core::Error::TooManyClasses {
            k: config.k_schedule[0],
            n: rows.len(),
        }
        .into());
    }
    let mut jobs: Vec<(usize, usize)> = ks
        .iter()
        .flat_map(|&k| (0..config.restarts).map(move |r| (k, r)))
        .collect();
    // One single-component fit is all the reference needs; it is the same
    // for every seed.
    let reference_job = !ks.contains(&1);
    if reference_job {
        jobs.push((1, 0));
    }

    let results: Vec<Result<SweepRun>> = pool.install(|| {
        jobs.par_iter()
            .map(|&(k, restart)| {
                let seed = derive_seed(config.seed, k, restart);
                let fit = fit_mixture_fixed_k(rows, k, learner, seed, &config.fixed)?;
                let (auc_v, ndcg_v) = match labels {
                    Some(l) => {
                        let scores = fit.hypothesis.item_costs(rows)?;
                        (Some(auc(&scores, l)?), Some(ndcg(&scores, l, None)?))
                    }
                    None => (None, None),
                };
                Ok(SweepRun {
                    k,
                    restart,
                    seed,
                    total_cost_bits: fit.total_cost,
                    effective_k: fit.hypothesis.k(),
                    iterations: fit.iterations,
                    auc: auc_v,
                    ndcg: ndcg_v,
                })
            })
            .collect()
    });
    let mut runs = results.into_iter().collect::<Result<Vec<_>>>()?;

    let base_runs: Vec<f64> = runs
        .iter()
        .filter(|r| r.k == 1)
        .map(|r| r.total_cost_bits)
        .collect();
    let base_cost_bits = median(&base_runs).expect("a single-component run exists");
    if reference_job {
        runs.pop();
    }

    let rows_out = ks
        .iter()
        .map(|&k| {
            let at_k: Vec<SweepRun> = runs.iter().filter(|r| r.k == k).cloned().collect();
            let costs: Vec<f64> = at_k.iter().map(|r| r.total_cost_bits).collect();
            let aucs: Vec<f64> = at_k.iter().filter_map(|r| r.auc).collect();
            let ndcgs: Vec<f64> = at_k.iter().filter_map(|r| r.ndcg).collect();
            let median_cost_bits = median(&costs).expect("restarts >= 1");
            SweepRow {
                k,
                median_cost_bits,
                relative_cost: median_cost_bits / base_cost_bits,
                median_auc: median(&aucs),
                max_auc: max(&aucs),
                median_ndcg: median(&ndcgs),
                max_ndcg: max(&ndcgs),
                runs: at_k,
            }
        })
        .collect();
    Ok(SweepReport {
        seed: config.seed,
        base_cost_bits,
        rows: rows_out,
    })
}
