//! Serialized models.
//!
//! Models are JSON documents that store counts rather than probabilities, so
//! smoothing is reapplied identically when a model is loaded. Each document
//! carries the input columns and their domains, so new data is coded exactly
//! as the training data was.

use std::path::Path;

use mdlad_core::mixture::{LabelModel, RunSummary};
use mdlad_core::{
    AvcModel, CategoricalHypothesis, CodedTable, FitReport, Hypothesis, LabelCoding,
    MixtureHypothesis, ScoredRanking, ScoringConfig,
};
use serde::{Deserialize, Serialize};

use crate::dataset::{one_hot_columns, Column};
use crate::error::{io_err, json_err, Error, Result};
use crate::extern_adapter::{Descriptor, ExternModelHandle};

pub const FORMAT: &str = "mdlad-model";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Scoring {
    /// Laplace-corrected codelengths summed over attributes.
    #[default]
    LaplaceSum,
    /// Uncorrected codelengths averaged over attributes (not a codelength).
    MleMean,
}

impl From<Scoring> for ScoringConfig {
    fn from(s: Scoring) -> Self {
        match s {
            Scoring::LaplaceSum => ScoringConfig::LAPLACE_SUM,
            Scoring::MleMean => ScoringConfig::MLE_MEAN,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum LabelCodingOpt {
    #[default]
    Optimal,
    Uniform,
}

impl From<LabelCodingOpt> for LabelCoding {
    fn from(c: LabelCodingOpt) -> Self {
        match c {
            LabelCodingOpt::Optimal => LabelCoding::Optimal,
            LabelCodingOpt::Uniform => LabelCoding::Uniform,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Costs {
    pub hypothesis_bits: f64,
    pub data_bits: f64,
    pub total_bits: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AvcCounts {
    pub n_records: u64,
    /// Per attribute, the count of every domain value.
    pub counts: Vec<Vec<u64>>,
}

impl AvcCounts {
    fn of(m: &AvcModel) -> Self {
        Self {
            n_records: m.n_records(),
            counts: m.per_attribute().iter().map(|h| h.counts().to_vec()).collect(),
        }
    }

    fn model(&self, scoring: ScoringConfig) -> Result<AvcModel> {
        let per_attribute = self
            .counts
            .iter()
            .map(|c| CategoricalHypothesis::with_sample_size(c.clone(), self.n_records))
            .collect::<mdlad_core::Result<Vec<_>>>()?;
        Ok(AvcModel::from_parts(per_attribute, scoring)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExternComponent {
    pub hcost_bits: f64,
    /// The coded records the component was fitted on.
    pub rows: Vec<Vec<u32>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub k: usize,
    pub restart: usize,
    pub seed: u64,
    pub total_cost_bits: f64,
    pub iterations: usize,
    pub effective_k: usize,
    pub converged: bool,
}

impl From<&RunSummary> for RunRecord {
    fn from(r: &RunSummary) -> Self {
        Self {
            k: r.k,
            restart: r.restart,
            seed: r.seed,
            total_cost_bits: r.total_cost,
            iterations: r.iterations,
            effective_k: r.effective_k,
            converged: r.converged,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KCost {
    pub k: usize,
    pub total_cost_bits: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mixture<C> {
    pub k: usize,
    pub requested_k: usize,
    pub label_coding: LabelCodingOpt,
    /// Cluster sizes the label code was fitted on.
    pub label_counts: Vec<u64>,
    pub n_records: u64,
    pub components: Vec<C>,
    pub assignments: Vec<usize>,
    /// Best cost over restarts for every `k` explored.
    pub per_k_costs: Vec<KCost>,
    pub runs: Vec<RunRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "kebab-case")]
pub enum ModelBody {
    Avc(AvcCounts),
    MixtureAvc(Mixture<AvcCounts>),
    MixtureExtern {
        descriptor: Descriptor,
        #[serde(flatten)]
        mixture: Mixture<ExternComponent>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub format: String,
    pub version: u32,
    pub scoring: Scoring,
    /// Whether multi-valued columns are expanded to indicators before coding.
    pub one_hot: bool,
    pub columns: Vec<Column>,
    pub seed: u64,
    pub rng: Option<String>,
    pub costs: Costs,
    #[serde(flatten)]
    pub body: ModelBody,
}

fn label_counts(h: &LabelModel) -> Vec<u64> {
    match h {
        LabelModel::Categorical(c) => c.counts().to_vec(),
        // Uniform labels ignore cluster sizes; only K matters.
        LabelModel::Uniform(u) => vec![0; u.domain_size() as usize],
    }
}

fn costs<H: Hypothesis<Item = [u32]>>(h: &H, total: f64) -> Costs {
    let hypothesis_bits = h.hypothesis_cost();
    Costs {
        hypothesis_bits,
        data_bits: total - hypothesis_bits,
        total_bits: total,
    }
}

fn mixture_of<H, C>(
    report: &FitReport<H>,
    coding: LabelCodingOpt,
    component: impl Fn(&H) -> C,
) -> Mixture<C> {
    let h = &report.hypothesis;
    Mixture {
        k: h.k(),
        requested_k: report.requested_k,
        label_coding: coding,
        label_counts: label_counts(h.labels()),
        n_records: h.dataset_size(),
        components: h.components().iter().map(component).collect(),
        assignments: report.assignments.clone(),
        per_k_costs: report
            .per_k_costs
            .iter()
            .map(|(&k, &total_cost_bits)| KCost { k, total_cost_bits })
            .collect(),
        runs: report.runs.iter().map(RunRecord::from).collect(),
    }
}

impl ModelFile {
    /// `data` must be the table the model was fitted on (after any one-hot
    /// expansion); it is needed to report the data cost.
    pub fn avc(
        columns: Vec<Column>,
        one_hot: bool,
        model: &AvcModel,
        data: &CodedTable,
        scoring: Scoring,
        seed: u64,
    ) -> Result<Self> {
        let data_bits: f64 = model.data_cost(&data.row_refs())?;
        let hypothesis_bits = model.hypothesis_cost();
        Ok(Self {
            format: FORMAT.into(),
            version: VERSION,
            scoring,
            one_hot,
            columns,
            seed,
            rng: None,
            costs: Costs {
                hypothesis_bits,
                data_bits,
                total_bits: hypothesis_bits + data_bits,
            },
            body: ModelBody::Avc(AvcCounts::of(model)),
        })
    }

    pub fn mixture_avc(
        columns: Vec<Column>,
        one_hot: bool,
        report: &FitReport<AvcModel>,
        coding: LabelCodingOpt,
    ) -> Self {
        Self {
            format: FORMAT.into(),
            version: VERSION,
            scoring: Scoring::LaplaceSum,
            one_hot,
            columns,
            seed: report.seed,
            rng: Some(report.rng.into()),
            costs: costs(&report.hypothesis, report.total_cost_bits),
            body: ModelBody::MixtureAvc(mixture_of(report, coding, AvcCounts::of)),
        }
    }

    pub fn mixture_extern(
        columns: Vec<Column>,
        one_hot: bool,
        report: &FitReport<ExternModelHandle>,
        coding: LabelCodingOpt,
        descriptor: Descriptor,
    ) -> Self {
        let component = |h: &ExternModelHandle| ExternComponent {
            hcost_bits: h.hypothesis_cost(),
            rows: h.fitted_rows().map(<[_]>::to_vec).unwrap_or_default(),
        };
        Self {
            format: FORMAT.into(),
            version: VERSION,
            scoring: Scoring::LaplaceSum,
            one_hot,
            columns,
            seed: report.seed,
            rng: Some(report.rng.into()),
            costs: costs(&report.hypothesis, report.total_cost_bits),
            body: ModelBody::MixtureExtern {
                descriptor,
                mixture: mixture_of(report, coding, component),
            },
        }
    }

    pub fn kind(&self) -> &'static str {
        match self.body {
            ModelBody::Avc(_) => "avc",
            ModelBody::MixtureAvc(_) => "mixture-avc",
            ModelBody::MixtureExtern { .. } => "mixture-extern",
        }
    }

    /// Columns of the coded table the model scores.
    pub fn coded_columns(&self) -> Vec<Column> {
        if self.one_hot {
            one_hot_columns(&self.columns)
        } else {
            self.columns.clone()
        }
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut text = serde_json::to_string_pretty(self).map_err(json_err(path))?;
        text.push('\n');
        std::fs::write(path, text).map_err(io_err(path))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        let m: Self = serde_json::from_str(&text).map_err(json_err(path))?;
        if m.format != FORMAT {
            return Err(Error::InvalidModel(format!("unknown format {:?}", m.format)));
        }
        if m.version != VERSION {
            return Err(Error::InvalidModel(format!("unsupported version {}", m.version)));
        }
        Ok(m)
    }

    /// Rebuilds the fitted model. External components are refitted on their
    /// stored records, which runs the external tool once per component.
    pub fn instantiate(&self) -> Result<LoadedModel> {
        let arities: Vec<u32> = self.coded_columns().iter().map(Column::arity).collect();
        let check_width = |counts: &AvcCounts| {
            if counts.counts.len() != arities.len() {
                return Err(Error::InvalidModel(format!(
                    "{} attribute counts for {} coded columns",
                    counts.counts.len(),
                    arities.len()
                )));
            }
            Ok(())
        };
        Ok(match &self.body {
            ModelBody::Avc(c) => {
                check_width(c)?;
                LoadedModel::Avc(c.model(self.scoring.into())?)
            }
            ModelBody::MixtureAvc(m) => {
                let comps = m
                    .components
                    .iter()
                    .map(|c| {
                        check_width(c)?;
                        c.model(ScoringConfig::LAPLACE_SUM)
                    })
                    .collect::<Result<Vec<_>>>()?;
                LoadedModel::MixtureAvc(mixture_hypothesis(m, comps)?)
            }
            ModelBody::MixtureExtern {
                descriptor,
                mixture,
            } => {
                let learner =
                    crate::extern_adapter::ExternLearner::new(descriptor.clone(), arities.clone());
                let comps = mixture
                    .components
                    .iter()
                    .map(|c| {
                        let rows: Vec<&[u32]> = c.rows.iter().map(Vec::as_slice).collect();
                        Ok(learner.fit_handle(&rows)?)
                    })
                    .collect::<Result<Vec<_>>>()?;
                LoadedModel::MixtureExtern(mixture_hypothesis(mixture, comps)?)
            }
        })
    }
}

fn mixture_hypothesis<C, H>(m: &Mixture<C>, components: Vec<H>) -> Result<MixtureHypothesis<H>> {
    let labels = LabelModel::fit(m.label_coding.into(), &m.label_counts)?;
    Ok(MixtureHypothesis::new(labels, components, m.n_records)?)
}

/// A model ready to score coded records.
#[derive(Debug, Clone)]
pub enum LoadedModel {
    Avc(AvcModel),
    MixtureAvc(MixtureHypothesis<AvcModel>),
    MixtureExtern(MixtureHypothesis<ExternModelHandle>),
}

impl LoadedModel {
    pub fn score_all(&self, data: &CodedTable) -> Result<ScoredRanking> {
        Ok(match self {
            Self::Avc(m) => m.score_all(data)?,
            Self::MixtureAvc(h) => h.score_all(&data.row_refs())?,
            Self::MixtureExtern(h) => h.score_all(&data.row_refs())?,
        })
    }
}
