//! The `mdlad` command line.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use mdlad_core::{fit_avc, AvcLearner, LabeledRanking, MixtureConfig};
use serde_json::json;

use crate::dataset::{
    load_csv, load_csv_with_columns, one_hot_encode, read_labels, write_labels,
    CategoricalDataset, LoadOptions,
};
use crate::export::{export_ranking, load_ranking, Format};
use crate::extern_adapter::{Descriptor, ExternLearner};
use crate::model::{LabelCodingOpt, ModelFile, Scoring};
use crate::sweep::{fit_mixture_parallel, sweep_k, thread_pool, SweepConfig, SweepReport};
use crate::synth::{generate_synthetic, SyntheticSpec, SYNTH_RNG};

#[derive(Debug, Parser)]
#[command(name = "mdlad", version, about = "Anomaly detection on categorical data by compression")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate clustered synthetic data with seeded anomalies.
    Synth(SynthArgs),
    /// Fit a model and write it as JSON.
    Fit(FitArgs),
    /// Score records with a fitted model and write the ranking.
    Score(ScoreArgs),
    /// Compute AUC and nDCG of a ranking against ground truth.
    Eval(EvalArgs),
    /// Fit every k of a schedule and tabulate cost and ranking quality.
    SweepK(SweepArgs),
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// Delimited input file.
    #[arg(long)]
    pub data: PathBuf,
    /// Column holding ground truth (a name, or a 0-based index with --no-header).
    #[arg(long)]
    pub label_column: Option<String>,
    /// Label value that marks an anomaly.
    #[arg(long, default_value = "1")]
    pub anomaly_value: String,
    /// The first line is data, not column names.
    #[arg(long)]
    pub no_header: bool,
    /// Field delimiter (a single ASCII character).
    #[arg(long, default_value = ",")]
    pub delimiter: char,
}

impl DataArgs {
    fn options(&self) -> Result<LoadOptions> {
        if !self.delimiter.is_ascii() {
            bail!("delimiter must be a single ASCII character");
        }
        Ok(LoadOptions {
            has_header: !self.no_header,
            label_column: self.label_column.clone(),
            anomaly_value: self.anomaly_value.clone(),
            delimiter: self.delimiter as u8,
        })
    }

    fn load(&self) -> Result<CategoricalDataset> {
        let d = load_csv(&self.data, &self.options()?)?;
        Ok(d)
    }
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    /// Candidate component counts, strictly ascending.
    #[arg(long, value_delimiter = ',', default_value = "1,2,4,8,16,20")]
    pub k_schedule: Vec<usize>,
    /// Random restarts per k.
    #[arg(long, default_value_t = 10)]
    pub restarts: usize,
    /// Relative improvement below which fitting (and the k search) stops.
    #[arg(long, default_value_t = 1e-3)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 100)]
    pub max_iterations: usize,
    /// How class labels are coded.
    #[arg(long, value_enum, default_value_t = LabelCodingOpt::Optimal)]
    pub label_coding: LabelCodingOpt,
}

impl SearchArgs {
    fn config(&self) -> MixtureConfig {
        MixtureConfig {
            k_schedule: self.k_schedule.clone(),
            restarts: self.restarts,
            epsilon: self.epsilon,
            seed: self.seed,
            max_iterations: self.max_iterations,
            label_coding: self.label_coding.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelKind {
    Avc,
    MixtureAvc,
    MixtureExtern,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// JSON synthetic spec; the other generator flags are ignored except --seed.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// Cluster sizes.
    #[arg(long, value_delimiter = ',', default_value = "334,333,333")]
    pub sizes: Vec<usize>,
    /// Number of binary attributes, split into one active block per cluster.
    #[arg(long, default_value_t = 12)]
    pub attributes: usize,
    /// Seeded anomalies drawn from the mean of the clusters.
    #[arg(long, default_value_t = 3)]
    pub anomalies: usize,
    /// Overrides the spec file's seed when given.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output data CSV.
    #[arg(long)]
    pub out: PathBuf,
    /// Output `id,label` CSV; defaults to `<out stem>.labels.csv`.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// Also write the resolved spec as JSON here.
    #[arg(long)]
    pub spec_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, value_enum, default_value_t = ModelKind::MixtureAvc)]
    pub model: ModelKind,
    #[command(flatten)]
    pub search: SearchArgs,
    /// AVC scoring; mixtures require laplace-sum.
    #[arg(long, value_enum, default_value_t = Scoring::LaplaceSum)]
    pub scoring: Scoring,
    /// Expand multi-valued columns into binary indicators first.
    #[arg(long)]
    pub one_hot: bool,
    /// TOML or JSON descriptor of the external compressor.
    #[arg(long)]
    pub extern_descriptor: Option<PathBuf>,
    /// Where to write the model.
    #[arg(long)]
    pub out: PathBuf,
    /// Print the fit summary as JSON.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    /// Model written by `mdlad fit`.
    #[arg(long)]
    pub model: PathBuf,
    #[command(flatten)]
    pub data: DataArgs,
    /// `id,label` ground truth to copy into the ranking.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// Ranking output path.
    #[arg(long)]
    pub out: PathBuf,
    /// Output format; inferred from the extension when omitted.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Ranking written by `mdlad score`.
    #[arg(long)]
    pub ranking: PathBuf,
    /// `id,label` ground truth; defaults to the ranking's label column.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Truncate nDCG to the top N ranks.
    #[arg(long)]
    pub cutoff: Option<usize>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// `id,label` ground truth (alternatively --label-column).
    #[arg(long)]
    pub labels: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = ModelKind::MixtureAvc)]
    pub model: ModelKind,
    #[command(flatten)]
    pub search: SearchArgs,
    #[arg(long)]
    pub one_hot: bool,
    #[arg(long)]
    pub extern_descriptor: Option<PathBuf>,
    /// Also write the table as CSV (or JSON for a `.json` path).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Print the table as JSON.
    #[arg(long)]
    pub json: bool,
}

/// Parses arguments, runs the command and maps failures to exit code 1.
pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli, &mut std::io::stdout().lock()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

pub fn run(cli: Cli, out: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::Synth(a) => cmd_synth(&a, out),
        Command::Fit(a) => cmd_fit(&a, out),
        Command::Score(a) => cmd_score(&a, out),
        Command::Eval(a) => cmd_eval(&a, out),
        Command::SweepK(a) => cmd_sweep_k(&a, out),
    }
}

fn labels_path_for(out: &Path) -> PathBuf {
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("data");
    out.with_file_name(format!("{stem}.labels.csv"))
}

pub fn cmd_synth(a: &SynthArgs, out: &mut dyn Write) -> Result<()> {
    let mut spec = match &a.spec {
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            serde_json::from_str::<SyntheticSpec>(&text)
                .with_context(|| format!("parsing synthetic spec {}", p.display()))?
        }
        None => SyntheticSpec::blocks(&a.sizes, a.attributes, a.anomalies, 0),
    };
    if let Some(seed) = a.seed {
        spec.seed = seed;
    }
    let (data, labels) = generate_synthetic(&spec)?;
    data.write_csv(&a.out, b',')?;
    let labels_path = a.labels.clone().unwrap_or_else(|| labels_path_for(&a.out));
    write_labels(&labels_path, &labels)?;
    if let Some(p) = &a.spec_out {
        let text = serde_json::to_string_pretty(&spec)?;
        std::fs::write(p, text + "\n").with_context(|| format!("writing {}", p.display()))?;
    }
    writeln!(out, "seed {}", spec.seed)?;
    writeln!(out, "rng {SYNTH_RNG}")?;
    writeln!(
        out,
        "records {} ({} anomalies), attributes {}",
        data.n_records(),
        spec.n_seeded_anomalies,
        data.n_attributes()
    )?;
    writeln!(out, "wrote {} and {}", a.out.display(), labels_path.display())?;
    Ok(())
}

fn descriptor(path: Option<&Path>) -> Result<Descriptor> {
    let p = path.context("--extern-descriptor is required for mixture-extern")?;
    Descriptor::load(p).with_context(|| format!("loading {}", p.display()))
}

fn fmt_bits(x: f64) -> String {
    format!("{x:.6}")
}

pub fn cmd_fit(a: &FitArgs, out: &mut dyn Write) -> Result<()> {
    let raw = a.data.load()?;
    let data = if a.one_hot { one_hot_encode(&raw) } else { raw.clone() };
    let table = data.table();
    let rows = table.row_refs();
    let columns = raw.columns().to_vec();
    let config = a.search.config();

    if a.model != ModelKind::Avc && a.scoring != Scoring::LaplaceSum {
        bail!("mixtures need true codelengths; use --scoring laplace-sum");
    }
    let file = match a.model {
        ModelKind::Avc => {
            let m = fit_avc(table, a.scoring.into())?;
            ModelFile::avc(columns, a.one_hot, &m, table, a.scoring, a.search.seed)?
        }
        ModelKind::MixtureAvc => {
            config.validate()?;
            let pool = thread_pool()?;
            let report = fit_mixture_parallel(&rows, &AvcLearner::for_table(table), &config, &pool)?;
            ModelFile::mixture_avc(columns, a.one_hot, &report, a.search.label_coding)
        }
        ModelKind::MixtureExtern => {
            config.validate()?;
            let d = descriptor(a.extern_descriptor.as_deref())?;
            let learner = ExternLearner::new(d.clone(), table.arities().to_vec());
            let pool = thread_pool()?;
            let report = fit_mixture_parallel(&rows, &learner, &config, &pool)?;
            ModelFile::mixture_extern(columns, a.one_hot, &report, a.search.label_coding, d)
        }
    };
    file.save(&a.out)?;

    let mixture = match &file.body {
        crate::model::ModelBody::Avc(_) => None,
        crate::model::ModelBody::MixtureAvc(m) => Some((m.k, m.requested_k, m.per_k_costs.clone())),
        crate::model::ModelBody::MixtureExtern { mixture: m, .. } => {
            Some((m.k, m.requested_k, m.per_k_costs.clone()))
        }
    };
    if a.json {
        let mut v = json!({
            "model": file.kind(),
            "seed": file.seed,
            "rng": file.rng,
            "records": data.n_records(),
            "attributes": data.n_attributes(),
            "hypothesis_bits": file.costs.hypothesis_bits,
            "data_bits": file.costs.data_bits,
            "total_bits": file.costs.total_bits,
            "out": a.out,
        });
        if let Some((k, requested, per_k)) = &mixture {
            v["chosen_k"] = json!(k);
            v["requested_k"] = json!(requested);
            v["per_k_costs"] = json!(per_k);
        }
        writeln!(out, "{}", serde_json::to_string_pretty(&v)?)?;
    } else {
        writeln!(out, "model       {}", file.kind())?;
        writeln!(out, "seed        {}", file.seed)?;
        if let Some(rng) = &file.rng {
            writeln!(out, "rng         {rng}")?;
        }
        writeln!(out, "records     {}", data.n_records())?;
        writeln!(out, "attributes  {}", data.n_attributes())?;
        if let Some((k, requested, per_k)) = &mixture {
            writeln!(out, "chosen K    {k} (from k = {requested})")?;
            for c in per_k {
                writeln!(out, "  k = {:<4}  {} bits", c.k, fmt_bits(c.total_cost_bits))?;
            }
        }
        writeln!(out, "hypothesis  {} bits", fmt_bits(file.costs.hypothesis_bits))?;
        writeln!(out, "data        {} bits", fmt_bits(file.costs.data_bits))?;
        writeln!(out, "total       {} bits", fmt_bits(file.costs.total_bits))?;
        writeln!(out, "wrote {}", a.out.display())?;
    }
    Ok(())
}

pub fn cmd_score(a: &ScoreArgs, out: &mut dyn Write) -> Result<()> {
    let file = ModelFile::load(&a.model)?;
    let raw = load_csv_with_columns(&a.data.data, &a.data.options()?, &file.columns)?;
    let data = if file.one_hot { one_hot_encode(&raw) } else { raw };
    let model = file.instantiate()?;
    let ranking = model.score_all(data.table())?;

    let labels = match &a.labels {
        Some(p) => Some(read_labels(p)?),
        None => data.labels().map(<[bool]>::to_vec),
    };
    if let Some(l) = &labels {
        if l.len() != data.n_records() {
            bail!("{} labels for {} records", l.len(), data.n_records());
        }
    }
    let format = a.format.unwrap_or_else(|| Format::from_path(&a.out));
    export_ranking(&ranking, labels.as_deref(), &a.out, format)?;

    let top = ranking.entries().next();
    if a.json {
        let v = json!({
            "model": file.kind(),
            "seed": file.seed,
            "records": ranking.len(),
            "top_id": top.map(|t| t.1),
            "top_score_bits": top.map(|t| t.2),
            "out": a.out,
        });
        writeln!(out, "{}", serde_json::to_string_pretty(&v)?)?;
    } else {
        writeln!(out, "model   {}", file.kind())?;
        writeln!(out, "seed    {}", file.seed)?;
        writeln!(out, "scored  {} records", ranking.len())?;
        if let Some((_, id, s)) = top {
            writeln!(out, "top     record {id} at {} bits", fmt_bits(s))?;
        }
        writeln!(out, "wrote {}", a.out.display())?;
    }
    Ok(())
}

pub fn cmd_eval(a: &EvalArgs, out: &mut dyn Write) -> Result<()> {
    let format = a.format.unwrap_or_else(|| Format::from_path(&a.ranking));
    let loaded = load_ranking(&a.ranking, format)?;
    let labels = match &a.labels {
        Some(p) => {
            let by_id = read_labels(p)?;
            loaded
                .align_labels(&by_id)
                .context("labels file does not cover every ranked id")?
        }
        None => loaded
            .labels
            .clone()
            .context("the ranking has no labels; pass --labels")?,
    };
    let scores = loaded.ranking.scores();
    let lr = LabeledRanking::new(scores, &labels)?;
    let auc_v = lr.auc()?;
    let ndcg_v = lr.ndcg(a.cutoff)?;
    if a.json {
        let v = json!({
            "auc": auc_v,
            "ndcg": ndcg_v,
            "cutoff": a.cutoff,
            "records": labels.len(),
            "anomalies": lr.n_anomalies(),
        });
        writeln!(out, "{}", serde_json::to_string_pretty(&v)?)?;
    } else {
        writeln!(out, "AUC {auc_v:.4}")?;
        writeln!(out, "nDCG {ndcg_v:.4}")?;
    }
    Ok(())
}

fn opt4(x: Option<f64>) -> String {
    x.map_or_else(|| "NA".to_owned(), |v| format!("{v:.4}"))
}

fn opt6(x: Option<f64>) -> String {
    x.map_or_else(String::new, |v| format!("{v:.6}"))
}

fn write_table(report: &SweepReport, path: &Path) -> Result<()> {
    if Format::from_path(path) == Format::Json {
        let text = serde_json::to_string_pretty(report)?;
        std::fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))?;
        return Ok(());
    }
    let mut w = csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
    w.write_record([
        "k",
        "median_cost_bits",
        "relative_cost",
        "median_auc",
        "max_auc",
        "median_ndcg",
        "max_ndcg",
    ])?;
    for r in &report.rows {
        w.write_record([
            r.k.to_string(),
            format!("{:.6}", r.median_cost_bits),
            format!("{:.6}", r.relative_cost),
            opt6(r.median_auc),
            opt6(r.max_auc),
            opt6(r.median_ndcg),
            opt6(r.max_ndcg),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn cmd_sweep_k(a: &SweepArgs, out: &mut dyn Write) -> Result<()> {
    let raw = a.data.load()?;
    let data = if a.one_hot { one_hot_encode(&raw) } else { raw };
    let labels = match &a.labels {
        Some(p) => Some(read_labels(p)?),
        None => data.labels().map(<[bool]>::to_vec),
    };
    let table = data.table();
    let rows = table.row_refs();
    let config = SweepConfig::from_mixture(&a.search.config());
    let pool = thread_pool()?;
    let report = match a.model {
        ModelKind::Avc | ModelKind::MixtureAvc => sweep_k(
            &rows,
            labels.as_deref(),
            &AvcLearner::for_table(table),
            &config,
            &pool,
        )?,
        ModelKind::MixtureExtern => {
            let d = descriptor(a.extern_descriptor.as_deref())?;
            let learner = ExternLearner::new(d, table.arities().to_vec());
            sweep_k(&rows, labels.as_deref(), &learner, &config, &pool)?
        }
    };
    if let Some(p) = &a.out {
        write_table(&report, p)?;
    }
    if a.json {
        writeln!(out, "{}", serde_json::to_string_pretty(&report)?)?;
        return Ok(());
    }
    writeln!(out, "seed {}", report.seed)?;
    writeln!(out, "k=1 cost {} bits", fmt_bits(report.base_cost_bits))?;
    writeln!(
        out,
        "{:>4}  {:>18}  {:>13}  {:>10}  {:>7}  {:>11}  {:>8}",
        "k", "median_cost_bits", "relative_cost", "median_auc", "max_auc", "median_ndcg", "max_ndcg"
    )?;
    for r in &report.rows {
        writeln!(
            out,
            "{:>4}  {:>18.6}  {:>13.6}  {:>10}  {:>7}  {:>11}  {:>8}",
            r.k,
            r.median_cost_bits,
            r.relative_cost,
            opt4(r.median_auc),
            opt4(r.max_auc),
            opt4(r.median_ndcg),
            opt4(r.max_ndcg)
        )?;
    }
    if let Some(p) = &a.out {
        writeln!(out, "wrote {}", p.display())?;
    }
    Ok(())
}
