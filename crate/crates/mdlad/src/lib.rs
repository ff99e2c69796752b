//! Dataset IO, external compressors and the `mdlad` command line, on top of
//! the `mdlad-core` codelength models.
//!
//! - [`dataset`]: CSV ingestion into integer-coded categorical tables,
//!   one-hot expansion and ground-truth labels.
//! - [`synth`]: clustered synthetic data with seeded anomalies.
//! - [`export`]: ranking files in CSV or JSON.
//! - [`extern_adapter`]: any external compressor speaking a small file
//!   protocol, usable as a mixture component.
//! - [`model`]: JSON model files.
//! - [`sweep`]: parallel restarts and the sweep over component counts.
//! - [`cli`]: the `mdlad` binary.

pub mod cli;
pub mod dataset;
pub mod error;
pub mod export;
pub mod extern_adapter;
pub mod model;
pub mod sweep;
pub mod synth;

pub use dataset::{
    load_csv, load_csv_with_columns, one_hot_encode, read_labels, write_labels,
    CategoricalDataset, Column, LoadOptions,
};
pub use error::{Error, Result};
pub use export::{export_ranking, load_ranking, Format, LoadedRanking};
pub use extern_adapter::{AdapterError, Descriptor, ExternLearner, ExternModelHandle};
pub use model::{LoadedModel, ModelFile, Scoring};
pub use sweep::{fit_mixture_parallel, sweep_k, thread_pool, SweepConfig, SweepReport, SweepRow};
pub use synth::{generate_synthetic, Attribute, SyntheticSpec};
