//! Writing and reading scored rankings.
//!
//! One row per record, best (most anomalous) first, with columns
//! `rank, id, score_bits, label`. Scores are written in the shortest decimal
//! form that parses back to the same `f64`, so a reloaded ranking is
//! bit-identical. `label` is `1` for anomalies, `0` for normal records and
//! empty (`null` in JSON) when ground truth is unknown.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use mdlad_core::ScoredRanking;
use serde::{Deserialize, Serialize};

use crate::error::{csv_err, io_err, json_err, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    /// JSON for `.json` files, CSV otherwise.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("json") => Self::Json,
            _ => Self::Csv,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankingRow {
    pub rank: usize,
    pub id: usize,
    pub score_bits: f64,
    pub label: Option<u8>,
}

/// `labels` is indexed by record id.
pub fn ranking_rows(r: &ScoredRanking, labels: Option<&[bool]>) -> Vec<RankingRow> {
    r.entries()
        .map(|(rank, id, score_bits)| RankingRow {
            rank,
            id,
            score_bits,
            label: labels.and_then(|l| l.get(id)).map(|&a| u8::from(a)),
        })
        .collect()
}

/// Writes `r` to `path`; `labels` is indexed by record id.
pub fn export_ranking(
    r: &ScoredRanking,
    labels: Option<&[bool]>,
    path: impl AsRef<Path>,
    format: Format,
) -> Result<()> {
    let path = path.as_ref();
    let rows = ranking_rows(r, labels);
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
            w.write_record(["rank", "id", "score_bits", "label"])
                .map_err(csv_err(path))?;
            for row in &rows {
                let label = row.label.map(|l| l.to_string()).unwrap_or_default();
                w.write_record([
                    row.rank.to_string(),
                    row.id.to_string(),
                    row.score_bits.to_string(),
                    label,
                ])
                .map_err(csv_err(path))?;
            }
            w.flush().map_err(io_err(path))?;
        }
        Format::Json => {
            let f = File::create(path).map_err(io_err(path))?;
            let mut w = BufWriter::new(f);
            serde_json::to_writer_pretty(&mut w, &rows).map_err(json_err(path))?;
            writeln!(w).map_err(io_err(path))?;
            w.flush().map_err(io_err(path))?;
        }
    }
    Ok(())
}

/// A reloaded ranking; `labels`, when present, is aligned with
/// `ranking.ids()`.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedRanking {
    pub ranking: ScoredRanking,
    pub labels: Option<Vec<bool>>,
}

impl LoadedRanking {
    /// Labels aligned with `ranking.ids()`, looked up from a vector indexed
    /// by record id.
    pub fn align_labels(&self, by_id: &[bool]) -> Option<Vec<bool>> {
        self.ranking.ids().iter().map(|&id| by_id.get(id).copied()).collect()
    }
}

pub fn load_ranking(path: impl AsRef<Path>, format: Format) -> Result<LoadedRanking> {
    let path = path.as_ref();
    let rows: Vec<RankingRow> = match format {
        Format::Csv => {
            let mut r = csv::Reader::from_path(path).map_err(csv_err(path))?;
            r.deserialize().collect::<std::result::Result<_, _>>().map_err(csv_err(path))?
        }
        Format::Json => {
            let f = File::open(path).map_err(io_err(path))?;
            serde_json::from_reader(std::io::BufReader::new(f)).map_err(json_err(path))?
        }
    };
    let invalid = |reason: String| Error::InvalidRanking {
        path: path.to_owned(),
        reason,
    };
    let mut seen = HashSet::new();
    for (i, row) in rows.iter().enumerate() {
        if row.rank != i + 1 {
            return Err(invalid(format!("row {} has rank {}", i + 1, row.rank)));
        }
        if !seen.insert(row.id) {
            return Err(invalid(format!("id {} appears twice", row.id)));
        }
    }
    let labelled = rows.iter().filter(|r| r.label.is_some()).count();
    let labels = if labelled == 0 {
        None
    } else if labelled == rows.len() {
        Some(rows.iter().map(|r| r.label != Some(0)).collect())
    } else {
        return Err(invalid("labels must be given for all rows or none".into()));
    };
    let ids = rows.iter().map(|r| r.id).collect();
    let scores = rows.iter().map(|r| r.score_bits).collect();
    Ok(LoadedRanking {
        ranking: ScoredRanking::with_ids(ids, scores),
        labels,
    })
}
