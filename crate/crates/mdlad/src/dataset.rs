//! Categorical datasets: CSV ingestion, value coding and one-hot expansion.
//!
//! Every column's domain lists its distinct values in order of first
//! appearance, and cells are stored as indices into that domain. Keeping the
//! order fixed makes codelengths and tie-breaks reproducible from the file
//! alone.

use std::collections::HashMap;
use std::path::Path;

use mdlad_core::CodedTable;
use serde::{Deserialize, Serialize};

use crate::error::{csv_err, Error, Result};

/// A named column and its ordered domain.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    pub domain: Vec<String>,
}

impl Column {
    pub fn arity(&self) -> u32 {
        self.domain.len() as u32
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CategoricalDataset {
    columns: Vec<Column>,
    table: CodedTable,
    labels: Option<Vec<bool>>,
    label_column: Option<String>,
}

impl CategoricalDataset {
    /// Builds a dataset from already-coded cells.
    pub fn new(columns: Vec<Column>, table: CodedTable) -> Result<Self> {
        if columns.len() != table.width() {
            return Err(Error::ColumnMismatch {
                expected: columns.len(),
                found: table.width(),
                names: columns.iter().map(|c| c.name.clone()).collect(),
            });
        }
        for (c, &a) in columns.iter().zip(table.arities()) {
            if c.arity() != a {
                return Err(Error::InvalidModel(format!(
                    "column {:?} has {} values but arity {a}",
                    c.name,
                    c.domain.len()
                )));
            }
        }
        Ok(Self {
            columns,
            table,
            labels: None,
            label_column: None,
        })
    }

    /// Attaches ground truth; `labels[i]` is true when record `i` is an anomaly.
    pub fn with_labels(mut self, labels: Vec<bool>, column: Option<String>) -> Result<Self> {
        if labels.len() != self.n_records() {
            return Err(mdlad_core::Error::LengthMismatch {
                scores: self.n_records(),
                labels: labels.len(),
            }
            .into());
        }
        self.labels = Some(labels);
        self.label_column = column;
        Ok(self)
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn column_names(&self) -> Vec<&str> {
        self.columns.iter().map(|c| c.name.as_str()).collect()
    }

    pub fn table(&self) -> &CodedTable {
        &self.table
    }

    pub fn labels(&self) -> Option<&[bool]> {
        self.labels.as_deref()
    }

    pub fn label_column(&self) -> Option<&str> {
        self.label_column.as_deref()
    }

    pub fn n_records(&self) -> usize {
        self.table.n_rows()
    }

    pub fn n_attributes(&self) -> usize {
        self.columns.len()
    }

    /// Cell values as strings, row by row.
    pub fn decoded_rows(&self) -> impl Iterator<Item = Vec<&str>> + '_ {
        self.table.rows().map(move |r| {
            r.iter()
                .zip(&self.columns)
                .map(|(&v, c)| c.domain[v as usize].as_str())
                .collect()
        })
    }

    /// Writes the records (and no labels) as CSV with a header row.
    pub fn write_csv(&self, path: &Path, delimiter: u8) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .delimiter(delimiter)
            .from_path(path)
            .map_err(csv_err(path))?;
        w.write_record(self.column_names()).map_err(csv_err(path))?;
        for row in self.decoded_rows() {
            w.write_record(row).map_err(csv_err(path))?;
        }
        w.flush().map_err(|e| csv_err(path)(e.into()))?;
        Ok(())
    }
}

/// How to read a delimited file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoadOptions {
    pub has_header: bool,
    /// Column holding ground truth. With a header this is a column name;
    /// without one it is a 0-based column index.
    pub label_column: Option<String>,
    /// Label value marking an anomaly; every other value is normal.
    pub anomaly_value: String,
    pub delimiter: u8,
}

impl Default for LoadOptions {
    fn default() -> Self {
        Self {
            has_header: true,
            label_column: None,
            anomaly_value: "1".to_owned(),
            delimiter: b',',
        }
    }
}

/// Raw string cells plus header, before coding.
struct RawTable {
    names: Vec<String>,
    rows: Vec<Vec<String>>,
    labels: Option<Vec<bool>>,
}

fn read_raw(path: &Path, opts: &LoadOptions) -> Result<RawTable> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(opts.has_header)
        .delimiter(opts.delimiter)
        .flexible(true)
        .from_path(path)
        .map_err(csv_err(path))?;

    let header: Option<Vec<String>> = if opts.has_header {
        let h = reader.headers().map_err(csv_err(path))?;
        Some(h.iter().map(str::to_owned).collect())
    } else {
        None
    };

    let mut rows: Vec<Vec<String>> = Vec::new();
    let mut width = header.as_ref().map(Vec::len);
    for record in reader.records() {
        let record = record.map_err(csv_err(path))?;
        let line = record.position().map_or(0, |p| p.line());
        let expected = *width.get_or_insert(record.len());
        if record.len() != expected {
            return Err(Error::RaggedRow {
                path: path.to_owned(),
                line,
                expected,
                found: record.len(),
            });
        }
        rows.push(record.iter().map(str::to_owned).collect());
    }
    if rows.is_empty() {
        return Err(Error::NoRecords {
            path: path.to_owned(),
        });
    }
    let width = width.unwrap_or(0);
    let mut names = header.unwrap_or_else(|| (0..width).map(|j| format!("c{j}")).collect());

    let labels = match &opts.label_column {
        None => None,
        Some(label) => {
            let idx = if opts.has_header {
                names.iter().position(|n| n == label)
            } else {
                label.parse::<usize>().ok().filter(|&j| j < width)
            }
            .ok_or_else(|| Error::MissingLabelColumn(label.clone()))?;
            names.remove(idx);
            Some(
                rows.iter_mut()
                    .map(|r| r.remove(idx) == opts.anomaly_value)
                    .collect(),
            )
        }
    };
    Ok(RawTable {
        names,
        rows,
        labels,
    })
}

/// Loads a delimited file, building each domain from the observed values.
pub fn load_csv(path: impl AsRef<Path>, opts: &LoadOptions) -> Result<CategoricalDataset> {
    let path = path.as_ref();
    let raw = read_raw(path, opts)?;
    let width = raw.names.len();
    let mut index: Vec<HashMap<String, u32>> = vec![HashMap::new(); width];
    let mut domains: Vec<Vec<String>> = vec![Vec::new(); width];
    let mut cells = Vec::with_capacity(raw.rows.len() * width);
    for row in &raw.rows {
        for (j, v) in row.iter().enumerate() {
            let next = domains[j].len() as u32;
            let code = *index[j].entry(v.clone()).or_insert_with(|| {
                domains[j].push(v.clone());
                next
            });
            cells.push(code);
        }
    }
    let columns: Vec<Column> = raw
        .names
        .into_iter()
        .zip(domains)
        .map(|(name, domain)| Column { name, domain })
        .collect();
    finish(columns, raw.rows.len(), cells, raw.labels, opts)
}

/// Loads a delimited file against fixed domains, e.g. those of a fitted
/// model. Column names and order must match; unseen values are an error.
pub fn load_csv_with_columns(
    path: impl AsRef<Path>,
    opts: &LoadOptions,
    columns: &[Column],
) -> Result<CategoricalDataset> {
    let path = path.as_ref();
    let raw = read_raw(path, opts)?;
    let mismatch = || Error::ColumnMismatch {
        expected: columns.len(),
        found: raw.names.len(),
        names: columns.iter().map(|c| c.name.clone()).collect(),
    };
    if raw.names.len() != columns.len() {
        return Err(mismatch());
    }
    if opts.has_header && raw.names.iter().zip(columns).any(|(a, c)| *a != c.name) {
        return Err(mismatch());
    }
    let index: Vec<HashMap<&str, u32>> = columns
        .iter()
        .map(|c| {
            c.domain
                .iter()
                .enumerate()
                .map(|(i, v)| (v.as_str(), i as u32))
                .collect()
        })
        .collect();
    let mut cells = Vec::with_capacity(raw.rows.len() * columns.len());
    for row in &raw.rows {
        for (j, v) in row.iter().enumerate() {
            let code = index[j].get(v.as_str()).ok_or_else(|| Error::UnseenValue {
                column: columns[j].name.clone(),
                value: v.clone(),
            })?;
            cells.push(*code);
        }
    }
    finish(columns.to_vec(), raw.rows.len(), cells, raw.labels, opts)
}

fn finish(
    columns: Vec<Column>,
    n_rows: usize,
    cells: Vec<u32>,
    labels: Option<Vec<bool>>,
    opts: &LoadOptions,
) -> Result<CategoricalDataset> {
    let arities = columns.iter().map(|c| c.arity().max(1)).collect();
    let table = CodedTable::from_cells(arities, n_rows, cells)?;
    let d = CategoricalDataset::new(columns, table)?;
    match labels {
        Some(l) => d.with_labels(l, opts.label_column.clone()),
        None => Ok(d),
    }
}

/// Columns produced by [`one_hot_encode`] for the given input columns.
pub fn one_hot_columns(columns: &[Column]) -> Vec<Column> {
    let mut out = Vec::new();
    for c in columns {
        if c.domain.len() <= 2 {
            out.push(c.clone());
        } else {
            for v in &c.domain {
                out.push(Column {
                    name: format!("{}={}", c.name, v),
                    domain: vec!["0".to_owned(), "1".to_owned()],
                });
            }
        }
    }
    out
}

/// Replaces every column of arity `k > 2` by `k` value-indicator columns.
/// Columns of arity 1 or 2 pass through unchanged.
pub fn one_hot_encode(d: &CategoricalDataset) -> CategoricalDataset {
    let columns = one_hot_columns(d.columns());
    let arities: Vec<u32> = columns.iter().map(Column::arity).collect();
    let mut cells = Vec::with_capacity(d.n_records() * columns.len());
    for row in d.table().rows() {
        for (&v, c) in row.iter().zip(d.columns()) {
            if c.domain.len() <= 2 {
                cells.push(v);
            } else {
                cells.extend((0..c.arity()).map(|i| u32::from(i == v)));
            }
        }
    }
    let table = CodedTable::from_cells(arities, d.n_records(), cells)
        .expect("indicator cells are within arity");
    CategoricalDataset {
        columns,
        table,
        labels: d.labels.clone(),
        label_column: d.label_column.clone(),
    }
}

/// Reads an `id,label` file (header required); label `1` marks an anomaly.
/// Ids must cover `0..n` exactly once.
pub fn read_labels(path: impl AsRef<Path>) -> Result<Vec<bool>> {
    #[derive(Deserialize)]
    struct Row {
        id: usize,
        label: u8,
    }
    let path = path.as_ref();
    let mut reader = csv::Reader::from_path(path).map_err(csv_err(path))?;
    let mut pairs = Vec::new();
    for row in reader.deserialize::<Row>() {
        let row = row.map_err(csv_err(path))?;
        pairs.push((row.id, row.label != 0));
    }
    let mut labels = vec![None; pairs.len()];
    for (id, l) in pairs {
        match labels.get_mut(id) {
            Some(slot @ None) => *slot = Some(l),
            _ => {
                return Err(Error::InvalidRanking {
                    path: path.to_owned(),
                    reason: format!("label ids must be 0..n without repeats (bad id {id})"),
                })
            }
        }
    }
    Ok(labels.into_iter().map(|l| l.expect("all ids filled")).collect())
}

pub fn write_labels(path: impl AsRef<Path>, labels: &[bool]) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    w.write_record(["id", "label"]).map_err(csv_err(path))?;
    for (i, &l) in labels.iter().enumerate() {
        w.write_record([i.to_string(), u8::from(l).to_string()])
            .map_err(csv_err(path))?;
    }
    w.flush().map_err(|e| csv_err(path)(e.into()))?;
    Ok(())
}
