use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Rectangular table of integer-coded categorical values.
///
/// Column `j` takes values in `0..arities[j]`. The arities are fixed once for
/// the whole dataset so every model fitted on a subset of the rows codes the
/// same observation space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodedTable {
    arities: Vec<u32>,
    n_rows: usize,
    cells: Vec<u32>,
}

impl CodedTable {
    pub fn from_rows<R: AsRef<[u32]>>(arities: Vec<u32>, rows: &[R]) -> Result<Self> {
        let width = arities.len();
        let mut cells = Vec::with_capacity(rows.len() * width);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != width {
                return Err(Error::RaggedRow {
                    row: i,
                    expected: width,
                    found: row.len(),
                });
            }
            cells.extend_from_slice(row);
        }
        Self::from_cells(arities, rows.len(), cells)
    }

    pub fn from_cells(arities: Vec<u32>, n_rows: usize, cells: Vec<u32>) -> Result<Self> {
        let width = arities.len();
        if cells.len() != n_rows * width {
            return Err(Error::InvalidConfig("cell count does not match table shape"));
        }
        if arities.contains(&0) {
            return Err(Error::InvalidConfig("column arity must be at least 1"));
        }
        if width > 0 {
            for row in cells.chunks_exact(width) {
                for (&v, &a) in row.iter().zip(&arities) {
                    if v >= a {
                        return Err(Error::UnknownCategory { value: v, arity: a });
                    }
                }
            }
        }
        Ok(Self {
            arities,
            n_rows,
            cells,
        })
    }

    /// Builds a table whose arities are `max + 1` of each column.
    pub fn infer<R: AsRef<[u32]>>(rows: &[R]) -> Result<Self> {
        let width = rows.first().map_or(0, |r| r.as_ref().len());
        let mut arities = alloc::vec![1u32; width];
        for row in rows {
            for (a, &v) in arities.iter_mut().zip(row.as_ref()) {
                *a = (*a).max(v.saturating_add(1));
            }
        }
        Self::from_rows(arities, rows)
    }

    pub fn arities(&self) -> &[u32] {
        &self.arities
    }

    pub fn width(&self) -> usize {
        self.arities.len()
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn is_empty(&self) -> bool {
        self.n_rows == 0
    }

    pub fn row(&self, i: usize) -> &[u32] {
        let w = self.width();
        &self.cells[i * w..(i + 1) * w]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[u32]> + '_ {
        (0..self.n_rows).map(move |i| self.row(i))
    }

    /// Borrowed rows, the form learners consume.
    pub fn row_refs(&self) -> Vec<&[u32]> {
        self.rows().collect()
    }

    pub fn column(&self, j: usize) -> Vec<u32> {
        self.rows().map(|r| r[j]).collect()
    }
}
