use std::ops::Range;

use crate::error::{Error, Result};
use crate::semiring::{Scalar, Semiring};

/// Row/column index type. Indices are 64-bit on every supported target.
pub type Index = usize;

const _: () = assert!(usize::BITS == 64, "64-bit indices required");

/// Column storage layout.
///
/// `Csc` keeps one (possibly zero-length) range per column; `Dcsc` additionally
/// stores the list of non-empty column ids and omits empty columns entirely,
/// which is what per-process slices want once they become hypersparse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StorageMode {
    Csc,
    #[default]
    Dcsc,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Triplet<T> {
    pub row: Index,
    pub col: Index,
    pub val: T,
}

impl<T> Triplet<T> {
    pub fn new(row: Index, col: Index, val: T) -> Self {
        Triplet { row, col, val }
    }
}

/// Compressed-column sparse matrix, optionally doubly compressed.
///
/// Row indices within each column are strictly increasing. Equality compares the
/// logical matrix, so a CSC and a DCSC copy of the same entries are equal.
#[derive(Debug, Clone)]
pub struct SparseMatrix<T> {
    nrows: Index,
    ncols: Index,
    mode: StorageMode,
    /// DCSC only: ids of stored (non-empty) columns, strictly increasing.
    colids: Vec<Index>,
    /// Offsets into `rowidx`/`vals`, one more than the number of stored columns.
    colptr: Vec<usize>,
    rowidx: Vec<Index>,
    vals: Vec<T>,
}

/// Appends columns in ascending id order and produces a matrix in either mode.
pub(crate) struct ColumnBuilder<T> {
    nrows: Index,
    ncols: Index,
    colids: Vec<Index>,
    colptr: Vec<usize>,
    rowidx: Vec<Index>,
    vals: Vec<T>,
}

impl<T: Scalar> ColumnBuilder<T> {
    pub(crate) fn new(nrows: Index, ncols: Index) -> Self {
        ColumnBuilder {
            nrows,
            ncols,
            colids: Vec::new(),
            colptr: vec![0],
            rowidx: Vec::new(),
            vals: Vec::new(),
        }
    }

    pub(crate) fn with_capacity(nrows: Index, ncols: Index, nnz: usize) -> Self {
        let mut b = Self::new(nrows, ncols);
        b.rowidx.reserve(nnz);
        b.vals.reserve(nnz);
        b
    }

    /// Rows must be strictly increasing; empty columns are skipped.
    pub(crate) fn push_column(&mut self, col: Index, rows: &[Index], vals: &[T]) {
        debug_assert_eq!(rows.len(), vals.len());
        debug_assert!(col < self.ncols);
        debug_assert!(self.colids.last().is_none_or(|&c| c < col));
        debug_assert!(rows.windows(2).all(|w| w[0] < w[1]));
        if rows.is_empty() {
            return;
        }
        self.colids.push(col);
        self.rowidx.extend_from_slice(rows);
        self.vals.extend_from_slice(vals);
        self.colptr.push(self.rowidx.len());
    }

    pub(crate) fn push_entry_column(&mut self, col: Index, entries: impl IntoIterator<Item = (Index, T)>) {
        debug_assert!(self.colids.last().is_none_or(|&c| c < col));
        let start = self.rowidx.len();
        for (r, v) in entries {
            self.rowidx.push(r);
            self.vals.push(v);
        }
        if self.rowidx.len() > start {
            self.colids.push(col);
            self.colptr.push(self.rowidx.len());
        }
    }

    pub(crate) fn finish(self, mode: StorageMode) -> SparseMatrix<T> {
        let dcsc = SparseMatrix {
            nrows: self.nrows,
            ncols: self.ncols,
            mode: StorageMode::Dcsc,
            colids: self.colids,
            colptr: self.colptr,
            rowidx: self.rowidx,
            vals: self.vals,
        };
        dcsc.into_mode(mode)
    }
}

impl<T: Scalar> SparseMatrix<T> {
    pub fn empty(nrows: Index, ncols: Index, mode: StorageMode) -> Self {
        ColumnBuilder::new(nrows, ncols).finish(mode)
    }

    /// Builds a canonical matrix, summing duplicates with the semiring's `add`.
    ///
    /// Duplicates are summed in input order. Sums that come out as the
    /// semiring zero are kept; see [`SparseMatrix::prune_zeros`].
    pub fn from_triplets<S>(
        nrows: Index,
        ncols: Index,
        triplets: impl IntoIterator<Item = Triplet<T>>,
        mode: StorageMode,
        semiring: &S,
    ) -> Result<Self>
    where
        S: Semiring<Scalar = T>,
    {
        let mut ts: Vec<Triplet<T>> = triplets.into_iter().collect();
        if let Some(t) = ts.iter().find(|t| t.row >= nrows || t.col >= ncols) {
            return Err(Error::Index(format!(
                "triplet ({}, {}) outside {}x{} matrix",
                t.row, t.col, nrows, ncols
            )));
        }
        // stable: duplicate order is preserved for the summation below
        ts.sort_by_key(|t| (t.col, t.row));
        let mut b = ColumnBuilder::with_capacity(nrows, ncols, ts.len());
        let mut i = 0;
        while i < ts.len() {
            let col = ts[i].col;
            let mut entries: Vec<(Index, T)> = Vec::new();
            while i < ts.len() && ts[i].col == col {
                let t = ts[i];
                match entries.last_mut() {
                    Some((r, v)) if *r == t.row => *v = semiring.add(*v, t.val),
                    _ => entries.push((t.row, t.val)),
                }
                i += 1;
            }
            b.push_entry_column(col, entries);
        }
        Ok(b.finish(mode))
    }

    pub fn nrows(&self) -> Index {
        self.nrows
    }

    pub fn ncols(&self) -> Index {
        self.ncols
    }

    pub fn shape(&self) -> (Index, Index) {
        (self.nrows, self.ncols)
    }

    pub fn nnz(&self) -> usize {
        self.rowidx.len()
    }

    /// Number of non-empty columns.
    pub fn nzc(&self) -> usize {
        match self.mode {
            StorageMode::Dcsc => self.colids.len(),
            StorageMode::Csc => self.colptr.windows(2).filter(|w| w[1] > w[0]).count(),
        }
    }

    pub fn mode(&self) -> StorageMode {
        self.mode
    }

    pub fn is_square(&self) -> bool {
        self.nrows == self.ncols
    }

    fn stored_col_id(&self, s: usize) -> Index {
        match self.mode {
            StorageMode::Csc => s,
            StorageMode::Dcsc => self.colids[s],
        }
    }

    fn stored_len(&self) -> usize {
        self.colptr.len() - 1
    }

    pub fn into_mode(self, mode: StorageMode) -> Self {
        if self.mode == mode {
            return self;
        }
        match mode {
            StorageMode::Csc => {
                let mut colptr = Vec::with_capacity(self.ncols + 1);
                colptr.push(0);
                let mut s = 0;
                for j in 0..self.ncols {
                    if s < self.colids.len() && self.colids[s] == j {
                        s += 1;
                    }
                    colptr.push(self.colptr[s]);
                }
                SparseMatrix {
                    nrows: self.nrows,
                    ncols: self.ncols,
                    mode,
                    colids: Vec::new(),
                    colptr,
                    rowidx: self.rowidx,
                    vals: self.vals,
                }
            }
            StorageMode::Dcsc => {
                let mut colids = Vec::new();
                let mut colptr = vec![0];
                for j in 0..self.ncols {
                    if self.colptr[j + 1] > self.colptr[j] {
                        colids.push(j);
                        colptr.push(self.colptr[j + 1]);
                    }
                }
                SparseMatrix {
                    nrows: self.nrows,
                    ncols: self.ncols,
                    mode,
                    colids,
                    colptr,
                    rowidx: self.rowidx,
                    vals: self.vals,
                }
            }
        }
    }

    pub fn to_mode(&self, mode: StorageMode) -> Self {
        self.clone().into_mode(mode)
    }

    /// Row indices and values of column `j` (empty slices when the column is empty).
    pub fn column(&self, j: Index) -> (&[Index], &[T]) {
        let s = match self.mode {
            StorageMode::Csc => {
                if j >= self.ncols {
                    return (&[], &[]);
                }
                j
            }
            StorageMode::Dcsc => match self.colids.binary_search(&j) {
                Ok(s) => s,
                Err(_) => return (&[], &[]),
            },
        };
        let r = self.colptr[s]..self.colptr[s + 1];
        (&self.rowidx[r.clone()], &self.vals[r])
    }

    pub fn col_nnz(&self, j: Index) -> usize {
        self.column(j).0.len()
    }

    /// Non-empty columns in ascending order as `(col, rows, values)`.
    pub fn columns(&self) -> impl Iterator<Item = (Index, &[Index], &[T])> + '_ {
        (0..self.stored_len()).filter_map(move |s| {
            let r = self.colptr[s]..self.colptr[s + 1];
            if r.is_empty() {
                None
            } else {
                Some((self.stored_col_id(s), &self.rowidx[r.clone()], &self.vals[r]))
            }
        })
    }

    /// Ids of the non-empty columns, ascending.
    pub fn nonempty_columns(&self) -> Vec<Index> {
        self.columns().map(|(j, _, _)| j).collect()
    }

    /// All entries in column-major order.
    pub fn iter(&self) -> impl Iterator<Item = Triplet<T>> + '_ {
        self.columns().flat_map(|(j, rows, vals)| {
            rows.iter()
                .zip(vals)
                .map(move |(&r, &v)| Triplet::new(r, j, v))
        })
    }

    pub fn triplets(&self) -> Vec<Triplet<T>> {
        self.iter().collect()
    }

    /// Flat row-index and value arrays over the stored columns.
    pub fn raw_entries(&self) -> (&[Index], &[T]) {
        (&self.rowidx, &self.vals)
    }

    pub fn get(&self, row: Index, col: Index) -> Option<T> {
        let (rows, vals) = self.column(col);
        rows.binary_search(&row).ok().map(|p| vals[p])
    }

    pub fn col_counts(&self) -> Vec<usize> {
        let mut c = vec![0; self.ncols];
        for (j, rows, _) in self.columns() {
            c[j] = rows.len();
        }
        c
    }

    pub fn row_counts(&self) -> Vec<usize> {
        let mut c = vec![0; self.nrows];
        for &r in &self.rowidx {
            c[r] += 1;
        }
        c
    }

    pub fn transpose(&self) -> Self {
        let mut ts: Vec<Triplet<T>> = self
            .iter()
            .map(|t| Triplet::new(t.col, t.row, t.val))
            .collect();
        ts.sort_by_key(|t| (t.col, t.row));
        from_sorted_unique(self.ncols, self.nrows, &ts, self.mode)
    }

    pub fn map_values<U: Scalar>(&self, mut f: impl FnMut(T) -> U) -> SparseMatrix<U> {
        SparseMatrix {
            nrows: self.nrows,
            ncols: self.ncols,
            mode: self.mode,
            colids: self.colids.clone(),
            colptr: self.colptr.clone(),
            rowidx: self.rowidx.clone(),
            vals: self.vals.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Drops entries equal to the semiring zero.
    pub fn prune_zeros<S: Semiring<Scalar = T>>(&self, semiring: &S) -> Self {
        let zero = semiring.zero();
        let mut b = ColumnBuilder::with_capacity(self.nrows, self.ncols, self.nnz());
        for (j, rows, vals) in self.columns() {
            b.push_entry_column(
                j,
                rows.iter()
                    .zip(vals)
                    .filter(|(_, &v)| v != zero)
                    .map(|(&r, &v)| (r, v)),
            );
        }
        b.finish(self.mode)
    }

    /// Columns `range` as a `nrows x range.len()` matrix with local column ids.
    pub fn slice_columns(&self, range: Range<Index>) -> Result<Self> {
        if range.start > range.end || range.end > self.ncols {
            return Err(Error::Index(format!(
                "column range {:?} outside 0..{}",
                range, self.ncols
            )));
        }
        let mut b = ColumnBuilder::new(self.nrows, range.len());
        for (j, rows, vals) in self.columns() {
            if range.contains(&j) {
                b.push_column(j - range.start, rows, vals);
            }
        }
        Ok(b.finish(self.mode))
    }

    /// Rows `range` as a `range.len() x ncols` matrix with local row ids.
    pub fn slice_rows(&self, range: Range<Index>) -> Result<Self> {
        if range.start > range.end || range.end > self.nrows {
            return Err(Error::Index(format!(
                "row range {:?} outside 0..{}",
                range, self.nrows
            )));
        }
        let mut b = ColumnBuilder::new(range.len(), self.ncols);
        for (j, rows, vals) in self.columns() {
            let lo = rows.partition_point(|&r| r < range.start);
            let hi = rows.partition_point(|&r| r < range.end);
            b.push_entry_column(
                j,
                rows[lo..hi]
                    .iter()
                    .zip(&vals[lo..hi])
                    .map(|(&r, &v)| (r - range.start, v)),
            );
        }
        Ok(b.finish(self.mode))
    }

    /// Horizontal concatenation of column blocks sharing the same row count.
    pub fn concat_columns(parts: &[SparseMatrix<T>], mode: StorageMode) -> Result<Self> {
        let nrows = parts.first().map_or(0, |p| p.nrows);
        if let Some(p) = parts.iter().find(|p| p.nrows != nrows) {
            return Err(Error::Shape(format!(
                "cannot concatenate blocks with {} and {} rows",
                nrows, p.nrows
            )));
        }
        let ncols = parts.iter().map(|p| p.ncols).sum();
        let nnz = parts.iter().map(|p| p.nnz()).sum();
        let mut b = ColumnBuilder::with_capacity(nrows, ncols, nnz);
        let mut offset = 0;
        for p in parts {
            for (j, rows, vals) in p.columns() {
                b.push_column(offset + j, rows, vals);
            }
            offset += p.ncols;
        }
        Ok(b.finish(mode))
    }

    /// True when `(i, j)` stored implies `(j, i)` stored.
    pub fn is_pattern_symmetric(&self) -> bool {
        self.is_square() && self.iter().all(|t| self.get(t.col, t.row).is_some())
    }

    /// Largest per-entry relative difference, or `None` when the sparsity
    /// patterns or shapes differ. Relative to `max(|a|, |b|, 1e-300)`.
    pub fn max_rel_diff(&self, other: &Self) -> Option<f64> {
        if self.shape() != other.shape() || self.nnz() != other.nnz() {
            return None;
        }
        let mut worst: f64 = 0.0;
        for (a, b) in self.iter().zip(other.iter()) {
            if a.row != b.row || a.col != b.col {
                return None;
            }
            let (x, y) = (a.val.to_f64(), b.val.to_f64());
            if x == y {
                continue;
            }
            let scale = x.abs().max(y.abs()).max(1e-300);
            worst = worst.max((x - y).abs() / scale);
        }
        Some(worst)
    }

    /// Same shape, pattern and bit-identical values.
    pub fn bitwise_eq(&self, other: &Self) -> bool {
        self.shape() == other.shape()
            && self.nnz() == other.nnz()
            && self
                .iter()
                .zip(other.iter())
                .all(|(a, b)| a.row == b.row && a.col == b.col && a.val.bits() == b.val.bits())
    }
}

impl<T: Scalar> PartialEq for SparseMatrix<T> {
    fn eq(&self, other: &Self) -> bool {
        self.shape() == other.shape()
            && self.nnz() == other.nnz()
            && self.iter().zip(other.iter()).all(|(a, b)| a == b)
    }
}

/// Builds from triplets already sorted by `(col, row)` without duplicates.
pub(crate) fn from_sorted_unique<T: Scalar>(
    nrows: Index,
    ncols: Index,
    ts: &[Triplet<T>],
    mode: StorageMode,
) -> SparseMatrix<T> {
    let mut b = ColumnBuilder::with_capacity(nrows, ncols, ts.len());
    let mut i = 0;
    while i < ts.len() {
        let col = ts[i].col;
        let start = i;
        while i < ts.len() && ts[i].col == col {
            i += 1;
        }
        b.push_entry_column(col, ts[start..i].iter().map(|t| (t.row, t.val)));
    }
    b.finish(mode)
}
