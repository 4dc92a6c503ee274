use std::ops::Range;

use crate::error::{Error, Result};
use crate::semiring::Scalar;
use crate::sparse::{Index, SparseMatrix};

/// One process's `A` slice exposed for remote reads: the concatenated row ids
/// and values of its non-empty columns, in column order.
#[derive(Debug, Clone)]
pub struct WindowPair<T> {
    rowids: Vec<Index>,
    values: Vec<T>,
}

impl<T> WindowPair<T> {
    pub fn len(&self) -> usize {
        self.rowids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rowids.is_empty()
    }
}

/// Replicated metadata about the non-empty columns of the global `A`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnDirectory {
    nrows: Index,
    ncols: Index,
    colids: Vec<Index>,
    nnz: Vec<usize>,
    /// Start of each column inside its owner's window.
    offsets: Vec<usize>,
    owner: Vec<usize>,
    /// Directory positions owned by each process (contiguous, since owners
    /// hold contiguous column ranges).
    owner_ranges: Vec<Range<usize>>,
}

impl ColumnDirectory {
    pub fn nrows(&self) -> Index {
        self.nrows
    }

    pub fn ncols(&self) -> Index {
        self.ncols
    }

    pub fn procs(&self) -> usize {
        self.owner_ranges.len()
    }

    pub fn len(&self) -> usize {
        self.colids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.colids.is_empty()
    }

    /// Sorted global ids of all non-empty columns.
    pub fn column_ids(&self) -> &[Index] {
        &self.colids
    }

    pub fn column_nnz(&self) -> &[usize] {
        &self.nnz
    }

    pub fn owners(&self) -> &[usize] {
        &self.owner
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn owned_range(&self, p: usize) -> Range<usize> {
        self.owner_ranges[p].clone()
    }

    /// Non-empty global column ids owned by `p`.
    pub fn owned_columns(&self, p: usize) -> &[Index] {
        &self.colids[self.owned_range(p)]
    }

    /// Total entries of `A`.
    pub fn total_nnz(&self) -> usize {
        self.nnz.iter().sum()
    }

    pub fn owned_nnz(&self, p: usize) -> usize {
        self.nnz[self.owned_range(p)].iter().sum()
    }

    /// Directory positions of global columns `first..=last` owned by `p`.
    pub(crate) fn span(&self, p: usize, first: Index, last: Index) -> Result<Range<usize>> {
        let r = self.owned_range(p);
        let ids = &self.colids[r.clone()];
        let lo = ids.binary_search(&first);
        let hi = ids.binary_search(&last);
        match (lo, hi) {
            (Ok(lo), Ok(hi)) if lo <= hi => Ok(r.start + lo..r.start + hi + 1),
            _ => Err(Error::Internal(format!(
                "interval [{first}, {last}] is not a span of process {p}'s directory"
            ))),
        }
    }

    /// Window offsets covered by directory positions `span`.
    pub(crate) fn window_range(&self, span: Range<usize>) -> Range<usize> {
        if span.is_empty() {
            return 0..0;
        }
        let last = span.end - 1;
        self.offsets[span.start]..self.offsets[last] + self.nnz[last]
    }
}

/// Exposes every slice and builds the replicated column directory.
///
/// Slice `i` holds global columns starting at the sum of the widths of the
/// slices before it.
pub fn expose_windows<T: Scalar>(slices: &[SparseMatrix<T>]) -> Result<(Vec<WindowPair<T>>, ColumnDirectory)> {
    let nrows = slices.first().map_or(0, |s| s.nrows());
    if slices.is_empty() {
        return Err(Error::Shape("no slices to expose".into()));
    }
    if let Some(s) = slices.iter().find(|s| s.nrows() != nrows) {
        return Err(Error::Shape(format!(
            "slices disagree on row count: {} vs {}",
            nrows,
            s.nrows()
        )));
    }
    let mut windows = Vec::with_capacity(slices.len());
    let mut dir = ColumnDirectory {
        nrows,
        ncols: 0,
        colids: Vec::new(),
        nnz: Vec::new(),
        offsets: Vec::new(),
        owner: Vec::new(),
        owner_ranges: Vec::with_capacity(slices.len()),
    };
    for (p, s) in slices.iter().enumerate() {
        let start = dir.colids.len();
        let mut rowids = Vec::with_capacity(s.nnz());
        let mut values = Vec::with_capacity(s.nnz());
        for (j, rows, vals) in s.columns() {
            dir.colids.push(dir.ncols + j);
            dir.nnz.push(rows.len());
            dir.offsets.push(rowids.len());
            dir.owner.push(p);
            rowids.extend_from_slice(rows);
            values.extend_from_slice(vals);
        }
        dir.owner_ranges.push(start..dir.colids.len());
        dir.ncols += s.ncols();
        windows.push(WindowPair { rowids, values });
    }
    Ok((windows, dir))
}

/// Read access to exposed windows. Reads are only possible while an epoch
/// value is alive; it borrows the windows immutably so nothing can modify them.
pub struct ExposureEpoch<'w, T> {
    windows: &'w [WindowPair<T>],
}

impl<'w, T> ExposureEpoch<'w, T> {
    pub fn open(windows: &'w [WindowPair<T>]) -> Self {
        ExposureEpoch { windows }
    }

    /// One-sided read of `range` from process `owner`'s two windows.
    pub fn get(&self, owner: usize, range: Range<usize>) -> Result<(&'w [Index], &'w [T])> {
        let w = self
            .windows
            .get(owner)
            .ok_or_else(|| Error::Internal(format!("no window for process {owner}")))?;
        if range.end > w.rowids.len() || range.start > range.end {
            return Err(Error::Internal(format!(
                "read {:?} outside window of length {}",
                range,
                w.rowids.len()
            )));
        }
        Ok((&w.rowids[range.clone()], &w.values[range]))
    }
}
