use serde::Serialize;

use crate::error::{Error, Result};
use crate::runtime::window::ColumnDirectory;
use crate::semiring::Scalar;
use crate::sparse::{Index, SparseMatrix};

/// `hit[r]` is true iff row `r` of the local `B` slice is non-empty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HitVector(Vec<bool>);

impl HitVector {
    pub fn as_slice(&self) -> &[bool] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn count(&self) -> usize {
        self.0.iter().filter(|&&h| h).count()
    }

    #[inline]
    pub fn get(&self, r: Index) -> bool {
        self.0[r]
    }
}

pub fn build_hit_vector<T: Scalar>(b_local: &SparseMatrix<T>, k: usize) -> Result<HitVector> {
    if b_local.nrows() != k {
        return Err(Error::Shape(format!(
            "B slice has {} rows, expected {}",
            b_local.nrows(),
            k
        )));
    }
    let mut hit = vec![false; k];
    for t in b_local.iter() {
        hit[t.row] = true;
    }
    Ok(HitVector(hit))
}

/// Directory columns that are both non-empty in `A` and hit by `B`'s rows.
pub fn required_columns(hit: &HitVector, dir: &ColumnDirectory) -> Vec<Index> {
    dir.column_ids().iter().copied().filter(|&c| hit.get(c)).collect()
}

/// Inclusive range of global column ids read with one pair of one-sided gets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ColumnInterval {
    pub first: Index,
    pub last: Index,
}

/// Blocked fetch plan against one remote process.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FetchPlan {
    /// Requested block count `K`.
    pub blocks: usize,
    /// Sorted, disjoint; at most `blocks` of them.
    pub intervals: Vec<ColumnInterval>,
}

impl FetchPlan {
    /// Number of one-sided read pairs.
    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }
}

/// Splits the remote's non-empty column list into `blocks` groups of nearly
/// equal count and selects every group holding at least one required column.
/// Runs of adjacent selected groups are merged into a single interval.
pub fn plan_block_fetch(required: &[Index], remote_cols: &[Index], blocks: usize) -> Result<FetchPlan> {
    if blocks == 0 {
        return Err(Error::Config("block count K must be at least 1".into()));
    }
    let len = remote_cols.len();
    let (q, r) = (len / blocks, len % blocks);
    let mut intervals: Vec<ColumnInterval> = Vec::new();
    let mut need = required.iter().copied().peekable();
    let mut prev_selected = false;
    let mut start = 0;
    for g in 0..blocks.min(len) {
        let size = q + usize::from(g < r);
        let group = &remote_cols[start..start + size];
        start += size;
        let (first, last) = (group[0], group[size - 1]);
        let mut selected = false;
        while let Some(&c) = need.peek() {
            if c > last {
                break;
            }
            if c < first || group.binary_search(&c).is_err() {
                return Err(Error::Config(format!(
                    "required column {c} is not a non-empty column of the remote slice"
                )));
            }
            selected = true;
            need.next();
        }
        if selected {
            match intervals.last_mut() {
                Some(iv) if prev_selected => iv.last = last,
                _ => intervals.push(ColumnInterval { first, last }),
            }
        }
        prev_selected = selected;
    }
    if let Some(c) = need.next() {
        return Err(Error::Config(format!(
            "required column {c} is not a non-empty column of the remote slice"
        )));
    }
    Ok(FetchPlan { blocks, intervals })
}

/// One interval per non-empty remote: the fetch-everything baseline.
pub(crate) fn plan_fetch_all(remote_cols: &[Index]) -> FetchPlan {
    let intervals = match (remote_cols.first(), remote_cols.last()) {
        (Some(&first), Some(&last)) => vec![ColumnInterval { first, last }],
        _ => Vec::new(),
    };
    FetchPlan { blocks: 1, intervals }
}
