//! Single-process column-by-column SpGEMM.
//!
//! Output column `j` of `C = A * B` merges the columns of `A` selected by the
//! entries of `B[:, j]`, each scaled by that entry. Two accumulators are
//! available: a k-way heap merge over the selected columns and a linear-probing
//! hash table. Both add contributions to a row in ascending order of the inner
//! index, so they produce bit-identical values even for floating point.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::semiring::{Scalar, Semiring};
use crate::sparse::{ColumnBuilder, Index, SparseMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Accumulator {
    Heap,
    Hash,
    #[default]
    Hybrid,
}

/// Use the hash accumulator for a column when its flops exceed this multiple of
/// the number of merged streams. Not tuned.
pub const HYBRID_HASH_RATIO: u64 = 2;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlopsEstimate {
    /// Scalar multiplications per output column.
    pub per_column: Vec<u64>,
    pub total: u64,
}

fn check_inner<T, U>(a: &SparseMatrix<T>, b: &SparseMatrix<U>) -> Result<()>
where
    T: Scalar,
    U: Scalar,
{
    if a.ncols() != b.nrows() {
        return Err(Error::Shape(format!(
            "inner dimensions differ: {}x{} times {}x{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    Ok(())
}

/// Sparse flops of `A * B`: for each output column, the sum of `nnz(A[:, i])`
/// over the stored entries `B[i, j]`.
pub fn estimate_flops<T: Scalar, U: Scalar>(
    a: &SparseMatrix<T>,
    b: &SparseMatrix<U>,
) -> Result<FlopsEstimate> {
    check_inner(a, b)?;
    let a_counts = a.col_counts();
    let mut per_column = vec![0u64; b.ncols()];
    for (j, rows, _) in b.columns() {
        per_column[j] = rows.iter().map(|&i| a_counts[i] as u64).sum();
    }
    let total = per_column.iter().sum();
    Ok(FlopsEstimate { per_column, total })
}

/// Restricts which output entries are emitted.
#[derive(Debug, Clone, Copy)]
pub(crate) enum Mask<'a> {
    /// Emit only entries present in the pattern.
    Keep(&'a SparseMatrix<bool>),
    /// Emit only entries absent from the pattern.
    Drop(&'a SparseMatrix<bool>),
}

impl Mask<'_> {
    pub(crate) fn pattern(&self) -> &SparseMatrix<bool> {
        match self {
            Mask::Keep(p) | Mask::Drop(p) => p,
        }
    }

    fn admits(&self, col_rows: &[Index], row: Index) -> bool {
        let hit = col_rows.binary_search(&row).is_ok();
        match self {
            Mask::Keep(_) => hit,
            Mask::Drop(_) => !hit,
        }
    }
}

/// `C = A * B` over `semiring`.
pub fn spgemm_local<S: Semiring>(
    a: &SparseMatrix<S::Scalar>,
    b: &SparseMatrix<S::Scalar>,
    semiring: &S,
    accumulator: Accumulator,
) -> Result<SparseMatrix<S::Scalar>> {
    spgemm_local_masked(a, b, semiring, accumulator, None)
}

pub(crate) fn spgemm_local_masked<S: Semiring>(
    a: &SparseMatrix<S::Scalar>,
    b: &SparseMatrix<S::Scalar>,
    semiring: &S,
    accumulator: Accumulator,
    mask: Option<Mask<'_>>,
) -> Result<SparseMatrix<S::Scalar>> {
    check_inner(a, b)?;
    if let Some(m) = mask {
        if m.pattern().shape() != (a.nrows(), b.ncols()) {
            return Err(Error::Shape("mask shape differs from output shape".into()));
        }
    }
    let a_counts = a.col_counts();
    let mut out = ColumnBuilder::new(a.nrows(), b.ncols());
    let mut heap = HeapAccumulator::default();
    let mut hash = HashAccumulator::default();
    let mut column: Vec<(Index, S::Scalar)> = Vec::new();

    for (j, b_rows, b_vals) in b.columns() {
        let flops: u64 = b_rows.iter().map(|&i| a_counts[i] as u64).sum();
        if flops == 0 {
            continue;
        }
        let use_hash = match accumulator {
            Accumulator::Heap => false,
            Accumulator::Hash => true,
            Accumulator::Hybrid => flops > HYBRID_HASH_RATIO * b_rows.len() as u64,
        };
        column.clear();
        if use_hash {
            hash.column(a, b_rows, b_vals, flops as usize, semiring, &mut column);
        } else {
            heap.column(a, b_rows, b_vals, semiring, &mut column);
        }
        match mask {
            None => out.push_entry_column(j, column.drain(..)),
            Some(m) => {
                let (mrows, _) = m.pattern().column(j);
                out.push_entry_column(j, column.drain(..).filter(|&(r, _)| m.admits(mrows, r)));
            }
        }
    }
    Ok(out.finish(b.mode()))
}

#[derive(Default)]
struct HeapAccumulator {
    heap: BinaryHeap<Reverse<(Index, usize)>>,
    cursors: Vec<usize>,
}

impl HeapAccumulator {
    fn column<S: Semiring>(
        &mut self,
        a: &SparseMatrix<S::Scalar>,
        b_rows: &[Index],
        b_vals: &[S::Scalar],
        semiring: &S,
        out: &mut Vec<(Index, S::Scalar)>,
    ) {
        self.heap.clear();
        self.cursors.clear();
        self.cursors.resize(b_rows.len(), 0);
        for (s, &t) in b_rows.iter().enumerate() {
            if let Some(&r) = a.column(t).0.first() {
                self.heap.push(Reverse((r, s)));
            }
        }
        // ties on row pop in ascending stream order, i.e. ascending inner index
        while let Some(Reverse((row, s))) = self.heap.pop() {
            let (a_rows, a_vals) = a.column(b_rows[s]);
            let pos = self.cursors[s];
            let prod = semiring.mul(a_vals[pos], b_vals[s]);
            match out.last_mut() {
                Some((r, v)) if *r == row => *v = semiring.add(*v, prod),
                _ => out.push((row, prod)),
            }
            self.cursors[s] = pos + 1;
            if let Some(&next) = a_rows.get(pos + 1) {
                self.heap.push(Reverse((next, s)));
            }
        }
    }
}

const EMPTY: Index = Index::MAX;

struct HashAccumulator<T> {
    keys: Vec<Index>,
    vals: Vec<Option<T>>,
    used: Vec<usize>,
}

impl<T> Default for HashAccumulator<T> {
    fn default() -> Self {
        HashAccumulator {
            keys: Vec::new(),
            vals: Vec::new(),
            used: Vec::new(),
        }
    }
}

impl<T: Scalar> HashAccumulator<T> {
    fn column<S: Semiring<Scalar = T>>(
        &mut self,
        a: &SparseMatrix<T>,
        b_rows: &[Index],
        b_vals: &[T],
        flops: usize,
        semiring: &S,
        out: &mut Vec<(Index, T)>,
    ) {
        // load factor <= 0.5
        let cap = (2 * flops).next_power_of_two().max(2);
        if self.keys.len() < cap {
            self.keys = vec![EMPTY; cap];
            self.vals = vec![None; cap];
        }
        let mask = cap - 1;
        let shift = 64 - cap.trailing_zeros();
        self.used.clear();
        for (&t, &bv) in b_rows.iter().zip(b_vals) {
            let (a_rows, a_vals) = a.column(t);
            for (&r, &av) in a_rows.iter().zip(a_vals) {
                let prod = semiring.mul(av, bv);
                let mut h = if shift >= 64 {
                    0
                } else {
                    ((r as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15) >> shift) as usize
                };
                loop {
                    let k = self.keys[h];
                    if k == r {
                        let slot = self.vals[h].as_mut().expect("occupied slot has a value");
                        *slot = semiring.add(*slot, prod);
                        break;
                    }
                    if k == EMPTY {
                        self.keys[h] = r;
                        self.vals[h] = Some(prod);
                        self.used.push(h);
                        break;
                    }
                    h = (h + 1) & mask;
                }
            }
        }
        out.extend(self.used.iter().map(|&h| {
            (self.keys[h], self.vals[h].expect("occupied slot has a value"))
        }));
        out.sort_unstable_by_key(|&(r, _)| r);
        for &h in &self.used {
            self.keys[h] = EMPTY;
            self.vals[h] = None;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semiring::{BoolOrAnd, IntPlusTimes, RealPlusTimes};
    use crate::sparse::{StorageMode, Triplet};

    fn identity(n: usize) -> SparseMatrix<f64> {
        SparseMatrix::from_triplets(
            n,
            n,
            (0..n).map(|i| Triplet::new(i, i, 1.0)),
            StorageMode::Dcsc,
            &RealPlusTimes,
        )
        .unwrap()
    }

    fn ones(n: usize) -> SparseMatrix<f64> {
        let ts = (0..n).flat_map(|i| (0..n).map(move |j| Triplet::new(i, j, 1.0)));
        SparseMatrix::from_triplets(n, n, ts, StorageMode::Csc, &RealPlusTimes).unwrap()
    }

    #[test]
    fn flops_trivial_cases() {
        assert_eq!(estimate_flops(&identity(2), &identity(2)).unwrap().total, 2);
        let f = estimate_flops(&ones(3), &ones(3)).unwrap();
        assert_eq!(f.total, 27);
        assert_eq!(f.per_column, vec![9, 9, 9]);
        let err = estimate_flops(&ones(3), &identity(2)).unwrap_err();
        assert!(matches!(err, Error::Shape(_)));
    }

    #[test]
    fn identity_times_b_is_b() {
        let b = SparseMatrix::from_triplets(
            4,
            3,
            vec![Triplet::new(0, 0, 2.5), Triplet::new(3, 0, -1.0), Triplet::new(2, 2, 7.0)],
            StorageMode::Dcsc,
            &RealPlusTimes,
        )
        .unwrap();
        for acc in [Accumulator::Heap, Accumulator::Hash, Accumulator::Hybrid] {
            let c = spgemm_local(&identity(4), &b, &RealPlusTimes, acc).unwrap();
            assert!(c.bitwise_eq(&b), "{acc:?}");
        }
    }

    #[test]
    fn boolean_path_square_is_distance_two_reach() {
        // path 0-1-2-3
        let edges = [(0, 1), (1, 2), (2, 3)];
        let ts = edges
            .iter()
            .flat_map(|&(u, v)| [Triplet::new(u, v, true), Triplet::new(v, u, true)]);
        let a = SparseMatrix::from_triplets(4, 4, ts, StorageMode::Dcsc, &BoolOrAnd).unwrap();
        let c = spgemm_local(&a, &a, &BoolOrAnd, Accumulator::Hybrid).unwrap();
        // exactly two-step walks: |i-j| in {0, 2}, excluding end-vertex self loops without a walk
        for i in 0..4usize {
            for j in 0..4usize {
                let walk2 = (0..4usize).any(|k| i.abs_diff(k) == 1 && k.abs_diff(j) == 1);
                assert_eq!(c.get(i, j).is_some(), walk2, "({i},{j})");
            }
        }

        // with self loops the square covers every pair within BFS distance 2
        let ts = edges
            .iter()
            .flat_map(|&(u, v)| [Triplet::new(u, v, true), Triplet::new(v, u, true)])
            .chain((0..4).map(|i| Triplet::new(i, i, true)));
        let a = SparseMatrix::from_triplets(4, 4, ts, StorageMode::Dcsc, &BoolOrAnd).unwrap();
        let c = spgemm_local(&a, &a, &BoolOrAnd, Accumulator::Hash).unwrap();
        for i in 0..4usize {
            for j in 0..4usize {
                assert_eq!(c.get(i, j).is_some(), i.abs_diff(j) <= 2, "({i},{j})");
            }
        }
    }

    #[test]
    fn cancellation_is_kept() {
        let a = SparseMatrix::from_triplets(
            1,
            2,
            vec![Triplet::new(0, 0, 1i64), Triplet::new(0, 1, 1)],
            StorageMode::Csc,
            &IntPlusTimes,
        )
        .unwrap();
        let b = SparseMatrix::from_triplets(
            2,
            1,
            vec![Triplet::new(0, 0, 3i64), Triplet::new(1, 0, -3)],
            StorageMode::Csc,
            &IntPlusTimes,
        )
        .unwrap();
        for acc in [Accumulator::Heap, Accumulator::Hash] {
            let c = spgemm_local(&a, &b, &IntPlusTimes, acc).unwrap();
            assert_eq!(c.get(0, 0), Some(0));
        }
    }

    #[test]
    fn masks_filter_output() {
        let a = ones(3);
        let keep = SparseMatrix::from_triplets(
            3,
            3,
            vec![Triplet::new(1, 1, true), Triplet::new(2, 0, true)],
            StorageMode::Dcsc,
            &BoolOrAnd,
        )
        .unwrap();
        let c = spgemm_local_masked(&a, &a, &RealPlusTimes, Accumulator::Heap, Some(Mask::Keep(&keep)))
            .unwrap();
        assert_eq!(c.nnz(), 2);
        assert_eq!(c.get(2, 0), Some(3.0));
        let c = spgemm_local_masked(&a, &a, &RealPlusTimes, Accumulator::Hash, Some(Mask::Drop(&keep)))
            .unwrap();
        assert_eq!(c.nnz(), 7);
        assert_eq!(c.get(1, 1), None);
    }
}
