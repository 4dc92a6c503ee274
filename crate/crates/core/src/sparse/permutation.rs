use crate::error::{Error, Result};
use crate::semiring::Scalar;
use crate::sparse::matrix::{from_sorted_unique, Index, SparseMatrix, Triplet};

/// A bijection on `0..n`; `apply(i)` is the new position of old index `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation {
    forward: Vec<Index>,
}

impl Permutation {
    pub fn new(forward: Vec<Index>) -> Result<Self> {
        let n = forward.len();
        let mut seen = vec![false; n];
        for (i, &p) in forward.iter().enumerate() {
            if p >= n {
                return Err(Error::Index(format!("permutation maps {i} to {p} >= {n}")));
            }
            if std::mem::replace(&mut seen[p], true) {
                return Err(Error::Config(format!("permutation is not bijective: {p} repeated")));
            }
        }
        Ok(Permutation { forward })
    }

    pub fn identity(n: usize) -> Self {
        Permutation {
            forward: (0..n).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.forward.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forward.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.forward.iter().enumerate().all(|(i, &p)| i == p)
    }

    #[inline]
    pub fn apply(&self, i: Index) -> Index {
        self.forward[i]
    }

    pub fn as_slice(&self) -> &[Index] {
        &self.forward
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.forward.len()];
        for (i, &p) in self.forward.iter().enumerate() {
            inv[p] = i;
        }
        Permutation { forward: inv }
    }
}

fn remap<T: Scalar>(
    a: &SparseMatrix<T>,
    row_map: impl Fn(Index) -> Index,
    col_map: impl Fn(Index) -> Index,
) -> SparseMatrix<T> {
    let mut ts: Vec<Triplet<T>> = a
        .iter()
        .map(|t| Triplet::new(row_map(t.row), col_map(t.col), t.val))
        .collect();
    ts.sort_by_key(|t| (t.col, t.row));
    from_sorted_unique(a.nrows(), a.ncols(), &ts, a.mode())
}

/// `R[perm(i), perm(j)] = A[i, j]`, i.e. `P A Pᵀ`.
pub fn permute_symmetric<T: Scalar>(a: &SparseMatrix<T>, perm: &Permutation) -> Result<SparseMatrix<T>> {
    if !a.is_square() {
        return Err(Error::Shape(format!(
            "symmetric permutation needs a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    check_len(perm, a.ncols())?;
    Ok(remap(a, |i| perm.apply(i), |j| perm.apply(j)))
}

/// `R[perm(i), j] = A[i, j]`.
pub fn permute_rows<T: Scalar>(a: &SparseMatrix<T>, perm: &Permutation) -> Result<SparseMatrix<T>> {
    check_len(perm, a.nrows())?;
    Ok(remap(a, |i| perm.apply(i), |j| j))
}

/// `R[i, perm(j)] = A[i, j]`.
pub fn permute_columns<T: Scalar>(a: &SparseMatrix<T>, perm: &Permutation) -> Result<SparseMatrix<T>> {
    check_len(perm, a.ncols())?;
    Ok(remap(a, |i| i, |j| perm.apply(j)))
}

fn check_len(perm: &Permutation, n: usize) -> Result<()> {
    if perm.len() != n {
        return Err(Error::Shape(format!(
            "permutation of length {} applied to dimension {}",
            perm.len(),
            n
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semiring::RealPlusTimes;
    use crate::sparse::matrix::StorageMode;

    #[test]
    fn rejects_non_bijection() {
        assert!(Permutation::new(vec![0, 0]).is_err());
        assert!(Permutation::new(vec![0, 2]).is_err());
        assert!(Permutation::new(vec![1, 0]).is_ok());
    }

    #[test]
    fn swap_two_by_two() {
        let a = SparseMatrix::from_triplets(
            2,
            2,
            vec![Triplet::new(0, 1, 5.0)],
            StorageMode::Csc,
            &RealPlusTimes,
        )
        .unwrap();
        let p = Permutation::new(vec![1, 0]).unwrap();
        let r = permute_symmetric(&a, &p).unwrap();
        assert_eq!(r.get(1, 0), Some(5.0));
        assert_eq!(r.nnz(), 1);
        assert_eq!(permute_symmetric(&a, &Permutation::identity(2)).unwrap(), a);
    }

    #[test]
    fn non_square_is_shape_error() {
        let a = SparseMatrix::<f64>::empty(2, 3, StorageMode::Csc);
        let err = permute_symmetric(&a, &Permutation::identity(3)).unwrap_err();
        assert!(matches!(err, Error::Shape(_)));
    }
}
