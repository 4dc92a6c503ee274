use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::layout::symmetric_adjacency;
use crate::semiring::{RealPlusTimes, Scalar};
use crate::sparse::{Index, SparseMatrix, StorageMode, Triplet};

/// Tall-skinny aggregation operator: `nrows = n`, one unit entry per row.
#[derive(Debug, Clone, PartialEq)]
pub struct RestrictionOperator {
    pub matrix: SparseMatrix<f64>,
    /// Root vertex of each aggregate, ascending.
    pub roots: Vec<Index>,
    /// Aggregate (column of `matrix`) of each vertex.
    pub aggregate: Vec<usize>,
}

impl RestrictionOperator {
    pub fn num_aggregates(&self) -> usize {
        self.roots.len()
    }
}

/// Distance-2 maximal independent set and nearest-root aggregation.
///
/// Roots are chosen greedily in order of ascending degree; ties go to the
/// lower vertex id, or to a seeded random rank when `seed` is given. Each
/// vertex joins its nearest root, ties by lowest root id.
pub fn mis2_aggregate<T: Scalar>(a: &SparseMatrix<T>, seed: Option<u64>) -> Result<RestrictionOperator> {
    if !a.is_pattern_symmetric() {
        return Err(Error::Shape(
            "distance-2 aggregation needs a square, pattern-symmetric matrix".into(),
        ));
    }
    let n = a.ncols();
    let adj = symmetric_adjacency(a);
    let tiebreak: Vec<u64> = match seed {
        None => (0..n as u64).collect(),
        Some(s) => {
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            (0..n).map(|_| rng.gen()).collect()
        }
    };
    let mut order: Vec<Index> = (0..n).collect();
    order.sort_by_key(|&v| (adj[v].len(), tiebreak[v], v));

    let mut blocked = vec![false; n];
    let mut roots = Vec::new();
    for v in order {
        if blocked[v] {
            continue;
        }
        roots.push(v);
        blocked[v] = true;
        for &u in &adj[v] {
            blocked[u] = true;
            for &w in &adj[u] {
                blocked[w] = true;
            }
        }
    }
    roots.sort_unstable();

    const UNSET: usize = usize::MAX;
    let mut aggregate = vec![UNSET; n];
    let mut queue = VecDeque::with_capacity(n);
    for (agg, &r) in roots.iter().enumerate() {
        aggregate[r] = agg;
        queue.push_back(r);
    }
    // FIFO order keeps each level sorted by the owning root, so the first
    // discoverer is the lowest-id nearest root
    while let Some(v) = queue.pop_front() {
        for &u in &adj[v] {
            if aggregate[u] == UNSET {
                aggregate[u] = aggregate[v];
                queue.push_back(u);
            }
        }
    }
    debug_assert!(aggregate.iter().all(|&g| g != UNSET));

    let matrix = SparseMatrix::from_triplets(
        n,
        roots.len(),
        aggregate.iter().enumerate().map(|(v, &g)| Triplet::new(v, g, 1.0)),
        StorageMode::Dcsc,
        &RealPlusTimes,
    )?;
    Ok(RestrictionOperator {
        matrix,
        roots,
        aggregate,
    })
}
