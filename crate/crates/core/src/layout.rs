//! 1D block-column distribution, permutation strategies and partitioning.

use std::collections::VecDeque;
use std::io::BufRead;
use std::ops::Range;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::semiring::Scalar;
use crate::sparse::{Index, Permutation, SparseMatrix};

/// Process `i` owns global columns `boundaries[i]..boundaries[i + 1]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Distribution1D {
    boundaries: Vec<Index>,
}

impl Distribution1D {
    /// Nearly equal blocks; the first `n % procs` blocks get one extra column.
    pub fn even(n: Index, procs: usize) -> Result<Self> {
        if procs == 0 {
            return Err(Error::Config("process count must be at least 1".into()));
        }
        let (q, r) = (n / procs, n % procs);
        let mut boundaries = Vec::with_capacity(procs + 1);
        boundaries.push(0);
        for i in 0..procs {
            let len = q + usize::from(i < r);
            boundaries.push(boundaries[i] + len);
        }
        Ok(Distribution1D { boundaries })
    }

    pub fn from_sizes(sizes: &[usize]) -> Result<Self> {
        if sizes.is_empty() {
            return Err(Error::Config("process count must be at least 1".into()));
        }
        let mut boundaries = vec![0];
        for &s in sizes {
            boundaries.push(boundaries.last().unwrap() + s);
        }
        Ok(Distribution1D { boundaries })
    }

    pub fn from_boundaries(boundaries: Vec<Index>) -> Result<Self> {
        if boundaries.len() < 2 || boundaries[0] != 0 {
            return Err(Error::Config("boundaries must start at 0 and cover >= 1 process".into()));
        }
        if boundaries.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::Config("boundaries must be non-decreasing".into()));
        }
        Ok(Distribution1D { boundaries })
    }

    pub fn procs(&self) -> usize {
        self.boundaries.len() - 1
    }

    /// Total number of distributed columns.
    pub fn len(&self) -> Index {
        *self.boundaries.last().unwrap()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn boundaries(&self) -> &[Index] {
        &self.boundaries
    }

    pub fn range(&self, i: usize) -> Range<Index> {
        self.boundaries[i]..self.boundaries[i + 1]
    }

    /// Owning process of global column `col`.
    pub fn owner(&self, col: Index) -> usize {
        debug_assert!(col < self.len());
        self.boundaries.partition_point(|&b| b <= col) - 1
    }
}

/// Part id per column, values in `0..nparts`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PartitionVector {
    parts: Vec<usize>,
    nparts: usize,
}

impl PartitionVector {
    pub fn new(parts: Vec<usize>, nparts: usize) -> Result<Self> {
        if let Some((i, &p)) = parts.iter().enumerate().find(|(_, &p)| p >= nparts) {
            return Err(Error::Config(format!("vertex {i} assigned to part {p} >= {nparts}")));
        }
        Ok(PartitionVector { parts, nparts })
    }

    /// Part count inferred as `max + 1`.
    pub fn from_parts(parts: Vec<usize>) -> Self {
        let nparts = parts.iter().max().map_or(0, |&m| m + 1);
        PartitionVector { parts, nparts }
    }

    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    pub fn nparts(&self) -> usize {
        self.nparts
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn part_sizes(&self) -> Vec<usize> {
        let mut s = vec![0; self.nparts];
        for &p in &self.parts {
            s[p] += 1;
        }
        s
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let f = std::fs::File::open(path)?;
        parse_partition_vector(std::io::BufReader::new(f))
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut s = String::with_capacity(self.parts.len() * 3);
        for p in &self.parts {
            s.push_str(&p.to_string());
            s.push('\n');
        }
        std::fs::write(path, s)?;
        Ok(())
    }
}

/// One base-10 part id per line. Blank lines are rejected except trailing ones.
pub fn parse_partition_vector<R: BufRead>(reader: R) -> Result<PartitionVector> {
    let mut parts = Vec::new();
    let mut blank_at: Option<usize> = None;
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let tok = line.trim();
        if tok.is_empty() {
            blank_at.get_or_insert(i + 1);
            continue;
        }
        if let Some(b) = blank_at {
            return Err(Error::parse(b, "blank line inside partition vector"));
        }
        let p = tok
            .parse::<usize>()
            .map_err(|_| Error::parse(i + 1, format!("bad part id {tok:?}")))?;
        parts.push(p);
    }
    Ok(PartitionVector::from_parts(parts))
}

/// How global column ids are relabeled before the block-column split.
#[derive(Debug, Clone, PartialEq)]
pub enum Strategy {
    Identity,
    Random { seed: u64 },
    /// Group each part's columns contiguously. `symmetrize` acknowledges that a
    /// pattern-asymmetric matrix is being partitioned through `A + Aᵀ`.
    Partition { parts: PartitionVector, symmetrize: bool },
}

impl Strategy {
    pub fn label(&self) -> String {
        match self {
            Strategy::Identity => "identity".into(),
            Strategy::Random { seed } => format!("random:{seed}"),
            Strategy::Partition { symmetrize, .. } => {
                if *symmetrize {
                    "partition+symmetrize".into()
                } else {
                    "partition".into()
                }
            }
        }
    }
}

/// Permutation of `A`'s column ids plus the distribution of the relabeled ids.
pub fn strategy_to_permutation<T: Scalar>(
    a: &SparseMatrix<T>,
    strategy: &Strategy,
    procs: usize,
) -> Result<(Permutation, Distribution1D)> {
    let n = a.ncols();
    match strategy {
        Strategy::Identity => Ok((Permutation::identity(n), Distribution1D::even(n, procs)?)),
        Strategy::Random { seed } => {
            let mut fwd: Vec<Index> = (0..n).collect();
            fwd.shuffle(&mut ChaCha8Rng::seed_from_u64(*seed));
            Ok((Permutation::new(fwd)?, Distribution1D::even(n, procs)?))
        }
        Strategy::Partition { parts, symmetrize } => {
            if !a.is_square() {
                return Err(Error::Shape(format!(
                    "graph partitioning needs a square matrix, got {}x{}",
                    a.nrows(),
                    a.ncols()
                )));
            }
            if !symmetrize && !a.is_pattern_symmetric() {
                return Err(Error::Config(
                    "matrix pattern is not symmetric; partition it through A + Aᵀ with --symmetrize".into(),
                ));
            }
            if parts.len() != n {
                return Err(Error::Config(format!(
                    "partition vector has {} entries for {} columns",
                    parts.len(),
                    n
                )));
            }
            if parts.nparts() != procs {
                return Err(Error::Config(format!(
                    "partition has {} parts but {} processes were requested",
                    parts.nparts(),
                    procs
                )));
            }
            let sizes = parts.part_sizes();
            let mut next: Vec<Index> = Distribution1D::from_sizes(&sizes)?.boundaries[..procs].to_vec();
            let fwd = parts
                .parts()
                .iter()
                .map(|&p| {
                    let pos = next[p];
                    next[p] += 1;
                    pos
                })
                .collect();
            Ok((Permutation::new(fwd)?, Distribution1D::from_sizes(&sizes)?))
        }
    }
}

/// Per-column weights for the partitioner.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VertexWeights(pub Vec<u64>);

/// Squared column degree: the flops a column contributes when squaring a
/// symmetric matrix.
pub fn compute_vertex_weights<T: Scalar>(a: &SparseMatrix<T>) -> VertexWeights {
    VertexWeights(a.col_counts().into_iter().map(|c| (c as u64) * (c as u64)).collect())
}

pub const IMBALANCE_BOUND: f64 = 1.25;

#[derive(Debug, Clone, Serialize)]
pub struct PartitionReport {
    pub parts: PartitionVector,
    pub part_weights: Vec<u64>,
    /// Heaviest part over the average part weight.
    pub imbalance: f64,
    pub bound: f64,
    pub within_bound: bool,
    /// Undirected edges of `A + Aᵀ` whose endpoints lie in different parts.
    pub cut_edges: usize,
    /// Set when BFS growth left a part empty and weighted round-robin was used.
    pub round_robin_fallback: bool,
}

/// Undirected adjacency of the pattern of `A + Aᵀ` without self loops.
pub(crate) fn symmetric_adjacency<T: Scalar>(a: &SparseMatrix<T>) -> Vec<Vec<Index>> {
    let n = a.nrows().max(a.ncols());
    let mut adj = vec![Vec::new(); n];
    for t in a.iter() {
        if t.row != t.col {
            adj[t.row].push(t.col);
            adj[t.col].push(t.row);
        }
    }
    for l in &mut adj {
        l.sort_unstable();
        l.dedup();
    }
    adj
}

/// Grows `procs` parts by breadth-first search from the lowest unassigned
/// vertex, closing a part once it reaches the average weight. Imbalance is
/// reported, not repaired.
pub fn greedy_partition<T: Scalar>(
    a: &SparseMatrix<T>,
    procs: usize,
    weights: &VertexWeights,
) -> Result<PartitionReport> {
    if procs == 0 {
        return Err(Error::Config("process count must be at least 1".into()));
    }
    if !a.is_square() {
        return Err(Error::Shape("graph partitioning needs a square matrix".into()));
    }
    let n = a.ncols();
    if weights.0.len() != n {
        return Err(Error::Config(format!("{} weights for {} vertices", weights.0.len(), n)));
    }
    let adj = symmetric_adjacency(a);
    let w = &weights.0;
    let total: u64 = w.iter().sum();
    let target = total as f64 / procs as f64;

    const UNSET: usize = usize::MAX;
    let mut part = vec![UNSET; n];
    let mut fallback = total == 0 && n > 0;
    if !fallback {
        let mut queued = vec![false; n];
        let mut seed_cursor = 0;
        for p in 0..procs - 1 {
            let mut weight = 0u64;
            let mut queue = VecDeque::new();
            while (weight as f64) < target {
                let v = match queue.pop_front() {
                    Some(v) => v,
                    None => {
                        while seed_cursor < n && part[seed_cursor] != UNSET {
                            seed_cursor += 1;
                        }
                        if seed_cursor == n {
                            break;
                        }
                        queued[seed_cursor] = true;
                        seed_cursor
                    }
                };
                if part[v] != UNSET {
                    continue;
                }
                part[v] = p;
                weight += w[v];
                for &u in &adj[v] {
                    if part[u] == UNSET && !queued[u] {
                        queued[u] = true;
                        queue.push_back(u);
                    }
                }
            }
            // leftovers in the queue go back to the pool
            for v in queue {
                queued[v] = false;
            }
        }
        for p in part.iter_mut().filter(|p| **p == UNSET) {
            *p = procs - 1;
        }
        let mut sizes = vec![0usize; procs];
        for &p in &part {
            sizes[p] += 1;
        }
        fallback = n >= procs && sizes.contains(&0);
    }
    if fallback {
        part = weighted_round_robin(w, procs);
    }

    let mut part_weights = vec![0u64; procs];
    for (v, &p) in part.iter().enumerate() {
        part_weights[p] += w[v];
    }
    let imbalance = if total == 0 {
        1.0
    } else {
        *part_weights.iter().max().unwrap() as f64 / target
    };
    let cut_edges = adj
        .iter()
        .enumerate()
        .flat_map(|(v, l)| l.iter().map(move |&u| (v, u)))
        .filter(|&(v, u)| v < u && part[v] != part[u])
        .count();
    Ok(PartitionReport {
        parts: PartitionVector::new(part, procs)?,
        part_weights,
        imbalance,
        bound: IMBALANCE_BOUND,
        within_bound: imbalance <= IMBALANCE_BOUND,
        cut_edges,
        round_robin_fallback: fallback,
    })
}

/// Heaviest vertex first onto the currently lightest part.
fn weighted_round_robin(w: &[u64], procs: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..w.len()).collect();
    order.sort_by_key(|&v| (std::cmp::Reverse(w[v]), v));
    let mut load = vec![(0u64, 0usize); procs];
    let mut part = vec![0; w.len()];
    for v in order {
        let p = (0..procs).min_by_key(|&p| (load[p].0, load[p].1, p)).unwrap();
        part[v] = p;
        load[p].0 += w[v];
        load[p].1 += 1;
    }
    part
}

/// Process `i`'s column slice with local column ids.
pub fn slice_local<T: Scalar>(
    a: &SparseMatrix<T>,
    dist: &Distribution1D,
    i: usize,
) -> Result<SparseMatrix<T>> {
    if i >= dist.procs() {
        return Err(Error::Index(format!("process {i} outside 0..{}", dist.procs())));
    }
    if dist.len() != a.ncols() {
        return Err(Error::Shape(format!(
            "distribution covers {} columns, matrix has {}",
            dist.len(),
            a.ncols()
        )));
    }
    a.slice_columns(dist.range(i))
}
