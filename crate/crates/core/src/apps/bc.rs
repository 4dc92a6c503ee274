//! Batched Brandes betweenness centrality in matrix form.
//!
//! Frontiers are `n x b` matrices (vertices by batch sources). The forward
//! search repeats `F' = Aᵀ F` over integer `(+, *)`, masked to drop
//! (vertex, source) pairs already reached, so `F'` holds shortest-path counts
//! `σ` of the next level. The backward sweep walks the levels from the
//! deepest up: with `W[w, s] = (1 + δ[w, s]) / σ[w, s]` on level `d`,
//! `δ[v, s] = σ[v, s] * (A W)[v, s]` for `v` on level `d - 1`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::layout::{strategy_to_permutation, Distribution1D};
use crate::local::Mask;
use crate::runtime::{execute, FetchPolicy, RunMetrics, RuntimeConfig};
use crate::semiring::{BoolOrAnd, IntPlusTimes, RealPlusTimes, Scalar};
use crate::sparse::{permute_symmetric, Index, SparseMatrix, StorageMode, Triplet};

/// Per-vertex centrality `g(v)` accumulated over the processed sources.
#[derive(Debug, Clone, PartialEq)]
pub struct BcScores(pub Vec<f64>);

impl BcScores {
    pub fn zeros(n: usize) -> Self {
        BcScores(vec![0.0; n])
    }

    pub fn add(&mut self, other: &BcScores) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a += b;
        }
    }
}

/// Pattern of `G + Gᵀ` without self loops.
pub(crate) fn undirected_pattern<T: Scalar>(g: &SparseMatrix<T>) -> Result<SparseMatrix<bool>> {
    if !g.is_square() {
        return Err(Error::Shape(format!(
            "graph matrix must be square, got {}x{}",
            g.nrows(),
            g.ncols()
        )));
    }
    let ts = g
        .iter()
        .filter(|t| t.row != t.col)
        .flat_map(|t| [Triplet::new(t.row, t.col, true), Triplet::new(t.col, t.row, true)]);
    SparseMatrix::from_triplets(g.nrows(), g.ncols(), ts, StorageMode::Dcsc, &BoolOrAnd)
}

fn union(a: &SparseMatrix<bool>, b: &SparseMatrix<bool>) -> Result<SparseMatrix<bool>> {
    SparseMatrix::from_triplets(a.nrows(), a.ncols(), a.iter().chain(b.iter()), StorageMode::Dcsc, &BoolOrAnd)
}

/// Dependency sums of one batch of distinct sources.
pub fn bc_batch<T: Scalar>(
    g: &SparseMatrix<T>,
    sources: &[Index],
    cfg: &RuntimeConfig,
) -> Result<(BcScores, RunMetrics)> {
    let pattern = undirected_pattern(g)?;
    let n = pattern.ncols();
    if let Some(&s) = sources.iter().find(|&&s| s >= n) {
        return Err(Error::Index(format!("source {s} outside 0..{n}")));
    }
    let mut seen = vec![false; n];
    for &s in sources {
        if std::mem::replace(&mut seen[s], true) {
            return Err(Error::Config(format!("source {s} repeated in batch")));
        }
    }
    cfg.validate()?;
    let mut metrics = RunMetrics::new(cfg.procs);
    if sources.is_empty() {
        return Ok((BcScores::zeros(n), metrics));
    }

    let (perm, dist) = strategy_to_permutation(&pattern, &cfg.strategy, cfg.procs)?;
    let pattern = if perm.is_identity() {
        pattern
    } else {
        permute_symmetric(&pattern, &perm)?
    };
    let a_int = pattern.map_values(|_| 1i64);
    let a_real = pattern.map_values(|_| 1.0f64);
    let batch = sources.len();
    let batch_dist = Distribution1D::even(batch, cfg.procs)?;
    let policy = FetchPolicy::Blocked(cfg.blocks);

    // forward search; the graph is symmetric so Aᵀ = A
    let f0 = SparseMatrix::from_triplets(
        n,
        batch,
        sources.iter().enumerate().map(|(k, &s)| Triplet::new(perm.apply(s), k, 1i64)),
        StorageMode::Dcsc,
        &IntPlusTimes,
    )?;
    let mut visited = f0.map_values(|_| true);
    let mut levels = vec![f0];
    loop {
        let out = execute(
            &a_int,
            levels.last().unwrap(),
            &dist,
            &batch_dist,
            cfg,
            &IntPlusTimes,
            policy,
            Some(Mask::Drop(&visited)),
        )?;
        metrics.merge(&out.metrics);
        let next = out.gather(StorageMode::Dcsc)?;
        if next.nnz() == 0 {
            break;
        }
        visited = union(&visited, &next.map_values(|_| true))?;
        levels.push(next);
    }

    // backward sweep
    let mut scores = vec![0.0; n];
    let mut delta: SparseMatrix<f64> = levels.last().unwrap().map_values(|_| 0.0);
    for d in (1..levels.len()).rev() {
        let sigma = &levels[d];
        for t in delta.iter() {
            scores[t.row] += t.val;
        }
        let w = SparseMatrix::from_triplets(
            n,
            batch,
            sigma.iter().zip(delta.iter()).map(|(s, dl)| {
                debug_assert_eq!((s.row, s.col), (dl.row, dl.col));
                Triplet::new(s.row, s.col, (1.0 + dl.val) / s.val as f64)
            }),
            StorageMode::Dcsc,
            &RealPlusTimes,
        )?;
        let prev = &levels[d - 1];
        let prev_pattern = prev.map_values(|_| true);
        let out = execute(
            &a_real,
            &w,
            &dist,
            &batch_dist,
            cfg,
            &RealPlusTimes,
            policy,
            Some(Mask::Keep(&prev_pattern)),
        )?;
        metrics.merge(&out.metrics);
        let t = out.gather(StorageMode::Dcsc)?;
        // keep the full level d-1 pattern so the next step can zip against it
        let ts = prev.iter().map(|p| {
            let acc = t.get(p.row, p.col).unwrap_or(0.0);
            Triplet::new(p.row, p.col, p.val as f64 * acc)
        });
        delta = SparseMatrix::from_triplets(n, batch, ts, StorageMode::Dcsc, &RealPlusTimes)?;
    }
    // level 0 holds the sources themselves and is excluded

    let out = (0..n).map(|v| scores[perm.apply(v)]).collect();
    Ok((BcScores(out), metrics))
}

/// Approximate centrality from `num_sources` seeded, uniformly sampled
/// distinct sources processed in batches of `batch_size`.
pub fn bc_approx<T: Scalar>(
    g: &SparseMatrix<T>,
    num_sources: usize,
    batch_size: usize,
    seed: u64,
    cfg: &RuntimeConfig,
) -> Result<(BcScores, RunMetrics)> {
    let n = g.ncols();
    if num_sources > n {
        return Err(Error::Config(format!("{num_sources} sources requested from {n} vertices")));
    }
    if batch_size == 0 {
        return Err(Error::Config("batch size must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sources = rand::seq::index::sample(&mut rng, n, num_sources).into_vec();
    bc_sources(g, &sources, batch_size, cfg)
}

/// Sum of [`bc_batch`] over consecutive chunks of `sources`.
pub fn bc_sources<T: Scalar>(
    g: &SparseMatrix<T>,
    sources: &[Index],
    batch_size: usize,
    cfg: &RuntimeConfig,
) -> Result<(BcScores, RunMetrics)> {
    if batch_size == 0 {
        return Err(Error::Config("batch size must be at least 1".into()));
    }
    let mut total = BcScores::zeros(g.ncols());
    let mut metrics = RunMetrics::new(cfg.procs);
    for chunk in sources.chunks(batch_size) {
        let (s, m) = bc_batch(g, chunk, cfg)?;
        total.add(&s);
        metrics.merge(&m);
    }
    Ok((total, metrics))
}
