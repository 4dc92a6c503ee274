//! Simulated distributed execution of the sparsity-aware 1D multiply.
//!
//! Every logical process `p_i` owns column slices `A_i` and `B_i`. The run is:
//!
//! ```text
//! expose windows of every A_i, allgather the column directory   (other)
//! -- barrier --
//! for each p_i in parallel:
//!     H_i   = non-empty rows of B_i
//!     D~    = directory columns hit by H_i
//!     plans = block-fetch plan per remote (<= K intervals each)
//!     A~    = local needed columns + fetched intervals           (communication)
//! -- barrier --
//! for each p_i in parallel:
//!     C_i = A~ * B_i                                             (computation)
//! ```
//!
//! Windows are immutable arrays read through an [`ExposureEpoch`]; all
//! counters are exact and independent of the worker count.

mod metrics;
mod plan;
mod window;

use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::layout::{strategy_to_permutation, Distribution1D, Strategy};
use crate::local::{estimate_flops, spgemm_local_masked, Accumulator, Mask};
use crate::semiring::{Scalar, Semiring};
use crate::sparse::{
    permute_columns, permute_rows, permute_symmetric, ColumnBuilder, Index, Permutation, SparseMatrix,
    StorageMode,
};

pub use metrics::{
    PhaseTimes, ProcessMetrics, RunMetrics, ENTRY_BYTES, INDEX_BYTES, MESSAGES_PER_INTERVAL, VALUE_BYTES,
};
pub use plan::{build_hit_vector, plan_block_fetch, required_columns, ColumnInterval, FetchPlan, HitVector};
pub use window::{expose_windows, ColumnDirectory, ExposureEpoch, WindowPair};

pub(crate) use metrics::cv_ratio;

pub const DEFAULT_BLOCKS: usize = 2048;
pub const DEFAULT_CV_THRESHOLD: f64 = 0.30;

#[derive(Debug, Clone, PartialEq)]
pub struct RuntimeConfig {
    /// Logical process count `P`.
    pub procs: usize,
    /// Block count `K` per remote process.
    pub blocks: usize,
    pub strategy: Strategy,
    /// Worker threads executing the logical processes; 0 means one per process.
    pub workers: usize,
    pub accumulator: Accumulator,
}

impl Default for RuntimeConfig {
    fn default() -> Self {
        RuntimeConfig {
            procs: 1,
            blocks: DEFAULT_BLOCKS,
            strategy: Strategy::Identity,
            workers: 0,
            accumulator: Accumulator::Hybrid,
        }
    }
}

impl RuntimeConfig {
    pub fn new(procs: usize) -> Self {
        RuntimeConfig {
            procs,
            ..Default::default()
        }
    }

    pub fn with_blocks(mut self, blocks: usize) -> Self {
        self.blocks = blocks;
        self
    }

    pub fn with_strategy(mut self, strategy: Strategy) -> Self {
        self.strategy = strategy;
        self
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.procs == 0 {
            return Err(Error::Config("process count must be at least 1".into()));
        }
        if self.blocks == 0 {
            return Err(Error::Config("block count K must be at least 1".into()));
        }
        Ok(())
    }

    fn pool(&self) -> Result<rayon::ThreadPool> {
        let n = if self.workers == 0 {
            self.procs
        } else {
            self.workers.min(self.procs)
        };
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))
    }
}

/// Which remote columns a process reads.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum FetchPolicy {
    /// Block-fetch plan over the required columns.
    Blocked(usize),
    /// Every non-empty remote column in one interval per remote.
    All,
}

/// Output still in the 1D column layout of `B`.
#[derive(Debug, Clone)]
pub struct DistributedProduct<T> {
    pub slices: Vec<SparseMatrix<T>>,
    pub dist: Distribution1D,
    pub metrics: RunMetrics,
}

impl<T: Scalar> DistributedProduct<T> {
    pub fn gather(&self, mode: StorageMode) -> Result<SparseMatrix<T>> {
        SparseMatrix::concat_columns(&self.slices, mode)
    }
}

/// Fetch bookkeeping of one process.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FetchStats {
    pub bytes: u64,
    pub intervals: u64,
    pub messages: u64,
    pub fetched_columns: u64,
    pub max_intervals_per_remote: u64,
}

/// What one process will read, before any data moves.
#[derive(Debug, Clone)]
pub(crate) struct ProcessPlan {
    pub plans: Vec<(usize, FetchPlan)>,
    pub local_columns: Vec<Index>,
    pub required_columns: u64,
    pub required_bytes: u64,
    pub planned_bytes: u64,
    pub planned_columns: u64,
}

pub(crate) fn plan_process(
    rank: usize,
    hit: &HitVector,
    dir: &ColumnDirectory,
    policy: FetchPolicy,
) -> Result<ProcessPlan> {
    let mut plans = Vec::new();
    let mut local_columns = Vec::new();
    let (mut required_columns, mut required_bytes) = (0u64, 0u64);
    let (mut planned_bytes, mut planned_columns) = (0u64, 0u64);
    for p in 0..dir.procs() {
        let span = dir.owned_range(p);
        let owned = &dir.column_ids()[span.clone()];
        let needed: Vec<Index> = owned.iter().copied().filter(|&c| hit.get(c)).collect();
        if p == rank {
            local_columns = needed;
            continue;
        }
        required_columns += needed.len() as u64;
        required_bytes += span
            .clone()
            .filter(|&s| hit.get(dir.column_ids()[s]))
            .map(|s| dir.column_nnz()[s] as u64 * ENTRY_BYTES)
            .sum::<u64>();
        let plan = match policy {
            FetchPolicy::Blocked(k) => plan_block_fetch(&needed, owned, k)?,
            FetchPolicy::All => plan::plan_fetch_all(owned),
        };
        for iv in &plan.intervals {
            let s = dir.span(p, iv.first, iv.last)?;
            planned_columns += s.len() as u64;
            planned_bytes += dir.window_range(s).len() as u64 * ENTRY_BYTES;
        }
        if !plan.is_empty() {
            plans.push((p, plan));
        }
    }
    Ok(ProcessPlan {
        plans,
        local_columns,
        required_columns,
        required_bytes,
        planned_bytes,
        planned_columns,
    })
}

/// Reads the planned intervals and the process's own needed columns and
/// assembles `Ã` as an `nrows x ncols` DCSC matrix with global column ids.
pub fn fetch_and_assemble<T: Scalar>(
    rank: usize,
    plans: &[(usize, FetchPlan)],
    epoch: &ExposureEpoch<'_, T>,
    dir: &ColumnDirectory,
    local_columns: &[Index],
) -> Result<(SparseMatrix<T>, FetchStats)> {
    let mut stats = FetchStats::default();
    let mut cols: Vec<(Index, &[Index], &[T])> = Vec::new();
    for &c in local_columns {
        let s = dir.span(rank, c, c)?;
        let (rows, vals) = epoch.get(rank, dir.window_range(s))?;
        cols.push((c, rows, vals));
    }
    for (owner, plan) in plans {
        if *owner == rank {
            return Err(Error::Internal(format!("process {rank} planned a fetch from itself")));
        }
        for iv in &plan.intervals {
            let span = dir.span(*owner, iv.first, iv.last)?;
            let wr = dir.window_range(span.clone());
            let base = wr.start;
            let (rows, vals) = epoch.get(*owner, wr)?;
            stats.bytes += rows.len() as u64 * INDEX_BYTES + vals.len() as u64 * VALUE_BYTES;
            stats.intervals += 1;
            stats.messages += MESSAGES_PER_INTERVAL;
            stats.fetched_columns += span.len() as u64;
            for s in span {
                let lo = dir.offsets()[s] - base;
                let hi = lo + dir.column_nnz()[s];
                cols.push((dir.column_ids()[s], &rows[lo..hi], &vals[lo..hi]));
            }
        }
        stats.max_intervals_per_remote = stats.max_intervals_per_remote.max(plan.len() as u64);
    }
    cols.sort_unstable_by_key(|&(c, _, _)| c);
    let nnz = cols.iter().map(|c| c.1.len()).sum();
    let mut b = ColumnBuilder::with_capacity(dir.nrows(), dir.ncols(), nnz);
    for (c, rows, vals) in cols {
        b.push_column(c, rows, vals);
    }
    Ok((b.finish(StorageMode::Dcsc), stats))
}

fn check_distributions<T: Scalar, U: Scalar>(
    a: &SparseMatrix<T>,
    b: &SparseMatrix<U>,
    a_dist: &Distribution1D,
    b_dist: &Distribution1D,
) -> Result<()> {
    if a.ncols() != b.nrows() {
        return Err(Error::Shape(format!(
            "inner dimensions differ: {}x{} times {}x{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    if a_dist.procs() != b_dist.procs() {
        return Err(Error::Config(format!(
            "A is split over {} processes, B over {}",
            a_dist.procs(),
            b_dist.procs()
        )));
    }
    if a_dist.len() != a.ncols() || b_dist.len() != b.ncols() {
        return Err(Error::Config(format!(
            "distributions cover {} and {} columns for operands with {} and {}",
            a_dist.len(),
            b_dist.len(),
            a.ncols(),
            b.ncols()
        )));
    }
    Ok(())
}

fn ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

/// Runs the sparsity-aware 1D multiply on explicitly distributed operands.
/// `a_dist` splits `A`'s columns (and hence `B`'s rows); `b_dist` splits `B`'s
/// columns, which is also the layout of the result.
pub fn execute_1d<S: Semiring>(
    a: &SparseMatrix<S::Scalar>,
    b: &SparseMatrix<S::Scalar>,
    a_dist: &Distribution1D,
    b_dist: &Distribution1D,
    cfg: &RuntimeConfig,
    semiring: &S,
) -> Result<DistributedProduct<S::Scalar>> {
    execute(a, b, a_dist, b_dist, cfg, semiring, FetchPolicy::Blocked(cfg.blocks), None)
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn execute<S: Semiring>(
    a: &SparseMatrix<S::Scalar>,
    b: &SparseMatrix<S::Scalar>,
    a_dist: &Distribution1D,
    b_dist: &Distribution1D,
    cfg: &RuntimeConfig,
    semiring: &S,
    policy: FetchPolicy,
    mask: Option<Mask<'_>>,
) -> Result<DistributedProduct<S::Scalar>> {
    cfg.validate()?;
    check_distributions(a, b, a_dist, b_dist)?;
    if a_dist.procs() != cfg.procs {
        return Err(Error::Config(format!(
            "distribution has {} processes, config {}",
            a_dist.procs(),
            cfg.procs
        )));
    }
    let procs = cfg.procs;
    let pool = cfg.pool()?;
    let k = a.ncols();

    let setup = Instant::now();
    let a_slices: Vec<_> = (0..procs)
        .map(|i| a.slice_columns(a_dist.range(i)))
        .collect::<Result<_>>()?;
    let b_slices: Vec<_> = (0..procs)
        .map(|i| b.slice_columns(b_dist.range(i)))
        .collect::<Result<_>>()?;
    let mask_slices: Option<Vec<SparseMatrix<bool>>> = match mask {
        Some(m) => Some(
            (0..procs)
                .map(|i| m.pattern().slice_columns(b_dist.range(i)))
                .collect::<Result<_>>()?,
        ),
        None => None,
    };
    let (windows, dir) = expose_windows(&a_slices)?;
    let setup_ms = ms(setup) / procs as f64;

    // barrier: windows exposed, directory replicated
    let epoch = ExposureEpoch::open(&windows);
    let fetched: Vec<(SparseMatrix<S::Scalar>, ProcessMetrics)> = pool.install(|| {
        (0..procs)
            .into_par_iter()
            .map(|i| -> Result<_> {
                let t = Instant::now();
                let hit = build_hit_vector(&b_slices[i], k)?;
                let plan = plan_process(i, &hit, &dir, policy)?;
                let other_ms = ms(t);
                let t = Instant::now();
                let (atilde, stats) = fetch_and_assemble(i, &plan.plans, &epoch, &dir, &plan.local_columns)?;
                debug_assert_eq!(stats.bytes, plan.planned_bytes);
                let m = ProcessMetrics {
                    rank: i,
                    bytes_fetched: stats.bytes,
                    bytes_required: plan.required_bytes,
                    intervals: stats.intervals,
                    messages: stats.messages,
                    max_intervals_per_remote: stats.max_intervals_per_remote,
                    flops: 0,
                    required_columns: plan.required_columns,
                    fetched_columns: stats.fetched_columns,
                    times: PhaseTimes {
                        communication_ms: ms(t),
                        computation_ms: 0.0,
                        other_ms: other_ms + setup_ms,
                    },
                };
                Ok((atilde, m))
            })
            .collect::<Result<Vec<_>>>()
    })?;

    // barrier: all reads complete
    let computed: Vec<(SparseMatrix<S::Scalar>, ProcessMetrics)> = pool.install(|| {
        fetched
            .into_par_iter()
            .enumerate()
            .map(|(i, (atilde, mut m))| -> Result<_> {
                let t = Instant::now();
                m.flops = estimate_flops(&atilde, &b_slices[i])?.total;
                let local_mask = mask_slices.as_ref().map(|ms| match mask {
                    Some(Mask::Keep(_)) => Mask::Keep(&ms[i]),
                    _ => Mask::Drop(&ms[i]),
                });
                let c = spgemm_local_masked(&atilde, &b_slices[i], semiring, cfg.accumulator, local_mask)?;
                m.times.computation_ms = ms(t);
                Ok((c, m))
            })
            .collect::<Result<Vec<_>>>()
    })?;

    let mut metrics = RunMetrics::new(procs);
    metrics.mem_a_bytes = dir.total_nnz() as u64 * ENTRY_BYTES;
    metrics.multiplies = 1;
    let mut slices = Vec::with_capacity(procs);
    for (i, (c, m)) in computed.into_iter().enumerate() {
        metrics.processes[i] = m;
        slices.push(c);
    }
    Ok(DistributedProduct {
        slices,
        dist: b_dist.clone(),
        metrics,
    })
}

/// Operands relabeled by the configured strategy.
struct Prepared<T> {
    a: SparseMatrix<T>,
    b: SparseMatrix<T>,
    a_dist: Distribution1D,
    b_dist: Distribution1D,
    /// Set when the output was permuted symmetrically and must be mapped back.
    unpermute: Option<Permutation>,
}

/// Square `A` and `B` of the same order get the symmetric relabeling
/// `(P A Pᵀ)(P B Pᵀ)`; otherwise only the inner dimension is relabeled,
/// `(A Pᵀ)(P B)`, which leaves the product unchanged.
fn prepare<T: Scalar>(a: &SparseMatrix<T>, b: &SparseMatrix<T>, cfg: &RuntimeConfig) -> Result<Prepared<T>> {
    cfg.validate()?;
    if a.ncols() != b.nrows() {
        return Err(Error::Shape(format!(
            "inner dimensions differ: {}x{} times {}x{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    let (perm, a_dist) = strategy_to_permutation(a, &cfg.strategy, cfg.procs)?;
    let symmetric = a.is_square() && b.is_square();
    let identity = perm.is_identity();
    if symmetric {
        let (pa, pb) = if identity {
            (a.clone(), b.clone())
        } else {
            (permute_symmetric(a, &perm)?, permute_symmetric(b, &perm)?)
        };
        Ok(Prepared {
            a: pa,
            b: pb,
            b_dist: a_dist.clone(),
            a_dist,
            unpermute: (!identity).then(|| perm.inverse()),
        })
    } else {
        let (pa, pb) = if identity {
            (a.clone(), b.clone())
        } else {
            (permute_columns(a, &perm)?, permute_rows(b, &perm)?)
        };
        Ok(Prepared {
            a: pa,
            b: pb,
            a_dist,
            b_dist: Distribution1D::even(b.ncols(), cfg.procs)?,
            unpermute: None,
        })
    }
}

fn run_prepared<S: Semiring>(
    a: &SparseMatrix<S::Scalar>,
    b: &SparseMatrix<S::Scalar>,
    cfg: &RuntimeConfig,
    semiring: &S,
    policy: FetchPolicy,
) -> Result<(SparseMatrix<S::Scalar>, RunMetrics)> {
    let p = prepare(a, b, cfg)?;
    let out = execute(&p.a, &p.b, &p.a_dist, &p.b_dist, cfg, semiring, policy, None)?;
    let mut c = out.gather(b.mode())?;
    if let Some(inv) = &p.unpermute {
        c = permute_symmetric(&c, inv)?;
    }
    Ok((c, out.metrics))
}

/// `C = A * B` through the sparsity-aware 1D algorithm; returns the gathered
/// result in the original labeling.
pub fn spgemm_1d<S: Semiring>(
    a: &SparseMatrix<S::Scalar>,
    b: &SparseMatrix<S::Scalar>,
    cfg: &RuntimeConfig,
    semiring: &S,
) -> Result<(SparseMatrix<S::Scalar>, RunMetrics)> {
    run_prepared(a, b, cfg, semiring, FetchPolicy::Blocked(cfg.blocks))
}

/// Baseline that reads every non-empty remote column regardless of need.
pub fn spgemm_1d_naive<S: Semiring>(
    a: &SparseMatrix<S::Scalar>,
    b: &SparseMatrix<S::Scalar>,
    cfg: &RuntimeConfig,
    semiring: &S,
) -> Result<(SparseMatrix<S::Scalar>, RunMetrics)> {
    run_prepared(a, b, cfg, semiring, FetchPolicy::All)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProcessCv {
    pub rank: usize,
    pub bytes: u64,
    pub intervals: u64,
    pub required_columns: u64,
    pub fetched_columns: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CvReport {
    /// Planned remote bytes over `(P - 1) * mem(A)`.
    #[serde(rename = "cv_over_memA")]
    pub cv_over_mem_a: f64,
    pub total_bytes: u64,
    pub mem_a_bytes: u64,
    pub threshold: f64,
    /// Set when the ratio exceeds the threshold: partitioning is advisable.
    pub advisory: bool,
    pub processes: Vec<ProcessCv>,
}

/// Plans every process's reads without moving data and reports the
/// communication-volume ratio.
pub fn analyze_cv<T: Scalar>(
    a: &SparseMatrix<T>,
    b: &SparseMatrix<T>,
    cfg: &RuntimeConfig,
    threshold: f64,
) -> Result<CvReport> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(Error::Config(format!("threshold {threshold} outside (0, 1]")));
    }
    let p = prepare(a, b, cfg)?;
    let a_slices: Vec<_> = (0..cfg.procs)
        .map(|i| p.a.slice_columns(p.a_dist.range(i)))
        .collect::<Result<_>>()?;
    let (_, dir) = expose_windows(&a_slices)?;
    let mut processes = Vec::with_capacity(cfg.procs);
    for i in 0..cfg.procs {
        let bi = p.b.slice_columns(p.b_dist.range(i))?;
        let hit = build_hit_vector(&bi, p.a.ncols())?;
        let plan = plan_process(i, &hit, &dir, FetchPolicy::Blocked(cfg.blocks))?;
        processes.push(ProcessCv {
            rank: i,
            bytes: plan.planned_bytes,
            intervals: plan.plans.iter().map(|(_, pl)| pl.len() as u64).sum(),
            required_columns: plan.required_columns,
            fetched_columns: plan.planned_columns,
        });
    }
    let total_bytes = processes.iter().map(|p| p.bytes).sum();
    let mem_a_bytes = dir.total_nnz() as u64 * ENTRY_BYTES;
    let ratio = cv_ratio(total_bytes, mem_a_bytes, cfg.procs);
    Ok(CvReport {
        cv_over_mem_a: ratio,
        total_bytes,
        mem_a_bytes,
        threshold,
        advisory: ratio > threshold,
        processes,
    })
}
