use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::layout::{strategy_to_permutation, Distribution1D};
use crate::local::{estimate_flops, spgemm_local};
use crate::runtime::{execute_1d, ProcessMetrics, RunMetrics, RuntimeConfig, ENTRY_BYTES};
use crate::semiring::{RealPlusTimes, Semiring};
use crate::sparse::{permute_rows, permute_symmetric, SparseMatrix, StorageMode, Triplet};

/// Bytes per redistributed `(row, col, value)` entry.
pub const TRIPLET_BYTES: u64 = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GalerkinMode {
    /// Both multiplies through the sparsity-aware 1D algorithm.
    #[default]
    Onedim,
    /// Right multiply through the outer-product 1D algorithm.
    OuterProductRight,
}

/// `Rᵀ A R`. The left multiply `Rᵀ A` always runs the sparsity-aware 1D
/// algorithm; `mode` picks the algorithm for `(Rᵀ A) R`.
pub fn galerkin(
    a: &SparseMatrix<f64>,
    r: &SparseMatrix<f64>,
    mode: GalerkinMode,
    cfg: &RuntimeConfig,
) -> Result<(SparseMatrix<f64>, RunMetrics)> {
    if !a.is_square() || r.nrows() != a.nrows() {
        return Err(Error::Shape(format!(
            "Galerkin product needs square A and R with matching rows, got {}x{} and {}x{}",
            a.nrows(),
            a.ncols(),
            r.nrows(),
            r.ncols()
        )));
    }
    // Rᵀ A R = (P R)ᵀ (P A Pᵀ) (P R)
    let (perm, dist) = strategy_to_permutation(a, &cfg.strategy, cfg.procs)?;
    let (pa, pr) = if perm.is_identity() {
        (a.clone(), r.clone())
    } else {
        (permute_symmetric(a, &perm)?, permute_rows(r, &perm)?)
    };
    let rt = pr.transpose();
    let coarse = Distribution1D::even(r.ncols(), cfg.procs)?;

    let left = execute_1d(&rt, &pa, &dist, &dist, cfg, &RealPlusTimes)?;
    let rta = left.gather(StorageMode::Dcsc)?;
    let mut metrics = left.metrics;
    let c = match mode {
        GalerkinMode::Onedim => {
            let right = execute_1d(&rta, &pr, &dist, &coarse, cfg, &RealPlusTimes)?;
            metrics.merge(&right.metrics);
            right.gather(StorageMode::Dcsc)?
        }
        GalerkinMode::OuterProductRight => {
            let (c, m) = outer_product_1d(&rta, &pr, &dist, cfg, &RealPlusTimes)?;
            metrics.merge(&m);
            c
        }
    };
    Ok((c, metrics))
}

/// `C = A * B` as a sum of outer-product partials.
///
/// `B` starts column-distributed (evenly) and is redistributed so process `i`
/// holds the row block matching its column block of `A` (given by `dist`).
/// Each process forms `A_i * B_i`; the partials are sent to the owners of
/// their output columns and merged with the semiring's `add` in process order.
pub fn outer_product_1d<S: Semiring>(
    a: &SparseMatrix<S::Scalar>,
    b: &SparseMatrix<S::Scalar>,
    dist: &Distribution1D,
    cfg: &RuntimeConfig,
    semiring: &S,
) -> Result<(SparseMatrix<S::Scalar>, RunMetrics)> {
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
    if dist.procs() != cfg.procs || dist.len() != a.ncols() {
        return Err(Error::Config("distribution does not match A or the process count".into()));
    }
    let procs = cfg.procs;
    let out_dist = Distribution1D::even(b.ncols(), procs)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(if cfg.workers == 0 { procs } else { cfg.workers.min(procs) }.max(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;

    let partials: Vec<(SparseMatrix<S::Scalar>, ProcessMetrics)> = pool.install(|| {
        (0..procs)
            .into_par_iter()
            .map(|i| -> Result<_> {
                let t = Instant::now();
                let a_i = a.slice_columns(dist.range(i))?;
                let b_rows = b.slice_rows(dist.range(i))?;
                // entries of the row block that were held by another column owner
                let mut senders = vec![0u64; procs];
                for (j, rows, _) in b_rows.columns() {
                    senders[out_dist.owner(j)] += rows.len() as u64;
                }
                senders[i] = 0;
                let comm_ms = t.elapsed().as_secs_f64() * 1e3;
                let t = Instant::now();
                let flops = estimate_flops(&a_i, &b_rows)?.total;
                let partial = spgemm_local(&a_i, &b_rows, semiring, cfg.accumulator)?;
                let m = ProcessMetrics {
                    rank: i,
                    bytes_fetched: senders.iter().sum::<u64>() * TRIPLET_BYTES,
                    bytes_required: senders.iter().sum::<u64>() * TRIPLET_BYTES,
                    messages: senders.iter().filter(|&&c| c > 0).count() as u64,
                    flops,
                    times: crate::runtime::PhaseTimes {
                        communication_ms: comm_ms,
                        computation_ms: t.elapsed().as_secs_f64() * 1e3,
                        other_ms: 0.0,
                    },
                    ..Default::default()
                };
                Ok((partial, m))
            })
            .collect::<Result<Vec<_>>>()
    })?;

    let mut metrics = RunMetrics::new(procs);
    metrics.mem_a_bytes = a.nnz() as u64 * ENTRY_BYTES;
    metrics.multiplies = 1;
    for (i, (_, m)) in partials.iter().enumerate() {
        metrics.processes[i] = m.clone();
    }
    // partial pieces travel to the owners of their output columns
    for (src, (partial, _)) in partials.iter().enumerate() {
        for owner in 0..procs {
            if owner == src {
                continue;
            }
            let r = out_dist.range(owner);
            let sent: usize = partial.columns().filter(|(j, _, _)| r.contains(j)).map(|c| c.1.len()).sum();
            if sent > 0 {
                let p = &mut metrics.processes[owner];
                p.bytes_fetched += sent as u64 * TRIPLET_BYTES;
                p.bytes_required += sent as u64 * TRIPLET_BYTES;
                p.messages += 1;
            }
        }
    }

    let merged: Vec<SparseMatrix<S::Scalar>> = pool.install(|| {
        (0..procs)
            .into_par_iter()
            .map(|owner| {
                let r = out_dist.range(owner);
                let ts = partials.iter().flat_map(|(p, _)| {
                    p.iter()
                        .filter(|t| r.contains(&t.col))
                        .map(|t| Triplet::new(t.row, t.col - r.start, t.val))
                        .collect::<Vec<_>>()
                });
                SparseMatrix::from_triplets(a.nrows(), r.len(), ts, StorageMode::Dcsc, semiring)
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let c = SparseMatrix::concat_columns(&merged, b.mode())?;
    Ok((c, metrics))
}
