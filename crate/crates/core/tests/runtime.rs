mod common;

use proptest::prelude::*;
use spgemm1d::runtime::{plan_block_fetch, ENTRY_BYTES};
use spgemm1d::{
    analyze_cv, greedy_partition, compute_vertex_weights, spgemm_1d, spgemm_1d_naive, spgemm_local, Accumulator,
    IntPlusTimes, RealPlusTimes, RuntimeConfig, SparseMatrix, StorageMode, Strategy, Triplet,
};

fn real(n: usize, m: usize, entries: &[(usize, usize, f64)]) -> SparseMatrix<f64> {
    let ts = entries.iter().map(|&(i, j, v)| Triplet::new(i, j, v));
    SparseMatrix::from_triplets(n, m, ts, StorageMode::Dcsc, &RealPlusTimes).unwrap()
}

/// 8x8 matrix whose first block of columns hits rows {0, 2, 3, 5}.
fn two_process_example() -> SparseMatrix<f64> {
    let cols: [&[usize]; 8] = [&[0, 3], &[2, 5], &[], &[3, 5], &[4, 6], &[1, 5, 7], &[4, 6], &[6, 7]];
    let e: Vec<_> = cols
        .iter()
        .enumerate()
        .flat_map(|(j, rows)| rows.iter().map(move |&i| (i, j, 1.0 + (i * 8 + j) as f64)))
        .collect();
    real(8, 8, &e)
}

#[test]
fn two_process_example_fetches_one_block() {
    let a = two_process_example();
    assert_eq!(a.nzc(), 7);
    let cfg = RuntimeConfig::new(2).with_blocks(2);
    let (c, m) = spgemm_1d(&a, &a, &cfg, &RealPlusTimes).unwrap();
    common::matches_oracle(&c, &a, &a, &RealPlusTimes, common::rel_close(1e-14)).unwrap();
    let p0 = &m.processes[0];
    // remote columns 4..8 split into {4, 5} and {6, 7}; only column 5 is needed
    assert_eq!(p0.required_columns, 1);
    assert_eq!(p0.fetched_columns, 2);
    assert_eq!(p0.intervals, 1);
    assert_eq!(p0.messages, 2);
    assert_eq!(p0.bytes_required, 3 * ENTRY_BYTES);
    assert_eq!(p0.bytes_fetched, 5 * ENTRY_BYTES);
}

#[test]
fn identity_times_identity_moves_nothing() {
    let n = 16;
    let id = real(n, n, &(0..n).map(|i| (i, i, 1.0)).collect::<Vec<_>>());
    let (c, m) = spgemm_1d(&id, &id, &RuntimeConfig::new(4), &RealPlusTimes).unwrap();
    assert_eq!(c, id);
    assert_eq!(m.total_bytes(), 0);
    assert_eq!(m.total_messages(), 0);
}

#[test]
fn single_process_equals_local() {
    let mut rng = common::rng(3);
    let a = common::random_int(&mut rng, 40, 30, 0.1);
    let b = common::random_int(&mut rng, 30, 20, 0.1);
    let (c, m) = spgemm_1d(&a, &b, &RuntimeConfig::new(1), &IntPlusTimes).unwrap();
    assert_eq!(c, spgemm_local(&a, &b, &IntPlusTimes, Accumulator::Hybrid).unwrap());
    assert_eq!(m.total_bytes(), 0);
}

#[test]
fn aligned_block_diagonal_needs_no_remote_columns() {
    let mut rng = common::rng(4);
    for procs in [2, 4, 8] {
        let a = common::block_diagonal(&mut rng, 128, procs, 0.1);
        let (_, m) = spgemm_1d(&a, &a, &RuntimeConfig::new(procs), &RealPlusTimes).unwrap();
        assert_eq!(m.total_bytes(), 0);
        let r = analyze_cv(&a, &a, &RuntimeConfig::new(procs), 0.3).unwrap();
        assert_eq!(r.cv_over_mem_a, 0.0);
        assert!(!r.advisory);
    }
}

#[test]
fn every_column_needed_everywhere_gives_ratio_one() {
    let n = 64;
    let mut rng = common::rng(5);
    let a = common::random_real(&mut rng, n, n, 0.1);
    let a = real(
        n,
        n,
        &a.iter().map(|t| (t.row, t.col, t.val)).chain((0..n).map(|j| (j, j, 1.0))).collect::<Vec<_>>(),
    );
    for procs in [2, 4, 8] {
        // one full column per process slice of B hits every row of A
        let per = n / procs;
        let b = real(n, n, &(0..procs).flat_map(|p| (0..n).map(move |i| (i, p * per, 1.0))).collect::<Vec<_>>());
        for k in [1, 3, 2048] {
            let cfg = RuntimeConfig::new(procs).with_blocks(k);
            let r = analyze_cv(&a, &b, &cfg, 0.3).unwrap();
            assert!((r.cv_over_mem_a - 1.0).abs() < 1e-12, "{}", r.cv_over_mem_a);
            assert!(r.advisory);
            let (_, m) = spgemm_1d(&a, &b, &cfg, &RealPlusTimes).unwrap();
            assert_eq!(m.total_bytes(), r.total_bytes);
            assert_eq!(m.cv_over_mem_a(), r.cv_over_mem_a);
        }
    }
}

#[test]
fn ten_column_remote_with_two_groups() {
    // 20 columns with one entry each; process 0's B needs remote columns 10 and 19
    let a = real(20, 20, &(0..20).map(|j| (j, j, 1.0)).collect::<Vec<_>>());
    let b = real(20, 20, &[(10, 0, 1.0), (19, 1, 1.0), (12, 12, 1.0)]);
    let cfg = RuntimeConfig::new(2).with_blocks(2);
    let r = analyze_cv(&a, &b, &cfg, 0.3).unwrap();
    assert_eq!(r.processes[0].fetched_columns, 10);
    assert_eq!(r.processes[0].intervals, 1);
    assert_eq!(r.total_bytes, 10 * ENTRY_BYTES);
    assert!((r.cv_over_mem_a - 0.5).abs() < 1e-15);
    assert!(r.advisory);
    assert!(!analyze_cv(&a, &b, &cfg, 0.5).unwrap().advisory);
    assert!(analyze_cv(&a, &b, &cfg, 0.0).is_err());
    assert!(analyze_cv(&a, &b, &cfg, 1.5).is_err());
}

#[test]
fn exact_fetch_when_blocks_cover_every_column() {
    let mut rng = common::rng(6);
    for _ in 0..10 {
        let a = common::random_real(&mut rng, 96, 96, 0.05);
        let b = common::random_real(&mut rng, 96, 96, 0.03);
        let cfg = RuntimeConfig::new(4).with_blocks(96);
        let (_, m) = spgemm_1d(&a, &b, &cfg, &RealPlusTimes).unwrap();
        for p in &m.processes {
            assert_eq!(p.fetched_columns, p.required_columns);
            assert_eq!(p.bytes_fetched, p.bytes_required);
        }
    }
}

#[test]
fn refining_blocks_never_fetches_more() {
    // every column non-empty and 64 columns per process, so each K divides the next
    let mut rng = common::rng(7);
    let n = 256;
    let a = common::random_real(&mut rng, n, n, 0.02);
    let a = real(n, n, &a.iter().map(|t| (t.row, t.col, t.val)).chain((0..n).map(|j| (j, j, 1.0))).collect::<Vec<_>>());
    let b = common::random_real(&mut rng, n, n, 0.01);
    let mut last = u64::MAX;
    for k in [1, 2, 4, 8, 16, 32, 64] {
        let cfg = RuntimeConfig::new(4).with_blocks(k);
        let r = analyze_cv(&a, &b, &cfg, 1.0).unwrap();
        assert!(r.total_bytes <= last, "K={k}");
        last = r.total_bytes;
        assert!(r.processes.iter().all(|p| p.intervals <= 3 * k as u64));
    }
}

#[test]
fn naive_never_reads_less() {
    let mut rng = common::rng(8);
    for case in 0..30 {
        let procs = [2, 3, 4, 8][case % 4];
        let a = common::random_real(&mut rng, 80, 80, 0.04);
        let b = common::random_real(&mut rng, 80, 60, 0.04);
        let cfg = RuntimeConfig::new(procs).with_blocks([1, 4, 64][case % 3]);
        let (c, aware) = spgemm_1d(&a, &b, &cfg, &RealPlusTimes).unwrap();
        let (cn, naive) = spgemm_1d_naive(&a, &b, &cfg, &RealPlusTimes).unwrap();
        assert!(c.bitwise_eq(&cn));
        for (x, y) in aware.processes.iter().zip(&naive.processes) {
            assert!(x.bytes_fetched <= y.bytes_fetched);
        }
    }
}

#[test]
fn strategies_give_the_same_product() {
    let mut rng = common::rng(9);
    let a = common::random_symmetric(&mut rng, 120, 0.03);
    let b = common::random_real(&mut rng, 120, 120, 0.03);
    let reference = spgemm_local(&a, &b, &RealPlusTimes, Accumulator::Hybrid).unwrap();
    let parts = greedy_partition(&a, 4, &compute_vertex_weights(&a)).unwrap().parts;
    for strategy in [
        Strategy::Identity,
        Strategy::Random { seed: 1 },
        Strategy::Partition { parts, symmetrize: false },
    ] {
        let cfg = RuntimeConfig::new(4).with_strategy(strategy);
        let (c, _) = spgemm_1d(&a, &b, &cfg, &RealPlusTimes).unwrap();
        assert!(c.max_rel_diff(&reference).unwrap() <= 1e-12);
    }
    // rectangular operands relabel the inner dimension only
    let r = common::random_real(&mut rng, 50, 120, 0.05);
    let cfg = RuntimeConfig::new(3).with_strategy(Strategy::Random { seed: 4 });
    let (c, _) = spgemm_1d(&r, &b, &cfg, &RealPlusTimes).unwrap();
    let expected = spgemm_local(&r, &b, &RealPlusTimes, Accumulator::Hybrid).unwrap();
    assert!(c.max_rel_diff(&expected).unwrap() <= 1e-12);
}

#[test]
fn worker_count_does_not_change_results() {
    let mut rng = common::rng(10);
    let a = common::random_real(&mut rng, 200, 200, 0.03);
    let cfg = RuntimeConfig::new(8).with_strategy(Strategy::Random { seed: 2 }).with_blocks(4);
    let (c1, m1) = spgemm_1d(&a, &a, &cfg.clone().with_workers(1), &RealPlusTimes).unwrap();
    for w in [2, 4, 8] {
        let (c, m) = spgemm_1d(&a, &a, &cfg.clone().with_workers(w), &RealPlusTimes).unwrap();
        assert!(c.bitwise_eq(&c1));
        assert_eq!(m.to_json(false), m1.to_json(false));
    }
}

#[test]
fn bad_configs_are_rejected() {
    let a = real(4, 4, &[(0, 0, 1.0)]);
    assert!(spgemm_1d(&a, &a, &RuntimeConfig::new(0), &RealPlusTimes).is_err());
    assert!(spgemm_1d(&a, &a, &RuntimeConfig::new(2).with_blocks(0), &RealPlusTimes).is_err());
    let b = real(5, 4, &[]);
    assert!(matches!(spgemm_1d(&a, &b, &RuntimeConfig::new(2), &RealPlusTimes), Err(spgemm1d::Error::Shape(_))));
}

proptest! {
    #[test]
    fn block_plans_cover_required_within_k(
        len in 1usize..200,
        k in 1usize..40,
        picks in prop::collection::vec(any::<prop::sample::Index>(), 0..30),
    ) {
        let remote: Vec<usize> = (0..len).map(|i| 3 * i + 1).collect();
        let mut required: Vec<usize> = picks.iter().map(|p| remote[p.index(len)]).collect();
        required.sort_unstable();
        required.dedup();
        let plan = plan_block_fetch(&required, &remote, k).unwrap();
        prop_assert!(plan.len() <= k);
        for &r in &required {
            prop_assert!(plan.intervals.iter().any(|iv| iv.first <= r && r <= iv.last));
        }
        for w in plan.intervals.windows(2) {
            prop_assert!(w[0].last < w[1].first);
        }
        if required.is_empty() {
            prop_assert!(plan.is_empty());
        }
        let exact = plan_block_fetch(&required, &remote, len).unwrap();
        let fetched: Vec<usize> = remote
            .iter()
            .copied()
            .filter(|c| exact.intervals.iter().any(|iv| iv.first <= *c && *c <= iv.last))
            .collect();
        prop_assert_eq!(fetched, required);
    }
}
