#![allow(dead_code, clippy::needless_range_loop)]

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spgemm1d::{BoolOrAnd, IntPlusTimes, RealPlusTimes, Semiring, SparseMatrix, StorageMode, Triplet};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Row-major dense copy; absent entries are `zero`.
pub fn to_dense<T: spgemm1d::Scalar>(a: &SparseMatrix<T>, zero: T) -> Vec<Vec<T>> {
    let mut d = vec![vec![zero; a.ncols()]; a.nrows()];
    for t in a.iter() {
        d[t.row][t.col] = t.val;
    }
    d
}

/// Dense triple loop over a semiring, adding in ascending inner index.
/// Also returns the structural pattern (some `k` with both entries stored).
pub fn dense_mult<S: Semiring>(
    a: &SparseMatrix<S::Scalar>,
    b: &SparseMatrix<S::Scalar>,
    s: &S,
) -> (Vec<Vec<S::Scalar>>, Vec<Vec<bool>>) {
    let (m, k, n) = (a.nrows(), a.ncols(), b.ncols());
    let mut ad = vec![vec![None; k]; m];
    for t in a.iter() {
        ad[t.row][t.col] = Some(t.val);
    }
    let mut bd = vec![vec![None; n]; k];
    for t in b.iter() {
        bd[t.row][t.col] = Some(t.val);
    }
    let mut c = vec![vec![s.zero(); n]; m];
    let mut pat = vec![vec![false; n]; m];
    for i in 0..m {
        for j in 0..n {
            for l in 0..k {
                if let (Some(x), Some(y)) = (ad[i][l], bd[l][j]) {
                    c[i][j] = if pat[i][j] { s.add(c[i][j], s.mul(x, y)) } else { s.mul(x, y) };
                    pat[i][j] = true;
                }
            }
        }
    }
    (c, pat)
}

/// Checks `c` against the dense oracle: same structural pattern, values
/// compared by `eq`.
pub fn matches_oracle<S: Semiring>(
    c: &SparseMatrix<S::Scalar>,
    a: &SparseMatrix<S::Scalar>,
    b: &SparseMatrix<S::Scalar>,
    s: &S,
    eq: impl Fn(S::Scalar, S::Scalar) -> bool,
) -> Result<(), String> {
    let (d, pat) = dense_mult(a, b, s);
    if c.shape() != (a.nrows(), b.ncols()) {
        return Err(format!("shape {:?}", c.shape()));
    }
    let mut count = 0;
    for t in c.iter() {
        if !pat[t.row][t.col] {
            return Err(format!("unexpected entry ({}, {})", t.row, t.col));
        }
        if !eq(t.val, d[t.row][t.col]) {
            return Err(format!("value at ({}, {}): {:?} vs {:?}", t.row, t.col, t.val, d[t.row][t.col]));
        }
        count += 1;
    }
    let expected: usize = pat.iter().map(|r| r.iter().filter(|&&x| x).count()).sum();
    if count != expected {
        return Err(format!("{count} entries, oracle has {expected}"));
    }
    Ok(())
}

pub fn rel_close(tol: f64) -> impl Fn(f64, f64) -> bool {
    move |x, y| (x - y).abs() <= tol * x.abs().max(y.abs()).max(1.0)
}

fn pattern(rng: &mut ChaCha8Rng, m: usize, n: usize, density: f64) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for j in 0..n {
        for i in 0..m {
            if rng.gen_bool(density) {
                out.push((i, j));
            }
        }
    }
    out
}

pub fn random_real(rng: &mut ChaCha8Rng, m: usize, n: usize, density: f64) -> SparseMatrix<f64> {
    let ts: Vec<_> = pattern(rng, m, n, density)
        .into_iter()
        .map(|(i, j)| Triplet::new(i, j, rng.gen_range(-1.0..1.0)))
        .collect();
    SparseMatrix::from_triplets(m, n, ts, StorageMode::Dcsc, &RealPlusTimes).unwrap()
}

pub fn random_int(rng: &mut ChaCha8Rng, m: usize, n: usize, density: f64) -> SparseMatrix<i64> {
    let ts: Vec<_> = pattern(rng, m, n, density)
        .into_iter()
        .map(|(i, j)| Triplet::new(i, j, rng.gen_range(-5..=5)))
        .collect();
    SparseMatrix::from_triplets(m, n, ts, StorageMode::Dcsc, &IntPlusTimes).unwrap()
}

pub fn random_bool(rng: &mut ChaCha8Rng, m: usize, n: usize, density: f64) -> SparseMatrix<bool> {
    let ts: Vec<_> = pattern(rng, m, n, density)
        .into_iter()
        .map(|(i, j)| Triplet::new(i, j, true))
        .collect();
    SparseMatrix::from_triplets(m, n, ts, StorageMode::Dcsc, &BoolOrAnd).unwrap()
}

/// Symmetric real matrix with random off-diagonal values and a diagonal of 4.
pub fn random_symmetric(rng: &mut ChaCha8Rng, n: usize, density: f64) -> SparseMatrix<f64> {
    let mut ts = Vec::new();
    for j in 0..n {
        ts.push(Triplet::new(j, j, 4.0));
        for i in 0..j {
            if rng.gen_bool(density) {
                let v = rng.gen_range(-1.0..1.0);
                ts.push(Triplet::new(i, j, v));
                ts.push(Triplet::new(j, i, v));
            }
        }
    }
    SparseMatrix::from_triplets(n, n, ts, StorageMode::Dcsc, &RealPlusTimes).unwrap()
}

/// Random connected undirected graph: a random spanning tree plus extra edges.
pub fn random_connected(rng: &mut ChaCha8Rng, n: usize, extra: usize) -> SparseMatrix<f64> {
    let mut edges = Vec::new();
    for v in 1..n {
        edges.push((rng.gen_range(0..v), v));
    }
    for _ in 0..extra {
        let (u, v) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if u != v {
            edges.push((u, v));
        }
    }
    let ts = edges
        .iter()
        .flat_map(|&(u, v)| [Triplet::new(u, v, 1.0), Triplet::new(v, u, 1.0)]);
    let g = SparseMatrix::from_triplets(n, n, ts, StorageMode::Dcsc, &RealPlusTimes).unwrap();
    g.map_values(|_| 1.0)
}

/// Block-diagonal matrix with `blocks` equal square blocks.
pub fn block_diagonal(rng: &mut ChaCha8Rng, n: usize, blocks: usize, density: f64) -> SparseMatrix<f64> {
    let bs = n / blocks;
    let mut ts = Vec::new();
    for b in 0..blocks {
        let lo = b * bs;
        let hi = if b + 1 == blocks { n } else { lo + bs };
        for j in lo..hi {
            ts.push(Triplet::new(j, j, 1.0));
            for i in lo..hi {
                if i != j && rng.gen_bool(density) {
                    ts.push(Triplet::new(i, j, rng.gen_range(-1.0..1.0)));
                }
            }
        }
    }
    SparseMatrix::from_triplets(n, n, ts, StorageMode::Dcsc, &RealPlusTimes).unwrap()
}

/// Symmetric banded pattern, `|i - j| <= half`, entries kept with `density`.
pub fn banded(rng: &mut ChaCha8Rng, n: usize, half: usize, density: f64) -> SparseMatrix<f64> {
    let mut ts = Vec::new();
    for j in 0..n {
        ts.push(Triplet::new(j, j, 2.0));
        for i in j.saturating_sub(half)..j {
            if rng.gen_bool(density) {
                ts.push(Triplet::new(i, j, 1.0));
                ts.push(Triplet::new(j, i, 1.0));
            }
        }
    }
    SparseMatrix::from_triplets(n, n, ts, StorageMode::Dcsc, &RealPlusTimes).unwrap()
}

pub fn adjacency(g: &SparseMatrix<f64>) -> Vec<Vec<usize>> {
    let n = g.ncols();
    let mut adj = vec![Vec::new(); n];
    for t in g.iter() {
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

/// Serial queue-based Brandes dependency sums from the given sources,
/// unhalved.
pub fn brandes(adj: &[Vec<usize>], sources: &[usize]) -> Vec<f64> {
    let n = adj.len();
    let mut bc = vec![0.0; n];
    for &s in sources {
        let mut stack = Vec::new();
        let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut sigma = vec![0.0f64; n];
        let mut dist = vec![-1i64; n];
        sigma[s] = 1.0;
        dist[s] = 0;
        let mut q = VecDeque::from([s]);
        while let Some(v) = q.pop_front() {
            stack.push(v);
            for &w in &adj[v] {
                if dist[w] < 0 {
                    dist[w] = dist[v] + 1;
                    q.push_back(w);
                }
                if dist[w] == dist[v] + 1 {
                    sigma[w] += sigma[v];
                    preds[w].push(v);
                }
            }
        }
        let mut delta = vec![0.0; n];
        while let Some(w) = stack.pop() {
            for &v in &preds[w] {
                delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
            }
            if w != s {
                bc[w] += delta[w];
            }
        }
    }
    bc
}

/// Exhaustive distance table by BFS from every vertex.
pub fn all_distances(adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let n = adj.len();
    (0..n)
        .map(|s| {
            let mut d = vec![usize::MAX; n];
            d[s] = 0;
            let mut q = VecDeque::from([s]);
            while let Some(v) = q.pop_front() {
                for &w in &adj[v] {
                    if d[w] == usize::MAX {
                        d[w] = d[v] + 1;
                        q.push_back(w);
                    }
                }
            }
            d
        })
        .collect()
}
