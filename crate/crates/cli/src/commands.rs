use std::fs;
use std::path::Path;

use serde_json::{json, Value};
use spgemm1d::sparse::{read_matrix_market, write_matrix_market};
use spgemm1d::{
    analyze_cv, bc_approx, compute_vertex_weights, galerkin, greedy_partition, mis2_aggregate, spgemm_1d,
    spgemm_local, BoolOrAnd, Error, GalerkinMode, IntPlusTimes, MmField, PartitionVector, RealPlusTimes, RunMetrics,
    RuntimeConfig, Scalar, Semiring, SparseMatrix, Strategy,
};

use crate::{Cli, Command, ModeArg, RunArgs, SemiringArg, StrategyArg};

/// Largest per-entry relative difference accepted by `--oracle` for reals.
const ORACLE_TOLERANCE: f64 = 1e-10;

pub enum Failure {
    /// Bad flag values or combinations.
    Usage(String),
    /// Unreadable input, failed write or a failed check.
    Runtime(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Runtime(_) => 1,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Runtime(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) => Failure::Usage(e.to_string()),
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

type Outcome<T = ()> = Result<T, Failure>;

fn read<S: Semiring>(path: &Path, s: &S) -> Outcome<SparseMatrix<S::Scalar>> {
    read_matrix_market(path, s).map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))
}

fn runtime_config<T: Scalar>(run: &RunArgs, a: &SparseMatrix<T>) -> Outcome<RuntimeConfig> {
    let strategy = match &run.strategy {
        StrategyArg::Identity => Strategy::Identity,
        StrategyArg::Random(seed) => Strategy::Random { seed: *seed },
        StrategyArg::Partition(path) => {
            let parts =
                PartitionVector::read(path).map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))?;
            Strategy::Partition {
                parts,
                symmetrize: run.symmetrize,
            }
        }
    };
    let mut cfg = RuntimeConfig::new(run.procs)
        .with_blocks(run.blocks)
        .with_strategy(strategy)
        .with_workers(run.workers);
    cfg.accumulator = run.accumulator.into();
    cfg.validate()?;
    if let Strategy::Partition { parts, .. } = &cfg.strategy {
        if parts.len() != a.ncols() {
            return Err(Failure::Usage(format!(
                "partition vector has {} entries, matrix has {} columns",
                parts.len(),
                a.ncols()
            )));
        }
    }
    Ok(cfg)
}

/// Exact config echoed into every report. The worker count is left out:
/// it never changes results or counters.
fn config_json(cli: &Cli, inputs: &[&Path]) -> Value {
    let r = &cli.run;
    json!({
        "procs": r.procs,
        "blocks": r.blocks,
        "strategy": r.strategy.label(),
        "symmetrize": r.symmetrize,
        "semiring": semiring_name(r.semiring),
        "accumulator": format!("{:?}", r.accumulator).to_lowercase(),
        "inputs": inputs.iter().map(|p| p.display().to_string()).collect::<Vec<_>>(),
    })
}

fn semiring_name(s: SemiringArg) -> &'static str {
    match s {
        SemiringArg::Real => RealPlusTimes.name(),
        SemiringArg::Integer => IntPlusTimes.name(),
        SemiringArg::Boolean => BoolOrAnd.name(),
    }
}

fn emit(cli: &Cli, report: Value) -> Outcome {
    let text = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
    match &cli.run.report {
        Some(path) => fs::write(path, text).map_err(|e| Failure::Runtime(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn write_matrix<T: Scalar>(c: &SparseMatrix<T>, out: Option<&Path>) -> Outcome {
    if let Some(path) = out {
        write_matrix_market(c, path).map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}

fn metrics_json(cli: &Cli, m: &RunMetrics) -> Value {
    m.to_json(cli.run.timings)
}

fn shape_json<T: Scalar>(c: &SparseMatrix<T>) -> Value {
    json!({ "nrows": c.nrows(), "ncols": c.ncols(), "nnz": c.nnz() })
}

/// Compares against the serial product; a mismatch fails the run.
fn oracle_json<T: Scalar>(c: &SparseMatrix<T>, reference: &SparseMatrix<T>) -> Outcome<Value> {
    let diff = c.max_rel_diff(reference);
    let ok = match T::FIELD {
        MmField::Real => diff.is_some_and(|d| d <= ORACLE_TOLERANCE),
        _ => c == reference,
    };
    if !ok {
        return Err(Failure::Runtime(format!(
            "result differs from the serial reference (max relative difference {diff:?})"
        )));
    }
    Ok(json!({ "match": true, "max_rel_diff": diff }))
}

fn multiply_with<S: Semiring>(
    cli: &Cli,
    s: &S,
    a_path: &Path,
    b_path: Option<&Path>,
    out: Option<&Path>,
    oracle: bool,
) -> Outcome {
    let a = read(a_path, s)?;
    let b = match b_path {
        Some(p) => read(p, s)?,
        None => {
            if !a.is_square() {
                return Err(Failure::Runtime(format!("cannot square a {}x{} matrix", a.nrows(), a.ncols())));
            }
            a.clone()
        }
    };
    let cfg = runtime_config(&cli.run, &a)?;
    let (c, metrics) = spgemm_1d(&a, &b, &cfg, s)?;
    let mut report = json!({
        "command": if b_path.is_some() { "multiply" } else { "square" },
        "config": config_json(cli, &[Some(a_path), b_path].into_iter().flatten().collect::<Vec<_>>()),
        "metrics": metrics_json(cli, &metrics),
        "result": shape_json(&c),
    });
    if oracle {
        let reference = spgemm_local(&a, &b, s, cfg.accumulator)?;
        report["oracle"] = oracle_json(&c, &reference)?;
    }
    write_matrix(&c, out)?;
    emit(cli, report)
}

fn multiply(cli: &Cli, a: &Path, b: Option<&Path>, out: Option<&Path>, oracle: bool) -> Outcome {
    match cli.run.semiring {
        SemiringArg::Real => multiply_with(cli, &RealPlusTimes, a, b, out, oracle),
        SemiringArg::Integer => multiply_with(cli, &IntPlusTimes, a, b, out, oracle),
        SemiringArg::Boolean => multiply_with(cli, &BoolOrAnd, a, b, out, oracle),
    }
}

fn dense_galerkin_check(a: &SparseMatrix<f64>, r: &SparseMatrix<f64>, c: &SparseMatrix<f64>) -> Outcome<Value> {
    let rt = r.transpose();
    let rta = spgemm_local(&rt, a, &RealPlusTimes, Default::default())?;
    let reference = spgemm_local(&rta, r, &RealPlusTimes, Default::default())?;
    oracle_json(c, &reference)
}

fn run_galerkin(
    cli: &Cli,
    a_path: &Path,
    restriction: Option<&Path>,
    mode: ModeArg,
    seed: Option<u64>,
    out: Option<&Path>,
    oracle: bool,
) -> Outcome {
    if cli.run.semiring != SemiringArg::Real {
        return Err(Failure::Usage("galerkin runs over the real semiring only".into()));
    }
    let a = read(a_path, &RealPlusTimes)?;
    let (r, aggregation) = match restriction {
        Some(p) => (read(p, &RealPlusTimes)?, Value::Null),
        None => {
            let agg = mis2_aggregate(&a, seed)?;
            let info = json!({ "aggregates": agg.num_aggregates(), "seed": seed });
            (agg.matrix, info)
        }
    };
    let cfg = runtime_config(&cli.run, &a)?;
    let mode = match mode {
        ModeArg::Onedim => GalerkinMode::Onedim,
        ModeArg::OuterProductRight => GalerkinMode::OuterProductRight,
    };
    let (c, metrics) = galerkin(&a, &r, mode, &cfg)?;
    let mut inputs = vec![a_path];
    inputs.extend(restriction);
    let mut report = json!({
        "command": "galerkin",
        "config": config_json(cli, &inputs),
        "mode": mode,
        "aggregation": aggregation,
        "metrics": metrics_json(cli, &metrics),
        "result": shape_json(&c),
    });
    if oracle {
        report["oracle"] = dense_galerkin_check(&a, &r, &c)?;
    }
    write_matrix(&c, out)?;
    emit(cli, report)
}

fn run_bc(cli: &Cli, path: &Path, sources: Option<usize>, batch: usize, seed: u64, out: Option<&Path>) -> Outcome {
    let g = read(path, &RealPlusTimes)?;
    let n = g.ncols();
    let sources = sources.unwrap_or(n);
    let cfg = runtime_config(&cli.run, &g)?;
    let (scores, metrics) = bc_approx(&g, sources, batch, seed, &cfg)?;
    if let Some(p) = out {
        let text: String = scores.0.iter().map(|s| format!("{s:?}\n")).collect();
        fs::write(p, text).map_err(|e| Failure::Runtime(format!("{}: {e}", p.display())))?;
    }
    let top = scores
        .0
        .iter()
        .copied()
        .enumerate()
        .max_by(|x, y| x.1.total_cmp(&y.1).then(y.0.cmp(&x.0)));
    let report = json!({
        "command": "bc",
        "config": config_json(cli, &[path]),
        "sources": sources,
        "batch": batch,
        "seed": seed,
        "metrics": metrics_json(cli, &metrics),
        "result": { "vertices": n, "max_vertex": top.map(|t| t.0), "max_score": top.map(|t| t.1) },
    });
    emit(cli, report)
}

fn run_analyze(cli: &Cli, a_path: &Path, b_path: Option<&Path>, threshold: f64) -> Outcome {
    let a = read(a_path, &RealPlusTimes)?;
    let b = match b_path {
        Some(p) => read(p, &RealPlusTimes)?,
        None => a.clone(),
    };
    let cfg = runtime_config(&cli.run, &a)?;
    let r = analyze_cv(&a, &b, &cfg, threshold)?;
    if r.advisory {
        eprintln!(
            "advisory: cv_over_memA = {:.4} exceeds {threshold}; it is advisable to apply graph partitioning",
            r.cv_over_mem_a
        );
    }
    let report = json!({
        "command": "analyze",
        "config": config_json(cli, &[Some(a_path), b_path].into_iter().flatten().collect::<Vec<_>>()),
        "analysis": r,
    });
    emit(cli, report)
}

fn run_partition(cli: &Cli, a_path: &Path, out: &Path) -> Outcome {
    let a = read(a_path, &RealPlusTimes)?;
    if !a.is_square() {
        return Err(Failure::Runtime(format!("cannot partition a {}x{} matrix", a.nrows(), a.ncols())));
    }
    if !cli.run.symmetrize && !a.is_pattern_symmetric() {
        return Err(Failure::Usage("matrix pattern is not symmetric; pass --symmetrize to use A + Aᵀ".into()));
    }
    let r = greedy_partition(&a, cli.run.procs, &compute_vertex_weights(&a))?;
    r.parts.write(out).map_err(|e| Failure::Runtime(format!("{}: {e}", out.display())))?;
    let report = json!({
        "command": "partition",
        "config": config_json(cli, &[a_path]),
        "parts": r.parts.nparts(),
        "part_sizes": r.parts.part_sizes(),
        "part_weights": r.part_weights,
        "imbalance": r.imbalance,
        "bound": r.bound,
        "within_bound": r.within_bound,
        "cut_edges": r.cut_edges,
        "round_robin_fallback": r.round_robin_fallback,
    });
    emit(cli, report)
}

pub fn run(cli: &Cli) -> Outcome {
    match &cli.command {
        Command::Multiply { a, b, out, oracle } => multiply(cli, a, Some(b), out.as_deref(), *oracle),
        Command::Square { a, out, oracle } => multiply(cli, a, None, out.as_deref(), *oracle),
        Command::Galerkin {
            a,
            restriction,
            mode,
            seed,
            out,
            oracle,
        } => run_galerkin(cli, a, restriction.as_deref(), *mode, *seed, out.as_deref(), *oracle),
        Command::Bc {
            graph,
            sources,
            batch,
            seed,
            out,
        } => run_bc(cli, graph, *sources, *batch, *seed, out.as_deref()),
        Command::Analyze { a, b, threshold } => run_analyze(cli, a, b.as_deref(), *threshold),
        Command::Partition { a, out } => run_partition(cli, a, out),
    }
}
