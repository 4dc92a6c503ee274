//! Replays the checked-in fuzz seeds through the same checks as the fuzz targets.

use std::fs;
use std::path::Path;

use spgemm1d::layout::parse_partition_vector;
use spgemm1d::sparse::{format_matrix_market, parse_matrix_market};
use spgemm1d::{BoolOrAnd, IntPlusTimes, RealPlusTimes};

fn seeds(target: &str) -> Vec<(String, Vec<u8>)> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fuzz/corpus").join(target);
    let mut out: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (p.display().to_string(), fs::read(&p).unwrap())
        })
        .collect();
    out.sort();
    out
}

#[test]
fn matrix_market_seeds_parse_and_round_trip() {
    let all = seeds("matrix_market");
    assert!(!all.is_empty());
    for (name, data) in all {
        let a = parse_matrix_market(&data[..], &RealPlusTimes).unwrap_or_else(|e| panic!("{name}: {e}"));
        let mut buf = Vec::new();
        format_matrix_market(&a, &mut buf).unwrap();
        assert!(parse_matrix_market(&buf[..], &RealPlusTimes).unwrap().bitwise_eq(&a), "{name}");
        if let Ok(b) = parse_matrix_market(&data[..], &IntPlusTimes) {
            let mut buf = Vec::new();
            format_matrix_market(&b, &mut buf).unwrap();
            assert_eq!(parse_matrix_market(&buf[..], &IntPlusTimes).unwrap(), b, "{name}");
        }
        parse_matrix_market(&data[..], &BoolOrAnd).unwrap();
    }
}

#[test]
fn partition_vector_seeds_parse() {
    for (name, data) in seeds("partition_vector") {
        let p = parse_partition_vector(&data[..]).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert!(p.parts().iter().all(|&x| x < p.nparts()), "{name}");
        assert_eq!(p.part_sizes().iter().sum::<usize>(), p.len());
    }
}
