//! Matrix Market parser: arbitrary bytes must give a matrix or an error.
//! Accepted matrices must round-trip through the writer.

#![no_main]

use libfuzzer_sys::fuzz_target;
use spgemm1d::sparse::{format_matrix_market, parse_matrix_market};
use spgemm1d::{BoolOrAnd, IntPlusTimes, RealPlusTimes};

fuzz_target!(|data: &[u8]| {
    if let Ok(a) = parse_matrix_market(data, &RealPlusTimes) {
        assert!(a.nnz() <= a.nrows().saturating_mul(a.ncols()));
        let mut buf = Vec::new();
        format_matrix_market(&a, &mut buf).unwrap();
        let back = parse_matrix_market(&buf[..], &RealPlusTimes).unwrap();
        assert!(back.bitwise_eq(&a) || a.iter().any(|t| t.val.is_nan()));
    }
    if let Ok(a) = parse_matrix_market(data, &IntPlusTimes) {
        let mut buf = Vec::new();
        format_matrix_market(&a, &mut buf).unwrap();
        assert_eq!(parse_matrix_market(&buf[..], &IntPlusTimes).unwrap(), a);
    }
    let _ = parse_matrix_market(data, &BoolOrAnd);
});
