#![no_main]

use libfuzzer_sys::fuzz_target;
use spgemm1d::layout::parse_partition_vector;

fuzz_target!(|data: &[u8]| {
    if let Ok(p) = parse_partition_vector(data) {
        assert!(p.parts().iter().all(|&x| x < p.nparts()));
        assert_eq!(p.part_sizes().iter().sum::<usize>(), p.len());
    }
});
