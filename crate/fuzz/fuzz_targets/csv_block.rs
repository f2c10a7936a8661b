#![no_main]

use libfuzzer_sys::fuzz_target;
use quartic::harness::{parse_csv_blocks, write_csv_blocks};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(blocks) = parse_csv_blocks(text) {
        let out = write_csv_blocks(&blocks);
        let again = parse_csv_blocks(&out).expect("written blocks parse");
        assert_eq!(write_csv_blocks(&again), out);
    }
});
