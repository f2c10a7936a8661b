#![no_main]

use libfuzzer_sys::fuzz_target;
use quartic::spectral::{decode_checkpoint, encode_checkpoint};

fuzz_target!(|data: &[u8]| {
    if let Ok(cp) = decode_checkpoint(data) {
        // the re-encoded form is a fixed point
        let once = encode_checkpoint(&cp.field, cp.time);
        let back = decode_checkpoint(&once).expect("re-encoded checkpoint decodes");
        assert_eq!(encode_checkpoint(&back.field, back.time), once);
    }
});
