#![no_main]

use libfuzzer_sys::fuzz_target;
use lstm_ctc::network::{read_checkpoint, write_checkpoint};

fuzz_target!(|data: &[u8]| {
    if let Ok(net) = read_checkpoint(data) {
        let mut out = Vec::new();
        write_checkpoint(&mut out, &net).expect("rewrite accepted checkpoint");
        assert_eq!(out, data);
    }
});
