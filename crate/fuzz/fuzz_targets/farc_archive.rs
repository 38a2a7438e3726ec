#![no_main]

use libfuzzer_sys::fuzz_target;
use lstm_ctc::features::{read_archive, write_archive};

fuzz_target!(|data: &[u8]| {
    if let Ok(feats) = read_archive(data) {
        // Anything accepted must survive a rewrite unchanged.
        let mut once = Vec::new();
        write_archive(&mut once, &feats).expect("rewrite accepted archive");
        let mut twice = Vec::new();
        write_archive(&mut twice, &read_archive(once.as_slice()).expect("reread")).expect("rewrite");
        assert_eq!(once, twice);
    }
});
