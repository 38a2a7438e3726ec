#![no_main]

use libfuzzer_sys::fuzz_target;
use lstm_ctc::harness::corpus::parse_wav_list;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = parse_wav_list(text, None);
    }
});
