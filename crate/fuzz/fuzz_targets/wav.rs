#![no_main]

use libfuzzer_sys::fuzz_target;
use lstm_ctc::features::read_wav;

fuzz_target!(|data: &[u8]| {
    let _ = read_wav(data, "u", "s");
});
