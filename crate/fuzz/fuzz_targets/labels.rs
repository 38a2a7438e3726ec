#![no_main]

use libfuzzer_sys::fuzz_target;
use lstm_ctc::harness::corpus::{format_labels, parse_labels};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(entries) = parse_labels(text) {
        let again = format_labels(entries.iter().map(|(id, l)| (id.as_str(), l.as_slice())));
        assert_eq!(parse_labels(&again).expect("reparse"), entries);
    }
});
