#![no_main]

use libfuzzer_sys::fuzz_target;
use lstm_ctc::harness::{ExperimentConfig, RawConfig};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(raw) = RawConfig::parse(text, "fuzz", None) {
        if let Ok(cfg) = ExperimentConfig::from_raw(&raw) {
            // The resolved form must parse back to the same config.
            let again = RawConfig::parse(&cfg.to_text(), "resolved", None).expect("reparse");
            assert_eq!(ExperimentConfig::from_raw(&again).expect("re-resolve"), cfg);
        }
    }
});
