#![no_main]

use libfuzzer_sys::fuzz_target;
use swipt_core::experiment::parse_config;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(cfg) = parse_config(text) {
            assert!(cfg.n_sc > 0 && cfg.trials > 0);
            assert!(!cfg.sweep_points().is_empty());
        }
    }
});
