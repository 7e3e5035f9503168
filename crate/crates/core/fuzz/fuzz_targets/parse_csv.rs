#![no_main]

use libfuzzer_sys::fuzz_target;
use swipt_core::experiment::{parse_csv, to_csv};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(rows) = parse_csv(text) else { return };
    if rows.is_empty() {
        return;
    }
    // Anything accepted must survive a write/read cycle.
    let again = parse_csv(&to_csv(&rows).expect("serializable")).expect("reparse");
    assert_eq!(rows.len(), again.len());
    for (a, b) in rows.iter().zip(&again) {
        assert_eq!(a.sweep_name, b.sweep_name);
        assert_eq!(a.scheme, b.scheme);
        assert_eq!(a.trial, b.trial);
        assert_eq!(a.secrecy_rate_bits.to_bits(), b.secrecy_rate_bits.to_bits());
    }
});
