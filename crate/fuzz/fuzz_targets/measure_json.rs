//! Discrete measure parser: no panics, and anything accepted must survive a
//! serialize-parse round trip without drifting.

#![no_main]
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(mu) = torlog::io::measure_from_json(text) else {
        return;
    };
    let again = torlog::io::measure_from_json(&torlog::io::measure_to_json(&mu))
        .expect("serialized measure must parse back");
    assert_eq!(mu.len(), again.len());
    assert_eq!(mu.total().to_bits(), again.total().to_bits());
});
