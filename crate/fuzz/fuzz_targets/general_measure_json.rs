//! General measure parser: no panics, and accepted measures have a finite
//! positive total mass.

#![no_main]
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(mu) = torlog::io::general_measure_from_json(text) else {
        return;
    };
    let total = mu.total();
    assert!(total.is_finite() && total > 0.0);
});
