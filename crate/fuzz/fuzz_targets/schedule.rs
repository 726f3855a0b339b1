//! Schedule grammar: no panics, accepted schedules are non-empty positive
//! integers.

#![no_main]
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(schedule) = torlog::io::parse_schedule(text) else {
        return;
    };
    assert!(!schedule.is_empty());
    assert!(schedule.iter().all(|&j| j >= 1));
});
