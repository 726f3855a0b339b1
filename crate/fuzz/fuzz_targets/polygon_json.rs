//! Polygon parser: no panics, accepted bodies are geometrically sound, and
//! every emitted polygon re-validates on load.

#![no_main]
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(poly) = torlog::io::polygon_from_json(text) else {
        return;
    };
    assert!(poly.diameter().is_finite());
    assert!(poly.area() > 0.0);
    let again = torlog::io::polygon_from_json(&torlog::io::polygon_to_json(&poly))
        .expect("emitted polygon must re-validate");
    assert_eq!(poly.vertices().len(), again.vertices().len());
});
