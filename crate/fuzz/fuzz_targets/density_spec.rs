//! Density spec grammar: no panics, and inline specs (no file references)
//! must build a general measure or be rejected cleanly.

#![no_main]
use libfuzzer_sys::fuzz_target;
use torlog::io::DensitySpec;
use torlog::measures::{Density, GeneralMeasure};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(spec) = torlog::io::parse_density_spec(text) else {
        return;
    };
    let density = match spec {
        DensitySpec::Constant(c) => Density::Constant(c),
        DensitySpec::Cosine { base, amplitude } => Density::Cosine { base, amplitude },
        DensitySpec::Table(knots) => Density::Table(knots),
        // file references are resolved by the caller, nothing to build here
        DensitySpec::AtomsFile(_) | DensitySpec::TableFile(_) => return,
    };
    if let Ok(mu) = GeneralMeasure::new(Some(density), vec![]) {
        assert!(mu.total().is_finite() && mu.total() > 0.0);
    }
});
