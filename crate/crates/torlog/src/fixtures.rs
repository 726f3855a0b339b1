//! Shared test fixtures: canonical polygons, polygonal approximations of
//! smooth reference shapes, and seeded random generators used by property
//! suites and the validation CLI.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::geometry::{validate_directions, wulff_shape, Direction, Polygon};

const TAU: f64 = std::f64::consts::TAU;

/// Axis-aligned square `[-half, half]^2`.
pub fn square(half: f64) -> Polygon {
    let dirs = [
        Direction::new(1.0, 0.0).unwrap(),
        Direction::new(0.0, 1.0).unwrap(),
        Direction::new(-1.0, 0.0).unwrap(),
        Direction::new(0.0, -1.0).unwrap(),
    ];
    wulff_shape(&dirs, &[half; 4]).unwrap()
}

/// Unit square `[0, 1]^2`.
pub fn unit_square() -> Polygon {
    let dirs = [
        Direction::new(1.0, 0.0).unwrap(),
        Direction::new(0.0, 1.0).unwrap(),
        Direction::new(-1.0, 0.0).unwrap(),
        Direction::new(0.0, -1.0).unwrap(),
    ];
    wulff_shape(&dirs, &[1.0, 1.0, 0.0, 0.0]).unwrap()
}

/// Regular pentagon with unit support numbers. Its directions are the fifth
/// roots of unity, which are in general position (no antipodal pairs).
pub fn pentagon() -> Polygon {
    let dirs: Vec<Direction> = (0..5)
        .map(|k| Direction::from_angle(TAU * k as f64 / 5.0))
        .collect();
    wulff_shape(&dirs, &[1.0; 5]).unwrap()
}

/// Regular `n`-gon inscribed in the circle of the given radius (vertices on
/// the circle).
pub fn regular_ngon(n: usize, circumradius: f64) -> Polygon {
    assert!(n >= 3);
    let apothem = circumradius * (std::f64::consts::PI / n as f64).cos();
    // offset by half a step so vertices, not normals, sit on the axes
    let dirs: Vec<Direction> = (0..n)
        .map(|k| Direction::from_angle(TAU * (k as f64 + 0.5) / n as f64))
        .collect();
    let supports = vec![apothem; n];
    wulff_shape(&dirs, &supports).unwrap()
}

/// Polygon through `n` points of the ellipse `x^2/a^2 + y^2/b^2 = 1`.
pub fn ellipse_ngon(n: usize, a: f64, b: f64) -> Polygon {
    assert!(n >= 3);
    let pts: Vec<[f64; 2]> = (0..n)
        .map(|k| {
            let t = TAU * k as f64 / n as f64;
            [a * t.cos(), b * t.sin()]
        })
        .collect();
    Polygon::from_vertices(&pts).expect("ellipse samples form a convex chain")
}

/// Seeded spanning direction set in general position: `n` angles from a
/// jittered equal grid. Suitable for random-polygon property runs.
pub fn random_spanning_directions(rng: &mut ChaCha8Rng, n: usize) -> Vec<Direction> {
    assert!(n >= 3);
    loop {
        let dirs: Vec<Direction> = (0..n)
            .map(|k| {
                let base = TAU * k as f64 / n as f64;
                let jitter: f64 = rng.gen_range(-0.25..0.25) * TAU / n as f64;
                Direction::from_angle(base + jitter)
            })
            .collect();
        let v = validate_directions(&dirs);
        if v.spans && v.general_position {
            return dirs;
        }
    }
}

/// Seeded random polygon: spanning directions with supports in `[0.5, 1.5]`,
/// re-drawn until every facet survives clipping.
pub fn random_polygon(rng: &mut ChaCha8Rng, n: usize) -> Polygon {
    loop {
        let dirs = random_spanning_directions(rng, n);
        let supports: Vec<f64> = (0..n).map(|_| rng.gen_range(0.5..1.5)).collect();
        if let Ok(p) = wulff_shape(&dirs, &supports) {
            if p.all_facets_present() {
                return p;
            }
        }
    }
}

/// Deterministic generator for test suites.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
