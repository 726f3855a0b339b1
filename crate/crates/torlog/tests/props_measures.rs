//! Property tests for general measures: circle partitions, jittered
//! sampling, discretization bookkeeping, the subspace mass inequality, and
//! weak convergence of the discretized measures.

use std::sync::Arc;

use proptest::prelude::*;
use torlog::fixtures;
use torlog::geometry::{support_function, validate_directions, Direction};
use torlog::measures::{
    discretize, partition_circle, sample_general_position, subspace_mass_check, Density,
    GeneralMeasure,
};

const TAU: f64 = std::f64::consts::TAU;

fn wrap(a: f64) -> f64 {
    a.rem_euclid(TAU)
}

/// Circular distance between two angles.
fn circ_dist(a: f64, b: f64) -> f64 {
    let d = wrap(a - b);
    d.min(TAU - d)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// The partition is `ceil(2 pi j) + 1` equal half-open arcs tiling one
    /// turn, each shorter than `1/j`.
    #[test]
    fn partition_tiles_the_circle(j in 1u32..40) {
        let arcs = partition_circle(j);
        let n = (TAU * j as f64).ceil() as usize + 1;
        prop_assert_eq!(arcs.len(), n);
        prop_assert_eq!(arcs[0].start, 0.0);
        for w in arcs.windows(2) {
            prop_assert!((w[0].end - w[1].start).abs() <= 1e-12);
        }
        prop_assert!((arcs[n - 1].end - TAU).abs() <= 1e-12);
        for arc in &arcs {
            prop_assert!((arc.length() - TAU / n as f64).abs() <= 1e-12);
            prop_assert!(arc.length() < 1.0 / j as f64);
        }
    }

    /// Sampled directions stay within 10% of their arc's midpoint, span the
    /// plane, avoid (anti)parallel pairs, and are a pure function of the
    /// seed.
    #[test]
    fn sampling_is_in_arc_general_position_deterministic(j in 1u32..24, seed in any::<u64>()) {
        let arcs = partition_circle(j);
        let dirs = sample_general_position(&arcs, seed).unwrap();
        prop_assert_eq!(dirs.len(), arcs.len());
        for (dir, arc) in dirs.iter().zip(&arcs) {
            let off = circ_dist(dir.angle(), arc.midpoint());
            prop_assert!(off <= 0.1 * arc.length() + 1e-12, "jitter {off} too large");
        }
        let v = validate_directions(&dirs);
        prop_assert!(v.spans && v.general_position);
        let again = sample_general_position(&arcs, seed).unwrap();
        for (a, b) in dirs.iter().zip(&again) {
            prop_assert_eq!(a.as_array(), b.as_array());
        }
    }

    /// Raw weights are the arc masses plus the `1/N^2` pad; normalization
    /// restores the source total exactly up to rounding.
    #[test]
    fn discretization_bookkeeping(j in 1u32..16, seed in any::<u64>(), c in 0.1f64..5.0) {
        let mu = GeneralMeasure::new(Some(Density::Constant(c)), vec![]).unwrap();
        let d = discretize(&mu, j, seed).unwrap();
        let n = d.arcs.len() as f64;
        let pad = 1.0 / (n * n);
        for (atom, arc) in d.raw.atoms().iter().zip(&d.arcs) {
            let expect = c * arc.length() + pad;
            prop_assert!((atom.weight - expect).abs() <= 1e-12 * expect);
            prop_assert!(atom.weight > 0.0);
        }
        let total = mu.total();
        prop_assert!((d.normalized.total() - total).abs() <= 1e-12 * total);
        // one shared scale factor relates raw and normalized atom by atom
        let scale = total / d.raw.total();
        for (r, m) in d.raw.atoms().iter().zip(d.normalized.atoms()) {
            prop_assert!((m.weight - r.weight * scale).abs() <= 1e-12 * m.weight);
            prop_assert_eq!(r.direction.as_array(), m.direction.as_array());
        }
    }
}

/// Atoms sitting exactly on arc endpoints are counted once: the half-open
/// convention keeps the arc masses an exact partition of the total.
#[test]
fn boundary_atoms_counted_exactly_once() {
    let arcs = partition_circle(3);
    let atoms = vec![(arcs[3].start, 0.7), (0.0, 1.1), (arcs[5].end, 0.4)];
    let mu = GeneralMeasure::new(None, atoms).unwrap();
    let masses = mu.equal_arc_masses(arcs.len()).unwrap();
    let total: f64 = masses.iter().sum();
    assert!((total - mu.total()).abs() <= 1e-12 * mu.total());
    assert!((masses[3] - 0.7).abs() <= 1e-15);
    assert!((masses[0] - 1.1).abs() <= 1e-15);
    // end of arc 5 is the start of arc 6
    assert!((masses[6] - 0.4).abs() <= 1e-15);
}

#[test]
fn subspace_mass_inequality_verdicts() {
    // seven spread atoms: no line exceeds 2/7 of the mass
    let seven = GeneralMeasure::new(
        None,
        (0..7).map(|k| (TAU * k as f64 / 7.0, 1.0)).collect(),
    )
    .unwrap();
    let r = subspace_mass_check(&seven);
    assert!(r.pass);
    assert!(r.worst_ratio <= 2.0 / 7.0 + 1e-12);

    // a dominant antipodal pair concentrates 99% on one line
    let heavy = GeneralMeasure::new(
        None,
        vec![(0.0, 0.6), (std::f64::consts::PI, 0.39), (1.5, 0.01)],
    )
    .unwrap();
    let r = subspace_mass_check(&heavy);
    assert!(!r.pass);
    assert!((r.worst_ratio - 0.99).abs() <= 1e-12);
    let w = r.witness.unwrap();
    assert!(w.dot(Direction::new(1.0, 0.0).unwrap()).abs() > 1.0 - 1e-9);

    // exactly half fails: the inequality is strict
    let half = GeneralMeasure::new(
        None,
        vec![(0.0, 0.25), (std::f64::consts::PI, 0.25), (1.2, 0.5)],
    )
    .unwrap();
    let r = subspace_mass_check(&half);
    assert!(!r.pass);
    assert!((r.worst_ratio - 0.5).abs() <= 1e-12);

    // a continuous part shifts the ratio without adding line mass
    let mixed = GeneralMeasure::new(
        Some(Density::Constant(1.0)),
        vec![(0.0, 0.3), (std::f64::consts::PI, 0.3)],
    )
    .unwrap();
    let r = subspace_mass_check(&mixed);
    assert!(r.pass, "continuous mass dilutes the line share");
    assert!((r.worst_ratio - 0.6 / mixed.total()).abs() <= 1e-12);
}

/// Integrating the support function of a fixed body against the discretized
/// measures converges to the continuous integral as the fineness grows.
#[test]
fn discretized_measures_converge_weakly() {
    let q = fixtures::pentagon();
    let mu = GeneralMeasure::new(Some(Density::Constant(1.0)), vec![]).unwrap();
    let exact = mu
        .integrate(&|theta| support_function(&q, Direction::from_angle(theta)))
        .unwrap();
    let mut prev = f64::INFINITY;
    for j in [4u32, 8, 16, 32] {
        let d = discretize(&mu, j, 0).unwrap();
        let approx: f64 = d
            .normalized
            .atoms()
            .iter()
            .map(|a| a.weight * support_function(&q, a.direction))
            .sum();
        let err = (approx - exact).abs();
        assert!(err < prev, "error {err} did not decrease at j = {j}");
        prev = err;
    }
    assert!(prev <= 1e-3 * exact.abs());
}

/// For even densities the discretization cannot concentrate mass on a line:
/// any line meets at most two sampled directions, so its share is bounded
/// by twice the largest padded arc mass.
#[test]
fn even_density_discretizations_respect_the_line_bound() {
    let densities: Vec<Density> = vec![
        Density::Constant(0.8),
        Density::Custom(Arc::new(|t: f64| 1.0 + 0.3 * (2.0 * t).cos())),
        Density::Custom(Arc::new(|t: f64| 0.2 + (4.0 * t).sin().powi(2))),
    ];
    for density in densities {
        let mu = GeneralMeasure::new(Some(density), vec![]).unwrap();
        for j in [2u32, 5, 9] {
            let d = discretize(&mu, j, 17).unwrap();
            let n = d.arcs.len() as f64;
            let max_mass = mu
                .equal_arc_masses(d.arcs.len())
                .unwrap()
                .into_iter()
                .fold(0.0f64, f64::max);
            let bound = 2.0 * (max_mass + 1.0 / (n * n)) / mu.total();
            let r = subspace_mass_check(&d.normalized);
            assert!(
                r.worst_ratio <= bound + 1e-12,
                "ratio {} above bound {bound} at j = {j}",
                r.worst_ratio
            );
            assert!(r.pass);
        }
    }
}
