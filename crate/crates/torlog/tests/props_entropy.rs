//! Property tests for the log-support functional: concavity, derivative
//! consistency, boundary blow-up, and equivariance of the maximizer.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use torlog::entropy::{gamma_star, phi, GRADIENT_TOL};
use torlog::fixtures;
use torlog::geometry::{DiscreteSphericalMeasure, Polygon};

fn random_instance(rng: &mut ChaCha8Rng, n: usize) -> (Polygon, DiscreteSphericalMeasure) {
    let poly = fixtures::random_polygon(rng, n);
    let atoms = poly
        .directions()
        .iter()
        .map(|&d| (d, rng.gen_range(0.5..2.0)))
        .collect();
    (poly, DiscreteSphericalMeasure::new(atoms).unwrap())
}

/// Uniform rejection sample from the polygon's interior, keeping every
/// slack at least `margin` so derivative probes stay feasible.
fn feasible_gamma(rng: &mut ChaCha8Rng, poly: &Polygon, margin: f64) -> [f64; 2] {
    let vs = poly.vertices();
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for v in vs {
        for d in 0..2 {
            lo[d] = lo[d].min(v[d]);
            hi[d] = hi[d].max(v[d]);
        }
    }
    loop {
        let g = [rng.gen_range(lo[0]..hi[0]), rng.gen_range(lo[1]..hi[1])];
        let min_slack = poly
            .directions()
            .iter()
            .zip(poly.supports())
            .map(|(v, h)| h - g[0] * v.x() - g[1] * v.y())
            .fold(f64::INFINITY, f64::min);
        if min_slack >= margin {
            return g;
        }
    }
}

#[test]
fn functional_is_concave_along_segments() {
    let mut rng = fixtures::rng(7);
    for trial in 0..200 {
        let (poly, mu) = random_instance(&mut rng, 3 + trial % 8);
        let g1 = feasible_gamma(&mut rng, &poly, 1e-6);
        let g2 = feasible_gamma(&mut rng, &poly, 1e-6);
        let alpha: f64 = rng.gen_range(0.0..1.0);
        let mid = [
            alpha * g1[0] + (1.0 - alpha) * g2[0],
            alpha * g1[1] + (1.0 - alpha) * g2[1],
        ];
        let f1 = phi(&poly, &mu, g1).unwrap().value;
        let f2 = phi(&poly, &mu, g2).unwrap().value;
        let fm = phi(&poly, &mu, mid).unwrap().value;
        assert!(
            fm >= alpha * f1 + (1.0 - alpha) * f2 - 1e-12,
            "concavity violated by {}",
            alpha * f1 + (1.0 - alpha) * f2 - fm
        );
    }
}

#[test]
fn derivatives_match_finite_differences() {
    let mut rng = fixtures::rng(13);
    for trial in 0..40 {
        let (poly, mu) = random_instance(&mut rng, 4 + trial % 6);
        let g = feasible_gamma(&mut rng, &poly, 0.05);
        let eval = phi(&poly, &mu, g).unwrap();
        let h = 1e-6;
        for d in 0..2 {
            let mut gp = g;
            let mut gm = g;
            gp[d] += h;
            gm[d] -= h;
            let fd = (phi(&poly, &mu, gp).unwrap().value - phi(&poly, &mu, gm).unwrap().value)
                / (2.0 * h);
            assert!(
                (fd - eval.gradient[d]).abs() <= 1e-6,
                "gradient[{d}] {} vs fd {fd}",
                eval.gradient[d]
            );
            let grad_p = phi(&poly, &mu, gp).unwrap().gradient;
            let grad_m = phi(&poly, &mu, gm).unwrap().gradient;
            for e in 0..2 {
                let fd2 = (grad_p[e] - grad_m[e]) / (2.0 * h);
                assert!(
                    (fd2 - eval.hessian[d][e]).abs() <= 1e-4,
                    "hessian[{d}][{e}] {} vs fd {fd2}",
                    eval.hessian[d][e]
                );
            }
        }
        // interior hessian of a strictly concave functional
        let hs = eval.hessian;
        assert!(hs[0][0] + hs[1][1] < 0.0);
        assert!(hs[0][0] * hs[1][1] - hs[0][1] * hs[1][0] > 0.0);
        assert!((hs[0][1] - hs[1][0]).abs() <= 1e-12 * hs[0][1].abs().max(1.0));
    }
}

/// Walking from the maximizer toward any vertex, the functional decreases
/// monotonically and falls off a cliff near the boundary.
#[test]
fn blows_down_toward_the_boundary() {
    let mut rng = fixtures::rng(21);
    for trial in 0..10 {
        let (poly, mu) = random_instance(&mut rng, 4 + trial % 5);
        let star = gamma_star(&poly, &mu).unwrap();
        let f_star = phi(&poly, &mu, star.gamma).unwrap().value;
        let target = poly.vertices()[trial % poly.vertices().len()];
        let at = |t: f64| {
            let g = [
                star.gamma[0] + t * (target[0] - star.gamma[0]),
                star.gamma[1] + t * (target[1] - star.gamma[1]),
            ];
            phi(&poly, &mu, g).unwrap().value
        };
        let mut prev = f_star;
        for &t in &[0.1, 0.3, 0.5, 0.7, 0.9, 0.99, 0.9999, 1.0 - 1e-6] {
            let val = at(t);
            assert!(val <= prev + 1e-12, "not monotone at t = {t}");
            prev = val;
        }
        assert!(
            at(1.0 - 1e-6) < f_star - 10.0,
            "no blow-up: {} vs {f_star}",
            at(1.0 - 1e-6)
        );
    }
}

#[test]
fn maximizer_is_translation_equivariant() {
    let mut rng = fixtures::rng(33);
    for trial in 0..10 {
        let (poly, mu) = random_instance(&mut rng, 4 + trial % 6);
        let t = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
        let shifted = poly.transform(1.0, t).unwrap();
        let a = gamma_star(&poly, &mu).unwrap().gamma;
        let b = gamma_star(&shifted, &mu).unwrap().gamma;
        assert!((b[0] - a[0] - t[0]).abs() <= 1e-9, "x drift {}", b[0] - a[0] - t[0]);
        assert!((b[1] - a[1] - t[1]).abs() <= 1e-9, "y drift {}", b[1] - a[1] - t[1]);
    }
}

/// Scaling the body shifts the functional by the total mass times the log
/// of the factor.
#[test]
fn value_shifts_by_mass_times_log_scale() {
    let mut rng = fixtures::rng(45);
    for trial in 0..10 {
        let (poly, mu) = random_instance(&mut rng, 4 + trial % 6);
        let base = phi(&poly, &mu, [0.0, 0.0]).unwrap().value;
        for m in [0.5f64, 2.0, 3.0] {
            let scaled = poly.transform(m, [0.0, 0.0]).unwrap();
            let val = phi(&scaled, &mu, [0.0, 0.0]).unwrap().value;
            let expect = base + mu.total() * m.ln();
            assert!((val - expect).abs() <= 1e-10, "shift off by {}", val - expect);
        }
    }
}

#[test]
fn newton_converges_interior_on_random_instances() {
    let mut rng = fixtures::rng(57);
    for trial in 0..20 {
        let (poly, mu) = random_instance(&mut rng, 3 + trial % 9);
        let star = gamma_star(&poly, &mu).unwrap();
        assert!(star.iterations <= 100);
        assert!(star.gradient_norm <= GRADIENT_TOL * mu.total());
        let min_slack = poly
            .directions()
            .iter()
            .zip(poly.supports())
            .map(|(v, h)| h - star.gamma[0] * v.x() - star.gamma[1] * v.y())
            .fold(f64::INFINITY, f64::min);
        assert!(min_slack > 0.0, "maximizer not interior");
    }
}
