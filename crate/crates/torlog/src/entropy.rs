//! The entropy functional of a polygon against a discrete measure and its
//! unique interior maximizer.
//!
//! For supports `h_k`, directions `v_k`, and weights `b_k`, the functional is
//! `phi(gamma) = sum_k b_k log(h_k - gamma . v_k)`, strictly concave on the
//! interior of the body with a blow-down at the boundary, so the maximizer
//! exists, is unique, and Newton's method with feasibility damping finds it.

use crate::error::{Error, Result};
use crate::geometry::{dot, DiscreteSphericalMeasure, Polygon};

/// Gradient-norm stopping threshold, relative to the total mass.
pub const GRADIENT_TOL: f64 = 1e-10;

/// Cap on Newton steps before reporting failure.
pub const MAX_NEWTON_STEPS: usize = 100;

/// Cap on step halvings inside one damped Newton step.
const MAX_HALVINGS: usize = 60;

/// Value and derivatives of the entropy functional at one point.
#[derive(Clone, Copy, Debug)]
pub struct EntropyEvaluation {
    pub value: f64,
    /// `-sum b_k v_k / s_k` with `s_k = h_k - gamma . v_k`.
    pub gradient: [f64; 2],
    /// `-sum b_k v_k v_k^T / s_k^2`; negative definite at interior points.
    pub hessian: [[f64; 2]; 2],
}

fn check_aligned(poly: &Polygon, mu: &DiscreteSphericalMeasure) -> Result<()> {
    if poly.directions().len() != mu.len() {
        return Err(Error::InvalidInput(format!(
            "polygon has {} directions but measure has {} atoms",
            poly.directions().len(),
            mu.len()
        )));
    }
    for (k, (d, a)) in poly.directions().iter().zip(mu.atoms()).enumerate() {
        if d.separation(a.direction) > 1e-12 {
            return Err(Error::InvalidInput(format!(
                "measure atom {k} does not match polygon direction {k}"
            )));
        }
    }
    Ok(())
}

/// Evaluates the functional, its gradient, and its hessian at `gamma`.
pub fn phi(
    poly: &Polygon,
    mu: &DiscreteSphericalMeasure,
    gamma: [f64; 2],
) -> Result<EntropyEvaluation> {
    check_aligned(poly, mu)?;
    let mut value = 0.0;
    let mut gradient = [0.0, 0.0];
    let mut hessian = [[0.0, 0.0], [0.0, 0.0]];
    for (k, (h, atom)) in poly.supports().iter().zip(mu.atoms()).enumerate() {
        let v = atom.direction.as_array();
        let s = h - dot(gamma, v);
        if s <= 0.0 {
            return Err(Error::OutsideDomain { facet: k, slack: s });
        }
        let b = atom.weight;
        value += b * s.ln();
        let g = b / s;
        gradient[0] -= g * v[0];
        gradient[1] -= g * v[1];
        let hh = b / (s * s);
        hessian[0][0] -= hh * v[0] * v[0];
        hessian[0][1] -= hh * v[0] * v[1];
        hessian[1][1] -= hh * v[1] * v[1];
    }
    hessian[1][0] = hessian[0][1];
    Ok(EntropyEvaluation {
        value,
        gradient,
        hessian,
    })
}

/// Result of [`gamma_star`].
#[derive(Clone, Copy, Debug)]
pub struct GammaResult {
    pub gamma: [f64; 2],
    pub iterations: usize,
    pub gradient_norm: f64,
}

/// Finds the interior maximizer of the functional by damped Newton steps
/// starting from the vertex centroid.
///
/// A step is shortened until every slack stays positive and the value does
/// not decrease; the iteration stops once the gradient norm drops below
/// `GRADIENT_TOL` times the total mass.
///
/// The iteration runs on a copy translated so the vertex centroid sits at
/// the origin; the result is shifted back. Slacks depend only on relative
/// position, but far from the origin they are differences of large numbers
/// and the rounding floor of the gradient can rise above the tolerance.
pub fn gamma_star(poly: &Polygon, mu: &DiscreteSphericalMeasure) -> Result<GammaResult> {
    check_aligned(poly, mu)?;
    let center = poly.vertex_centroid();
    let poly = &poly.transform(1.0, [-center[0], -center[1]])?;
    let tol = GRADIENT_TOL * mu.total();
    let mut gamma = poly.vertex_centroid();
    let mut eval = phi(poly, mu, gamma)?;

    for it in 0..MAX_NEWTON_STEPS {
        let g = eval.gradient;
        let gnorm = (g[0] * g[0] + g[1] * g[1]).sqrt();
        if gnorm <= tol {
            return Ok(GammaResult {
                gamma: [gamma[0] + center[0], gamma[1] + center[1]],
                iterations: it,
                gradient_norm: gnorm,
            });
        }
        // Newton direction: solve (-H) d = g; -H is positive definite
        let a00 = -eval.hessian[0][0];
        let a01 = -eval.hessian[0][1];
        let a11 = -eval.hessian[1][1];
        let det = a00 * a11 - a01 * a01;
        if !(det > 0.0) {
            return Err(Error::NoConvergence(it));
        }
        let d = [
            (a11 * g[0] - a01 * g[1]) / det,
            (-a01 * g[0] + a00 * g[1]) / det,
        ];
        // once the predicted gain g.d drops below the rounding noise of the
        // value itself, the non-decrease test is a coin flip; accept the
        // full step, whose true loss concavity bounds by the same amount
        let noise = f64::EPSILON * (eval.value.abs() + mu.total());
        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..=MAX_HALVINGS {
            let trial = [gamma[0] + step * d[0], gamma[1] + step * d[1]];
            let predicted = step * (g[0] * d[0] + g[1] * d[1]);
            match phi(poly, mu, trial) {
                Ok(t_eval) if t_eval.value >= eval.value || predicted <= noise => {
                    gamma = trial;
                    eval = t_eval;
                    accepted = true;
                    break;
                }
                _ => step *= 0.5,
            }
        }
        if !accepted {
            // the quadratic model cannot make progress beyond rounding
            let gnorm = (eval.gradient[0].powi(2) + eval.gradient[1].powi(2)).sqrt();
            if gnorm <= tol * 10.0 {
                return Ok(GammaResult {
                    gamma: [gamma[0] + center[0], gamma[1] + center[1]],
                    iterations: it + 1,
                    gradient_norm: gnorm,
                });
            }
            return Err(Error::NoConvergence(it + 1));
        }
    }
    Err(Error::NoConvergence(MAX_NEWTON_STEPS))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{wulff_shape, Direction};

    fn square(h: &[f64; 4]) -> Polygon {
        let dirs = [
            Direction::new(1.0, 0.0).unwrap(),
            Direction::new(0.0, 1.0).unwrap(),
            Direction::new(-1.0, 0.0).unwrap(),
            Direction::new(0.0, -1.0).unwrap(),
        ];
        wulff_shape(&dirs, h).unwrap()
    }

    fn measure_on(poly: &Polygon, weights: &[f64]) -> DiscreteSphericalMeasure {
        DiscreteSphericalMeasure::new(
            poly.directions()
                .iter()
                .cloned()
                .zip(weights.iter().cloned())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn value_and_gradient_at_center() {
        let p = square(&[1.0; 4]);
        let mu = measure_on(&p, &[1.0; 4]);
        let e = phi(&p, &mu, [0.0, 0.0]).unwrap();
        assert!(e.value.abs() < 1e-15);
        assert!(e.gradient[0].abs() < 1e-15 && e.gradient[1].abs() < 1e-15);
        // hessian = -2 I at the center
        assert!((e.hessian[0][0] + 2.0).abs() < 1e-12);
        assert!((e.hessian[1][1] + 2.0).abs() < 1e-12);
        assert!(e.hessian[0][1].abs() < 1e-15);
    }

    #[test]
    fn off_center_value() {
        let p = square(&[1.0; 4]);
        let mu = measure_on(&p, &[1.0; 4]);
        let e = phi(&p, &mu, [0.5, 0.0]).unwrap();
        assert!((e.value - 0.75f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn scaling_shifts_value_by_mass_log() {
        let p = square(&[1.0; 4]);
        let q = p.transform(2.0, [0.0, 0.0]).unwrap();
        let mu = measure_on(&p, &[1.0; 4]);
        let ep = phi(&p, &mu, [0.0, 0.0]).unwrap();
        let eq = phi(&q, &mu, [0.0, 0.0]).unwrap();
        assert!((eq.value - ep.value - 4.0 * 2.0f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn outside_domain_is_reported() {
        let p = square(&[1.0; 4]);
        let mu = measure_on(&p, &[1.0; 4]);
        assert!(matches!(
            phi(&p, &mu, [1.0, 0.0]),
            Err(Error::OutsideDomain { facet: 0, .. })
        ));
        assert!(matches!(
            phi(&p, &mu, [1.5, 0.0]),
            Err(Error::OutsideDomain { .. })
        ));
    }

    #[test]
    fn symmetric_square_maximizer_is_center() {
        let p = square(&[1.0; 4]);
        let mu = measure_on(&p, &[1.0; 4]);
        let r = gamma_star(&p, &mu).unwrap();
        assert!(r.gamma[0].abs() < 1e-10 && r.gamma[1].abs() < 1e-10);
        assert!(r.gradient_norm <= GRADIENT_TOL * mu.total());
    }

    #[test]
    fn weighted_square_maximizer_matches_closed_form() {
        // weights (2,1,1,1) on (e1,e2,-e1,-e2): stationarity in x is
        // -2/(1-x) + 1/(1+x) = 0, so x = -1/3
        let p = square(&[1.0; 4]);
        let mu = measure_on(&p, &[2.0, 1.0, 1.0, 1.0]);
        let r = gamma_star(&p, &mu).unwrap();
        assert!((r.gamma[0] + 1.0 / 3.0).abs() < 1e-8, "x = {}", r.gamma[0]);
        assert!(r.gamma[1].abs() < 1e-8);
    }

    #[test]
    fn translation_equivariance() {
        let p = square(&[1.0; 4]);
        let mu = measure_on(&p, &[2.0, 1.0, 1.0, 1.0]);
        let t = [0.2, -0.1];
        let q = p.transform(1.0, t).unwrap();
        let rp = gamma_star(&p, &mu).unwrap();
        let rq = gamma_star(&q, &mu).unwrap();
        assert!((rq.gamma[0] - rp.gamma[0] - t[0]).abs() < 1e-9);
        assert!((rq.gamma[1] - rp.gamma[1] - t[1]).abs() < 1e-9);
    }
}
