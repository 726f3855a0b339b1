//! Forward map: torsion PDE on a polygon, rigidity, and the boundary
//! measures driving the inverse problem.

mod fem;
mod mesh;

pub use fem::{solve_torsion, TorsionSolution, LINEAR_TOL};
pub use mesh::{build_mesh, TriMesh};

use crate::error::{Error, Result};
use crate::geometry::{dist, Polygon};

/// Per-facet boundary measures of one solved polygon.
///
/// `mu_tor[k]` integrates `|grad u|^2` over facet `k`; `g_tor[k] = h_k *
/// mu_tor[k] / 4`. Absent facets carry exactly zero. `total_t_check` is
/// `sum(g_tor)`, which agrees with the rigidity up to mesh consistency error.
#[derive(Clone, Debug)]
pub struct FacetMeasures {
    pub mu_tor: Vec<f64>,
    pub g_tor: Vec<f64>,
    pub total_t_check: f64,
}

/// Integrates the squared normal derivative of the solution over each facet.
///
/// On the boundary `u = 0`, so the tangential derivative vanishes and
/// `|grad u| = |du/dn|`. The normal derivative is recovered variationally:
/// it is the piecewise-linear boundary function `s` with `integral(s phi_i)
/// = a(u_h, phi_i) - (f, phi_i)` for every boundary hat `phi_i`, which is
/// the flux reading consistent with the Galerkin solution and converges one
/// order faster than the raw one-sided element gradient. Each facet then
/// integrates `s^2` exactly over its edges.
pub fn facet_torsion_measure(sol: &TorsionSolution, poly: &Polygon) -> Result<FacetMeasures> {
    let n_facets = poly.directions().len();
    let mesh = &sol.mesh;
    let edges = &mesh.boundary_edges;
    let nb = edges.len();

    // boundary edges traverse one closed cycle
    for i in 0..nb {
        if edges[i].1 != edges[(i + 1) % nb].0 {
            return Err(Error::MeshMismatch(
                "boundary edges do not form a closed cycle".into(),
            ));
        }
    }
    let mut boundary_len = vec![0.0; n_facets];
    let mut edge_len = vec![0.0; nb];
    for (i, &(a, b, facet)) in edges.iter().enumerate() {
        if facet >= n_facets {
            return Err(Error::MeshMismatch(format!(
                "boundary edge labeled with facet {facet}, polygon has {n_facets} directions"
            )));
        }
        if !poly.facets()[facet].present {
            return Err(Error::MeshMismatch(format!(
                "boundary edge labeled with absent facet {facet}"
            )));
        }
        edge_len[i] = dist(mesh.nodes[a], mesh.nodes[b]);
        boundary_len[facet] += edge_len[i];
    }
    // the labeled edges must tile each present facet
    for (k, facet) in poly.facets().iter().enumerate() {
        if facet.present {
            let gap = (boundary_len[k] - facet.length).abs();
            if gap > 1e-8 * poly.diameter() {
                return Err(Error::MeshMismatch(format!(
                    "facet {k}: boundary edges cover {} of length {}",
                    boundary_len[k], facet.length
                )));
            }
        }
    }

    // discrete residual r_i = a(u_h, phi_i) - (f, phi_i) at boundary nodes
    let on_boundary = mesh.boundary_nodes();
    let mut residual = vec![0.0; mesh.nodes.len()];
    for tri in &mesh.triangles {
        let p = [mesh.nodes[tri[0]], mesh.nodes[tri[1]], mesh.nodes[tri[2]]];
        let area = 0.5
            * ((p[1][0] - p[0][0]) * (p[2][1] - p[0][1])
                - (p[1][1] - p[0][1]) * (p[2][0] - p[0][0]));
        let b = [p[1][1] - p[2][1], p[2][1] - p[0][1], p[0][1] - p[1][1]];
        let c = [p[2][0] - p[1][0], p[0][0] - p[2][0], p[1][0] - p[0][0]];
        let scale = 1.0 / (4.0 * area);
        for li in 0..3 {
            if !on_boundary[tri[li]] {
                continue;
            }
            let mut row = 0.0;
            for lj in 0..3 {
                row += (b[li] * b[lj] + c[li] * c[lj]) * scale * sol.u[tri[lj]];
            }
            residual[tri[li]] += row - 2.0 * area / 3.0;
        }
    }

    // consistent boundary mass system M s = r on the cycle v_0 .. v_{nb-1}
    let rhs: Vec<f64> = edges.iter().map(|&(a, _, _)| residual[a]).collect();
    let mut diag = vec![0.0; nb];
    let mut sub = vec![0.0; nb]; // sub[i] couples s[i-1] (cyclically)
    let mut sup = vec![0.0; nb]; // sup[i] couples s[i+1] (cyclically)
    for i in 0..nb {
        let prev = (i + nb - 1) % nb;
        diag[i] = (edge_len[prev] + edge_len[i]) / 3.0;
        sub[i] = edge_len[prev] / 6.0;
        sup[i] = edge_len[i] / 6.0;
    }
    let s = solve_cyclic_tridiagonal(&sub, &diag, &sup, &rhs)?;

    // mu_k = sum over facet edges of the exact integral of s^2
    let mut mu_tor = vec![0.0; n_facets];
    for (i, &(_, _, facet)) in edges.iter().enumerate() {
        let sa = s[i];
        let sb = s[(i + 1) % nb];
        mu_tor[facet] += edge_len[i] * (sa * sa + sa * sb + sb * sb) / 3.0;
    }

    let g_tor: Vec<f64> = mu_tor
        .iter()
        .zip(poly.supports())
        .map(|(mu, h)| h * mu / 4.0)
        .collect();
    let total_t_check = g_tor.iter().sum();
    Ok(FacetMeasures {
        mu_tor,
        g_tor,
        total_t_check,
    })
}

/// Thomas elimination with a Sherman-Morrison rank-one correction for the
/// periodic corner entries. `sub[i]` couples `x[i-1]` and `sup[i]` couples
/// `x[i+1]`, both cyclically, so `sub[0]` and `sup[n-1]` are the corners.
fn solve_cyclic_tridiagonal(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    if n < 3 {
        return Err(Error::MeshMismatch(format!(
            "boundary cycle has {n} nodes, need at least 3"
        )));
    }
    let gamma = -diag[0];
    let mut b = diag.to_vec();
    b[0] -= gamma;
    b[n - 1] -= sup[n - 1] * sub[0] / gamma;
    let mut u = vec![0.0; n];
    u[0] = gamma;
    u[n - 1] = sup[n - 1];

    let thomas = |b: &[f64], d: &[f64]| -> Result<Vec<f64>> {
        let mut c_star = vec![0.0; n];
        let mut d_star = vec![0.0; n];
        let mut denom = b[0];
        if denom.abs() < f64::MIN_POSITIVE {
            return Err(Error::MeshMismatch("singular boundary mass matrix".into()));
        }
        c_star[0] = sup[0] / denom;
        d_star[0] = d[0] / denom;
        for i in 1..n {
            denom = b[i] - sub[i] * c_star[i - 1];
            if denom.abs() < f64::MIN_POSITIVE {
                return Err(Error::MeshMismatch("singular boundary mass matrix".into()));
            }
            if i < n - 1 {
                c_star[i] = sup[i] / denom;
            }
            d_star[i] = (d[i] - sub[i] * d_star[i - 1]) / denom;
        }
        let mut x = d_star;
        for i in (0..n - 1).rev() {
            x[i] -= c_star[i] * x[i + 1];
        }
        Ok(x)
    };

    let y = thomas(&b, rhs)?;
    let z = thomas(&b, &u)?;
    // v = e_0 + (sub[0]/gamma) e_{n-1}
    let vy = y[0] + sub[0] / gamma * y[n - 1];
    let vz = z[0] + sub[0] / gamma * z[n - 1];
    let factor = vy / (1.0 + vz);
    Ok(y.iter().zip(&z).map(|(yi, zi)| yi - factor * zi).collect())
}

/// One row of a refinement study.
#[derive(Clone, Copy, Debug)]
pub struct ConvergenceRow {
    pub level: u32,
    pub nodes: usize,
    pub t: f64,
    pub energy: f64,
    pub sum_mu: f64,
    /// `|4T - sum(h_k mu_k)| / (4T)`, the discrete defect of the boundary
    /// identity.
    pub identity_gap: f64,
}

/// Output of [`refine_and_extrapolate`].
#[derive(Clone, Debug)]
pub struct ExtrapolationResult {
    pub t: f64,
    pub mu_tor: Vec<f64>,
    /// Estimated leading error order (2 is typical for these elements).
    pub order: f64,
    /// True when the order fit was unstable and order 1 was assumed.
    pub order_fallback: bool,
    pub table: Vec<ConvergenceRow>,
}

/// Solves on every level of `levels` (strictly increasing, at least two) and
/// Richardson-extrapolates T and each `mu_tor` component.
///
/// The error order is fitted from the last three levels when they are evenly
/// spaced and the differences behave geometrically; otherwise order 1 is
/// assumed and flagged.
pub fn refine_and_extrapolate(poly: &Polygon, levels: &[u32]) -> Result<ExtrapolationResult> {
    if levels.len() < 2 {
        return Err(Error::InvalidSchedule(format!(
            "need at least two levels, got {levels:?}"
        )));
    }
    for w in levels.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::InvalidSchedule(format!(
                "levels must be strictly increasing, got {levels:?}"
            )));
        }
    }

    let mut t_values = Vec::with_capacity(levels.len());
    let mut mu_values: Vec<Vec<f64>> = Vec::with_capacity(levels.len());
    let mut table = Vec::with_capacity(levels.len());
    for &level in levels {
        let sol = solve_torsion(build_mesh(poly, level))?;
        let fm = facet_torsion_measure(&sol, poly)?;
        let sum_h_mu: f64 = fm
            .mu_tor
            .iter()
            .zip(poly.supports())
            .map(|(mu, h)| h * mu)
            .sum();
        let sum_mu: f64 = fm.mu_tor.iter().sum();
        table.push(ConvergenceRow {
            level,
            nodes: sol.mesh.nodes.len(),
            t: sol.t,
            energy: sol.energy,
            sum_mu,
            identity_gap: (4.0 * sol.t - sum_h_mu).abs() / (4.0 * sol.t),
        });
        t_values.push(sol.t);
        mu_values.push(fm.mu_tor);
    }

    let (order, order_fallback) = estimate_order(levels, &t_values);
    let last = levels.len() - 1;
    let step = (levels[last] - levels[last - 1]) as f64;
    // error model e_L ~ C 2^(-order L): T* = T_last + d / (2^(order*step) - 1)
    let factor = (2f64.powf(order * step) - 1.0).max(f64::MIN_POSITIVE);
    let extrapolate = |cur: f64, prev: f64| cur + (cur - prev) / factor;

    let t = extrapolate(t_values[last], t_values[last - 1]);
    let mu_tor: Vec<f64> = mu_values[last]
        .iter()
        .zip(&mu_values[last - 1])
        .map(|(&cur, &prev)| extrapolate(cur, prev))
        .collect();

    Ok(ExtrapolationResult {
        t,
        mu_tor,
        order,
        order_fallback,
        table,
    })
}

/// Fits the leading order from the last three values, falling back to 1.
fn estimate_order(levels: &[u32], values: &[f64]) -> (f64, bool) {
    let n = values.len();
    if n >= 3 {
        let step1 = levels[n - 2] - levels[n - 3];
        let step2 = levels[n - 1] - levels[n - 2];
        if step1 == step2 {
            let d1 = values[n - 2] - values[n - 3];
            let d2 = values[n - 1] - values[n - 2];
            if d1 != 0.0 && d2 != 0.0 && (d1 / d2) > 0.0 {
                let p = (d1 / d2).log2() / step2 as f64;
                if p.is_finite() && p > 0.1 && p < 6.0 {
                    return (p, false);
                }
            }
        }
    }
    (1.0, true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{wulff_shape, Direction};

    fn square2() -> Polygon {
        let dirs = [
            Direction::new(1.0, 0.0).unwrap(),
            Direction::new(0.0, 1.0).unwrap(),
            Direction::new(-1.0, 0.0).unwrap(),
            Direction::new(0.0, -1.0).unwrap(),
        ];
        wulff_shape(&dirs, &[1.0; 4]).unwrap()
    }

    #[test]
    fn square_facet_measures_by_symmetry() {
        let p = square2();
        let sol = solve_torsion(build_mesh(&p, 5)).unwrap();
        let fm = facet_torsion_measure(&sol, &p).unwrap();
        let t_exact = crate::oracle::reference_torsion(crate::oracle::ReferenceShape::Rectangle {
            a: 2.0,
            b: 2.0,
        })
        .unwrap();
        for k in 0..4 {
            // h = 1 on all facets, so mu_k = T by the boundary identity
            assert!(
                (fm.mu_tor[k] - t_exact).abs() / t_exact < 0.02,
                "mu[{k}] = {}",
                fm.mu_tor[k]
            );
            assert!((fm.g_tor[k] - fm.mu_tor[k] / 4.0).abs() < 1e-15);
        }
        assert!((fm.total_t_check - sol.t).abs() / sol.t < 0.02);
    }

    #[test]
    fn absent_facet_has_zero_measure() {
        let dirs = [
            Direction::new(1.0, 0.0).unwrap(),
            Direction::new(0.0, 1.0).unwrap(),
            Direction::new(-1.0, 0.0).unwrap(),
            Direction::new(0.0, -1.0).unwrap(),
            Direction::new(1.0, 1.0).unwrap(),
        ];
        let p = wulff_shape(&dirs, &[1.0, 1.0, 1.0, 1.0, 5.0]).unwrap();
        assert!(!p.facets()[4].present);
        let sol = solve_torsion(build_mesh(&p, 3)).unwrap();
        let fm = facet_torsion_measure(&sol, &p).unwrap();
        assert_eq!(fm.mu_tor[4], 0.0);
        assert_eq!(fm.g_tor[4], 0.0);
        for k in 0..4 {
            assert!(fm.mu_tor[k] > 0.0);
        }
    }

    #[test]
    fn mismatched_polygon_is_rejected() {
        let p = square2();
        let sol = solve_torsion(build_mesh(&p, 2)).unwrap();
        // same direction count, different geometry
        let q = wulff_shape(p.directions(), &[2.0, 1.0, 1.0, 1.0]).unwrap();
        assert!(matches!(
            facet_torsion_measure(&sol, &q),
            Err(Error::MeshMismatch(_))
        ));
    }

    #[test]
    fn degenerate_schedules_are_rejected() {
        let p = square2();
        assert!(matches!(
            refine_and_extrapolate(&p, &[3, 3]),
            Err(Error::InvalidSchedule(_))
        ));
        assert!(matches!(
            refine_and_extrapolate(&p, &[3]),
            Err(Error::InvalidSchedule(_))
        ));
        assert!(matches!(
            refine_and_extrapolate(&p, &[4, 2]),
            Err(Error::InvalidSchedule(_))
        ));
    }

    #[test]
    fn square_sequence_monotone_and_extrapolation_helps() {
        let p = square2();
        let exact = crate::oracle::reference_torsion(crate::oracle::ReferenceShape::Rectangle {
            a: 2.0,
            b: 2.0,
        })
        .unwrap();
        let res = refine_and_extrapolate(&p, &[2, 3, 4]).unwrap();
        let ts: Vec<f64> = res.table.iter().map(|r| r.t).collect();
        assert!(ts[0] < ts[1] && ts[1] < ts[2]);
        assert!(ts[2] < exact);
        assert!((res.t - exact).abs() < (ts[2] - exact).abs());
        assert!(!res.order_fallback);
        assert!((res.order - 2.0).abs() < 0.5, "order = {}", res.order);
    }
}
