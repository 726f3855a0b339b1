//! Piecewise-linear Galerkin discretization of the torsion problem and a
//! deterministic Jacobi-preconditioned conjugate-gradient solver.
//!
//! Everything here sums in a fixed order so repeated runs produce identical
//! bits; that property backs the CLI's reproducibility guarantee.

use crate::error::{Error, Result};
use crate::torsion::mesh::TriMesh;

/// Relative residual target for the linear solve.
pub const LINEAR_TOL: f64 = 1e-10;

/// Compressed sparse rows, symmetric positive definite content.
struct Csr {
    row_ptr: Vec<usize>,
    col: Vec<usize>,
    val: Vec<f64>,
}

impl Csr {
    fn mul(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = 0.0;
            for idx in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.val[idx] * x[self.col[idx]];
            }
            *yi = acc;
        }
    }

    fn diag(&self) -> Vec<f64> {
        let n = self.row_ptr.len() - 1;
        let mut d = vec![0.0; n];
        for i in 0..n {
            for idx in self.row_ptr[i]..self.row_ptr[i + 1] {
                if self.col[idx] == i {
                    d[i] = self.val[idx];
                }
            }
        }
        d
    }
}

/// Per-triangle gradient coefficients: for linear hat functions on a triangle
/// with vertices p1, p2, p3, `grad(phi_i) = (b_i, c_i) / (2A)`.
#[inline]
fn shape_coeffs(p: [[f64; 2]; 3]) -> ([f64; 3], [f64; 3]) {
    let b = [p[1][1] - p[2][1], p[2][1] - p[0][1], p[0][1] - p[1][1]];
    let c = [p[2][0] - p[1][0], p[0][0] - p[2][0], p[1][0] - p[0][0]];
    (b, c)
}

fn triangle_area(p: [[f64; 2]; 3]) -> f64 {
    0.5 * ((p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[1][1] - p[0][1]) * (p[2][0] - p[0][0]))
}

/// Solution of the discrete torsion problem on one mesh.
#[derive(Clone, Debug)]
pub struct TorsionSolution {
    pub mesh: TriMesh,
    /// Nodal values; zero at boundary nodes.
    pub u: Vec<f64>,
    /// Rigidity `T = 2 * integral(u_h)`.
    pub t: f64,
    /// Dirichlet energy `integral(|grad u_h|^2)`.
    pub energy: f64,
    /// Relative residual reached by the linear solver.
    pub linear_residual: f64,
}

impl TorsionSolution {
    /// Constant gradient of `u_h` on triangle `t`.
    pub fn triangle_gradient(&self, t: usize) -> [f64; 2] {
        let [i, j, k] = self.mesh.triangles[t];
        let p = [self.mesh.nodes[i], self.mesh.nodes[j], self.mesh.nodes[k]];
        let (b, c) = shape_coeffs(p);
        let area = triangle_area(p);
        let u = [self.u[i], self.u[j], self.u[k]];
        let inv = 1.0 / (2.0 * area);
        [
            (b[0] * u[0] + b[1] * u[1] + b[2] * u[2]) * inv,
            (c[0] * u[0] + c[1] * u[1] + c[2] * u[2]) * inv,
        ]
    }

    /// Linear interpolation of `u_h` at a point known to lie in triangle `t`.
    pub fn interpolate_in_triangle(&self, t: usize, x: [f64; 2]) -> f64 {
        let [i, j, k] = self.mesh.triangles[t];
        let p = [self.mesh.nodes[i], self.mesh.nodes[j], self.mesh.nodes[k]];
        let area = triangle_area(p);
        let w0 = triangle_area([x, p[1], p[2]]) / area;
        let w1 = triangle_area([p[0], x, p[2]]) / area;
        let w2 = 1.0 - w0 - w1;
        w0 * self.u[i] + w1 * self.u[j] + w2 * self.u[k]
    }
}

/// Assembles and solves `laplace(u) = -2`, `u = 0` on the boundary.
pub fn solve_torsion(mesh: TriMesh) -> Result<TorsionSolution> {
    let n_nodes = mesh.nodes.len();
    let on_boundary = mesh.boundary_nodes();

    // interior degrees of freedom, numbered in node order
    let mut dof = vec![usize::MAX; n_nodes];
    let mut n_dof = 0;
    for i in 0..n_nodes {
        if !on_boundary[i] {
            dof[i] = n_dof;
            n_dof += 1;
        }
    }
    if n_dof == 0 {
        return Err(Error::MeshMismatch(
            "mesh has no interior nodes; refine at least once".into(),
        ));
    }

    // assemble rows as (col, val) lists, then merge per row in column order
    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n_dof];
    let mut rhs = vec![0.0; n_dof];
    for tri in &mesh.triangles {
        let p = [mesh.nodes[tri[0]], mesh.nodes[tri[1]], mesh.nodes[tri[2]]];
        let area = triangle_area(p);
        debug_assert!(area > 0.0);
        let (b, c) = shape_coeffs(p);
        let scale = 1.0 / (4.0 * area);
        for (local_i, &ni) in tri.iter().enumerate() {
            let di = dof[ni];
            if di == usize::MAX {
                continue;
            }
            // load: integral of 2 * phi_i over the triangle
            rhs[di] += 2.0 * area / 3.0;
            for (local_j, &nj) in tri.iter().enumerate() {
                let dj = dof[nj];
                if dj == usize::MAX {
                    continue;
                }
                let k_ij = (b[local_i] * b[local_j] + c[local_i] * c[local_j]) * scale;
                rows[di].push((dj, k_ij));
            }
        }
    }
    let mut row_ptr = Vec::with_capacity(n_dof + 1);
    let mut col = Vec::new();
    let mut val = Vec::new();
    row_ptr.push(0);
    for row in &mut rows {
        row.sort_by_key(|(c, _)| *c);
        let mut merged: Vec<(usize, f64)> = Vec::with_capacity(row.len());
        for &(c, v) in row.iter() {
            match merged.last_mut() {
                Some((lc, lv)) if *lc == c => *lv += v,
                _ => merged.push((c, v)),
            }
        }
        for (c, v) in merged {
            col.push(c);
            val.push(v);
        }
        row_ptr.push(col.len());
    }
    let matrix = Csr { row_ptr, col, val };

    let max_iters = 20 * n_nodes;
    let (x, relres) = pcg(&matrix, &rhs, LINEAR_TOL, max_iters)?;

    let mut u = vec![0.0; n_nodes];
    for i in 0..n_nodes {
        if dof[i] != usize::MAX {
            u[i] = x[dof[i]];
        }
    }

    // T = 2 * integral(u); energy = integral(|grad u|^2); both exact per element
    let mut t = 0.0;
    let mut energy = 0.0;
    for tri in &mesh.triangles {
        let p = [mesh.nodes[tri[0]], mesh.nodes[tri[1]], mesh.nodes[tri[2]]];
        let area = triangle_area(p);
        t += 2.0 * area * (u[tri[0]] + u[tri[1]] + u[tri[2]]) / 3.0;
        let (b, c) = shape_coeffs(p);
        let gx = (b[0] * u[tri[0]] + b[1] * u[tri[1]] + b[2] * u[tri[2]]) / (2.0 * area);
        let gy = (c[0] * u[tri[0]] + c[1] * u[tri[1]] + c[2] * u[tri[2]]) / (2.0 * area);
        energy += area * (gx * gx + gy * gy);
    }

    Ok(TorsionSolution {
        mesh,
        u,
        t,
        energy,
        linear_residual: relres,
    })
}

/// Jacobi-preconditioned conjugate gradients with fixed summation order.
fn pcg(a: &Csr, b: &[f64], tol: f64, max_iters: usize) -> Result<(Vec<f64>, f64)> {
    let n = b.len();
    let norm_b = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm_b == 0.0 {
        return Ok((vec![0.0; n], 0.0));
    }
    let inv_diag: Vec<f64> = a
        .diag()
        .iter()
        .map(|&d| {
            debug_assert!(d > 0.0, "stiffness diagonal must be positive");
            1.0 / d
        })
        .collect();

    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(ri, di)| ri * di).collect();
    let mut p = z.clone();
    let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
    let mut ap = vec![0.0; n];

    for it in 0..max_iters {
        let norm_r = r.iter().map(|v| v * v).sum::<f64>().sqrt();
        let relres = norm_r / norm_b;
        if relres <= tol {
            return Ok((x, relres));
        }
        a.mul(&p, &mut ap);
        let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
        if pap <= 0.0 {
            return Err(Error::SolverDivergence {
                achieved: relres,
                target: tol,
                iterations: it,
            });
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_next: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let beta = rz_next / rz;
        rz = rz_next;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    let norm_r = r.iter().map(|v| v * v).sum::<f64>().sqrt();
    let relres = norm_r / norm_b;
    if relres <= tol {
        Ok((x, relres))
    } else {
        Err(Error::SolverDivergence {
            achieved: relres,
            target: tol,
            iterations: max_iters,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{wulff_shape, Direction};
    use crate::torsion::mesh::build_mesh;

    fn square_centered(half: f64) -> crate::geometry::Polygon {
        let dirs = [
            Direction::new(1.0, 0.0).unwrap(),
            Direction::new(0.0, 1.0).unwrap(),
            Direction::new(-1.0, 0.0).unwrap(),
            Direction::new(0.0, -1.0).unwrap(),
        ];
        wulff_shape(&dirs, &[half; 4]).unwrap()
    }

    #[test]
    fn square_rigidity_approaches_series_value() {
        // unit square [0,1]^2 as a shifted half-width-1/2 square
        let p = square_centered(0.5);
        let sol = solve_torsion(build_mesh(&p, 5)).unwrap();
        let exact = crate::oracle::reference_torsion(crate::oracle::ReferenceShape::Rectangle {
            a: 1.0,
            b: 1.0,
        })
        .unwrap();
        assert!(sol.t < exact, "conforming elements underestimate rigidity");
        assert!((sol.t - exact).abs() / exact < 0.01, "t = {}", sol.t);
        assert!((sol.energy - sol.t).abs() <= 1e-8 * sol.t);
        assert!(sol.linear_residual <= LINEAR_TOL);
    }

    #[test]
    fn solution_nonnegative_and_zero_on_boundary() {
        let p = square_centered(1.0);
        let sol = solve_torsion(build_mesh(&p, 4)).unwrap();
        let on_boundary = sol.mesh.boundary_nodes();
        let max_u = sol.u.iter().cloned().fold(0.0, f64::max);
        for (i, &ui) in sol.u.iter().enumerate() {
            if on_boundary[i] {
                assert_eq!(ui, 0.0);
            } else {
                assert!(ui >= -1e-10 * max_u);
            }
        }
    }

    #[test]
    fn deterministic_bits() {
        let p = square_centered(1.0);
        let a = solve_torsion(build_mesh(&p, 3)).unwrap();
        let b = solve_torsion(build_mesh(&p, 3)).unwrap();
        assert_eq!(a.u, b.u);
        assert_eq!(a.t.to_bits(), b.t.to_bits());
        assert_eq!(a.energy.to_bits(), b.energy.to_bits());
    }

    #[test]
    fn gradient_bound_holds() {
        let p = square_centered(1.0);
        let sol = solve_torsion(build_mesh(&p, 4)).unwrap();
        let bound = p.diameter() * 1.05;
        for t in 0..sol.mesh.triangles.len() {
            let g = sol.triangle_gradient(t);
            assert!((g[0] * g[0] + g[1] * g[1]).sqrt() <= bound);
        }
    }
}
