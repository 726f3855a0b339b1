//! Deterministic triangulation of a convex polygon.
//!
//! The polygon is normalized (vertex centroid to the origin, diameter to 1),
//! fan-triangulated from the origin, uniformly refined, and mapped back. All
//! arithmetic that shapes the mesh happens in the normalized frame, so node
//! sets of `s*P + t` are the affine images of the node set of `P`; for
//! power-of-two scales the correspondence is bitwise.
//!
//! Polygons with many facets make raw fan triangles arbitrarily thin (a
//! 256-gon fan is 40:1), which stalls the convergence of boundary fluxes, so
//! the fan is split radially into strips until the base triangles have
//! bounded aspect ratio. Uniform refinement preserves triangle shape, so the
//! bound holds on every level.

use std::collections::HashMap;

use crate::geometry::Polygon;

/// Triangle mesh with boundary edges labeled by the polygon facet carrying
/// them. Triangles are counterclockwise; boundary edges run in boundary
/// order.
#[derive(Clone, Debug)]
pub struct TriMesh {
    pub nodes: Vec<[f64; 2]>,
    pub triangles: Vec<[usize; 3]>,
    /// `(first node, second node, facet index)` in boundary order.
    pub boundary_edges: Vec<(usize, usize, usize)>,
    pub level: u32,
}

impl TriMesh {
    /// Indices of all nodes on the boundary.
    pub fn boundary_nodes(&self) -> Vec<bool> {
        let mut on_boundary = vec![false; self.nodes.len()];
        for &(a, b, _) in &self.boundary_edges {
            on_boundary[a] = true;
            on_boundary[b] = true;
        }
        on_boundary
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t];
        let (p, q, r) = (self.nodes[a], self.nodes[b], self.nodes[c]);
        0.5 * ((q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0]))
    }
}

/// Upper bound on the radial strip count of the base fan. Caps the mesh size
/// on many-facet polygons; the residual sliver sits at the apex where the
/// torsion gradient is small.
const MAX_RADIAL_STRIPS: usize = 8;

/// Fan-triangulates `P` from its vertex centroid, splitting each fan triangle
/// radially into aspect-bounded strips, and refines `level` times (each pass
/// splits every triangle into four at the edge midpoints).
pub fn build_mesh(poly: &Polygon, level: u32) -> TriMesh {
    let c = poly.vertex_centroid();
    let s = poly.diameter();

    // normalized frame
    let ring: Vec<[f64; 2]> = poly
        .vertices()
        .iter()
        .map(|p| [(p[0] - c[0]) / s, (p[1] - c[1]) / s])
        .collect();
    let nv = ring.len();

    // one strip count for all fans keeps shared radial edges conforming
    let mut ratio_max = 0.0_f64;
    for i in 0..nv {
        let a = ring[i];
        let b = ring[(i + 1) % nv];
        let base = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
        let height = (a[0] * b[1] - a[1] * b[0]).abs() / base;
        ratio_max = ratio_max.max(height / base);
    }
    let strips = (ratio_max.round() as usize).clamp(1, MAX_RADIAL_STRIPS);

    let mut nodes: Vec<[f64; 2]> = Vec::with_capacity(1 + nv * strips);
    nodes.push([0.0, 0.0]);
    for p in &ring {
        for j in 1..=strips {
            let f = j as f64 / strips as f64;
            nodes.push([p[0] * f, p[1] * f]);
        }
    }
    let idx = |i: usize, j: usize| 1 + i * strips + (j - 1);

    let mut triangles: Vec<[usize; 3]> = Vec::with_capacity(nv * (2 * strips - 1));
    for i in 0..nv {
        let ni = (i + 1) % nv;
        triangles.push([0, idx(i, 1), idx(ni, 1)]);
        for j in 1..strips {
            triangles.push([idx(i, j), idx(i, j + 1), idx(ni, j + 1)]);
            triangles.push([idx(i, j), idx(ni, j + 1), idx(ni, j)]);
        }
    }
    let mut boundary: Vec<(usize, usize, usize)> = (0..nv)
        .map(|i| (idx(i, strips), idx((i + 1) % nv, strips), poly.edge_facets()[i]))
        .collect();

    for _ in 0..level {
        let mut midpoints: HashMap<(usize, usize), usize> = HashMap::new();
        let mut mid = |a: usize, b: usize, nodes: &mut Vec<[f64; 2]>| -> usize {
            let key = (a.min(b), a.max(b));
            *midpoints.entry(key).or_insert_with(|| {
                let p = nodes[a];
                let q = nodes[b];
                nodes.push([(p[0] + q[0]) / 2.0, (p[1] + q[1]) / 2.0]);
                nodes.len() - 1
            })
        };
        let mut next_tris = Vec::with_capacity(triangles.len() * 4);
        for &[a, b, c] in &triangles {
            let ab = mid(a, b, &mut nodes);
            let bc = mid(b, c, &mut nodes);
            let ca = mid(c, a, &mut nodes);
            next_tris.push([a, ab, ca]);
            next_tris.push([ab, b, bc]);
            next_tris.push([ca, bc, c]);
            next_tris.push([ab, bc, ca]);
        }
        let mut next_boundary = Vec::with_capacity(boundary.len() * 2);
        for &(a, b, facet) in &boundary {
            let m = mid(a, b, &mut nodes);
            next_boundary.push((a, m, facet));
            next_boundary.push((m, b, facet));
        }
        triangles = next_tris;
        boundary = next_boundary;
    }

    // map back to the original frame
    for p in &mut nodes {
        *p = [p[0] * s + c[0], p[1] * s + c[1]];
    }

    TriMesh {
        nodes,
        triangles,
        boundary_edges: boundary,
        level,
    }
}
