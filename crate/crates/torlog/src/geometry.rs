//! Convex polygons given by support numbers over a finite direction set.
//!
//! The central constructor is [`wulff_shape`]: intersect the half-planes
//! `{x : x . v_k <= h_k}` and remember which input direction produced each
//! surviving edge. All downstream stages (meshing, boundary fluxes, the
//! descent loop) rely on that edge-to-direction labeling, so the polygon type
//! keeps it as part of its representation instead of re-deriving it from
//! coordinates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Unit vectors must satisfy |v| = 1 to within this slack.
pub const UNIT_TOL: f64 = 1e-12;

/// Two directions closer than this (in radians) count as coincident when a
/// measure or a sampled direction set requires distinct atoms.
pub const SEPARATION_TOL: f64 = 1e-9;

/// A facet shorter than `diameter * FACET_PRESENCE_TOL` is treated as absent.
pub const FACET_PRESENCE_TOL: f64 = 1e-10;

/// Consecutive hull vertices closer than `diameter * VERTEX_MERGE_TOL` are
/// merged while cleaning up the clipped chain.
pub const VERTEX_MERGE_TOL: f64 = 1e-12;

/// Default angular resolution for [`hausdorff_distance`].
pub const HAUSDORFF_SAMPLES: usize = 4096;

// ---------------------------------------------------------------------------
// small 2-vector helpers
// ---------------------------------------------------------------------------

#[inline]
pub(crate) fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

#[inline]
pub(crate) fn sub(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [a[0] - b[0], a[1] - b[1]]
}

#[inline]
pub(crate) fn add(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [a[0] + b[0], a[1] + b[1]]
}

#[inline]
pub(crate) fn scale(a: [f64; 2], s: f64) -> [f64; 2] {
    [a[0] * s, a[1] * s]
}

#[inline]
pub(crate) fn norm(a: [f64; 2]) -> f64 {
    a[0].hypot(a[1])
}

#[inline]
pub(crate) fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    norm(sub(a, b))
}

// ---------------------------------------------------------------------------
// Direction
// ---------------------------------------------------------------------------

/// A unit vector in the plane. Construction normalizes, so the unit-length
/// invariant holds for every value of this type.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 2]", into = "[f64; 2]")]
pub struct Direction {
    x: f64,
    y: f64,
}

impl Direction {
    /// Normalizes `(x, y)`. Rejects vectors shorter than `1e-12` and any
    /// non-finite component.
    pub fn new(x: f64, y: f64) -> Result<Self> {
        if !x.is_finite() || !y.is_finite() {
            return Err(Error::InvalidInput(format!(
                "direction components must be finite, got ({x}, {y})"
            )));
        }
        let len = x.hypot(y);
        if len < 1e-12 {
            return Err(Error::InvalidInput(format!(
                "direction ({x}, {y}) is too short to normalize"
            )));
        }
        Ok(Self {
            x: x / len,
            y: y / len,
        })
    }

    pub fn from_angle(theta: f64) -> Self {
        Self {
            x: theta.cos(),
            y: theta.sin(),
        }
    }

    #[inline]
    pub fn x(&self) -> f64 {
        self.x
    }

    #[inline]
    pub fn y(&self) -> f64 {
        self.y
    }

    #[inline]
    pub fn as_array(&self) -> [f64; 2] {
        [self.x, self.y]
    }

    /// Angle in `[0, 2*pi)`.
    pub fn angle(&self) -> f64 {
        let a = self.y.atan2(self.x);
        if a < 0.0 {
            a + std::f64::consts::TAU
        } else {
            a
        }
    }

    #[inline]
    pub fn dot(&self, other: Direction) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn antipode(&self) -> Direction {
        Direction {
            x: -self.x,
            y: -self.y,
        }
    }

    /// Angular distance on the circle, in `[0, pi]`.
    pub fn separation(&self, other: Direction) -> f64 {
        let cross = self.x * other.y - self.y * other.x;
        let d = self.dot(other);
        cross.atan2(d).abs()
    }

    /// Distance to the line spanned by `other`, i.e. the angular gap to the
    /// nearer of `other` and `-other`, in `[0, pi/2]`.
    pub fn line_separation(&self, other: Direction) -> f64 {
        let s = self.separation(other);
        s.min(std::f64::consts::PI - s)
    }
}

impl TryFrom<[f64; 2]> for Direction {
    type Error = Error;

    fn try_from(v: [f64; 2]) -> Result<Self> {
        Direction::new(v[0], v[1])
    }
}

impl From<Direction> for [f64; 2] {
    fn from(d: Direction) -> [f64; 2] {
        d.as_array()
    }
}

// ---------------------------------------------------------------------------
// direction-set diagnostics
// ---------------------------------------------------------------------------

/// Outcome of [`validate_directions`].
#[derive(Clone, Copy, Debug)]
pub struct DirectionValidity {
    /// No closed half-plane contains every direction.
    pub spans: bool,
    /// No two directions are parallel or antiparallel (within [`SEPARATION_TOL`]).
    pub general_position: bool,
    /// Largest angular gap between consecutive directions.
    pub max_gap: f64,
}

/// Sorts the directions by angle and inspects consecutive gaps. The set spans
/// the plane exactly when the largest gap is below `pi`.
pub fn validate_directions(dirs: &[Direction]) -> DirectionValidity {
    let tau = std::f64::consts::TAU;
    if dirs.is_empty() {
        return DirectionValidity {
            spans: false,
            general_position: true,
            max_gap: tau,
        };
    }
    let mut angles: Vec<f64> = dirs.iter().map(|d| d.angle()).collect();
    angles.sort_by(f64::total_cmp);
    let mut max_gap: f64 = angles[0] + tau - angles[angles.len() - 1];
    for w in angles.windows(2) {
        max_gap = max_gap.max(w[1] - w[0]);
    }
    let mut general_position = true;
    'outer: for i in 0..dirs.len() {
        for j in (i + 1)..dirs.len() {
            if dirs[i].line_separation(dirs[j]) <= SEPARATION_TOL {
                general_position = false;
                break 'outer;
            }
        }
    }
    DirectionValidity {
        spans: max_gap < std::f64::consts::PI,
        general_position,
        max_gap,
    }
}

// ---------------------------------------------------------------------------
// DiscreteSphericalMeasure
// ---------------------------------------------------------------------------

/// One atom of a discrete measure on the unit circle.
#[derive(Clone, Copy, Debug)]
pub struct Atom {
    pub direction: Direction,
    pub weight: f64,
}

/// A finite positive measure on the circle: distinct unit directions with
/// strictly positive weights. At least three atoms are required, which is the
/// minimum for the support of any bounded polygon's surface data.
#[derive(Clone, Debug)]
pub struct DiscreteSphericalMeasure {
    atoms: Vec<Atom>,
    total: f64,
}

impl DiscreteSphericalMeasure {
    pub fn new(atoms: Vec<(Direction, f64)>) -> Result<Self> {
        if atoms.len() < 3 {
            return Err(Error::InvalidInput(format!(
                "a measure needs at least 3 atoms, got {}",
                atoms.len()
            )));
        }
        for (i, (_, w)) in atoms.iter().enumerate() {
            if !w.is_finite() || *w <= 0.0 {
                return Err(Error::InvalidInput(format!(
                    "atom {i} has non-positive weight {w}"
                )));
            }
        }
        for i in 0..atoms.len() {
            for j in (i + 1)..atoms.len() {
                if atoms[i].0.separation(atoms[j].0) <= SEPARATION_TOL {
                    return Err(Error::InvalidInput(format!(
                        "atoms {i} and {j} share a direction (separation below {SEPARATION_TOL:e})"
                    )));
                }
            }
        }
        let total = atoms.iter().map(|(_, w)| w).sum();
        Ok(Self {
            atoms: atoms
                .into_iter()
                .map(|(direction, weight)| Atom { direction, weight })
                .collect(),
            total,
        })
    }

    #[inline]
    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Total mass.
    #[inline]
    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn directions(&self) -> Vec<Direction> {
        self.atoms.iter().map(|a| a.direction).collect()
    }

    pub fn weights(&self) -> Vec<f64> {
        self.atoms.iter().map(|a| a.weight).collect()
    }

    /// Same atoms with every weight multiplied by `c > 0`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !c.is_finite() || c <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "measure scale factor must be positive, got {c}"
            )));
        }
        Ok(Self {
            atoms: self
                .atoms
                .iter()
                .map(|a| Atom {
                    direction: a.direction,
                    weight: a.weight * c,
                })
                .collect(),
            total: self.total * c,
        })
    }
}

// ---------------------------------------------------------------------------
// Polygon
// ---------------------------------------------------------------------------

/// Status of one input direction after clipping.
#[derive(Clone, Debug)]
pub struct Facet {
    /// Whether the direction contributes an edge longer than the presence cut.
    pub present: bool,
    /// Edge endpoints in boundary order (start, end), when present.
    pub endpoints: Option<([f64; 2], [f64; 2])>,
    /// Edge length; zero when absent.
    pub length: f64,
}

/// A bounded convex polygon with its defining directions and support numbers.
///
/// `vertices` run counterclockwise; edge `i` goes from `vertices[i]` to
/// `vertices[i+1 mod n]` and lies on the support line of direction
/// `edge_facets[i]`. `supports` are the numbers the polygon was built from;
/// for a present facet `k` the support function at `directions[k]` equals
/// `supports[k]`, for an absent one it is strictly smaller.
#[derive(Clone, Debug)]
pub struct Polygon {
    directions: Vec<Direction>,
    supports: Vec<f64>,
    vertices: Vec<[f64; 2]>,
    edge_facets: Vec<usize>,
    facets: Vec<Facet>,
    diameter: f64,
}

impl Polygon {
    #[inline]
    pub fn directions(&self) -> &[Direction] {
        &self.directions
    }

    #[inline]
    pub fn supports(&self) -> &[f64] {
        &self.supports
    }

    #[inline]
    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    /// For each boundary edge, the index of the direction whose support line
    /// carries it.
    #[inline]
    pub fn edge_facets(&self) -> &[usize] {
        &self.edge_facets
    }

    #[inline]
    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    #[inline]
    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    pub fn all_facets_present(&self) -> bool {
        self.facets.iter().all(|f| f.present)
    }

    /// Shoelace area. Positive because vertices run counterclockwise.
    pub fn area(&self) -> f64 {
        shoelace(&self.vertices)
    }

    /// Arithmetic mean of the vertices. Used as the fan center for meshing;
    /// it is equivariant under scaling and translation, which the mesher
    /// relies on.
    pub fn vertex_centroid(&self) -> [f64; 2] {
        let n = self.vertices.len() as f64;
        let mut c = [0.0, 0.0];
        for v in &self.vertices {
            c[0] += v[0];
            c[1] += v[1];
        }
        [c[0] / n, c[1] / n]
    }

    /// `scale * P + shift` with `scale > 0`. Operates on the stored data
    /// directly (no re-clipping), so facet structure and edge labels are
    /// preserved exactly.
    pub fn transform(&self, scale_by: f64, shift: [f64; 2]) -> Result<Polygon> {
        if !scale_by.is_finite() || scale_by <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "polygon scale factor must be positive, got {scale_by}"
            )));
        }
        let map = |p: [f64; 2]| [p[0] * scale_by + shift[0], p[1] * scale_by + shift[1]];
        let supports = self
            .supports
            .iter()
            .zip(&self.directions)
            .map(|(h, v)| h * scale_by + dot(shift, v.as_array()))
            .collect();
        let facets = self
            .facets
            .iter()
            .map(|f| Facet {
                present: f.present,
                endpoints: f.endpoints.map(|(a, b)| (map(a), map(b))),
                length: f.length * scale_by,
            })
            .collect();
        Ok(Polygon {
            directions: self.directions.clone(),
            supports,
            vertices: self.vertices.iter().map(|p| map(*p)).collect(),
            edge_facets: self.edge_facets.clone(),
            facets,
            diameter: self.diameter * scale_by,
        })
    }

    /// Builds a polygon from a counterclockwise convex vertex chain by
    /// recovering outward normals and support numbers, then re-clipping.
    /// Collinear triples are rejected; use the support representation for
    /// shapes with degenerate corners.
    pub fn from_vertices(points: &[[f64; 2]]) -> Result<Polygon> {
        let n = points.len();
        if n < 3 {
            return Err(Error::InvalidInput(format!(
                "a polygon needs at least 3 vertices, got {n}"
            )));
        }
        if shoelace(points) <= 0.0 {
            return Err(Error::InvalidInput(
                "vertices must run counterclockwise with positive area".into(),
            ));
        }
        let mut dirs = Vec::with_capacity(n);
        let mut supports = Vec::with_capacity(n);
        for i in 0..n {
            let a = points[i];
            let b = points[(i + 1) % n];
            let e = sub(b, a);
            // outward normal of a counterclockwise edge
            let v = Direction::new(e[1], -e[0]).map_err(|_| {
                Error::InvalidInput(format!("vertices {i} and {} coincide", (i + 1) % n))
            })?;
            dirs.push(v);
            supports.push(dot(a, v.as_array()));
        }
        for i in 0..n {
            let j = (i + 1) % n;
            if dirs[i].separation(dirs[j]) <= SEPARATION_TOL {
                return Err(Error::InvalidInput(format!(
                    "edges {i} and {j} are collinear; drop the middle vertex"
                )));
            }
        }
        let poly = wulff_shape(&dirs, &supports)?;
        if !poly.all_facets_present() {
            return Err(Error::InvalidInput(
                "vertex chain is not convex: some edges vanish under clipping".into(),
            ));
        }
        Ok(poly)
    }
}

fn shoelace(points: &[[f64; 2]]) -> f64 {
    let n = points.len();
    let mut twice = 0.0;
    for i in 0..n {
        let a = points[i];
        let b = points[(i + 1) % n];
        twice += a[0] * b[1] - a[1] * b[0];
    }
    0.5 * twice
}

// ---------------------------------------------------------------------------
// wulff_shape: labeled half-plane clipping
// ---------------------------------------------------------------------------

/// Intersects `{x : x . v_k <= h_k}` over all `k`.
///
/// Starts from a box guaranteed to strictly contain the intersection (its
/// half-width comes from the support bound `|x| <= max_k h_k / cos(gap/2)`
/// where `gap` is the largest angular gap of the directions) and clips with
/// each half-plane in input order, carrying the facet index of every edge.
pub fn wulff_shape(dirs: &[Direction], supports: &[f64]) -> Result<Polygon> {
    if dirs.len() != supports.len() {
        return Err(Error::InvalidInput(format!(
            "{} directions but {} support numbers",
            dirs.len(),
            supports.len()
        )));
    }
    if dirs.is_empty() {
        return Err(Error::InvalidInput("empty direction set".into()));
    }
    for (k, h) in supports.iter().enumerate() {
        if !h.is_finite() {
            return Err(Error::InvalidInput(format!(
                "support number {k} is not finite"
            )));
        }
    }
    let validity = validate_directions(dirs);
    if !validity.spans {
        return Err(Error::HemisphereViolation {
            max_gap: validity.max_gap,
        });
    }
    let h_max = supports.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if h_max <= 0.0 {
        // Spanning directions admit a zero convex combination, so the
        // intersection is empty (h_max < 0) or a single point (h_max = 0).
        return Err(Error::DegenerateBody);
    }
    // Any point of the body satisfies |x| <= h_max / cos(max_gap / 2).
    let radius = h_max / (validity.max_gap / 2.0).cos();
    let w = 2.0 * radius;

    const NO_FACET: usize = usize::MAX;
    // Counterclockwise start box; every edge initially unlabeled.
    let mut verts: Vec<[f64; 2]> = vec![[-w, -w], [w, -w], [w, w], [-w, w]];
    let mut labels: Vec<usize> = vec![NO_FACET; 4];

    for (k, (v, h)) in dirs.iter().zip(supports).enumerate() {
        let va = v.as_array();
        let slack: Vec<f64> = verts.iter().map(|p| h - dot(*p, va)).collect();
        let n = verts.len();
        let mut new_verts: Vec<[f64; 2]> = Vec::with_capacity(n + 1);
        let mut new_labels: Vec<usize> = Vec::with_capacity(n + 1);
        for i in 0..n {
            let j = (i + 1) % n;
            let (a, sa, la) = (verts[i], slack[i], labels[i]);
            let (b, sb) = (verts[j], slack[j]);
            let a_in = sa >= 0.0;
            let b_in = sb >= 0.0;
            if a_in {
                new_verts.push(a);
                new_labels.push(la);
            }
            if a_in != b_in {
                let t = sa / (sa - sb);
                let p = add(a, scale(sub(b, a), t));
                if a_in {
                    // leaving the half-plane: travel along the clip line
                    new_verts.push(p);
                    new_labels.push(k);
                } else {
                    // re-entering: continue along the original edge
                    new_verts.push(p);
                    new_labels.push(la);
                }
            }
        }
        if new_verts.len() < 3 {
            return Err(Error::DegenerateBody);
        }
        verts = new_verts;
        labels = new_labels;
    }

    // Merge consecutive edges that lie on the same support line.
    merge_same_label(&mut verts, &mut labels);

    // Collapse vertex pairs produced by clip lines meeting almost exactly at
    // a corner, then re-merge labels. Moves points by at most the merge cut.
    loop {
        let diam = chain_diameter(&verts);
        if diam <= 0.0 {
            return Err(Error::DegenerateBody);
        }
        let cut = VERTEX_MERGE_TOL * diam;
        let n = verts.len();
        let mut merged = false;
        for i in 0..n {
            let j = (i + 1) % n;
            if dist(verts[i], verts[j]) <= cut {
                let mid = scale(add(verts[i], verts[j]), 0.5);
                verts[i] = mid;
                // Edge i's label disappears with the collapsed edge.
                verts.remove(j);
                labels.remove(i.min(j));
                merged = true;
                break;
            }
        }
        if !merged {
            break;
        }
        if verts.len() < 3 {
            return Err(Error::DegenerateBody);
        }
        merge_same_label(&mut verts, &mut labels);
        if verts.len() < 3 {
            return Err(Error::DegenerateBody);
        }
    }

    let diameter = chain_diameter(&verts);
    if shoelace(&verts) <= (VERTEX_MERGE_TOL * diameter) * diameter {
        return Err(Error::DegenerateBody);
    }
    if labels.iter().any(|&l| l == NO_FACET) {
        // The start box was chosen to strictly contain the body, so a
        // surviving box edge means the bound above was violated.
        return Err(Error::DegenerateBody);
    }

    // Facets shorter than the presence cut are dropped from the chain so the
    // boundary decomposes into present facets only.
    let presence_cut = FACET_PRESENCE_TOL * diameter;
    loop {
        let n = verts.len();
        let mut dropped = false;
        for i in 0..n {
            let j = (i + 1) % n;
            if dist(verts[i], verts[j]) <= presence_cut {
                let mid = scale(add(verts[i], verts[j]), 0.5);
                verts[i] = mid;
                verts.remove(j);
                labels.remove(i.min(j));
                dropped = true;
                break;
            }
        }
        if !dropped {
            break;
        }
        if verts.len() < 3 {
            return Err(Error::DegenerateBody);
        }
        merge_same_label(&mut verts, &mut labels);
        if verts.len() < 3 {
            return Err(Error::DegenerateBody);
        }
    }

    let diameter = chain_diameter(&verts);
    let mut facets: Vec<Facet> = (0..dirs.len())
        .map(|_| Facet {
            present: false,
            endpoints: None,
            length: 0.0,
        })
        .collect();
    for i in 0..verts.len() {
        let j = (i + 1) % verts.len();
        let k = labels[i];
        if facets[k].present {
            return Err(Error::InvalidInput(format!(
                "facet {k} appears twice on the boundary; directions are inconsistent"
            )));
        }
        facets[k] = Facet {
            present: true,
            endpoints: Some((verts[i], verts[j])),
            length: dist(verts[i], verts[j]),
        };
    }

    Ok(Polygon {
        directions: dirs.to_vec(),
        supports: supports.to_vec(),
        vertices: verts,
        edge_facets: labels,
        facets,
        diameter,
    })
}

/// Removes interior vertices of runs of consecutive edges sharing a label.
fn merge_same_label(verts: &mut Vec<[f64; 2]>, labels: &mut Vec<usize>) {
    loop {
        let n = verts.len();
        if n < 3 {
            return;
        }
        let mut removed = false;
        for i in 0..n {
            let j = (i + 1) % n;
            if labels[i] == labels[j] {
                // vertex j separates two edges on the same line; drop it
                verts.remove(j);
                labels.remove(j);
                removed = true;
                break;
            }
        }
        if !removed {
            return;
        }
    }
}

fn chain_diameter(verts: &[[f64; 2]]) -> f64 {
    let mut d: f64 = 0.0;
    for i in 0..verts.len() {
        for j in (i + 1)..verts.len() {
            d = d.max(dist(verts[i], verts[j]));
        }
    }
    d
}

// ---------------------------------------------------------------------------
// support / radial / hausdorff
// ---------------------------------------------------------------------------

/// `h(P, u) = max_x x . u` over the vertices.
pub fn support_function(poly: &Polygon, u: Direction) -> f64 {
    let ua = u.as_array();
    poly.vertices()
        .iter()
        .map(|p| dot(*p, ua))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// `rho(P, u) = max {t >= 0 : t u in P}`. Requires the origin strictly inside,
/// which for the support representation means every present facet has a
/// positive support number.
pub fn radial_function(poly: &Polygon, u: Direction) -> Result<f64> {
    let min_support = poly
        .supports
        .iter()
        .zip(&poly.facets)
        .filter(|(_, f)| f.present)
        .map(|(h, _)| *h)
        .fold(f64::INFINITY, f64::min);
    if !(min_support > 0.0) {
        return Err(Error::OriginOutside { min_support });
    }
    let ua = u.as_array();
    let mut rho = f64::INFINITY;
    for (k, f) in poly.facets.iter().enumerate() {
        if !f.present {
            continue;
        }
        let d = dot(poly.directions[k].as_array(), ua);
        if d > 0.0 {
            rho = rho.min(poly.supports[k] / d);
        }
    }
    debug_assert!(rho.is_finite(), "present facet normals must span the plane");
    Ok(rho)
}

/// Hausdorff distance as the sup-norm gap of the two support functions,
/// sampled on a uniform angular grid of the given resolution joined with both
/// polygons' present facet normals (so facet-supported extrema are hit
/// exactly).
pub fn hausdorff_distance_with(p: &Polygon, q: &Polygon, resolution: usize) -> f64 {
    let mut best: f64 = 0.0;
    let mut check = |u: Direction| {
        let gap = (support_function(p, u) - support_function(q, u)).abs();
        if gap > best {
            best = gap;
        }
    };
    for i in 0..resolution {
        check(Direction::from_angle(
            std::f64::consts::TAU * i as f64 / resolution as f64,
        ));
    }
    for poly in [p, q] {
        for (k, f) in poly.facets.iter().enumerate() {
            if f.present {
                check(poly.directions[k]);
            }
        }
    }
    best
}

/// [`hausdorff_distance_with`] at the default resolution.
pub fn hausdorff_distance(p: &Polygon, q: &Polygon) -> f64 {
    hausdorff_distance_with(p, q, HAUSDORFF_SAMPLES)
}
