//! General measures on the circle and the discretization pipeline that feeds
//! them to the discrete solver.
//!
//! A general measure is a nonnegative density plus finitely many atoms. For a
//! fineness parameter `j` the circle splits into `ceil(2 pi j) + 1` equal
//! half-open arcs (so each chord is shorter than `1/j`), one direction is
//! sampled per arc in general position, and the discrete weights are the arc
//! masses padded by `1/N^2` and renormalized to the original total mass.

use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{validate_directions, Direction, DiscreteSphericalMeasure};
use crate::solver::{solve_discrete, SolveOptions, SolveReport};

const TAU: f64 = std::f64::consts::TAU;

/// Retries before sampling gives up; collinear draws have measure zero, so
/// hitting this signals a bug.
pub const MAX_SAMPLING_RETRIES: usize = 1000;

/// Recursion depth cap for adaptive quadrature.
const MAX_QUAD_DEPTH: u32 = 48;

// ---------------------------------------------------------------------------
// densities
// ---------------------------------------------------------------------------

/// Nonnegative density on the circle.
#[derive(Clone)]
pub enum Density {
    Constant(f64),
    /// `base + amplitude * cos(theta)`; requires `base >= |amplitude|`.
    Cosine { base: f64, amplitude: f64 },
    /// Piecewise-linear interpolation through `(angle, value)` knots,
    /// wrapping around the circle. Angles normalized to `[0, 2 pi)`.
    Table(Vec<(f64, f64)>),
    /// Caller-supplied evaluator; must be nonnegative and piecewise
    /// continuous.
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl std::fmt::Debug for Density {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Density::Constant(c) => write!(f, "Constant({c})"),
            Density::Cosine { base, amplitude } => {
                write!(f, "Cosine {{ base: {base}, amplitude: {amplitude} }}")
            }
            Density::Table(knots) => write!(f, "Table({} knots)", knots.len()),
            Density::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

fn wrap_angle(theta: f64) -> f64 {
    let t = theta.rem_euclid(TAU);
    // rem_euclid can return TAU when theta is a tiny negative number
    if t >= TAU {
        0.0
    } else {
        t
    }
}

impl Density {
    fn validate(&self) -> Result<()> {
        match self {
            Density::Constant(c) => {
                if !c.is_finite() || *c < 0.0 {
                    return Err(Error::InvalidInput(format!(
                        "constant density must be nonnegative, got {c}"
                    )));
                }
            }
            Density::Cosine { base, amplitude } => {
                if !base.is_finite() || !amplitude.is_finite() || *base < amplitude.abs() {
                    return Err(Error::InvalidInput(format!(
                        "cosine density needs base >= |amplitude|, got base {base}, amplitude {amplitude}"
                    )));
                }
            }
            Density::Table(knots) => {
                if knots.is_empty() {
                    return Err(Error::InvalidInput("table density needs knots".into()));
                }
                for (a, v) in knots {
                    if !a.is_finite() || !v.is_finite() || *v < 0.0 {
                        return Err(Error::InvalidInput(format!(
                            "table knot ({a}, {v}) invalid: angles finite, values nonnegative"
                        )));
                    }
                }
            }
            Density::Custom(_) => {}
        }
        Ok(())
    }

    /// Normalized form: table knots wrapped, sorted, deduplicated.
    fn normalized(self) -> Result<Self> {
        self.validate()?;
        match self {
            Density::Table(knots) => {
                let mut k: Vec<(f64, f64)> =
                    knots.into_iter().map(|(a, v)| (wrap_angle(a), v)).collect();
                k.sort_by(|x, y| f64::total_cmp(&x.0, &y.0));
                k.dedup_by(|b, a| {
                    if (b.0 - a.0).abs() < 1e-12 {
                        a.1 = b.1;
                        true
                    } else {
                        false
                    }
                });
                Ok(Density::Table(k))
            }
            other => Ok(other),
        }
    }

    /// Evaluates at any angle (wrapped into one turn).
    pub fn eval(&self, theta: f64) -> f64 {
        let t = wrap_angle(theta);
        match self {
            Density::Constant(c) => *c,
            Density::Cosine { base, amplitude } => base + amplitude * t.cos(),
            Density::Table(knots) => {
                if knots.len() == 1 {
                    return knots[0].1;
                }
                // segment containing t, unwrapping across zero at the ends
                let idx = knots.partition_point(|(a, _)| *a <= t);
                let (a0, v0) = if idx == 0 {
                    let (a, v) = knots[knots.len() - 1];
                    (a - TAU, v)
                } else {
                    knots[idx - 1]
                };
                let (a1, v1) = if idx == knots.len() {
                    let (a, v) = knots[0];
                    (a + TAU, v)
                } else {
                    knots[idx]
                };
                let w = if a1 > a0 { (t - a0) / (a1 - a0) } else { 0.0 };
                v0 + (v1 - v0) * w.clamp(0.0, 1.0)
            }
            Density::Custom(f) => f(t),
        }
    }
}

// ---------------------------------------------------------------------------
// adaptive quadrature
// ---------------------------------------------------------------------------

fn simpson(f: &mut dyn FnMut(f64) -> Result<f64>, a: f64, b: f64) -> Result<f64> {
    let m = 0.5 * (a + b);
    Ok((b - a) / 6.0 * (f(a)? + 4.0 * f(m)? + f(b)?))
}

fn adaptive_step(
    f: &mut dyn FnMut(f64) -> Result<f64>,
    a: f64,
    b: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64> {
    let m = 0.5 * (a + b);
    let left = simpson(f, a, m)?;
    let right = simpson(f, m, b)?;
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    if depth == 0 {
        return Err(Error::QuadratureFailure { a, b });
    }
    Ok(adaptive_step(f, a, m, left, tol / 2.0, depth - 1)?
        + adaptive_step(f, m, b, right, tol / 2.0, depth - 1)?)
}

/// Adaptive Simpson integration to an absolute tolerance.
pub fn adaptive_simpson(
    f: &mut dyn FnMut(f64) -> Result<f64>,
    a: f64,
    b: f64,
    abs_tol: f64,
) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let whole = simpson(f, a, b)?;
    adaptive_step(f, a, b, whole, abs_tol.max(1e-15), MAX_QUAD_DEPTH)
}

// ---------------------------------------------------------------------------
// GeneralMeasure
// ---------------------------------------------------------------------------

/// A finite Borel measure on the circle: nonnegative density plus atoms.
#[derive(Clone, Debug)]
pub struct GeneralMeasure {
    density: Option<Density>,
    /// `(angle in [0, 2 pi), mass > 0)`.
    atoms: Vec<(f64, f64)>,
    continuous_total: f64,
    total: f64,
}

impl GeneralMeasure {
    pub fn new(density: Option<Density>, atoms: Vec<(f64, f64)>) -> Result<Self> {
        let density = density.map(Density::normalized).transpose()?;
        let mut wrapped = Vec::with_capacity(atoms.len());
        for (i, (angle, mass)) in atoms.iter().enumerate() {
            if !angle.is_finite() {
                return Err(Error::InvalidInput(format!("atom {i} has non-finite angle")));
            }
            if !mass.is_finite() || *mass <= 0.0 {
                return Err(Error::InvalidInput(format!(
                    "atom {i} must have positive mass, got {mass}"
                )));
            }
            wrapped.push((wrap_angle(*angle), *mass));
        }
        let continuous_total = match &density {
            None => 0.0,
            Some(d) => {
                let mut f = |t: f64| -> Result<f64> {
                    let v = d.eval(t);
                    if !v.is_finite() || v < 0.0 {
                        return Err(Error::InvalidInput(format!(
                            "density evaluated to {v} at angle {t}"
                        )));
                    }
                    Ok(v)
                };
                // coarse scale estimate drives the relative tolerance
                let mut rough = 0.0;
                for i in 0..64 {
                    rough += f(TAU * (i as f64 + 0.5) / 64.0)?;
                }
                rough = rough * TAU / 64.0;
                integrate_in_pieces(&mut f, &piece_points(&density, 0.0, TAU), 1e-10 * rough.max(1e-6))?
            }
        };
        let atom_total: f64 = wrapped.iter().map(|(_, m)| m).sum();
        let total = continuous_total + atom_total;
        if !(total > 0.0) {
            return Err(Error::InvalidInput(
                "measure must have positive total mass".into(),
            ));
        }
        Ok(Self {
            density,
            atoms: wrapped,
            continuous_total,
            total,
        })
    }

    #[inline]
    pub fn total(&self) -> f64 {
        self.total
    }

    #[inline]
    pub fn continuous_total(&self) -> f64 {
        self.continuous_total
    }

    #[inline]
    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    #[inline]
    pub fn density(&self) -> Option<&Density> {
        self.density.as_ref()
    }

    /// Mass of each of the `n` equal half-open arcs `[2 pi i / n, 2 pi (i+1) / n)`.
    /// Atoms are assigned by index arithmetic, so boundary atoms count exactly
    /// once.
    pub fn equal_arc_masses(&self, n: usize) -> Result<Vec<f64>> {
        let mut masses = vec![0.0; n];
        if let Some(d) = &self.density {
            let tol = 1e-12 * self.total;
            for (i, mass) in masses.iter_mut().enumerate() {
                let a = TAU * i as f64 / n as f64;
                let b = TAU * (i + 1) as f64 / n as f64;
                let mut f = |t: f64| -> Result<f64> {
                    let v = d.eval(t);
                    if !v.is_finite() || v < 0.0 {
                        return Err(Error::InvalidInput(format!(
                            "density evaluated to {v} at angle {t}"
                        )));
                    }
                    Ok(v)
                };
                *mass = integrate_in_pieces(&mut f, &piece_points(&self.density, a, b), tol)?;
            }
        }
        for (angle, mass) in &self.atoms {
            let mut idx = ((angle / TAU) * n as f64).floor() as usize;
            if idx >= n {
                idx = n - 1;
            }
            masses[idx] += mass;
        }
        Ok(masses)
    }

    /// `integral of f d(mu)` for a caller-supplied integrand on angles.
    pub fn integrate(&self, f: &dyn Fn(f64) -> f64) -> Result<f64> {
        let mut acc = 0.0;
        if let Some(d) = &self.density {
            let mut g = |t: f64| -> Result<f64> { Ok(f(t) * d.eval(t)) };
            acc += integrate_in_pieces(
                &mut g,
                &piece_points(&self.density, 0.0, TAU),
                1e-11 * self.total.max(1e-6),
            )?;
        }
        for (angle, mass) in &self.atoms {
            acc += f(*angle) * mass;
        }
        Ok(acc)
    }
}

/// Split points for quadrature: table densities get their knots inserted so
/// the integrand is smooth on every piece.
fn piece_points(density: &Option<Density>, a: f64, b: f64) -> Vec<f64> {
    let mut pts = vec![a, b];
    if let Some(Density::Table(knots)) = density {
        for (angle, _) in knots {
            for shift in [-TAU, 0.0, TAU] {
                let t = angle + shift;
                if t > a && t < b {
                    pts.push(t);
                }
            }
        }
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

fn integrate_in_pieces(
    f: &mut dyn FnMut(f64) -> Result<f64>,
    points: &[f64],
    tol: f64,
) -> Result<f64> {
    let mut acc = 0.0;
    let pieces = (points.len() - 1).max(1) as f64;
    for w in points.windows(2) {
        acc += adaptive_simpson(f, w[0], w[1], tol / pieces)?;
    }
    Ok(acc)
}

// ---------------------------------------------------------------------------
// partition and sampling
// ---------------------------------------------------------------------------

/// Half-open angular interval `[start, end)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ArcInterval {
    pub start: f64,
    pub end: f64,
}

impl ArcInterval {
    pub fn length(&self) -> f64 {
        self.end - self.start
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.start + self.end)
    }
}

/// `ceil(2 pi j) + 1` equal half-open arcs covering one turn. The arc length
/// `2 pi / N` is below `1/j`, so chord diameters are too.
pub fn partition_circle(j: u32) -> Vec<ArcInterval> {
    assert!(j >= 1, "fineness parameter must be at least 1");
    let n = (TAU * j as f64).ceil() as usize + 1;
    (0..n)
        .map(|i| ArcInterval {
            start: TAU * i as f64 / n as f64,
            end: TAU * (i + 1) as f64 / n as f64,
        })
        .collect()
}

/// One direction per arc: the midpoint plus a seeded jitter of at most 10%
/// of the arc length, redrawn until the set is in general position.
pub fn sample_general_position(arcs: &[ArcInterval], seed: u64) -> Result<Vec<Direction>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..MAX_SAMPLING_RETRIES {
        let dirs: Vec<Direction> = arcs
            .iter()
            .map(|arc| {
                let jitter = rng.gen_range(-0.1..=0.1) * arc.length();
                Direction::from_angle(arc.midpoint() + jitter)
            })
            .collect();
        if validate_directions(&dirs).general_position {
            return Ok(dirs);
        }
    }
    Err(Error::SamplingFailure(MAX_SAMPLING_RETRIES))
}

// ---------------------------------------------------------------------------
// discretization
// ---------------------------------------------------------------------------

/// A general measure reduced to a discrete one at fineness `j`.
#[derive(Clone, Debug)]
pub struct DiscretizationResult {
    pub j: u32,
    pub arcs: Vec<ArcInterval>,
    pub dirs: Vec<Direction>,
    /// Arc masses padded by `1/N^2`.
    pub raw: DiscreteSphericalMeasure,
    /// `raw` rescaled so its total equals the source total.
    pub normalized: DiscreteSphericalMeasure,
}

/// Splits the circle at fineness `j`, samples directions, and builds the
/// padded and normalized discrete measures.
pub fn discretize(mu: &GeneralMeasure, j: u32, seed: u64) -> Result<DiscretizationResult> {
    let arcs = partition_circle(j);
    let dirs = sample_general_position(&arcs, seed)?;
    let n = arcs.len();
    let pad = 1.0 / (n as f64 * n as f64);
    let masses = mu.equal_arc_masses(n)?;
    let raw = DiscreteSphericalMeasure::new(
        dirs.iter()
            .cloned()
            .zip(masses.iter().map(|m| m + pad))
            .collect(),
    )?;
    let normalized = raw.scaled(mu.total() / raw.total())?;
    Ok(DiscretizationResult {
        j,
        arcs,
        dirs,
        raw,
        normalized,
    })
}

// ---------------------------------------------------------------------------
// subspace mass inequality
// ---------------------------------------------------------------------------

/// Outcome of [`subspace_mass_check`].
#[derive(Clone, Copy, Debug)]
pub struct SubspaceMassReport {
    /// True when every line's atom mass is strictly below half the total.
    pub pass: bool,
    /// Largest `mass(line) / total` over atom-generated lines.
    pub worst_ratio: f64,
    /// A direction spanning the worst line, when atoms exist.
    pub witness: Option<Direction>,
}

/// Anything that can expose its atomic part for the line-mass inequality.
pub trait AtomicPart {
    /// `(direction, mass)` atoms; continuous parts are omitted because they
    /// give zero mass to any single line.
    fn atom_directions(&self) -> Vec<(Direction, f64)>;
    fn total_mass(&self) -> f64;
}

impl AtomicPart for DiscreteSphericalMeasure {
    fn atom_directions(&self) -> Vec<(Direction, f64)> {
        self.atoms()
            .iter()
            .map(|a| (a.direction, a.weight))
            .collect()
    }

    fn total_mass(&self) -> f64 {
        self.total()
    }
}

impl AtomicPart for GeneralMeasure {
    fn atom_directions(&self) -> Vec<(Direction, f64)> {
        self.atoms()
            .iter()
            .map(|(angle, mass)| (Direction::from_angle(*angle), *mass))
            .collect()
    }

    fn total_mass(&self) -> f64 {
        self.total()
    }
}

/// Checks the planar subspace mass inequality: the atom mass on every
/// 1-dimensional subspace (an antipodal direction pair) must be strictly
/// less than half the total mass.
pub fn subspace_mass_check<M: AtomicPart + ?Sized>(mu: &M) -> SubspaceMassReport {
    let atoms = mu.atom_directions();
    let total = mu.total_mass();
    let mut grouped = vec![false; atoms.len()];
    let mut worst_ratio: f64 = 0.0;
    let mut witness = None;
    for i in 0..atoms.len() {
        if grouped[i] {
            continue;
        }
        let mut line_mass = atoms[i].1;
        for j in (i + 1)..atoms.len() {
            if !grouped[j] && atoms[i].0.line_separation(atoms[j].0) <= crate::geometry::SEPARATION_TOL
            {
                line_mass += atoms[j].1;
                grouped[j] = true;
            }
        }
        let ratio = line_mass / total;
        if ratio > worst_ratio {
            worst_ratio = ratio;
            witness = Some(atoms[i].0);
        }
    }
    SubspaceMassReport {
        pass: worst_ratio < 0.5,
        worst_ratio,
        witness,
    }
}

// ---------------------------------------------------------------------------
// approximation driver
// ---------------------------------------------------------------------------

/// One schedule stage: the discretization and what the solver did with it.
#[derive(Debug)]
pub struct Stage {
    pub j: u32,
    pub discretization: Option<DiscretizationResult>,
    /// Present when the solver produced a report, even a non-converged one.
    pub report: Option<SolveReport>,
    pub error: Option<String>,
}

/// Cross-stage diagnostics, index-aligned with the stages.
#[derive(Clone, Debug, Default)]
pub struct ApproximationDiagnostics {
    pub smi: Option<SubspaceMassReport>,
    pub smi_warning: bool,
    /// Largest vertex norm of each stage's polygon.
    pub outer_radii: Vec<Option<f64>>,
    pub residuals: Vec<Option<f64>>,
    /// Hausdorff distance between consecutive stage polygons.
    pub consecutive_hausdorff: Vec<Option<f64>>,
}

/// Output of [`approximate_solve`].
#[derive(Debug)]
pub struct ApproximationRun {
    pub stages: Vec<Stage>,
    pub diagnostics: ApproximationDiagnostics,
}

/// Runs the discretize-and-solve pipeline along a fineness schedule,
/// continuing past per-stage failures and aggregating boundedness and
/// Cauchy-in-Hausdorff diagnostics.
pub fn approximate_solve(
    mu: &GeneralMeasure,
    j_schedule: &[u32],
    opts: &SolveOptions,
) -> Result<ApproximationRun> {
    if j_schedule.is_empty() {
        return Err(Error::InvalidSchedule("empty fineness schedule".into()));
    }
    if let Some(bad) = j_schedule.iter().find(|&&j| j == 0) {
        return Err(Error::InvalidSchedule(format!(
            "fineness parameters must be at least 1, got {bad}"
        )));
    }
    let smi = subspace_mass_check(mu);
    let mut diagnostics = ApproximationDiagnostics {
        smi: Some(smi),
        smi_warning: !smi.pass,
        ..Default::default()
    };

    let mut stages: Vec<Stage> = Vec::with_capacity(j_schedule.len());
    for &j in j_schedule {
        let stage = match discretize(mu, j, opts.seed) {
            Err(e) => Stage {
                j,
                discretization: None,
                report: None,
                error: Some(e.to_string()),
            },
            Ok(disc) => match solve_discrete(&disc.normalized, opts) {
                Ok(report) => Stage {
                    j,
                    discretization: Some(disc),
                    report: Some(report),
                    error: None,
                },
                Err(Error::MaxIterations { report }) => Stage {
                    j,
                    discretization: Some(disc),
                    error: Some(format!(
                        "tolerance unmet: residual {:.3e} after {} iterations",
                        report.residual, report.iterations
                    )),
                    report: Some(*report),
                },
                Err(e) => Stage {
                    j,
                    discretization: Some(disc),
                    report: None,
                    error: Some(e.to_string()),
                },
            },
        };
        stages.push(stage);
    }

    for stage in &stages {
        let radius = stage.report.as_ref().map(|r| {
            r.polygon
                .vertices()
                .iter()
                .map(|v| v[0].hypot(v[1]))
                .fold(0.0, f64::max)
        });
        diagnostics.outer_radii.push(radius);
        diagnostics
            .residuals
            .push(stage.report.as_ref().map(|r| r.residual));
    }
    for pair in stages.windows(2) {
        let d = match (&pair[0].report, &pair[1].report) {
            (Some(a), Some(b)) => Some(crate::geometry::hausdorff_distance(
                &a.polygon, &b.polygon,
            )),
            _ => None,
        };
        diagnostics.consecutive_hausdorff.push(d);
    }

    Ok(ApproximationRun {
        stages,
        diagnostics,
    })
}
