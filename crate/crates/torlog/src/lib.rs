//! Planar torsion log-Minkowski solver.
//!
//! Given a finite positive measure on the unit circle, this crate recovers a
//! convex polygon whose cone-torsion measure matches it. The forward map
//! solves the torsion boundary problem (`laplace(u) = -2`, `u = 0` on the
//! boundary) with linear finite elements and reads per-facet boundary
//! measures off the solution; the inverse problem runs scale-invariant
//! entropy descent over support vectors. General measures (density plus
//! atoms) are handled by a partition-sample-discretize pipeline that feeds
//! the discrete solver along a fineness schedule.
//!
//! Module map:
//! - [`geometry`]: directions, discrete measures, polygons by support
//!   numbers, half-plane clipping, support/radial/Hausdorff queries.
//! - [`torsion`]: deterministic meshing, the finite-element forward map,
//!   facet torsion measures, refinement studies with extrapolation.
//! - [`entropy`]: the log-support functional and its interior maximizer.
//! - [`solver`]: the outer descent recovering a polygon from a measure.
//! - [`measures`]: general measures, circle partitions, general-position
//!   sampling, the subspace mass inequality, the approximation driver.
//! - [`oracle`]: closed-form rigidities and the de Saint Venant check.
//! - [`io`]: JSON/CSV wire formats and text spec parsers.
//! - [`fixtures`]: canonical shapes and seeded generators for tests.

pub mod entropy;
pub mod error;
pub mod fixtures;
pub mod geometry;
pub mod io;
pub mod measures;
pub mod oracle;
pub mod solver;
pub mod torsion;

pub use error::{Error, Result};
