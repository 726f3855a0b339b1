use crate::solver::SolveReport;

/// Crate-wide error type. Variants are grouped by the stage that raises them.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// The direction set fits in a closed half-plane, so no bounded body exists.
    #[error("directions lie in a closed half-plane (largest angular gap {max_gap:.6} rad >= pi)")]
    HemisphereViolation { max_gap: f64 },

    /// The half-plane intersection has empty interior.
    #[error("half-plane intersection has empty interior")]
    DegenerateBody,

    /// Radial function requested for a polygon whose interior misses the origin.
    #[error("origin is not an interior point (min support over present facets {min_support:.3e})")]
    OriginOutside { min_support: f64 },

    /// Conjugate gradients stalled before reaching the requested residual.
    #[error(
        "linear solve stalled: relative residual {achieved:.3e} after {iterations} iterations \
         (target {target:.3e})"
    )]
    SolverDivergence {
        achieved: f64,
        target: f64,
        iterations: usize,
    },

    /// Mesh boundary labels do not match the polygon's facets.
    #[error("mesh does not match polygon: {0}")]
    MeshMismatch(String),

    /// Refinement schedule is empty or not strictly increasing.
    #[error("invalid refinement schedule: {0}")]
    InvalidSchedule(String),

    /// Entropy evaluated at a point outside the body's interior.
    #[error("point outside entropy domain: slack {slack:.3e} at facet {facet}")]
    OutsideDomain { facet: usize, slack: f64 },

    /// Newton iteration for the entropy maximizer failed to converge.
    #[error("entropy maximizer did not converge within {0} Newton steps")]
    NoConvergence(usize),

    /// A facet's support slack collapsed during descent and could not be rescued.
    #[error("facet {0} lost during descent")]
    FacetLost(usize),

    /// Outer descent hit the iteration cap; the partial report is attached.
    #[error(
        "descent reached {} iterations with residual {:.3e} above tolerance",
        report.iterations,
        report.residual
    )]
    MaxIterations { report: Box<SolveReport> },

    /// Jittered arc sampling kept producing near-parallel directions.
    #[error("could not sample directions in general position after {0} attempts")]
    SamplingFailure(usize),

    /// Adaptive quadrature hit its depth limit before the tolerance.
    #[error("quadrature failed to converge on [{a:.6}, {b:.6}]")]
    QuadratureFailure { a: f64, b: f64 },

    /// Malformed user input (JSON, flags, or inconsistent array lengths).
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
