//! Error types shared across the crate.

use crate::C;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    /// Target value is too close to a critical value for preimage solving.
    #[error("value {value} is within {tol} of a critical value")]
    CriticalValueProximity { value: C, tol: f64 },

    /// Point lies outside the domain of a conformal map.
    #[error("point {point} lies outside the map domain: {what}")]
    OutsideDomain { point: C, what: &'static str },

    /// Metric density requested at a puncture.
    #[error("metric is singular at puncture {point}")]
    MetricSingularity { point: C },

    /// A continuation path runs into a branch point.
    #[error("path segment {index} passes within {clearance:e} of branch point {point}")]
    BranchPointHit {
        point: C,
        index: usize,
        clearance: f64,
    },

    /// Evaluation requested at an essential singularity.
    #[error("essential singularity at {point}")]
    EssentialSingularity { point: C },

    /// Adaptive quadrature exceeded its refinement depth cap.
    #[error("quadrature failed to converge: {what} (achieved {achieved:e}, wanted {wanted:e})")]
    QuadratureNonConvergence {
        what: &'static str,
        achieved: f64,
        wanted: f64,
    },

    /// Root finding failed to converge from a seed.
    #[error("root finder failed to converge from seed {seed}")]
    RootFindingFailed { seed: C },

    /// A growth series is sampled too sparsely for the requested operation.
    #[error("sampling too coarse: {what}")]
    SamplingTooCoarse { what: String },

    /// Least-squares fit has a degenerate design matrix.
    #[error("degenerate design matrix: {what}")]
    DegenerateFit { what: String },

    /// Label propagation cannot produce a consistent labeling.
    #[error("inconsistent net labeling: {what}")]
    Inconsistent { what: String },

    /// A systole search exhausted its budget without a usable candidate.
    #[error("inconclusive: {what}")]
    Inconclusive { what: String },

    /// Operation not supported for the given function.
    #[error("unsupported: {what}")]
    Unsupported { what: String },

    /// Malformed input (bad path, bad parameters, bad serialized net).
    #[error("invalid input: {what}")]
    InvalidInput { what: String },
}
