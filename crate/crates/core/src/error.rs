use thiserror::Error;

/// Failure modes of the engine.
///
/// Variants fall into three families which the CLI maps onto exit codes:
/// invalid input, exhausted numerical budgets, and degenerate physical
/// configurations where a quantity is genuinely undefined.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("hopping amplitude vanishes at k = {k} (|v(k)| = {modulus:e}); phase undefined")]
    DegenerateHopping { k: f64, modulus: f64 },

    #[error("u = 1 closes the gap at k = pi; the displacement is undefined there")]
    DegenerateRatio,

    #[error("Schrieffer-Wolff denominator vanishes for level {level} (eps_A + omega - eps_j = {denominator:e})")]
    Resonance { level: usize, denominator: f64 },

    #[error("spectrum is degenerate (minimum gap {gap:e}); long-time average formula needs distinct levels")]
    DegenerateSpectrum { gap: f64 },

    #[error("Laplace variable s = {re} + {im}i touches the branch cut of the self-energy")]
    BranchCut { re: f64, im: f64 },

    #[error("time step {dt} too coarse for bandwidth {delta}: dt*Delta = {product} > 0.2")]
    StepTooLarge { dt: f64, delta: f64, product: f64 },

    #[error(
        "Bromwich tail bound not reached within {nodes} nodes (need |Im s| >= {needed}, cap {cap})"
    )]
    TailBound { nodes: usize, needed: f64, cap: f64 },

    #[error("dense eigensolve of dimension {dim} exceeds budget {budget}")]
    DimensionBudget { dim: usize, budget: usize },

    #[error(
        "walker reached the chain boundary at t = {time} (boundary occupation {occupation:e})"
    )]
    BoundaryReached { time: f64, occupation: f64 },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),
}

/// Coarse classification used for process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Config,
    Budget,
    Degenerate,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::InvalidParameter(_) | Error::GridMismatch(_) | Error::StepTooLarge { .. } => {
                ErrorClass::Config
            }
            Error::TailBound { .. }
            | Error::DimensionBudget { .. }
            | Error::BoundaryReached { .. }
            | Error::Quadrature(_) => ErrorClass::Budget,
            Error::DegenerateHopping { .. }
            | Error::DegenerateRatio
            | Error::Resonance { .. }
            | Error::DegenerateSpectrum { .. }
            | Error::BranchCut { .. } => ErrorClass::Degenerate,
        }
    }

    /// Short stable identifier for machine-readable error records.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::DegenerateHopping { .. } => "degenerate_hopping",
            Error::DegenerateRatio => "degenerate_ratio",
            Error::Resonance { .. } => "resonance",
            Error::DegenerateSpectrum { .. } => "degenerate_spectrum",
            Error::BranchCut { .. } => "branch_cut",
            Error::StepTooLarge { .. } => "step_too_large",
            Error::TailBound { .. } => "tail_bound",
            Error::DimensionBudget { .. } => "dimension_budget",
            Error::BoundaryReached { .. } => "boundary_reached",
            Error::GridMismatch(_) => "grid_mismatch",
            Error::Quadrature(_) => "quadrature",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
