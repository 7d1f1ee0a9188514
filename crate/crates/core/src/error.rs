use thiserror::Error;

/// Errors produced by the fractional-calculus and graph layers.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Fractional order outside the open interval (0, 1).
    #[error("fractional order must satisfy 0 < alpha < 1, got {0}")]
    InvalidOrder(f64),

    /// Grid violates its construction invariants.
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    /// Sample vector does not match its grid.
    #[error("values length {values} does not match grid with {nodes} nodes")]
    LengthMismatch { values: usize, nodes: usize },

    /// Gamma function evaluated outside its supported domain.
    #[error("gamma function argument must be positive, got {0}")]
    GammaDomain(f64),

    /// Mittag-Leffler parameters outside the supported range.
    #[error("Mittag-Leffler parameters must satisfy 0 < alpha <= 2, beta > 0, got alpha={alpha}, beta={beta}")]
    InvalidMlParams { alpha: f64, beta: f64 },

    /// Mittag-Leffler argument outside the supported range.
    #[error("Mittag-Leffler argument |z| = {0} exceeds the supported bound {1}")]
    MlArgumentTooLarge(f64, f64),

    /// The two evaluation regimes of the Mittag-Leffler function disagree, or
    /// a truncation-error estimate exceeds the accuracy budget.
    #[error("Mittag-Leffler accuracy loss: {0}")]
    MlAccuracyLoss(String),

    /// The fundamental-solution kernel is evaluated exactly at its pole.
    #[error("kernel is singular at s = l (s = {0})")]
    KernelAtPole(f64),

    /// Endpoint-trace extrapolation did not settle.
    #[error("endpoint trace did not converge: successive extrapolants differ by {difference:.3e} (tolerance {tolerance:.3e})")]
    TraceNotConvergent { difference: f64, tolerance: f64 },

    /// An annotated endpoint singularity that the requested operation cannot
    /// represent or differentiate.
    #[error("unsupported endpoint singularity: {0}")]
    UnsupportedSingularity(String),

    /// Graph construction or lookup failure.
    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    /// A graph function does not match the graph it is used with.
    #[error("graph/function mismatch: {0}")]
    GraphFunctionMismatch(String),

    /// Spectral-parameter assembly rejected its input.
    #[error("invalid spectral data: {0}")]
    InvalidSpectralData(String),

    /// Strict-mode constraint assembly found an inconsistent chain.
    #[error("inconsistent constraints: {0}")]
    InconsistentConstraints(String),

    /// Volterra iteration failed to reach the requested tolerance.
    #[error("Volterra iteration did not converge after {sweeps} sweeps (last contraction ratio {ratio:.3e})")]
    VolterraNotConverged { sweeps: usize, ratio: f64 },
}
