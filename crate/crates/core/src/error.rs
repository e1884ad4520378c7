//! Error types shared by all modules.

/// Library-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Input violates a documented precondition (wrong domain kind, missing
    /// decay, bad exponent range, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A sample value is NaN or infinite.
    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },

    /// A map that must be strictly increasing is not; `index` is the first
    /// offending sample (values[index + 1] <= values[index]).
    #[error("monotonicity violated at sample index {index}")]
    MonotonicityViolation { index: usize },

    /// Evaluation or composition outside the represented window.
    #[error("domain mismatch: {0}")]
    DomainMismatch(String),

    /// Operation not defined on this domain kind (e.g. cumulative integral
    /// on the circle).
    #[error("unsupported domain: {0}")]
    UnsupportedDomain(String),

    /// A requested time reaches or passes the blow-up time of the flow.
    #[error("flow blows up at t* = {t_star:.6e}; requested t = {t:.6e}")]
    BlowUp { t: f64, t_star: f64 },

    /// `continue_to_blowup` called on data that flows for all time.
    #[error("no blow-up: the flow exists for all time")]
    NoBlowUp,

    /// Flat-chart data leaves the image set (f <= -r somewhere); the point
    /// lies on or past the metric-completion boundary.
    #[error("outside the chart image (f <= -r) at index {index}")]
    OutOfImage { index: usize },

    /// Sphere constraint |‖f‖_r - r| exceeded the allowed tolerance.
    #[error("off the L^r-sphere: |‖f‖ - r| = {deviation:.3e} > {tol:.3e}")]
    OffSphere { deviation: f64, tol: f64 },

    /// Initial sphere velocity is not tangent to the constraint set.
    #[error("velocity not tangent to the sphere: <grad, g> = {inner:.3e}")]
    NotTangent { inner: f64 },

    /// Periodic geodesic reached the image boundary (min f below tolerance),
    /// the discrete proxy for periodic blow-up.
    #[error("sphere-image boundary hit at t ≈ {t:.6e} (min f = {min_f:.3e})")]
    BoundaryHit { t: f64, min_f: f64 },

    /// Characteristics crossed; the solution develops a shock.
    #[error("characteristics cross before t = {t:.6e}; shock formation")]
    Shock { t: f64 },

    /// Not enough samples for the requested operation.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// Invalid solver or scenario configuration.
    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}
