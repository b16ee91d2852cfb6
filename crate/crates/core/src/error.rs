use alloc::string::String;

/// Errors produced by the numerical core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A parameter lies outside the domain where the operation is defined.
    #[error("parameter domain error: {0}")]
    ParameterDomain(String),

    /// The parameters are valid but the requested regime does not allow the
    /// operation (for example a stability experiment above `p_c`).
    #[error("regime violation: {0}")]
    Regime(String),

    /// Binary operation on fields living on different grids.
    #[error("grid mismatch")]
    GridMismatch,

    #[error("non-finite sample at node {0}")]
    NonFinite(usize),

    #[error("zero field")]
    ZeroField,

    /// Input for which an operation is mathematically degenerate
    /// (numerically vanishing potential energy, ...).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// The stationary equation has no nontrivial solution (ω ≤ 0).
    #[error("no nontrivial solution for omega = {omega}")]
    Nonexistence { omega: f64 },

    #[error("shooting bracket not found in [{lo:e}, {hi:e}]")]
    Bracketing { lo: f64, hi: f64 },

    #[error("solver did not converge: {0}")]
    Convergence(String),

    /// A target grid is too coarse to resolve a compressed profile.
    #[error("under-resolved: scaled spacing {scaled_spacing} exceeds {limit}")]
    UnderResolved { scaled_spacing: f64, limit: f64 },

    /// Prescribing the mass by dilation is impossible at `p = p_c`.
    #[error("mass-critical exponent: dilation preserves the L2 norm")]
    MassCriticalScaling,

    #[error("variance unreliable: field does not decay at the truncation radius")]
    VarianceUnreliable,

    #[error("time step collapsed below {dt_min:e} at t = {t}")]
    StepCollapse { t: f64, dt_min: f64 },
}

impl Error {
    /// Whether the error stems from invalid input or regime rather than from
    /// a numerical failure.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::ParameterDomain(_)
                | Error::Regime(_)
                | Error::GridMismatch
                | Error::NonFinite(_)
                | Error::ZeroField
                | Error::Degenerate(_)
                | Error::Nonexistence { .. }
                | Error::UnderResolved { .. }
                | Error::MassCriticalScaling
                | Error::VarianceUnreliable
        )
    }
}

pub type Result<T> = core::result::Result<T, Error>;
