use num_complex::Complex64;
use thiserror::Error;

/// Every failure the library can report.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("gamma function pole at x = {0}")]
    GammaPole(f64),

    #[error("argument {0} lies on the branch cut [0, inf)")]
    OnBranchCut(Complex64),

    #[error("singular argument: {0}")]
    SingularArgument(String),

    #[error("unsupported regime: {0}")]
    UnsupportedRegime(String),

    #[error("precision loss: {0}")]
    PrecisionLoss(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("model error: {0}")]
    Model(String),

    #[error("expression parse error at offset {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error("step size underflow at x = {x}")]
    StepUnderflow { x: f64 },

    #[error("integration grid touches the singular endpoint at x = {0}")]
    SingularEndpoint(f64),

    #[error("riccati integration failed near x = {x}: {reason}")]
    Riccati { x: f64, reason: String },

    #[error("no convergence in {what}: achieved {achieved:e}")]
    Convergence { what: String, achieved: f64 },

    #[error("reference point degeneracy at x0 = {x0}: phi^2 + phi'^2 = {denom:e}")]
    ReferenceDegeneracy { x0: f64, denom: f64 },

    #[error("m_-(z, x0) has a pole at z = {z} (phi(z, x0) = 0)")]
    MMinusPole { z: Complex64 },

    #[error("rotated m-function has a pole: cos + sin m = 0")]
    RotatedPole,

    #[error("wronskian degeneracy: m_- = m_+ at z = {z}")]
    WronskianDegeneracy { z: Complex64 },

    #[error("probe points disagree: relative spread {spread:e}")]
    ProbeInconsistency { spread: f64 },

    #[error("point mass present at lambda = {lambda} (mass about {mass:e})")]
    PointMassPresent { lambda: f64, mass: f64 },

    #[error("parseval defect {defect:e} exceeds {limit:e}: basis and measure normalizations do not match")]
    ParsevalViolation { defect: f64, limit: f64 },

    #[error("quadrature failure: {0}")]
    Quadrature(String),
}

impl Error {
    /// True for failures caused by a numerical procedure not converging,
    /// as opposed to bad input.
    pub fn is_nonconvergence(&self) -> bool {
        matches!(
            self,
            Error::StepUnderflow { .. }
                | Error::Riccati { .. }
                | Error::Convergence { .. }
                | Error::ProbeInconsistency { .. }
                | Error::PrecisionLoss(_)
                | Error::Quadrature(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
