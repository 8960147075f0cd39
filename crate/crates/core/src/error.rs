use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not skew-symmetric (‖S + Sᵀ‖ = {0:e})")]
    NotSkew(f64),
    #[error("axis is not a unit vector (norm {0})")]
    NonUnitAxis(f64),
    #[error("quaternion is not unit (norm {0})")]
    NonUnitQuaternion(f64),
    #[error("matrix is not a proper rotation (‖RᵀR − I‖ = {0:e})")]
    NotARotation(f64),
    #[error("cannot project onto SO(3): determinant {0} is not positive")]
    DegenerateProjection(f64),

    #[error("weight matrix is not symmetric (‖A − Aᵀ‖ = {0:e})")]
    Asymmetric(f64),
    #[error("tr(A)I − A is not positive definite (smallest eigenvalue {0})")]
    WeightNotPositive(f64),
    #[error("invalid eigendirection: {0}")]
    InvalidEigenDirection(String),

    #[error("invalid warping gain: {0}")]
    InvalidGain(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("degenerate critical point: Δ(v,u) = {0:e} for some eigendirection")]
    DegenerateCriticalPoint(f64),
    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid measurement set: {0}")]
    Measurement(String),

    #[error("Zeno guard tripped: {0}")]
    ZenoGuard(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse { .. } => 2,
            Error::ZenoGuard(_) => 4,
            Error::Io(_) => 1,
            _ => 3,
        }
    }
}
