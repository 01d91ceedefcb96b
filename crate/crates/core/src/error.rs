use thiserror::Error;

/// Errors raised by the solver library.
#[derive(Debug, Error)]
pub enum SweError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("mesh rejected: non-positive Jacobian {jac:e} in element {element} node {node}")]
    NonPositiveJacobian { element: usize, node: usize, jac: f64 },
    #[error("mesh rejected: {0}")]
    Mesh(String),
    #[error("negative element mean depth {mean:e} in element {element}")]
    NegativeMean { element: usize, mean: f64 },
    #[error("negative depth h = {h:e} at element {element} node ({i}, {j}), x = {x}, y = {y}, t = {t}")]
    NegativeDepth {
        element: usize,
        i: usize,
        j: usize,
        x: f64,
        y: f64,
        h: f64,
        t: f64,
    },
    #[error("non-finite value in element {element} at t = {t}")]
    NonFinite { element: usize, t: f64 },
    #[error("time step rejected {0} times in a row")]
    TooManyRejections(usize),
    #[error("config error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl SweError {
    /// Process exit code for this error: 2 for configuration problems,
    /// 3 for numerical aborts.
    pub fn exit_code(&self) -> i32 {
        match self {
            SweError::InvalidArgument(_) | SweError::Config(_) | SweError::Mesh(_) => 2,
            SweError::NonPositiveJacobian { .. } => 2,
            SweError::Io(_) => 2,
            _ => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, SweError>;
