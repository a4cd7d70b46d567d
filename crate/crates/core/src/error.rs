use alloc::boxed::Box;
use alloc::string::String;

use crate::minimizer::MinimizeResult;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("fields live on different bases")]
    BasisMismatch,
    #[error("Killing field incompatible with manifold: {0}")]
    IncompatibleKilling(String),
    #[error("non-Hermitian assembly: imaginary part {imag:e} against real part {real:e}")]
    NonHermitian { imag: f64, real: f64 },
    #[error("eigensolver did not converge after {iterations} iterations")]
    EigenNonConvergence { iterations: usize },
    #[error("assembly error: {0}")]
    Assembly(String),
    #[error("parameter regime rejected: {0}")]
    ParameterRegime(String),
    #[error("minimization did not converge (best objective {})", .0.objective)]
    NonConverged(Box<MinimizeResult>),
    #[error("V_mu is empty at this truncation (mu = {mu})")]
    SubspaceEmpty { mu: f64 },
    #[error("degenerate field: {0}")]
    Degenerate(String),
    #[error("no positive constant solution: m^2 - lambda^2 = {0} <= 0")]
    NoPositiveConstant(f64),
    #[error("support escapes the computational domain: {0}")]
    DomainOverflow(String),
    #[error("perturbed field is not Killing: {0}")]
    InvalidPerturbation(String),
    #[error("objective changed by {relative_change:e} under domain doubling; increase r_max")]
    IncreaseDomain { relative_change: f64 },
    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("missing entry: {0}")]
    MissingEntry(String),
    #[error("cutoff geometry violated: {0}")]
    Geometry(String),
}
