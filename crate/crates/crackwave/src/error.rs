use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("non-finite input: {0}")]
    NonFinite(&'static str),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("found {found} sign changes below omega = {upper}, wanted {wanted}")]
    BracketFailure { found: usize, wanted: usize, upper: f64 },
    #[error("no convergence: {0}")]
    ConvergenceFailure(String),
    #[error("argument principle counted {count:.4} roots, expected 4")]
    RootCountMismatch { count: f64 },
    #[error("not an eigenpair: relative residual {residual:e}")]
    NotAnEigenpair { residual: f64 },
    #[error("gamma too close to zero ({gamma:e})")]
    GammaZero { gamma: f64 },
    #[error("boundary system singular: determinant factor {factor:e}")]
    SingularSystem { factor: f64 },
    #[error("omega lies on the essential spectrum at xi = {xi}")]
    OnEssentialSpectrum { xi: f64 },
    #[error("quadrature failure: {0}")]
    QuadratureFailure(String),
    #[error("mu1 has no sign change on the gap window [{lo:e}, {hi:e}]")]
    NoSignChange { lo: f64, hi: f64 },
    #[error("fixed point iteration diverged after {iterations} steps")]
    FixedPointDivergence { iterations: usize },
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),
    #[error("ingredient mismatch: {name} general {general} vs closed form {closed}")]
    IngredientMismatch { name: &'static str, general: f64, closed: f64 },
}

impl Error {
    /// True for failures of a numerical method (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        !matches!(self, Error::NonFinite(_) | Error::InvalidInput(_))
    }
}
