use thiserror::Error;

/// Coarse failure classes. The CLI maps each class to one exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Usage,
    Budget,
    Data,
    NonConvergence,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("divergent integral: {0}")]
    DivergentIntegral(String),
    #[error("pole of the occupancy density at x + kappa = {0}")]
    PoleAtZero(f64),
    #[error("no convergence: {0}")]
    NoConvergence(String),
    #[error("infeasible problem: {0}")]
    InfeasibleProblem(String),
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("out of range: {0}")]
    OutOfRange(String),
    #[error("hypothesis unmet: {0}")]
    HypothesisUnmet(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("non-positive value at row {row}: {field} = {value}")]
    NonPositiveValue { row: usize, field: &'static str, value: f64 },
    #[error("empty series")]
    EmptySeries,
    #[error("window out of range: {0}")]
    WindowOutOfRange(String),
    #[error("window is not linear: relative rms residual {residual:.3e} exceeds {tolerance:.3e}")]
    NonlinearWindow { residual: f64, tolerance: f64 },
    #[error("cannot classify divergence of the lambda integrals: {0}")]
    DivergenceUndetermined(String),
    #[error("degenerate series: {0}")]
    DegenerateSeries(String),
    #[error("zero spectral energy")]
    ZeroEnergy,
    #[error("ill-conditioned fit: {0}")]
    IllConditionedFit(String),
    #[error("unsupported alpha {0}: need 0 < alpha < 2")]
    UnsupportedAlpha(f64),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("malformed input at row {row}: {message}")]
    MalformedInput { row: usize, message: String },
    #[error("i/o error: {0}")]
    Io(String),
    #[error("cache file: {0}")]
    CacheFormat(String),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        use Error::*;
        match self {
            InvalidArgument(_) | UnsupportedAlpha(_) | DivergentIntegral(_) | InfeasibleProblem(_)
            | OutOfRange(_) | HypothesisUnmet(_) | PoleAtZero(_) | WindowOutOfRange(_) => {
                ErrorKind::Usage
            }
            BudgetExceeded(_) => ErrorKind::Budget,
            NoConvergence(_) => ErrorKind::NonConvergence,
            InsufficientData(_) | NonPositiveValue { .. } | EmptySeries | NonlinearWindow { .. }
            | DivergenceUndetermined(_) | DegenerateSeries(_) | ZeroEnergy | IllConditionedFit(_)
            | MalformedInput { .. } | Io(_) | CacheFormat(_) => ErrorKind::Data,
        }
    }

    /// Stable snake-case tag used in machine-readable error reports.
    pub fn code(&self) -> &'static str {
        use Error::*;
        match self {
            DivergentIntegral(_) => "divergent_integral",
            PoleAtZero(_) => "pole_at_zero",
            NoConvergence(_) => "no_convergence",
            InfeasibleProblem(_) => "infeasible_problem",
            BudgetExceeded(_) => "budget_exceeded",
            OutOfRange(_) => "out_of_range",
            HypothesisUnmet(_) => "hypothesis_unmet",
            InsufficientData(_) => "insufficient_data",
            NonPositiveValue { .. } => "non_positive_value",
            EmptySeries => "empty_series",
            WindowOutOfRange(_) => "window_out_of_range",
            NonlinearWindow { .. } => "nonlinear_window",
            DivergenceUndetermined(_) => "divergence_undetermined",
            DegenerateSeries(_) => "degenerate_series",
            ZeroEnergy => "zero_energy",
            IllConditionedFit(_) => "ill_conditioned_fit",
            UnsupportedAlpha(_) => "unsupported_alpha",
            InvalidArgument(_) => "invalid_argument",
            MalformedInput { .. } => "malformed_input",
            Io(_) => "io",
            CacheFormat(_) => "cache_format",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
