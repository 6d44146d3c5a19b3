use thiserror::Error;

/// Errors raised by the analytic evaluators, the samplers and the numerical kernels.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A scenario parameter violates its documented range.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// A special function was evaluated outside the branch this crate supports.
    #[error("domain error: {0}")]
    Domain(String),

    /// The SIC decoding order requires the weak user's gain not to exceed the strong user's.
    #[error("channel ordering violated: weak gain {weak} exceeds strong gain {strong}")]
    Ordering { weak: f64, strong: f64 },

    /// Adaptive quadrature ran out of subdivisions before meeting its tolerance.
    #[error(
        "quadrature did not converge after {evaluations} evaluations \
         (best estimate {estimate:e}, error bound {error_bound:e})"
    )]
    QuadratureBudget {
        estimate: f64,
        error_bound: f64,
        evaluations: usize,
    },

    /// The integrand returned NaN or an infinity.
    #[error("integrand is not finite at x = {abscissa:e}")]
    NonFiniteIntegrand { abscissa: f64 },

    /// A failure inside a named term of a composite formula.
    #[error("{term}: {source}")]
    Term {
        term: &'static str,
        #[source]
        source: Box<Error>,
    },

    /// A probability computed from an exact formula left its round-off guard band.
    #[error("{what} evaluated to {value:e}, outside [0, 1] beyond round-off")]
    OutOfRange { what: &'static str, value: f64 },

    /// A diversity fit input point was rejected.
    #[error("point {index} rejected: {reason}")]
    FitPoint { index: usize, reason: String },
}

impl Error {
    pub(crate) fn in_term(self, term: &'static str) -> Self {
        Error::Term {
            term,
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn config_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Config(msg.into()))
}
