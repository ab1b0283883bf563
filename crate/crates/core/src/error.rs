use num_bigint::BigInt;
use thiserror::Error;

use crate::padic::Valuation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{0} is not a prime")]
    NotPrime(BigInt),

    #[error("{0} requires an odd prime")]
    EvenPrime(&'static str),

    #[error("{0} must be non-zero")]
    ZeroArgument(&'static str),

    #[error("{0} must be non-negative")]
    NegativeArgument(&'static str),

    #[error("malformed rational `{0}`")]
    MalformedRational(String),

    #[error("malformed valuation `{0}` (expected `inf` or a prime)")]
    MalformedValuation(String),

    #[error("singular matrix in {0}")]
    Singular(&'static str),

    #[error("dimension mismatch in {0}")]
    Dimension(&'static str),

    #[error("singular boundary: Δ(t'', t') = 0")]
    SingularBoundary,

    #[error("series truncation guard failed at t = {t} for v = {valuation} (guard precision {precision})")]
    Convergence {
        valuation: Valuation,
        t: String,
        precision: i64,
    },

    #[error("series has a pole where a regular value was required")]
    Pole,

    #[error("oracle budget exceeded: {needed} terms requested, budget {budget}")]
    BudgetExceeded { needed: u128, budget: u64 },

    #[error("modulus p^{exponent} too large for the residue-sum engine")]
    ModulusTooLarge { exponent: i64 },

    #[error("unsupported dimension n = {0} for {1}")]
    UnsupportedDimension(usize, &'static str),

    #[error("invalid Lagrangian: {0}")]
    InvalidLagrangian(String),

    #[error("inconsistent interpolation of the classical action: {0}")]
    InconsistentInterpolation(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("at valuation {valuation}: {source}")]
    AtValuation {
        valuation: Valuation,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Short machine-readable name of the violated precondition.
    pub fn precondition(&self) -> &'static str {
        match self {
            Error::NotPrime(_) => "prime",
            Error::EvenPrime(_) => "odd_prime",
            Error::ZeroArgument(_) => "nonzero_argument",
            Error::NegativeArgument(_) => "nonnegative_argument",
            Error::MalformedRational(_) => "rational_syntax",
            Error::MalformedValuation(_) => "valuation_syntax",
            Error::Singular(_) => "nonsingular_matrix",
            Error::Dimension(_) => "dimensions",
            Error::SingularBoundary => "nonsingular_delta",
            Error::Convergence { .. } => "series_convergence",
            Error::Pole => "regular_series",
            Error::BudgetExceeded { .. } => "oracle_budget",
            Error::ModulusTooLarge { .. } => "oracle_modulus",
            Error::UnsupportedDimension(..) => "dimension",
            Error::InvalidLagrangian(_) => "lagrangian",
            Error::InconsistentInterpolation(_) => "action_interpolation",
            Error::Invalid(_) => "input",
            Error::AtValuation { source, .. } => source.precondition(),
        }
    }

    /// The valuation an error was raised at, if it was tagged with one.
    pub fn valuation(&self) -> Option<&Valuation> {
        match self {
            Error::AtValuation { valuation, .. } => Some(valuation),
            _ => None,
        }
    }

    pub(crate) fn at(self, valuation: &Valuation) -> Error {
        match self {
            e @ Error::AtValuation { .. } => e,
            e => Error::AtValuation {
                valuation: valuation.clone(),
                source: Box::new(e),
            },
        }
    }
}
