use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("coefficient {field}: {reason}")]
    InvalidCoefficient { field: &'static str, reason: String },

    #[error("parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("{0}")]
    Domain(String),

    #[error("family mismatch: expected {expected}")]
    FamilyMismatch { expected: &'static str },

    #[error("no real solution: discriminant {discriminant:e} < 0 ({context})")]
    NoRealSolution { discriminant: f64, context: String },

    #[error("degenerate quadratic: {0}")]
    DegenerateQuadratic(String),

    #[error("inadmissible root: {0}")]
    InadmissibleRoot(String),

    #[error("singular linear system: {0}")]
    SingularLinearSystem(String),

    #[error("singular coupling ratio: {0}")]
    SingularCouplingRatio(String),

    #[error("Newton iteration failed on every branch (final residuals {residuals:?})")]
    NoConvergence { residuals: Vec<f64> },

    #[error("grid coverage: {0}")]
    GridCoverage(String),

    #[error("empty policy grid")]
    EmptyPolicyGrid,

    #[error("scenario {scenario}: {source}")]
    Scenario {
        scenario: String,
        #[source]
        source: Box<Error>,
    },

    #[error("quadrature node theta = {theta}: {source}")]
    Node {
        theta: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("non-finite state {0}")]
    NonFinite(f64),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("config: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn in_scenario(self, scenario: impl Into<String>) -> Self {
        Error::Scenario { scenario: scenario.into(), source: Box::new(self) }
    }

    /// True for errors caused by the input description rather than by the
    /// numerics.
    pub fn is_configuration(&self) -> bool {
        match self {
            Error::InvalidCoefficient { .. }
            | Error::InvalidParameter { .. }
            | Error::FamilyMismatch { .. }
            | Error::Config(_) => true,
            Error::Scenario { source, .. } | Error::Node { source, .. } => source.is_configuration(),
            _ => false,
        }
    }
}
