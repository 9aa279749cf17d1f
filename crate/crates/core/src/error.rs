use num_complex::Complex64;
use thiserror::Error;

use crate::initial_values::RowKind;

/// Errors raised by the solver pipeline.
///
/// Variants fall into two families: model/domain problems (bad parameters,
/// a violated net profit condition) and numerical failures (wrong root count,
/// singular systems, recurrence blow-up). [`Error::is_numerical`] tells them
/// apart; the CLI maps them to exit codes 2 and 3.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parameter out of domain: {0}")]
    ParameterDomain(String),

    #[error("invalid pmf: {0}")]
    InvalidPmf(String),

    #[error(
        "rebalance infeasible: P(X={l}) - {delta:.3e} < 0; {}",
        match .min_feasible_l {
            Some(l) => format!("smallest feasible l is {l}"),
            None => "no feasible l exists".to_string(),
        }
    )]
    InfeasibleRebalance {
        l: i64,
        delta: f64,
        min_feasible_l: Option<i64>,
    },

    #[error(
        "net profit condition violated: E(X - c*theta) = {drift} >= 0, so phi(u) = 0 for every u; \
         the solver requires that the net profit condition holds"
    )]
    NetProfit { drift: f64 },

    #[error("degenerate model: {0}")]
    ModelDegenerate(String),

    #[error("generating function is singular at s = 0 for a pmf with negative offset")]
    Singularity,

    #[error("expected {expected} unit-disk roots, found {found}; all roots (value, modulus): {all:?}")]
    RootCount {
        expected: usize,
        found: usize,
        all: Vec<(Complex64, f64)>,
    },

    #[error("root quality check failed: {0}")]
    RootQuality(String),

    #[error("initial-value system is singular (pivot {pivot:.3e} in column {column}); rows: {row_kinds:?}")]
    SystemSingular {
        column: usize,
        pivot: f64,
        row_kinds: Vec<RowKind>,
    },

    #[error("closed form not applicable: {0}")]
    NotApplicable(String),

    #[error("non-real initial value: pi_{index} has imaginary part {imag:.3e}")]
    NonReal { index: usize, imag: f64 },

    #[error("numerical blow-up at u = {u}: phi = {value} ({reason})")]
    NumericalBlowup { u: usize, value: f64, reason: String },

    #[error("malformed model: {0}")]
    MalformedModel(String),

    #[error("resource limit: {0}")]
    Resource(String),
}

impl Error {
    /// True for failures of the numerical pipeline rather than of the input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::RootCount { .. }
                | Error::RootQuality(_)
                | Error::SystemSingular { .. }
                | Error::NonReal { .. }
                | Error::NumericalBlowup { .. }
                | Error::Resource(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
