use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// A feeder description that parsed but violates a model invariant.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ValidationError {
    #[error("feeder has no buses")]
    NoBuses,
    #[error("duplicate bus id `{0}`")]
    DuplicateBus(String),
    #[error("{what} references unknown bus `{bus}`")]
    UnknownBus { what: String, bus: String },
    #[error("bus `{bus}` has base {found} kV but the slack bus base is {expected} kV; off-nominal transformers are not modelled")]
    MixedBaseVoltage { bus: String, expected: f64, found: f64 },
    #[error("branch {index} connects bus `{bus}` to itself")]
    SelfLoop { index: usize, bus: String },
    #[error("branch {index} {matrix} matrix is not symmetric")]
    AsymmetricMatrix { index: usize, matrix: &'static str },
    #[error("bus `{0}` is not reachable from the slack bus")]
    Disconnected(String),
    #[error("load ids must be exactly 0..{n_loads} in file order; found id {found} at position {position}")]
    LoadIdsNotCanonical { n_loads: usize, position: usize, found: usize },
    #[error("load {load} is a second load on bus `{bus}` phase {phase}")]
    DuplicateLoadNode { load: usize, bus: String, phase: char },
    #[error("load {load} is connected to the slack bus")]
    LoadOnSlack { load: usize },
    #[error("load {load} has power factor {pf} outside (0, 1]")]
    PowerFactor { load: usize, pf: f64 },
    #[error("non-finite or non-positive value for `{0}`")]
    BadScalar(&'static str),
    #[error("v_plus {v_plus} pu does not exceed the largest slack phase magnitude {slack_max} pu")]
    VPlusTooLow { v_plus: f64, slack_max: f64 },
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read `{path}`: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at line {line}, column {column} (field `{field}`): {message}")]
    Parse {
        line: usize,
        column: usize,
        field: String,
        message: String,
    },
    #[error("invalid feeder: {0}")]
    Validation(#[from] ValidationError),
    #[error("branch {index} has a singular impedance matrix")]
    SingularBranch { index: usize },
    #[error("load-node admittance block is singular; the network is disconnected or floating")]
    SingularAdmittance,
    #[error("dimension mismatch for {what}: expected {expected}, got {found}")]
    Dimension {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("load flow did not converge in {iterations} iterations (residual {residual:.3e} pu)")]
    NonConvergence { iterations: usize, residual: f64 },
    #[error("voltage collapse: node {node} at {magnitude:.4} pu is below the {floor} pu floor")]
    VoltageCollapse {
        node: usize,
        magnitude: f64,
        floor: f64,
    },
    #[error("linearization point has a zero voltage at load node {node}")]
    ZeroBaseVoltage { node: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("no voltage headroom: load {load} sits at {v_bar:.6} pu with v_plus {v_plus} pu")]
    NoHeadroom { load: usize, v_bar: f64, v_plus: f64 },
    #[error("every scenario is unbounded; no voltage constraint ever binds")]
    AllUnbounded,
    #[error("bisection bracket is invalid: eps_hat({p0}) = {eps0}, eps_hat({p1}) = {eps1}, target {epsilon}")]
    InvalidBracket {
        p0: f64,
        p1: f64,
        eps0: f64,
        eps1: f64,
        epsilon: f64,
    },
    #[error("bisection stopped after {iterations} evaluations without meeting the tolerance (last error {error:.4e})")]
    BisectionNotConverged { iterations: usize, error: f64 },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable machine-readable identifier, used by the CLI and the C ABI.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Io { .. } => "io",
            Error::Parse { .. } => "parse",
            Error::Validation(_) => "validation",
            Error::SingularBranch { .. } => "singular_branch",
            Error::SingularAdmittance => "singular_admittance",
            Error::Dimension { .. } => "dimension",
            Error::NonConvergence { .. } => "non_convergence",
            Error::VoltageCollapse { .. } => "voltage_collapse",
            Error::ZeroBaseVoltage { .. } => "zero_base_voltage",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::NoHeadroom { .. } => "no_headroom",
            Error::AllUnbounded => "all_unbounded",
            Error::InvalidBracket { .. } => "invalid_bracket",
            Error::BisectionNotConverged { .. } => "bisection_not_converged",
            Error::Csv(_) => "csv",
            Error::Json(_) => "json",
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
