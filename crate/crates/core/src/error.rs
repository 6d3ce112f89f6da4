use thiserror::Error;

/// Errors produced by the stabilizer routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected} qubits, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("qubit index {qubit} out of range for {n} qubits")]
    QubitOutOfRange { qubit: usize, n: usize },

    #[error("qubit {0} listed more than once")]
    DuplicateQubit(usize),

    #[error("operator is not Hermitian with a real sign")]
    NonHermitian,

    #[error("generators {0} and {1} anticommute")]
    NotCommuting(usize, usize),

    #[error("generator {0} is dependent on the preceding generators")]
    Dependent(usize),

    #[error("generators produce -I; the group stabilizes no state")]
    Contradiction,

    #[error("group has rank {rank} but {n} qubits; a maximal group is required")]
    NotMaximal { rank: usize, n: usize },

    #[error("qubit count must be at least 1")]
    ZeroQubits,

    #[error("operator set has dependent elements")]
    RankDeficient,

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("invalid measurement plan: {0}")]
    InvalidPlan(String),

    #[error("invalid mixture: {0}")]
    InvalidMixture(String),

    #[error("completion reached e_ab = {achieved}, expected {expected}")]
    CompletionNotAchieved { achieved: usize, expected: usize },

    #[error("{what} supports at most {max} qubits, got {n}")]
    OracleLimit {
        what: &'static str,
        n: usize,
        max: usize,
    },

    #[error("state is not normalized (norm {0})")]
    NotNormalized(f64),

    #[error("internal invariant violated: {0}")]
    InvariantViolated(String),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
