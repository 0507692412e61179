use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("circuit needs {requested} qubits but the simulator limit is {limit}")]
    CapacityExceeded { requested: usize, limit: usize },

    #[error("circuit must have at least one qubit")]
    EmptyCircuit,

    #[error("qubit index {index} out of range for a {num_qubits}-qubit circuit")]
    QubitOutOfRange { index: usize, num_qubits: usize },

    #[error("gate repeats qubit {0} (controls and target must be distinct)")]
    DuplicateQubit(usize),

    #[error("{kind} gate takes {expected} controls, got {got}")]
    ControlArity {
        kind: &'static str,
        expected: &'static str,
        got: usize,
    },

    #[error("shot count must be positive")]
    ZeroShots,

    #[error("data array length {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("value {value} at index {index} does not fit in {width} bits")]
    ValueTooWide { index: usize, value: u64, width: usize },

    #[error("bit array entry {index} is {value}, expected 0 or 1")]
    NotABit { index: usize, value: u64 },

    #[error("counter with {controls} controls needs at least {needed} counter qubits, got {got}")]
    CounterTooNarrow { controls: usize, needed: usize, got: usize },

    #[error("expected a bitstring of length {expected}, got {got:?}")]
    BitstringLength { expected: usize, got: String },

    #[error("invalid bitstring {0:?}: only '0' and '1' are allowed")]
    InvalidBitstring(String),

    #[error("circuit contains a Hadamard gate at position {0}; basis-state evaluation needs a permutation circuit")]
    NotClassical(usize),

    #[error("at least 2 replications are required, got {0}")]
    TooFewReplications(usize),

    #[error("parallel replication circuit needs {requested} qubits (limit {limit}); use sequential mode")]
    ParallelTooLarge { requested: usize, limit: usize },

    #[error("{0}")]
    Unsupported(String),

    #[error("sample size {n} must be between 1 and the population size {population}")]
    SampleSize { n: usize, population: usize },

    #[error("alpha must lie in (0, 0.5), got {0}")]
    AlphaOutOfRange(f64),

    #[error("AVG is undefined: no sampled row satisfies the predicate")]
    NoMatchingRows,

    #[error("unknown column {0:?}")]
    UnknownColumn(String),

    #[error("type mismatch: {0}")]
    TypeMismatch(String),

    #[error("line {line}: {message}")]
    MalformedRow { line: usize, message: String },

    #[error("table has no rows")]
    EmptyTable,

    #[error("invalid query: {0}")]
    InvalidQuery(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}
