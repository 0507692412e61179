//! Circuit representation and exact statevector simulation.

mod circuit;
mod measure;
mod state;

pub use circuit::{build_circuit, qubit_limit, Circuit, GateKind, GateOp, MAX_QUBITS};
pub use measure::{measure_once, sample, Bitstring, CountsTable, ShotSampler};
pub use state::{evaluate_basis, simulate, simulate_from, StateVector};
