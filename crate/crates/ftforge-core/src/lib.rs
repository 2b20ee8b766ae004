//! Core algebra for fault-tolerant logical state preparation.
//!
//! This crate is `no_std` (with `alloc`) and contains everything that does
//! not need files, threads, or a CLI: Pauli operators with exact phase
//! tracking, stabilizer tableaus and their canonical form, Clifford gate
//! conjugation, circuit representation, built-in QEC codes, propagated
//! fault-set bookkeeping, and the reward environments used for circuit
//! discovery.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod circuit;
pub mod codes;
pub mod env;
pub mod faults;
pub mod gate;
pub mod pauli;
pub mod tableau;

pub use circuit::{ActionTable, Circuit, ConnectivityGraph};
pub use codes::{StabilizerCode, StateLabel};
pub use env::{Environment, RewardWeights, TaskKind, TaskSpec};
pub use faults::{FaultClass, FaultSet, VerifyReport};
pub use gate::{Gate, GateKind};
pub use pauli::Pauli;
pub use tableau::{CanonicalTableau, StabilizerTableau};

use alloc::string::String;

/// Errors raised by tableau/circuit/code construction and parsing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// Qubit index out of range, or more than 64 qubits requested.
    QubitOutOfRange { qubit: usize, n: usize },
    /// Two operators that must commute do not.
    NonCommuting { row_a: usize, row_b: usize },
    /// Generator set is linearly dependent over GF(2).
    RankDeficient { rank: usize, rows: usize },
    /// An operator carried an imaginary phase where a Hermitian sign was required.
    ImaginaryPhase,
    /// Text parse failure (circuits, tableaus, code definitions).
    Parse { line: usize, msg: String },
    /// A logical operator override failed its commutation checks.
    BadLogical { msg: String },
    /// Mismatched dimensions between two objects that must agree.
    DimensionMismatch { expected: usize, got: usize },
    /// Invalid task configuration (e.g. fixed preparation does not reach target).
    BadTask { msg: String },
}

impl core::fmt::Display for Error {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Error::QubitOutOfRange { qubit, n } => {
                write!(f, "qubit {qubit} out of range for {n} qubits (max 64)")
            }
            Error::NonCommuting { row_a, row_b } => {
                write!(f, "rows {row_a} and {row_b} anticommute")
            }
            Error::RankDeficient { rank, rows } => {
                write!(f, "generators have rank {rank} but {rows} rows were given")
            }
            Error::ImaginaryPhase => write!(f, "operator has imaginary phase"),
            Error::Parse { line, msg } => write!(f, "parse error on line {line}: {msg}"),
            Error::BadLogical { msg } => write!(f, "bad logical operator: {msg}"),
            Error::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            Error::BadTask { msg } => write!(f, "bad task: {msg}"),
        }
    }
}

pub type Result<T> = core::result::Result<T, Error>;
