//! Circuit synthesis from AIGER safety specifications.
//!
//! The pipeline parses a SyntComp-style AIGER file into a [`SafetySpec`],
//! computes a CNF winning region with a QBF-based learning fixpoint, and then
//! extracts one Boolean function per controllable input. Two extraction
//! families are provided:
//!
//! * [`extract_qbf`]: CNF learning driven by incremental QBF queries.
//! * [`extract_interp`]: interpolation between "must be true" and "must be
//!   false" formulas, with interpolants computed by SAT-based learning.
//!
//! The learned functions are assembled into an AIGER implementation by
//! [`circuit`] and independently checked by [`verify`].

pub mod aiger;
pub mod bench;
pub mod circuit;
pub mod cnf;
pub mod deadline;
pub mod extract_interp;
pub mod extract_qbf;
pub mod game;
pub mod neglearn;
pub mod qbf;
pub mod sat;
pub mod synth;
pub mod verify;

pub use aiger::{Aig, SafetySpec};
pub use cnf::{Clause, Cnf, Cube, Lit, Var, VarPool};
pub use deadline::Deadline;
pub use game::WinningRegion;
pub use synth::{synthesize, synthesize_in_region, Method, NegWEncoding, SynthOptions, SynthReport};
pub use verify::Verdict;

use thiserror::Error;

/// Errors raised anywhere in the synthesis pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("malformed graph: {0}")]
    MalformedGraph(String),

    #[error("unsupported specification: {0}")]
    UnsupportedSpec(String),

    /// An oracle was called with a violated precondition.
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("inconsistent strategy: {0}")]
    InconsistentStrategy(String),

    /// The "must be true" and "must be false" formulas of an output overlap.
    #[error("strategy conflict: {0}")]
    StrategyConflict(String),

    #[error("cyclic output dependency involving variable {0}")]
    CyclicDependency(u32),

    #[error("interface mismatch: {0}")]
    InterfaceMismatch(String),

    #[error("external interpolator not configured")]
    InterpolatorNotConfigured,

    #[error("time limit exceeded")]
    Timeout,

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
