//! Crate-wide error type.
//!
//! One flat enum; callers that need to branch match on the variant, everyone
//! else formats it. Messages carry enough context to be actionable without a
//! backtrace.

use std::fmt;

/// Convenience alias used across the crate.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Action requested at a state with every node visited.
    TerminalState,
    /// Action outside the feasible set for the current state.
    InfeasibleAction { node: usize },
    /// Tour fails validation (wrong length, repeats, bad indices).
    InvalidTour(String),
    /// Exact solver refused the instance.
    InstanceTooLarge { nodes: usize, limit: usize },
    /// Optimality gap needs a positive reference cost.
    NonPositiveReference(f64),
    /// Instance construction or parse-level validation failed.
    InvalidInstance(String),
    /// Distribution, schedule, or config parameters out of range.
    InvalidParams(String),
    /// Epoch index outside the schedule horizon.
    EpochOutOfRange { epoch: u32, total: u32 },
    /// Horizon not divisible into the requested segment count.
    IndivisibleEpochs { total: u32, segments: u32 },
    /// Sampling or reading from a buffer with no entries.
    EmptyBuffer,
    /// Buffer entry arrived with the wrong number of experiences.
    WrongEntrySize { expected: usize, actual: usize },
    /// Paired sequences disagree in length.
    LengthMismatch { expected: usize, actual: usize },
    /// A gradient or loss stopped being finite.
    DivergedGradient,
    /// Stored trajectory cannot be replayed on the instance it claims.
    ReplayMismatch(String),
    /// Ledger cell written twice.
    DuplicateCell { epoch: u32, task: usize },
    /// Ledger cell indices outside the grid.
    CellOutOfRange { epoch: u32, task: usize },
    /// Metrics requested from a ledger with missing cells.
    IncompleteLedger { epoch: u32, task: usize },
    /// Recorded a non-finite gap value.
    NonFiniteValue(f64),
    /// Checkpoint file malformed or incompatible.
    Checkpoint(String),
    /// More rollout starts requested than the instance has nodes.
    TooManyStarts { requested: usize, nodes: usize },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::TerminalState => write!(f, "no actions at terminal state"),
            Error::InfeasibleAction { node } => write!(f, "infeasible action: node {node}"),
            Error::InvalidTour(why) => write!(f, "invalid tour: {why}"),
            Error::InstanceTooLarge { nodes, limit } => {
                write!(f, "instance too large for exact oracle: {nodes} nodes (limit {limit})")
            }
            Error::NonPositiveReference(r) => {
                write!(f, "reference cost must be positive, got {r}")
            }
            Error::InvalidInstance(why) => write!(f, "invalid instance: {why}"),
            Error::InvalidParams(why) => write!(f, "invalid parameters: {why}"),
            Error::EpochOutOfRange { epoch, total } => {
                write!(f, "epoch {epoch} outside horizon 0..={total}")
            }
            Error::IndivisibleEpochs { total, segments } => {
                write!(f, "epoch count not divisible: {total} epochs over {segments} segments")
            }
            Error::EmptyBuffer => write!(f, "buffer empty"),
            Error::WrongEntrySize { expected, actual } => {
                write!(f, "buffer entry holds {actual} experiences, expected {expected}")
            }
            Error::LengthMismatch { expected, actual } => {
                write!(f, "length mismatch: expected {expected}, got {actual}")
            }
            Error::DivergedGradient => write!(f, "diverged gradient"),
            Error::ReplayMismatch(why) => {
                write!(f, "buffered trajectory incompatible with instance: {why}")
            }
            Error::DuplicateCell { epoch, task } => {
                write!(f, "ledger cell (epoch {epoch}, task {task}) already recorded")
            }
            Error::CellOutOfRange { epoch, task } => {
                write!(f, "ledger cell (epoch {epoch}, task {task}) out of range")
            }
            Error::IncompleteLedger { epoch, task } => {
                write!(f, "ledger incomplete: missing cell (epoch {epoch}, task {task})")
            }
            Error::NonFiniteValue(v) => write!(f, "non-finite value: {v}"),
            Error::Checkpoint(why) => write!(f, "checkpoint error: {why}"),
            Error::TooManyStarts { requested, nodes } => {
                write!(f, "{requested} starts requested on a {nodes}-node instance")
            }
        }
    }
}

impl std::error::Error for Error {}
