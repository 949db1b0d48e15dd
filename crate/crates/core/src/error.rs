use thiserror::Error;

use crate::proplang::PropertyError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("invalid joint action: {0}")]
    InvalidAction(String),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("state at round {0} is terminal and has no moves")]
    TerminalState(u32),
    #[error(
        "state space too large: projected {projected} states at round {round} exceeds the cap of {cap}"
    )]
    CapExceeded {
        projected: u64,
        round: u32,
        cap: u64,
    },
    #[error("model format error at line {line}: {msg}")]
    Format { line: usize, msg: String },
    #[error("model invariant violated at state {id}: {msg}")]
    Invariant { id: usize, msg: String },
    #[error(transparent)]
    Property(#[from] PropertyError),
    #[error("property does not match model: {0}")]
    Mismatch(String),
    #[error("{0}")]
    Unsupported(String),
    #[error("matrix game solver failed on a {rows}x{cols} game: {msg}")]
    Numerical {
        rows: usize,
        cols: usize,
        msg: String,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
