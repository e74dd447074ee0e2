use thiserror::Error;

use crate::blocks::BlockKind;
use crate::netlist::BuildError;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SynthError {
    #[error(transparent)]
    Build(#[from] BuildError),
    /// A block was fed inputs that do not match its contract.
    #[error("{kind}: {message}")]
    Block { kind: BlockKind, message: String },
    #[error("unsupported width {bits} for {method}: {reason}")]
    UnsupportedWidth {
        method: &'static str,
        bits: usize,
        reason: String,
    },
    #[error("{0}")]
    Domain(String),
    /// A construction disagreed with its closed-form profile, census or count.
    #[error("invariant violated: {0}")]
    Invariant(String),
}

impl SynthError {
    pub fn is_invariant(&self) -> bool {
        matches!(self, SynthError::Invariant(_))
    }
}

pub(crate) fn invariant(msg: impl Into<String>) -> SynthError {
    SynthError::Invariant(msg.into())
}
