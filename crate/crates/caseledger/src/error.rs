//! Crate-wide error type.

use crate::digest::Digest;
use crate::tx::CaseId;
use thiserror::Error;

/// Errors surfaced by ledger, token, store, and benchmark operations.
#[derive(Debug, Error)]
pub enum Error {
    #[error("required field missing: {0}")]
    MissingField(&'static str),

    #[error("merkle root requires at least one leaf")]
    EmptyLeaves,

    #[error("unknown case: {0}")]
    UnknownCase(CaseId),

    #[error("case already exists: {0}")]
    CaseExists(CaseId),

    #[error("token already minted: {0}")]
    DuplicateToken(Digest),

    #[error("unknown parent token: {0}")]
    UnknownParent(Digest),

    #[error("derived token needs at least one parent")]
    EmptyParents,

    #[error("unknown token: {0}")]
    UnknownToken(Digest),

    #[error("key already registered: {0}")]
    AlreadyRegistered(Digest),

    #[error("malformed transaction: {0}")]
    MalformedTransaction(String),

    #[error("mempool is empty")]
    EmptyMempool,

    #[error("out-of-order block for case {case}: last stored {last}, got {got}")]
    OutOfOrderBlock { case: CaseId, last: u64, got: u64 },

    #[error("infeasible workload spec: {0}")]
    InfeasibleSpec(String),

    #[error("invalid policy file: {0}")]
    InvalidPolicy(String),

    #[error("chain validation failed at block {block}: {reason}")]
    ChainValidation { block: u64, reason: String },

    #[error("cannot open sealed payload: {0}")]
    Unsealable(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
