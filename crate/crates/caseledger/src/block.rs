//! Blocks: ordered transaction batches under a tamper-evident header.
//!
//! Each header carries the previous header's digest, a Merkle root over the
//! body's transaction ids (`body_root`), and a per-case root map
//! (`case_roots`) holding the chained case commitment for every case the
//! block touches.
//!
//! The linkage digest — what the next block's `prev_hash` commits to —
//! covers `(index, prev_hash, timestamp, body_root)`:
//!
//! ```text
//! link(header) = sha256(0x05 || index || prev_hash || timestamp || body_root)
//! ```
//!
//! `case_roots` stays outside the linkage bytes: the entries are themselves
//! recomputable commitments over the body (chain validation recomputes and
//! checks them), and keeping them out lets a chain sealed with case roots
//! disabled stay block-for-block comparable with one sealed with them on.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::canonical::CanonicalWriter;
use crate::contracts::ProvenanceRecord;
use crate::digest::{digest, tag, Digest};
use crate::error::Error;
use crate::merkle::merkle_root;
use crate::tx::{CaseId, Transaction};

/// Header of one block. Field order here is the persisted JSON order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockHeader {
    pub index: u64,
    pub prev_hash: Digest,
    pub timestamp_ms: u64,
    /// Chained per-case commitment for every case appearing in the body.
    pub case_roots: BTreeMap<CaseId, Digest>,
    /// Merkle root over the body's transaction ids, in body order.
    pub body_root: Digest,
}

impl BlockHeader {
    /// Digest the next block's `prev_hash` commits to.
    pub fn link_digest(&self) -> Digest {
        let mut w = CanonicalWriter::tagged(tag::BLOCK_HEADER);
        w.put_u64(self.index);
        w.put_digest(&self.prev_hash);
        w.put_u64(self.timestamp_ms);
        w.put_digest(&self.body_root);
        digest(w.as_slice())
    }
}

/// One sealed block: header, transactions, and the provenance records their
/// execution emitted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    pub header: BlockHeader,
    pub transactions: Vec<Transaction>,
    pub records: Vec<ProvenanceRecord>,
}

impl Block {
    /// Merkle root over the body's transaction ids; the zero digest for an
    /// empty body (genesis is the only empty block).
    pub fn compute_body_root(transactions: &[Transaction]) -> Result<Digest, Error> {
        if transactions.is_empty() {
            return Ok(Digest::ZERO);
        }
        let ids: Vec<Digest> = transactions.iter().map(|t| t.id).collect();
        merkle_root(&ids)
    }

    /// The genesis block: index 0, all-zero `prev_hash`, empty body.
    pub fn genesis(timestamp_ms: u64) -> Block {
        Block {
            header: BlockHeader {
                index: 0,
                prev_hash: Digest::ZERO,
                timestamp_ms,
                case_roots: BTreeMap::new(),
                body_root: Digest::ZERO,
            },
            transactions: Vec::new(),
            records: Vec::new(),
        }
    }

    /// Distinct cases in body order of first appearance, each with the ids
    /// of its transactions in body order.
    pub fn case_transaction_ids(&self) -> Vec<(CaseId, Vec<Digest>)> {
        let mut order: Vec<CaseId> = Vec::new();
        let mut by_case: BTreeMap<CaseId, Vec<Digest>> = BTreeMap::new();
        for tx in &self.transactions {
            if let Some(case) = &tx.case {
                if !by_case.contains_key(case) {
                    order.push(case.clone());
                }
                by_case.entry(case.clone()).or_default().push(tx.id);
            }
        }
        order
            .into_iter()
            .map(|case| {
                let ids = by_case.remove(&case).expect("case collected above");
                (case, ids)
            })
            .collect()
    }
}

/// One chaining step of the per-case root:
/// `sha256(0x04 || previous case root || case tx-set merkle root)`.
///
/// `prev` is the all-zero digest for the case's first block.
pub fn chain_case_root(prev: &Digest, case_block_root: &Digest) -> Digest {
    crate::digest::digest_parts(tag::CASE_ROOT, &[prev.as_bytes(), case_block_root.as_bytes()])
}
