//! Transactions: the signed, timestamped envelopes every case action
//! travels in.
//!
//! A transaction's id is the SHA-256 of its canonical bytes, so two
//! structurally identical transactions always share an id and any field
//! change produces a new one. The canonical layout is:
//!
//! ```text
//! 0x02                                  domain tag
//! kind code (u8)                        Setup=0 .. Provenance=6
//! case      (0x00 | 0x01 ++ str)        absent only for Setup
//! sender fingerprint (32 bytes)
//! timestamp (u64 be, ms since epoch)
//! payload   (kind-specific, see below)
//! ```
//!
//! Payload layouts, in order:
//!
//! | kind            | fields                                             |
//! |-----------------|----------------------------------------------------|
//! | `Setup`         | user key bytes (len-prefixed), role code (u8)      |
//! | `InitialUpload` | stage code (u8), detail digest (32)                |
//! | `FileUpload`    | file id (str), content digest (32)                 |
//! | `Analysis`      | parent count (u32), parent token ids (32 each)     |
//! | `AccReq`        | resource (str), declared stage (str)               |
//! | `Stage`         | target stage code (u8)                             |
//! | `Provenance`    | —                                                  |
//!
//! Strings are u32-length-prefixed UTF-8; integers are big-endian.

use serde::{Deserialize, Serialize};

use crate::canonical::CanonicalWriter;
use crate::digest::{digest, tag, Digest};
use crate::error::Error;
use crate::keys::PublicKey;
use crate::rbac::{Role, Stage};

/// Case identifier. Non-empty, unique per case, immutable.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CaseId(pub String);

impl CaseId {
    pub fn new(value: impl Into<String>) -> Self {
        CaseId(value.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl std::fmt::Display for CaseId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for CaseId {
    fn from(s: &str) -> Self {
        CaseId(s.to_string())
    }
}

/// The seven transaction kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum TransactionKind {
    Setup,
    InitialUpload,
    FileUpload,
    Analysis,
    AccReq,
    Stage,
    Provenance,
}

impl TransactionKind {
    pub fn all() -> [TransactionKind; 7] {
        [
            TransactionKind::Setup,
            TransactionKind::InitialUpload,
            TransactionKind::FileUpload,
            TransactionKind::Analysis,
            TransactionKind::AccReq,
            TransactionKind::Stage,
            TransactionKind::Provenance,
        ]
    }

    pub fn code(self) -> u8 {
        match self {
            TransactionKind::Setup => 0,
            TransactionKind::InitialUpload => 1,
            TransactionKind::FileUpload => 2,
            TransactionKind::Analysis => 3,
            TransactionKind::AccReq => 4,
            TransactionKind::Stage => 5,
            TransactionKind::Provenance => 6,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            TransactionKind::Setup => "Setup",
            TransactionKind::InitialUpload => "InitialUpload",
            TransactionKind::FileUpload => "FileUpload",
            TransactionKind::Analysis => "Analysis",
            TransactionKind::AccReq => "AccReq",
            TransactionKind::Stage => "Stage",
            TransactionKind::Provenance => "Provenance",
        }
    }
}

impl std::fmt::Display for TransactionKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Kind-specific transaction content.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Payload {
    /// Register a user (sent by an admin key).
    Setup { user_key: PublicKey, role: Role },
    /// Create a case at a declared initial stage; `detail` is the digest of
    /// the case description data.
    InitialUpload { stage: Stage, detail: Digest },
    /// Upload one original file's identity.
    FileUpload { file_id: String, content: Digest },
    /// Record an analysis output derived from previously minted tokens.
    Analysis { parents: Vec<Digest> },
    /// Ask for access; carries the requested resource and the stage the
    /// sender believes the case is in.
    AccReq { resource: String, declared_stage: String },
    /// Move the case to another stage.
    Stage { target: Stage },
    /// Extract the case's full provenance record set.
    Provenance,
}

impl Payload {
    pub fn kind(&self) -> TransactionKind {
        match self {
            Payload::Setup { .. } => TransactionKind::Setup,
            Payload::InitialUpload { .. } => TransactionKind::InitialUpload,
            Payload::FileUpload { .. } => TransactionKind::FileUpload,
            Payload::Analysis { .. } => TransactionKind::Analysis,
            Payload::AccReq { .. } => TransactionKind::AccReq,
            Payload::Stage { .. } => TransactionKind::Stage,
            Payload::Provenance => TransactionKind::Provenance,
        }
    }
}

/// A case action: one kind-specific payload, tied to a case (except setup),
/// attributed to a sender key, at a millisecond timestamp.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transaction {
    pub id: Digest,
    pub case: Option<CaseId>,
    pub sender: PublicKey,
    pub timestamp_ms: u64,
    pub payload: Payload,
}

impl Transaction {
    /// Build a transaction, computing its id from the canonical bytes.
    ///
    /// Fails when the payload is incomplete for its kind or the case
    /// presence rule is violated (absent only for setup).
    pub fn new(
        case: Option<CaseId>,
        sender: PublicKey,
        timestamp_ms: u64,
        payload: Payload,
    ) -> Result<Self, Error> {
        match (&payload, &case) {
            (Payload::Setup { .. }, Some(_)) => {
                return Err(Error::MalformedTransaction("setup carries no case".into()))
            }
            (Payload::Setup { .. }, None) => {}
            (_, None) => return Err(Error::MissingField("case")),
            (_, Some(c)) if c.as_str().is_empty() => {
                return Err(Error::MalformedTransaction("case id must be non-empty".into()))
            }
            _ => {}
        }
        match &payload {
            Payload::Analysis { parents } if parents.is_empty() => {
                return Err(Error::MissingField("parents"))
            }
            Payload::FileUpload { file_id, .. } if file_id.is_empty() => {
                return Err(Error::MissingField("file_id"))
            }
            _ => {}
        }
        let mut tx = Transaction { id: Digest::ZERO, case, sender, timestamp_ms, payload };
        tx.id = digest(&tx.canonical_bytes());
        Ok(tx)
    }

    pub fn kind(&self) -> TransactionKind {
        self.payload.kind()
    }

    /// The stage the sender declared, when the payload carries one.
    pub fn declared_stage(&self) -> Option<&str> {
        match &self.payload {
            Payload::AccReq { declared_stage, .. } => Some(declared_stage),
            _ => None,
        }
    }

    /// Canonical bytes of everything except the id. See the module docs
    /// for the exact layout.
    pub fn canonical_bytes(&self) -> Vec<u8> {
        let mut w = CanonicalWriter::tagged(tag::TRANSACTION);
        w.put_u8(self.kind().code());
        w.put_opt_str(self.case.as_ref().map(|c| c.as_str()));
        w.put_digest(&self.sender.fingerprint());
        w.put_u64(self.timestamp_ms);
        match &self.payload {
            Payload::Setup { user_key, role } => {
                w.put_bytes(&user_key.bytes);
                w.put_u8(role.code());
            }
            Payload::InitialUpload { stage, detail } => {
                w.put_u8(stage.code());
                w.put_digest(detail);
            }
            Payload::FileUpload { file_id, content } => {
                w.put_str(file_id);
                w.put_digest(content);
            }
            Payload::Analysis { parents } => {
                w.put_u32(parents.len() as u32);
                for parent in parents {
                    w.put_digest(parent);
                }
            }
            Payload::AccReq { resource, declared_stage } => {
                w.put_str(resource);
                w.put_str(declared_stage);
            }
            Payload::Stage { target } => {
                w.put_u8(target.code());
            }
            Payload::Provenance => {}
        }
        w.into_bytes()
    }

    /// Re-check the structural rules and the id commitment. Used when a
    /// transaction arrives from outside (files, the mempool queue).
    pub fn validate(&self) -> Result<(), Error> {
        match (&self.payload, &self.case) {
            (Payload::Setup { .. }, Some(_)) => {
                return Err(Error::MalformedTransaction("setup carries no case".into()))
            }
            (Payload::Setup { .. }, None) => {}
            (_, None) => {
                return Err(Error::MalformedTransaction(format!(
                    "{} requires a case",
                    self.kind()
                )))
            }
            _ => {}
        }
        if let Payload::Analysis { parents } = &self.payload {
            if parents.is_empty() {
                return Err(Error::MalformedTransaction("analysis requires parents".into()));
            }
        }
        let expect = digest(&self.canonical_bytes());
        if expect != self.id {
            return Err(Error::MalformedTransaction(format!(
                "id mismatch: stored {}, computed {}",
                self.id, expect
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::keys::KeyPair;
    use rand::SeedableRng;
    use sha2::{Digest as _, Sha256};

    fn sender(seed: u64) -> PublicKey {
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(seed);
        KeyPair::generate(&mut rng).public
    }

    fn upload(ts: u64) -> Transaction {
        Transaction::new(
            Some(CaseId::from("case-7")),
            sender(1),
            ts,
            Payload::FileUpload { file_id: "disk-image".into(), content: digest(b"contents") },
        )
        .unwrap()
    }

    #[test]
    fn identical_transactions_share_bytes_and_id() {
        let a = upload(500);
        let b = upload(500);
        assert_eq!(a.canonical_bytes(), b.canonical_bytes());
        assert_eq!(a.id, b.id);
    }

    #[test]
    fn timestamp_changes_bytes() {
        let a = upload(500);
        let b = upload(501);
        assert_ne!(a.canonical_bytes(), b.canonical_bytes());
        assert_ne!(a.id, b.id);
    }

    #[test]
    fn setup_digest_matches_hand_built_layout() {
        // Oracle: assemble the documented byte layout by hand, without the
        // CanonicalWriter, and hash it independently.
        let admin = sender(2);
        let user = sender(3);
        let tx = Transaction::new(
            None,
            admin.clone(),
            1_234_567,
            Payload::Setup { user_key: user.clone(), role: Role::LegalCounsel },
        )
        .unwrap();

        let mut hand = Vec::new();
        hand.push(0x02u8); // transaction domain tag
        hand.push(0u8); // Setup kind code
        hand.push(0x00u8); // case absent
        hand.extend_from_slice(Sha256::digest(&admin.bytes).as_slice()); // sender fingerprint
        hand.extend_from_slice(&1_234_567u64.to_be_bytes());
        hand.extend_from_slice(&(user.bytes.len() as u32).to_be_bytes());
        hand.extend_from_slice(&user.bytes);
        hand.push(2u8); // LegalCounsel role code

        assert_eq!(tx.canonical_bytes(), hand);
        let expected: [u8; 32] = Sha256::digest(&hand).into();
        assert_eq!(tx.id, Digest(expected));
    }

    #[test]
    fn case_presence_rules() {
        let s = sender(4);
        // Setup must not carry a case.
        assert!(Transaction::new(
            Some(CaseId::from("c")),
            s.clone(),
            1,
            Payload::Setup { user_key: sender(5), role: Role::Investigator },
        )
        .is_err());
        // Uploads must carry one.
        let err = Transaction::new(
            None,
            s.clone(),
            1,
            Payload::FileUpload { file_id: "f".into(), content: Digest::ZERO },
        )
        .unwrap_err();
        assert!(matches!(err, Error::MissingField("case")));
    }

    #[test]
    fn analysis_requires_parents() {
        let err = Transaction::new(
            Some(CaseId::from("c")),
            sender(6),
            1,
            Payload::Analysis { parents: vec![] },
        )
        .unwrap_err();
        assert!(matches!(err, Error::MissingField("parents")));
    }

    #[test]
    fn validate_catches_id_tampering() {
        let mut tx = upload(9);
        tx.validate().unwrap();
        tx.timestamp_ms += 1;
        assert!(matches!(tx.validate(), Err(Error::MalformedTransaction(_))));
    }

    #[test]
    fn json_round_trip_preserves_id() {
        let tx = upload(10);
        let json = serde_json::to_string(&tx).unwrap();
        let back: Transaction = serde_json::from_str(&json).unwrap();
        assert_eq!(back, tx);
        back.validate().unwrap();
    }

    #[test]
    fn declared_stage_only_on_access_requests() {
        let tx = Transaction::new(
            Some(CaseId::from("c")),
            sender(7),
            1,
            Payload::AccReq { resource: "evidence".into(), declared_stage: "Analysis".into() },
        )
        .unwrap();
        assert_eq!(tx.declared_stage(), Some("Analysis"));
        assert_eq!(upload(1).declared_stage(), None);
    }
}
