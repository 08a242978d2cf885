//! Role-based access control with staged authorization.
//!
//! Permissions depend jointly on a user's role and the case's current
//! investigation stage. The decision procedure ([`retrieve_access_info`])
//! has exactly four outcomes and is a pure function of its inputs:
//!
//! 1. the declared stage is not a valid stage name, or differs from the
//!    case's actual stage → [`AccessDecision::InvalidStage`];
//! 2. the sender's key is not registered → [`AccessDecision::AccessDenied`];
//! 3. the policy grants the (stage, role) pair nothing →
//!    [`AccessDecision::NoAccessRights`];
//! 4. otherwise the granted rights set is returned.
//!
//! The full stage×role matrix ships as a default policy
//! ([`PolicyMatrix::default_policy`]). It is a documented default, loadable
//! and overridable from a JSON policy file; the one hard constraint it
//! always satisfies is that at `AffidavitWarrant` only law enforcement and
//! digital forensics examiners can read evidence.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::digest::Digest;
use crate::error::Error;
use crate::keys::PublicKey;
use crate::tx::Transaction;

/// Investigation participant roles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Role {
    DigitalForensicsExaminer,
    Investigator,
    LegalCounsel,
    LawEnforcement,
}

impl Role {
    pub fn all() -> [Role; 4] {
        [
            Role::DigitalForensicsExaminer,
            Role::Investigator,
            Role::LegalCounsel,
            Role::LawEnforcement,
        ]
    }

    /// Stable one-byte code used in canonical transaction bytes.
    pub fn code(self) -> u8 {
        match self {
            Role::DigitalForensicsExaminer => 0,
            Role::Investigator => 1,
            Role::LegalCounsel => 2,
            Role::LawEnforcement => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Role::DigitalForensicsExaminer => "DigitalForensicsExaminer",
            Role::Investigator => "Investigator",
            Role::LegalCounsel => "LegalCounsel",
            Role::LawEnforcement => "LawEnforcement",
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Role {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let folded = s.replace(['-', '_'], "").to_ascii_lowercase();
        Role::all()
            .into_iter()
            .find(|r| r.name().to_ascii_lowercase() == folded)
            .ok_or_else(|| format!("unknown role: {s:?}"))
    }
}

/// Investigation stages, in their natural order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Stage {
    AffidavitWarrant,
    Investigation,
    Analysis,
    PresentedInCourt,
    JudgementDay,
    CaseClosed,
    PotentialAppeal,
}

impl Stage {
    pub fn all() -> [Stage; 7] {
        [
            Stage::AffidavitWarrant,
            Stage::Investigation,
            Stage::Analysis,
            Stage::PresentedInCourt,
            Stage::JudgementDay,
            Stage::CaseClosed,
            Stage::PotentialAppeal,
        ]
    }

    /// Stable one-byte code used in canonical transaction bytes.
    pub fn code(self) -> u8 {
        match self {
            Stage::AffidavitWarrant => 0,
            Stage::Investigation => 1,
            Stage::Analysis => 2,
            Stage::PresentedInCourt => 3,
            Stage::JudgementDay => 4,
            Stage::CaseClosed => 5,
            Stage::PotentialAppeal => 6,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Stage::AffidavitWarrant => "AffidavitWarrant",
            Stage::Investigation => "Investigation",
            Stage::Analysis => "Analysis",
            Stage::PresentedInCourt => "PresentedInCourt",
            Stage::JudgementDay => "JudgementDay",
            Stage::CaseClosed => "CaseClosed",
            Stage::PotentialAppeal => "PotentialAppeal",
        }
    }

    /// Position in the stage ordering, 0-based.
    pub fn index(self) -> usize {
        self.code() as usize
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Stage {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let folded = s.replace(['-', '_', ' '], "").to_ascii_lowercase();
        Stage::all()
            .into_iter()
            .find(|st| st.name().to_ascii_lowercase() == folded)
            .ok_or_else(|| format!("unknown stage: {s:?}"))
    }
}

/// Actions a policy can grant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Right {
    ReadEvidence,
    UploadFile,
    UploadAnalysis,
    RequestAccess,
    ChangeStage,
    ExtractProvenance,
}

impl Right {
    pub fn all() -> [Right; 6] {
        [
            Right::ReadEvidence,
            Right::UploadFile,
            Right::UploadAnalysis,
            Right::RequestAccess,
            Right::ChangeStage,
            Right::ExtractProvenance,
        ]
    }

    pub fn name(self) -> &'static str {
        match self {
            Right::ReadEvidence => "ReadEvidence",
            Right::UploadFile => "UploadFile",
            Right::UploadAnalysis => "UploadAnalysis",
            Right::RequestAccess => "RequestAccess",
            Right::ChangeStage => "ChangeStage",
            Right::ExtractProvenance => "ExtractProvenance",
        }
    }
}

impl fmt::Display for Right {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Right {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let folded = s.replace(['-', '_'], "").to_ascii_lowercase();
        Right::all()
            .into_iter()
            .find(|r| r.name().to_ascii_lowercase() == folded)
            .ok_or_else(|| format!("unknown right: {s:?}"))
    }
}

/// Reserved key in the policy JSON for the stage-transition flag.
const FORWARD_ONLY_KEY: &str = "forward_only_stage_moves";

static NO_RIGHTS: BTreeSet<Right> = BTreeSet::new();

/// The (stage, role) → rights matrix.
///
/// Missing entries mean the empty set, which the decision procedure reports
/// as "no access rights". The matrix is total by construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolicyMatrix {
    grants: BTreeMap<Stage, BTreeMap<Role, BTreeSet<Right>>>,
    /// When set, stage changes may only move to the next stage in order.
    pub forward_only_stage_moves: bool,
}

impl PolicyMatrix {
    /// An all-empty matrix (every lookup yields no rights).
    pub fn empty() -> Self {
        PolicyMatrix {
            grants: BTreeMap::new(),
            forward_only_stage_moves: false,
        }
    }

    /// The documented default matrix.
    ///
    /// Read access widens as the investigation progresses through
    /// `PresentedInCourt` and shrinks to read-only at `CaseClosed`. Law
    /// enforcement and legal counsel hold `ChangeStage` throughout; law
    /// enforcement additionally holds `RequestAccess` and
    /// `ExtractProvenance` at every stage. At `AffidavitWarrant` only law
    /// enforcement and examiners can read evidence.
    pub fn default_policy() -> Self {
        use Right::*;
        use Role::*;
        use Stage::*;
        let mut policy = PolicyMatrix::empty();
        let mut set = |stage, role, rights: &[Right]| {
            policy.set(stage, role, rights.iter().copied().collect());
        };

        set(AffidavitWarrant, DigitalForensicsExaminer, &[ReadEvidence, UploadFile, RequestAccess]);
        set(AffidavitWarrant, Investigator, &[RequestAccess]);
        set(AffidavitWarrant, LegalCounsel, &[RequestAccess, ChangeStage]);
        set(AffidavitWarrant, LawEnforcement, &[ReadEvidence, UploadFile, RequestAccess, ChangeStage, ExtractProvenance]);

        set(Investigation, DigitalForensicsExaminer, &[ReadEvidence, UploadFile, UploadAnalysis, RequestAccess]);
        set(Investigation, Investigator, &[ReadEvidence, UploadFile, UploadAnalysis, RequestAccess]);
        set(Investigation, LegalCounsel, &[RequestAccess, ChangeStage]);
        set(Investigation, LawEnforcement, &[ReadEvidence, UploadFile, RequestAccess, ChangeStage, ExtractProvenance]);

        set(Analysis, DigitalForensicsExaminer, &[ReadEvidence, UploadFile, UploadAnalysis, RequestAccess, ExtractProvenance]);
        set(Analysis, Investigator, &[ReadEvidence, UploadFile, UploadAnalysis, RequestAccess]);
        set(Analysis, LegalCounsel, &[ReadEvidence, RequestAccess, ChangeStage]);
        set(Analysis, LawEnforcement, &[ReadEvidence, UploadFile, RequestAccess, ChangeStage, ExtractProvenance]);

        set(PresentedInCourt, DigitalForensicsExaminer, &[ReadEvidence, RequestAccess, ExtractProvenance]);
        set(PresentedInCourt, Investigator, &[ReadEvidence, RequestAccess]);
        set(PresentedInCourt, LegalCounsel, &[ReadEvidence, RequestAccess, ChangeStage, ExtractProvenance]);
        set(PresentedInCourt, LawEnforcement, &[ReadEvidence, RequestAccess, ChangeStage, ExtractProvenance]);

        set(JudgementDay, DigitalForensicsExaminer, &[ReadEvidence, RequestAccess]);
        set(JudgementDay, Investigator, &[ReadEvidence, RequestAccess]);
        set(JudgementDay, LegalCounsel, &[ReadEvidence, RequestAccess, ChangeStage, ExtractProvenance]);
        set(JudgementDay, LawEnforcement, &[ReadEvidence, RequestAccess, ChangeStage, ExtractProvenance]);

        set(CaseClosed, DigitalForensicsExaminer, &[ReadEvidence, RequestAccess]);
        set(CaseClosed, Investigator, &[RequestAccess]);
        set(CaseClosed, LegalCounsel, &[ReadEvidence, RequestAccess, ChangeStage]);
        set(CaseClosed, LawEnforcement, &[ReadEvidence, RequestAccess, ChangeStage, ExtractProvenance]);

        set(PotentialAppeal, DigitalForensicsExaminer, &[ReadEvidence, UploadAnalysis, RequestAccess]);
        set(PotentialAppeal, Investigator, &[ReadEvidence, RequestAccess]);
        set(PotentialAppeal, LegalCounsel, &[ReadEvidence, RequestAccess, ChangeStage, ExtractProvenance]);
        set(PotentialAppeal, LawEnforcement, &[ReadEvidence, UploadFile, RequestAccess, ChangeStage, ExtractProvenance]);

        policy
    }

    pub fn set(&mut self, stage: Stage, role: Role, rights: BTreeSet<Right>) {
        self.grants.entry(stage).or_default().insert(role, rights);
    }

    /// Rights of `role` at `stage`; the empty set when nothing is granted.
    pub fn rights(&self, stage: Stage, role: Role) -> &BTreeSet<Right> {
        self.grants
            .get(&stage)
            .and_then(|by_role| by_role.get(&role))
            .unwrap_or(&NO_RIGHTS)
    }

    pub fn has_right(&self, stage: Stage, role: Role, right: Right) -> bool {
        self.rights(stage, role).contains(&right)
    }

    /// Whether a stage transition is allowed under the transition flag.
    pub fn stage_move_allowed(&self, from: Stage, to: Stage) -> bool {
        if self.forward_only_stage_moves {
            to.index() == from.index() + 1
        } else {
            true
        }
    }

    /// Policy file form: `{stage: {role: [rights...]}}` plus the optional
    /// boolean key `forward_only_stage_moves`.
    pub fn to_json(&self) -> serde_json::Value {
        let mut top = serde_json::Map::new();
        for stage in Stage::all() {
            let mut by_role = serde_json::Map::new();
            for role in Role::all() {
                let rights: Vec<String> =
                    self.rights(stage, role).iter().map(|r| r.name().to_string()).collect();
                by_role.insert(role.name().to_string(), serde_json::Value::from(rights));
            }
            top.insert(stage.name().to_string(), serde_json::Value::Object(by_role));
        }
        top.insert(
            FORWARD_ONLY_KEY.to_string(),
            serde_json::Value::Bool(self.forward_only_stage_moves),
        );
        serde_json::Value::Object(top)
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Self, Error> {
        let top = value
            .as_object()
            .ok_or_else(|| Error::InvalidPolicy("top level must be an object".into()))?;
        let mut policy = PolicyMatrix::empty();
        for (key, entry) in top {
            if key == FORWARD_ONLY_KEY {
                policy.forward_only_stage_moves = entry
                    .as_bool()
                    .ok_or_else(|| Error::InvalidPolicy(format!("{FORWARD_ONLY_KEY} must be a boolean")))?;
                continue;
            }
            let stage = Stage::from_str(key).map_err(Error::InvalidPolicy)?;
            let by_role = entry
                .as_object()
                .ok_or_else(|| Error::InvalidPolicy(format!("{key}: expected object of roles")))?;
            for (role_name, rights_value) in by_role {
                let role = Role::from_str(role_name).map_err(Error::InvalidPolicy)?;
                let rights_list = rights_value
                    .as_array()
                    .ok_or_else(|| Error::InvalidPolicy(format!("{key}.{role_name}: expected array")))?;
                let mut rights = BTreeSet::new();
                for r in rights_list {
                    let name = r
                        .as_str()
                        .ok_or_else(|| Error::InvalidPolicy(format!("{key}.{role_name}: rights must be strings")))?;
                    rights.insert(Right::from_str(name).map_err(Error::InvalidPolicy)?);
                }
                policy.set(stage, role, rights);
            }
        }
        Ok(policy)
    }

    pub fn load(path: &Path) -> Result<Self, Error> {
        let text = std::fs::read_to_string(path)?;
        let value: serde_json::Value = serde_json::from_str(&text)?;
        Self::from_json(&value)
    }

    pub fn save(&self, path: &Path) -> Result<(), Error> {
        std::fs::write(path, serde_json::to_string_pretty(&self.to_json())?)?;
        Ok(())
    }
}

impl Default for PolicyMatrix {
    fn default() -> Self {
        Self::default_policy()
    }
}

/// One registered user.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Registration {
    pub public: PublicKey,
    pub role: Role,
}

/// Fingerprint → role registry, populated only through setup transactions.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserRegistry {
    users: BTreeMap<Digest, Registration>,
}

impl UserRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Register a key under a role. One role per key, immutable.
    pub fn register(&mut self, key: &PublicKey, role: Role) -> Result<&Registration, Error> {
        let fp = key.fingerprint();
        if self.users.contains_key(&fp) {
            return Err(Error::AlreadyRegistered(fp));
        }
        Ok(self
            .users
            .entry(fp)
            .or_insert(Registration { public: key.clone(), role }))
    }

    pub fn role_of(&self, fingerprint: &Digest) -> Option<Role> {
        self.users.get(fingerprint).map(|r| r.role)
    }

    pub fn get(&self, fingerprint: &Digest) -> Option<&Registration> {
        self.users.get(fingerprint)
    }

    pub fn len(&self) -> usize {
        self.users.len()
    }

    pub fn is_empty(&self) -> bool {
        self.users.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Digest, &Registration)> {
        self.users.iter()
    }

    /// Export as a JSON list of `{fingerprint, role}`.
    pub fn export_json(&self) -> serde_json::Value {
        serde_json::Value::from(
            self.users
                .iter()
                .map(|(fp, reg)| {
                    serde_json::json!({ "fingerprint": fp.to_hex(), "role": reg.role.name() })
                })
                .collect::<Vec<_>>(),
        )
    }
}

/// Outcome of the staged-authorization decision procedure.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum AccessDecision {
    Granted(BTreeSet<Right>),
    InvalidStage,
    AccessDenied,
    NoAccessRights,
}

impl AccessDecision {
    pub fn is_granted(&self) -> bool {
        matches!(self, AccessDecision::Granted(_))
    }

    pub fn label(&self) -> &'static str {
        match self {
            AccessDecision::Granted(_) => "Granted",
            AccessDecision::InvalidStage => "InvalidStage",
            AccessDecision::AccessDenied => "AccessDenied",
            AccessDecision::NoAccessRights => "NoAccessRights",
        }
    }
}

/// The staged-authorization decision procedure over a transaction.
///
/// The transaction must carry a declared current stage (access-request
/// payloads do); a missing or unparseable declaration counts as an invalid
/// stage, as does a declaration that disagrees with the case's actual
/// stage. The function is pure; the caller records the decision.
pub fn retrieve_access_info(
    tx: &Transaction,
    registry: &UserRegistry,
    policy: &PolicyMatrix,
    actual_stage: Stage,
) -> AccessDecision {
    decide(tx.declared_stage(), &tx.sender.fingerprint(), registry, policy, actual_stage)
}

/// Core of [`retrieve_access_info`], usable without a full transaction.
pub fn decide(
    declared_stage: Option<&str>,
    sender: &Digest,
    registry: &UserRegistry,
    policy: &PolicyMatrix,
    actual_stage: Stage,
) -> AccessDecision {
    let declared = match declared_stage.map(Stage::from_str) {
        Some(Ok(stage)) => stage,
        _ => return AccessDecision::InvalidStage,
    };
    if declared != actual_stage {
        return AccessDecision::InvalidStage;
    }
    let role = match registry.role_of(sender) {
        Some(role) => role,
        None => return AccessDecision::AccessDenied,
    };
    let rights = policy.rights(actual_stage, role);
    if rights.is_empty() {
        return AccessDecision::NoAccessRights;
    }
    AccessDecision::Granted(rights.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::keys::KeyPair;
    use rand::SeedableRng;

    fn test_key(seed: u64) -> KeyPair {
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(seed);
        KeyPair::generate(&mut rng)
    }

    #[test]
    fn register_and_read_back() {
        let mut registry = UserRegistry::new();
        let kp = test_key(1);
        registry.register(&kp.public, Role::Investigator).unwrap();
        assert_eq!(registry.role_of(&kp.fingerprint()), Some(Role::Investigator));
    }

    #[test]
    fn double_registration_rejected() {
        let mut registry = UserRegistry::new();
        let kp = test_key(2);
        registry.register(&kp.public, Role::Investigator).unwrap();
        let err = registry.register(&kp.public, Role::LegalCounsel).unwrap_err();
        assert!(matches!(err, Error::AlreadyRegistered(fp) if fp == kp.fingerprint()));
    }

    #[test]
    fn affidavit_read_constraint_holds_in_default_policy() {
        let policy = PolicyMatrix::default_policy();
        let s = Stage::AffidavitWarrant;
        assert!(policy.has_right(s, Role::LawEnforcement, Right::ReadEvidence));
        assert!(policy.has_right(s, Role::DigitalForensicsExaminer, Right::ReadEvidence));
        assert!(!policy.has_right(s, Role::Investigator, Right::ReadEvidence));
        assert!(!policy.has_right(s, Role::LegalCounsel, Right::ReadEvidence));
    }

    #[test]
    fn default_policy_guarantees_liveness_rights() {
        // Every stage keeps a ChangeStage holder, a RequestAccess holder,
        // and an ExtractProvenance holder; the workload generator and the
        // stage-change path rely on this.
        let policy = PolicyMatrix::default_policy();
        for stage in Stage::all() {
            assert!(policy.has_right(stage, Role::LawEnforcement, Right::ChangeStage));
            assert!(policy.has_right(stage, Role::LawEnforcement, Right::ExtractProvenance));
            for role in Role::all() {
                assert!(policy.has_right(stage, role, Right::RequestAccess));
            }
        }
    }

    #[test]
    fn policy_json_round_trip() {
        let policy = PolicyMatrix::default_policy();
        let json = policy.to_json();
        let parsed = PolicyMatrix::from_json(&json).unwrap();
        assert_eq!(parsed, policy);
    }

    #[test]
    fn policy_rejects_unknown_names() {
        let bad = serde_json::json!({ "Trial": { "Investigator": [] } });
        assert!(PolicyMatrix::from_json(&bad).is_err());
        let bad = serde_json::json!({ "Investigation": { "Judge": [] } });
        assert!(PolicyMatrix::from_json(&bad).is_err());
        let bad = serde_json::json!({ "Investigation": { "Investigator": ["Fly"] } });
        assert!(PolicyMatrix::from_json(&bad).is_err());
    }

    #[test]
    fn forward_only_flag_parses_and_restricts() {
        let mut policy = PolicyMatrix::default_policy();
        policy.forward_only_stage_moves = true;
        let reparsed = PolicyMatrix::from_json(&policy.to_json()).unwrap();
        assert!(reparsed.forward_only_stage_moves);
        assert!(reparsed.stage_move_allowed(Stage::Investigation, Stage::Analysis));
        assert!(!reparsed.stage_move_allowed(Stage::Investigation, Stage::CaseClosed));
        assert!(!reparsed.stage_move_allowed(Stage::Analysis, Stage::Investigation));
    }

    #[test]
    fn decide_outcome_order() {
        let mut registry = UserRegistry::new();
        let kp = test_key(3);
        registry.register(&kp.public, Role::Investigator).unwrap();
        let policy = PolicyMatrix::default_policy();
        let fp = kp.fingerprint();
        let unknown = test_key(4).fingerprint();

        // Invalid stage name.
        let d = decide(Some("Trial"), &fp, &registry, &policy, Stage::Investigation);
        assert_eq!(d, AccessDecision::InvalidStage);
        // Stage mismatch dominates even for unregistered senders.
        let d = decide(Some("Analysis"), &unknown, &registry, &policy, Stage::Investigation);
        assert_eq!(d, AccessDecision::InvalidStage);
        // Unregistered sender with a correct stage declaration.
        let d = decide(Some("Investigation"), &unknown, &registry, &policy, Stage::Investigation);
        assert_eq!(d, AccessDecision::AccessDenied);
        // Registered with rights.
        let d = decide(Some("Investigation"), &fp, &registry, &policy, Stage::Investigation);
        assert!(matches!(d, AccessDecision::Granted(ref rights) if rights.contains(&Right::ReadEvidence)));
        // Registered but the cell is empty.
        let empty = PolicyMatrix::empty();
        let d = decide(Some("Investigation"), &fp, &registry, &empty, Stage::Investigation);
        assert_eq!(d, AccessDecision::NoAccessRights);
    }

    #[test]
    fn stage_parse_accepts_separators() {
        assert_eq!("affidavit-warrant".parse::<Stage>().unwrap(), Stage::AffidavitWarrant);
        assert_eq!("PresentedInCourt".parse::<Stage>().unwrap(), Stage::PresentedInCourt);
        assert!("Trial".parse::<Stage>().is_err());
    }
}
