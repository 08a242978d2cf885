//! Version tokens and the per-case file dependency graph.
//!
//! Every file version gets a token: a digest that commits to where the
//! version came from. Original uploads commit to the case, file id, content
//! digest, and time; derived outputs commit to their parent tokens (in
//! payload order) and time:
//!
//! ```text
//! original  id = sha256(0x03 || 0x00 || case || file_id || content || time)
//! derived   id = sha256(0x03 || 0x01 || n || parent_1 .. parent_n || time)
//! ```
//!
//! Because a derived token can only reference tokens that already exist,
//! the per-case graph is acyclic by construction. Combining the same
//! parents at two different times, or the same parents in a different
//! order, yields distinct tokens.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::canonical::CanonicalWriter;
use crate::digest::{digest, tag, Digest};
use crate::error::Error;
use crate::tx::CaseId;

/// Original upload or derived analysis output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TokenKind {
    Original,
    Derived,
}

/// Unique identifier of one file version.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub id: Digest,
    pub case: CaseId,
    pub kind: TokenKind,
    /// Parent token ids, in derivation order. Empty iff original.
    pub parents: Vec<Digest>,
    pub created_at_ms: u64,
    /// Source file identifier; original tokens only.
    pub source: Option<String>,
}

/// Id of an original token over the documented layout.
pub fn original_token_id(case: &CaseId, file_id: &str, content: &Digest, time_ms: u64) -> Digest {
    let mut w = CanonicalWriter::tagged(tag::TOKEN);
    w.put_u8(0x00);
    w.put_str(case.as_str());
    w.put_str(file_id);
    w.put_digest(content);
    w.put_u64(time_ms);
    digest(w.as_slice())
}

/// Id of a derived token over the documented layout.
pub fn derived_token_id(parents: &[Digest], time_ms: u64) -> Digest {
    let mut w = CanonicalWriter::tagged(tag::TOKEN);
    w.put_u8(0x01);
    w.put_u32(parents.len() as u32);
    for parent in parents {
        w.put_digest(parent);
    }
    w.put_u64(time_ms);
    digest(w.as_slice())
}

/// One case's token nodes; edges are implied by each token's parent list.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DependencyGraph {
    /// Insertion-ordered tokens; ids are unique within the case.
    nodes: Vec<Token>,
    #[serde(skip)]
    index: BTreeMap<Digest, usize>,
}

impl DependencyGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn contains(&self, id: &Digest) -> bool {
        self.lookup(id).is_some()
    }

    pub fn get(&self, id: &Digest) -> Option<&Token> {
        self.lookup(id).map(|i| &self.nodes[i])
    }

    pub fn tokens(&self) -> &[Token] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn lookup(&self, id: &Digest) -> Option<usize> {
        if self.index.len() == self.nodes.len() {
            return self.index.get(id).copied();
        }
        // Index is skipped by serde; rebuilt lazily after deserialization.
        self.nodes.iter().position(|t| &t.id == id)
    }

    fn insert(&mut self, token: Token) {
        self.index.insert(token.id, self.nodes.len());
        self.nodes.push(token);
    }

    /// Export shape: `{"case": ..., "nodes": [{id, kind, parents, created_at, source}]}`.
    pub fn export_json(&self, case: &CaseId) -> serde_json::Value {
        serde_json::json!({
            "case": case.as_str(),
            "nodes": self.nodes.iter().map(|t| serde_json::json!({
                "id": t.id.to_hex(),
                "kind": match t.kind { TokenKind::Original => "original", TokenKind::Derived => "derived" },
                "parents": t.parents.iter().map(Digest::to_hex).collect::<Vec<_>>(),
                "created_at": t.created_at_ms,
                "source": t.source,
            })).collect::<Vec<_>>(),
        })
    }
}

/// All cases' dependency graphs. Single writer (the contract pipeline);
/// reads may be shared freely.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenRegistry {
    graphs: BTreeMap<CaseId, DependencyGraph>,
}

impl TokenRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Make a case known to the registry (done at case creation).
    pub fn create_case(&mut self, case: &CaseId) {
        self.graphs.entry(case.clone()).or_default();
    }

    pub fn graph(&self, case: &CaseId) -> Option<&DependencyGraph> {
        self.graphs.get(case)
    }

    pub fn cases(&self) -> impl Iterator<Item = &CaseId> {
        self.graphs.keys()
    }

    /// Mint the token for an original file version and register it.
    pub fn mint_original(
        &mut self,
        case: &CaseId,
        file_id: &str,
        content: &Digest,
        time_ms: u64,
    ) -> Result<Token, Error> {
        let graph = self
            .graphs
            .get_mut(case)
            .ok_or_else(|| Error::UnknownCase(case.clone()))?;
        let id = original_token_id(case, file_id, content, time_ms);
        if graph.contains(&id) {
            return Err(Error::DuplicateToken(id));
        }
        let token = Token {
            id,
            case: case.clone(),
            kind: TokenKind::Original,
            parents: Vec::new(),
            created_at_ms: time_ms,
            source: Some(file_id.to_string()),
        };
        graph.insert(token.clone());
        Ok(token)
    }

    /// Mint a derived token over existing parent tokens, in the given order.
    pub fn derive_token(
        &mut self,
        case: &CaseId,
        parents: &[Digest],
        time_ms: u64,
    ) -> Result<Token, Error> {
        if parents.is_empty() {
            return Err(Error::EmptyParents);
        }
        let graph = self
            .graphs
            .get_mut(case)
            .ok_or_else(|| Error::UnknownCase(case.clone()))?;
        for parent in parents {
            if !graph.contains(parent) {
                return Err(Error::UnknownParent(*parent));
            }
        }
        let id = derived_token_id(parents, time_ms);
        if graph.contains(&id) {
            return Err(Error::DuplicateToken(id));
        }
        let token = Token {
            id,
            case: case.clone(),
            kind: TokenKind::Derived,
            parents: parents.to_vec(),
            created_at_ms: time_ms,
            source: None,
        };
        graph.insert(token.clone());
        Ok(token)
    }

    /// All ancestors of `token` (excluding itself), in a deterministic
    /// reverse-topological order: every token appears before any of its own
    /// ancestors, ties broken by id bytes.
    pub fn ancestry_of(&self, case: &CaseId, token: &Digest) -> Result<Vec<Digest>, Error> {
        let graph = self
            .graphs
            .get(case)
            .ok_or_else(|| Error::UnknownCase(case.clone()))?;
        if !graph.contains(token) {
            return Err(Error::UnknownToken(*token));
        }

        // Ancestor closure over parent links.
        let query = graph.get(token).expect("checked above").clone();
        let mut ancestors: BTreeMap<Digest, Token> = BTreeMap::new();
        let mut stack: Vec<Digest> = query.parents.clone();
        while let Some(id) = stack.pop() {
            if ancestors.contains_key(&id) {
                continue;
            }
            let node = graph.get(&id).expect("parents of registered tokens are registered");
            stack.extend(node.parents.iter().copied());
            ancestors.insert(id, node.clone());
        }

        // A node may be emitted once every reference to it as a parent —
        // from the query or from already-emitted ancestors — is satisfied.
        // Among the eligible, the smallest id goes first.
        let mut need: BTreeMap<Digest, usize> = ancestors.keys().map(|id| (*id, 0)).collect();
        for node in ancestors.values().chain(std::iter::once(&query)) {
            for parent in &node.parents {
                *need.get_mut(parent).expect("closure is parent-closed") += 1;
            }
        }
        let mut done: BTreeMap<Digest, usize> = ancestors.keys().map(|id| (*id, 0)).collect();
        for parent in &query.parents {
            *done.get_mut(parent).expect("direct parents are ancestors") += 1;
        }

        let mut out = Vec::with_capacity(ancestors.len());
        let mut remaining: std::collections::BTreeSet<Digest> = ancestors.keys().copied().collect();
        while !remaining.is_empty() {
            let next = remaining
                .iter()
                .copied()
                .find(|id| done[id] == need[id])
                .expect("an acyclic graph always has an emittable node");
            remaining.remove(&next);
            out.push(next);
            for parent in &ancestors[&next].parents {
                *done.get_mut(parent).expect("closure is parent-closed") += 1;
            }
        }
        Ok(out)
    }

    /// Write each case's graph export to `<dir>/<case>.json`.
    pub fn export_dir(&self, dir: &std::path::Path) -> Result<(), Error> {
        std::fs::create_dir_all(dir)?;
        for (case, graph) in &self.graphs {
            let path = dir.join(format!("{}.json", case.as_str()));
            std::fs::write(path, serde_json::to_string_pretty(&graph.export_json(case))?)?;
        }
        Ok(())
    }
}
