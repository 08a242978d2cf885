//! Binary Merkle root over an ordered list of digests.
//!
//! Leaves and internal nodes are domain-separated so a leaf value can never
//! be reinterpreted as an internal node (second-preimage hardening):
//!
//! ```text
//! leaf(d)    = sha256(0x00 || d)
//! node(l, r) = sha256(0x01 || l || r)
//! ```
//!
//! An odd level is handled by duplicating its last node. A single leaf
//! yields `leaf(d)` directly.

use crate::digest::{digest_parts, tag, Digest};
use crate::error::Error;

/// Hash a leaf digest into the tree's leaf space.
pub fn leaf_hash(d: &Digest) -> Digest {
    digest_parts(tag::MERKLE_LEAF, &[d.as_bytes()])
}

/// Hash two child nodes into their parent.
pub fn node_hash(left: &Digest, right: &Digest) -> Digest {
    digest_parts(tag::MERKLE_NODE, &[left.as_bytes(), right.as_bytes()])
}

/// Root of the binary Merkle tree over `leaves`, in order.
///
/// Returns [`Error::EmptyLeaves`] for an empty list.
pub fn merkle_root(leaves: &[Digest]) -> Result<Digest, Error> {
    if leaves.is_empty() {
        return Err(Error::EmptyLeaves);
    }
    let mut level: Vec<Digest> = leaves.iter().map(leaf_hash).collect();
    while level.len() > 1 {
        if level.len() % 2 == 1 {
            level.push(*level.last().expect("non-empty level"));
        }
        level = level
            .chunks_exact(2)
            .map(|pair| node_hash(&pair[0], &pair[1]))
            .collect();
    }
    Ok(level[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::digest::digest;

    #[test]
    fn empty_leaves_rejected() {
        assert!(matches!(merkle_root(&[]), Err(Error::EmptyLeaves)));
    }

    #[test]
    fn single_leaf_is_leaf_hash() {
        let d = digest(b"only");
        assert_eq!(merkle_root(&[d]).unwrap(), leaf_hash(&d));
    }

    #[test]
    fn two_leaves_forced_by_construction() {
        let d1 = digest(b"one");
        let d2 = digest(b"two");
        assert_eq!(
            merkle_root(&[d1, d2]).unwrap(),
            node_hash(&leaf_hash(&d1), &leaf_hash(&d2))
        );
    }

    #[test]
    fn three_leaves_match_straight_line_recomputation() {
        // Oracle: build the tree by hand with last-node duplication.
        let d1 = digest(b"a");
        let d2 = digest(b"b");
        let d3 = digest(b"c");
        let l1 = leaf_hash(&d1);
        let l2 = leaf_hash(&d2);
        let l3 = leaf_hash(&d3);
        let n1 = node_hash(&l1, &l2);
        let n2 = node_hash(&l3, &l3); // duplicated
        let expected = node_hash(&n1, &n2);
        assert_eq!(merkle_root(&[d1, d2, d3]).unwrap(), expected);
    }

    #[test]
    fn leaf_order_matters() {
        let d1 = digest(b"a");
        let d2 = digest(b"b");
        assert_ne!(merkle_root(&[d1, d2]).unwrap(), merkle_root(&[d2, d1]).unwrap());
    }
}
