//! Merkle proofs: the resolved node encodings on the path from the root to
//! the point where a key's lookup terminates.

use crate::keccak::{keccak256, H256};
use crate::nibbles::Nibbles;
use crate::rlp;

use super::node::{ChildRef, Node, INLINE_LIMIT};

/// Node encodings from the root down; embedded children travel inside their parents.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Proof {
    pub nodes: Vec<Vec<u8>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProofError {
    Empty,
    HashMismatch { index: usize },
    NotCanonical { index: usize },
    Malformed { index: usize, reason: String },
    Incomplete,
    ExtraNodes { used: usize, supplied: usize },
}

impl std::fmt::Display for ProofError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ProofError::Empty => write!(f, "empty proof"),
            ProofError::HashMismatch { index } => {
                write!(f, "node {index} does not match its reference")
            }
            ProofError::NotCanonical { index } => {
                write!(f, "node {index} is short enough to have been embedded")
            }
            ProofError::Malformed { index, reason } => {
                write!(f, "node {index} malformed: {reason}")
            }
            ProofError::Incomplete => write!(f, "proof ends before the lookup terminates"),
            ProofError::ExtraNodes { used, supplied } => {
                write!(
                    f,
                    "proof has {supplied} nodes but only {used} are on the path"
                )
            }
        }
    }
}

/// Result of checking a proof against a root digest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProofOutcome {
    Present(Vec<u8>),
    Absent,
    Invalid(ProofError),
}

enum Step {
    Done(Option<Vec<u8>>),
    Descend(H256),
}

/// Follows `path` within one proof node, through any embedded children.
fn walk(mut node: Node, path: &mut &[u8]) -> Step {
    loop {
        let next = match node {
            Node::Empty => return Step::Done(None),
            Node::Leaf { path: lp, value } => {
                return Step::Done((lp.as_slice() == *path).then_some(value));
            }
            Node::Extension { path: ep, child } => {
                if !path.starts_with(&ep) {
                    return Step::Done(None);
                }
                *path = &path[ep.len()..];
                child
            }
            Node::Branch {
                mut children,
                value,
            } => {
                let Some((&idx, rest)) = path.split_first() else {
                    return Step::Done(value);
                };
                *path = rest;
                std::mem::take(&mut children[idx as usize])
            }
        };
        match next {
            ChildRef::Empty => return Step::Done(None),
            ChildRef::Hash(h) => return Step::Descend(h),
            ChildRef::Inline(n) => node = *n,
        }
    }
}

/// Checks that `proof` authenticates the binding (or absence) of `key` under `root`.
pub fn verify_proof(root: &H256, key: &[u8], proof: &Proof) -> ProofOutcome {
    if proof.nodes.is_empty() {
        return ProofOutcome::Invalid(ProofError::Empty);
    }
    let nibbles = Nibbles::from_bytes(key);
    let mut path: &[u8] = &nibbles;
    let mut expected = *root;

    for (index, encoded) in proof.nodes.iter().enumerate() {
        if keccak256(encoded) != expected {
            return ProofOutcome::Invalid(ProofError::HashMismatch { index });
        }
        if index > 0 && encoded.len() < INLINE_LIMIT {
            return ProofOutcome::Invalid(ProofError::NotCanonical { index });
        }
        let node = match rlp::decode(encoded)
            .map_err(|e| e.to_string())
            .and_then(|item| Node::from_rlp(&item).map_err(|e| e.to_string()))
        {
            Ok(Node::Empty) if index > 0 => {
                return ProofOutcome::Invalid(ProofError::Malformed {
                    index,
                    reason: "empty node below root".into(),
                })
            }
            Ok(node) => node,
            Err(reason) => return ProofOutcome::Invalid(ProofError::Malformed { index, reason }),
        };
        match walk(node, &mut path) {
            Step::Descend(h) => expected = h,
            Step::Done(result) => {
                let used = index + 1;
                if used != proof.nodes.len() {
                    return ProofOutcome::Invalid(ProofError::ExtraNodes {
                        used,
                        supplied: proof.nodes.len(),
                    });
                }
                return match result {
                    Some(v) => ProofOutcome::Present(v),
                    None => ProofOutcome::Absent,
                };
            }
        }
    }
    ProofOutcome::Invalid(ProofError::Incomplete)
}
