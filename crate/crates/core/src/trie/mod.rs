//! Merkle Patricia trie over byte keys.
//!
//! Tries are persistent: every update writes the changed nodes to the
//! [`NodeStore`] and returns a new [`Trie`] handle, leaving older roots
//! readable. Child nodes whose RLP encoding is shorter than 32 bytes are
//! embedded in their parent; the root is always stored and addressed by
//! its digest, even when small.

mod node;
mod proof;

use std::sync::Arc;

use thiserror::Error;

use crate::keccak::{EMPTY_TRIE_ROOT, H256};
use crate::nibbles::{common_prefix_len, Nibbles};
use crate::rlp::RlpError;
use crate::store::{MemoryStore, SharedStore, StoreError};

pub use node::{empty_children, ChildRef, Node, INLINE_LIMIT};
pub use proof::{verify_proof, Proof, ProofError, ProofOutcome};

#[derive(Debug, Error)]
pub enum TrieError {
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error("missing node {0}")]
    MissingNode(H256),
    #[error("invalid node: {0}")]
    InvalidNode(String),
    #[error("malformed node encoding: {0}")]
    Rlp(#[from] RlpError),
    #[error("empty values are not storable; delete the key instead")]
    EmptyValue,
}

/// A trie version: a root digest plus the store its nodes live in.
#[derive(Clone)]
pub struct Trie {
    root: H256,
    store: SharedStore,
}

impl std::fmt::Debug for Trie {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Trie").field("root", &self.root).finish()
    }
}

/// Counts gathered by [`Trie::audit`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TrieStats {
    pub hashed_nodes: usize,
    pub inline_nodes: usize,
    pub values: usize,
    pub min_hashed_len: Option<usize>,
    pub max_inline_len: Option<usize>,
}

impl Trie {
    /// The empty trie. Its root encoding (`0x80`) is written to `store`.
    pub fn new(store: SharedStore) -> Result<Self, TrieError> {
        let root = store.put(&Node::Empty.encode())?;
        debug_assert_eq!(root, EMPTY_TRIE_ROOT);
        Ok(Trie { root, store })
    }

    /// An empty trie over a fresh in-memory store.
    pub fn in_memory() -> Self {
        Trie::new(Arc::new(MemoryStore::new())).expect("memory store is infallible")
    }

    /// Opens an existing version. Nodes are resolved lazily.
    pub fn at(root: H256, store: SharedStore) -> Self {
        Trie { root, store }
    }

    pub fn root_hash(&self) -> H256 {
        self.root
    }

    pub fn store(&self) -> &SharedStore {
        &self.store
    }

    pub fn is_empty(&self) -> bool {
        self.root == EMPTY_TRIE_ROOT
    }

    fn load(&self, hash: &H256) -> Result<(Vec<u8>, Node), TrieError> {
        let bytes = self.store.get(hash)?.ok_or(TrieError::MissingNode(*hash))?;
        let node = Node::decode(&bytes)?;
        Ok((bytes, node))
    }

    fn root_node(&self) -> Result<Node, TrieError> {
        if self.root == EMPTY_TRIE_ROOT {
            return Ok(Node::Empty);
        }
        Ok(self.load(&self.root)?.1)
    }

    fn resolve(&self, child: &ChildRef) -> Result<Node, TrieError> {
        match child {
            ChildRef::Empty => Ok(Node::Empty),
            ChildRef::Hash(h) => Ok(self.load(h)?.1),
            ChildRef::Inline(node) => Ok((**node).clone()),
        }
    }

    /// Inline when the encoding is shorter than 32 bytes, otherwise persist and hash.
    pub fn node_ref(&self, node: Node) -> Result<ChildRef, TrieError> {
        if node == Node::Empty {
            return Ok(ChildRef::Empty);
        }
        let encoded = node.encode();
        if encoded.len() < INLINE_LIMIT {
            Ok(ChildRef::Inline(Box::new(node)))
        } else {
            Ok(ChildRef::Hash(self.store.put(&encoded)?))
        }
    }

    fn with_root(&self, node: Node) -> Result<Trie, TrieError> {
        let root = self.store.put(&node.encode())?;
        Ok(Trie {
            root,
            store: self.store.clone(),
        })
    }

    pub fn get(&self, key: &[u8]) -> Result<Option<Vec<u8>>, TrieError> {
        let path = Nibbles::from_bytes(key);
        let mut path: &[u8] = &path;
        let mut node = self.root_node()?;
        loop {
            let next = match node {
                Node::Empty => return Ok(None),
                Node::Leaf { path: lp, value } => {
                    return Ok((lp.as_slice() == path).then_some(value));
                }
                Node::Extension { path: ep, child } => {
                    if !path.starts_with(&ep) {
                        return Ok(None);
                    }
                    path = &path[ep.len()..];
                    child
                }
                Node::Branch {
                    mut children,
                    value,
                } => {
                    let Some((&idx, rest)) = path.split_first() else {
                        return Ok(value);
                    };
                    path = rest;
                    std::mem::take(&mut children[idx as usize])
                }
            };
            node = self.resolve(&next)?;
        }
    }

    pub fn insert(&self, key: &[u8], value: &[u8]) -> Result<Trie, TrieError> {
        if value.is_empty() {
            return Err(TrieError::EmptyValue);
        }
        let path = Nibbles::from_bytes(key);
        let root = self.root_node()?;
        let updated = self.insert_at(root, &path, value.to_vec())?;
        self.with_root(updated)
    }

    fn insert_at(&self, node: Node, path: &[u8], value: Vec<u8>) -> Result<Node, TrieError> {
        match node {
            Node::Empty => Ok(Node::leaf(
                Nibbles::from_nibbles(path.to_vec()).unwrap(),
                value,
            )),
            Node::Leaf {
                path: lp,
                value: old,
            } => {
                let common = common_prefix_len(&lp, path);
                if common == lp.len() && common == path.len() {
                    return Ok(Node::leaf(lp, value));
                }
                let mut children = empty_children();
                let mut branch_value = None;
                if common == lp.len() {
                    branch_value = Some(old);
                } else {
                    children[lp[common] as usize] =
                        self.node_ref(Node::leaf(lp.slice(common + 1), old))?;
                }
                self.place_new(&mut children, &mut branch_value, &path[common..], value)?;
                self.wrap_prefix(&path[..common], children, branch_value)
            }
            Node::Extension { path: ep, child } => {
                let common = common_prefix_len(&ep, path);
                if common == ep.len() {
                    let below = self.resolve(&child)?;
                    let updated = self.insert_at(below, &path[common..], value)?;
                    return Ok(Node::Extension {
                        path: ep,
                        child: self.node_ref(updated)?,
                    });
                }
                let mut children = empty_children();
                let mut branch_value = None;
                let slot = ep[common] as usize;
                children[slot] = if ep.len() - common == 1 {
                    child
                } else {
                    self.node_ref(Node::Extension {
                        path: ep.slice(common + 1),
                        child,
                    })?
                };
                self.place_new(&mut children, &mut branch_value, &path[common..], value)?;
                self.wrap_prefix(&path[..common], children, branch_value)
            }
            Node::Branch {
                mut children,
                value: branch_value,
            } => match path.split_first() {
                None => Ok(Node::Branch {
                    children,
                    value: Some(value),
                }),
                Some((&idx, rest)) => {
                    let idx = idx as usize;
                    let below = self.resolve(&children[idx])?;
                    let updated = self.insert_at(below, rest, value)?;
                    children[idx] = self.node_ref(updated)?;
                    Ok(Node::Branch {
                        children,
                        value: branch_value,
                    })
                }
            },
        }
    }

    /// Puts a new value into a freshly split branch at the remaining `path`.
    fn place_new(
        &self,
        children: &mut [ChildRef; 16],
        branch_value: &mut Option<Vec<u8>>,
        path: &[u8],
        value: Vec<u8>,
    ) -> Result<(), TrieError> {
        match path.split_first() {
            None => *branch_value = Some(value),
            Some((&idx, rest)) => {
                let leaf = Node::leaf(Nibbles::from_nibbles(rest.to_vec()).unwrap(), value);
                children[idx as usize] = self.node_ref(leaf)?;
            }
        }
        Ok(())
    }

    fn wrap_prefix(
        &self,
        prefix: &[u8],
        children: Box<[ChildRef; 16]>,
        value: Option<Vec<u8>>,
    ) -> Result<Node, TrieError> {
        let branch = Node::Branch { children, value };
        if prefix.is_empty() {
            return Ok(branch);
        }
        Ok(Node::Extension {
            path: Nibbles::from_nibbles(prefix.to_vec()).unwrap(),
            child: self.node_ref(branch)?,
        })
    }

    /// Removes `key`. Deleting an absent key returns an equal root.
    pub fn delete(&self, key: &[u8]) -> Result<Trie, TrieError> {
        let path = Nibbles::from_bytes(key);
        let root = self.root_node()?;
        let updated = self.delete_at(root, &path)?;
        self.with_root(updated)
    }

    fn delete_at(&self, node: Node, path: &[u8]) -> Result<Node, TrieError> {
        match node {
            Node::Empty => Ok(Node::Empty),
            Node::Leaf { path: lp, value } => {
                if lp.as_slice() == path {
                    Ok(Node::Empty)
                } else {
                    Ok(Node::Leaf { path: lp, value })
                }
            }
            Node::Extension { path: ep, child } => {
                if !path.starts_with(&ep) {
                    return Ok(Node::Extension { path: ep, child });
                }
                let below = self.resolve(&child)?;
                let updated = self.delete_at(below, &path[ep.len()..])?;
                self.join_extension(ep.as_slice(), updated)
            }
            Node::Branch {
                mut children,
                mut value,
            } => {
                match path.split_first() {
                    None => value = None,
                    Some((&idx, rest)) => {
                        let idx = idx as usize;
                        if children[idx].is_empty() {
                            return Ok(Node::Branch { children, value });
                        }
                        let below = self.resolve(&children[idx])?;
                        let updated = self.delete_at(below, rest)?;
                        children[idx] = self.node_ref(updated)?;
                    }
                }
                self.normalize_branch(children, value)
            }
        }
    }

    /// Prefixes `prefix` onto `child`, merging paths so no extension points
    /// at a leaf or another extension.
    fn join_extension(&self, prefix: &[u8], child: Node) -> Result<Node, TrieError> {
        let joined = |p: &[u8]| {
            let mut full = prefix.to_vec();
            full.extend_from_slice(p);
            Nibbles::from_nibbles(full).unwrap()
        };
        Ok(match child {
            Node::Empty => Node::Empty,
            Node::Leaf { path, value } => Node::Leaf {
                path: joined(&path),
                value,
            },
            Node::Extension { path, child } => Node::Extension {
                path: joined(&path),
                child,
            },
            branch @ Node::Branch { .. } => {
                if prefix.is_empty() {
                    branch
                } else {
                    Node::Extension {
                        path: joined(&[]),
                        child: self.node_ref(branch)?,
                    }
                }
            }
        })
    }

    fn normalize_branch(
        &self,
        mut children: Box<[ChildRef; 16]>,
        value: Option<Vec<u8>>,
    ) -> Result<Node, TrieError> {
        let mut occupied = children
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_empty())
            .map(|(i, _)| i);
        let first = occupied.next();
        let more = occupied.next().is_some();
        match (first, more, value) {
            (None, _, None) => Ok(Node::Empty),
            (None, _, Some(v)) => Ok(Node::leaf(Nibbles::new(), v)),
            (Some(idx), false, None) => {
                let child = std::mem::take(&mut children[idx]);
                let below = self.resolve(&child)?;
                self.join_extension(&[idx as u8], below)
            }
            (_, _, value) => Ok(Node::Branch { children, value }),
        }
    }

    /// Every (key, value) binding, in key order.
    pub fn entries(&self) -> Result<Vec<(Vec<u8>, Vec<u8>)>, TrieError> {
        let mut out = Vec::new();
        let root = self.root_node()?;
        self.collect(root, &mut Vec::new(), &mut out)?;
        Ok(out)
    }

    fn collect(
        &self,
        node: Node,
        prefix: &mut Vec<u8>,
        out: &mut Vec<(Vec<u8>, Vec<u8>)>,
    ) -> Result<(), TrieError> {
        let key_of = |nibbles: &[u8]| {
            Nibbles::from_nibbles(nibbles.to_vec())
                .unwrap()
                .to_bytes()
                .ok_or_else(|| TrieError::InvalidNode("odd-length key path".into()))
        };
        match node {
            Node::Empty => {}
            Node::Leaf { path, value } => {
                let mark = prefix.len();
                prefix.extend_from_slice(&path);
                out.push((key_of(prefix)?, value));
                prefix.truncate(mark);
            }
            Node::Extension { path, child } => {
                let mark = prefix.len();
                prefix.extend_from_slice(&path);
                let below = self.resolve(&child)?;
                self.collect(below, prefix, out)?;
                prefix.truncate(mark);
            }
            Node::Branch { children, value } => {
                if let Some(v) = value {
                    out.push((key_of(prefix)?, v));
                }
                for (i, child) in children.iter().enumerate() {
                    if child.is_empty() {
                        continue;
                    }
                    prefix.push(i as u8);
                    let below = self.resolve(child)?;
                    self.collect(below, prefix, out)?;
                    prefix.pop();
                }
            }
        }
        Ok(())
    }

    /// Walks every reachable node, checking store integrity, the inlining
    /// boundary and path compression.
    pub fn audit(&self) -> Result<TrieStats, TrieError> {
        let mut stats = TrieStats::default();
        if self.root == EMPTY_TRIE_ROOT {
            return Ok(stats);
        }
        // the root is stored regardless of size, so it is exempt from the length bound
        let (_, root) = self.load(&self.root)?;
        stats.hashed_nodes += 1;
        self.audit_node(&root, true, &mut stats)?;
        Ok(stats)
    }

    fn audit_child(&self, child: &ChildRef, stats: &mut TrieStats) -> Result<Node, TrieError> {
        match child {
            ChildRef::Empty => Ok(Node::Empty),
            ChildRef::Hash(h) => {
                let (bytes, node) = self.load(h)?;
                if bytes.len() < INLINE_LIMIT {
                    return Err(TrieError::InvalidNode(format!(
                        "persisted child {h} is only {} bytes",
                        bytes.len()
                    )));
                }
                stats.hashed_nodes += 1;
                stats.min_hashed_len = Some(
                    stats
                        .min_hashed_len
                        .map_or(bytes.len(), |m| m.min(bytes.len())),
                );
                Ok(node)
            }
            ChildRef::Inline(node) => {
                let len = node.encode().len();
                if len >= INLINE_LIMIT {
                    return Err(TrieError::InvalidNode(format!(
                        "inline child of {len} bytes"
                    )));
                }
                stats.inline_nodes += 1;
                stats.max_inline_len = Some(stats.max_inline_len.map_or(len, |m| m.max(len)));
                Ok((**node).clone())
            }
        }
    }

    fn audit_node(
        &self,
        node: &Node,
        is_root: bool,
        stats: &mut TrieStats,
    ) -> Result<(), TrieError> {
        match node {
            Node::Empty if !is_root => Err(TrieError::InvalidNode("empty node below root".into())),
            Node::Empty => Ok(()),
            Node::Leaf { .. } => {
                stats.values += 1;
                Ok(())
            }
            Node::Extension { child, .. } => {
                let below = self.audit_child(child, stats)?;
                if !matches!(below, Node::Branch { .. }) {
                    return Err(TrieError::InvalidNode(
                        "extension does not point at a branch".into(),
                    ));
                }
                self.audit_node(&below, false, stats)
            }
            Node::Branch { children, value } => {
                stats.values += usize::from(value.is_some());
                for child in children.iter().filter(|c| !c.is_empty()) {
                    let below = self.audit_child(child, stats)?;
                    self.audit_node(&below, false, stats)?;
                }
                Ok(())
            }
        }
    }

    pub fn prove(&self, key: &[u8]) -> Result<Proof, TrieError> {
        let path = Nibbles::from_bytes(key);
        let mut path: &[u8] = &path;
        let root_bytes = if self.root == EMPTY_TRIE_ROOT {
            Node::Empty.encode()
        } else {
            self.load(&self.root)?.0
        };
        let mut nodes = vec![root_bytes.clone()];
        let mut node = Node::decode(&root_bytes)?;
        loop {
            let next = match node {
                Node::Empty | Node::Leaf { .. } => break,
                Node::Extension { path: ep, child } => {
                    if !path.starts_with(&ep) {
                        break;
                    }
                    path = &path[ep.len()..];
                    child
                }
                Node::Branch { mut children, .. } => {
                    let Some((&idx, rest)) = path.split_first() else {
                        break;
                    };
                    path = rest;
                    std::mem::take(&mut children[idx as usize])
                }
            };
            node = match next {
                ChildRef::Empty => break,
                ChildRef::Inline(n) => *n,
                ChildRef::Hash(h) => {
                    let (bytes, n) = self.load(&h)?;
                    nodes.push(bytes);
                    n
                }
            };
        }
        Ok(Proof { nodes })
    }
}
