//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so each criterion reports on its own
//! line with its measurements; any failure makes the process exit nonzero.

use std::collections::BTreeMap;
use std::panic::{self, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use ethds::chain::{
    genesis_block, seal_block, Account, Address, Bloom, ChainConfig, Transaction, WorldState,
};
use ethds::keccak::{keccak256, EMPTY_CODE_HASH, EMPTY_TRIE_ROOT};
use ethds::layout::{self, Kind, SlotIndex, VarDecl};
use ethds::rlp::{self, RlpItem};
use ethds::store::{FileStore, MemoryStore};
use ethds::trie::{ChildRef, Node, ProofOutcome};
use ethds::{hp_decode, hp_encode, verify_proof, SecureTrie, Trie};
use ethds_cli::json::ChainJson;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_bytes(r: &mut impl Rng, min: usize, max: usize) -> Vec<u8> {
    let len = r.gen_range(min..=max);
    (0..len).map(|_| r.gen()).collect()
}

// 1 -----------------------------------------------------------------------

fn rlp_known_answers() -> Outcome {
    let abcd = RlpItem::from("ABCD");
    let two = RlpItem::list([RlpItem::from("AB"), RlpItem::from("CDE")]);
    let long: Vec<u8> = std::iter::once(b'A')
        .chain(std::iter::repeat_n(b'x', 298))
        .chain(std::iter::once(b'B'))
        .collect();
    let long = RlpItem::bytes(long);
    let nested = RlpItem::list([long.clone(), abcd.clone()]);

    let e1 = rlp::encode(&abcd).map_err(|e| e.to_string())?;
    ensure!(e1 == [0x84, b'A', b'B', b'C', b'D'], "ABCD -> {e1:02x?}");
    let e2 = rlp::encode(&two).map_err(|e| e.to_string())?;
    ensure!(
        e2 == [0xc7, 0x82, b'A', b'B', 0x83, b'C', b'D', b'E'],
        "[AB][CDE] -> {e2:02x?}"
    );
    let e3 = rlp::encode(&long).map_err(|e| e.to_string())?;
    ensure!(
        e3[..3] == [0xb9, 0x01, 0x2c] && e3.len() == 303,
        "300-byte prefix {:02x?}",
        &e3[..3]
    );
    ensure!(
        e3[3] == b'A' && e3[302] == b'B',
        "300-byte payload misplaced"
    );
    let e4 = rlp::encode(&nested).map_err(|e| e.to_string())?;
    ensure!(
        e4[..3] == [0xf9, 0x01, 0x34],
        "nested prefix {:02x?}",
        &e4[..3]
    );
    ensure!(
        e4[3..306] == e3[..] && e4[306..] == e1[..],
        "nested payload is not the two encodings"
    );
    for (item, enc) in [(&abcd, &e1), (&two, &e2), (&long, &e3), (&nested, &e4)] {
        ensure!(rlp::decode(enc).as_ref() == Ok(item), "decode mismatch");
    }
    Ok("4/4 byte-exact: 0x84, 0xc7, 0xb9012c, 0xf90134".into())
}

// 2 -----------------------------------------------------------------------

fn hp_known_answers() -> Outcome {
    let odd = [5, 6, 7, 8, 9];
    let even = [4, 5, 6, 7, 8, 9];
    let cases: [(&[u8], bool, &[u8]); 4] = [
        (&odd, false, &[0x15, 0x67, 0x89]),
        (&odd, true, &[0x35, 0x67, 0x89]),
        (&even, false, &[0x00, 0x45, 0x67, 0x89]),
        (&even, true, &[0x20, 0x45, 0x67, 0x89]),
    ];
    for (path, leaf, expected) in cases {
        let got = hp_encode(path, leaf).map_err(|e| e.to_string())?;
        ensure!(got == expected, "{path:?} leaf={leaf} -> {got:02x?}");
        let (back, flag) = hp_decode(&got).map_err(|e| e.to_string())?;
        ensure!(
            back.as_slice() == path && flag == leaf,
            "decode of {got:02x?}"
        );
    }
    Ok("4/4 flag variants".into())
}

// 3 -----------------------------------------------------------------------

fn keccak_gates() -> Outcome {
    let empty = keccak256(b"");
    let rlp_empty = keccak256([0x80]);
    ensure!(empty == EMPTY_CODE_HASH, "keccak256(\"\") = {empty}");
    ensure!(
        rlp_empty == EMPTY_TRIE_ROOT,
        "keccak256(0x80) = {rlp_empty}"
    );
    ensure!(
        empty.to_string() == "0xc5d2460186f7233c927e7db2dcc703c0e500b653ca82273b7bfad8045d85a470",
        "empty digest text"
    );
    ensure!(
        rlp_empty.to_string()
            == "0x56e81f171bcc55a6ff8345e692c0f86e5b48e01b996cadc001622fb5e363b421",
        "empty trie root text"
    );
    Ok("both reference vectors match (also asserted at compile time)".into())
}

// 4 -----------------------------------------------------------------------

fn random_item(r: &mut impl Rng, depth: u32) -> RlpItem {
    if depth < 4 && r.gen_bool(0.3) {
        let n = r.gen_range(0..6);
        RlpItem::List((0..n).map(|_| random_item(r, depth + 1)).collect())
    } else {
        match r.gen_range(0..4) {
            0 => RlpItem::bytes([r.gen::<u8>()]),
            1 => RlpItem::bytes(random_bytes(r, 0, 55)),
            2 => RlpItem::bytes(random_bytes(r, 56, 300)),
            _ => RlpItem::bytes(random_bytes(r, 0, 3)),
        }
    }
}

/// Byte strings every strict decoder must reject.
fn non_canonical_corpus() -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    for b in 0u8..0x80 {
        out.push((format!("wrapped single byte {b:#04x}"), vec![0x81, b]));
    }
    for len in 0u8..=55 {
        let mut s = vec![0xb8, len];
        s.extend(std::iter::repeat_n(b'a', len as usize));
        out.push((format!("long-form string of {len}"), s));
        let mut l = vec![0xf8, len];
        l.extend(std::iter::repeat_n(0x80, len as usize));
        out.push((format!("long-form list of {len}"), l));
    }
    for (prefix, payload) in [(0xb9u8, 0x80u8), (0xf9, 0x80)] {
        let mut s = vec![prefix, 0x00, 0x38];
        s.extend(std::iter::repeat_n(payload, 0x38));
        out.push((format!("leading zero length {prefix:#x}"), s));
    }
    let mut s = vec![0xba, 0x00, 0x01, 0x00];
    s.extend(std::iter::repeat_n(b'z', 256));
    out.push(("leading zero 3-byte length".into(), s));
    let valid = [
        RlpItem::from("dog"),
        RlpItem::list([RlpItem::from("cat"), RlpItem::empty()]),
        RlpItem::bytes(vec![7; 60]),
        RlpItem::list(vec![RlpItem::bytes(vec![1; 20]); 4]),
        RlpItem::uint(1024u64),
    ];
    for (i, item) in valid.iter().enumerate() {
        let enc = item.encode();
        let mut trailing = enc.clone();
        trailing.push(0);
        out.push((format!("trailing byte after item {i}"), trailing));
        out.push((
            format!("two items {i}"),
            [enc.clone(), enc.clone()].concat(),
        ));
        for cut in 1..enc.len().min(6) {
            out.push((
                format!("item {i} truncated by {cut}"),
                enc[..enc.len() - cut].to_vec(),
            ));
        }
    }
    out.push(("empty input".into(), vec![]));
    out.push(("bare long string prefix".into(), vec![0xb8]));
    out.push(("bare long list prefix".into(), vec![0xf8]));
    out.push((
        "list claims more than it holds".into(),
        vec![0xc3, 0x80, 0x80],
    ));
    out.push(("child overruns list".into(), vec![0xc2, 0x83, b'a', b'b']));
    out
}

fn round_trips() -> Outcome {
    let mut r = rng(4);
    for i in 0..10_000 {
        let item = random_item(&mut r, 0);
        let enc = rlp::encode(&item).map_err(|e| e.to_string())?;
        let back = rlp::decode(&enc).map_err(|e| format!("item {i}: {e}"))?;
        ensure!(back == item, "item {i} did not round-trip");
    }
    for i in 0..10_000 {
        let len = r.gen_range(0..=64);
        let path: Vec<u8> = (0..len).map(|_| r.gen_range(0..16)).collect();
        let leaf = r.gen_bool(0.5);
        let enc = hp_encode(&path, leaf).map_err(|e| e.to_string())?;
        let (back, flag) = hp_decode(&enc).map_err(|e| format!("path {i}: {e}"))?;
        ensure!(
            back.as_slice() == path.as_slice() && flag == leaf,
            "path {i} did not round-trip"
        );
    }
    let corpus = non_canonical_corpus();
    ensure!(
        corpus.len() >= 100,
        "corpus has only {} cases",
        corpus.len()
    );
    let accepted: Vec<&str> = corpus
        .iter()
        .filter(|(_, bytes)| rlp::decode(bytes).is_ok())
        .map(|(name, _)| name.as_str())
        .collect();
    ensure!(accepted.is_empty(), "strict decoder accepted: {accepted:?}");
    Ok(format!(
        "10000 items + 10000 paths round-trip; {}/{} non-canonical rejected",
        corpus.len(),
        corpus.len()
    ))
}

// 5 -----------------------------------------------------------------------

fn random_map(r: &mut impl Rng, n: usize) -> BTreeMap<Vec<u8>, Vec<u8>> {
    let mut map = BTreeMap::new();
    while map.len() < n {
        map.insert(random_bytes(r, 1, 20), random_bytes(r, 1, 40));
    }
    map
}

fn order_independence() -> Outcome {
    let mut r = rng(5);
    let map = random_map(&mut r, 1000);
    let pairs: Vec<_> = map.iter().collect();
    let mut roots = Vec::new();
    for _ in 0..20 {
        let mut order = pairs.clone();
        order.shuffle(&mut r);
        let mut t = Trie::in_memory();
        for (k, v) in order {
            t = t.insert(k, v).map_err(|e| e.to_string())?;
        }
        roots.push(t.root_hash());
    }
    for _ in 0..5 {
        let mut ops: Vec<(Vec<u8>, Option<Vec<u8>>)> = Vec::new();
        for (k, v) in &map {
            if r.gen_bool(0.3) {
                ops.push((k.to_vec(), Some(random_bytes(&mut r, 1, 40))));
            }
            ops.push((k.to_vec(), Some(v.to_vec())));
        }
        for _ in 0..300 {
            let extra = random_bytes(&mut r, 1, 20);
            if !map.contains_key(&extra) {
                ops.push((extra.clone(), Some(random_bytes(&mut r, 1, 40))));
                ops.push((extra, None));
            }
        }
        // shuffle while keeping each key's own operations in order
        let mut by_key: BTreeMap<Vec<u8>, Vec<Option<Vec<u8>>>> = BTreeMap::new();
        for (k, v) in ops {
            by_key.entry(k).or_default().push(v);
        }
        let mut queues: Vec<(Vec<u8>, std::collections::VecDeque<Option<Vec<u8>>>)> =
            by_key.into_iter().map(|(k, v)| (k, v.into())).collect();
        let mut t = Trie::in_memory();
        while !queues.is_empty() {
            let i = r.gen_range(0..queues.len());
            let (k, q) = &mut queues[i];
            match q.pop_front().expect("non-empty queue") {
                Some(v) => t = t.insert(k, &v).map_err(|e| e.to_string())?,
                None => t = t.delete(k).map_err(|e| e.to_string())?,
            }
            if q.is_empty() {
                queues.swap_remove(i);
            }
        }
        roots.push(t.root_hash());
    }
    let distinct: std::collections::BTreeSet<_> = roots.iter().collect();
    ensure!(
        distinct.len() == 1,
        "{} distinct roots among {}",
        distinct.len(),
        roots.len()
    );
    Ok(format!("25/25 roots identical ({})", roots[0]))
}

// 6 -----------------------------------------------------------------------

fn oracle_equivalence() -> Outcome {
    let mut r = rng(6);
    let pool: Vec<Vec<u8>> = (0..400).map(|_| random_bytes(&mut r, 1, 12)).collect();
    let mut oracle: BTreeMap<Vec<u8>, Vec<u8>> = BTreeMap::new();
    let mut t = Trie::in_memory();
    let mut checks = 0usize;
    for step in 0..5000 {
        let key = pool.choose(&mut r).expect("pool").clone();
        match r.gen_range(0..10) {
            0..=5 => {
                let v = random_bytes(&mut r, 1, 50);
                t = t.insert(&key, &v).map_err(|e| e.to_string())?;
                oracle.insert(key.clone(), v);
            }
            6..=8 => {
                t = t.delete(&key).map_err(|e| e.to_string())?;
                oracle.remove(&key);
            }
            _ => {}
        }
        let probe = pool.choose(&mut r).expect("pool").clone();
        for k in [&key, &probe] {
            let got = t.get(k).map_err(|e| e.to_string())?;
            ensure!(
                got.as_ref() == oracle.get(k),
                "step {step}: get disagrees with oracle"
            );
            checks += 1;
        }
    }
    let live = oracle.len();
    for k in oracle.keys() {
        t = t.delete(k).map_err(|e| e.to_string())?;
    }
    ensure!(
        t.root_hash() == EMPTY_TRIE_ROOT,
        "root after deleting all keys: {}",
        t.root_hash()
    );
    Ok(format!(
        "{checks}/{checks} gets agree; deleting {live} live keys gives the empty root"
    ))
}

// 7 -----------------------------------------------------------------------

fn proof_soundness() -> Outcome {
    let mut r = rng(7);
    let map = random_map(&mut r, 200);
    let mut t = Trie::in_memory();
    for (k, v) in &map {
        t = t.insert(k, v).map_err(|e| e.to_string())?;
    }
    let root = t.root_hash();
    for (k, v) in &map {
        let p = t.prove(k).map_err(|e| e.to_string())?;
        ensure!(
            verify_proof(&root, k, &p) == ProofOutcome::Present(v.clone()),
            "honest proof rejected"
        );
    }
    let keys: Vec<_> = map.keys().collect();
    let mut flips = 0usize;
    let mut false_accepts = 0usize;
    for k in keys.choose_multiple(&mut r, 20) {
        let p = t.prove(k).map_err(|e| e.to_string())?;
        for n in 0..p.nodes.len() {
            for byte in 0..p.nodes[n].len() {
                for bit in 0..8 {
                    let mut bad = p.clone();
                    bad.nodes[n][byte] ^= 1 << bit;
                    flips += 1;
                    if !matches!(verify_proof(&root, k, &bad), ProofOutcome::Invalid(_)) {
                        false_accepts += 1;
                    }
                }
            }
        }
    }
    ensure!(
        false_accepts == 0,
        "{false_accepts} false acceptances over {flips} flips"
    );
    Ok(format!(
        "200/200 proofs verify; 0 false acceptances over {flips} single-bit flips"
    ))
}

// 8 -----------------------------------------------------------------------

fn fig4_shape() -> Result<(), String> {
    let t = Trie::in_memory();
    let t = [
        (&[0x11, 0x11][..], &b"branch value"[..]),
        (&[0x11, 0x11, 0x00, 0x01], b"zero"),
        (&[0x11, 0x11, 0x23], b"two"),
        (&[0x11, 0x11, 0xf4, 0x56], b"f"),
    ]
    .iter()
    .try_fold(t, |t, (k, v)| t.insert(k, v))
    .map_err(|e| e.to_string())?;
    let load = |h: ethds::H256| {
        t.store()
            .get(&h)
            .map_err(|e| e.to_string())?
            .ok_or("missing node".to_string())
            .and_then(|b| Node::decode(&b).map_err(|e| e.to_string()))
    };
    let Node::Extension { path, child } = load(t.root_hash())? else {
        return Err("root is not an extension".into());
    };
    ensure!(path.as_slice() == [1, 1, 1, 1], "extension path {path:?}");
    let branch = match child {
        ChildRef::Hash(h) => load(h)?,
        ChildRef::Inline(n) => *n,
        ChildRef::Empty => return Err("extension has no child".into()),
    };
    let Node::Branch { children, value } = branch else {
        return Err("extension child is not a branch".into());
    };
    let filled: Vec<usize> = (0..16).filter(|&i| !children[i].is_empty()).collect();
    ensure!(filled == [0, 2, 15], "branch slots {filled:?}");
    ensure!(
        value.as_deref() == Some(&b"branch value"[..]),
        "branch value {value:?}"
    );
    Ok(())
}

fn inlining_boundary() -> Outcome {
    let mut r = rng(8);
    let mut t = Trie::in_memory();
    let mut n = 0;
    while n < 1000 {
        let k = random_bytes(&mut r, 2, 4);
        if t.get(&k).map_err(|e| e.to_string())?.is_none() {
            n += 1;
        }
        t = t
            .insert(&k, &random_bytes(&mut r, 1, 8))
            .map_err(|e| e.to_string())?;
    }
    let stats = t.audit().map_err(|e| e.to_string())?;
    let root_len = t
        .store()
        .get(&t.root_hash())
        .map_err(|e| e.to_string())?
        .map_or(0, |b| b.len());
    ensure!(stats.values == 1000, "audit saw {} values", stats.values);
    ensure!(
        stats.inline_nodes > 0 && stats.hashed_nodes > 1,
        "degenerate trie: {stats:?}"
    );
    let min_hashed = stats.min_hashed_len.unwrap_or(usize::MAX).min(root_len);
    let max_inline = stats.max_inline_len.unwrap_or(0);
    ensure!(min_hashed >= 32, "persisted node of {min_hashed} bytes");
    ensure!(max_inline < 32, "inline node of {max_inline} bytes");
    fig4_shape()?;
    Ok(format!(
        "{} persisted (min {min_hashed} B), {} inline (max {max_inline} B); four-key shape ok",
        stats.hashed_nodes, stats.inline_nodes
    ))
}

// 9 -----------------------------------------------------------------------

fn bloom() -> Outcome {
    let mut r = rng(9);
    let mut bloom = Bloom::new();
    let entries: Vec<Vec<u8>> = (0..50).map(|_| random_bytes(&mut r, 20, 32)).collect();
    for e in &entries {
        bloom.insert(e);
    }
    let negatives = entries.iter().filter(|e| !bloom.contains(e)).count();
    ensure!(negatives == 0, "{negatives} false negatives");
    let mut fp = 0;
    let mut probes = 0;
    while probes < 10_000 {
        let e = random_bytes(&mut r, 20, 32);
        if entries.contains(&e) {
            continue;
        }
        probes += 1;
        fp += usize::from(bloom.contains(&e));
    }
    let rate = fp as f64 / probes as f64;
    ensure!(rate <= 0.005, "false-positive rate {:.4}%", rate * 100.0);
    Ok(format!(
        "0 false negatives; {fp}/{probes} false positives ({:.3}%)",
        rate * 100.0
    ))
}

// 10 ----------------------------------------------------------------------

fn ethds(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_ethds"))
        .args(args)
        .output()
        .expect("run ethds");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn verify_expecting(chain: &Path, store: &Path, index: usize) -> Result<(), String> {
    let (code, _, err) = ethds(&[
        "chain",
        "verify",
        path_str(chain),
        "--store",
        path_str(store),
    ]);
    ensure!(code == 1, "expected exit 1, got {code} ({err})");
    ensure!(err.lines().count() == 1, "reason is not one line: {err:?}");
    ensure!(
        err.contains(&format!("block {index}:")),
        "expected block {index}, got {err:?}"
    );
    Ok(())
}

fn path_str(p: &Path) -> &str {
    p.to_str().expect("utf-8 temp path")
}

fn authenticated_storage() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let store = dir.path().join("nodes.db");
    let chain = dir.path().join("chain.json");
    let (code, _, err) = ethds(&[
        "chain",
        "demo",
        "--store",
        path_str(&store),
        "--out",
        path_str(&chain),
    ]);
    ensure!(code == 0, "chain demo failed: {err}");
    let sealed: ChainJson =
        serde_json::from_slice(&std::fs::read(&chain).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
    ensure!(
        sealed.blocks.len() == 3,
        "demo has {} blocks",
        sealed.blocks.len()
    );

    // balances under each block's stateRoot, read straight from the store
    let b: Address = "0xb2b2b2b2b2b2b2b2b2b2b2b2b2b2b2b2b2b2b2b2"
        .parse()
        .map_err(|e| format!("{e}"))?;
    let balances: Vec<u128> = {
        let fs = Arc::new(FileStore::open(&store).map_err(|e| e.to_string())?);
        sealed.blocks[1..]
            .iter()
            .map(|blk| {
                let root = blk.header.state_root.parse().map_err(|e| format!("{e}"))?;
                let state = WorldState::at(root, fs.clone());
                Ok(state
                    .get(&b)
                    .map_err(|e| e.to_string())?
                    .map_or(0, |a| a.balance))
            })
            .collect::<Result<_, String>>()?
    };
    ensure!(balances == [100, 20], "balances {balances:?}");
    ensure!(
        sealed.blocks[1].header.state_root != sealed.blocks[2].header.state_root,
        "stateRoots coincide"
    );

    let (code, out, err) = ethds(&[
        "chain",
        "verify",
        path_str(&chain),
        "--store",
        path_str(&store),
    ]);
    ensure!(code == 0, "honest chain rejected: {err}");
    ensure!(out.starts_with("ok"), "unexpected output {out:?}");

    // (a) edit the stored account value 100 -> 101
    let tampered_store = dir.path().join("tampered.db");
    let mut bytes = std::fs::read(&store).map_err(|e| e.to_string())?;
    let account = Account::external(100).encode();
    let at = bytes
        .windows(account.len())
        .position(|w| w == account.as_slice())
        .ok_or("account record not found in store file")?;
    let balance_at = at + 3; // 2-byte list prefix, empty nonce
    ensure!(bytes[balance_at] == 100, "unexpected account layout");
    bytes[balance_at] = 101;
    std::fs::write(&tampered_store, bytes).map_err(|e| e.to_string())?;
    verify_expecting(&chain, &tampered_store, 1).map_err(|e| format!("(a) {e}"))?;

    // (b) swap headers of blocks 1 and 2
    let mut swapped = sealed.clone();
    let h1 = swapped.blocks[1].header.clone();
    swapped.blocks[1].header = swapped.blocks[2].header.clone();
    swapped.blocks[2].header = h1;
    let swapped_path = dir.path().join("swapped.json");
    std::fs::write(
        &swapped_path,
        serde_json::to_vec(&swapped).map_err(|e| e.to_string())?,
    )
    .map_err(|e| e.to_string())?;
    verify_expecting(&swapped_path, &store, 1).map_err(|e| format!("(b) {e}"))?;

    // (c) reorder the transactions of block 2
    let mut reordered = sealed.clone();
    reordered.blocks[2].transactions.swap(0, 1);
    let reordered_path = dir.path().join("reordered.json");
    std::fs::write(
        &reordered_path,
        serde_json::to_vec(&reordered).map_err(|e| e.to_string())?,
    )
    .map_err(|e| e.to_string())?;
    verify_expecting(&reordered_path, &store, 2).map_err(|e| format!("(c) {e}"))?;

    Ok("balances 100 -> 20, distinct roots; honest ok; edit@1, swap@1, reorder@2 rejected".into())
}

// 11 ----------------------------------------------------------------------

fn storage_layout() -> Outcome {
    let decls = [
        VarDecl::new("a", Kind::Int(128)),
        VarDecl::new("b", Kind::Int(8)),
        VarDecl::new("c", Kind::Bool),
        VarDecl::new("d", Kind::Int(256)),
    ];
    let l = layout::layout_static(&decls, SlotIndex::ZERO).map_err(|e| e.to_string())?;
    let got: Vec<(SlotIndex, u8)> = l.assignments.iter().map(|a| (a.slot, a.offset)).collect();
    let want = vec![
        (SlotIndex::from(0), 0),
        (SlotIndex::from(0), 16),
        (SlotIndex::from(0), 17),
        (SlotIndex::from(1), 0),
    ];
    ensure!(got == want, "packing {got:?}");

    let mut storage = SecureTrie::in_memory();
    let mut roots = Vec::new();
    for v in [30u8, 20, 10] {
        storage = layout::slot_write(&storage, SlotIndex::ZERO, &layout::pad32(&[v]))
            .map_err(|e| e.to_string())?;
        roots.push(storage.root_hash());
    }
    let slot0 = layout::slot_read(&storage, SlotIndex::ZERO).map_err(|e| e.to_string())?;
    ensure!(slot0 == layout::pad32(&[10]), "slot 0 = {slot0:02x?}");
    ensure!(
        roots[0] != roots[1] && roots[1] != roots[2] && roots[0] != roots[2],
        "storage roots repeat"
    );

    let map = layout::map_value_slot(SlotIndex::from(2), &[1]).to_string();
    ensure!(
        map == "0xe90b7bceb6e7df5418fb78d8ee546e97c83a08bbccc01a0644d599ccd2a7c2e0",
        "map slot {map}"
    );
    let arr = layout::dyn_array_slots(SlotIndex::from(0), 32, 3).map_err(|e| e.to_string())?;
    ensure!(
        arr.slot.to_string()
            == "0x290decd9548b62a8d60345a988386fc84ba6bc95484008f6362f93160ef3e566",
        "array slot {}",
        arr.slot
    );
    Ok("two slots {0:[0,16,17], 1:[0]}; slot 0 = 10 after 30,20,10 with 3 distinct roots; golden vectors match".into())
}

// 12 ----------------------------------------------------------------------

fn conservation() -> Outcome {
    let mut r = rng(12);
    let accounts: Vec<Address> = (0..20u8).map(|i| Address([i + 1; 20])).collect();
    let store = MemoryStore::shared();
    let mut state = WorldState::new(store).map_err(|e| e.to_string())?;
    for a in &accounts {
        state = state
            .put(a, &Account::external(r.gen_range(0..1_000_000)))
            .map_err(|e| e.to_string())?;
    }
    let total = state.total_balance().map_err(|e| e.to_string())?;
    let mut nonces = vec![0u64; accounts.len()];
    let mut parent = genesis_block(&state).header;
    let config = ChainConfig::default();
    let mut failed = 0;
    for block in 0..100 {
        let mut txs = Vec::with_capacity(50);
        for _ in 0..50 {
            let s = r.gen_range(0..accounts.len());
            let to = *accounts.choose(&mut r).expect("accounts");
            // occasionally overspend so failing transfers are exercised too
            let value = if r.gen_bool(0.1) {
                10_000_000
            } else {
                r.gen_range(0..50_000)
            };
            txs.push(Transaction::transfer(accounts[s], nonces[s], to, value));
            nonces[s] += 1;
        }
        let before: Vec<u64> = accounts
            .iter()
            .map(|a| state.get(a).map(|acc| acc.map_or(0, |x| x.nonce)))
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        let (b, next, receipts) =
            seal_block(&parent, txs, vec![], &state, Address::default(), &config)
                .map_err(|e| e.to_string())?;
        failed += receipts.iter().filter(|rc| rc.status == 0).count();
        let sum = next.total_balance().map_err(|e| e.to_string())?;
        ensure!(sum == total, "block {block}: total {sum} != {total}");
        for (i, a) in accounts.iter().enumerate() {
            let n = next
                .get(a)
                .map_err(|e| e.to_string())?
                .map_or(0, |x| x.nonce);
            ensure!(
                n >= before[i],
                "block {block}: nonce of {a} went {} -> {n}",
                before[i]
            );
            ensure!(
                n == nonces[i],
                "block {block}: nonce of {a} is {n}, expected {}",
                nonces[i]
            );
        }
        parent = b.header;
        state = next;
    }
    Ok(format!("5000 transfers ({failed} failed) over 100 blocks; total {total} conserved; nonces monotone"))
}

// -------------------------------------------------------------------------

struct Criterion {
    id: u32,
    name: &'static str,
    limit: Option<Duration>,
    run: fn() -> Outcome,
}

fn main() {
    let criteria = [
        Criterion {
            id: 1,
            name: "rlp known answers",
            limit: Some(Duration::from_secs(1)),
            run: rlp_known_answers,
        },
        Criterion {
            id: 2,
            name: "hex-prefix known answers",
            limit: Some(Duration::from_secs(1)),
            run: hp_known_answers,
        },
        Criterion {
            id: 3,
            name: "keccak gates",
            limit: None,
            run: keccak_gates,
        },
        Criterion {
            id: 4,
            name: "rlp/hp round trip + strict decoder",
            limit: Some(Duration::from_secs(10)),
            run: round_trips,
        },
        Criterion {
            id: 5,
            name: "trie order independence",
            limit: Some(Duration::from_secs(10)),
            run: order_independence,
        },
        Criterion {
            id: 6,
            name: "oracle equivalence",
            limit: Some(Duration::from_secs(10)),
            run: oracle_equivalence,
        },
        Criterion {
            id: 7,
            name: "proof soundness",
            limit: Some(Duration::from_secs(60)),
            run: proof_soundness,
        },
        Criterion {
            id: 8,
            name: "inlining boundary",
            limit: None,
            run: inlining_boundary,
        },
        Criterion {
            id: 9,
            name: "bloom",
            limit: None,
            run: bloom,
        },
        Criterion {
            id: 10,
            name: "authenticated storage",
            limit: Some(Duration::from_secs(5)),
            run: authenticated_storage,
        },
        Criterion {
            id: 11,
            name: "storage layout",
            limit: None,
            run: storage_layout,
        },
        Criterion {
            id: 12,
            name: "balance conservation + nonce monotonicity",
            limit: Some(Duration::from_secs(30)),
            run: conservation,
        },
    ];

    panic::set_hook(Box::new(|_| {}));
    let mut failures = 0;
    for c in &criteria {
        let start = Instant::now();
        let result = panic::catch_unwind(AssertUnwindSafe(c.run)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(format!("panicked: {msg}"))
        });
        let elapsed = start.elapsed();
        let result = match (result, c.limit) {
            (Ok(_), Some(limit)) if elapsed > limit => {
                Err(format!("took {elapsed:.2?}, limit {limit:?}"))
            }
            (r, _) => r,
        };
        match result {
            Ok(detail) => println!("PASS [{:>2}] {}: {detail} ({elapsed:.2?})", c.id, c.name),
            Err(reason) => {
                failures += 1;
                println!("FAIL [{:>2}] {}: {reason} ({elapsed:.2?})", c.id, c.name);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failures} failed",
        criteria.len() - failures
    );
    if failures > 0 {
        std::process::exit(1);
    }
}
