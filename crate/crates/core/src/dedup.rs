//! Exact file-level deduplication.
//!
//! Files are identified by the SHA-256 digest of their content alone. The
//! [`DedupLedger`] remembers every digest it has admitted; the first admit of
//! a digest wins and every later one, from any corpus, is a duplicate.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::fs;
use std::io;
use std::path::Path;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub const DEFAULT_SHARDS: usize = 256;

#[derive(Debug, Error)]
pub enum LedgerError {
    #[error("shard count must be at least 1")]
    NoShards,
    #[error("ledger file {0} has a length that is not a multiple of 32")]
    Truncated(String),
    #[error("ledger I/O error: {0}")]
    Io(#[from] io::Error),
}

/// SHA-256 of a file's content.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ContentDigest(pub [u8; 32]);

impl ContentDigest {
    pub fn as_bytes(&self) -> &[u8; 32] {
        &self.0
    }

    pub fn to_hex(&self) -> String {
        hex::encode(self.0)
    }

    fn prefix(&self) -> u32 {
        u32::from_be_bytes([self.0[0], self.0[1], self.0[2], self.0[3]])
    }
}

impl fmt::Debug for ContentDigest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ContentDigest({})", self.to_hex())
    }
}

impl fmt::Display for ContentDigest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

pub fn digest(content: &[u8]) -> ContentDigest {
    ContentDigest(Sha256::digest(content).into())
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DedupStats {
    pub total_seen: u64,
    pub unique: u64,
    pub duplicates: u64,
    pub duplicates_per_corpus: BTreeMap<String, u64>,
}

impl DedupStats {
    fn record(&mut self, admitted: bool, corpus_id: &str) {
        self.total_seen += 1;
        if admitted {
            self.unique += 1;
        } else {
            self.duplicates += 1;
            *self
                .duplicates_per_corpus
                .entry(corpus_id.to_string())
                .or_insert(0) += 1;
        }
    }

    pub fn merge(&mut self, other: &DedupStats) {
        self.total_seen += other.total_seen;
        self.unique += other.unique;
        self.duplicates += other.duplicates;
        for (id, n) in &other.duplicates_per_corpus {
            *self.duplicates_per_corpus.entry(id.clone()).or_insert(0) += n;
        }
    }
}

struct Shard {
    seen: HashSet<ContentDigest>,
    stats: DedupStats,
}

/// Set of admitted digests, sharded by digest prefix.
///
/// `admit` takes `&self` and is safe to call from many threads; each shard
/// has its own lock, so exactly one caller gets `true` for a given digest.
pub struct DedupLedger {
    shards: Vec<Mutex<Shard>>,
}

impl DedupLedger {
    pub fn new(shard_count: usize) -> Result<Self, LedgerError> {
        if shard_count == 0 {
            return Err(LedgerError::NoShards);
        }
        let shards = (0..shard_count)
            .map(|_| {
                Mutex::new(Shard {
                    seen: HashSet::new(),
                    stats: DedupStats::default(),
                })
            })
            .collect();
        Ok(DedupLedger { shards })
    }

    pub fn shard_count(&self) -> usize {
        self.shards.len()
    }

    fn shard_of(&self, d: &ContentDigest) -> usize {
        (d.prefix() as usize) % self.shards.len()
    }

    /// Returns true iff `d` has never been admitted before.
    pub fn admit(&self, d: ContentDigest, corpus_id: &str) -> bool {
        let mut shard = self.shards[self.shard_of(&d)]
            .lock()
            .expect("ledger shard poisoned");
        let fresh = shard.seen.insert(d);
        shard.stats.record(fresh, corpus_id);
        fresh
    }

    pub fn contains(&self, d: &ContentDigest) -> bool {
        self.shards[self.shard_of(d)]
            .lock()
            .expect("ledger shard poisoned")
            .seen
            .contains(d)
    }

    /// Number of distinct digests held, including any loaded from disk.
    pub fn len(&self) -> usize {
        self.shards
            .iter()
            .map(|s| s.lock().expect("ledger shard poisoned").seen.len())
            .sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn stats(&self) -> DedupStats {
        let mut total = DedupStats::default();
        for shard in &self.shards {
            total.merge(&shard.lock().expect("ledger shard poisoned").stats);
        }
        total
    }

    /// Writes one `shard-NNNNN-of-MMMMM.bin` file per shard: the shard's
    /// digests sorted ascending and concatenated as raw 32-byte values.
    pub fn save(&self, dir: &Path) -> Result<(), LedgerError> {
        fs::create_dir_all(dir)?;
        let n = self.shards.len();
        for (i, shard) in self.shards.iter().enumerate() {
            let mut digests: Vec<ContentDigest> = shard
                .lock()
                .expect("ledger shard poisoned")
                .seen
                .iter()
                .copied()
                .collect();
            digests.sort_unstable();
            let mut buf = Vec::with_capacity(digests.len() * 32);
            for d in &digests {
                buf.extend_from_slice(&d.0);
            }
            fs::write(dir.join(format!("shard-{i:05}-of-{n:05}.bin")), buf)?;
        }
        Ok(())
    }

    /// Loads every `shard-*.bin` file in `dir` into a ledger with
    /// `shard_count` shards. Digests are re-sharded, so the on-disk shard
    /// count need not match. Loaded digests do not count towards the stats.
    pub fn load(dir: &Path, shard_count: usize) -> Result<Self, LedgerError> {
        let ledger = DedupLedger::new(shard_count)?;
        let mut files: Vec<_> = fs::read_dir(dir)?
            .filter_map(|e| e.ok())
            .map(|e| e.path())
            .filter(|p| {
                p.file_name()
                    .and_then(|n| n.to_str())
                    .is_some_and(|n| n.starts_with("shard-") && n.ends_with(".bin"))
            })
            .collect();
        files.sort();
        for path in files {
            let bytes = fs::read(&path)?;
            if bytes.len() % 32 != 0 {
                return Err(LedgerError::Truncated(path.display().to_string()));
            }
            for chunk in bytes.chunks_exact(32) {
                let d = ContentDigest(chunk.try_into().expect("32-byte chunk"));
                let idx = ledger.shard_of(&d);
                ledger.shards[idx]
                    .lock()
                    .expect("ledger shard poisoned")
                    .seen
                    .insert(d);
            }
        }
        Ok(ledger)
    }
}

impl Default for DedupLedger {
    fn default() -> Self {
        DedupLedger::new(DEFAULT_SHARDS).expect("non-zero shard count")
    }
}
