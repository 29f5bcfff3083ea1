//! The scan driver: ingest → dedup → tag → count → census.
//!
//! Records are processed in batches. Within a batch, digests are computed in
//! parallel, then admitted to the ledger in stream order so first-seen
//! attribution does not depend on scheduling. Admitted files are tagged and
//! tokenized in parallel into per-worker censuses that are merged at the end
//! of the batch. The result is identical for any worker count.

use std::io;
use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::census::{CensusError, LanguageCensus};
use crate::dedup::{digest, DedupLedger, DedupStats};
use crate::ingest::{self, FileRecord, IngestError, IngestStats};
use crate::lang_id::ExtensionMap;
use crate::tokenizer::Tokenizer;

const BATCH_FILES: usize = 4096;
const BATCH_BYTES: u64 = 64 << 20;

#[derive(Debug, Error)]
pub enum ScanError {
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Census(#[from] CensusError),
    #[error("reading records for corpus {corpus}: {source}")]
    Read {
        corpus: String,
        #[source]
        source: io::Error,
    },
    #[error("cannot start worker pool: {0}")]
    Pool(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SourceKind {
    Directory,
    Records,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusSource {
    pub id: String,
    pub kind: SourceKind,
    pub path: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScanOptions {
    pub workers: usize,
    pub max_file_bytes: Option<u64>,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            workers: 1,
            max_file_bytes: Some(ingest::DEFAULT_MAX_FILE_BYTES),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScanOutput {
    pub census: LanguageCensus,
    pub dedup: DedupStats,
    pub ingest: IngestStats,
}

enum Source {
    Dir(ingest::DirWalker),
    Records(ingest::RecordReader<io::BufReader<std::fs::File>>),
}

impl Source {
    fn open(src: &CorpusSource, max_file_bytes: Option<u64>) -> Result<Self, IngestError> {
        Ok(match src.kind {
            SourceKind::Directory => {
                Source::Dir(ingest::walk_directory(&src.path, &src.id, max_file_bytes)?)
            }
            SourceKind::Records => {
                Source::Records(ingest::open_records(&src.path, &src.id, max_file_bytes)?)
            }
        })
    }

    fn next_record(&mut self) -> Option<FileRecord> {
        match self {
            Source::Dir(it) => it.next(),
            Source::Records(it) => it.next(),
        }
    }

    fn finish(self, corpus: &str) -> Result<IngestStats, ScanError> {
        match self {
            Source::Dir(it) => Ok(it.into_stats()),
            Source::Records(mut it) => match it.take_error() {
                Some(source) => Err(ScanError::Read {
                    corpus: corpus.to_string(),
                    source,
                }),
                None => Ok(it.into_stats()),
            },
        }
    }
}

/// Scans `sources` in the given order. The ledger may already hold digests
/// (a resumed run); its stats are reported as accumulated after the scan.
pub fn scan(
    sources: &[CorpusSource],
    map: &ExtensionMap,
    tokenizer: &Tokenizer,
    ledger: &DedupLedger,
    opts: ScanOptions,
) -> Result<ScanOutput, ScanError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.workers.max(1))
        .build()
        .map_err(|e| ScanError::Pool(e.to_string()))?;

    let mut census = LanguageCensus::new();
    let mut ingest_stats = IngestStats::default();
    for src in sources {
        let mut source = Source::open(src, opts.max_file_bytes)?;
        loop {
            let batch = next_batch(&mut source);
            if batch.is_empty() {
                break;
            }
            let part = pool.install(|| process_batch(&batch, map, tokenizer, ledger))?;
            census.merge_from(&part)?;
        }
        ingest_stats.merge(&source.finish(&src.id)?);
    }

    Ok(ScanOutput {
        census,
        dedup: ledger.stats(),
        ingest: ingest_stats,
    })
}

fn next_batch(source: &mut Source) -> Vec<FileRecord> {
    let mut batch = Vec::new();
    let mut bytes = 0;
    while batch.len() < BATCH_FILES && bytes < BATCH_BYTES {
        match source.next_record() {
            Some(rec) => {
                bytes += rec.byte_size();
                batch.push(rec);
            }
            None => break,
        }
    }
    batch
}

fn process_batch(
    batch: &[FileRecord],
    map: &ExtensionMap,
    tokenizer: &Tokenizer,
    ledger: &DedupLedger,
) -> Result<LanguageCensus, CensusError> {
    let digests: Vec<_> = batch.par_iter().map(|r| digest(&r.content)).collect();
    let admitted: Vec<bool> = batch
        .iter()
        .zip(digests)
        .map(|(rec, d)| ledger.admit(d, &rec.corpus_id))
        .collect();

    batch
        .par_iter()
        .zip(admitted.par_iter())
        .filter(|(_, &keep)| keep)
        .try_fold(LanguageCensus::new, |mut census, (rec, _)| {
            let label = map.identify(&rec.path);
            census.record(&label, tokenizer.count(&rec.content))?;
            Ok(census)
        })
        .try_reduce(LanguageCensus::new, |a, b| a.merge(&b))
}
