//! Corpus sources: directory trees and newline-delimited record dumps.
//!
//! Both sources yield [`FileRecord`]s in a deterministic order and keep an
//! [`IngestStats`] tally of what was emitted, skipped or failed to decode.
//! Per-item problems never abort a stream; only a missing root or an
//! unreadable dump file is fatal.

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, BufRead};
use std::path::{Path, PathBuf};

use base64::Engine;
use serde::{Deserialize, Serialize};
use thiserror::Error;
use walkdir::WalkDir;

/// Default per-file size cap: 1 MiB.
pub const DEFAULT_MAX_FILE_BYTES: u64 = 1 << 20;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("corpus root {0} does not exist")]
    MissingRoot(PathBuf),
    #[error("corpus root {0} is not a directory")]
    NotADirectory(PathBuf),
    #[error("invalid record path {0:?}: must be non-empty and contain no NUL bytes")]
    InvalidPath(String),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

/// One source file in flight.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FileRecord {
    pub corpus_id: String,
    pub path: String,
    pub content: Vec<u8>,
}

impl FileRecord {
    pub fn new(
        corpus_id: impl Into<String>,
        path: impl Into<String>,
        content: Vec<u8>,
    ) -> Result<Self, IngestError> {
        let path = path.into();
        if path.is_empty() || path.contains('\0') {
            return Err(IngestError::InvalidPath(path));
        }
        Ok(FileRecord {
            corpus_id: corpus_id.into(),
            path,
            content,
        })
    }

    pub fn byte_size(&self) -> u64 {
        self.content.len() as u64
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestStats {
    pub files_emitted: u64,
    pub files_skipped: u64,
    pub decode_errors: u64,
    pub per_corpus: BTreeMap<String, u64>,
}

impl IngestStats {
    fn emitted(&mut self, corpus_id: &str) {
        self.files_emitted += 1;
        *self.per_corpus.entry(corpus_id.to_string()).or_insert(0) += 1;
    }

    /// Every item a source looked at lands in exactly one of the three buckets.
    pub fn examined(&self) -> u64 {
        self.files_emitted + self.files_skipped + self.decode_errors
    }

    pub fn merge(&mut self, other: &IngestStats) {
        self.files_emitted += other.files_emitted;
        self.files_skipped += other.files_skipped;
        self.decode_errors += other.decode_errors;
        for (id, n) in &other.per_corpus {
            *self.per_corpus.entry(id.clone()).or_insert(0) += n;
        }
    }
}

/// Regular files under a directory, lexicographic by relative path.
///
/// Symbolic links are not followed and `.git` directories are pruned. The
/// listing is collected up front so the order is independent of the
/// filesystem's readdir order; contents are read lazily.
#[derive(Debug)]
pub struct DirWalker {
    corpus_id: String,
    entries: std::vec::IntoIter<(String, PathBuf)>,
    max_file_bytes: Option<u64>,
    stats: IngestStats,
}

pub fn walk_directory(
    root: &Path,
    corpus_id: &str,
    max_file_bytes: Option<u64>,
) -> Result<DirWalker, IngestError> {
    let meta = fs::metadata(root).map_err(|e| match e.kind() {
        io::ErrorKind::NotFound => IngestError::MissingRoot(root.to_path_buf()),
        _ => IngestError::Io {
            path: root.to_path_buf(),
            source: e,
        },
    })?;
    if !meta.is_dir() {
        return Err(IngestError::NotADirectory(root.to_path_buf()));
    }

    let mut stats = IngestStats::default();
    let mut entries = Vec::new();
    let walk = WalkDir::new(root)
        .follow_links(false)
        .into_iter()
        .filter_entry(|e| !(e.file_type().is_dir() && e.file_name() == ".git"));
    for entry in walk {
        let entry = match entry {
            Ok(entry) => entry,
            Err(err) => {
                log_skip(&err);
                stats.files_skipped += 1;
                continue;
            }
        };
        if !entry.file_type().is_file() {
            continue;
        }
        let rel = entry
            .path()
            .strip_prefix(root)
            .unwrap_or(entry.path())
            .components()
            .map(|c| c.as_os_str().to_string_lossy())
            .collect::<Vec<_>>()
            .join("/");
        entries.push((rel, entry.into_path()));
    }
    entries.sort_by(|a, b| a.0.cmp(&b.0));

    Ok(DirWalker {
        corpus_id: corpus_id.to_string(),
        entries: entries.into_iter(),
        max_file_bytes,
        stats,
    })
}

fn log_skip(err: &dyn std::fmt::Display) {
    if std::env::var_os("CODE_CENSUS_VERBOSE").is_some() {
        eprintln!("skipped: {err}");
    }
}

impl DirWalker {
    pub fn stats(&self) -> &IngestStats {
        &self.stats
    }

    pub fn into_stats(self) -> IngestStats {
        self.stats
    }

    fn read(&self, path: &Path) -> io::Result<Option<Vec<u8>>> {
        if let Some(cap) = self.max_file_bytes {
            if fs::metadata(path)?.len() > cap {
                return Ok(None);
            }
        }
        let content = fs::read(path)?;
        match self.max_file_bytes {
            Some(cap) if content.len() as u64 > cap => Ok(None),
            _ => Ok(Some(content)),
        }
    }
}

impl Iterator for DirWalker {
    type Item = FileRecord;

    fn next(&mut self) -> Option<FileRecord> {
        while let Some((rel, abs)) = self.entries.next() {
            match self.read(&abs) {
                Ok(Some(content)) => match FileRecord::new(self.corpus_id.as_str(), rel, content) {
                    Ok(rec) => {
                        self.stats.emitted(&self.corpus_id);
                        return Some(rec);
                    }
                    Err(err) => {
                        log_skip(&err);
                        self.stats.files_skipped += 1;
                    }
                },
                Ok(None) => self.stats.files_skipped += 1,
                Err(err) => {
                    log_skip(&format!("{}: {err}", abs.display()));
                    self.stats.files_skipped += 1;
                }
            }
        }
        None
    }
}

#[derive(Deserialize)]
struct RawRecord {
    path: String,
    content: Option<String>,
    content_b64: Option<String>,
}

/// Records from a newline-delimited JSON dump, in input order.
///
/// Each line carries `path` and exactly one of `content` (text) or
/// `content_b64` (standard base64). Blank lines are ignored. A read error
/// ends the stream; it is kept and can be retrieved with
/// [`RecordReader::take_error`].
pub struct RecordReader<R> {
    input: R,
    corpus_id: String,
    max_file_bytes: Option<u64>,
    stats: IngestStats,
    line: Vec<u8>,
    error: Option<io::Error>,
}

pub fn read_records<R: BufRead>(
    input: R,
    corpus_id: &str,
    max_file_bytes: Option<u64>,
) -> RecordReader<R> {
    RecordReader {
        input,
        corpus_id: corpus_id.to_string(),
        max_file_bytes,
        stats: IngestStats::default(),
        line: Vec::new(),
        error: None,
    }
}

/// Opens a dump file for [`read_records`].
pub fn open_records(
    path: &Path,
    corpus_id: &str,
    max_file_bytes: Option<u64>,
) -> Result<RecordReader<io::BufReader<fs::File>>, IngestError> {
    let file = fs::File::open(path).map_err(|e| match e.kind() {
        io::ErrorKind::NotFound => IngestError::MissingRoot(path.to_path_buf()),
        _ => IngestError::Io {
            path: path.to_path_buf(),
            source: e,
        },
    })?;
    Ok(read_records(
        io::BufReader::new(file),
        corpus_id,
        max_file_bytes,
    ))
}

fn decode_line(line: &[u8], corpus_id: &str) -> Option<FileRecord> {
    let raw: RawRecord = serde_json::from_slice(line).ok()?;
    let content = match (raw.content, raw.content_b64) {
        (Some(text), None) => text.into_bytes(),
        (None, Some(b64)) => base64::engine::general_purpose::STANDARD
            .decode(b64.as_bytes())
            .ok()?,
        _ => return None,
    };
    FileRecord::new(corpus_id, raw.path, content).ok()
}

impl<R> RecordReader<R> {
    pub fn stats(&self) -> &IngestStats {
        &self.stats
    }

    pub fn into_stats(self) -> IngestStats {
        self.stats
    }

    pub fn take_error(&mut self) -> Option<io::Error> {
        self.error.take()
    }
}

impl<R: BufRead> Iterator for RecordReader<R> {
    type Item = FileRecord;

    fn next(&mut self) -> Option<FileRecord> {
        if self.error.is_some() {
            return None;
        }
        loop {
            self.line.clear();
            match self.input.read_until(b'\n', &mut self.line) {
                Ok(0) => return None,
                Ok(_) => {}
                Err(err) => {
                    self.error = Some(err);
                    return None;
                }
            }
            if self.line.iter().all(u8::is_ascii_whitespace) {
                continue;
            }
            match decode_line(&self.line, &self.corpus_id) {
                Some(rec) => {
                    if matches!(self.max_file_bytes, Some(cap) if rec.byte_size() > cap) {
                        self.stats.files_skipped += 1;
                        continue;
                    }
                    self.stats.emitted(&self.corpus_id);
                    return Some(rec);
                }
                None => self.stats.decode_errors += 1,
            }
        }
    }
}
