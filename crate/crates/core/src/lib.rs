//! # code_census
//!
//! Resource accounting for source-code corpora. A scan runs three stages over
//! every ingested file:
//!
//! ```text
//!  ingest ──> dedup (SHA-256) ──> lang_id (extension map) ──> tokenizer ──> census
//! ```
//!
//! and the resulting per-language census is then classified into four
//! resource tiers and summarised with inequality statistics:
//!
//! - [`ingest`]: directory walks and newline-delimited record dumps as a
//!   uniform stream of [`FileRecord`]s.
//! - [`dedup`]: exact file-level deduplication by content digest.
//! - [`lang_id`]: language labels from file names and extensions.
//! - [`tokenizer`]: byte-level BPE token counting with a whitespace fallback.
//! - [`census`]: per-language counters, mergeable across workers, and the
//!   census CSV format.
//! - [`taxonomy`]: tier assignment, tier summaries, Gini, CV, Lorenz curves,
//!   ECDF survival and top/bottom-k tables.
//! - [`pipeline`]: the parallel scan driver used by the CLI.
//! - [`report`]: writers for classification, statistics and plot data files.

pub mod census;
pub mod dedup;
pub mod ingest;
pub mod lang_id;
pub mod pipeline;
pub mod report;
pub mod taxonomy;
pub mod tokenizer;

pub use census::{CensusRow, CensusTable, Counters, LanguageCensus};
pub use dedup::{digest, ContentDigest, DedupLedger, DedupStats};
pub use ingest::{FileRecord, IngestStats};
pub use lang_id::{ExtensionMap, LanguageLabel};
pub use taxonomy::{Tier, TierSummary, TierThresholds};
pub use tokenizer::{BpeModel, TokenCount};
