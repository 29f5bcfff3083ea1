//! Output files.
//!
//! `scan` writes `census.csv`, `dedup.json` and `manifest.json`.
//! `classify` writes `classification.csv`, `tier_summary.csv` and
//! `top_bottom.csv`. `stats` writes `stats.json` plus two-column plot data:
//! `lorenz_<group>.tsv` and `survival_<group>.tsv` for `overall` and each
//! tier that has data. All writers are deterministic for a given input.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::census::{CensusError, CensusTable, Counters};
use crate::dedup::DedupStats;
use crate::ingest::IngestStats;
use crate::pipeline::{CorpusSource, ScanOutput};
use crate::taxonomy::{
    self, assign_tier, format_percent, StatsError, StatsSummary, Tier, TierSummary, TierThresholds,
};

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("writing {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error(transparent)]
    Census(#[from] CensusError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error("serializing {0}: {1}")]
    Json(String, serde_json::Error),
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), ReportError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|source| ReportError::Io {
            path: parent.to_path_buf(),
            source,
        })?;
    }
    fs::write(path, bytes).map_err(|source| ReportError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), ReportError> {
    let mut bytes = serde_json::to_vec_pretty(value)
        .map_err(|e| ReportError::Json(path.display().to_string(), e))?;
    bytes.push(b'\n');
    write_file(path, &bytes)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Everything needed to re-run a scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub corpora: Vec<CorpusSource>,
    /// `None` selects the bundled map.
    pub map: Option<PathBuf>,
    pub vocab: Option<PathBuf>,
    pub merges: Option<PathBuf>,
    pub thresholds: TierThresholds,
    pub workers: usize,
    pub out: PathBuf,
    pub max_file_bytes: Option<u64>,
    pub ledger: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapIdentity {
    pub source: String,
    pub sha256: String,
    pub languages: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TokenizerIdentity {
    pub kind: String,
    pub vocab_sha256: Option<String>,
    pub merges_sha256: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub config: RunConfig,
    pub map: MapIdentity,
    pub tokenizer: TokenizerIdentity,
}

impl Manifest {
    pub fn new(config: RunConfig, map: MapIdentity, tokenizer: TokenizerIdentity) -> Self {
        Manifest {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            config,
            map,
            tokenizer,
        }
    }

    pub fn load(path: &Path) -> Result<Manifest, ReportError> {
        let bytes = fs::read(path).map_err(|source| ReportError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        serde_json::from_slice(&bytes).map_err(|e| ReportError::Json(path.display().to_string(), e))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub tokenizer: String,
    pub dedup: DedupStats,
    pub ingest: IngestStats,
    pub unknown: Counters,
    pub languages: usize,
}

pub fn write_scan(
    out_dir: &Path,
    scan: &ScanOutput,
    manifest: &Manifest,
) -> Result<(), ReportError> {
    let mut census = Vec::new();
    scan.census.snapshot().write_csv(&mut census)?;
    write_file(&out_dir.join("census.csv"), &census)?;
    write_json(
        &out_dir.join("dedup.json"),
        &ScanReport {
            tokenizer: manifest.tokenizer.kind.clone(),
            dedup: scan.dedup.clone(),
            ingest: scan.ingest.clone(),
            unknown: scan.census.unknown,
            languages: scan.census.entries.len(),
        },
    )?;
    write_json(&out_dir.join("manifest.json"), manifest)
}

pub fn read_census(path: &Path) -> Result<CensusTable, ReportError> {
    let file = fs::File::open(path).map_err(|source| ReportError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(CensusTable::read_csv(io::BufReader::new(file))?)
}

fn csv_bytes(header: &[&str], rows: &[Vec<String>]) -> Result<Vec<u8>, ReportError> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let to_err = |e: csv::Error| ReportError::Census(CensusError::Csv(e));
    w.write_record(header).map_err(to_err)?;
    for row in rows {
        w.write_record(row).map_err(to_err)?;
    }
    w.into_inner()
        .map_err(|e| ReportError::Census(CensusError::Io(e.into_error())))
}

/// Per-language classification rows: the full taxonomy listing.
pub fn classification_rows(table: &CensusTable, th: &TierThresholds) -> Vec<Vec<String>> {
    let total = table.total_tokens();
    let mut tier_totals = [0u128; 4];
    for row in table.rows() {
        tier_totals[assign_tier(row.tokens(), th) as usize] += row.tokens() as u128;
    }
    let share = |part: u64, whole: u128| {
        if whole == 0 {
            0.0
        } else {
            part as f64 / whole as f64
        }
    };
    table
        .rows()
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let tier = assign_tier(row.tokens(), th);
            let c = &row.counters;
            vec![
                (i + 1).to_string(),
                row.language.clone(),
                c.tokens.to_string(),
                c.files.to_string(),
                c.lines.to_string(),
                c.bytes.to_string(),
                tier.index().to_string(),
                tier.name().to_string(),
                format_percent(share(c.tokens, total)),
                format_percent(share(c.tokens, tier_totals[tier as usize])),
            ]
        })
        .collect()
}

pub const CLASSIFICATION_HEADER: [&str; 10] = [
    "rank",
    "language",
    "tokens",
    "files",
    "lines",
    "bytes",
    "tier",
    "resource",
    "token_share_pct",
    "tier_share_pct",
];

pub const TIER_SUMMARY_HEADER: [&str; 8] = [
    "tier",
    "resource",
    "languages",
    "tokens",
    "language_share",
    "token_share",
    "language_share_pct",
    "token_share_pct",
];

pub fn tier_summary_rows(summary: &TierSummary) -> Vec<Vec<String>> {
    summary
        .rows
        .iter()
        .map(|r| {
            vec![
                r.tier.index().to_string(),
                r.tier.name().to_string(),
                r.n_languages.to_string(),
                r.total_tokens.to_string(),
                r.language_share.to_string(),
                r.token_share.to_string(),
                format_percent(r.language_share),
                format_percent(r.token_share),
            ]
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    pub summary: TierSummary,
    pub top: Vec<taxonomy::RankedLanguage>,
    pub bottom: Vec<taxonomy::RankedLanguage>,
}

pub fn write_classification(
    out_dir: &Path,
    table: &CensusTable,
    th: &TierThresholds,
    k: usize,
) -> Result<Classification, ReportError> {
    let summary = taxonomy::tier_summary(table, th)?;
    let (top, bottom) = taxonomy::top_bottom(table, k, th)?;

    write_file(
        &out_dir.join("classification.csv"),
        &csv_bytes(&CLASSIFICATION_HEADER, &classification_rows(table, th))?,
    )?;
    write_file(
        &out_dir.join("tier_summary.csv"),
        &csv_bytes(&TIER_SUMMARY_HEADER, &tier_summary_rows(&summary))?,
    )?;
    let ranked = |section: &str, list: &[taxonomy::RankedLanguage]| {
        list.iter()
            .map(|r| {
                vec![
                    section.to_string(),
                    r.rank.to_string(),
                    r.language.clone(),
                    r.tokens.to_string(),
                    r.tier.index().to_string(),
                    r.tier.name().to_string(),
                ]
            })
            .collect::<Vec<_>>()
    };
    let mut rows = ranked("top", &top);
    rows.extend(ranked("bottom", &bottom));
    write_file(
        &out_dir.join("top_bottom.csv"),
        &csv_bytes(
            &["section", "rank", "language", "tokens", "tier", "resource"],
            &rows,
        )?,
    )?;
    Ok(Classification {
        summary,
        top,
        bottom,
    })
}

/// One grouping in `stats.json`. `stats` is `None` when the group has no
/// language with tokens > 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupStats {
    pub group: String,
    pub languages: usize,
    pub absent: bool,
    #[serde(flatten)]
    pub stats: Option<StatsSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsReport {
    pub thresholds: TierThresholds,
    pub groups: Vec<GroupStats>,
}

impl StatsReport {
    pub fn group(&self, name: &str) -> Option<&GroupStats> {
        self.groups.iter().find(|g| g.group == name)
    }
}

pub fn compute_stats(
    table: &CensusTable,
    th: &TierThresholds,
    grid: &[f64],
) -> Result<StatsReport, ReportError> {
    if grid.is_empty() {
        return Err(StatsError::EmptyGrid.into());
    }
    let mut groups = Vec::new();
    let mut push = |name: &str, values: Vec<u64>| -> Result<(), ReportError> {
        let stats = if values.iter().any(|&v| v > 0) {
            Some(taxonomy::summarize(&values, grid)?)
        } else {
            None
        };
        groups.push(GroupStats {
            group: name.to_string(),
            languages: values.len(),
            absent: stats.is_none(),
            stats,
        });
        Ok(())
    };
    push("overall", table.tokens())?;
    for tier in Tier::DESCENDING {
        push(
            &tier.name().to_lowercase(),
            taxonomy::tier_values(table, th, tier),
        )?;
    }
    Ok(StatsReport {
        thresholds: *th,
        groups,
    })
}

fn two_columns(header: &str, points: &[(f64, f64)]) -> Vec<u8> {
    let mut s = format!("# {header}\n");
    for (x, y) in points {
        let _ = writeln!(s, "{x}\t{y}");
    }
    s.into_bytes()
}

pub fn write_stats(
    out_dir: &Path,
    table: &CensusTable,
    th: &TierThresholds,
    grid: &[f64],
) -> Result<StatsReport, ReportError> {
    let report = compute_stats(table, th, grid)?;
    write_json(&out_dir.join("stats.json"), &report)?;
    for g in &report.groups {
        if let Some(s) = &g.stats {
            write_file(
                &out_dir.join(format!("lorenz_{}.tsv", g.group)),
                &two_columns("population_share\ttoken_share", &s.lorenz),
            )?;
            write_file(
                &out_dir.join(format!("survival_{}.tsv", g.group)),
                &two_columns("threshold_tokens\tsurviving_fraction", &s.survival),
            )?;
        }
    }
    Ok(report)
}

fn billions(tokens: u128) -> String {
    format!("{:.1}B", tokens as f64 / 1e9)
}

/// Plain-text overview combining the tier table, top/bottom lists and
/// per-group statistics.
pub fn render_summary(class: &Classification, stats: &StatsReport) -> String {
    let mut s = String::new();
    let summary = &class.summary;
    let _ = writeln!(
        s,
        "{} languages, {} tokens ({})\n",
        summary.n_languages,
        summary.total_tokens,
        billions(summary.total_tokens)
    );
    let _ = writeln!(
        s,
        "{:<8} {:>6} {:>16} {:>8} {:>8}",
        "tier", "langs", "tokens", "lang%", "tok%"
    );
    for r in &summary.rows {
        let _ = writeln!(
            s,
            "{:<8} {:>6} {:>16} {:>8} {:>8}",
            r.tier.name(),
            r.n_languages,
            billions(r.total_tokens),
            format_percent(r.language_share),
            format_percent(r.token_share)
        );
    }
    for (title, list) in [("top", &class.top), ("bottom", &class.bottom)] {
        let _ = writeln!(s, "\n{title}:");
        for r in list {
            let _ = writeln!(
                s,
                "{:>5}  {:<32} {:<6} {}",
                r.rank,
                r.language,
                r.tier.name(),
                r.tokens
            );
        }
    }
    let _ = writeln!(
        s,
        "\n{:<8} {:>6} {:>8} {:>8} {:>16} {:>16}",
        "group", "n", "gini", "cv", "mean", "median"
    );
    for g in &stats.groups {
        match &g.stats {
            Some(st) => {
                let _ = writeln!(
                    s,
                    "{:<8} {:>6} {:>8.4} {:>8.4} {:>16.1} {:>16.1}",
                    g.group, st.n, st.gini, st.cv, st.mean, st.median
                );
            }
            None => {
                let _ = writeln!(s, "{:<8} {:>6} absent", g.group, g.languages);
            }
        }
    }
    s
}

pub fn write_summary(out_dir: &Path, text: &str) -> Result<(), ReportError> {
    write_file(&out_dir.join("summary.txt"), text.as_bytes())
}

/// Writes to stdout, ignoring a closed pipe.
pub fn print(text: &str) {
    let _ = io::stdout().write_all(text.as_bytes());
}
