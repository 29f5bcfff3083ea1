//! Per-language counters and the census CSV.
//!
//! A [`LanguageCensus`] is owned by one worker at a time; workers build
//! private censuses and combine them with [`LanguageCensus::merge`], which is
//! a fieldwise sum and therefore commutative and associative with the empty
//! census as identity.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lang_id::LanguageLabel;
use crate::tokenizer::TokenCount;

pub const CSV_HEADER: [&str; 5] = ["language", "tokens", "files", "lines", "bytes"];

#[derive(Debug, Error)]
pub enum CensusError {
    #[error("counter overflow for {0}")]
    Overflow(String),
    #[error("census line {line}: {reason}")]
    Parse { line: u64, reason: String },
    #[error("census CSV error: {0}")]
    Csv(#[from] csv::Error),
    #[error("census I/O error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counters {
    pub tokens: u64,
    pub files: u64,
    pub lines: u64,
    pub bytes: u64,
}

impl Counters {
    fn checked_add(&self, other: &Counters) -> Option<Counters> {
        Some(Counters {
            tokens: self.tokens.checked_add(other.tokens)?,
            files: self.files.checked_add(other.files)?,
            lines: self.lines.checked_add(other.lines)?,
            bytes: self.bytes.checked_add(other.bytes)?,
        })
    }
}

impl From<TokenCount> for Counters {
    fn from(tc: TokenCount) -> Self {
        Counters {
            tokens: tc.tokens,
            files: 1,
            lines: tc.lines,
            bytes: tc.bytes,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LanguageCensus {
    pub entries: BTreeMap<String, Counters>,
    pub unknown: Counters,
}

impl LanguageCensus {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&mut self, label: &LanguageLabel, tc: TokenCount) -> Result<(), CensusError> {
        let add = Counters::from(tc);
        let (slot, name) = match label {
            LanguageLabel::Known(name) => {
                (self.entries.entry(name.to_string()).or_default(), &**name)
            }
            LanguageLabel::Unknown => (&mut self.unknown, "Unknown"),
        };
        *slot = slot
            .checked_add(&add)
            .ok_or_else(|| CensusError::Overflow(name.to_string()))?;
        Ok(())
    }

    pub fn merge(mut self, other: &LanguageCensus) -> Result<LanguageCensus, CensusError> {
        self.merge_from(other)?;
        Ok(self)
    }

    pub fn merge_from(&mut self, other: &LanguageCensus) -> Result<(), CensusError> {
        for (name, c) in &other.entries {
            let slot = self.entries.entry(name.clone()).or_default();
            *slot = slot
                .checked_add(c)
                .ok_or_else(|| CensusError::Overflow(name.clone()))?;
        }
        self.unknown = self
            .unknown
            .checked_add(&other.unknown)
            .ok_or_else(|| CensusError::Overflow("Unknown".into()))?;
        Ok(())
    }

    /// Sum of t_L over classified languages; Unknown is excluded.
    pub fn total_tokens(&self) -> u128 {
        self.entries.values().map(|c| c.tokens as u128).sum()
    }

    pub fn total_files(&self) -> u64 {
        self.entries.values().map(|c| c.files).sum::<u64>() + self.unknown.files
    }

    pub fn snapshot(&self) -> CensusTable {
        CensusTable::from_rows(
            self.entries
                .iter()
                .map(|(language, counters)| CensusRow {
                    language: language.clone(),
                    counters: *counters,
                })
                .collect(),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CensusRow {
    pub language: String,
    pub counters: Counters,
}

impl CensusRow {
    pub fn tokens(&self) -> u64 {
        self.counters.tokens
    }
}

/// Census rows ordered by descending tokens, then ascending language name.
/// Rank 1 is the first row.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CensusTable {
    rows: Vec<CensusRow>,
}

impl CensusTable {
    pub fn from_rows(mut rows: Vec<CensusRow>) -> Self {
        rows.sort_by(|a, b| {
            b.counters
                .tokens
                .cmp(&a.counters.tokens)
                .then_with(|| a.language.cmp(&b.language))
        });
        CensusTable { rows }
    }

    /// Builds a table from `(language, tokens)` pairs with other counters zero.
    pub fn from_tokens<S: Into<String>>(pairs: impl IntoIterator<Item = (S, u64)>) -> Self {
        CensusTable::from_rows(
            pairs
                .into_iter()
                .map(|(language, tokens)| CensusRow {
                    language: language.into(),
                    counters: Counters {
                        tokens,
                        ..Counters::default()
                    },
                })
                .collect(),
        )
    }

    pub fn rows(&self) -> &[CensusRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn tokens(&self) -> Vec<u64> {
        self.rows.iter().map(|r| r.counters.tokens).collect()
    }

    pub fn total_tokens(&self) -> u128 {
        self.rows.iter().map(|r| r.counters.tokens as u128).sum()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), CensusError> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        w.write_record(CSV_HEADER)?;
        for row in &self.rows {
            let c = &row.counters;
            w.write_record([
                row.language.as_str(),
                &c.tokens.to_string(),
                &c.files.to_string(),
                &c.lines.to_string(),
                &c.bytes.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads a census CSV. Only `language` and `tokens` columns are required;
    /// `files`, `lines` and `bytes` default to zero and any other column is
    /// ignored, so classification tables can be read back as censuses.
    pub fn read_csv<R: Read>(input: R) -> Result<CensusTable, CensusError> {
        let mut r = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_reader(input);
        let headers = r.headers()?.clone();
        let col = |name: &str| headers.iter().position(|h| h.trim() == name);
        let header_err = |reason: &str| CensusError::Parse {
            line: 1,
            reason: reason.to_string(),
        };
        let lang_col = col("language").ok_or_else(|| header_err("missing `language` column"))?;
        let tokens_col = col("tokens").ok_or_else(|| header_err("missing `tokens` column"))?;
        let optional = [col("files"), col("lines"), col("bytes")];

        let mut seen = std::collections::HashSet::new();
        let mut rows = Vec::new();
        for record in r.records() {
            let record = record.map_err(|e| match e.position() {
                Some(pos) => CensusError::Parse {
                    line: pos.line(),
                    reason: e.to_string(),
                },
                None => CensusError::Csv(e),
            })?;
            let line = record.position().map(|p| p.line()).unwrap_or(0);
            let field = |idx: usize| record.get(idx).unwrap_or("").trim();
            let number = |idx: Option<usize>, name: &str| -> Result<u64, CensusError> {
                match idx {
                    None => Ok(0),
                    Some(i) => field(i).parse().map_err(|_| CensusError::Parse {
                        line,
                        reason: format!("`{name}` is not a non-negative integer: {:?}", field(i)),
                    }),
                }
            };
            let language = field(lang_col).to_string();
            if language.is_empty() {
                return Err(CensusError::Parse {
                    line,
                    reason: "empty language name".into(),
                });
            }
            if !seen.insert(language.clone()) {
                return Err(CensusError::Parse {
                    line,
                    reason: format!("duplicate language {language:?}"),
                });
            }
            let counters = Counters {
                tokens: number(Some(tokens_col), "tokens")?,
                files: number(optional[0], "files")?,
                lines: number(optional[1], "lines")?,
                bytes: number(optional[2], "bytes")?,
            };
            rows.push(CensusRow { language, counters });
        }
        Ok(CensusTable::from_rows(rows))
    }
}
