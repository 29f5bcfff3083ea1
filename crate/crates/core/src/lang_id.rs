//! Language labels from file paths.
//!
//! Labels come from an [`ExtensionMap`]: exact filename rules first, then
//! extension rules tried longest suffix first (so `x.blade.php` can hit a
//! `.blade.php` rule before `.php`). Anything else is [`LanguageLabel::Unknown`].
//!
//! Map files are line based:
//!
//! ```text
//! # comment
//! ext .py Python
//! file Makefile Makefile
//! override .h C
//! ```
//!
//! The language is the rest of the line and may contain spaces. An extension
//! claimed by two languages must be resolved by an `override` line.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::path::Path;
use std::sync::Arc;

use thiserror::Error;

/// Linguist-derived default map shipped with the crate.
pub const BUNDLED_MAP: &str = include_str!("../data/linguist.map");

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MapError {
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("extension .{ext} is claimed by both {first} and {second} and has no override")]
    ConflictingExtension {
        ext: String,
        first: String,
        second: String,
    },
    #[error("line {line}: filename {name} is already mapped to {existing}, not {language}")]
    ConflictingFilename {
        line: usize,
        name: String,
        existing: String,
        language: String,
    },
    #[error("line {line}: override for .{ext} already set to {existing}")]
    ConflictingOverride {
        line: usize,
        ext: String,
        existing: String,
    },
    #[error("cannot read map file: {0}")]
    Io(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LanguageLabel {
    Known(Arc<str>),
    Unknown,
}

impl LanguageLabel {
    pub fn name(&self) -> Option<&str> {
        match self {
            LanguageLabel::Known(name) => Some(name),
            LanguageLabel::Unknown => None,
        }
    }

    pub fn is_unknown(&self) -> bool {
        matches!(self, LanguageLabel::Unknown)
    }
}

impl fmt::Display for LanguageLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LanguageLabel::Known(name) => f.write_str(name),
            LanguageLabel::Unknown => f.write_str("Unknown"),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct ExtensionMap {
    by_extension: HashMap<String, Arc<str>>,
    by_filename: HashMap<String, Arc<str>>,
    ambiguity_overrides: HashMap<String, Arc<str>>,
    // Largest number of dots in any extension key; bounds the suffix search.
    max_ext_parts: usize,
}

fn normalize_ext(raw: &str) -> String {
    raw.strip_prefix('.').unwrap_or(raw).to_lowercase()
}

impl ExtensionMap {
    pub fn bundled() -> Self {
        ExtensionMap::parse(BUNDLED_MAP).expect("bundled map is valid")
    }

    pub fn load(path: &Path) -> Result<Self, MapError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| MapError::Io(format!("{}: {e}", path.display())))?;
        ExtensionMap::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, MapError> {
        let mut names: HashMap<String, Arc<str>> = HashMap::new();
        let mut intern = |name: &str| -> Arc<str> {
            names
                .entry(name.to_string())
                .or_insert_with(|| Arc::from(name))
                .clone()
        };

        // ext -> claimants in first-seen order
        let mut claims: HashMap<String, Vec<Arc<str>>> = HashMap::new();
        let mut claim_order: Vec<String> = Vec::new();
        let mut by_filename: HashMap<String, Arc<str>> = HashMap::new();
        let mut overrides: HashMap<String, Arc<str>> = HashMap::new();

        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let malformed = |reason: &str| MapError::Malformed {
                line: line_no,
                reason: reason.to_string(),
            };
            let mut parts = line.splitn(2, char::is_whitespace);
            let kind = parts.next().unwrap_or_default();
            let rest = parts.next().unwrap_or_default().trim_start();
            let mut parts = rest.splitn(2, char::is_whitespace);
            let key = parts.next().unwrap_or_default();
            let language = parts.next().unwrap_or_default().trim();
            if key.is_empty() || language.is_empty() {
                return Err(malformed("expected `<kind> <key> <language>`"));
            }
            match kind {
                "ext" | "override" => {
                    let ext = normalize_ext(key);
                    if ext.is_empty() {
                        return Err(malformed("empty extension"));
                    }
                    let lang = intern(language);
                    if kind == "ext" {
                        let entry = claims.entry(ext.clone()).or_insert_with(|| {
                            claim_order.push(ext.clone());
                            Vec::new()
                        });
                        if !entry.contains(&lang) {
                            entry.push(lang);
                        }
                    } else {
                        match overrides.get(&ext) {
                            Some(existing) if *existing != lang => {
                                return Err(MapError::ConflictingOverride {
                                    line: line_no,
                                    ext,
                                    existing: existing.to_string(),
                                })
                            }
                            _ => {
                                overrides.insert(ext, lang);
                            }
                        }
                    }
                }
                "file" => {
                    let lang = intern(language);
                    match by_filename.get(key) {
                        Some(existing) if *existing != lang => {
                            return Err(MapError::ConflictingFilename {
                                line: line_no,
                                name: key.to_string(),
                                existing: existing.to_string(),
                                language: language.to_string(),
                            })
                        }
                        _ => {
                            by_filename.insert(key.to_string(), lang);
                        }
                    }
                }
                other => return Err(malformed(&format!("unknown rule kind `{other}`"))),
            }
        }

        let mut by_extension = HashMap::with_capacity(claims.len() + overrides.len());
        for ext in claim_order {
            let claimants = &claims[&ext];
            let lang = match overrides.get(&ext) {
                Some(lang) => lang.clone(),
                None if claimants.len() > 1 => {
                    return Err(MapError::ConflictingExtension {
                        ext,
                        first: claimants[0].to_string(),
                        second: claimants[1].to_string(),
                    })
                }
                None => claimants[0].clone(),
            };
            by_extension.insert(ext, lang);
        }
        for (ext, lang) in &overrides {
            by_extension
                .entry(ext.clone())
                .or_insert_with(|| lang.clone());
        }
        let max_ext_parts = by_extension
            .keys()
            .map(|k| k.matches('.').count() + 1)
            .max()
            .unwrap_or(0);

        Ok(ExtensionMap {
            by_extension,
            by_filename,
            ambiguity_overrides: overrides,
            max_ext_parts,
        })
    }

    pub fn identify(&self, path: &str) -> LanguageLabel {
        let name = path.rsplit('/').next().unwrap_or(path);
        if let Some(lang) = self.by_filename.get(name) {
            return LanguageLabel::Known(lang.clone());
        }
        let lower = name.to_lowercase();
        let dots: Vec<usize> = lower.match_indices('.').map(|(i, _)| i).collect();
        // Suffixes after the k-th-from-last dot, longest first.
        let start = dots.len().saturating_sub(self.max_ext_parts);
        for &dot in &dots[start..] {
            let ext = &lower[dot + 1..];
            if ext.is_empty() {
                continue;
            }
            if let Some(lang) = self.by_extension.get(ext) {
                return LanguageLabel::Known(lang.clone());
            }
        }
        LanguageLabel::Unknown
    }

    /// Distinct language names reachable through any rule.
    pub fn languages(&self) -> BTreeSet<&str> {
        self.by_extension
            .values()
            .chain(self.by_filename.values())
            .map(|s| &**s)
            .collect()
    }

    pub fn extension_rules(&self) -> usize {
        self.by_extension.len()
    }

    pub fn filename_rules(&self) -> usize {
        self.by_filename.len()
    }

    pub fn override_for(&self, ext: &str) -> Option<&str> {
        self.ambiguity_overrides
            .get(&normalize_ext(ext))
            .map(|s| &**s)
    }
}
