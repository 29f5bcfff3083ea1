//! Token counting.
//!
//! [`BpeModel`] is a byte-level BPE: content bytes are mapped through a fixed
//! byte alphabet, split into pre-tokens, and each pre-token is merged by
//! repeatedly applying the lowest-rank applicable merge (leftmost position
//! first) until no merge applies. Only the number of resulting units is
//! reported; ids are never materialised.
//!
//! Pre-tokens are maximal runs of whitespace, of word bytes (ASCII
//! alphanumerics and `_`), or of any other bytes. A whitespace run is glued
//! to the run that follows it, so `"a  = b"` splits as `a`, `  =`, ` b`.
//!
//! Without a model, [`count_tokens_whitespace`] counts runs of non-whitespace
//! bytes.
//!
//! ## Byte alphabet
//!
//! Printable ASCII `0x21..=0x7E` maps to itself. The remaining 162 byte
//! values, in ascending order, map to `U+0100..=U+01A1`; so `0x00` is `Ā`
//! (U+0100), space `0x20` is `Ġ` (U+0120), `0x7F` is `ġ` (U+0121) and `0xFF`
//! is `ơ` (U+01A1). The full table ships as `data/byte_alphabet.tsv`.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ModelError {
    #[error("vocab line {line}: expected `<token>\\t<id>`")]
    MalformedVocab { line: usize },
    #[error("vocab line {line}: duplicate token {token:?}")]
    DuplicateToken { line: usize, token: String },
    #[error("vocab line {line}: id {id} already assigned")]
    DuplicateId { line: usize, id: u32 },
    #[error("merges line {line}: expected `<left> <right>`")]
    MalformedMerge { line: usize },
    #[error("merge rule {rank}: token {token:?} is not in the vocabulary")]
    UnknownToken { rank: usize, token: String },
    #[error("merge rule {rank}: duplicate of rule {first}")]
    DuplicateMerge { rank: usize, first: usize },
    #[error("cannot read {path}: {reason}")]
    Io { path: String, reason: String },
}

/// Per-file measurement.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenCount {
    pub tokens: u64,
    pub lines: u64,
    pub bytes: u64,
}

impl TokenCount {
    fn with_tokens(content: &[u8], tokens: u64) -> Self {
        TokenCount {
            tokens,
            lines: count_lines(content),
            bytes: content.len() as u64,
        }
    }
}

/// Newline bytes, plus one for a non-empty unterminated last line.
pub fn count_lines(content: &[u8]) -> u64 {
    let newlines = content.iter().filter(|&&b| b == b'\n').count() as u64;
    match content.last() {
        Some(&b'\n') | None => newlines,
        Some(_) => newlines + 1,
    }
}

pub fn is_space(b: u8) -> bool {
    matches!(b, b' ' | b'\t' | b'\n' | b'\r' | 0x0b | 0x0c)
}

fn is_word(b: u8) -> bool {
    b.is_ascii_alphanumeric() || b == b'_'
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Class {
    Space,
    Word,
    Other,
}

fn class(b: u8) -> Class {
    if is_space(b) {
        Class::Space
    } else if is_word(b) {
        Class::Word
    } else {
        Class::Other
    }
}

/// Splits content into pre-tokens. Concatenating the pieces gives back the input.
pub fn pretokenize(content: &[u8]) -> impl Iterator<Item = &[u8]> + '_ {
    let mut pos = 0;
    std::iter::from_fn(move || {
        if pos >= content.len() {
            return None;
        }
        let start = pos;
        let run_end = |from: usize, c: Class| {
            from + content[from..]
                .iter()
                .take_while(|&&b| class(b) == c)
                .count()
        };
        let first = class(content[pos]);
        pos = run_end(pos, first);
        if first == Class::Space && pos < content.len() {
            pos = run_end(pos, class(content[pos]));
        }
        Some(&content[start..pos])
    })
}

pub fn count_tokens_whitespace(content: &[u8]) -> TokenCount {
    let runs = content
        .split(|&b| is_space(b))
        .filter(|piece| !piece.is_empty())
        .count() as u64;
    TokenCount::with_tokens(content, runs)
}

/// The fixed byte -> symbol bijection.
pub fn byte_symbol(b: u8) -> char {
    BYTE_ALPHABET[b as usize]
}

/// Inverse of [`byte_symbol`].
pub fn symbol_byte(c: char) -> Option<u8> {
    (0u8..=255).find(|&b| byte_symbol(b) == c)
}

const fn build_alphabet() -> [char; 256] {
    let mut table = ['\0'; 256];
    let mut next = 0x100u32;
    let mut b = 0;
    while b < 256 {
        table[b] = if b >= 0x21 && b <= 0x7e {
            b as u8 as char
        } else {
            let c = match char::from_u32(next) {
                Some(c) => c,
                None => panic!("invalid code point"),
            };
            next += 1;
            c
        };
        b += 1;
    }
    table
}

const BYTE_ALPHABET: [char; 256] = build_alphabet();

/// Maps raw bytes to their alphabet string, e.g. for writing vocab files.
pub fn encode_bytes(bytes: &[u8]) -> String {
    bytes.iter().map(|&b| BYTE_ALPHABET[b as usize]).collect()
}

/// The byte alphabet as `0xNN<TAB><symbol>` lines.
pub fn byte_alphabet_table() -> String {
    BYTE_ALPHABET
        .iter()
        .enumerate()
        .map(|(b, c)| format!("0x{b:02X}\t{c}\n"))
        .collect()
}

pub fn parse_vocab(text: &str) -> Result<Vec<(String, u32)>, ModelError> {
    let mut entries = Vec::new();
    let mut seen_tokens: HashMap<&str, ()> = HashMap::new();
    let mut seen_ids: HashMap<u32, ()> = HashMap::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        if line.is_empty() {
            continue;
        }
        let (token, id) = line
            .rsplit_once('\t')
            .ok_or(ModelError::MalformedVocab { line: line_no })?;
        let id: u32 = id
            .trim()
            .parse()
            .map_err(|_| ModelError::MalformedVocab { line: line_no })?;
        if token.is_empty() {
            return Err(ModelError::MalformedVocab { line: line_no });
        }
        if seen_tokens.insert(token, ()).is_some() {
            return Err(ModelError::DuplicateToken {
                line: line_no,
                token: token.to_string(),
            });
        }
        if seen_ids.insert(id, ()).is_some() {
            return Err(ModelError::DuplicateId { line: line_no, id });
        }
        entries.push((token.to_string(), id));
    }
    Ok(entries)
}

/// Merge rules in rank order. `#` lines are allowed only before the first rule.
pub fn parse_merges(text: &str) -> Result<Vec<(String, String)>, ModelError> {
    let mut merges = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.is_empty() || (merges.is_empty() && line.starts_with('#')) {
            continue;
        }
        let mut parts = line.split(' ');
        match (parts.next(), parts.next(), parts.next()) {
            (Some(l), Some(r), None) if !l.is_empty() && !r.is_empty() => {
                merges.push((l.to_string(), r.to_string()))
            }
            _ => return Err(ModelError::MalformedMerge { line: idx + 1 }),
        }
    }
    Ok(merges)
}

#[derive(Debug, Clone, Copy)]
struct MergeTarget {
    rank: u32,
    result: u32,
}

/// A validated byte-level BPE model.
#[derive(Debug, Clone)]
pub struct BpeModel {
    vocab: HashMap<String, u32>,
    merges: Vec<(String, String)>,
    // Units are internal indices: vocab tokens first, then any byte symbol
    // missing from the vocab.
    byte_units: [u32; 256],
    pair_table: HashMap<(u32, u32), MergeTarget>,
}

fn read(path: &Path) -> Result<String, ModelError> {
    std::fs::read_to_string(path).map_err(|e| ModelError::Io {
        path: path.display().to_string(),
        reason: e.to_string(),
    })
}

impl BpeModel {
    pub fn load(vocab_file: &Path, merges_file: &Path) -> Result<Self, ModelError> {
        let vocab = parse_vocab(&read(vocab_file)?)?;
        let merges = parse_merges(&read(merges_file)?)?;
        BpeModel::new(vocab, merges)
    }

    pub fn new(
        vocab: Vec<(String, u32)>,
        merges: Vec<(String, String)>,
    ) -> Result<Self, ModelError> {
        let mut unit_of: HashMap<String, u32> = HashMap::with_capacity(vocab.len() + 256);
        let mut vocab_map = HashMap::with_capacity(vocab.len());
        let mut seen_ids = HashMap::new();
        for (line, (token, id)) in vocab.into_iter().enumerate() {
            if seen_ids.insert(id, ()).is_some() {
                return Err(ModelError::DuplicateId { line: line + 1, id });
            }
            if vocab_map.contains_key(&token) {
                return Err(ModelError::DuplicateToken {
                    line: line + 1,
                    token,
                });
            }
            let unit = unit_of.len() as u32;
            unit_of.insert(token.clone(), unit);
            vocab_map.insert(token, id);
        }

        let mut byte_units = [0u32; 256];
        for b in 0..256 {
            let sym = BYTE_ALPHABET[b].to_string();
            let next = unit_of.len() as u32;
            byte_units[b] = *unit_of.entry(sym).or_insert(next);
        }

        let mut pair_table = HashMap::with_capacity(merges.len());
        for (rank, (left, right)) in merges.iter().enumerate() {
            let lookup = |token: &str| {
                vocab_map.get(token).map(|_| unit_of[token]).ok_or_else(|| {
                    ModelError::UnknownToken {
                        rank,
                        token: token.to_string(),
                    }
                })
            };
            let l = lookup(left)?;
            let r = lookup(right)?;
            let result = lookup(&format!("{left}{right}"))?;
            if let Some(prev) = pair_table.insert(
                (l, r),
                MergeTarget {
                    rank: rank as u32,
                    result,
                },
            ) {
                return Err(ModelError::DuplicateMerge {
                    rank,
                    first: prev.rank as usize,
                });
            }
        }

        Ok(BpeModel {
            vocab: vocab_map,
            merges,
            byte_units,
            pair_table,
        })
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab.len()
    }

    pub fn merges(&self) -> &[(String, String)] {
        &self.merges
    }

    pub fn count_tokens(&self, content: &[u8]) -> TokenCount {
        let tokens = pretokenize(content)
            .map(|piece| self.count_piece(piece) as u64)
            .sum();
        TokenCount::with_tokens(content, tokens)
    }

    /// Number of units left after merging one pre-token to fixpoint.
    ///
    /// Merges are applied one at a time in (rank, position) order using a
    /// min-heap over a linked list of units. Stale heap entries are detected
    /// by re-checking the pair on pop.
    fn count_piece(&self, piece: &[u8]) -> usize {
        let n = piece.len();
        if n < 2 || self.pair_table.is_empty() {
            return n;
        }
        let mut unit: Vec<u32> = piece.iter().map(|&b| self.byte_units[b as usize]).collect();
        let mut next: Vec<usize> = (1..=n).collect();
        let mut prev: Vec<usize> = (0..n).map(|i| i.wrapping_sub(1)).collect();
        let mut alive = vec![true; n];
        let mut heap = BinaryHeap::new();

        let push = |heap: &mut BinaryHeap<_>, unit: &[u32], left: usize, right: usize| {
            if let Some(m) = self.pair_table.get(&(unit[left], unit[right])) {
                heap.push(Reverse((m.rank, left, right, unit[left], unit[right])));
            }
        };
        for i in 0..n - 1 {
            push(&mut heap, &unit, i, i + 1);
        }

        let mut remaining = n;
        while let Some(Reverse((_, left, right, lu, ru))) = heap.pop() {
            if !alive[left]
                || !alive[right]
                || next[left] != right
                || unit[left] != lu
                || unit[right] != ru
            {
                continue;
            }
            unit[left] = self.pair_table[&(lu, ru)].result;
            alive[right] = false;
            next[left] = next[right];
            if next[left] < n {
                prev[next[left]] = left;
            }
            remaining -= 1;
            if prev[left] < n {
                push(&mut heap, &unit, prev[left], left);
            }
            if next[left] < n {
                push(&mut heap, &unit, left, next[left]);
            }
        }
        remaining
    }
}

/// Either a BPE model or the whitespace-run fallback.
#[derive(Debug, Clone)]
#[allow(clippy::large_enum_variant)] // one instance per run
pub enum Tokenizer {
    Whitespace,
    Bpe(BpeModel),
}

impl Tokenizer {
    pub fn count(&self, content: &[u8]) -> TokenCount {
        match self {
            Tokenizer::Whitespace => count_tokens_whitespace(content),
            Tokenizer::Bpe(model) => model.count_tokens(content),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Tokenizer::Whitespace => "whitespace",
            Tokenizer::Bpe(_) => "bpe",
        }
    }
}
