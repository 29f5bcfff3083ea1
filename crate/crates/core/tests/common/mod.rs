//! Test-only oracles and fixtures. Nothing here calls into the code under
//! test except to build inputs for it.
#![allow(dead_code)]

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal, Pareto};

pub const B: u64 = 1_000_000_000;

// ---------------------------------------------------------------- SHA-256

const K: [u32; 64] = [
    0x428a2f98, 0x71374491, 0xb5c0fbcf, 0xe9b5dba5, 0x3956c25b, 0x59f111f1, 0x923f82a4, 0xab1c5ed5,
    0xd807aa98, 0x12835b01, 0x243185be, 0x550c7dc3, 0x72be5d74, 0x80deb1fe, 0x9bdc06a7, 0xc19bf174,
    0xe49b69c1, 0xefbe4786, 0x0fc19dc6, 0x240ca1cc, 0x2de92c6f, 0x4a7484aa, 0x5cb0a9dc, 0x76f988da,
    0x983e5152, 0xa831c66d, 0xb00327c8, 0xbf597fc7, 0xc6e00bf3, 0xd5a79147, 0x06ca6351, 0x14292967,
    0x27b70a85, 0x2e1b2138, 0x4d2c6dfc, 0x53380d13, 0x650a7354, 0x766a0abb, 0x81c2c92e, 0x92722c85,
    0xa2bfe8a1, 0xa81a664b, 0xc24b8b70, 0xc76c51a3, 0xd192e819, 0xd6990624, 0xf40e3585, 0x106aa070,
    0x19a4c116, 0x1e376c08, 0x2748774c, 0x34b0bcb5, 0x391c0cb3, 0x4ed8aa4a, 0x5b9cca4f, 0x682e6ff3,
    0x748f82ee, 0x78a5636f, 0x84c87814, 0x8cc70208, 0x90befffa, 0xa4506ceb, 0xbef9a3f7, 0xc67178f2,
];

/// Straight-line FIPS 180-4 SHA-256.
pub fn sha256_oracle(msg: &[u8]) -> [u8; 32] {
    let mut h: [u32; 8] = [
        0x6a09e667, 0xbb67ae85, 0x3c6ef372, 0xa54ff53a, 0x510e527f, 0x9b05688c, 0x1f83d9ab,
        0x5be0cd19,
    ];
    let mut data = msg.to_vec();
    data.push(0x80);
    while data.len() % 64 != 56 {
        data.push(0);
    }
    data.extend_from_slice(&((msg.len() as u64) * 8).to_be_bytes());
    for block in data.chunks(64) {
        let mut w = [0u32; 64];
        for i in 0..16 {
            w[i] = u32::from_be_bytes([
                block[4 * i],
                block[4 * i + 1],
                block[4 * i + 2],
                block[4 * i + 3],
            ]);
        }
        for i in 16..64 {
            let s0 = w[i - 15].rotate_right(7) ^ w[i - 15].rotate_right(18) ^ (w[i - 15] >> 3);
            let s1 = w[i - 2].rotate_right(17) ^ w[i - 2].rotate_right(19) ^ (w[i - 2] >> 10);
            w[i] = w[i - 16]
                .wrapping_add(s0)
                .wrapping_add(w[i - 7])
                .wrapping_add(s1);
        }
        let [mut a, mut b, mut c, mut d, mut e, mut f, mut g, mut hh] = h;
        for i in 0..64 {
            let s1 = e.rotate_right(6) ^ e.rotate_right(11) ^ e.rotate_right(25);
            let ch = (e & f) ^ (!e & g);
            let t1 = hh
                .wrapping_add(s1)
                .wrapping_add(ch)
                .wrapping_add(K[i])
                .wrapping_add(w[i]);
            let s0 = a.rotate_right(2) ^ a.rotate_right(13) ^ a.rotate_right(22);
            let maj = (a & b) ^ (a & c) ^ (b & c);
            let t2 = s0.wrapping_add(maj);
            hh = g;
            g = f;
            f = e;
            e = d.wrapping_add(t1);
            d = c;
            c = b;
            b = a;
            a = t1.wrapping_add(t2);
        }
        for (slot, v) in h.iter_mut().zip([a, b, c, d, e, f, g, hh]) {
            *slot = slot.wrapping_add(v);
        }
    }
    let mut out = [0u8; 32];
    for (i, word) in h.iter().enumerate() {
        out[4 * i..4 * i + 4].copy_from_slice(&word.to_be_bytes());
    }
    out
}

// ---------------------------------------------------------------- base64

pub fn base64_oracle(text: &str) -> Option<Vec<u8>> {
    let value = |c: u8| -> Option<u32> {
        Some(match c {
            b'A'..=b'Z' => (c - b'A') as u32,
            b'a'..=b'z' => (c - b'a') as u32 + 26,
            b'0'..=b'9' => (c - b'0') as u32 + 52,
            b'+' => 62,
            b'/' => 63,
            _ => return None,
        })
    };
    let bytes = text.as_bytes();
    if !bytes.len().is_multiple_of(4) {
        return None;
    }
    let mut out = Vec::new();
    for quad in bytes.chunks(4) {
        let pad = quad.iter().rev().take_while(|&&c| c == b'=').count();
        let mut acc = 0u32;
        for &c in &quad[..4 - pad] {
            acc = (acc << 6) | value(c)?;
        }
        acc <<= 6 * pad as u32;
        let got = [(acc >> 16) as u8, (acc >> 8) as u8, acc as u8];
        out.extend_from_slice(&got[..3 - pad]);
    }
    Some(out)
}

// ---------------------------------------------------------------- BPE

/// A toy BPE model in raw byte space.
#[derive(Debug, Clone)]
pub struct ToyModel {
    pub tokens: Vec<Vec<u8>>,
    pub merges: Vec<(Vec<u8>, Vec<u8>)>,
}

pub const TOY_ALPHABET: &[u8] = b"ab_c \n+1";

/// All 256 single bytes plus `n_merges` random merges over tokens built so far.
pub fn toy_model(rng: &mut ChaCha8Rng, n_merges: usize) -> ToyModel {
    let mut tokens: Vec<Vec<u8>> = (0..=255u8).map(|b| vec![b]).collect();
    let mut pool: Vec<Vec<u8>> = TOY_ALPHABET.iter().map(|&b| vec![b]).collect();
    let mut merges = Vec::new();
    while merges.len() < n_merges {
        let l = pool[rng.gen_range(0..pool.len())].clone();
        let r = pool[rng.gen_range(0..pool.len())].clone();
        if merges.iter().any(|(a, b)| *a == l && *b == r) {
            continue;
        }
        let joined = [l.clone(), r.clone()].concat();
        if !tokens.contains(&joined) {
            tokens.push(joined.clone());
            pool.push(joined);
        }
        merges.push((l, r));
    }
    ToyModel { tokens, merges }
}

pub fn random_input(rng: &mut ChaCha8Rng, max_len: usize) -> Vec<u8> {
    let len = rng.gen_range(0..=max_len);
    (0..len)
        .map(|_| {
            if rng.gen_bool(0.9) {
                TOY_ALPHABET[rng.gen_range(0..TOY_ALPHABET.len())]
            } else {
                rng.gen()
            }
        })
        .collect()
}

fn oracle_class(b: u8) -> u8 {
    match b {
        b' ' | b'\t' | b'\n' | b'\r' | 0x0b | 0x0c => 0,
        b'0'..=b'9' | b'a'..=b'z' | b'A'..=b'Z' | b'_' => 1,
        _ => 2,
    }
}

/// Runs of equal class; each whitespace run is glued to the run after it.
pub fn oracle_pretokens(content: &[u8]) -> Vec<Vec<u8>> {
    let mut runs: Vec<Vec<u8>> = Vec::new();
    for &b in content {
        match runs.last_mut() {
            Some(run) if oracle_class(run[0]) == oracle_class(b) => run.push(b),
            _ => runs.push(vec![b]),
        }
    }
    let mut out = Vec::new();
    let mut i = 0;
    while i < runs.len() {
        if oracle_class(runs[i][0]) == 0 && i + 1 < runs.len() {
            out.push([runs[i].clone(), runs[i + 1].clone()].concat());
            i += 2;
        } else {
            out.push(runs[i].clone());
            i += 1;
        }
    }
    out
}

/// Scan-to-fixpoint: find the lowest-rank applicable merge (leftmost on
/// ties), apply it once, rescan.
pub fn oracle_count(model: &ToyModel, content: &[u8]) -> u64 {
    let rank: HashMap<(&[u8], &[u8]), usize> = model
        .merges
        .iter()
        .enumerate()
        .map(|(i, (l, r))| ((l.as_slice(), r.as_slice()), i))
        .collect();
    let mut total = 0;
    for piece in oracle_pretokens(content) {
        let mut units: Vec<Vec<u8>> = piece.iter().map(|&b| vec![b]).collect();
        loop {
            let mut best: Option<(usize, usize)> = None;
            for i in 0..units.len().saturating_sub(1) {
                if let Some(&r) = rank.get(&(units[i].as_slice(), units[i + 1].as_slice())) {
                    if best.is_none_or(|(br, _)| r < br) {
                        best = Some((r, i));
                    }
                }
            }
            match best {
                Some((_, i)) => {
                    let right = units.remove(i + 1);
                    units[i].extend(right);
                }
                None => break,
            }
        }
        total += units.len() as u64;
    }
    total
}

/// Converts a toy model to the crate's string form through the shipped
/// byte alphabet table (read from the data file, not from the crate).
/// Vocabulary and merge rules in the on-disk symbol space.
pub type ModelFiles = (Vec<(String, u32)>, Vec<(String, String)>);

pub fn toy_model_files(model: &ToyModel) -> ModelFiles {
    let table = shipped_alphabet();
    let enc = |bytes: &[u8]| -> String { bytes.iter().map(|&b| table[b as usize]).collect() };
    let vocab = model
        .tokens
        .iter()
        .enumerate()
        .map(|(i, t)| (enc(t), i as u32))
        .collect();
    let merges = model.merges.iter().map(|(l, r)| (enc(l), enc(r))).collect();
    (vocab, merges)
}

pub fn shipped_alphabet() -> Vec<char> {
    let text = include_str!("../../data/byte_alphabet.tsv");
    let table: Vec<char> = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split('\t').nth(1).unwrap().chars().next().unwrap())
        .collect();
    assert_eq!(table.len(), 256);
    table
}

// ---------------------------------------------------------------- statistics

/// Σ_i Σ_j |x_i − x_j| / (2 n² μ), computed exactly in integers.
pub fn gini_pairwise(values: &[u64]) -> f64 {
    let n = values.len() as u128;
    let total: u128 = values.iter().map(|&v| v as u128).sum();
    let mut abs_diff = 0u128;
    for &a in values {
        for &b in values {
            abs_diff += a.abs_diff(b) as u128;
        }
    }
    // 2 n² μ = 2 n · total
    abs_diff as f64 / (2.0 * n as f64 * total as f64)
}

/// Heavy-tailed token counts: Pareto(α≈1.1) or lognormal(σ=2.5), scaled.
pub fn heavy_tailed(rng: &mut ChaCha8Rng, n: usize) -> Vec<u64> {
    if rng.gen_bool(0.5) {
        let d = Pareto::new(1e3f64, 1.1).unwrap();
        (0..n).map(|_| (d.sample(rng).min(1e16)) as u64).collect()
    } else {
        let d = LogNormal::new(18.0f64, 2.5).unwrap();
        (0..n).map(|_| (d.sample(rng).min(1e16)) as u64).collect()
    }
}

// ---------------------------------------------------------------- censuses

/// `n` values summing to `total`, each in `[lo, hi)`, spread linearly.
fn spread(total: u64, n: usize, lo: u64, hi: u64) -> Vec<u64> {
    let mean = total / n as u64;
    let width = (mean - lo).min(hi - 1 - mean) / 2;
    let mut v: Vec<u64> = (0..n)
        .map(|i| mean - width + (2 * width * i as u64) / (n as u64 - 1).max(1))
        .collect();
    let sum: u64 = v.iter().sum();
    let last = v.len() - 1;
    v[last] = v[last] + total - sum;
    assert!(v.iter().all(|&x| x >= lo && x < hi), "spread out of band");
    assert_eq!(v.iter().sum::<u64>(), total);
    v
}

/// A census whose tier aggregates are 12/49/122/463 languages with
/// 5,689/1,448/417/76 B tokens; Python holds 1,543B.
pub fn reference_census() -> Vec<(String, u64)> {
    let high = [
        ("Python", 1543),
        ("JavaScript", 900),
        ("Java", 700),
        ("C#", 500),
        ("PHP", 450),
        ("C++", 400),
        ("CSS", 300),
        ("TypeScript", 260),
        ("C", 230),
        ("Ruby", 160),
        ("Markdown", 130),
        ("HTML", 116),
    ];
    let mut rows: Vec<(String, u64)> = high.iter().map(|(n, t)| (n.to_string(), t * B)).collect();
    for (prefix, n, total, lo, hi) in [
        ("Medium", 49, 1448 * B, 10 * B, 100 * B),
        ("Low", 122, 417 * B, B, 10 * B),
        ("Scarce", 463, 76 * B, 1, B),
    ] {
        for (i, v) in spread(total, n, lo, hi).into_iter().enumerate() {
            rows.push((format!("{prefix}-{i:03}"), v));
        }
    }
    rows
}

pub fn write_census_csv(path: &Path, rows: &[(String, u64)]) {
    let mut text = String::from("language,tokens,files,lines,bytes\n");
    for (name, tokens) in rows {
        text.push_str(&format!("{name},{tokens},1,1,1\n"));
    }
    fs::write(path, text).unwrap();
}

/// Per-tier lognormal counts clipped into each band, 4 tiers populated.
pub fn skew_fixture(rng: &mut ChaCha8Rng) -> Vec<(String, u64)> {
    let mut rows = Vec::new();
    // (name, count, lognormal location, band)
    let bands: [(&str, usize, f64, u64, u64); 4] = [
        ("High", 12, (150.0 * B as f64).ln(), 100 * B, 10_000 * B),
        ("Medium", 49, (15.0 * B as f64).ln(), 10 * B, 100 * B),
        ("Low", 122, (1.5 * B as f64).ln(), B, 10 * B),
        ("Scarce", 463, (2e7f64).ln(), 1, B),
    ];
    for (name, count, mu, lo, hi) in bands {
        let d = LogNormal::new(mu, 1.2).unwrap();
        let mut i = 0;
        while i < count {
            let x = d.sample(rng) as u64;
            if x >= lo && x < hi {
                rows.push((format!("{name}-{i:03}"), x));
                i += 1;
            }
        }
    }
    rows
}

pub fn write_tree(root: &Path, files: &[(String, Vec<u8>)]) {
    for (rel, body) in files {
        let p = root.join(rel);
        fs::create_dir_all(p.parent().unwrap()).unwrap();
        fs::write(p, body).unwrap();
    }
}

/// A 1,000-file corpus across several languages, with some internal duplicates.
pub fn corpus_fixture(rng: &mut ChaCha8Rng, files: usize) -> Vec<(String, Vec<u8>)> {
    let exts = [
        "py",
        "rs",
        "js",
        "c",
        "h",
        "go",
        "md",
        "txt",
        "unknownext",
        "",
    ];
    let words = [
        "fn", "def", "x", "=", "return", "{", "}", "(", ")", "foo_bar", "42", "\u{3b1}",
    ];
    (0..files)
        .map(|i| {
            let ext = exts[rng.gen_range(0..exts.len())];
            let dir = format!("d{}", rng.gen_range(0..8));
            let name = if ext.is_empty() {
                format!("{dir}/f{i:04}")
            } else {
                format!("{dir}/f{i:04}.{ext}")
            };
            let body = if rng.gen_bool(0.1) {
                // shared content across files
                format!("dup {}\n", rng.gen_range(0..20)).into_bytes()
            } else {
                let n = rng.gen_range(0..200);
                let mut s = String::new();
                for _ in 0..n {
                    s.push_str(words[rng.gen_range(0..words.len())]);
                    s.push(if rng.gen_bool(0.1) { '\n' } else { ' ' });
                }
                s.into_bytes()
            };
            (name, body)
        })
        .collect()
}
