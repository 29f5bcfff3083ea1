//! Resource tiers and inequality statistics over a census.
//!
//! Tiers are absolute token bands with inclusive lower edges:
//!
//! | tier | name   | t_L                    |
//! |------|--------|------------------------|
//! | 3    | High   | t_L ≥ t3_min (100B)    |
//! | 2    | Medium | t2_min ≤ t_L < t3_min  |
//! | 1    | Low    | t1_min ≤ t_L < t2_min  |
//! | 0    | Scarce | t_L < t1_min (1B)      |
//!
//! Gini and CV use population formulas (the census is the whole population of
//! languages). The Gini value is exactly `1 - 2 * area` under the
//! piecewise-linear Lorenz curve built by [`lorenz_points`].

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::census::CensusTable;

#[derive(Debug, Error, PartialEq)]
pub enum StatsError {
    #[error("no values")]
    EmptyValues,
    #[error("values sum to zero")]
    ZeroTotal,
    #[error("census has no classified languages")]
    EmptyCensus,
    #[error("survival grid is empty")]
    EmptyGrid,
    #[error("survival grid must be strictly increasing and positive")]
    BadGrid,
    #[error("k must be at least 1")]
    ZeroK,
    #[error("thresholds must satisfy t3 > t2 > t1 > 0 (got {t3}, {t2}, {t1})")]
    BadThresholds { t3: u64, t2: u64, t1: u64 },
    #[error("invalid token count {0:?}: expected digits with optional K/M/B/T suffix")]
    BadTokenCount(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Tier {
    Scarce = 0,
    Low = 1,
    Medium = 2,
    High = 3,
}

impl Tier {
    /// High first, matching the usual table layout.
    pub const DESCENDING: [Tier; 4] = [Tier::High, Tier::Medium, Tier::Low, Tier::Scarce];

    pub fn index(self) -> u8 {
        self as u8
    }

    pub fn name(self) -> &'static str {
        match self {
            Tier::Scarce => "Scarce",
            Tier::Low => "Low",
            Tier::Medium => "Medium",
            Tier::High => "High",
        }
    }
}

impl fmt::Display for Tier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TierThresholds {
    pub t3_min: u64,
    pub t2_min: u64,
    pub t1_min: u64,
}

impl Default for TierThresholds {
    fn default() -> Self {
        TierThresholds {
            t3_min: 100_000_000_000,
            t2_min: 10_000_000_000,
            t1_min: 1_000_000_000,
        }
    }
}

impl TierThresholds {
    pub fn new(t3_min: u64, t2_min: u64, t1_min: u64) -> Result<Self, StatsError> {
        if t3_min > t2_min && t2_min > t1_min && t1_min > 0 {
            Ok(TierThresholds {
                t3_min,
                t2_min,
                t1_min,
            })
        } else {
            Err(StatsError::BadThresholds {
                t3: t3_min,
                t2: t2_min,
                t1: t1_min,
            })
        }
    }

    pub fn assign(&self, tokens: u64) -> Tier {
        assign_tier(tokens, self)
    }
}

pub fn assign_tier(tokens: u64, th: &TierThresholds) -> Tier {
    if tokens >= th.t3_min {
        Tier::High
    } else if tokens >= th.t2_min {
        Tier::Medium
    } else if tokens >= th.t1_min {
        Tier::Low
    } else {
        Tier::Scarce
    }
}

/// Parses `12`, `100B`, `1.5T`, `250k` (K/M/B/T are powers of ten).
pub fn parse_token_count(text: &str) -> Result<u64, StatsError> {
    let bad = || StatsError::BadTokenCount(text.to_string());
    let s = text.trim();
    let (mantissa, exp) = match s.chars().last().map(|c| c.to_ascii_uppercase()) {
        Some('K') => (&s[..s.len() - 1], 3),
        Some('M') => (&s[..s.len() - 1], 6),
        Some('B') => (&s[..s.len() - 1], 9),
        Some('T') => (&s[..s.len() - 1], 12),
        _ => (s, 0),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    let digits = |p: &str| p.chars().all(|c| c.is_ascii_digit());
    if int_part.is_empty() || !digits(int_part) || !digits(frac_part) || frac_part.len() > exp {
        return Err(bad());
    }
    let scale = 10u64.pow(exp as u32);
    let int: u64 = int_part.parse().map_err(|_| bad())?;
    let frac: u64 = if frac_part.is_empty() {
        0
    } else {
        frac_part.parse::<u64>().map_err(|_| bad())? * 10u64.pow((exp - frac_part.len()) as u32)
    };
    int.checked_mul(scale)
        .and_then(|v| v.checked_add(frac))
        .ok_or_else(bad)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TierRow {
    pub tier: Tier,
    pub n_languages: u64,
    pub total_tokens: u128,
    pub language_share: f64,
    pub token_share: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TierSummary {
    /// Ordered High, Medium, Low, Scarce.
    pub rows: Vec<TierRow>,
    pub n_languages: u64,
    pub total_tokens: u128,
}

impl TierSummary {
    pub fn row(&self, tier: Tier) -> &TierRow {
        self.rows
            .iter()
            .find(|r| r.tier == tier)
            .expect("every tier has a row")
    }
}

pub fn tier_summary(table: &CensusTable, th: &TierThresholds) -> Result<TierSummary, StatsError> {
    if table.is_empty() {
        return Err(StatsError::EmptyCensus);
    }
    let mut counts = [0u64; 4];
    let mut tokens = [0u128; 4];
    for row in table.rows() {
        let t = assign_tier(row.tokens(), th) as usize;
        counts[t] += 1;
        tokens[t] += row.tokens() as u128;
    }
    let n = table.len() as u64;
    let total: u128 = tokens.iter().sum();
    let rows = Tier::DESCENDING
        .iter()
        .map(|&tier| {
            let i = tier as usize;
            TierRow {
                tier,
                n_languages: counts[i],
                total_tokens: tokens[i],
                language_share: counts[i] as f64 / n as f64,
                token_share: if total > 0 {
                    tokens[i] as f64 / total as f64
                } else {
                    0.0
                },
            }
        })
        .collect();
    Ok(TierSummary {
        rows,
        n_languages: n,
        total_tokens: total,
    })
}

/// Values of the census rows that fall in `tier`, in census order.
pub fn tier_values(table: &CensusTable, th: &TierThresholds, tier: Tier) -> Vec<u64> {
    table
        .rows()
        .iter()
        .map(|r| r.tokens())
        .filter(|&t| assign_tier(t, th) == tier)
        .collect()
}

fn sorted(values: &[u64]) -> Vec<u64> {
    let mut v = values.to_vec();
    v.sort_unstable();
    v
}

fn sum(values: &[u64]) -> u128 {
    values.iter().map(|&v| v as u128).sum()
}

/// Population Gini: `Σ (2i − n − 1)·x_i / (n² μ)` over ascending `x_1..x_n`.
pub fn gini(values: &[u64]) -> Result<f64, StatsError> {
    if values.is_empty() {
        return Err(StatsError::EmptyValues);
    }
    let total = sum(values);
    if total == 0 {
        return Err(StatsError::ZeroTotal);
    }
    let n = values.len() as i128;
    let numerator: i128 = sorted(values)
        .iter()
        .enumerate()
        .map(|(i, &x)| (2 * (i as i128 + 1) - n - 1) * x as i128)
        .sum();
    Ok(numerator as f64 / (n as f64 * total as f64))
}

/// Population standard deviation over the mean.
pub fn coefficient_of_variation(values: &[u64]) -> Result<f64, StatsError> {
    if values.is_empty() {
        return Err(StatsError::EmptyValues);
    }
    let total = sum(values);
    if total == 0 {
        return Err(StatsError::ZeroTotal);
    }
    let n = values.len() as f64;
    let mean = total as f64 / n;
    let var = values
        .iter()
        .map(|&x| {
            let d = x as f64 - mean;
            d * d
        })
        .sum::<f64>()
        / n;
    Ok(var.sqrt() / mean)
}

pub fn mean_median(values: &[u64]) -> Result<(f64, f64), StatsError> {
    if values.is_empty() {
        return Err(StatsError::EmptyValues);
    }
    let v = sorted(values);
    let n = v.len();
    let mean = sum(&v) as f64 / n as f64;
    let median = if n % 2 == 1 {
        v[n / 2] as f64
    } else {
        (v[n / 2 - 1] as u128 + v[n / 2] as u128) as f64 / 2.0
    };
    Ok((mean, median))
}

/// `(0,0)` followed by `(k/n, cumulative share)` for k = 1..n over ascending values.
pub fn lorenz_points(values: &[u64]) -> Result<Vec<(f64, f64)>, StatsError> {
    if values.is_empty() {
        return Err(StatsError::EmptyValues);
    }
    let total = sum(values);
    if total == 0 {
        return Err(StatsError::ZeroTotal);
    }
    let n = values.len();
    let mut points = Vec::with_capacity(n + 1);
    points.push((0.0, 0.0));
    let mut cum = 0u128;
    for (k, &x) in sorted(values).iter().enumerate() {
        cum += x as u128;
        let k = k as u128 + 1;
        let pop = k as f64 / n as f64;
        // On the diagonal the two ratios are equal; share the rounding.
        let share = if cum * n as u128 == k * total {
            pop
        } else {
            cum as f64 / total as f64
        };
        points.push((pop, share));
    }
    Ok(points)
}

/// Trapezoidal area under a Lorenz curve.
pub fn lorenz_area(points: &[(f64, f64)]) -> f64 {
    points
        .windows(2)
        .map(|w| (w[1].0 - w[0].0) * (w[0].1 + w[1].1) / 2.0)
        .sum()
}

/// For each threshold τ, the fraction of values with value ≥ τ.
pub fn ecdf_survival(values: &[u64], grid: &[f64]) -> Result<Vec<(f64, f64)>, StatsError> {
    if grid.is_empty() {
        return Err(StatsError::EmptyGrid);
    }
    if grid[0].is_nan()
        || grid[0] <= 0.0
        || grid
            .windows(2)
            .any(|w| w[1].partial_cmp(&w[0]) != Some(std::cmp::Ordering::Greater))
    {
        return Err(StatsError::BadGrid);
    }
    if values.is_empty() {
        return Err(StatsError::EmptyValues);
    }
    let v = sorted(values);
    let n = v.len() as f64;
    Ok(grid
        .iter()
        .map(|&tau| {
            let below = v.partition_point(|&x| (x as f64) < tau);
            (tau, (v.len() - below) as f64 / n)
        })
        .collect())
}

/// Log-spaced thresholds from 10^6 to 10^12, five per decade.
pub fn default_survival_grid() -> Vec<f64> {
    (0..=30)
        .map(|i| {
            if i % 5 == 0 {
                10f64.powi(6 + i / 5)
            } else {
                10f64.powf(6.0 + i as f64 / 5.0)
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsSummary {
    pub n: usize,
    pub gini: f64,
    pub cv: f64,
    pub mean: f64,
    pub median: f64,
    pub lorenz: Vec<(f64, f64)>,
    pub survival: Vec<(f64, f64)>,
}

pub fn summarize(values: &[u64], grid: &[f64]) -> Result<StatsSummary, StatsError> {
    let (mean, median) = mean_median(values)?;
    Ok(StatsSummary {
        n: values.len(),
        gini: gini(values)?,
        cv: coefficient_of_variation(values)?,
        mean,
        median,
        lorenz: lorenz_points(values)?,
        survival: ecdf_survival(values, grid)?,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankedLanguage {
    pub rank: usize,
    pub language: String,
    pub tokens: u64,
    pub tier: Tier,
}

/// First and last `k` rows of the census order. When `k` covers the whole
/// table both lists are the full table.
pub fn top_bottom(
    table: &CensusTable,
    k: usize,
    th: &TierThresholds,
) -> Result<(Vec<RankedLanguage>, Vec<RankedLanguage>), StatsError> {
    if k == 0 {
        return Err(StatsError::ZeroK);
    }
    let ranked: Vec<RankedLanguage> = table
        .rows()
        .iter()
        .enumerate()
        .map(|(i, r)| RankedLanguage {
            rank: i + 1,
            language: r.language.clone(),
            tokens: r.tokens(),
            tier: assign_tier(r.tokens(), th),
        })
        .collect();
    let k = k.min(ranked.len());
    let top = ranked[..k].to_vec();
    let bottom = ranked[ranked.len() - k..].to_vec();
    Ok((top, bottom))
}

/// Percentage with one decimal, rounded half-up: 0.74558 -> "74.6".
pub fn format_percent(fraction: f64) -> String {
    // The epsilon absorbs representation error so 0.0745 rounds up.
    let tenths = (fraction * 1000.0 + 0.5 + 1e-9).floor();
    format!("{:.1}", tenths / 10.0)
}

impl FromStr for TierThresholds {
    type Err = StatsError;

    /// `t3,t2,t1`, each accepting K/M/B/T suffixes.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(',').collect();
        if parts.len() != 3 {
            return Err(StatsError::BadTokenCount(s.to_string()));
        }
        TierThresholds::new(
            parse_token_count(parts[0])?,
            parse_token_count(parts[1])?,
            parse_token_count(parts[2])?,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const B: u64 = 1_000_000_000;

    #[test]
    fn tier_examples() {
        let th = TierThresholds::default();
        assert_eq!(assign_tier(1543 * B, &th), Tier::High);
        assert_eq!(assign_tier(100 * B, &th), Tier::High);
        assert_eq!(assign_tier(0, &th), Tier::Scarce);
        assert_eq!(assign_tier(10 * B, &th), Tier::Medium);
        assert_eq!(assign_tier(B, &th), Tier::Low);
        assert_eq!(assign_tier(B - 1, &th), Tier::Scarce);
    }

    #[test]
    fn thresholds_must_be_ordered() {
        assert!(TierThresholds::new(3, 2, 1).is_ok());
        assert!(TierThresholds::new(2, 2, 1).is_err());
        assert!(TierThresholds::new(3, 2, 0).is_err());
        assert_eq!(
            "100B,10B,1B".parse::<TierThresholds>().unwrap(),
            TierThresholds::default()
        );
    }

    #[test]
    fn token_count_suffixes() {
        assert_eq!(parse_token_count("100B").unwrap(), 100 * B);
        assert_eq!(parse_token_count("1.5T").unwrap(), 1_500 * B);
        assert_eq!(parse_token_count("250k").unwrap(), 250_000);
        assert_eq!(parse_token_count("7M").unwrap(), 7_000_000);
        assert_eq!(parse_token_count("42").unwrap(), 42);
        for bad in [
            "",
            "B",
            "1.5",
            "-3B",
            "1.0001K",
            "1e9",
            "99999999999999999999",
        ] {
            assert!(parse_token_count(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn summary_single_language() {
        let t = CensusTable::from_tokens([("Solo", 5 * B)]);
        let s = tier_summary(&t, &TierThresholds::default()).unwrap();
        let row = s.row(Tier::Low);
        assert_eq!((row.language_share, row.token_share), (1.0, 1.0));
    }

    #[test]
    fn summary_all_scarce() {
        let t = CensusTable::from_tokens([("A", 5), ("B", 7), ("C", 0)]);
        let s = tier_summary(&t, &TierThresholds::default()).unwrap();
        let row = s.row(Tier::Scarce);
        assert_eq!((row.language_share, row.token_share), (1.0, 1.0));
        assert_eq!(s.row(Tier::High).n_languages, 0);
    }

    #[test]
    fn summary_of_empty_census_fails() {
        assert_eq!(
            tier_summary(&CensusTable::default(), &TierThresholds::default()),
            Err(StatsError::EmptyCensus)
        );
    }

    #[test]
    fn gini_examples() {
        assert_eq!(gini(&[7, 7, 7]).unwrap(), 0.0);
        assert!((gini(&[1, 2, 3, 4]).unwrap() - 0.25).abs() < 1e-15);
        assert!((gini(&[3, 1]).unwrap() - 0.25).abs() < 1e-15);
        assert_eq!(gini(&[0, 0]), Err(StatsError::ZeroTotal));
        assert_eq!(gini(&[]), Err(StatsError::EmptyValues));
        assert!((gini(&[0, 0, 0, 10]).unwrap() - 0.75).abs() < 1e-15);
    }

    #[test]
    fn cv_examples() {
        assert_eq!(coefficient_of_variation(&[4, 4, 4]).unwrap(), 0.0);
        assert!((coefficient_of_variation(&[2, 4, 4, 4, 5, 5, 7, 9]).unwrap() - 0.4).abs() < 1e-15);
        assert!((coefficient_of_variation(&[0, 2]).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(coefficient_of_variation(&[0]), Err(StatsError::ZeroTotal));
    }

    #[test]
    fn mean_median_examples() {
        assert_eq!(mean_median(&[1, 2, 3]).unwrap(), (2.0, 2.0));
        assert_eq!(mean_median(&[1, 10, 1]).unwrap(), (4.0, 1.0));
        assert_eq!(mean_median(&[4, 3, 2, 1]).unwrap(), (2.5, 2.5));
        assert_eq!(
            mean_median(&[u64::MAX, u64::MAX]).unwrap().1,
            u64::MAX as f64
        );
        assert_eq!(mean_median(&[]), Err(StatsError::EmptyValues));
    }

    #[test]
    fn lorenz_examples() {
        assert_eq!(
            lorenz_points(&[3, 1]).unwrap(),
            vec![(0.0, 0.0), (0.5, 0.25), (1.0, 1.0)]
        );
        for (p, s) in lorenz_points(&[9; 7]).unwrap() {
            assert_eq!(p, s);
        }
        assert_eq!(
            lorenz_points(&[0, 10, 0]).unwrap(),
            vec![(0.0, 0.0), (1.0 / 3.0, 0.0), (2.0 / 3.0, 0.0), (1.0, 1.0)]
        );
        assert_eq!(lorenz_points(&[0, 0]), Err(StatsError::ZeroTotal));
    }

    #[test]
    fn survival_examples() {
        let v = [500_000_000, 2 * B, 50 * B, 200 * B];
        let s = ecdf_survival(&v, &[1e9]).unwrap();
        assert_eq!(s, vec![(1e9, 0.75)]);
        assert_eq!(ecdf_survival(&v, &[1.0]).unwrap()[0].1, 1.0);
        assert_eq!(ecdf_survival(&v, &[1e12]).unwrap()[0].1, 0.0);
        // value equal to the threshold survives
        assert_eq!(ecdf_survival(&v, &[2e9]).unwrap()[0].1, 0.75);
        assert_eq!(ecdf_survival(&v, &[]), Err(StatsError::EmptyGrid));
        assert_eq!(ecdf_survival(&v, &[2.0, 1.0]), Err(StatsError::BadGrid));
        assert_eq!(ecdf_survival(&v, &[0.0, 1.0]), Err(StatsError::BadGrid));
    }

    #[test]
    fn default_grid_shape() {
        let g = default_survival_grid();
        assert_eq!(g.len(), 31);
        assert_eq!(g[0], 1e6);
        assert_eq!(g[5], 1e7);
        assert_eq!(g[30], 1e12);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn top_bottom_cases() {
        let th = TierThresholds::default();
        let t = CensusTable::from_tokens([("Only", 3)]);
        let (top, bottom) = top_bottom(&t, 10, &th).unwrap();
        assert_eq!(top.len(), 1);
        assert_eq!(top, bottom);
        assert_eq!(top[0].rank, 1);

        let t = CensusTable::from_tokens([("b", 5), ("a", 5), ("z", 1), ("y", 9)]);
        let (top, bottom) = top_bottom(&t, 2, &th).unwrap();
        let names = |v: &[RankedLanguage]| v.iter().map(|r| r.language.clone()).collect::<Vec<_>>();
        assert_eq!(names(&top), vec!["y", "a"]);
        assert_eq!(names(&bottom), vec!["b", "z"]);
        assert_eq!(bottom[1].rank, 4);
        assert_eq!(top_bottom(&t, 0, &th), Err(StatsError::ZeroK));
    }

    #[test]
    fn percent_rounding() {
        assert_eq!(format_percent(5689.0 / 7630.0), "74.6");
        assert_eq!(format_percent(0.0745), "7.5");
        assert_eq!(format_percent(0.07449), "7.4");
        assert_eq!(format_percent(1.0), "100.0");
        assert_eq!(format_percent(0.0), "0.0");
    }
}
