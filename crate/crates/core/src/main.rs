use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{ArgMatches, Args, CommandFactory, FromArgMatches, Parser, Subcommand};

use code_census::dedup::{DedupLedger, DEFAULT_SHARDS};
use code_census::ingest::DEFAULT_MAX_FILE_BYTES;
use code_census::lang_id::{ExtensionMap, BUNDLED_MAP};
use code_census::pipeline::{self, CorpusSource, ScanOptions, SourceKind};
use code_census::report::{self, Manifest, MapIdentity, RunConfig, TokenizerIdentity};
use code_census::taxonomy::{default_survival_grid, parse_token_count, TierThresholds};
use code_census::tokenizer::{BpeModel, Tokenizer};

/// Corpus resource accounting: dedup, language tagging, token counts,
/// resource tiers and inequality statistics.
#[derive(Parser)]
#[command(name = "code-census", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Deduplicate, tag and count one or more corpora into a census.
    Scan(ScanArgs),
    /// Assign tiers and write the classification tables.
    Classify(ClassifyArgs),
    /// Compute Gini, CV, mean/median, Lorenz and survival data per tier.
    Stats(StatsArgs),
    /// classify + stats + a human-readable summary.
    Report(ReportArgs),
}

#[derive(Args)]
struct ThresholdArgs {
    /// Minimum tokens for tier 3 (High); accepts K/M/B/T suffixes.
    #[arg(long, default_value = "100B", value_parser = parse_token_count)]
    tier3: u64,
    /// Minimum tokens for tier 2 (Medium).
    #[arg(long, default_value = "10B", value_parser = parse_token_count)]
    tier2: u64,
    /// Minimum tokens for tier 1 (Low).
    #[arg(long, default_value = "1B", value_parser = parse_token_count)]
    tier1: u64,
}

#[derive(Args)]
struct ScanArgs {
    /// Directory corpus as `id=path`. Repeatable; order sets dedup precedence.
    #[arg(long = "corpus", value_name = "ID=PATH")]
    corpus: Vec<String>,
    /// Newline-delimited JSON record dump as `id=path`. Repeatable.
    #[arg(long = "records", value_name = "ID=PATH")]
    records: Vec<String>,
    /// Extension map file (defaults to the bundled Linguist-derived map).
    #[arg(long, env = "CODE_CENSUS_MAP")]
    map: Option<PathBuf>,
    /// BPE vocabulary (`token<TAB>id` per line). Requires --merges.
    #[arg(long, requires = "merges")]
    vocab: Option<PathBuf>,
    /// BPE merges (`left right` per line, rank = line order). Requires --vocab.
    #[arg(long, requires = "vocab")]
    merges: Option<PathBuf>,
    #[command(flatten)]
    thresholds: ThresholdArgs,
    /// Worker threads.
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long, default_value = "census-out")]
    out: PathBuf,
    /// Skip files larger than this many bytes (0 disables the cap).
    #[arg(long, default_value_t = DEFAULT_MAX_FILE_BYTES)]
    max_file_bytes: u64,
    /// Directory holding a persisted dedup ledger; loaded if present, saved after the scan.
    #[arg(long)]
    ledger: Option<PathBuf>,
    /// Re-run the scan recorded in a manifest.json (other inputs are ignored except --out).
    #[arg(long, conflicts_with_all = ["corpus", "records"])]
    manifest: Option<PathBuf>,
}

#[derive(Args)]
struct ClassifyArgs {
    /// Census CSV produced by `scan`.
    census: PathBuf,
    #[command(flatten)]
    thresholds: ThresholdArgs,
    /// Rows in each of the top and bottom lists.
    #[arg(long, default_value_t = 10)]
    top: usize,
    #[arg(long, default_value = "census-out")]
    out: PathBuf,
}

#[derive(Args)]
struct StatsArgs {
    census: PathBuf,
    #[command(flatten)]
    thresholds: ThresholdArgs,
    /// Comma-separated survival thresholds (default: 10^6..10^12, 5 per decade).
    #[arg(long, value_delimiter = ',')]
    grid: Option<Vec<f64>>,
    #[arg(long, default_value = "census-out")]
    out: PathBuf,
}

#[derive(Args)]
struct ReportArgs {
    census: PathBuf,
    #[command(flatten)]
    thresholds: ThresholdArgs,
    #[arg(long, default_value_t = 10)]
    top: usize,
    #[arg(long, value_delimiter = ',')]
    grid: Option<Vec<f64>>,
    #[arg(long, default_value = "census-out")]
    out: PathBuf,
}

enum Failure {
    /// Bad flags or configuration: exit 2.
    Config(anyhow::Error),
    /// Unreadable or invalid input: exit 1.
    Input(anyhow::Error),
}

type CliResult<T> = Result<T, Failure>;

fn config_err(msg: impl Into<String>) -> Failure {
    Failure::Config(anyhow::anyhow!(msg.into()))
}

trait InputContext<T> {
    fn input(self) -> CliResult<T>;
}

impl<T, E: Into<anyhow::Error>> InputContext<T> for Result<T, E> {
    fn input(self) -> CliResult<T> {
        self.map_err(|e| Failure::Input(e.into()))
    }
}

fn main() -> ExitCode {
    let matches = Cli::command().get_matches();
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    let result = match cli.command {
        Command::Scan(args) => {
            let sub = matches.subcommand_matches("scan").expect("scan matches");
            cmd_scan(args, sub)
        }
        Command::Classify(args) => cmd_classify(args),
        Command::Stats(args) => cmd_stats(args),
        Command::Report(args) => cmd_report(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Input(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn thresholds(args: &ThresholdArgs) -> CliResult<TierThresholds> {
    TierThresholds::new(args.tier3, args.tier2, args.tier1).map_err(|e| Failure::Config(e.into()))
}

/// Corpus bindings in command-line order, interleaving --corpus and --records.
fn corpus_bindings(args: &ScanArgs, matches: &ArgMatches) -> CliResult<Vec<CorpusSource>> {
    let mut indexed = Vec::new();
    for (flag, values, kind) in [
        ("corpus", &args.corpus, SourceKind::Directory),
        ("records", &args.records, SourceKind::Records),
    ] {
        let indices: Vec<usize> = matches
            .indices_of(flag)
            .map(|it| it.collect())
            .unwrap_or_default();
        for (idx, value) in indices.into_iter().zip(values) {
            let (id, path) = value
                .split_once('=')
                .filter(|(id, path)| !id.is_empty() && !path.is_empty())
                .ok_or_else(|| config_err(format!("--{flag} expects ID=PATH, got {value:?}")))?;
            indexed.push((
                idx,
                CorpusSource {
                    id: id.to_string(),
                    kind,
                    path: PathBuf::from(path),
                },
            ));
        }
    }
    indexed.sort_by_key(|(idx, _)| *idx);
    let sources: Vec<CorpusSource> = indexed.into_iter().map(|(_, s)| s).collect();
    let mut ids = std::collections::HashSet::new();
    for s in &sources {
        if !ids.insert(s.id.as_str()) {
            return Err(config_err(format!("corpus id {:?} bound twice", s.id)));
        }
    }
    Ok(sources)
}

fn load_map(path: Option<&Path>) -> CliResult<(ExtensionMap, MapIdentity)> {
    let (text, source) = match path {
        Some(p) => (
            std::fs::read_to_string(p)
                .with_context(|| format!("reading map {}", p.display()))
                .input()?,
            p.display().to_string(),
        ),
        None => (BUNDLED_MAP.to_string(), "bundled".to_string()),
    };
    let map = ExtensionMap::parse(&text)
        .with_context(|| format!("loading map {source}"))
        .input()?;
    let identity = MapIdentity {
        source,
        sha256: report::sha256_hex(text.as_bytes()),
        languages: map.languages().len(),
    };
    Ok((map, identity))
}

fn load_tokenizer(
    vocab: Option<&Path>,
    merges: Option<&Path>,
) -> CliResult<(Tokenizer, TokenizerIdentity)> {
    match (vocab, merges) {
        (Some(v), Some(m)) => {
            let model = BpeModel::load(v, m).context("loading BPE model").input()?;
            let hash = |p: &Path| -> CliResult<String> {
                let bytes = std::fs::read(p)
                    .with_context(|| format!("reading {}", p.display()))
                    .input()?;
                Ok(report::sha256_hex(&bytes))
            };
            Ok((
                Tokenizer::Bpe(model),
                TokenizerIdentity {
                    kind: "bpe".into(),
                    vocab_sha256: Some(hash(v)?),
                    merges_sha256: Some(hash(m)?),
                },
            ))
        }
        (None, None) => Ok((
            Tokenizer::Whitespace,
            TokenizerIdentity {
                kind: "whitespace".into(),
                vocab_sha256: None,
                merges_sha256: None,
            },
        )),
        _ => Err(config_err("--vocab and --merges must be given together")),
    }
}

fn cmd_scan(args: ScanArgs, matches: &ArgMatches) -> CliResult<()> {
    let (config, recorded) = match &args.manifest {
        Some(path) => {
            let manifest = Manifest::load(path).input()?;
            let mut config = manifest.config.clone();
            if matches.value_source("out") == Some(clap::parser::ValueSource::CommandLine) {
                config.out = args.out.clone();
            }
            (config, Some(manifest))
        }
        None => {
            let corpora = corpus_bindings(&args, matches)?;
            if corpora.is_empty() {
                return Err(config_err(
                    "scan needs at least one --corpus or --records binding",
                ));
            }
            let workers = args
                .workers
                .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
            (
                RunConfig {
                    corpora,
                    map: args.map.clone(),
                    vocab: args.vocab.clone(),
                    merges: args.merges.clone(),
                    thresholds: thresholds(&args.thresholds)?,
                    workers,
                    out: args.out.clone(),
                    max_file_bytes: (args.max_file_bytes > 0).then_some(args.max_file_bytes),
                    ledger: args.ledger.clone(),
                },
                None,
            )
        }
    };
    if config.workers == 0 {
        return Err(config_err("--workers must be at least 1"));
    }

    let (map, map_id) = load_map(config.map.as_deref())?;
    let (tokenizer, tok_id) = load_tokenizer(config.vocab.as_deref(), config.merges.as_deref())?;
    if let Some(recorded) = &recorded {
        if recorded.map.sha256 != map_id.sha256 {
            return Err(Failure::Input(anyhow::anyhow!(
                "map {} differs from the one recorded in the manifest",
                map_id.source
            )));
        }
        if recorded.tokenizer != tok_id {
            return Err(Failure::Input(anyhow::anyhow!(
                "tokenizer files differ from those recorded in the manifest"
            )));
        }
    }

    let ledger = match &config.ledger {
        Some(dir) if dir.is_dir() => DedupLedger::load(dir, DEFAULT_SHARDS)
            .with_context(|| format!("loading ledger {}", dir.display()))
            .input()?,
        _ => DedupLedger::default(),
    };
    let output = pipeline::scan(
        &config.corpora,
        &map,
        &tokenizer,
        &ledger,
        ScanOptions {
            workers: config.workers,
            max_file_bytes: config.max_file_bytes,
        },
    )
    .input()?;
    if let Some(dir) = &config.ledger {
        ledger
            .save(dir)
            .with_context(|| format!("saving ledger {}", dir.display()))
            .input()?;
    }

    let out = config.out.clone();
    let manifest = Manifest::new(config, map_id, tok_id);
    report::write_scan(&out, &output, &manifest).input()?;
    report::print(&format!(
        "scanned {} files ({} unique, {} duplicates, {} skipped, {} decode errors); {} languages; tokenizer: {}\n",
        output.ingest.files_emitted,
        output.dedup.unique,
        output.dedup.duplicates,
        output.ingest.files_skipped,
        output.ingest.decode_errors,
        output.census.entries.len(),
        manifest.tokenizer.kind,
    ));
    Ok(())
}

fn cmd_classify(args: ClassifyArgs) -> CliResult<()> {
    let th = thresholds(&args.thresholds)?;
    if args.top == 0 {
        return Err(config_err("--top must be at least 1"));
    }
    let table = report::read_census(&args.census).input()?;
    let class = report::write_classification(&args.out, &table, &th, args.top).input()?;
    report::print(&format!(
        "classified {} languages into tiers; wrote {}\n",
        class.summary.n_languages,
        args.out.display()
    ));
    Ok(())
}

fn survival_grid(grid: Option<Vec<f64>>) -> CliResult<Vec<f64>> {
    let grid = grid.unwrap_or_else(default_survival_grid);
    if grid.is_empty()
        || grid[0] <= 0.0
        || grid
            .windows(2)
            .any(|w| w[1].partial_cmp(&w[0]) != Some(std::cmp::Ordering::Greater))
    {
        return Err(config_err(
            "--grid must be positive and strictly increasing",
        ));
    }
    Ok(grid)
}

fn cmd_stats(args: StatsArgs) -> CliResult<()> {
    let th = thresholds(&args.thresholds)?;
    let grid = survival_grid(args.grid)?;
    let table = report::read_census(&args.census).input()?;
    report::write_stats(&args.out, &table, &th, &grid).input()?;
    report::print(&format!("wrote statistics to {}\n", args.out.display()));
    Ok(())
}

fn cmd_report(args: ReportArgs) -> CliResult<()> {
    let th = thresholds(&args.thresholds)?;
    let grid = survival_grid(args.grid)?;
    if args.top == 0 {
        return Err(config_err("--top must be at least 1"));
    }
    let table = report::read_census(&args.census).input()?;
    let class = report::write_classification(&args.out, &table, &th, args.top).input()?;
    let stats = report::write_stats(&args.out, &table, &th, &grid).input()?;
    let text = report::render_summary(&class, &stats);
    report::write_summary(&args.out, &text).input()?;
    report::print(&text);
    Ok(())
}
