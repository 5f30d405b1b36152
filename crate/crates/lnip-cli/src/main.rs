//! Command-line pipeline around the `lnip` library: tile datasets, build
//! feature stores, run queries, and score retrieval quality.
//!
//! Flag values win over the optional `--config` TOML file, which wins
//! over built-in defaults (`LNIP_THREADS` slots in between for the
//! thread count). A bare `index` + `evaluate` run uses the combined
//! descriptor with the d1 metric.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use lnip::descriptors::{extract_feature, DescriptorKind};
use lnip::evaluation::{emit_curves, emit_report, evaluate};
use lnip::imaging::{load_dataset, load_image, save_png, tile};
use lnip::retrieval::{build_index, load_index, query, save_index};
use lnip::similarity::DistanceMetric;

#[derive(Parser)]
#[command(
    name = "lnip",
    version,
    about = "Texture descriptor extraction, retrieval, and evaluation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Split every dataset image into fixed-size tiles.
    Tile(CommonArgs),
    /// Extract features for a dataset and write a feature store.
    Index(CommonArgs),
    /// Rank stored images by distance to a query image.
    Query {
        #[command(flatten)]
        common: CommonArgs,
        /// Query image path.
        image: PathBuf,
        /// Number of results to print.
        #[arg(long)]
        top: Option<usize>,
    },
    /// Score retrieval over a feature store and write a CSV report.
    Evaluate {
        #[command(flatten)]
        common: CommonArgs,
        /// Also write one (P_total, R_total) curve row per n to this file.
        #[arg(long)]
        curves: Option<PathBuf>,
    },
}

#[derive(Args)]
struct CommonArgs {
    /// Dataset root: category subdirectories, or a manifest.tsv.
    #[arg(long)]
    dataset: Option<PathBuf>,

    /// Feature store path.
    #[arg(long)]
    store: Option<PathBuf>,

    /// Descriptor kind: lbp, lnip-s, lnip-m, lnip.
    #[arg(long)]
    kind: Option<String>,

    /// Distance metric: d1, euclidean, manhattan, canberra, chi-square.
    #[arg(long)]
    metric: Option<String>,

    /// Retrieval counts: a comma list (25,30,35) or range (25..70:5).
    #[arg(long)]
    n: Option<String>,

    /// Tile size as WxH, e.g. 128x128.
    #[arg(long)]
    tile: Option<String>,

    /// Output path: tile directory, or evaluation CSV.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Worker threads (fallback: LNIP_THREADS, then all cores).
    #[arg(long)]
    threads: Option<usize>,

    /// L1-normalize histograms before computing distances.
    #[arg(long)]
    normalize: bool,

    /// TOML file supplying defaults for any of these flags.
    #[arg(long)]
    config: Option<PathBuf>,
}

/// Flag defaults loadable from `--config`.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    dataset: Option<PathBuf>,
    store: Option<PathBuf>,
    kind: Option<String>,
    metric: Option<String>,
    n: Option<String>,
    tile: Option<String>,
    out: Option<PathBuf>,
    threads: Option<usize>,
    normalize: Option<bool>,
    top: Option<usize>,
}

/// Fully resolved settings for one command invocation.
struct RunConfig {
    dataset: Option<PathBuf>,
    store: Option<PathBuf>,
    kind: Option<DescriptorKind>,
    metric: DistanceMetric,
    n_list: Vec<usize>,
    tile: Option<(usize, usize)>,
    out: Option<PathBuf>,
    threads: Option<usize>,
    normalize: bool,
    top: usize,
}

impl RunConfig {
    fn dataset(&self) -> Result<&Path> {
        self.dataset
            .as_deref()
            .ok_or_else(|| anyhow!("missing --dataset <dir>"))
    }

    fn store(&self) -> Result<&Path> {
        self.store
            .as_deref()
            .ok_or_else(|| anyhow!("missing --store <file>"))
    }

    /// The kind to use against a loaded store: an explicitly requested
    /// kind must match what the store holds.
    fn check_kind(&self, store_kind: DescriptorKind) -> Result<DescriptorKind> {
        match self.kind {
            Some(requested) if requested != store_kind => {
                bail!("store holds {store_kind} features but --kind {requested} was requested")
            }
            _ => Ok(store_kind),
        }
    }
}

fn env_threads() -> Result<Option<usize>> {
    match std::env::var("LNIP_THREADS") {
        Ok(v) => {
            let count = v
                .trim()
                .parse()
                .with_context(|| format!("LNIP_THREADS={v:?} is not a valid thread count"))?;
            Ok(Some(count))
        }
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(e).context("reading LNIP_THREADS"),
    }
}

/// Parses `25,30,35` or an inclusive range `25..70:5` (step optional).
fn parse_n_list(spec: &str) -> Result<Vec<usize>> {
    let spec = spec.trim();
    if let Some((start_s, rest)) = spec.split_once("..") {
        let (end_s, step_s) = match rest.split_once(':') {
            Some((e, s)) => (e, Some(s)),
            None => (rest, None),
        };
        let start: usize = start_s
            .trim()
            .parse()
            .with_context(|| format!("invalid range start in {spec:?}"))?;
        let end: usize = end_s
            .trim()
            .parse()
            .with_context(|| format!("invalid range end in {spec:?}"))?;
        let step: usize = match step_s {
            Some(s) => s
                .trim()
                .parse()
                .with_context(|| format!("invalid range step in {spec:?}"))?,
            None => 1,
        };
        if start == 0 || step == 0 || end < start {
            bail!("invalid retrieval count range {spec:?}");
        }
        return Ok((start..=end).step_by(step).collect());
    }
    let mut out = Vec::new();
    for part in spec.split(',') {
        let n: usize = part
            .trim()
            .parse()
            .with_context(|| format!("invalid retrieval count {:?}", part.trim()))?;
        if n == 0 {
            bail!("retrieval counts must be at least 1");
        }
        out.push(n);
    }
    Ok(out)
}

fn parse_tile(spec: &str) -> Result<(usize, usize)> {
    let (w, h) = spec
        .trim()
        .split_once(['x', 'X'])
        .ok_or_else(|| anyhow!("tile size must look like 128x128, got {spec:?}"))?;
    let w = w
        .trim()
        .parse()
        .with_context(|| format!("invalid tile width in {spec:?}"))?;
    let h = h
        .trim()
        .parse()
        .with_context(|| format!("invalid tile height in {spec:?}"))?;
    Ok((w, h))
}

fn resolve(cli: CommonArgs, top_flag: Option<usize>) -> Result<RunConfig> {
    let file: FileConfig = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading config {}", path.display()))?;
            toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?
        }
        None => FileConfig::default(),
    };

    let kind = cli
        .kind
        .or(file.kind)
        .map(|s| s.parse::<DescriptorKind>())
        .transpose()?;
    let metric = cli
        .metric
        .or(file.metric)
        .map(|s| s.parse::<DistanceMetric>())
        .transpose()?
        .unwrap_or(DistanceMetric::D1);
    let n_list = parse_n_list(cli.n.or(file.n).as_deref().unwrap_or("25"))?;
    let tile = cli.tile.or(file.tile).map(|s| parse_tile(&s)).transpose()?;
    let threads = match cli.threads.or(file.threads) {
        Some(t) => Some(t),
        None => env_threads()?,
    };
    if threads == Some(0) {
        bail!("thread count must be at least 1");
    }
    Ok(RunConfig {
        dataset: cli.dataset.or(file.dataset),
        store: cli.store.or(file.store),
        kind,
        metric,
        n_list,
        tile,
        out: cli.out.or(file.out),
        threads,
        // The flag can only switch normalization on, so presence in
        // either source wins.
        normalize: cli.normalize || file.normalize.unwrap_or(false),
        top: top_flag.or(file.top).unwrap_or(10),
    })
}

fn init_threads(config: &RunConfig) -> Result<()> {
    if let Some(threads) = config.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .context("initializing worker threads")?;
    }
    Ok(())
}

fn cmd_tile(config: &RunConfig) -> Result<()> {
    let dataset = config.dataset()?;
    let (tw, th) = config
        .tile
        .ok_or_else(|| anyhow!("tile requires --tile <WxH>"))?;
    let out = config
        .out
        .as_deref()
        .ok_or_else(|| anyhow!("tile requires --out <dir>"))?;

    let items = load_dataset(dataset, None)?;
    let mut count = 0usize;
    for item in &items {
        let name = item
            .id
            .strip_prefix(&format!("{}/", item.category))
            .unwrap_or(&item.id)
            .replace('/', "_");
        let stem = name.rsplit_once('.').map(|(s, _)| s).unwrap_or(&name);
        let dir = out.join(&item.category);
        fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
        for (k, t) in tile(&item.image, tw, th)?.into_iter().enumerate() {
            save_png(&t, &dir.join(format!("{stem}_{k:03}.png")))?;
            count += 1;
        }
    }
    println!("wrote {count} tiles under {}", out.display());
    Ok(())
}

fn cmd_index(config: &RunConfig) -> Result<()> {
    let dataset = config.dataset()?;
    let store = config.store()?;
    let kind = config.kind.unwrap_or(DescriptorKind::Lnip);

    let start = Instant::now();
    let items = load_dataset(dataset, config.tile)?;
    let index = build_index(&items, kind)?;
    save_index(&index, store)?;
    log::info!("indexed {} items in {:.2?}", index.len(), start.elapsed());
    println!(
        "indexed {} entries of {} bins -> {}",
        index.len(),
        kind.feature_len(),
        store.display()
    );
    Ok(())
}

fn cmd_query(config: &RunConfig, image: &Path) -> Result<()> {
    let store = config.store()?;
    let index = load_index(store)?;
    let kind = config.check_kind(index.kind())?;
    let feature = extract_feature(&load_image(image)?, kind)?;
    let result = query(
        &index,
        image.display().to_string(),
        &feature,
        config.metric,
        config.top,
        config.normalize,
    )?;
    for (rank, hit) in result.ranked.iter().enumerate() {
        println!(
            "{}\t{}\t{}\t{:.6}",
            rank + 1,
            hit.id,
            hit.category,
            hit.distance
        );
    }
    Ok(())
}

fn cmd_evaluate(config: &RunConfig, curves: Option<&Path>) -> Result<()> {
    let store = config.store()?;
    let out = config
        .out
        .as_deref()
        .ok_or_else(|| anyhow!("evaluate requires --out <csv>"))?;
    let index = load_index(store)?;
    config.check_kind(index.kind())?;

    let start = Instant::now();
    let reports = evaluate(&index, config.metric, &config.n_list, config.normalize)?;
    log::info!(
        "evaluated {} queries at {} retrieval counts in {:.2?}",
        index.len(),
        config.n_list.len(),
        start.elapsed()
    );
    emit_report(&reports, out)?;
    if let Some(curves_path) = curves {
        emit_curves(&reports, curves_path)?;
    }
    println!("report -> {}", out.display());
    println!("n\tP_total\tR_total");
    for r in &reports {
        println!("{}\t{:.6}\t{:.6}", r.n_retrieved, r.p_total, r.r_total);
    }
    Ok(())
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match Cli::parse().command {
        Command::Tile(common) => {
            let config = resolve(common, None)?;
            init_threads(&config)?;
            cmd_tile(&config)
        }
        Command::Index(common) => {
            let config = resolve(common, None)?;
            init_threads(&config)?;
            cmd_index(&config)
        }
        Command::Query { common, image, top } => {
            let config = resolve(common, top)?;
            init_threads(&config)?;
            cmd_query(&config, &image)
        }
        Command::Evaluate { common, curves } => {
            let config = resolve(common, None)?;
            init_threads(&config)?;
            cmd_evaluate(&config, curves.as_deref())
        }
    }
}
