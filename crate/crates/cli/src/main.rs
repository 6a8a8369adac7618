use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand};

use osmbc_core::osm::{parse_features, write_geojson, FeatureCollection};
use osmbc_core::pipeline::{
    load_boundary, make_tiles, parse_tiles, read_classified, run_region, Category, FetchError, LocalSource,
    OverpassClient, OverpassConfig, PipelineError, RegionSpec, TileSource,
};
use osmbc_core::rules::{default_rules, load_rules, ConfigError, RuleSet};
use osmbc_core::stats::{aggregate, annotation_stats, histogram_csv, regions_csv, summary_csv, StatsError};
use osmbc_core::validation::{
    load_mapping, map_truth, metrics_table, preset, TruthIndex, ValidationError, PRESET_NAMES,
};

#[derive(Parser)]
#[command(
    name = "osmbc",
    version,
    about = "Residential / non-residential classification of OSM building footprints"
)]
struct Cli {
    /// Worker threads for fetching and classification.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// More log output on standard error (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify every building of a region and write the GeoJSON output.
    Classify(ClassifyArgs),
    /// Score a classified file against ground-truth polygons.
    Validate(ValidateArgs),
    /// Untagged-building statistics over classified files.
    Stats(StatsArgs),
    /// Download and merge the raw OSM features of a region.
    Fetch(FetchArgs),
}

#[derive(Args)]
struct RulesArgs {
    /// Rule configuration (JSON); the shipped default when omitted.
    #[arg(long)]
    rules: Option<PathBuf>,
    /// Use the key lists exactly as printed in the source tables.
    #[arg(long)]
    literal_supplement_lists: bool,
}

#[derive(Args)]
struct RemoteArgs {
    /// Overpass endpoint.
    #[arg(long, env = "OSMBC_OVERPASS_URL")]
    endpoint: Option<String>,
    /// Minimum milliseconds between two requests.
    #[arg(long, default_value_t = 1000)]
    min_interval_ms: u64,
    /// Delay before the first retry in milliseconds; doubled for each further one.
    #[arg(long, default_value_t = 2000)]
    backoff_ms: u64,
}

#[derive(Args)]
struct ClassifyArgs {
    /// Region boundary: GeoJSON or OSM XML with a single polygon.
    #[arg(long)]
    boundary: PathBuf,
    /// Local OSM XML or GeoJSON files holding the region's features.
    #[arg(long, num_args = 1.., required_unless_present = "fetch", conflicts_with = "fetch")]
    input: Vec<PathBuf>,
    /// Download the features from an Overpass endpoint instead.
    #[arg(long)]
    fetch: bool,
    #[command(flatten)]
    remote: RemoteArgs,
    #[command(flatten)]
    rules: RulesArgs,
    /// Tile grid as columns x rows.
    #[arg(long, default_value = "5x5", value_parser = parse_tiles)]
    tiles: (usize, usize),
    /// Output root; files go to <out>/<category>/<CBSA>/<STCOU>_<name>.geojson.
    #[arg(long)]
    out: PathBuf,
    /// Region name used in the file name; defaults to the boundary file stem.
    #[arg(long)]
    region_name: Option<String>,
    /// Five-digit state and county FIPS code.
    #[arg(long)]
    stcou: Option<String>,
    /// Core-based statistical area code.
    #[arg(long)]
    cbsa: Option<String>,
    #[arg(long, default_value = "other", value_parser = |s: &str| s.parse::<Category>())]
    category: Category,
}

#[derive(Args)]
struct ValidateArgs {
    /// Classified GeoJSON written by `classify`.
    #[arg(long)]
    pred: PathBuf,
    /// Ground-truth polygons (GeoJSON).
    #[arg(long)]
    truth: PathBuf,
    /// Preset name or mapping JSON file.
    #[arg(long)]
    mapping: String,
    /// Leave out sheds, garages and parking structures.
    #[arg(long)]
    exclude_structures: bool,
    /// Also write the full report as JSON.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct StatsArgs {
    /// Classified GeoJSON files, one per region.
    #[arg(long, num_args = 1.., required = true)]
    pred: Vec<PathBuf>,
    /// One category for all files, or one per file.
    #[arg(long, num_args = 1.., default_value = "other", value_parser = |s: &str| s.parse::<Category>())]
    category: Vec<Category>,
    #[arg(long, default_value_t = osmbc_core::stats::DEFAULT_BIN_WIDTH)]
    bin_width: f64,
    /// Directory for regions.csv, summary.csv and histogram.csv.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct FetchArgs {
    #[arg(long)]
    boundary: PathBuf,
    #[command(flatten)]
    remote: RemoteArgs,
    #[command(flatten)]
    rules: RulesArgs,
    #[arg(long, default_value = "5x5", value_parser = parse_tiles)]
    tiles: (usize, usize),
    /// Merged GeoJSON output file.
    #[arg(long)]
    out: PathBuf,
}

/// Invalid flags or configuration files.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<UsageError>() || cause.is::<ConfigError>() || cause.is::<StatsError>() {
            return 2;
        }
        if let Some(e) = cause.downcast_ref::<PipelineError>() {
            return match e {
                PipelineError::Config(_) => 2,
                PipelineError::Fetch(FetchError::Parse { .. }) => 1,
                PipelineError::Fetch(_) => 3,
                _ => 1,
            };
        }
        if let Some(e) = cause.downcast_ref::<FetchError>() {
            return if matches!(e, FetchError::Parse { .. }) { 1 } else { 3 };
        }
        if let Some(e) = cause.downcast_ref::<ValidationError>() {
            return match e {
                ValidationError::UnmappedLabel { .. } => 4,
                ValidationError::MappingSchema { .. } | ValidationError::UnknownPreset(_) => 2,
                ValidationError::Empty => 1,
            };
        }
    }
    1
}

fn read(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).with_context(|| format!("cannot read {}", path.display()))
}

fn load_rule_set(args: &RulesArgs) -> Result<RuleSet> {
    let mut rules = match &args.rules {
        Some(p) => {
            let bytes = std::fs::read(p).map_err(|e| usage(format!("cannot read {}: {e}", p.display())))?;
            load_rules(&bytes).with_context(|| format!("in {}", p.display()))?
        }
        None => default_rules(),
    };
    if args.literal_supplement_lists && !rules.literal_supplement_lists {
        rules.literal_supplement_lists = true;
        rules = load_rules(rules.to_json().as_bytes())?;
    }
    Ok(rules)
}

fn overpass(remote: &RemoteArgs) -> Result<OverpassClient> {
    let endpoint = remote
        .endpoint
        .clone()
        .ok_or_else(|| usage("no Overpass endpoint: pass --endpoint or set OSMBC_OVERPASS_URL"))?;
    let mut cfg = OverpassConfig::new(endpoint);
    cfg.min_interval = Duration::from_millis(remote.min_interval_ms);
    cfg.backoff = Duration::from_millis(remote.backoff_ms);
    Ok(OverpassClient::new(cfg)?)
}

fn boundary(path: &Path) -> Result<osmbc_core::geometry::Polygon> {
    load_boundary(&read(path)?).with_context(|| format!("boundary {}", path.display()))
}

fn classify(args: ClassifyArgs) -> Result<()> {
    let rules = load_rule_set(&args.rules)?;
    let polygon = boundary(&args.boundary)?;
    let name = match args.region_name {
        Some(n) => n,
        None => args
            .boundary
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .ok_or_else(|| usage("cannot derive a region name; pass --region-name"))?,
    };
    let spec = RegionSpec::new(polygon, name, args.stcou, args.cbsa, args.category)?;
    let source: Box<dyn TileSource> = if args.fetch {
        Box::new(overpass(&args.remote)?)
    } else {
        Box::new(LocalSource::from_files(&args.input)?)
    };
    let (nx, ny) = args.tiles;
    let (run, paths) = run_region(&spec, source.as_ref(), &rules, nx, ny, &args.out)?;
    let r = &run.report;
    eprintln!(
        "{}: {} buildings ({} tiles of {}, {} duplicates removed), EPSG:{}",
        r.region, r.n_buildings, r.tiles_retained, r.tiles_total, r.duplicates_removed, r.epsg
    );
    eprintln!("wrote {} and {}", paths.geojson.display(), paths.report.display());
    Ok(())
}

fn validate(args: ValidateArgs) -> Result<()> {
    let mapping = if PRESET_NAMES.contains(&args.mapping.as_str()) {
        preset(&args.mapping)?
    } else {
        let bytes = std::fs::read(&args.mapping).map_err(|e| {
            usage(format!(
                "`{}` is neither a preset ({}) nor a readable file: {e}",
                args.mapping,
                PRESET_NAMES.join(", ")
            ))
        })?;
        load_mapping(&bytes)?
    };
    let pred = read_classified(&read(&args.pred)?).with_context(|| format!("predictions {}", args.pred.display()))?;
    if !pred.skipped.is_empty() {
        log::warn!("predictions: {}", pred.skipped);
    }
    let (truth_fc, truth_skips) =
        parse_features(&read(&args.truth)?).with_context(|| format!("truth {}", args.truth.display()))?;
    if !truth_skips.is_empty() {
        log::warn!("ground truth: {truth_skips}");
    }
    let truth = TruthIndex::new(map_truth(&truth_fc, &mapping)?);
    let report = osmbc_core::validation::validate(pred.rows, pred.skipped.total(), &truth, args.exclude_structures)?;
    let a = &report.accounting;
    eprintln!(
        "evaluated {} of {} buildings (no overlap {}, mixed use {}, unreadable {}, ties {}, structures removed {})",
        a.evaluated, a.input_buildings, a.no_overlap, a.na, a.geometry_error, a.ties, a.structures_removed
    );
    print!("{}", metrics_table(&report.metrics));
    if let Some(p) = args.json {
        let mut text = serde_json::to_string_pretty(&report)?;
        text.push('\n');
        std::fs::write(&p, text).with_context(|| format!("cannot write {}", p.display()))?;
    }
    Ok(())
}

fn stats(args: StatsArgs) -> Result<()> {
    let categories = match args.category.len() {
        1 => vec![args.category[0]; args.pred.len()],
        n if n == args.pred.len() => args.category.clone(),
        n => {
            return Err(usage(format!(
                "{n} categories for {} files; give one or one per file",
                args.pred.len()
            )))
        }
    };
    let mut regions = Vec::new();
    for (path, category) in args.pred.iter().zip(categories) {
        let file = read_classified(&read(path)?).with_context(|| format!("predictions {}", path.display()))?;
        let name = path
            .file_name()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        let region = name.strip_suffix(".geojson").unwrap_or(&name).to_string();
        regions.push(annotation_stats(&region, category, &file.rows));
    }
    let summary = aggregate(&regions, args.bin_width)?;
    std::fs::create_dir_all(&args.out).with_context(|| format!("cannot create {}", args.out.display()))?;
    for (name, text) in [
        ("regions.csv", regions_csv(&regions)),
        ("summary.csv", summary_csv(&summary)),
        ("histogram.csv", histogram_csv(&summary)),
    ] {
        let p = args.out.join(name);
        std::fs::write(&p, text).with_context(|| format!("cannot write {}", p.display()))?;
    }
    eprintln!(
        "{} region(s) in {} categor{}",
        regions.len(),
        summary.len(),
        if summary.len() == 1 { "y" } else { "ies" }
    );
    Ok(())
}

fn fetch(args: FetchArgs) -> Result<()> {
    let rules = load_rule_set(&args.rules)?;
    let polygon = boundary(&args.boundary)?;
    let client = overpass(&args.remote)?;
    let (nx, ny) = args.tiles;
    let grid = make_tiles(&polygon, nx, ny)?;
    eprintln!("fetching {} of {} tiles", grid.tiles.len(), grid.total());
    let keys = rules.download_keys();
    let mut merged = FeatureCollection::default();
    for tile in &grid.tiles {
        let data = client.fetch_tile(tile, &keys)?;
        if !data.skipped.is_empty() {
            log::warn!("{tile}: {}", data.skipped);
        }
        merged.extend(data.features);
    }
    let n = merged.len();
    let merged = merged.dedup();
    let duplicates = n - merged.len();
    let merged = merged.retain_with_any_key(&keys);
    eprintln!("{} features ({duplicates} duplicates removed)", merged.len());
    std::fs::write(&args.out, write_geojson(&merged, None))
        .with_context(|| format!("cannot write {}", args.out.display()))?;
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.jobs {
        if n == 0 {
            return Err(usage("--jobs must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| anyhow!(e))?;
    }
    match cli.command {
        Command::Classify(a) => classify(a),
        Command::Validate(a) => validate(a),
        Command::Stats(a) => stats(a),
        Command::Fetch(a) => fetch(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
