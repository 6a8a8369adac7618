//! Region-scale runs: tile the boundary, acquire each tile, merge, classify
//! and write the result.

mod output;
mod overpass;

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classifier::{classify_collection, stage_counts, BuildingClass, ClassifiedFootprint, ClassifyError, Stage};
use crate::geometry::{combined_centroid, intersects, BBox, Point, Polygon, SpatialIndex};
use crate::osm::{parse_features, FeatureCollection, ParseError, SkipReport};
use crate::rules::RuleSet;
use crate::stats::annotation_stats;

pub use output::{classified_geojson, read_classified, write_outputs, ClassifiedFile, OutputPaths};
pub use overpass::{overpass_query, FetchError, OverpassClient, OverpassConfig};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Fetch(#[from] FetchError),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Classify(#[from] ClassifyError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl PipelineError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

/// Output folder taxonomy by statistical-area type.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Category {
    Metropolitan,
    Micropolitan,
    Other,
}

impl Category {
    pub const ALL: [Category; 3] = [Category::Metropolitan, Category::Micropolitan, Category::Other];

    pub fn as_str(self) -> &'static str {
        match self {
            Category::Metropolitan => "metropolitan",
            Category::Micropolitan => "micropolitan",
            Category::Other => "other",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Category {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Category::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| format!("unknown category `{s}` (expected metropolitan, micropolitan or other)"))
    }
}

#[derive(Debug, Clone)]
pub struct RegionSpec {
    pub boundary: Polygon,
    pub name: String,
    pub stcou: Option<String>,
    pub cbsa: Option<String>,
    pub category: Category,
}

fn path_safe(what: &str, s: &str) -> Result<(), PipelineError> {
    if s.is_empty() || s.contains(['/', '\\']) || s == "." || s == ".." {
        return Err(PipelineError::Config(format!(
            "{what} `{s}` cannot be used in a file name"
        )));
    }
    Ok(())
}

impl RegionSpec {
    pub fn new(
        boundary: Polygon,
        name: impl Into<String>,
        stcou: Option<String>,
        cbsa: Option<String>,
        category: Category,
    ) -> Result<Self, PipelineError> {
        let name = name.into();
        path_safe("region name", &name)?;
        if let Some(s) = &stcou {
            if s.len() != 5 || !s.bytes().all(|b| b.is_ascii_digit()) {
                return Err(PipelineError::Config(format!("STCOU `{s}` is not a 5-digit code")));
            }
        }
        if let Some(c) = &cbsa {
            path_safe("CBSA", c)?;
        }
        Ok(Self {
            boundary,
            name,
            stcou,
            cbsa,
            category,
        })
    }

    /// `<STCOU>_<name>`, or just the name without a county code.
    pub fn file_stem(&self) -> String {
        match &self.stcou {
            Some(s) => format!("{s}_{}", self.name),
            None => self.name.clone(),
        }
    }

    /// `<root>/<category>/<CBSA>/`; the CBSA level is omitted when absent.
    pub fn output_dir(&self, root: &Path) -> PathBuf {
        let mut dir = root.join(self.category.as_str());
        if let Some(c) = &self.cbsa {
            dir.push(c);
        }
        dir
    }
}

/// Reads a boundary file (GeoJSON or OSM XML) holding exactly one polygon.
pub fn load_boundary(bytes: &[u8]) -> Result<Polygon, PipelineError> {
    let (fc, _) = parse_features(bytes)?;
    match fc.features.len() {
        1 => Ok(fc.features.into_iter().next().unwrap().geometry),
        n => Err(PipelineError::Config(format!(
            "boundary must contain exactly one polygon, found {n}"
        ))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tile {
    pub row: usize,
    pub col: usize,
    pub bbox: BBox,
}

impl fmt::Display for Tile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "tile r{}c{}", self.row, self.col)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TileGrid {
    pub nx: usize,
    pub ny: usize,
    /// Tiles that touch the boundary, row-major from the south-west corner.
    pub tiles: Vec<Tile>,
}

impl TileGrid {
    pub fn total(&self) -> usize {
        self.nx * self.ny
    }
}

/// Splits the boundary's bounding box into `nx` columns and `ny` rows and
/// keeps the tiles that intersect the boundary.
pub fn make_tiles(boundary: &Polygon, nx: usize, ny: usize) -> Result<TileGrid, PipelineError> {
    if nx < 1 || ny < 1 {
        return Err(PipelineError::Config(format!(
            "tile grid {nx}x{ny} must be at least 1x1"
        )));
    }
    let b = boundary.bbox();
    // the outer edges are the bbox edges exactly so no sliver is lost
    let lon = |i: usize| {
        if i == nx {
            b.max_lon
        } else {
            b.min_lon + b.width() * i as f64 / nx as f64
        }
    };
    let lat = |j: usize| {
        if j == ny {
            b.max_lat
        } else {
            b.min_lat + b.height() * j as f64 / ny as f64
        }
    };
    let mut tiles = Vec::new();
    for row in 0..ny {
        for col in 0..nx {
            let bbox = BBox::new(lon(col), lat(row), lon(col + 1), lat(row + 1));
            let keep = bbox.to_polygon().map(|p| intersects(&p, boundary)).unwrap_or(false);
            if keep {
                tiles.push(Tile { row, col, bbox });
            }
        }
    }
    Ok(TileGrid { nx, ny, tiles })
}

/// Parses `"NxM"` (columns by rows).
pub fn parse_tiles(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("`{s}` is not of the form NxN"))?;
    let parse = |t: &str| {
        t.trim()
            .parse::<usize>()
            .map_err(|_| format!("`{s}` is not of the form NxN"))
    };
    let (nx, ny) = (parse(a)?, parse(b)?);
    if nx < 1 || ny < 1 {
        return Err(format!("tile grid `{s}` must be at least 1x1"));
    }
    Ok((nx, ny))
}

/// `a // b` for floats as Python evaluates it, which can differ from
/// `(a / b).floor()` when the quotient rounds up to an integer.
fn py_floor_div(a: f64, b: f64) -> f64 {
    let m = a % b;
    let mut div = (a - m) / b;
    if m != 0.0 && ((b < 0.0) != (m < 0.0)) {
        div -= 1.0;
    }
    if div == 0.0 {
        return 0.0_f64.copysign(a / b);
    }
    let mut f = div.floor();
    if div - f > 0.5 {
        f += 1.0;
    }
    f
}

/// EPSG code of the UTM zone holding `c`, 326xx north of the equator and
/// 327xx south of it. Longitude 180 would give zone 61 and is kept in 60.
pub fn utm_epsg(c: Point) -> u32 {
    let zone = (py_floor_div(c.lon + 180.0, 6.0) as i64 + 1).clamp(1, 60) as u32;
    if c.lat >= 0.0 {
        32600 + zone
    } else {
        32700 + zone
    }
}

#[derive(Debug, Default)]
pub struct TileData {
    pub features: FeatureCollection,
    pub skipped: SkipReport,
}

/// Anything that can hand over the features of one tile.
pub trait TileSource: Sync {
    fn fetch(&self, tile: &Tile, keys: &[String]) -> Result<TileData, PipelineError>;

    /// Elements dropped while loading the source up front, if any.
    fn load_skips(&self) -> SkipReport {
        SkipReport::default()
    }
}

/// Features already on disk, served per tile by intersection.
pub struct LocalSource {
    features: FeatureCollection,
    index: SpatialIndex<usize>,
    skipped: SkipReport,
}

impl LocalSource {
    pub fn new(features: FeatureCollection) -> Self {
        let index = SpatialIndex::build(features.iter().enumerate().map(|(i, f)| (i, f.geometry.bbox())));
        Self {
            features,
            index,
            skipped: SkipReport::default(),
        }
    }

    /// Loads and concatenates OSM XML or GeoJSON files.
    pub fn from_files(paths: &[PathBuf]) -> Result<Self, PipelineError> {
        let mut all = FeatureCollection::default();
        let mut skipped = SkipReport::default();
        for p in paths {
            let bytes = std::fs::read(p).map_err(|e| PipelineError::io(p, e))?;
            let (fc, sk) = parse_features(&bytes)?;
            all.extend(fc);
            skipped.merge(&sk);
        }
        let mut src = Self::new(all);
        src.skipped = skipped;
        Ok(src)
    }
}

impl TileSource for LocalSource {
    fn fetch(&self, tile: &Tile, _keys: &[String]) -> Result<TileData, PipelineError> {
        let area = tile
            .bbox
            .to_polygon()
            .map_err(|e| PipelineError::Config(format!("{tile}: {e}")))?;
        let mut hits: Vec<usize> = self
            .index
            .query(&tile.bbox)
            .copied()
            .filter(|&i| intersects(&area, &self.features.features[i].geometry))
            .collect();
        hits.sort_unstable();
        let features = hits.into_iter().map(|i| self.features.features[i].clone()).collect();
        Ok(TileData {
            features,
            skipped: SkipReport::default(),
        })
    }

    fn load_skips(&self) -> SkipReport {
        self.skipped.clone()
    }
}

impl TileSource for OverpassClient {
    fn fetch(&self, tile: &Tile, keys: &[String]) -> Result<TileData, PipelineError> {
        Ok(self.fetch_tile(tile, keys)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub region: String,
    pub stcou: Option<String>,
    pub cbsa: Option<String>,
    pub category: Category,
    pub epsg: u32,
    pub tiles_total: usize,
    pub tiles_retained: usize,
    pub features_downloaded: usize,
    pub duplicates_removed: usize,
    pub n_buildings: usize,
    pub n_auxiliary: usize,
    pub class_counts: BTreeMap<BuildingClass, usize>,
    pub stage_counts: BTreeMap<Stage, usize>,
    pub untagged_fraction: Option<f64>,
    pub skipped: BTreeMap<String, usize>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct RegionRun {
    pub rows: Vec<ClassifiedFootprint>,
    pub report: RunReport,
}

/// Acquires, merges and classifies one region without touching the disk.
pub fn process_region(
    spec: &RegionSpec,
    source: &dyn TileSource,
    rules: &RuleSet,
    nx: usize,
    ny: usize,
) -> Result<RegionRun, PipelineError> {
    let grid = make_tiles(&spec.boundary, nx, ny)?;
    let keys = rules.download_keys();
    log::info!("{}: fetching {} of {} tiles", spec.name, grid.tiles.len(), grid.total());
    let parts: Vec<TileData> = grid
        .tiles
        .par_iter()
        .map(|t| source.fetch(t, &keys))
        .collect::<Result<_, _>>()?;

    let mut skipped = source.load_skips();
    let mut merged = FeatureCollection::default();
    for part in parts {
        skipped.merge(&part.skipped);
        merged.extend(part.features);
    }
    let downloaded = merged.len();
    let merged = merged.dedup();
    let duplicates_removed = downloaded - merged.len();

    let boundary = &spec.boundary;
    let bb = boundary.bbox();
    let mut relevant = merged.retain_with_any_key(&keys).strip_surface_key();
    relevant
        .features
        .retain(|f| f.geometry.bbox().intersects(&bb) && intersects(&f.geometry, boundary));
    let (buildings, auxiliary) = relevant.partition();
    let rows = classify_collection(&buildings, &auxiliary, rules)?;

    let centre = if buildings.is_empty() {
        boundary.centroid()
    } else {
        combined_centroid(buildings.iter().map(|f| &f.geometry))
    };
    let epsg = utm_epsg(centre.unwrap_or_else(|_| bb.center()));

    let mut warnings = Vec::new();
    if rows.is_empty() {
        warnings.push(format!("{}: no buildings found; writing an empty file", spec.name));
    }
    if !skipped.is_empty() {
        warnings.push(skipped.to_string());
    }
    for w in &warnings {
        log::warn!("{w}");
    }

    let mut class_counts: BTreeMap<BuildingClass, usize> = [(BuildingClass::Res, 0), (BuildingClass::NonRes, 0)].into();
    for r in &rows {
        *class_counts.get_mut(&r.class).unwrap() += 1;
    }
    let report = RunReport {
        region: spec.name.clone(),
        stcou: spec.stcou.clone(),
        cbsa: spec.cbsa.clone(),
        category: spec.category,
        epsg,
        tiles_total: grid.total(),
        tiles_retained: grid.tiles.len(),
        features_downloaded: downloaded,
        duplicates_removed,
        n_buildings: rows.len(),
        n_auxiliary: auxiliary.len(),
        class_counts,
        stage_counts: stage_counts(&rows),
        untagged_fraction: annotation_stats(&spec.file_stem(), spec.category, &rows).untagged_fraction,
        skipped: skipped.reasons,
        warnings,
    };
    Ok(RegionRun { rows, report })
}

/// Runs a region end to end and writes the GeoJSON and its report.
pub fn run_region(
    spec: &RegionSpec,
    source: &dyn TileSource,
    rules: &RuleSet,
    nx: usize,
    ny: usize,
    out_root: &Path,
) -> Result<(RegionRun, OutputPaths), PipelineError> {
    let run = process_region(spec, source, rules, nx, ny)?;
    let paths = write_outputs(out_root, spec, &run)?;
    Ok((run, paths))
}
