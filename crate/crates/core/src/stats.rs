//! Share of buildings without usable annotation, per region and per
//! category.
//!
//! A building counts as annotated when any step other than the residential
//! fallback resolved it, i.e. its own tags or an inherited tag were used.

use serde::Serialize;
use thiserror::Error;

use crate::classifier::{ClassifiedFootprint, Stage};
use crate::pipeline::Category;

pub const DEFAULT_BIN_WIDTH: f64 = 0.05;

#[derive(Debug, Error, PartialEq)]
pub enum StatsError {
    #[error("histogram bin width {0} must be in (0, 1]")]
    BinWidth(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionStats {
    pub region: String,
    pub category: Category,
    pub n_buildings: usize,
    pub n_annotated: usize,
    /// Absent for a region without buildings.
    pub untagged_fraction: Option<f64>,
}

pub fn is_annotated(row: &ClassifiedFootprint) -> bool {
    row.stage != Stage::ResidentialUnknownTag
}

pub fn annotation_stats(region: &str, category: Category, rows: &[ClassifiedFootprint]) -> RegionStats {
    let n_buildings = rows.len();
    let n_annotated = rows.iter().filter(|r| is_annotated(r)).count();
    let untagged_fraction = (n_buildings > 0).then(|| (n_buildings - n_annotated) as f64 / n_buildings as f64);
    RegionStats {
        region: region.to_string(),
        category,
        n_buildings,
        n_annotated,
        untagged_fraction,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CategorySummary {
    pub category: Category,
    pub n_regions: usize,
    /// Regions without buildings; they have no fraction and are not binned.
    pub n_empty_regions: usize,
    pub n_buildings: usize,
    /// Mean over regions, each counting once.
    pub mean_untagged_fraction: Option<f64>,
    /// Untagged buildings over all buildings of the category.
    pub weighted_untagged_fraction: Option<f64>,
    pub bin_width: f64,
    /// Counts for `[i*w, (i+1)*w)`, the last bin closed at 1.
    pub histogram: Vec<usize>,
}

fn bin_count(width: f64) -> usize {
    (1.0 / width - 1e-9).ceil().max(1.0) as usize
}

fn bin_of(f: f64, width: f64, n: usize) -> usize {
    ((f / width + 1e-9).floor() as usize).min(n - 1)
}

/// Per-category summary in category order, for the categories present.
pub fn aggregate(stats: &[RegionStats], bin_width: f64) -> Result<Vec<CategorySummary>, StatsError> {
    if !(bin_width > 0.0 && bin_width <= 1.0) {
        return Err(StatsError::BinWidth(bin_width));
    }
    let n_bins = bin_count(bin_width);
    let mut out = Vec::new();
    for category in Category::ALL {
        let members: Vec<&RegionStats> = stats.iter().filter(|s| s.category == category).collect();
        if members.is_empty() {
            continue;
        }
        // sorted so the sum does not depend on input order
        let mut fractions: Vec<f64> = members.iter().filter_map(|s| s.untagged_fraction).collect();
        fractions.sort_by(f64::total_cmp);
        let n_buildings: usize = members.iter().map(|s| s.n_buildings).sum();
        let n_annotated: usize = members.iter().map(|s| s.n_annotated).sum();
        let mut histogram = vec![0; n_bins];
        for f in &fractions {
            histogram[bin_of(*f, bin_width, n_bins)] += 1;
        }
        out.push(CategorySummary {
            category,
            n_regions: members.len(),
            n_empty_regions: members.len() - fractions.len(),
            n_buildings,
            mean_untagged_fraction: (!fractions.is_empty())
                .then(|| fractions.iter().sum::<f64>() / fractions.len() as f64),
            weighted_untagged_fraction: (n_buildings > 0)
                .then(|| (n_buildings - n_annotated) as f64 / n_buildings as f64),
            bin_width,
            histogram,
        });
    }
    Ok(out)
}

fn opt(v: Option<f64>) -> String {
    v.map(|f| f.to_string()).unwrap_or_default()
}

fn finish(w: csv::Writer<Vec<u8>>) -> String {
    String::from_utf8(w.into_inner().expect("in-memory writer")).expect("csv output is UTF-8")
}

/// `region,category,n_buildings,untagged_fraction`
pub fn regions_csv(stats: &[RegionStats]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["region", "category", "n_buildings", "untagged_fraction"])
        .unwrap();
    for s in stats {
        w.write_record([
            s.region.clone(),
            s.category.to_string(),
            s.n_buildings.to_string(),
            opt(s.untagged_fraction),
        ])
        .unwrap();
    }
    finish(w)
}

pub fn summary_csv(summary: &[CategorySummary]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "category",
        "n_regions",
        "n_empty_regions",
        "n_buildings",
        "mean_untagged_fraction",
        "weighted_untagged_fraction",
    ])
    .unwrap();
    for s in summary {
        w.write_record([
            s.category.to_string(),
            s.n_regions.to_string(),
            s.n_empty_regions.to_string(),
            s.n_buildings.to_string(),
            opt(s.mean_untagged_fraction),
            opt(s.weighted_untagged_fraction),
        ])
        .unwrap();
    }
    finish(w)
}

pub fn histogram_csv(summary: &[CategorySummary]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["category", "bin_start", "bin_end", "count"]).unwrap();
    for s in summary {
        for (i, n) in s.histogram.iter().enumerate() {
            let start = i as f64 * s.bin_width;
            let end = ((i + 1) as f64 * s.bin_width).min(1.0);
            w.write_record([
                s.category.to_string(),
                format!("{start:.4}"),
                format!("{end:.4}"),
                n.to_string(),
            ])
            .unwrap();
        }
    }
    finish(w)
}
