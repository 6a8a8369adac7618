//! Scoring classified footprints against official land-use polygons.
//!
//! Each building takes the label of the truth polygon it overlaps most.
//! Buildings overlapping nothing, or whose best polygon is mixed-use, are
//! left out of the metrics and counted separately.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use indexmap::IndexMap;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classifier::{BuildingClass, ClassifiedFootprint, Stage};
use crate::geometry::{convex_hull, intersects, overlap_area, Polygon, SpatialIndex};
use crate::osm::{FeatureCollection, FeatureId};

/// Relative tolerance under which two overlap areas count as equal.
pub const TIE_TOLERANCE: f64 = 1e-9;

/// `building` values of small structures dropped by [`filter_structures`].
pub const STRUCTURE_VALUES: [&str; 4] = ["shed", "garage", "garages", "parking"];

pub const PRESET_NAMES: [&str; 6] = [
    "minneapolis",
    "baltimore",
    "boulder",
    "fairfax",
    "hanover",
    "mecklenburg",
];

#[derive(Debug, Error)]
pub enum ValidationError {
    #[error("truth label `{label}` (column `{column}`) is not in the mapping")]
    UnmappedLabel { label: String, column: String },
    #[error("mapping error at `{path}`: {message}")]
    MappingSchema { path: String, message: String },
    #[error("unknown mapping preset `{0}`")]
    UnknownPreset(String),
    #[error("no building could be evaluated")]
    Empty,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TruthLabel {
    #[serde(rename = "RES")]
    Res,
    #[serde(rename = "NON_RES")]
    NonRes,
    /// Mixed use or not applicable; never scored.
    #[serde(rename = "NA")]
    Na,
}

impl TruthLabel {
    pub fn as_class(self) -> Option<BuildingClass> {
        match self {
            TruthLabel::Res => Some(BuildingClass::Res),
            TruthLabel::NonRes => Some(BuildingClass::NonRes),
            TruthLabel::Na => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruthMapping {
    pub source_column: String,
    /// Columns tried in order when `source_column` is absent on a row.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub fallback_columns: Vec<String>,
    /// Raw label to class. `"None"` is used for rows without any label.
    pub entries: IndexMap<String, TruthLabel>,
}

pub fn load_mapping(bytes: &[u8]) -> Result<TruthMapping, ValidationError> {
    let de = &mut serde_json::Deserializer::from_slice(bytes);
    serde_path_to_error::deserialize(de).map_err(|e| ValidationError::MappingSchema {
        path: e.path().to_string(),
        message: e.inner().to_string(),
    })
}

/// One of the shipped mappings by name.
pub fn preset(name: &str) -> Result<TruthMapping, ValidationError> {
    let text = match name {
        "minneapolis" => include_str!("../presets/minneapolis.json"),
        "baltimore" => include_str!("../presets/baltimore.json"),
        "boulder" => include_str!("../presets/boulder.json"),
        "fairfax" => include_str!("../presets/fairfax.json"),
        "hanover" => include_str!("../presets/hanover.json"),
        "mecklenburg" => include_str!("../presets/mecklenburg.json"),
        other => return Err(ValidationError::UnknownPreset(other.to_string())),
    };
    Ok(load_mapping(text.as_bytes()).expect("shipped presets are valid"))
}

impl TruthMapping {
    /// Label of one row's properties.
    pub fn label(&self, props: &crate::osm::TagMap) -> Result<TruthLabel, ValidationError> {
        let found = std::iter::once(&self.source_column)
            .chain(&self.fallback_columns)
            .find_map(|c| props.get(c).map(|v| (c, v.as_str())));
        let (column, raw) = found.unwrap_or((&self.source_column, "None"));
        self.entries
            .get(raw)
            .or_else(|| self.entries.get(raw.trim()))
            .copied()
            .ok_or_else(|| ValidationError::UnmappedLabel {
                label: raw.to_string(),
                column: column.clone(),
            })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruthPolygon {
    pub id: FeatureId,
    pub geometry: Polygon,
    pub label: TruthLabel,
}

pub fn map_truth(fc: &FeatureCollection, mapping: &TruthMapping) -> Result<Vec<GroundTruthPolygon>, ValidationError> {
    fc.iter()
        .map(|f| {
            Ok(GroundTruthPolygon {
                id: f.id.clone(),
                geometry: f.geometry.clone(),
                label: mapping.label(&f.tags)?,
            })
        })
        .collect()
}

/// Truth polygons behind an R-tree, with the convex hull of all of them as
/// the validation area.
pub struct TruthIndex {
    polygons: Vec<GroundTruthPolygon>,
    index: SpatialIndex<usize>,
    hull: Option<Polygon>,
}

impl TruthIndex {
    pub fn new(polygons: Vec<GroundTruthPolygon>) -> Self {
        let index = SpatialIndex::build(polygons.iter().enumerate().map(|(i, p)| (i, p.geometry.bbox())));
        let vertices: Vec<_> = polygons
            .iter()
            .flat_map(|p| p.geometry.outer().vertices().to_vec())
            .collect();
        let hull = convex_hull(&vertices).ok();
        Self { polygons, index, hull }
    }

    pub fn len(&self) -> usize {
        self.polygons.len()
    }

    pub fn is_empty(&self) -> bool {
        self.polygons.is_empty()
    }

    pub fn hull(&self) -> Option<&Polygon> {
        self.hull.as_ref()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Assignment {
    pub label: TruthLabel,
    /// Another polygon had the same overlap within [`TIE_TOLERANCE`].
    pub tied: bool,
}

/// Label of the truth polygon with the largest overlap, or `None` when the
/// building overlaps no truth polygon with positive area.
pub fn assign_truth(building: &Polygon, truth: &TruthIndex) -> Option<Assignment> {
    if let Some(h) = &truth.hull {
        if !(h.bbox().intersects(&building.bbox()) && intersects(h, building)) {
            return None;
        }
    }
    let mut scored: Vec<(f64, &GroundTruthPolygon)> = truth
        .index
        .query(&building.bbox())
        .map(|&i| &truth.polygons[i])
        .map(|t| (overlap_area(building, &t.geometry), t))
        .filter(|(a, _)| *a > 0.0)
        .collect();
    let best = scored.iter().map(|(a, _)| *a).fold(0.0, f64::max);
    if best <= 0.0 {
        return None;
    }
    scored.retain(|(a, _)| *a >= best * (1.0 - TIE_TOLERANCE));
    let tied = scored.len() > 1;
    let winner = scored
        .iter()
        .min_by(|(_, x), (_, y)| (x.label != TruthLabel::NonRes, &x.id).cmp(&(y.label != TruthLabel::NonRes, &y.id)))
        .map(|(_, t)| t)?;
    Some(Assignment {
        label: winner.label,
        tied,
    })
}

/// Drops rows resolved by a small-structure building value.
pub fn filter_structures(rows: Vec<ClassifiedFootprint>) -> Vec<ClassifiedFootprint> {
    rows.into_iter().filter(|r| !is_structure(&r.tag_used)).collect()
}

/// `building: shed` and friends, with or without the space after the colon.
pub fn is_structure(tag_used: &str) -> bool {
    match tag_used.split_once(':') {
        Some((k, v)) => k.trim() == "building" && STRUCTURE_VALUES.contains(&v.trim()),
        None => false,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassMetrics {
    pub class: BuildingClass,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Buildings whose truth is this class.
    pub support: usize,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    /// Some ratio had a zero denominator and was reported as 0.
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    /// Non-residential first, then residential.
    pub classes: Vec<ClassMetrics>,
    pub avg_f1: f64,
    pub n_samples: usize,
    /// truth class -> predicted class -> count
    pub confusion: BTreeMap<BuildingClass, BTreeMap<BuildingClass, usize>>,
}

impl MetricsReport {
    pub fn class(&self, c: BuildingClass) -> &ClassMetrics {
        self.classes
            .iter()
            .find(|m| m.class == c)
            .expect("both classes present")
    }
}

fn ratio(num: usize, den: usize) -> (f64, bool) {
    if den == 0 {
        (0.0, true)
    } else {
        (num as f64 / den as f64, false)
    }
}

/// Per-class precision, recall and F1 over `(predicted, truth)` pairs.
pub fn compute_metrics(pairs: &[(BuildingClass, BuildingClass)]) -> Result<MetricsReport, ValidationError> {
    if pairs.is_empty() {
        return Err(ValidationError::Empty);
    }
    let classes = [BuildingClass::NonRes, BuildingClass::Res];
    let mut confusion: BTreeMap<BuildingClass, BTreeMap<BuildingClass, usize>> = classes
        .iter()
        .map(|t| (*t, classes.iter().map(|p| (*p, 0)).collect()))
        .collect();
    for (p, t) in pairs {
        *confusion.get_mut(t).unwrap().get_mut(p).unwrap() += 1;
    }
    let per_class = classes
        .iter()
        .map(|&c| {
            let tp = confusion[&c][&c];
            let support: usize = confusion[&c].values().sum();
            let predicted: usize = confusion.values().map(|row| row[&c]).sum();
            let (fp, fn_) = (predicted - tp, support - tp);
            let (precision, d1) = ratio(tp, tp + fp);
            let (recall, d2) = ratio(tp, tp + fn_);
            let (f1, d3) = ratio(2 * tp, 2 * tp + fp + fn_);
            ClassMetrics {
                class: c,
                precision,
                recall,
                f1,
                support,
                tp,
                fp,
                fn_,
                degenerate: d1 || d2 || d3,
            }
        })
        .collect::<Vec<_>>();
    let avg_f1 = (per_class[0].f1 + per_class[1].f1) / 2.0;
    Ok(MetricsReport {
        classes: per_class,
        avg_f1,
        n_samples: pairs.len(),
        confusion,
    })
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct CauseHistogram {
    pub no_tags: usize,
    pub wrong_res_tag: usize,
    pub wrong_res_auxiliary: usize,
}

impl CauseHistogram {
    pub fn total(&self) -> usize {
        self.no_tags + self.wrong_res_tag + self.wrong_res_auxiliary
    }

    /// Shares of the three causes, `None` when nothing was misclassified.
    pub fn fractions(&self) -> Option<[f64; 3]> {
        let t = self.total();
        (t > 0).then(|| [self.no_tags, self.wrong_res_tag, self.wrong_res_auxiliary].map(|n| n as f64 / t as f64))
    }
}

/// Why non-residential buildings were predicted residential, by stage.
pub fn misclassification_causes<'a>(
    rows: impl IntoIterator<Item = (&'a ClassifiedFootprint, TruthLabel)>,
) -> CauseHistogram {
    let mut h = CauseHistogram::default();
    for (row, truth) in rows {
        if truth != TruthLabel::NonRes || row.class != BuildingClass::Res {
            continue;
        }
        match row.stage {
            Stage::ResidentialUnknownTag => h.no_tags += 1,
            Stage::ResidentialTypes => h.wrong_res_tag += 1,
            Stage::ResidentialAuxiliary => h.wrong_res_auxiliary += 1,
            _ => unreachable!("residential predictions come from residential stages"),
        }
    }
    h
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Accounting {
    pub input_buildings: usize,
    pub evaluated: usize,
    pub no_overlap: usize,
    pub na: usize,
    pub geometry_error: usize,
    pub ties: usize,
    /// Rows dropped by the small-structure filter before evaluation.
    pub structures_removed: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub accounting: Accounting,
    pub metrics: MetricsReport,
    pub causes: CauseHistogram,
}

/// Scores `rows` against `truth`. `geometry_errors` counts prediction
/// features that could not be read and is only carried into the accounting.
pub fn validate(
    rows: Vec<ClassifiedFootprint>,
    geometry_errors: usize,
    truth: &TruthIndex,
    exclude_structures: bool,
) -> Result<ValidationReport, ValidationError> {
    let before = rows.len();
    let rows = if exclude_structures {
        filter_structures(rows)
    } else {
        rows
    };
    let assignments: Vec<Option<Assignment>> = rows
        .par_iter()
        .map(|r| assign_truth(&r.feature.geometry, truth))
        .collect();

    let mut acc = Accounting {
        input_buildings: rows.len() + geometry_errors,
        geometry_error: geometry_errors,
        structures_removed: before - rows.len(),
        ..Default::default()
    };
    let mut pairs = Vec::new();
    let mut labelled = Vec::new();
    for (row, a) in rows.iter().zip(&assignments) {
        let Some(a) = a else {
            acc.no_overlap += 1;
            continue;
        };
        acc.ties += a.tied as usize;
        match a.label.as_class() {
            Some(t) => {
                pairs.push((row.class, t));
                labelled.push((row, a.label));
            }
            None => acc.na += 1,
        }
    }
    acc.evaluated = pairs.len();
    let metrics = compute_metrics(&pairs)?;
    let causes = misclassification_causes(labelled);
    Ok(ValidationReport {
        accounting: acc,
        metrics,
        causes,
    })
}

fn class_name(c: BuildingClass) -> &'static str {
    match c {
        BuildingClass::NonRes => "non-residential",
        BuildingClass::Res => "residential",
    }
}

/// Plain-text table with the columns Class, Precision, Recall, F1-Score and
/// Avg. F1-Score.
pub fn metrics_table(m: &MetricsReport) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<16} {:>9} {:>7} {:>8} {:>13}",
        "Class", "Precision", "Recall", "F1-Score", "Avg. F1-Score"
    );
    for (i, c) in m.classes.iter().enumerate() {
        let avg = if i == 0 {
            format!("{:.2}", m.avg_f1)
        } else {
            String::new()
        };
        let _ = writeln!(
            s,
            "{:<16} {:>9.2} {:>7.2} {:>8.2} {:>13}",
            class_name(c.class),
            c.precision,
            c.recall,
            c.f1,
            avg
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifier::classify_one;
    use crate::geometry::Point;
    use crate::osm::{Feature, TagMap};
    use crate::rules::default_rules;
    use BuildingClass::{NonRes, Res};

    fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> Polygon {
        Polygon::from_coords(&[(x0, y0), (x1, y0), (x1, y1), (x0, y1)], &[]).unwrap()
    }

    fn truth(id: &str, g: Polygon, label: TruthLabel) -> GroundTruthPolygon {
        GroundTruthPolygon {
            id: FeatureId::new(id),
            geometry: g,
            label,
        }
    }

    fn props(kv: &[(&str, &str)]) -> TagMap {
        kv.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
    }

    fn row(id: &str, g: Polygon, building: &str, aux: &[(&str, &str)]) -> ClassifiedFootprint {
        let b = Feature::new(FeatureId::new(id), g.clone(), props(&[("building", building)]));
        let a = Feature::new(FeatureId::new("aux"), g, props(aux));
        let hits: Vec<&Feature> = if aux.is_empty() { vec![] } else { vec![&a] };
        classify_one(&b, &hits, &default_rules()).unwrap()
    }

    #[test]
    fn boulder_preset() {
        let m = preset("boulder").unwrap();
        assert_eq!(m.source_column, "BLDGTYPE");
        assert_eq!(
            m.label(&props(&[("BLDGTYPE", "Residential")])).unwrap(),
            TruthLabel::Res
        );
        assert_eq!(m.label(&props(&[("BLDGTYPE", "Garage/Shed")])).unwrap(), TruthLabel::Na);
        assert!(matches!(
            m.label(&props(&[("BLDGTYPE", "ZZZ")])),
            Err(ValidationError::UnmappedLabel { ref label, .. }) if label == "ZZZ"
        ));
    }

    #[test]
    fn presets_load_with_their_columns() {
        let cols: Vec<String> = PRESET_NAMES.iter().map(|n| preset(n).unwrap().source_column).collect();
        assert_eq!(
            cols,
            [
                "DESC2020",
                "GIS_LU_COD",
                "BLDGTYPE",
                "CATEG",
                "ZONING_LIS",
                "landuse_de"
            ]
        );
        let sizes: Vec<usize> = PRESET_NAMES.iter().map(|n| preset(n).unwrap().entries.len()).collect();
        assert_eq!(sizes, [22, 53, 14, 23, 32, 145]);
        assert!(preset("nowhere").is_err());
        let meck = preset("mecklenburg").unwrap();
        assert_eq!(meck.entries["TOWN HOUSE  SFR"], TruthLabel::Res);
        assert_eq!(meck.entries["HOTEL/MOTEL < 7 FLOORS"], TruthLabel::NonRes);
    }

    #[test]
    fn fairfax_city_column_and_missing_label() {
        let m = preset("fairfax").unwrap();
        assert_eq!(m.label(&props(&[("ELU", "Commercial")])).unwrap(), TruthLabel::NonRes);
        assert_eq!(
            m.label(&props(&[("CATEG", "Low-density Residential")])).unwrap(),
            TruthLabel::Res
        );
        assert_eq!(m.label(&props(&[])).unwrap(), TruthLabel::Na);
        let err = preset("boulder").unwrap().label(&props(&[])).unwrap_err();
        assert!(err.to_string().contains("None"));
    }

    #[test]
    fn mapping_schema_errors() {
        assert!(matches!(
            load_mapping(br#"{"entries": {}}"#),
            Err(ValidationError::MappingSchema { .. })
        ));
        let err = load_mapping(br#"{"source_column": "c", "entries": {"a": "MAYBE"}}"#).unwrap_err();
        assert!(err.to_string().contains("entries.a"), "{err}");
    }

    #[test]
    fn largest_overlap_wins() {
        let idx = TruthIndex::new(vec![
            truth("t1", rect(0.0, 0.0, 0.0006, 0.001), TruthLabel::NonRes),
            truth("t2", rect(0.0006, 0.0, 0.002, 0.001), TruthLabel::Res),
        ]);
        let b = rect(0.0, 0.0, 0.001, 0.001);
        assert_eq!(
            assign_truth(&b, &idx),
            Some(Assignment {
                label: TruthLabel::NonRes,
                tied: false
            })
        );
        assert_eq!(
            assign_truth(&rect(0.0007, 0.0, 0.0008, 0.001), &idx).unwrap().label,
            TruthLabel::Res
        );
        assert_eq!(assign_truth(&rect(0.01, 0.01, 0.02, 0.02), &idx), None);
        // sharing only an edge is no overlap
        assert_eq!(assign_truth(&rect(0.002, 0.0, 0.003, 0.001), &idx), None);
    }

    #[test]
    fn ties_prefer_non_residential_then_id() {
        let idx = TruthIndex::new(vec![
            truth("t1", rect(0.0, 0.0, 1.0, 1.0), TruthLabel::Res),
            truth("t2", rect(1.0, 0.0, 2.0, 1.0), TruthLabel::NonRes),
        ]);
        assert_eq!(
            assign_truth(&rect(0.5, 0.25, 1.5, 0.75), &idx),
            Some(Assignment {
                label: TruthLabel::NonRes,
                tied: true
            })
        );
        let idx = TruthIndex::new(vec![
            truth("t9", rect(0.0, 0.0, 1.0, 1.0), TruthLabel::Na),
            truth("t10", rect(1.0, 0.0, 2.0, 1.0), TruthLabel::Res),
        ]);
        assert_eq!(
            assign_truth(&rect(0.5, 0.25, 1.5, 0.75), &idx).unwrap().label,
            TruthLabel::Na
        );
    }

    #[test]
    fn ten_pair_fixture() {
        let mut pairs = vec![(Res, Res); 6];
        pairs.push((NonRes, Res));
        pairs.extend([(NonRes, NonRes); 2]);
        pairs.push((Res, NonRes));
        let m = compute_metrics(&pairs).unwrap();
        let nr = m.class(NonRes);
        assert_eq!((nr.precision, nr.recall), (2.0 / 3.0, 2.0 / 3.0));
        let r = m.class(Res);
        assert_eq!((r.precision, r.recall, r.support), (6.0 / 7.0, 6.0 / 7.0, 7));
        assert_eq!(m.confusion[&Res][&NonRes], 1);
    }

    #[test]
    fn perfect_and_degenerate_metrics() {
        let m = compute_metrics(&[(Res, Res), (NonRes, NonRes)]).unwrap();
        assert!(m
            .classes
            .iter()
            .all(|c| c.precision == 1.0 && c.recall == 1.0 && c.f1 == 1.0 && !c.degenerate));
        let m = compute_metrics(&[(Res, Res), (Res, Res)]).unwrap();
        let nr = m.class(NonRes);
        assert_eq!((nr.precision, nr.recall, nr.f1, nr.degenerate), (0.0, 0.0, 0.0, true));
        assert_eq!(m.avg_f1, 0.5);
        assert!(matches!(compute_metrics(&[]), Err(ValidationError::Empty)));
    }

    #[test]
    fn causes_by_stage() {
        let g = rect(0.0, 0.0, 0.001, 0.001);
        let rows = [
            row("w1", g.clone(), "yes", &[]),
            row("w2", g.clone(), "house", &[]),
            row("w3", g.clone(), "yes", &[("landuse", "residential")]),
            row("w4", g.clone(), "school", &[]),
            row("w5", g, "house", &[]),
        ];
        let labels = [
            TruthLabel::NonRes,
            TruthLabel::NonRes,
            TruthLabel::NonRes,
            TruthLabel::NonRes,
            TruthLabel::Res,
        ];
        let h = misclassification_causes(rows.iter().zip(labels));
        assert_eq!(
            h,
            CauseHistogram {
                no_tags: 1,
                wrong_res_tag: 1,
                wrong_res_auxiliary: 1
            }
        );
        assert_eq!(h.fractions().unwrap(), [1.0 / 3.0; 3]);
        assert_eq!(rows[2].tag_used, "landuse: residential");
    }

    #[test]
    fn structure_filter() {
        assert!(is_structure("building: shed"));
        assert!(is_structure("building:garage"));
        assert!(is_structure("building: parking"));
        assert!(!is_structure("building: house"));
        assert!(!is_structure("amenity: parking"));
        assert!(!is_structure(""));
        let g = rect(0.0, 0.0, 0.001, 0.001);
        let rows = vec![row("w1", g.clone(), "shed", &[]), row("w2", g, "house", &[])];
        let once = filter_structures(rows);
        assert_eq!(once.len(), 1);
        assert_eq!(filter_structures(once.clone()), once);
    }

    #[test]
    fn exclusion_accounting_adds_up() {
        let idx = TruthIndex::new(vec![
            truth("t1", rect(0.0, 0.0, 0.01, 0.01), TruthLabel::Res),
            truth("t2", rect(0.01, 0.0, 0.02, 0.01), TruthLabel::Na),
        ]);
        let sq = |x: f64| Polygon::square_around(Point::new(x, 0.005), 0.001).unwrap();
        let rows = vec![
            row("w1", sq(0.005), "house", &[]),
            row("w2", sq(0.015), "house", &[]),
            row("w3", sq(0.5), "yes", &[]),
        ];
        let rep = validate(rows, 2, &idx, false).unwrap();
        let a = &rep.accounting;
        assert_eq!((a.evaluated, a.na, a.no_overlap, a.geometry_error), (1, 1, 1, 2));
        assert_eq!(a.evaluated + a.na + a.no_overlap + a.geometry_error, a.input_buildings);
    }

    #[test]
    fn table_has_paper_columns() {
        let m = compute_metrics(&[(Res, Res), (NonRes, NonRes), (Res, NonRes)]).unwrap();
        let t = metrics_table(&m);
        let header = t.lines().next().unwrap();
        for col in ["Class", "Precision", "Recall", "F1-Score", "Avg. F1-Score"] {
            assert!(header.contains(col));
        }
        assert!(t.lines().nth(1).unwrap().starts_with("non-residential"));
        assert_eq!(t.lines().count(), 3);
    }
}
