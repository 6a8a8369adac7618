//! OSM features reduced to areal records.

mod geojson_io;
mod xml;

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashSet};
use std::fmt;

use thiserror::Error;

use crate::geometry::Polygon;

pub(crate) use geojson_io::{collection_json, feature_json};
pub use geojson_io::{parse_geojson, polygon_to_geojson, write_geojson, ParsedGeoJson};
pub use xml::{parse_osm_xml, ParsedXml};

/// Reads OSM XML or GeoJSON, told apart by the first non-blank byte.
pub fn parse_features(bytes: &[u8]) -> Result<(FeatureCollection, SkipReport), ParseError> {
    match bytes.iter().find(|b| !b.is_ascii_whitespace()) {
        Some(b'<') => parse_osm_xml(bytes).map(|p| (p.features, p.skipped)),
        _ => parse_geojson(bytes).map(|p| (p.features, p.skipped)),
    }
}

/// Side length in degrees of the square that stands in for a point feature.
pub const POINT_FEATURE_SIDE: f64 = 1e-7;

pub type TagMap = BTreeMap<String, String>;

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("malformed XML at byte {offset}: {message}")]
    Xml { offset: u64, message: String },
    #[error("invalid GeoJSON document: {0}")]
    GeoJson(String),
    #[error("input is not valid UTF-8")]
    Utf8,
}

/// Element identifier such as `w123`, `r7#1` or an arbitrary GeoJSON id.
///
/// Ordering compares the alphabetic prefix, then the leading number
/// numerically, then the remainder, so `w9` sorts before `w10`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FeatureId(String);

impl FeatureId {
    pub fn new(id: impl Into<String>) -> Self {
        Self(id.into())
    }

    pub fn node(id: i64) -> Self {
        Self(format!("n{id}"))
    }

    pub fn way(id: i64) -> Self {
        Self(format!("w{id}"))
    }

    pub fn relation(id: i64) -> Self {
        Self(format!("r{id}"))
    }

    pub fn part(&self, i: usize) -> Self {
        Self(format!("{}#{i}", self.0))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    fn sort_key(&self) -> (&str, Option<u128>, &str) {
        let s = self.0.as_str();
        let p = s.find(|c: char| c.is_ascii_digit()).unwrap_or(s.len());
        let (prefix, rest) = s.split_at(p);
        let d = rest.find(|c: char| !c.is_ascii_digit()).unwrap_or(rest.len());
        let (digits, tail) = rest.split_at(d);
        (prefix, digits.parse().ok(), tail)
    }
}

impl Ord for FeatureId {
    fn cmp(&self, other: &Self) -> Ordering {
        self.sort_key()
            .cmp(&other.sort_key())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for FeatureId {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for FeatureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Feature {
    pub id: FeatureId,
    pub geometry: Polygon,
    pub tags: TagMap,
}

impl Feature {
    pub fn new(id: FeatureId, geometry: Polygon, tags: TagMap) -> Self {
        Self { id, geometry, tags }
    }

    pub fn is_building(&self) -> bool {
        self.tags.contains_key("building")
    }
}

/// Features in WGS84. Ids are unique once the collection has gone through
/// [`FeatureCollection::dedup`]; merged tile downloads may repeat them before.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FeatureCollection {
    pub features: Vec<Feature>,
}

impl FeatureCollection {
    pub fn new(features: Vec<Feature>) -> Self {
        Self { features }
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Feature> {
        self.features.iter()
    }

    /// Splits into footprints (any feature carrying a `building` key) and
    /// auxiliary data (everything else).
    pub fn partition(self) -> (FeatureCollection, FeatureCollection) {
        let (b, a): (Vec<_>, Vec<_>) = self.features.into_iter().partition(Feature::is_building);
        (FeatureCollection::new(b), FeatureCollection::new(a))
    }

    /// Removes every `surface` tag. Features are kept even if left tagless.
    pub fn strip_surface_key(mut self) -> Self {
        for f in &mut self.features {
            f.tags.remove("surface");
        }
        self
    }

    /// Keeps the first occurrence of every id and sorts by id.
    pub fn dedup(self) -> Self {
        let mut seen = HashSet::new();
        let mut features: Vec<Feature> = self
            .features
            .into_iter()
            .filter(|f| seen.insert(f.id.clone()))
            .collect();
        features.sort_by(|a, b| a.id.cmp(&b.id));
        Self { features }
    }

    /// Keeps features carrying at least one of `keys`.
    pub fn retain_with_any_key(mut self, keys: &[String]) -> Self {
        self.features.retain(|f| keys.iter().any(|k| f.tags.contains_key(k)));
        self
    }

    pub fn extend(&mut self, other: FeatureCollection) {
        self.features.extend(other.features);
    }
}

impl FromIterator<Feature> for FeatureCollection {
    fn from_iter<I: IntoIterator<Item = Feature>>(iter: I) -> Self {
        Self::new(iter.into_iter().collect())
    }
}

impl IntoIterator for FeatureCollection {
    type Item = Feature;
    type IntoIter = std::vec::IntoIter<Feature>;

    fn into_iter(self) -> Self::IntoIter {
        self.features.into_iter()
    }
}

/// Elements that could not be turned into features, grouped by reason.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SkipReport {
    pub reasons: BTreeMap<String, usize>,
}

impl SkipReport {
    pub fn add(&mut self, reason: impl Into<String>) {
        *self.reasons.entry(reason.into()).or_default() += 1;
    }

    pub fn total(&self) -> usize {
        self.reasons.values().sum()
    }

    pub fn merge(&mut self, other: &SkipReport) {
        for (k, v) in &other.reasons {
            *self.reasons.entry(k.clone()).or_default() += v;
        }
    }

    pub fn is_empty(&self) -> bool {
        self.reasons.is_empty()
    }
}

impl fmt::Display for SkipReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "skipped {} element(s)", self.total())?;
        for (i, (reason, n)) in self.reasons.iter().enumerate() {
            write!(f, "{} {reason}: {n}", if i == 0 { ":" } else { "," })?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point;

    fn feat(id: &str, tags: &[(&str, &str)]) -> Feature {
        Feature::new(
            FeatureId::new(id),
            Polygon::square_around(Point::new(0.0, 0.0), 1.0).unwrap(),
            tags.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect(),
        )
    }

    #[test]
    fn format_is_sniffed() {
        let xml = br#" <?xml version="1.0"?><osm version="0.6"></osm>"#;
        assert!(parse_features(xml).unwrap().0.is_empty());
        let gj = br#"{"type":"FeatureCollection","features":[]}"#;
        assert!(parse_features(gj).unwrap().0.is_empty());
        assert!(parse_features(b"").is_err());
    }

    #[test]
    fn ids_sort_naturally() {
        let mut ids: Vec<FeatureId> = ["w10", "n5", "w9", "r1#1", "r1", "r1#0", "w9#2"]
            .map(FeatureId::new)
            .to_vec();
        ids.sort();
        let s: Vec<&str> = ids.iter().map(FeatureId::as_str).collect();
        assert_eq!(s, ["n5", "r1", "r1#0", "r1#1", "w9", "w9#2", "w10"]);
    }

    #[test]
    fn partition_by_building_key() {
        let fc = FeatureCollection::new(vec![
            feat("w1", &[("building", "yes")]),
            feat("w2", &[("landuse", "residential")]),
            feat("w3", &[("building", "")]),
        ]);
        let (b, a) = fc.partition();
        assert_eq!(b.iter().map(|f| f.id.as_str()).collect::<Vec<_>>(), ["w1", "w3"]);
        assert_eq!(a.len(), 1);
        let (b, a) = FeatureCollection::default().partition();
        assert!(b.is_empty() && a.is_empty());
    }

    #[test]
    fn surface_key_is_stripped() {
        let fc = FeatureCollection::new(vec![
            feat("w1", &[("building", "yes"), ("surface", "asphalt")]),
            feat("w2", &[("surface", "gravel")]),
            feat("w3", &[("amenity", "bar")]),
        ]);
        let out = fc.clone().strip_surface_key();
        assert_eq!(out.features[0].tags, feat("w1", &[("building", "yes")]).tags);
        assert!(out.features[1].tags.is_empty());
        assert_eq!(out.features[2], fc.features[2]);
    }

    #[test]
    fn dedup_keeps_first_and_sorts() {
        let fc = FeatureCollection::new(vec![
            feat("w7", &[("building", "a")]),
            feat("w3", &[]),
            feat("w7", &[("building", "b")]),
        ]);
        let d = fc.dedup();
        assert_eq!(d.len(), 2);
        assert_eq!(d.features[0].id.as_str(), "w3");
        assert_eq!(d.features[1].tags["building"], "a");
        assert_eq!(d.clone().dedup(), d);
    }
}
