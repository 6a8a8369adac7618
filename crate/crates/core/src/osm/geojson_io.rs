use geojson::{feature::Id, GeoJson, Geometry, JsonObject, JsonValue, Value};

use super::{Feature, FeatureCollection, FeatureId, ParseError, SkipReport, TagMap};
use crate::geometry::{Point, Polygon, Ring};

#[derive(Debug, Default)]
pub struct ParsedGeoJson {
    pub features: FeatureCollection,
    pub skipped: SkipReport,
    /// Top-level members other than `type` and `features` (e.g. `epsg`).
    pub foreign_members: JsonObject,
}

/// Reads an RFC 7946 FeatureCollection.
///
/// Polygon features map one to one. MultiPolygon parts become separate
/// features with ids `<id>#0`, `<id>#1`, ... sharing the tag map. Other
/// geometry types are skipped and counted. Null properties are dropped and
/// non-string values are kept in their JSON text form.
pub fn parse_geojson(bytes: &[u8]) -> Result<ParsedGeoJson, ParseError> {
    let text = std::str::from_utf8(bytes).map_err(|_| ParseError::Utf8)?;
    let doc: GeoJson = text
        .parse()
        .map_err(|e: geojson::Error| ParseError::GeoJson(e.to_string()))?;
    let GeoJson::FeatureCollection(fc) = doc else {
        return Err(ParseError::GeoJson("expected a FeatureCollection".into()));
    };
    let mut out = ParsedGeoJson {
        foreign_members: fc.foreign_members.unwrap_or_default(),
        ..Default::default()
    };
    for (i, f) in fc.features.into_iter().enumerate() {
        let id = match &f.id {
            Some(Id::String(s)) => FeatureId::new(s.clone()),
            Some(Id::Number(n)) => FeatureId::new(n.to_string()),
            None => FeatureId::new(format!("f{i}")),
        };
        let tags = to_tags(f.properties.as_ref());
        let Some(geometry) = f.geometry else {
            out.skipped.add("missing geometry");
            continue;
        };
        match geometry.value {
            Value::Polygon(rings) => match to_polygon(&rings) {
                Some(g) => out.features.features.push(Feature::new(id, g, tags)),
                None => out.skipped.add("invalid geometry"),
            },
            Value::MultiPolygon(parts) => {
                for (j, rings) in parts.iter().enumerate() {
                    match to_polygon(rings) {
                        Some(g) => out.features.features.push(Feature::new(id.part(j), g, tags.clone())),
                        None => out.skipped.add("invalid geometry"),
                    }
                }
            }
            _ => {
                log::warn!("feature {id}: non-polygonal geometry skipped");
                out.skipped.add("non-polygonal geometry");
            }
        }
    }
    Ok(out)
}

fn to_tags(props: Option<&JsonObject>) -> TagMap {
    let mut tags = TagMap::new();
    for (k, v) in props.into_iter().flatten() {
        let s = match v {
            JsonValue::Null => continue,
            JsonValue::String(s) => s.clone(),
            other => other.to_string(),
        };
        tags.insert(k.clone(), s);
    }
    tags
}

fn to_polygon(rings: &[Vec<Vec<f64>>]) -> Option<Polygon> {
    let mut it = rings.iter().map(|r| {
        let pts = r
            .iter()
            .map(|c| (c.len() >= 2).then(|| Point::new(c[0], c[1])))
            .collect::<Option<Vec<_>>>()?;
        Ring::new(pts).ok()
    });
    let outer = it.next()??;
    let holes = it.collect::<Option<Vec<_>>>()?;
    Polygon::new(outer, holes).ok()
}

pub fn polygon_to_geojson(p: &Polygon) -> Geometry {
    let rings = p
        .rings()
        .map(|r| r.points().iter().map(|pt| vec![pt.lon, pt.lat]).collect())
        .collect();
    Geometry::new(Value::Polygon(rings))
}

/// Serializes features with their tags as properties. `foreign` members are
/// added to the top-level object.
pub fn write_geojson(fc: &FeatureCollection, foreign: Option<JsonObject>) -> String {
    let features = fc
        .iter()
        .map(|f| {
            let props: JsonObject = f
                .tags
                .iter()
                .map(|(k, v)| (k.clone(), JsonValue::String(v.clone())))
                .collect();
            feature_json(&f.id, &f.geometry, props)
        })
        .collect();
    collection_json(features, foreign)
}

pub(crate) fn feature_json(id: &FeatureId, geometry: &Polygon, properties: JsonObject) -> geojson::Feature {
    geojson::Feature {
        bbox: None,
        geometry: Some(polygon_to_geojson(geometry)),
        id: Some(Id::String(id.as_str().to_string())),
        properties: Some(properties),
        foreign_members: None,
    }
}

pub(crate) fn collection_json(features: Vec<geojson::Feature>, foreign: Option<JsonObject>) -> String {
    let fc = geojson::FeatureCollection {
        bbox: None,
        features,
        foreign_members: foreign,
    };
    let mut s = GeoJson::FeatureCollection(fc).to_string();
    s.push('\n');
    s
}
