use std::path::{Path, PathBuf};

use geojson::{JsonObject, JsonValue};

use super::{PipelineError, RegionRun, RegionSpec};
use crate::classifier::ClassifiedFootprint;
use crate::osm::{collection_json, feature_json, parse_geojson, SkipReport};

#[derive(Debug, Clone, PartialEq)]
pub struct OutputPaths {
    pub geojson: PathBuf,
    pub report: PathBuf,
}

/// GeoJSON text of classified rows with an `epsg` foreign member.
pub fn classified_geojson(rows: &[ClassifiedFootprint], epsg: u32) -> String {
    let features = rows
        .iter()
        .map(|r| feature_json(&r.feature.id, &r.feature.geometry, r.properties()))
        .collect();
    let mut foreign = JsonObject::new();
    foreign.insert("epsg".into(), JsonValue::from(epsg));
    collection_json(features, Some(foreign))
}

/// Writes `<STCOU>_<name>.geojson` and `<STCOU>_<name>.report.json` under
/// the region's output directory.
pub fn write_outputs(root: &Path, spec: &RegionSpec, run: &RegionRun) -> Result<OutputPaths, PipelineError> {
    let dir = spec.output_dir(root);
    std::fs::create_dir_all(&dir).map_err(|e| PipelineError::io(&dir, e))?;
    let stem = spec.file_stem();
    let geojson = dir.join(format!("{stem}.geojson"));
    let report = dir.join(format!("{stem}.report.json"));
    std::fs::write(&geojson, classified_geojson(&run.rows, run.report.epsg))
        .map_err(|e| PipelineError::io(&geojson, e))?;
    let mut text = serde_json::to_string_pretty(&run.report).expect("reports serialize");
    text.push('\n');
    std::fs::write(&report, text).map_err(|e| PipelineError::io(&report, e))?;
    Ok(OutputPaths { geojson, report })
}

#[derive(Debug, Clone)]
pub struct ClassifiedFile {
    pub rows: Vec<ClassifiedFootprint>,
    /// Features whose geometry could not be read.
    pub skipped: SkipReport,
    pub epsg: Option<u32>,
}

/// Reads a file written by [`write_outputs`].
pub fn read_classified(bytes: &[u8]) -> Result<ClassifiedFile, PipelineError> {
    let parsed = parse_geojson(bytes)?;
    let rows = parsed
        .features
        .into_iter()
        .map(ClassifiedFootprint::from_feature)
        .collect::<Result<Vec<_>, _>>()?;
    let epsg = parsed
        .foreign_members
        .get("epsg")
        .and_then(JsonValue::as_u64)
        .map(|e| e as u32);
    Ok(ClassifiedFile {
        rows,
        skipped: parsed.skipped,
        epsg,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifier::classify_one;
    use crate::geometry::{Point, Polygon};
    use crate::osm::{Feature, FeatureId};
    use crate::pipeline::{process_region, Category, LocalSource};
    use crate::rules::default_rules;
    use crate::FeatureCollection;

    fn building(id: &str, x: f64, value: &str) -> Feature {
        Feature::new(
            FeatureId::new(id),
            Polygon::square_around(Point::new(x, 0.5), 0.01).unwrap(),
            [("building".to_string(), value.to_string())].into(),
        )
    }

    #[test]
    fn written_rows_read_back() {
        let rules = default_rules();
        let rows: Vec<_> = [building("w1", 0.1, "house"), building("w2", 0.2, "yes")]
            .iter()
            .map(|b| classify_one(b, &[], &rules).unwrap())
            .collect();
        let text = classified_geojson(&rows, 32615);
        let back = read_classified(text.as_bytes()).unwrap();
        assert_eq!(back.epsg, Some(32615));
        assert_eq!(back.rows.len(), 2);
        for (a, b) in rows.iter().zip(&back.rows) {
            assert_eq!((a.class, a.stage, &a.tag_used), (b.class, b.stage, &b.tag_used));
            assert_eq!(a.feature.geometry, b.feature.geometry);
        }
        assert!(text.contains(r#""tag used":"building: house""#));
        assert!(text.contains(r#""aux info":"residential_types""#));
    }

    #[test]
    fn output_layout() {
        let dir = tempfile::tempdir().unwrap();
        let boundary = Polygon::from_coords(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)], &[]).unwrap();
        let spec = RegionSpec::new(
            boundary,
            "Fairfax",
            Some("51059".into()),
            Some("47900".into()),
            Category::Metropolitan,
        )
        .unwrap();
        let src = LocalSource::new(FeatureCollection::new(vec![building("w1", 0.5, "house")]));
        let run = process_region(&spec, &src, &default_rules(), 1, 1).unwrap();
        let paths = write_outputs(dir.path(), &spec, &run).unwrap();
        assert_eq!(
            paths.geojson,
            dir.path().join("metropolitan/47900/51059_Fairfax.geojson")
        );
        let report: serde_json::Value = serde_json::from_slice(&std::fs::read(&paths.report).unwrap()).unwrap();
        assert_eq!(report["stage_counts"]["residential_types"], 1);
        assert_eq!(report["epsg"], 32631);
    }
}
