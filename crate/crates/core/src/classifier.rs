//! Rule pipeline that labels each footprint and records how it was decided.
//!
//! Resolution order for one building:
//!
//! 1. `building` value in the accommodation list: residential.
//! 2. `building` value not in the unknown list: non-residential.
//! 3. any additional footprint key with a value: non-residential.
//! 4. inherited tags from intersecting auxiliary features are filtered by the
//!    skip lists, then matched against residential pairs (5), non-residential
//!    pairs (6) and generic non-residential keys (7).
//! 8. anything left is residential.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use geojson::{JsonObject, JsonValue};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{intersects, SpatialIndex};
use crate::osm::{Feature, FeatureCollection, FeatureId, TagMap};
use crate::rules::RuleSet;

pub const PROP_TYPE: &str = "type";
pub const PROP_TAG_USED: &str = "tag used";
pub const PROP_AUX_INFO: &str = "aux info";

#[derive(Debug, Error, PartialEq)]
pub enum ClassifyError {
    #[error("feature {0} has no `building` key")]
    MissingBuildingKey(FeatureId),
    #[error("feature {id}: {message}")]
    BadRecord { id: FeatureId, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BuildingClass {
    #[serde(rename = "RES")]
    Res,
    #[serde(rename = "NON_RES")]
    NonRes,
}

impl BuildingClass {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Res => "RES",
            Self::NonRes => "NON_RES",
        }
    }
}

impl fmt::Display for BuildingClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BuildingClass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "RES" => Ok(Self::Res),
            "NON_RES" => Ok(Self::NonRes),
            other => Err(format!("unknown class `{other}`")),
        }
    }
}

/// Which step resolved a building, written to the `aux info` column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    ResidentialTypes,
    NonResidentialTypes,
    NonResidentialAuxTag,
    ResidentialAuxiliary,
    NonResidentialAuxiliary,
    NonResidentialAuxiliaryGenericTag,
    ResidentialUnknownTag,
}

impl Stage {
    pub const ALL: [Stage; 7] = [
        Stage::ResidentialTypes,
        Stage::NonResidentialTypes,
        Stage::NonResidentialAuxTag,
        Stage::ResidentialAuxiliary,
        Stage::NonResidentialAuxiliary,
        Stage::NonResidentialAuxiliaryGenericTag,
        Stage::ResidentialUnknownTag,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Stage::ResidentialTypes => "residential_types",
            Stage::NonResidentialTypes => "non_residential_types",
            Stage::NonResidentialAuxTag => "non_residential_aux_tag",
            Stage::ResidentialAuxiliary => "residential_auxiliary",
            Stage::NonResidentialAuxiliary => "non_residential_auxiliary",
            Stage::NonResidentialAuxiliaryGenericTag => "non_residential_auxiliary_generic_tag",
            Stage::ResidentialUnknownTag => "residential_unknown_tag",
        }
    }

    /// The class a stage implies.
    pub fn class(self) -> BuildingClass {
        match self {
            Stage::ResidentialTypes | Stage::ResidentialAuxiliary | Stage::ResidentialUnknownTag => BuildingClass::Res,
            _ => BuildingClass::NonRes,
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Stage {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Stage::ALL
            .into_iter()
            .find(|st| st.as_str() == s)
            .ok_or_else(|| format!("unknown stage `{s}`"))
    }
}

/// `"<key>: <value>"`, the format of the `tag used` column.
pub fn tag_used_string(key: &str, value: &str) -> String {
    format!("{key}: {value}")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decision {
    pub class: BuildingClass,
    pub stage: Stage,
    pub tag_used: String,
}

impl Decision {
    fn tagged(stage: Stage, key: &str, value: &str) -> Self {
        Self {
            class: stage.class(),
            stage,
            tag_used: tag_used_string(key, value),
        }
    }

    fn fallback() -> Self {
        let stage = Stage::ResidentialUnknownTag;
        Self {
            class: stage.class(),
            stage,
            tag_used: String::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassifiedFootprint {
    pub feature: Feature,
    pub class: BuildingClass,
    pub tag_used: String,
    pub stage: Stage,
}

impl ClassifiedFootprint {
    pub fn new(feature: Feature, decision: Decision) -> Self {
        let Decision { class, stage, tag_used } = decision;
        Self {
            feature,
            class,
            tag_used,
            stage,
        }
    }

    /// Reads a row written by [`ClassifiedFootprint::properties`], checking
    /// that class, stage and `tag used` agree.
    pub fn from_feature(feature: Feature) -> Result<Self, ClassifyError> {
        let bad = |message: String| ClassifyError::BadRecord {
            id: feature.id.clone(),
            message,
        };
        let get = |k: &str| {
            feature
                .tags
                .get(k)
                .ok_or_else(|| bad(format!("missing `{k}` property")))
        };
        let class: BuildingClass = get(PROP_TYPE)?.parse().map_err(bad)?;
        let stage: Stage = get(PROP_AUX_INFO)?.parse().map_err(bad)?;
        let tag_used = feature.tags.get(PROP_TAG_USED).cloned().unwrap_or_default();
        if stage.class() != class {
            return Err(bad(format!("class {class} does not match stage {stage}")));
        }
        if tag_used.is_empty() != (stage == Stage::ResidentialUnknownTag) {
            return Err(bad(format!("`tag used` is inconsistent with stage {stage}")));
        }
        Ok(Self {
            feature,
            class,
            tag_used,
            stage,
        })
    }

    pub fn properties(&self) -> JsonObject {
        let mut o = JsonObject::new();
        o.insert(PROP_TYPE.into(), JsonValue::String(self.class.as_str().into()));
        o.insert(PROP_TAG_USED.into(), JsonValue::String(self.tag_used.clone()));
        o.insert(PROP_AUX_INFO.into(), JsonValue::String(self.stage.as_str().into()));
        o
    }
}

/// Splits an OSM value on `;`, trimmed and lowercased, dropping empties.
fn components(value: &str) -> Vec<String> {
    value
        .split(';')
        .map(|c| c.trim().to_lowercase())
        .filter(|c| !c.is_empty())
        .collect()
}

/// Inherited tags that survive the skip lists, with their surviving value
/// components.
fn surviving_tags<'a>(aux: &'a TagMap, rules: &RuleSet) -> Vec<(&'a str, Vec<String>)> {
    aux.iter()
        .filter_map(|(k, v)| {
            let key = k.to_lowercase();
            let per_key = rules.skip_by_key.get(&key);
            let kept: Vec<String> = components(v)
                .into_iter()
                .filter(|c| !per_key.is_some_and(|s| s.contains(c)))
                .filter(|c| !rules.skip_values.contains(c))
                .collect();
            (!kept.is_empty()).then_some((k.as_str(), kept))
        })
        .collect()
}

/// Applies the rule pipeline to a footprint's tags and the tags of the
/// auxiliary features it intersects (in the given order).
pub fn decide(building: &TagMap, aux: &[&TagMap], rules: &RuleSet) -> Option<Decision> {
    let raw = building.get("building")?;
    let mut values = components(raw);
    if values.is_empty() {
        values.push("yes".into());
    }
    if let Some(v) = values.iter().find(|v| rules.acc_values.contains(*v)) {
        return Some(Decision::tagged(Stage::ResidentialTypes, "building", v));
    }
    if let Some(v) = values.iter().find(|v| !rules.unknown_values.contains(*v)) {
        return Some(Decision::tagged(Stage::NonResidentialTypes, "building", v));
    }
    for key in &rules.add_keys {
        if let Some(v) = building
            .get(key)
            .map(|v| components(v))
            .and_then(|c| c.into_iter().next())
        {
            return Some(Decision::tagged(Stage::NonResidentialAuxTag, key, &v));
        }
    }

    let inherited: Vec<Vec<(&str, Vec<String>)>> = aux.iter().map(|t| surviving_tags(t, rules)).collect();
    let has_pair = |key: &str, value: &str| {
        inherited
            .iter()
            .flatten()
            .any(|(k, vs)| k.eq_ignore_ascii_case(key) && vs.iter().any(|v| v == value))
    };
    for (stage, table) in [
        (Stage::ResidentialAuxiliary, &rules.res_aux),
        (Stage::NonResidentialAuxiliary, &rules.nonres_aux),
    ] {
        for (key, vals) in table {
            if let Some(v) = vals.iter().find(|v| has_pair(key, v)) {
                return Some(Decision::tagged(stage, key, v));
            }
        }
    }
    for key in &rules.other_nonres_keys {
        if let Some((_, vs)) = inherited.iter().flatten().find(|(k, _)| k.eq_ignore_ascii_case(key)) {
            return Some(Decision::tagged(Stage::NonResidentialAuxiliaryGenericTag, key, &vs[0]));
        }
    }
    Some(Decision::fallback())
}

/// Classifies one footprint given the auxiliary features that intersect it.
/// Hits are considered in id order whatever order they are passed in.
pub fn classify_one(
    building: &Feature,
    aux_hits: &[&Feature],
    rules: &RuleSet,
) -> Result<ClassifiedFootprint, ClassifyError> {
    let mut hits: Vec<&Feature> = aux_hits.to_vec();
    hits.sort_by(|a, b| a.id.cmp(&b.id));
    let tags: Vec<&TagMap> = hits.iter().map(|f| &f.tags).collect();
    let decision =
        decide(&building.tags, &tags, rules).ok_or_else(|| ClassifyError::MissingBuildingKey(building.id.clone()))?;
    Ok(ClassifiedFootprint::new(building.clone(), decision))
}

/// Classifies every building against an R-tree over the auxiliary features.
/// Buildings are processed in parallel; the result is sorted by id.
pub fn classify_collection(
    buildings: &FeatureCollection,
    auxiliary: &FeatureCollection,
    rules: &RuleSet,
) -> Result<Vec<ClassifiedFootprint>, ClassifyError> {
    let index = SpatialIndex::build(auxiliary.iter().enumerate().map(|(i, f)| (i, f.geometry.bbox())));
    let mut out = buildings
        .features
        .par_iter()
        .map(|b| {
            let hits: Vec<&Feature> = index
                .query(&b.geometry.bbox())
                .map(|&i| &auxiliary.features[i])
                .filter(|a| intersects(&b.geometry, &a.geometry))
                .collect();
            classify_one(b, &hits, rules)
        })
        .collect::<Result<Vec<_>, _>>()?;
    out.sort_by(|a, b| a.feature.id.cmp(&b.feature.id));
    Ok(out)
}

/// Number of buildings resolved at each stage, all seven stages present.
pub fn stage_counts(rows: &[ClassifiedFootprint]) -> BTreeMap<Stage, usize> {
    let mut counts: BTreeMap<Stage, usize> = Stage::ALL.iter().map(|s| (*s, 0)).collect();
    for r in rows {
        *counts.get_mut(&r.stage).unwrap() += 1;
    }
    counts
}
