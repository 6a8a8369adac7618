//! Independent oracles and scene generators shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;

use osmbc_core::geometry::Polygon;
use osmbc_core::osm::{Feature, FeatureCollection, FeatureId, TagMap};
use osmbc_core::rules::RuleSet;
use osmbc_core::{BuildingClass, Stage};
use rand::seq::SliceRandom;
use rand::Rng;

pub type Coords = Vec<(f64, f64)>;

/// Coordinates are multiples of 1/4096 degree so every product in the
/// separating-axis test below is exact.
pub const GRID: f64 = 1.0 / 4096.0;

fn snap(v: f64) -> f64 {
    (v / GRID).round() * GRID
}

/// Random convex polygon: axis-aligned rectangle, diamond or triangle.
pub fn random_convex<R: Rng>(rng: &mut R, extent: f64, max_size: f64) -> Coords {
    let cx = snap(rng.gen_range(0.0..extent));
    let cy = snap(rng.gen_range(0.0..extent));
    let w = snap(rng.gen_range(GRID..max_size)).max(GRID);
    let h = snap(rng.gen_range(GRID..max_size)).max(GRID);
    match rng.gen_range(0..3) {
        0 => vec![(cx, cy), (cx + w, cy), (cx + w, cy + h), (cx, cy + h)],
        1 => vec![(cx, cy - h), (cx + w, cy), (cx, cy + h), (cx - w, cy)],
        _ => vec![(cx, cy), (cx + w, cy), (cx + snap(w / 2.0), cy + h)],
    }
}

pub fn polygon(c: &Coords) -> Polygon {
    Polygon::from_coords(c, &[]).expect("generated polygons are valid")
}

fn project(poly: &Coords, axis: (f64, f64)) -> (f64, f64) {
    poly.iter()
        .map(|&(x, y)| x * axis.0 + y * axis.1)
        .fold((f64::MAX, f64::MIN), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

/// Closed-set intersection of two convex polygons by the separating axis
/// theorem: they are disjoint iff some edge normal separates them strictly.
pub fn sat_intersects(a: &Coords, b: &Coords) -> bool {
    for poly in [a, b] {
        for i in 0..poly.len() {
            let (x0, y0) = poly[i];
            let (x1, y1) = poly[(i + 1) % poly.len()];
            let axis = (y1 - y0, x0 - x1);
            let (amin, amax) = project(a, axis);
            let (bmin, bmax) = project(b, axis);
            if amax < bmin || bmax < amin {
                return false;
            }
        }
    }
    true
}

/// Even-odd ray casting.
pub fn point_in_ring(x: f64, y: f64, ring: &[(f64, f64)]) -> bool {
    let mut inside = false;
    let n = ring.len();
    for i in 0..n {
        let (xi, yi) = ring[i];
        let (xj, yj) = ring[(i + n - 1) % n];
        if (yi > y) != (yj > y) && x < (xj - xi) * (y - yi) / (yj - yi) + xi {
            inside = !inside;
        }
    }
    inside
}

fn words<R: Rng>(rng: &mut R, pool: &[&str]) -> String {
    pool.choose(rng).unwrap().to_string()
}

const NOISE_KEYS: &[&str] = &["highway", "natural", "name", "addr:street", "height", "waterway"];
const NOISE_VALUES: &[&str] = &[
    "yes",
    "foo",
    "primary",
    "wood",
    "Main Street",
    "",
    "Residential",
    "restaurant;toilets",
    "YES",
];
const NONRES_BUILDING: &[&str] = &[
    "school",
    "hotel",
    "retail",
    "industrial",
    "church",
    "commercial",
    "warehouse",
];
const ODD_BUILDING: &[&str] = &[
    "House",
    "YES",
    "yes;house",
    "roof;school",
    " ",
    "",
    "Apartments ",
    "service;garage",
];

/// Building tags drawn from the rule vocabulary plus noise.
pub fn random_building_tags<R: Rng>(rng: &mut R, rules: &RuleSet) -> TagMap {
    let acc: Vec<&str> = rules.acc_values.iter().map(String::as_str).collect();
    let unk: Vec<&str> = rules.unknown_values.iter().map(String::as_str).collect();
    let value = match rng.gen_range(0..10) {
        0 | 1 => words(rng, &acc),
        2..=5 => words(rng, &unk),
        6 | 7 => words(rng, NONRES_BUILDING),
        _ => words(rng, ODD_BUILDING),
    };
    let mut tags = TagMap::from([("building".to_string(), value)]);
    if rng.gen_bool(0.2) {
        let k = rules
            .add_keys
            .iter()
            .collect::<Vec<_>>()
            .choose(rng)
            .unwrap()
            .to_string();
        tags.insert(k, words(rng, &["yes", "company", "", "bakery", "  "]));
    }
    if rng.gen_bool(0.3) {
        tags.insert(words(rng, NOISE_KEYS), words(rng, NOISE_VALUES));
    }
    tags
}

/// Auxiliary tags drawn from every rule table plus noise.
pub fn random_aux_tags<R: Rng>(rng: &mut R, rules: &RuleSet) -> TagMap {
    let mut keys: Vec<String> = rules
        .res_aux
        .keys()
        .chain(rules.nonres_aux.keys())
        .chain(rules.skip_by_key.keys())
        .cloned()
        .collect();
    keys.extend(rules.other_nonres_keys.iter().cloned());
    keys.extend(NOISE_KEYS.iter().map(|s| s.to_string()));
    let mut tags = TagMap::new();
    for _ in 0..rng.gen_range(1..=3) {
        let k = keys.choose(rng).unwrap().clone();
        let mut pool: Vec<String> = Vec::new();
        for table in [&rules.res_aux, &rules.nonres_aux] {
            if let Some(vs) = table.get(&k) {
                pool.extend(vs.iter().cloned());
            }
        }
        if let Some(vs) = rules.skip_by_key.get(&k) {
            pool.extend(vs.iter().cloned());
        }
        pool.extend(rules.skip_values.iter().cloned());
        pool.extend(NOISE_VALUES.iter().map(|s| s.to_string()));
        let mut v = pool.choose(rng).unwrap().clone();
        if rng.gen_bool(0.1) {
            v = format!("{};{}", v, pool.choose(rng).unwrap());
        }
        if rng.gen_bool(0.05) {
            v = v.to_uppercase();
        }
        tags.insert(k, v);
    }
    tags
}

pub struct Scene {
    pub buildings: FeatureCollection,
    pub auxiliary: FeatureCollection,
    pub building_coords: Vec<Coords>,
    pub aux_coords: Vec<Coords>,
}

pub fn random_scene<R: Rng>(rng: &mut R, rules: &RuleSet, max_buildings: usize, max_aux: usize) -> Scene {
    let nb = rng.gen_range(0..=max_buildings);
    let na = rng.gen_range(0..=max_aux);
    let building_coords: Vec<Coords> = (0..nb).map(|_| random_convex(rng, 0.08, 0.004)).collect();
    let aux_coords: Vec<Coords> = (0..na).map(|_| random_convex(rng, 0.08, 0.02)).collect();
    // ids are shuffled so input order never matches id order
    let mut bid: Vec<i64> = (1..=nb as i64).collect();
    bid.shuffle(rng);
    let mut aid: Vec<i64> = (1..=na as i64).collect();
    aid.shuffle(rng);
    let buildings = building_coords
        .iter()
        .zip(&bid)
        .map(|(c, id)| Feature::new(FeatureId::way(*id), polygon(c), random_building_tags(rng, rules)))
        .collect();
    let auxiliary = aux_coords
        .iter()
        .zip(&aid)
        .map(|(c, id)| {
            let fid = if rng.gen_bool(0.3) {
                FeatureId::node(*id)
            } else {
                FeatureId::way(*id)
            };
            Feature::new(fid, polygon(c), random_aux_tags(rng, rules))
        })
        .collect();
    Scene {
        buildings,
        auxiliary,
        building_coords,
        aux_coords,
    }
}

fn split_values(v: &str) -> Vec<String> {
    let mut out = Vec::new();
    for part in v.split(';') {
        let p = part.trim().to_lowercase();
        if !p.is_empty() {
            out.push(p);
        }
    }
    out
}

/// The classification procedure transcribed step by step, with no index and
/// no shared code beyond the rule data.
pub fn oracle_classify(
    building: &TagMap,
    hits: &[(&FeatureId, &TagMap)],
    rules: &RuleSet,
) -> (BuildingClass, Stage, String) {
    let mut values = split_values(&building["building"]);
    if values.is_empty() {
        values.push("yes".to_string());
    }
    for v in &values {
        if rules.acc_values.contains(v) {
            return (BuildingClass::Res, Stage::ResidentialTypes, format!("building: {v}"));
        }
    }
    for v in &values {
        if !rules.unknown_values.contains(v) {
            return (
                BuildingClass::NonRes,
                Stage::NonResidentialTypes,
                format!("building: {v}"),
            );
        }
    }
    for key in &rules.add_keys {
        if let Some(raw) = building.get(key) {
            let vs = split_values(raw);
            if !vs.is_empty() {
                return (
                    BuildingClass::NonRes,
                    Stage::NonResidentialAuxTag,
                    format!("{key}: {}", vs[0]),
                );
            }
        }
    }
    let mut sorted: Vec<(&FeatureId, &TagMap)> = hits.to_vec();
    sorted.sort_by(|a, b| a.0.cmp(b.0));
    let mut inherited: Vec<(String, String)> = Vec::new();
    for (_, tags) in &sorted {
        for (k, v) in tags.iter() {
            let key = k.to_lowercase();
            for comp in split_values(v) {
                if rules.skip_by_key.get(&key).is_some_and(|s| s.contains(&comp)) {
                    continue;
                }
                if rules.skip_values.contains(&comp) {
                    continue;
                }
                inherited.push((key.clone(), comp));
            }
        }
    }
    for (key, vals) in &rules.res_aux {
        for v in vals {
            if inherited.iter().any(|(k, iv)| k == key && iv == v) {
                return (BuildingClass::Res, Stage::ResidentialAuxiliary, format!("{key}: {v}"));
            }
        }
    }
    for (key, vals) in &rules.nonres_aux {
        for v in vals {
            if inherited.iter().any(|(k, iv)| k == key && iv == v) {
                return (
                    BuildingClass::NonRes,
                    Stage::NonResidentialAuxiliary,
                    format!("{key}: {v}"),
                );
            }
        }
    }
    for key in &rules.other_nonres_keys {
        if let Some((_, v)) = inherited.iter().find(|(k, _)| k == key) {
            return (
                BuildingClass::NonRes,
                Stage::NonResidentialAuxiliaryGenericTag,
                format!("{key}: {v}"),
            );
        }
    }
    (BuildingClass::Res, Stage::ResidentialUnknownTag, String::new())
}

/// Brute-force classification of a scene: every building against every
/// auxiliary feature with the separating-axis test.
pub fn oracle_scene(scene: &Scene, rules: &RuleSet) -> BTreeMap<FeatureId, (BuildingClass, Stage, String)> {
    let mut out = BTreeMap::new();
    for (b, bc) in scene.buildings.iter().zip(&scene.building_coords) {
        let hits: Vec<(&FeatureId, &TagMap)> = scene
            .auxiliary
            .iter()
            .zip(&scene.aux_coords)
            .filter(|(_, ac)| sat_intersects(bc, ac))
            .map(|(a, _)| (&a.id, &a.tags))
            .collect();
        out.insert(b.id.clone(), oracle_classify(&b.tags, &hits, rules));
    }
    out
}
