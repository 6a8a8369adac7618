//! OSM XML (API 0.6 / Overpass `out body`) to features.

use std::collections::HashMap;

use quick_xml::events::{BytesStart, Event};
use quick_xml::Reader;

use super::{Feature, FeatureCollection, FeatureId, ParseError, SkipReport, TagMap, POINT_FEATURE_SIDE};
use crate::geometry::{Point, Polygon, Ring};

#[derive(Debug, Default)]
pub struct ParsedXml {
    pub features: FeatureCollection,
    pub skipped: SkipReport,
    /// `<remark>` texts; Overpass reports runtime errors this way.
    pub remarks: Vec<String>,
}

#[derive(Default)]
struct RawWay {
    id: i64,
    refs: Vec<i64>,
    tags: TagMap,
}

struct Member {
    kind: String,
    id: i64,
    role: String,
}

#[derive(Default)]
struct RawRelation {
    id: i64,
    members: Vec<Member>,
    tags: TagMap,
}

enum Open {
    Node { id: i64, point: Point, tags: TagMap },
    Way(RawWay),
    Relation(RawRelation),
    Remark(String),
}

struct Attrs(HashMap<String, String>);

impl Attrs {
    fn read(e: &BytesStart<'_>, offset: u64) -> Result<Self, ParseError> {
        let mut map = HashMap::new();
        for a in e.attributes() {
            let a = a.map_err(|err| ParseError::Xml {
                offset,
                message: err.to_string(),
            })?;
            let key = String::from_utf8_lossy(a.key.as_ref()).into_owned();
            let value = a
                .unescape_value()
                .map_err(|err| ParseError::Xml {
                    offset,
                    message: err.to_string(),
                })?
                .into_owned();
            map.insert(key, value);
        }
        Ok(Self(map))
    }

    fn str(&self, name: &str) -> Option<&str> {
        self.0.get(name).map(String::as_str)
    }

    fn num<T: std::str::FromStr>(&self, name: &str, offset: u64) -> Result<T, ParseError> {
        self.str(name)
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| ParseError::Xml {
                offset,
                message: format!("missing or invalid attribute `{name}`"),
            })
    }
}

/// Parses an OSM XML document.
///
/// Closed tagged ways become polygons, `type=multipolygon` relations are
/// assembled from their outer and inner member ways, and tagged nodes become
/// tiny squares so every feature shares one intersection pathway. Open ways
/// and other relation types are dropped and counted in the skip report.
pub fn parse_osm_xml(bytes: &[u8]) -> Result<ParsedXml, ParseError> {
    let mut reader = Reader::from_reader(bytes);
    reader.config_mut().trim_text(true);

    let mut coords: HashMap<i64, Point> = HashMap::new();
    let mut tagged_nodes: Vec<(i64, Point, TagMap)> = Vec::new();
    let mut ways: Vec<RawWay> = Vec::new();
    let mut relations: Vec<RawRelation> = Vec::new();
    let mut remarks = Vec::new();
    let mut open: Option<Open> = None;
    let mut saw_root = false;

    loop {
        let offset = reader.buffer_position();
        let event = reader.read_event().map_err(|e| ParseError::Xml {
            offset: reader.error_position(),
            message: e.to_string(),
        })?;
        match event {
            Event::Start(ref e) | Event::Empty(ref e) => {
                let empty = matches!(event, Event::Empty(_));
                let attrs = Attrs::read(e, offset)?;
                match e.name().as_ref() {
                    b"osm" => saw_root = true,
                    b"node" => {
                        let id = attrs.num("id", offset)?;
                        let point = Point::new(attrs.num("lon", offset)?, attrs.num("lat", offset)?);
                        open = Some(Open::Node {
                            id,
                            point,
                            tags: TagMap::new(),
                        });
                    }
                    b"way" => {
                        open = Some(Open::Way(RawWay {
                            id: attrs.num("id", offset)?,
                            ..Default::default()
                        }));
                    }
                    b"relation" => {
                        open = Some(Open::Relation(RawRelation {
                            id: attrs.num("id", offset)?,
                            ..Default::default()
                        }));
                    }
                    b"remark" => open = Some(Open::Remark(String::new())),
                    b"tag" => {
                        let k = attrs.str("k").unwrap_or_default().to_string();
                        let v = attrs.str("v").unwrap_or_default().to_string();
                        match &mut open {
                            Some(Open::Node { tags, .. }) => {
                                tags.insert(k, v);
                            }
                            Some(Open::Way(w)) => {
                                w.tags.insert(k, v);
                            }
                            Some(Open::Relation(r)) => {
                                r.tags.insert(k, v);
                            }
                            _ => {}
                        }
                    }
                    b"nd" => {
                        if let Some(Open::Way(w)) = &mut open {
                            w.refs.push(attrs.num("ref", offset)?);
                        }
                    }
                    b"member" => {
                        if let Some(Open::Relation(r)) = &mut open {
                            r.members.push(Member {
                                kind: attrs.str("type").unwrap_or_default().to_string(),
                                id: attrs.num("ref", offset)?,
                                role: attrs.str("role").unwrap_or_default().to_string(),
                            });
                        }
                    }
                    _ => {}
                }
                if empty {
                    close(
                        e.name().as_ref(),
                        &mut open,
                        &mut coords,
                        &mut tagged_nodes,
                        &mut ways,
                        &mut relations,
                        &mut remarks,
                    );
                }
            }
            Event::Text(t) => {
                if let Some(Open::Remark(s)) = &mut open {
                    s.push_str(&t.unescape().unwrap_or_default());
                }
            }
            Event::End(ref e) => {
                close(
                    e.name().as_ref(),
                    &mut open,
                    &mut coords,
                    &mut tagged_nodes,
                    &mut ways,
                    &mut relations,
                    &mut remarks,
                );
            }
            Event::Eof => break,
            _ => {}
        }
    }
    if !saw_root {
        return Err(ParseError::Xml {
            offset: 0,
            message: "no <osm> root element".into(),
        });
    }

    let mut skipped = SkipReport::default();
    let mut features = Vec::new();

    for (id, point, tags) in tagged_nodes {
        match Polygon::square_around(point, POINT_FEATURE_SIDE) {
            Ok(g) => features.push(Feature::new(FeatureId::node(id), g, tags)),
            Err(_) => skipped.add("invalid node coordinate"),
        }
    }

    let way_refs: HashMap<i64, &[i64]> = ways.iter().map(|w| (w.id, w.refs.as_slice())).collect();
    for w in ways.iter().filter(|w| !w.tags.is_empty()) {
        if w.refs.len() < 4 || w.refs.first() != w.refs.last() {
            skipped.add("open way");
            continue;
        }
        let Some(points) = resolve(&w.refs, &coords) else {
            skipped.add("unresolved node reference");
            continue;
        };
        match Ring::new(points).and_then(|r| Polygon::new(r, Vec::new())) {
            Ok(g) => features.push(Feature::new(FeatureId::way(w.id), g, w.tags.clone())),
            Err(_) => skipped.add("invalid way geometry"),
        }
    }

    for r in relations.iter().filter(|r| !r.tags.is_empty()) {
        if r.tags.get("type").map(String::as_str) != Some("multipolygon") {
            skipped.add("non-multipolygon relation");
            continue;
        }
        match assemble_multipolygon(r, &way_refs, &coords) {
            Ok(polys) if polys.len() == 1 => {
                let g = polys.into_iter().next().unwrap();
                features.push(Feature::new(FeatureId::relation(r.id), g, r.tags.clone()));
            }
            Ok(polys) => {
                let base = FeatureId::relation(r.id);
                for (i, g) in polys.into_iter().enumerate() {
                    features.push(Feature::new(base.part(i), g, r.tags.clone()));
                }
            }
            Err(reason) => skipped.add(reason),
        }
    }

    Ok(ParsedXml {
        features: FeatureCollection::new(features),
        skipped,
        remarks,
    })
}

fn close(
    name: &[u8],
    open: &mut Option<Open>,
    coords: &mut HashMap<i64, Point>,
    tagged_nodes: &mut Vec<(i64, Point, TagMap)>,
    ways: &mut Vec<RawWay>,
    relations: &mut Vec<RawRelation>,
    remarks: &mut Vec<String>,
) {
    let done = matches!(
        (name, &*open),
        (b"node", Some(Open::Node { .. }))
            | (b"way", Some(Open::Way(_)))
            | (b"relation", Some(Open::Relation(_)))
            | (b"remark", Some(Open::Remark(_)))
    );
    if !done {
        return;
    }
    match open.take() {
        Some(Open::Node { id, point, tags }) => {
            coords.insert(id, point);
            if !tags.is_empty() {
                tagged_nodes.push((id, point, tags));
            }
        }
        Some(Open::Way(w)) => ways.push(w),
        Some(Open::Relation(r)) => relations.push(r),
        Some(Open::Remark(s)) => remarks.push(s),
        None => {}
    }
}

fn resolve(refs: &[i64], coords: &HashMap<i64, Point>) -> Option<Vec<Point>> {
    refs.iter().map(|id| coords.get(id).copied()).collect()
}

/// Joins way segments end to end into closed node sequences.
fn join_rings(mut pool: Vec<Vec<i64>>) -> Option<Vec<Vec<i64>>> {
    let mut rings = Vec::new();
    while let Some(mut ring) = pool.pop() {
        while ring.first() != ring.last() || ring.len() < 4 {
            let tail = *ring.last()?;
            let pos = pool
                .iter()
                .position(|s| s.first() == Some(&tail) || s.last() == Some(&tail))?;
            let mut seg = pool.swap_remove(pos);
            if seg.first() != Some(&tail) {
                seg.reverse();
            }
            ring.extend_from_slice(&seg[1..]);
        }
        rings.push(ring);
    }
    Some(rings)
}

fn assemble_multipolygon(
    r: &RawRelation,
    way_refs: &HashMap<i64, &[i64]>,
    coords: &HashMap<i64, Point>,
) -> Result<Vec<Polygon>, &'static str> {
    let mut outer = Vec::new();
    let mut inner = Vec::new();
    for m in r.members.iter().filter(|m| m.kind == "way") {
        let refs = way_refs.get(&m.id).ok_or("missing relation member")?;
        match m.role.as_str() {
            "inner" => inner.push(refs.to_vec()),
            _ => outer.push(refs.to_vec()),
        }
    }
    if outer.is_empty() {
        return Err("multipolygon without outer ring");
    }
    // pool is consumed from the back; reverse to start from the first member
    outer.reverse();
    inner.reverse();
    let outer = join_rings(outer).ok_or("unclosed multipolygon ring")?;
    let inner = join_rings(inner).ok_or("unclosed multipolygon ring")?;
    let to_ring = |ids: &Vec<i64>| -> Result<Ring, &'static str> {
        let pts = resolve(ids, coords).ok_or("unresolved node reference")?;
        Ring::new(pts).map_err(|_| "invalid multipolygon geometry")
    };
    let shells: Vec<Ring> = outer.iter().map(to_ring).collect::<Result<_, _>>()?;
    let shell_polys: Vec<Polygon> = shells
        .iter()
        .map(|s| Polygon::new(s.clone(), Vec::new()).map_err(|_| "invalid multipolygon geometry"))
        .collect::<Result<_, _>>()?;
    let mut holes: Vec<Vec<Ring>> = vec![Vec::new(); shells.len()];
    for h in inner.iter().map(to_ring) {
        let h = h?;
        let first = h.vertices()[0];
        if let Some(i) = shell_polys.iter().position(|p| p.contains_point(&first)) {
            holes[i].push(h);
        }
    }
    shells
        .into_iter()
        .zip(holes)
        .map(|(s, hs)| Polygon::new(s, hs).map_err(|_| "invalid multipolygon geometry"))
        .collect()
}
