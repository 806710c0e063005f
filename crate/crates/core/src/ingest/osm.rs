//! OSM XML (`map.xml`) to [`MapFeature`]s.
//!
//! Only the `osm/node/way/nd/tag/relation/member` subset is read. Closed
//! ways with a recognised category tag become polygons; open road, waterway
//! and railway ways become polylines. Multipolygon relations contribute
//! their outer rings only and are keyed by the negated relation id so they
//! cannot collide with way ids.

use std::collections::HashMap;

use log::warn;
use quick_xml::events::{BytesStart, Event};
use quick_xml::Reader;

use crate::error::{Error, Result};
use crate::feature::{Category, FeatureGeometry, MapFeature};
use crate::geometry::{GeoPoint, MultiPolygonShape, PolygonShape, Ring};

/// Category tags in precedence order; first present key wins.
const CATEGORY_KEYS: [(&str, Category); 6] = [
    ("building", Category::Building),
    ("natural", Category::Natural),
    ("landuse", Category::Landuse),
    ("waterway", Category::Waterways),
    ("railway", Category::Railways),
    ("highway", Category::Roads),
];

#[derive(Debug, Default, Clone, PartialEq)]
pub struct OsmDocument {
    pub features: Vec<MapFeature>,
    /// Ways and relations without a usable category or shape.
    pub skipped_unrecognized: usize,
    /// Objects that carried a category but failed geometry validation.
    pub rejected: Vec<(i64, String)>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Default)]
struct RawWay {
    id: i64,
    refs: Vec<i64>,
    tags: Vec<(String, String)>,
}

#[derive(Debug)]
struct RawMember {
    is_way: bool,
    reference: i64,
    role: String,
}

#[derive(Debug, Default)]
struct RawRelation {
    id: i64,
    members: Vec<RawMember>,
    tags: Vec<(String, String)>,
}

enum Open {
    Root,
    Node,
    Way(RawWay),
    Relation(RawRelation),
    Other,
}

pub fn parse_osm_xml(document: &[u8]) -> Result<OsmDocument> {
    let mut reader = Reader::from_reader(document);
    reader.config_mut().trim_text(true);

    let line_at = |pos: u64| -> usize {
        let end = (pos as usize).min(document.len());
        1 + document[..end].iter().filter(|&&b| b == b'\n').count()
    };

    let mut nodes: HashMap<i64, GeoPoint> = HashMap::new();
    let mut ways: Vec<RawWay> = Vec::new();
    let mut relations: Vec<RawRelation> = Vec::new();
    let mut stack: Vec<Open> = Vec::new();
    let mut seen_root = false;
    let mut buf = Vec::new();

    loop {
        let event = reader.read_event_into(&mut buf).map_err(|e| Error::Xml {
            line: line_at(reader.error_position()),
            message: e.to_string(),
        })?;
        let pos = reader.buffer_position();
        let fail = |message: String| Error::Xml {
            line: line_at(pos),
            message,
        };
        match event {
            Event::Start(ref e) | Event::Empty(ref e) => {
                let is_empty = matches!(event, Event::Empty(_));
                let name = e.name();
                let name = name.as_ref();
                let open = if stack.is_empty() {
                    if seen_root {
                        return Err(fail("multiple root elements".into()));
                    }
                    if name != b"osm" {
                        return Err(fail(format!(
                            "root element must be <osm>, found <{}>",
                            String::from_utf8_lossy(name)
                        )));
                    }
                    seen_root = true;
                    Open::Root
                } else {
                    match (name, stack.last_mut()) {
                        (b"node", Some(Open::Root)) => {
                            let attrs = attributes(e).map_err(&fail)?;
                            let id = required_int(&attrs, "id").map_err(&fail)?;
                            let lat = required_float(&attrs, "lat").map_err(&fail)?;
                            let lon = required_float(&attrs, "lon").map_err(&fail)?;
                            let p = GeoPoint::new(lon, lat).map_err(|err| fail(format!("node {id}: {err}")))?;
                            nodes.insert(id, p);
                            Open::Node
                        }
                        (b"way", Some(Open::Root)) => {
                            let attrs = attributes(e).map_err(&fail)?;
                            Open::Way(RawWay {
                                id: required_int(&attrs, "id").map_err(&fail)?,
                                ..RawWay::default()
                            })
                        }
                        (b"relation", Some(Open::Root)) => {
                            let attrs = attributes(e).map_err(&fail)?;
                            Open::Relation(RawRelation {
                                id: required_int(&attrs, "id").map_err(&fail)?,
                                ..RawRelation::default()
                            })
                        }
                        (b"nd", Some(Open::Way(way))) => {
                            let attrs = attributes(e).map_err(&fail)?;
                            way.refs.push(required_int(&attrs, "ref").map_err(&fail)?);
                            Open::Other
                        }
                        (b"member", Some(Open::Relation(rel))) => {
                            let attrs = attributes(e).map_err(&fail)?;
                            rel.members.push(RawMember {
                                is_way: lookup(&attrs, "type") == Some("way"),
                                reference: required_int(&attrs, "ref").map_err(&fail)?,
                                role: lookup(&attrs, "role").unwrap_or_default().to_string(),
                            });
                            Open::Other
                        }
                        (b"tag", Some(parent)) => {
                            let attrs = attributes(e).map_err(&fail)?;
                            let k = lookup(&attrs, "k")
                                .ok_or_else(|| fail("tag without k".into()))?
                                .to_string();
                            let v = lookup(&attrs, "v").unwrap_or_default().to_string();
                            match parent {
                                Open::Way(way) => way.tags.push((k, v)),
                                Open::Relation(rel) => rel.tags.push((k, v)),
                                _ => {}
                            }
                            Open::Other
                        }
                        _ => Open::Other,
                    }
                };
                if is_empty {
                    finish(open, &mut ways, &mut relations);
                } else {
                    stack.push(open);
                }
            }
            Event::End(_) => {
                let open = stack.pop().ok_or_else(|| fail("unexpected closing tag".into()))?;
                finish(open, &mut ways, &mut relations);
            }
            Event::Text(ref t) => {
                if stack.is_empty() && !t.iter().all(u8::is_ascii_whitespace) {
                    return Err(fail("text outside the root element".into()));
                }
            }
            Event::Eof => {
                if !stack.is_empty() {
                    return Err(fail("unexpected end of document inside an open element".into()));
                }
                break;
            }
            _ => {}
        }
        buf.clear();
    }
    if !seen_root {
        return Err(Error::Xml {
            line: 1,
            message: "document has no <osm> root".into(),
        });
    }

    assemble(&nodes, ways, relations)
}

fn finish(open: Open, ways: &mut Vec<RawWay>, relations: &mut Vec<RawRelation>) {
    match open {
        Open::Way(w) => ways.push(w),
        Open::Relation(r) => relations.push(r),
        _ => {}
    }
}

fn attributes(e: &BytesStart<'_>) -> std::result::Result<Vec<(String, String)>, String> {
    let mut out = Vec::new();
    for attr in e.attributes() {
        let attr = attr.map_err(|err| err.to_string())?;
        let key = String::from_utf8_lossy(attr.key.as_ref()).into_owned();
        let value = attr.unescape_value().map_err(|err| err.to_string())?;
        out.push((key, value.into_owned()));
    }
    Ok(out)
}

fn lookup<'a>(attrs: &'a [(String, String)], key: &str) -> Option<&'a str> {
    attrs.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
}

fn required_int(attrs: &[(String, String)], key: &str) -> std::result::Result<i64, String> {
    let raw = lookup(attrs, key).ok_or_else(|| format!("missing attribute `{key}`"))?;
    raw.trim()
        .parse()
        .map_err(|_| format!("attribute `{key}` is not an integer: `{raw}`"))
}

fn required_float(attrs: &[(String, String)], key: &str) -> std::result::Result<f64, String> {
    let raw = lookup(attrs, key).ok_or_else(|| format!("missing attribute `{key}`"))?;
    match raw.trim().parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(format!("attribute `{key}` is not a number: `{raw}`")),
    }
}

/// Category and the value of the tag that decided it.
pub(crate) fn categorize(tags: &[(String, String)]) -> Option<(Category, String)> {
    CATEGORY_KEYS.iter().find_map(|&(key, cat)| {
        tags.iter()
            .find(|(k, v)| k == key && v != "no")
            .map(|(_, v)| (cat, v.clone()))
    })
}

/// Parses an OSM `height` value in meters, tolerating a trailing `m`.
pub fn parse_height(raw: &str) -> Option<f64> {
    let trimmed = raw.trim();
    let number = trimmed.strip_suffix('m').unwrap_or(trimmed).trim();
    number.parse::<f64>().ok().filter(|h| h.is_finite() && *h >= 0.0)
}

fn build_feature(
    id: i64,
    category: Category,
    ftype: String,
    tags: &[(String, String)],
    geometry: FeatureGeometry,
    warnings: &mut Vec<String>,
) -> MapFeature {
    let mut f = MapFeature::new(id, category, geometry);
    f.ftype = Some(ftype);
    for (k, v) in tags {
        match k.as_str() {
            "name" => f.name = Some(v.clone()),
            "height" => match parse_height(v) {
                Some(h) => f.height_m = Some(h),
                None => warnings.push(format!("object {id}: ignoring unparseable height `{v}`")),
            },
            _ => {}
        }
        f.tags.insert(k.clone(), v.clone());
    }
    f
}

fn assemble(nodes: &HashMap<i64, GeoPoint>, ways: Vec<RawWay>, relations: Vec<RawRelation>) -> Result<OsmDocument> {
    let mut doc = OsmDocument::default();

    for way in &ways {
        let missing: Vec<i64> = way.refs.iter().filter(|r| !nodes.contains_key(r)).copied().collect();
        if !missing.is_empty() {
            return Err(Error::DanglingReference {
                way_id: way.id,
                missing,
            });
        }
    }

    for way in &ways {
        let Some((category, ftype)) = categorize(&way.tags) else {
            doc.skipped_unrecognized += 1;
            continue;
        };
        let points: Vec<GeoPoint> = way.refs.iter().map(|r| nodes[r]).collect();
        let closed = way.refs.len() >= 2 && way.refs.first() == way.refs.last();
        let geometry = if closed {
            match Ring::new(points) {
                Ok(ring) => FeatureGeometry::Polygon(PolygonShape::simple(ring)),
                Err(e) => {
                    doc.rejected.push((way.id, e.to_string()));
                    continue;
                }
            }
        } else if category.is_linear() {
            if points.len() < 2 {
                doc.rejected.push((way.id, "polyline needs at least 2 nodes".into()));
                continue;
            }
            FeatureGeometry::Polyline(points)
        } else {
            doc.skipped_unrecognized += 1;
            continue;
        };
        doc.features.push(build_feature(
            way.id,
            category,
            ftype,
            &way.tags,
            geometry,
            &mut doc.warnings,
        ));
    }

    let way_refs: HashMap<i64, &[i64]> = ways.iter().map(|w| (w.id, w.refs.as_slice())).collect();
    for rel in &relations {
        let is_multipolygon = rel.tags.iter().any(|(k, v)| k == "type" && v == "multipolygon");
        let category = categorize(&rel.tags);
        let (true, Some((category, ftype))) = (is_multipolygon, category) else {
            doc.skipped_unrecognized += 1;
            continue;
        };
        let mut outers: Vec<Vec<i64>> = Vec::new();
        let mut dropped_inner = 0;
        let mut missing_way = None;
        for m in rel.members.iter().filter(|m| m.is_way) {
            if m.role == "inner" {
                dropped_inner += 1;
                continue;
            }
            match way_refs.get(&m.reference) {
                Some(refs) => outers.push(refs.to_vec()),
                None => {
                    missing_way = Some(m.reference);
                    break;
                }
            }
        }
        if let Some(w) = missing_way {
            doc.rejected.push((-rel.id, format!("member way {w} not in document")));
            continue;
        }
        if dropped_inner > 0 {
            let msg = format!("relation {}: dropped {dropped_inner} inner ring(s)", rel.id);
            warn!("{msg}");
            doc.warnings.push(msg);
        }
        let rings = match stitch_rings(outers) {
            Ok(rings) => rings,
            Err(msg) => {
                doc.rejected.push((-rel.id, msg));
                continue;
            }
        };
        let polygons: Result<Vec<PolygonShape>> = rings
            .into_iter()
            .map(|refs| Ring::new(refs.iter().map(|r| nodes[r]).collect()).map(PolygonShape::simple))
            .collect();
        let geometry = match polygons {
            Ok(mut polys) if polys.len() == 1 => FeatureGeometry::Polygon(polys.remove(0)),
            Ok(polys) if !polys.is_empty() => FeatureGeometry::MultiPolygon(MultiPolygonShape::new(polys)?),
            Ok(_) => {
                doc.rejected.push((-rel.id, "relation has no outer ring".into()));
                continue;
            }
            Err(e) => {
                doc.rejected.push((-rel.id, e.to_string()));
                continue;
            }
        };
        doc.features.push(build_feature(
            -rel.id,
            category,
            ftype,
            &rel.tags,
            geometry,
            &mut doc.warnings,
        ));
    }

    Ok(doc)
}

/// Joins way node sequences end-to-end into closed rings.
fn stitch_rings(mut pieces: Vec<Vec<i64>>) -> std::result::Result<Vec<Vec<i64>>, String> {
    let mut rings = Vec::new();
    pieces.retain(|p| !p.is_empty());
    while let Some(mut current) = pieces.pop() {
        while current.first() != current.last() || current.len() < 2 {
            let tail = *current.last().expect("non-empty");
            let Some(idx) = pieces
                .iter()
                .position(|p| p.first() == Some(&tail) || p.last() == Some(&tail))
            else {
                return Err("outer ring does not close".into());
            };
            let mut next = pieces.swap_remove(idx);
            if next.first() != Some(&tail) {
                next.reverse();
            }
            current.extend_from_slice(&next[1..]);
        }
        rings.push(current);
    }
    Ok(rings)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"<?xml version="1.0" encoding="UTF-8"?>
<osm version="0.6">
  <node id="1" lat="52.0" lon="-0.6"/>
  <node id="2" lat="52.0" lon="-0.5999"/>
  <node id="3" lat="52.0001" lon="-0.5999"/>
  <node id="4" lat="52.0001" lon="-0.6"/>
  <way id="10">
    <nd ref="1"/><nd ref="2"/><nd ref="3"/><nd ref="4"/><nd ref="1"/>
    <tag k="building" v="yes"/>
    <tag k="height" v="12.5 m"/>
    <tag k="name" v="Hangar &amp; Workshop"/>
  </way>
</osm>"#;

    #[test]
    fn minimal_building() {
        let doc = parse_osm_xml(MINIMAL.as_bytes()).unwrap();
        assert_eq!(doc.features.len(), 1);
        let f = &doc.features[0];
        assert_eq!(f.osm_id, 10);
        assert_eq!(f.category, Category::Building);
        assert_eq!(f.height_m, Some(12.5));
        assert_eq!(f.name.as_deref(), Some("Hangar & Workshop"));
        assert_eq!(f.ftype.as_deref(), Some("yes"));
        match &f.geometry {
            FeatureGeometry::Polygon(p) => assert_eq!(p.outer.points().len(), 5),
            other => panic!("unexpected geometry {other:?}"),
        }
    }

    #[test]
    fn empty_root() {
        let doc = parse_osm_xml(b"<osm/>").unwrap();
        assert!(doc.features.is_empty());
        assert_eq!(doc.skipped_unrecognized, 0);
        assert!(doc.rejected.is_empty());
    }

    #[test]
    fn malformed_xml_reports_line() {
        let text = "<osm>\n<node id=\"1\" lat=\"1\" lon=\"1\">\n</way>\n</osm>";
        match parse_osm_xml(text.as_bytes()) {
            Err(Error::Xml { line, .. }) => assert!(line >= 2, "line {line}"),
            other => panic!("expected xml error, got {other:?}"),
        }
        assert!(matches!(parse_osm_xml(b""), Err(Error::Xml { .. })));
        assert!(matches!(parse_osm_xml(b"<osm>"), Err(Error::Xml { .. })));
        assert!(matches!(parse_osm_xml(b"<gpx/>"), Err(Error::Xml { .. })));
    }

    #[test]
    fn dangling_reference_names_way() {
        let text = r#"<osm><node id="1" lat="0" lon="0"/>
            <way id="77"><nd ref="1"/><nd ref="2"/><tag k="highway" v="track"/></way></osm>"#;
        assert_eq!(
            parse_osm_xml(text.as_bytes()),
            Err(Error::DanglingReference {
                way_id: 77,
                missing: vec![2]
            })
        );
    }

    #[test]
    fn open_ways_and_precedence() {
        let text = r#"<osm>
            <node id="1" lat="0" lon="0"/><node id="2" lat="0" lon="0.001"/>
            <node id="3" lat="0.001" lon="0.001"/>
            <way id="1"><nd ref="1"/><nd ref="2"/><tag k="highway" v="service"/></way>
            <way id="2"><nd ref="1"/><nd ref="2"/><tag k="building" v="yes"/></way>
            <way id="3"><nd ref="1"/><nd ref="2"/><nd ref="3"/><nd ref="1"/>
                <tag k="highway" v="pedestrian"/><tag k="landuse" v="grass"/></way>
            <way id="4"><nd ref="1"/><nd ref="2"/><tag k="amenity" v="bench"/></way>
            <way id="5"><nd ref="1"/><nd ref="2"/><nd ref="1"/><tag k="building" v="yes"/></way>
        </osm>"#;
        let doc = parse_osm_xml(text.as_bytes()).unwrap();
        let ids: Vec<(i64, Category)> = doc.features.iter().map(|f| (f.osm_id, f.category)).collect();
        assert_eq!(ids, vec![(1, Category::Roads), (3, Category::Landuse)]);
        assert!(matches!(doc.features[0].geometry, FeatureGeometry::Polyline(_)));
        // open building and untagged-category way
        assert_eq!(doc.skipped_unrecognized, 2);
        assert_eq!(doc.rejected.len(), 1);
        assert_eq!(doc.rejected[0].0, 5);
    }

    #[test]
    fn multipolygon_relation_outer_only() {
        let text = r#"<osm>
            <node id="1" lat="0" lon="0"/><node id="2" lat="0" lon="0.01"/>
            <node id="3" lat="0.01" lon="0.01"/><node id="4" lat="0.01" lon="0"/>
            <node id="5" lat="0.004" lon="0.004"/><node id="6" lat="0.004" lon="0.006"/>
            <node id="7" lat="0.006" lon="0.006"/>
            <way id="100"><nd ref="1"/><nd ref="2"/><nd ref="3"/></way>
            <way id="101"><nd ref="1"/><nd ref="4"/><nd ref="3"/></way>
            <way id="102"><nd ref="5"/><nd ref="6"/><nd ref="7"/><nd ref="5"/></way>
            <relation id="9">
              <member type="way" ref="100" role="outer"/>
              <member type="way" ref="101" role="outer"/>
              <member type="way" ref="102" role="inner"/>
              <tag k="type" v="multipolygon"/><tag k="building" v="hospital"/>
            </relation>
        </osm>"#;
        let doc = parse_osm_xml(text.as_bytes()).unwrap();
        assert_eq!(doc.features.len(), 1);
        let f = &doc.features[0];
        assert_eq!(f.osm_id, -9);
        assert_eq!(f.ftype.as_deref(), Some("hospital"));
        match &f.geometry {
            FeatureGeometry::Polygon(p) => {
                assert_eq!(p.outer.points().len(), 5);
                assert!(p.holes.is_empty());
            }
            other => panic!("unexpected geometry {other:?}"),
        }
        assert_eq!(doc.warnings.len(), 1);
        // the three untagged member ways
        assert_eq!(doc.skipped_unrecognized, 3);
    }

    #[test]
    fn height_values() {
        assert_eq!(parse_height("30"), Some(30.0));
        assert_eq!(parse_height("12.5m"), Some(12.5));
        assert_eq!(parse_height(" 7 m "), Some(7.0));
        assert_eq!(parse_height("tall"), None);
        assert_eq!(parse_height("-3"), None);
    }
}
