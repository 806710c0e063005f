//! Deterministic synthetic map data for benchmarks and property tests.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::feature::{Category, FeatureGeometry, MapFeature};
use crate::geometry::{BBox, GeoPoint, PolygonShape, Ring};

/// `n` small quadrilateral buildings spread uniformly over `extent`, with
/// ids `1..=n`. The same seed always yields the same corpus.
pub fn building_corpus(n: usize, extent: BBox, seed: u64) -> Vec<MapFeature> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    // footprints of roughly 5 to 25 m
    let (min_side, max_side) = (0.00005, 0.00025);
    for i in 0..n {
        let w: f64 = rng.gen_range(min_side..max_side);
        let h: f64 = rng.gen_range(min_side..max_side);
        let x = rng.gen_range(extent.min_lon..(extent.max_lon - w).max(extent.min_lon + f64::EPSILON));
        let y = rng.gen_range(extent.min_lat..(extent.max_lat - h).max(extent.min_lat + f64::EPSILON));
        let skew: f64 = rng.gen_range(-0.3..0.3) * w;
        let pts = [(x, y), (x + w, y), (x + w + skew, y + h), (x + skew, y + h)]
            .iter()
            .filter_map(|&(lon, lat)| GeoPoint::new(lon, lat).ok())
            .collect();
        let Ok(ring) = Ring::closing(pts) else { continue };
        let mut f = MapFeature::new(i as i64 + 1, Category::Building, PolygonShape::simple(ring));
        f.height_m = Some(f64::from(rng.gen_range(3u32..60)));
        out.push(f);
    }
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
        .replace('\'', "&apos;")
}

/// Serializes features as an OSM XML document. Only outer rings are
/// written; each feature becomes one way with freshly numbered nodes.
pub fn to_osm_xml(features: &[MapFeature]) -> String {
    let mut nodes = String::new();
    let mut ways = String::new();
    let mut next_node = 1i64;
    for f in features {
        let line: Vec<GeoPoint> = match &f.geometry {
            FeatureGeometry::Polyline(pts) => pts.clone(),
            g => match g.polygons().first() {
                Some(p) => p.outer.points().to_vec(),
                None => continue,
            },
        };
        let closed = !matches!(f.geometry, FeatureGeometry::Polyline(_));
        let count = if closed { line.len() - 1 } else { line.len() };
        let first = next_node;
        let _ = writeln!(ways, "  <way id=\"{}\">", f.osm_id);
        for p in &line[..count] {
            let _ = writeln!(
                nodes,
                "  <node id=\"{}\" lat=\"{}\" lon=\"{}\"/>",
                next_node,
                p.lat(),
                p.lon()
            );
            let _ = writeln!(ways, "    <nd ref=\"{next_node}\"/>");
            next_node += 1;
        }
        if closed {
            let _ = writeln!(ways, "    <nd ref=\"{first}\"/>");
        }
        let key = match f.category {
            Category::Building => "building",
            Category::Natural => "natural",
            Category::Landuse => "landuse",
            Category::Roads => "highway",
            Category::Waterways => "waterway",
            Category::Railways => "railway",
        };
        let value = f.ftype.as_deref().unwrap_or("yes");
        let _ = writeln!(ways, "    <tag k=\"{key}\" v=\"{}\"/>", escape(value));
        if let Some(name) = &f.name {
            let _ = writeln!(ways, "    <tag k=\"name\" v=\"{}\"/>", escape(name));
        }
        if let Some(h) = f.height_m {
            let _ = writeln!(ways, "    <tag k=\"height\" v=\"{h}\"/>");
        }
        ways.push_str("  </way>\n");
    }
    format!("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<osm version=\"0.6\">\n{nodes}{ways}</osm>\n")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::parse_osm_xml;

    fn extent() -> BBox {
        BBox {
            min_lon: -0.68,
            min_lat: 52.02,
            max_lon: -0.58,
            max_lat: 52.12,
        }
    }

    #[test]
    fn corpus_is_deterministic_and_in_extent() {
        let a = building_corpus(200, extent(), 7);
        let b = building_corpus(200, extent(), 7);
        assert_eq!(a, b);
        assert_eq!(a.len(), 200);
        let e = extent();
        for f in &a {
            let bb = f.geometry.bbox();
            assert!(bb.min_lon >= e.min_lon - 0.001 && bb.max_lon <= e.max_lon + 0.001);
            assert!(bb.min_lat >= e.min_lat && bb.max_lat <= e.max_lat);
        }
        assert_ne!(a, building_corpus(200, extent(), 8));
    }

    #[test]
    fn xml_round_trip() {
        let corpus = building_corpus(25, extent(), 3);
        let doc = parse_osm_xml(to_osm_xml(&corpus).as_bytes()).unwrap();
        assert_eq!(doc.features.len(), 25);
        for (a, b) in corpus.iter().zip(&doc.features) {
            assert_eq!(a.osm_id, b.osm_id);
            assert_eq!(a.category, b.category);
            assert_eq!(a.height_m, b.height_m);
            assert_eq!(a.geometry.bbox(), b.geometry.bbox());
        }
    }
}
