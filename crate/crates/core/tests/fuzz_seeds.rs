//! Replays the checked-in fuzz corpus through each parser on stable.

use std::path::Path;

use geofence_core::ingest::{
    parse_construction_file, parse_height_csv, parse_osm_xml, parse_uav_line, parse_wkt, serialize_wkt,
};

fn seeds(target: &str) -> Vec<(String, Vec<u8>)> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../fuzz/corpus")
        .join(target);
    let mut out: Vec<_> = std::fs::read_dir(&dir)
        .unwrap()
        .map(|e| {
            let path = e.unwrap().path();
            (path.display().to_string(), std::fs::read(&path).unwrap())
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds in {}", dir.display());
    out
}

fn text(bytes: &[u8]) -> &str {
    std::str::from_utf8(bytes).unwrap()
}

#[test]
fn osm_seeds_parse() {
    for (name, bytes) in seeds("osm_xml") {
        let doc = parse_osm_xml(&bytes).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert!(!doc.features.is_empty(), "{name}");
    }
}

#[test]
fn wkt_seeds_round_trip() {
    for (name, bytes) in seeds("wkt") {
        let geom = parse_wkt(text(&bytes)).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(parse_wkt(&serialize_wkt(&geom)).unwrap(), geom, "{name}");
    }
}

#[test]
fn construction_seeds_validate() {
    for (name, bytes) in seeds("construction_file") {
        let parsed = parse_construction_file(text(&bytes)).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert!(parsed.config.validate().is_ok(), "{name}");
    }
}

#[test]
fn uav_seeds_parse_every_line() {
    for (name, bytes) in seeds("uav_line") {
        for line in text(&bytes).lines() {
            let uav = parse_uav_line(line).unwrap_or_else(|e| panic!("{name}: {e}"));
            assert!((0.0..360.0).contains(&uav.heading_deg));
        }
    }
}

#[test]
fn height_seeds_parse() {
    for (name, bytes) in seeds("height_csv") {
        assert!(!parse_height_csv(text(&bytes)).unwrap().is_empty(), "{name}");
    }
}
