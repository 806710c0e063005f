//! Engine predicates against the independent reference implementations in
//! `geofence-testkit`.

#![allow(clippy::field_reassign_with_default)]

use std::collections::BTreeSet;

use geofence_core::crs::{helmert_transform, HelmertParams, LocalProjection};
use geofence_core::engine::{classify_obstacles, situation_report, ObstacleRuleSet};
use geofence_core::feature::{Category, FeatureGeometry, MapFeature};
use geofence_core::geometry::{polygon_centroid, BBox, GeoPoint, PolygonShape, Ring, UavState};
use geofence_core::ingest::{parse_osm_xml, FenceConfig};
use geofence_core::store::{
    buffer_metrics, build_buffer, distance_to_feature, point_in_polygon, within_buffer, FeatureStore,
};
use geofence_core::synth::{building_corpus, to_osm_xml};
use geofence_testkit as oracle;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn ring_of(pts: &[(f64, f64)]) -> Ring {
    Ring::new(pts.iter().map(|&(x, y)| GeoPoint::new(x, y).unwrap()).collect()).unwrap()
}

fn random_polygon(rng: &mut ChaCha8Rng, center: (f64, f64), scale: f64) -> PolygonShape {
    // with five or more outer vertices every edge stays over 0.25 * scale
    // from the centre, so the hole never touches the outer ring
    let with_hole = rng.gen_bool(0.4);
    let n = if with_hole {
        rng.gen_range(5..12)
    } else {
        rng.gen_range(3..12)
    };
    let outer = ring_of(&oracle::star_ring(center, 0.5 * scale, scale, n, rng));
    let holes = if with_hole {
        vec![ring_of(&oracle::star_ring(
            center,
            0.05 * scale,
            0.24 * scale,
            rng.gen_range(3..8),
            rng,
        ))]
    } else {
        Vec::new()
    };
    PolygonShape::new(outer, holes).unwrap()
}

#[test]
fn point_in_polygon_matches_winding_number() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut mismatches = 0;
    let mut poly = random_polygon(&mut rng, (0.0, 0.0), 1.0);
    for i in 0..10_000 {
        if i % 50 == 0 {
            poly = random_polygon(&mut rng, (0.0, 0.0), 1.0);
        }
        let q = (rng.gen_range(-1.2..1.2), rng.gen_range(-1.2..1.2));
        let got = point_in_polygon(&GeoPoint::new(q.0, q.1).unwrap(), &poly);
        if got != oracle::winding_contains(&poly, q) {
            mismatches += 1;
        }
    }
    assert_eq!(mismatches, 0);
}

#[test]
fn distance_matches_dense_sampling() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let origin = (-0.627, 52.073);
    let proj = LocalProjection::standard(GeoPoint::new(origin.0, origin.1).unwrap()).unwrap();
    for case in 0..200 {
        let c = (
            origin.0 + rng.gen_range(-0.01..0.01),
            origin.1 + rng.gen_range(-0.01..0.01),
        );
        let geom = if case % 4 == 3 {
            let pts = (0..rng.gen_range(2..6))
                .map(|_| GeoPoint::new(c.0 + rng.gen_range(-0.002..0.002), c.1 + rng.gen_range(-0.002..0.002)).unwrap())
                .collect();
            FeatureGeometry::Polyline(pts)
        } else {
            FeatureGeometry::Polygon(random_polygon(&mut rng, c, 0.001))
        };
        let q = (
            origin.0 + rng.gen_range(-0.012..0.012),
            origin.1 + rng.gen_range(-0.012..0.012),
        );
        let got = distance_to_feature(&GeoPoint::new(q.0, q.1).unwrap(), &geom, &proj).unwrap();
        let want = oracle::sampled_distance(q, origin, &geom);
        if want == 0.0 {
            assert!(got < 1e-9, "case {case}: got {got}, want 0");
        } else {
            assert!((got - want).abs() / want < 1e-3, "case {case}: got {got}, want {want}");
        }
    }
}

#[test]
fn within_matches_sampling() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let center = (-0.627, 52.073);
    let zone = build_buffer(GeoPoint::new(center.0, center.1).unwrap(), 0.012, 8).unwrap();
    let mut inside = 0;
    for case in 0..500 {
        let c = (
            center.0 + rng.gen_range(-0.016..0.016),
            center.1 + rng.gen_range(-0.016..0.016),
        );
        let scale = rng.gen_range(0.0002..0.004);
        let geom = FeatureGeometry::Polygon(random_polygon(&mut rng, c, scale));
        let got = within_buffer(&geom, &zone).unwrap();
        let want = oracle::sampled_within(&geom, center, 0.012, &mut rng);
        assert_eq!(got, want, "case {case}");
        inside += usize::from(got);
    }
    // both outcomes exercised
    assert!(inside > 50 && inside < 450, "{inside}");
}

#[test]
fn buffer_area_matches_monte_carlo() {
    let center = GeoPoint::new(-0.627, 52.073).unwrap();
    let zone = build_buffer(center, 0.012, 8).unwrap();
    let proj = LocalProjection::standard(center).unwrap();
    let (radius_m, area_m2) = buffer_metrics(&zone, &proj).unwrap();
    assert!((radius_m - 1044.5).abs() / 1044.5 < 0.02, "{radius_m}");
    assert!((area_m2 - 3_427_475.0).abs() / 3_427_475.0 < 0.02, "{area_m2}");

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mc = oracle::monte_carlo_area_m2(&zone.polygon(), (center.lon(), center.lat()), 400_000, &mut rng);
    assert!((mc - area_m2).abs() / area_m2 < 0.01, "mc {mc} vs {area_m2}");
}

#[test]
fn centroid_matches_triangle_fan() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..200 {
        let c = (rng.gen_range(-170.0..170.0), rng.gen_range(-80.0..80.0));
        let pts = oracle::star_ring(c, 0.001, 0.01, rng.gen_range(3..15), &mut rng);
        let poly = PolygonShape::simple(ring_of(&pts));
        let got = polygon_centroid(&poly).unwrap();
        let want = oracle::triangle_fan_centroid(&pts);
        assert!((got.lon() - want.0).abs() < 1e-9 && (got.lat() - want.1).abs() < 1e-9);
    }
}

#[test]
fn helmert_matches_written_out_equations() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..500 {
        let t = [
            rng.gen_range(-500.0..500.0),
            rng.gen_range(-500.0..500.0),
            rng.gen_range(-500.0..500.0),
        ];
        let r = [
            rng.gen_range(-1e-5..1e-5),
            rng.gen_range(-1e-5..1e-5),
            rng.gen_range(-1e-5..1e-5),
        ];
        let s = rng.gen_range(-30.0..30.0);
        let params = HelmertParams::new(t, r, s).unwrap();
        let p = [
            rng.gen_range(-6.4e6..6.4e6),
            rng.gen_range(-6.4e6..6.4e6),
            rng.gen_range(-6.4e6..6.4e6),
        ];
        let k = 1.0 + s / 1e6;
        let x = t[0] + k * p[0] - r[2] * p[1] + r[1] * p[2];
        let y = t[1] + r[2] * p[0] + k * p[1] - r[0] * p[2];
        let z = t[2] - r[1] * p[0] + r[0] * p[1] + k * p[2];
        let got = helmert_transform(p, &params).unwrap();
        for (g, w) in got.iter().zip([x, y, z]) {
            assert!((g - w).abs() < 1e-6, "{g} vs {w}");
        }
        // negated parameters undo the transform to first order
        let back = HelmertParams::new([-t[0], -t[1], -t[2]], [-r[0], -r[1], -r[2]], -s).unwrap();
        let round = helmert_transform(got, &back).unwrap();
        for (a, b) in round.iter().zip(p) {
            assert!((a - b).abs() < 0.1, "{a} vs {b}");
        }
    }
}

#[test]
fn osm_way_count_matches_text_scan() {
    let extent = BBox {
        min_lon: -0.64,
        min_lat: 52.06,
        max_lon: -0.61,
        max_lat: 52.09,
    };
    let xml = to_osm_xml(&building_corpus(300, extent, 11));
    let scanned = xml.matches("<way ").count();
    let tagged = xml.matches("k=\"building\"").count();
    let doc = parse_osm_xml(xml.as_bytes()).unwrap();
    assert_eq!(scanned, 300);
    assert_eq!(doc.features.len(), tagged);
    assert!(doc.features.iter().all(|f| f.category == Category::Building));
}

#[test]
fn situation_order_matches_full_sort() {
    let extent = BBox {
        min_lon: -0.64,
        min_lat: 52.06,
        max_lon: -0.61,
        max_lat: 52.09,
    };
    let corpus = building_corpus(400, extent, 5);
    let uav = UavState::new(GeoPoint::new(-0.625, 52.075).unwrap(), 30.0, 10.0, 8.0).unwrap();
    let proj = LocalProjection::standard(uav.position).unwrap();
    let refs: Vec<&MapFeature> = corpus.iter().collect();
    let report = situation_report(&refs, &uav, &proj).unwrap();

    let mut all: Vec<(f64, i64)> = corpus
        .iter()
        .map(|f| {
            (
                distance_to_feature(&uav.position, &f.geometry, &proj).unwrap(),
                f.osm_id,
            )
        })
        .collect();
    all.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let got: Vec<(f64, i64)> = report.iter().map(|e| (e.distance_m, e.osm_id)).collect();
    assert_eq!(got, all);
}

#[test]
fn classification_matches_tag_scan() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let extent = BBox {
        min_lon: 0.0,
        min_lat: 0.0,
        max_lon: 0.05,
        max_lat: 0.05,
    };
    let mut corpus = building_corpus(300, extent, 2);
    let types = ["hospital", "school", "house", "farmland"];
    for f in &mut corpus {
        f.category = Category::ALL[rng.gen_range(0..Category::ALL.len())];
        f.ftype = Some(types[rng.gen_range(0..types.len())].to_string());
    }
    let store = FeatureStore::new(corpus.clone()).unwrap();
    let mut config = FenceConfig::default();
    config.obstacle_categories = BTreeSet::from([Category::Natural, Category::Railways]);
    config.obstacle_type_filters = vec![("type".into(), "hospital".into())];
    config.whitelist_ids = (1..=300).filter(|i| i % 7 == 0).collect();
    let got = classify_obstacles(&store, &ObstacleRuleSet::from(&config));

    let want: BTreeSet<i64> = corpus
        .iter()
        .filter(|f| f.osm_id % 7 != 0)
        .filter(|f| {
            let cat = f.category.to_string();
            cat == "natural" || cat == "railways" || f.ftype.as_deref() == Some("hospital")
        })
        .map(|f| f.osm_id)
        .collect();
    assert_eq!(got, want);
}
