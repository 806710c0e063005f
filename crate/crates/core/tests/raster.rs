#![allow(clippy::field_reassign_with_default)]

use geofence_core::engine::{evaluate_tick, ObstacleRuleSet};
use geofence_core::geometry::{BBox, GeoPoint, PolygonShape, Ring, UavState};
use geofence_core::ingest::FenceConfig;
use geofence_core::raster::{composite, export_png, rasterize, render_tick_layers, ColorScheme, RasterLayer};
use geofence_core::store::FeatureStore;
use geofence_core::synth::building_corpus;
use geofence_core::Error;
use geofence_testkit::png::decode;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const RED: [u8; 4] = [255, 0, 0, 255];

fn unit() -> BBox {
    BBox {
        min_lon: 0.0,
        min_lat: 0.0,
        max_lon: 1.0,
        max_lat: 1.0,
    }
}

fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> PolygonShape {
    let pts = [(x0, y0), (x1, y0), (x1, y1), (x0, y1)]
        .iter()
        .map(|&(x, y)| GeoPoint::new(x, y).unwrap())
        .collect();
    PolygonShape::simple(Ring::closing(pts).unwrap())
}

#[test]
fn empty_and_full() {
    let empty = rasterize(&[], unit(), 40, 30, RED).unwrap();
    assert_eq!(empty.painted_count(), 0);
    let full = rasterize(&[rect(-1.0, -1.0, 2.0, 2.0)], unit(), 40, 30, RED).unwrap();
    assert_eq!(full.count_color(RED), 40 * 30);
}

#[test]
fn degenerate_extent_rejected() {
    let flat = BBox {
        min_lon: 0.0,
        min_lat: 1.0,
        max_lon: 1.0,
        max_lat: 1.0,
    };
    assert!(matches!(
        rasterize(&[], flat, 10, 10, RED),
        Err(Error::InvalidExtent(_))
    ));
}

#[test]
fn orientation_west_left_north_top() {
    let layer = rasterize(&[rect(0.0, 0.5, 0.5, 1.0)], unit(), 10, 10, RED).unwrap();
    assert_eq!(layer.pixel(0, 0), RED);
    assert_eq!(layer.pixel(9, 9), [0, 0, 0, 0]);
    assert_eq!(layer.painted_count(), 25);
}

#[test]
fn half_plane_coverage() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..50 {
        let w = rng.gen_range(16..300u32);
        let h = rng.gen_range(16..300u32);
        let cut: f64 = rng.gen_range(0.05..0.95);
        let layer = rasterize(&[rect(-1.0, -1.0, cut, 2.0)], unit(), w, h, RED).unwrap();
        let expected = cut * f64::from(w) * f64::from(h);
        let got = layer.painted_count() as f64;
        assert!(
            (got - expected).abs() <= f64::from(h),
            "w {w} h {h} cut {cut}: {got} vs {expected}"
        );
    }
}

#[test]
fn convex_area_fraction() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let px = 500.0;
    let mut checked = 0;
    while checked < 50 {
        let v: Vec<(f64, f64)> = (0..3)
            .map(|_| (rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)))
            .collect();
        let shoelace = 0.5 * ((v[1].0 - v[0].0) * (v[2].1 - v[0].1) - (v[2].0 - v[0].0) * (v[1].1 - v[0].1)).abs();
        let area_px = shoelace * px * px;
        if area_px < 100.0 {
            continue;
        }
        checked += 1;
        let pts = v.iter().map(|&(x, y)| GeoPoint::new(x, y).unwrap()).collect();
        let tri = PolygonShape::simple(Ring::closing(pts).unwrap());
        let layer = rasterize(&[tri], unit(), 500, 500, RED).unwrap();
        let count = layer.painted_count() as f64;
        // every misclassified pixel centre lies within one pixel of an edge
        let perimeter_px: f64 = (0..3)
            .map(|i| {
                let (a, b) = (v[i], v[(i + 1) % 3]);
                (b.0 - a.0).hypot(b.1 - a.1) * px
            })
            .sum();
        assert!((count - area_px).abs() <= perimeter_px + 4.0, "{count} vs {area_px}");
        if area_px >= 10_000.0 {
            assert!((count - area_px).abs() / area_px < 0.02, "{count} vs {area_px}");
        }
    }
}

#[test]
fn list_equals_union_of_singles_and_is_monotone() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let polys: Vec<PolygonShape> = (0..6)
        .map(|_| {
            let (x, y) = (rng.gen_range(0.0..0.8), rng.gen_range(0.0..0.8));
            rect(x, y, x + rng.gen_range(0.05..0.3), y + rng.gen_range(0.05..0.3))
        })
        .collect();
    let together = rasterize(&polys, unit(), 64, 64, RED).unwrap();
    let mut acc = RasterLayer::transparent(unit(), 64, 64).unwrap();
    let mut prev_count = 0;
    for p in &polys {
        acc = composite(&acc, &rasterize(std::slice::from_ref(p), unit(), 64, 64, RED).unwrap()).unwrap();
        assert!(acc.painted_count() >= prev_count);
        prev_count = acc.painted_count();
    }
    assert_eq!(acc, together);
}

#[test]
fn blend_arithmetic() {
    let white = RasterLayer::filled(unit(), 3, 3, [255, 255, 255, 255]).unwrap();
    let half_red = RasterLayer::filled(unit(), 3, 3, [255, 0, 0, 128]).unwrap();
    let out = composite(&white, &half_red).unwrap();
    // straight-alpha source-over: c = cs*as + cb*(1-as)
    let a = 128.0 / 255.0;
    let want_g = 255.0 * (1.0 - a);
    let px = out.pixel(1, 1);
    assert_eq!(px[0], 255);
    assert!((f64::from(px[1]) - want_g).abs() <= 1.0 && (f64::from(px[1]) - 127.0).abs() <= 1.0);
    assert!((f64::from(px[2]) - 127.0).abs() <= 1.0);
    assert_eq!(px[3], 255);

    let clear = RasterLayer::transparent(unit(), 3, 3).unwrap();
    assert_eq!(composite(&white, &clear).unwrap(), white);
    let opaque = RasterLayer::filled(unit(), 3, 3, [1, 2, 3, 255]).unwrap();
    assert_eq!(composite(&white, &opaque).unwrap(), opaque);
    let other = RasterLayer::transparent(unit(), 4, 3).unwrap();
    assert_eq!(composite(&white, &other), Err(Error::LayerMismatch));
}

#[test]
fn composite_associative_over_opaque() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut layer = || {
        let px: Vec<u8> = (0..16 * 16)
            .flat_map(|_| {
                let on = rng.gen_bool(0.5);
                [rng.gen(), rng.gen(), rng.gen(), if on { 255 } else { 0 }]
            })
            .collect();
        RasterLayer::from_pixels(unit(), 16, 16, px).unwrap()
    };
    let (a, b, c) = (layer(), layer(), layer());
    let left = composite(&composite(&a, &b).unwrap(), &c).unwrap();
    let right = composite(&a, &composite(&b, &c).unwrap()).unwrap();
    assert_eq!(left, right);
}

#[test]
fn png_one_red_pixel() {
    let layer = RasterLayer::filled(unit(), 1, 1, RED).unwrap();
    let png = decode(&export_png(&layer).unwrap()).unwrap();
    assert_eq!((png.width, png.height), (1, 1));
    assert_eq!(png.rgba, RED.to_vec());
}

#[test]
fn png_500_header() {
    let layer = rasterize(&[rect(0.2, 0.2, 0.7, 0.9)], unit(), 500, 500, RED).unwrap();
    let bytes = export_png(&layer).unwrap();
    assert_eq!(u32::from_be_bytes(bytes[16..20].try_into().unwrap()), 500);
    assert_eq!(u32::from_be_bytes(bytes[20..24].try_into().unwrap()), 500);
    let png = decode(&bytes).unwrap();
    assert_eq!((png.width, png.height), (500, 500));
    assert_eq!(png.rgba, layer.pixels());
}

#[test]
fn png_random_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(64);
    let px: Vec<u8> = (0..64 * 64 * 4).map(|_| rng.gen()).collect();
    let layer = RasterLayer::from_pixels(unit(), 64, 64, px.clone()).unwrap();
    let png = decode(&export_png(&layer).unwrap()).unwrap();
    assert_eq!(png.rgba, px);
}

#[test]
fn tick_layers_disjoint_on_random_snapshots() {
    let extent = BBox {
        min_lon: -0.66,
        min_lat: 52.04,
        max_lon: -0.60,
        max_lat: 52.10,
    };
    let store = FeatureStore::new(building_corpus(3000, extent, 77)).unwrap();
    let mut config = FenceConfig::default();
    config.raster_px = 200;
    config.height_rule = false;
    let rules = ObstacleRuleSet::from(&config);
    let scheme = ColorScheme::default();
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let mut total_obstacle_px = 0;
    for _ in 0..20 {
        let p = GeoPoint::new(rng.gen_range(-0.65..-0.61), rng.gen_range(52.05..52.09)).unwrap();
        let uav = UavState::new(p, 30.0, rng.gen_range(0.0..360.0), 8.0).unwrap();
        let snap = evaluate_tick(&store, &rules, &config, &uav).unwrap();
        let layers = render_tick_layers(&snap, &store, &scheme, &config).unwrap();
        for (o, a) in layers
            .obstacles
            .pixels()
            .chunks_exact(4)
            .zip(layers.open_area.pixels().chunks_exact(4))
        {
            assert!(!(o[3] != 0 && a[3] != 0), "pixel painted in both layers");
        }
        assert_eq!(layers.obstacles.painted_count() > 0, !snap.obstacles_in_zone.is_empty());
        total_obstacle_px += layers.obstacles.count_color(scheme.obstacle);
        assert!(layers.uav.count_color(scheme.uav_marker) > 0);
        let comp = layers.composite(scheme.background).unwrap();
        assert_eq!(comp.painted_count(), 200 * 200);
    }
    assert!(total_obstacle_px > 0);
}

#[test]
fn no_obstacles_open_area_is_disc() {
    let store = FeatureStore::new(Vec::new()).unwrap();
    let config = FenceConfig::default();
    let uav = UavState::new(GeoPoint::new(-0.627, 52.073).unwrap(), 30.0, 0.0, 0.0).unwrap();
    let snap = evaluate_tick(&store, &ObstacleRuleSet::from(&config), &config, &uav).unwrap();
    let layers = render_tick_layers(&snap, &store, &ColorScheme::default(), &config).unwrap();
    assert_eq!(layers.obstacles.painted_count(), 0);
    let n = f64::from(config.raster_px).powi(2);
    let frac = layers.open_area.painted_count() as f64 / n;
    // 32-gon inscribed in the square's incircle
    let want = 0.5 * 32.0 * (std::f64::consts::TAU / 32.0).sin() / 4.0;
    assert!((frac - want).abs() < 0.005, "{frac} vs {want}");
}
