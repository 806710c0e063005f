//! Reference implementations the engine is checked against. Each oracle
//! takes a different route to the answer than the production code: winding
//! numbers instead of ray crossings, dense sampling instead of closed-form
//! segment distance, a from-scratch PNG reader instead of the encoder's own
//! decoder.

pub mod png;

use geofence_core::crs::STANDARD_METERS_PER_DEGREE;
use geofence_core::feature::FeatureGeometry;
use geofence_core::geometry::{GeoPoint, PolygonShape};
use rand::Rng;

pub type Pt = (f64, f64);

fn ring_xy(points: &[GeoPoint]) -> Vec<Pt> {
    points.iter().map(|p| (p.lon(), p.lat())).collect()
}

fn is_left(a: Pt, b: Pt, p: Pt) -> f64 {
    (b.0 - a.0) * (p.1 - a.1) - (p.0 - a.0) * (b.1 - a.1)
}

/// Winding number of a closed ring around `p`.
pub fn winding_number(p: Pt, ring: &[Pt]) -> i32 {
    let mut wn = 0;
    for w in ring.windows(2) {
        let (a, b) = (w[0], w[1]);
        if a.1 <= p.1 {
            if b.1 > p.1 && is_left(a, b, p) > 0.0 {
                wn += 1;
            }
        } else if b.1 <= p.1 && is_left(a, b, p) < 0.0 {
            wn -= 1;
        }
    }
    wn
}

/// Inside the outer ring and outside every hole, by winding number. Valid
/// for simple rings, whatever their orientation.
pub fn winding_contains(poly: &PolygonShape, p: Pt) -> bool {
    winding_number(p, &ring_xy(poly.outer.points())) != 0
        && poly.holes.iter().all(|h| winding_number(p, &ring_xy(h.points())) == 0)
}

/// Equirectangular plane around `origin`, written out long-hand.
pub fn to_meters(origin: Pt, p: Pt) -> Pt {
    let k = origin.1.to_radians().cos();
    (
        (p.0 - origin.0) * STANDARD_METERS_PER_DEGREE * k,
        (p.1 - origin.1) * STANDARD_METERS_PER_DEGREE,
    )
}

fn edges(geom: &FeatureGeometry) -> Vec<(Pt, Pt)> {
    let mut out = Vec::new();
    match geom {
        FeatureGeometry::Polyline(pts) => {
            let xy = ring_xy(pts);
            out.extend(xy.windows(2).map(|w| (w[0], w[1])));
        }
        _ => {
            for poly in geom.polygons() {
                for ring in poly.rings() {
                    let xy = ring_xy(ring.points());
                    out.extend(xy.windows(2).map(|w| (w[0], w[1])));
                }
            }
        }
    }
    out
}

fn sampled_min(p: Pt, origin: Pt, edges: &[(Pt, Pt)], spacing_m: f64) -> f64 {
    let pm = to_meters(origin, p);
    let mut best = f64::INFINITY;
    for &(a, b) in edges {
        let (am, bm) = (to_meters(origin, a), to_meters(origin, b));
        let len = (bm.0 - am.0).hypot(bm.1 - am.1);
        let n = ((len / spacing_m).ceil() as usize).clamp(1, 2_000_000);
        for i in 0..=n {
            let t = i as f64 / n as f64;
            let q = (am.0 + t * (bm.0 - am.0), am.1 + t * (bm.1 - am.1));
            best = best.min((q.0 - pm.0).hypot(q.1 - pm.1));
        }
    }
    best
}

/// Distance from `p` to the geometry by sampling its boundary: a coarse
/// pass to learn the scale, then a pass with spacing at 1% of that.
/// Zero when a polygon contains `p`.
pub fn sampled_distance(p: Pt, origin: Pt, geom: &FeatureGeometry) -> f64 {
    if geom.polygons().iter().any(|poly| winding_contains(poly, p)) {
        return 0.0;
    }
    let e = edges(geom);
    let coarse = sampled_min(p, origin, &e, 1.0);
    if coarse == 0.0 {
        return 0.0;
    }
    sampled_min(p, origin, &e, (coarse * 0.01).max(1e-6))
}

/// Containment of the geometry in a degree-space disc, checked on points
/// sampled along every edge and on random interior points.
pub fn sampled_within(geom: &FeatureGeometry, center: Pt, radius_deg: f64, rng: &mut impl Rng) -> bool {
    let inside = |q: Pt| (q.0 - center.0).hypot(q.1 - center.1) <= radius_deg;
    for (a, b) in edges(geom) {
        for i in 0..=64 {
            let t = f64::from(i) / 64.0;
            if !inside((a.0 + t * (b.0 - a.0), a.1 + t * (b.1 - a.1))) {
                return false;
            }
        }
    }
    let bb = geom.bbox();
    for poly in geom.polygons() {
        for _ in 0..64 {
            let q = (
                rng.gen_range(bb.min_lon..=bb.max_lon),
                rng.gen_range(bb.min_lat..=bb.max_lat),
            );
            if winding_contains(poly, q) && !inside(q) {
                return false;
            }
        }
    }
    true
}

/// Monte-Carlo area in square meters of a polygon, on the plane centred at
/// `origin`.
pub fn monte_carlo_area_m2(poly: &PolygonShape, origin: Pt, samples: usize, rng: &mut impl Rng) -> f64 {
    let bb = poly.outer.bbox();
    let mut hits = 0usize;
    for _ in 0..samples {
        let q = (
            rng.gen_range(bb.min_lon..bb.max_lon),
            rng.gen_range(bb.min_lat..bb.max_lat),
        );
        if winding_contains(poly, q) {
            hits += 1;
        }
    }
    let lo = to_meters(origin, (bb.min_lon, bb.min_lat));
    let hi = to_meters(origin, (bb.max_lon, bb.max_lat));
    (hi.0 - lo.0) * (hi.1 - lo.1) * hits as f64 / samples as f64
}

/// Area-weighted centroid by fanning triangles from the first vertex.
pub fn triangle_fan_centroid(ring: &[Pt]) -> Pt {
    let o = ring[0];
    let (mut sx, mut sy, mut sa) = (0.0, 0.0, 0.0);
    for w in ring[1..].windows(2) {
        let (b, c) = (w[0], w[1]);
        let a = 0.5 * ((b.0 - o.0) * (c.1 - o.1) - (c.0 - o.0) * (b.1 - o.1));
        sx += a * (o.0 + b.0 + c.0) / 3.0;
        sy += a * (o.1 + b.1 + c.1) / 3.0;
        sa += a;
    }
    (sx / sa, sy / sa)
}

/// Random star-shaped ring around `center`: `n` evenly spaced angles,
/// each jittered by up to half a step, with radii in `[r_min, r_max]`.
/// Always simple; consecutive vertices are less than 1.5 steps apart.
pub fn star_ring(center: Pt, r_min: f64, r_max: f64, n: usize, rng: &mut impl Rng) -> Vec<Pt> {
    let step = std::f64::consts::TAU / n as f64;
    let mut ring: Vec<Pt> = (0..n)
        .map(|k| {
            let t = k as f64 * step + rng.gen_range(0.0..0.5 * step);
            let r = rng.gen_range(r_min..=r_max);
            (center.0 + r * t.cos(), center.1 + r * t.sin())
        })
        .collect();
    ring.push(ring[0]);
    ring
}
