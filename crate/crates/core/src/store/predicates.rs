//! Geometric predicates the fence pipeline evaluates against map features:
//! buffer construction, containment, distance and bearing.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::crs::LocalProjection;
use crate::error::{Error, Result};
use crate::feature::FeatureGeometry;
use crate::geometry::{normalize_heading, ring_area_signed, BBox, GeoPoint, LocalXY, PolygonShape, Ring};

/// Segments per quarter circle used for the fence buffer.
pub const BUFFER_QUAD_SEGS: u32 = 8;

/// Circle around the UAV, built in degree space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BufferZone {
    pub center: GeoPoint,
    pub radius_deg: f64,
    pub ring: Ring,
}

impl BufferZone {
    /// Bounding box of the exact disc.
    pub fn bbox(&self) -> BBox {
        BBox {
            min_lon: self.center.lon() - self.radius_deg,
            min_lat: self.center.lat() - self.radius_deg,
            max_lon: self.center.lon() + self.radius_deg,
            max_lat: self.center.lat() + self.radius_deg,
        }
    }

    pub fn polygon(&self) -> PolygonShape {
        PolygonShape::simple(self.ring.clone())
    }
}

/// Counterclockwise polygonal circle with `4 × segments_per_quadrant`
/// vertices, first vertex due east of the center.
pub fn build_buffer(center: GeoPoint, radius_deg: f64, segments_per_quadrant: u32) -> Result<BufferZone> {
    if !radius_deg.is_finite() || radius_deg <= 0.0 {
        return Err(Error::InvalidInput(format!("buffer radius {radius_deg} must be > 0")));
    }
    if segments_per_quadrant == 0 {
        return Err(Error::InvalidInput("segments_per_quadrant must be >= 1".into()));
    }
    let n = 4 * segments_per_quadrant;
    let mut pts = Vec::with_capacity(n as usize + 1);
    for k in 0..n {
        let theta = 2.0 * PI * f64::from(k) / f64::from(n);
        let lon = center.lon() + radius_deg * theta.cos();
        let lat = center.lat() + radius_deg * theta.sin();
        pts.push(GeoPoint::with_srid(lon, lat, center.srid())?);
    }
    pts.push(pts[0]);
    Ok(BufferZone {
        center,
        radius_deg,
        ring: Ring::new(pts)?,
    })
}

/// Planar area of the projected buffer ring and the radius of the circle
/// with the same area.
pub fn buffer_metrics(zone: &BufferZone, proj: &LocalProjection) -> Result<(f64, f64)> {
    if zone.center.lat().abs() >= 89.0 {
        return Err(Error::ProjectionUndefined { lat: zone.center.lat() });
    }
    let local: Vec<LocalXY> = zone
        .ring
        .points()
        .iter()
        .map(|p| proj.to_local(p))
        .collect::<Result<_>>()?;
    let area_m2 = ring_area_signed(&local)?.abs();
    Ok(((area_m2 / PI).sqrt(), area_m2))
}

fn check_srid(geom: &FeatureGeometry, srid: i32) -> Result<()> {
    match geom.srid() {
        Some(found) if found != srid => Err(Error::SridMismatch { expected: srid, found }),
        _ => Ok(()),
    }
}

/// Whole-geometry containment in the buffer disc. A polygon lies inside a
/// convex disc exactly when all of its vertices do.
pub fn within_buffer(geom: &FeatureGeometry, zone: &BufferZone) -> Result<bool> {
    check_srid(geom, zone.center.srid())?;
    let (cx, cy, r2) = (zone.center.lon(), zone.center.lat(), zone.radius_deg * zone.radius_deg);
    let mut inside = true;
    let mut any = false;
    geom.for_each_vertex(|p| {
        any = true;
        let (dx, dy) = (p.lon() - cx, p.lat() - cy);
        if dx * dx + dy * dy > r2 {
            inside = false;
        }
    });
    Ok(any && inside)
}

/// Even-odd test over all rings; points on an edge count as inside.
pub fn point_in_polygon(p: &GeoPoint, poly: &PolygonShape) -> bool {
    let (x, y) = (p.lon(), p.lat());
    let mut inside = false;
    for ring in poly.rings() {
        for w in ring.points().windows(2) {
            let (x0, y0, x1, y1) = (w[0].lon(), w[0].lat(), w[1].lon(), w[1].lat());
            if on_segment(x, y, x0, y0, x1, y1) {
                return true;
            }
            if (y0 > y) != (y1 > y) {
                let x_cross = x0 + (y - y0) * (x1 - x0) / (y1 - y0);
                if x < x_cross {
                    inside = !inside;
                }
            }
        }
    }
    inside
}

fn on_segment(x: f64, y: f64, x0: f64, y0: f64, x1: f64, y1: f64) -> bool {
    if x < x0.min(x1) || x > x0.max(x1) || y < y0.min(y1) || y > y0.max(y1) {
        return false;
    }
    let cross = (x1 - x0) * (y - y0) - (y1 - y0) * (x - x0);
    let scale = (x1 - x0).abs().max((y1 - y0).abs());
    cross.abs() <= 1e-12 * scale.max(f64::MIN_POSITIVE)
}

/// Even-odd containment in local coordinates, used by distance queries.
fn local_point_in_rings(p: LocalXY, rings: &[Vec<LocalXY>]) -> bool {
    let mut inside = false;
    for ring in rings {
        for w in ring.windows(2) {
            let (a, b) = (w[0], w[1]);
            if (a.y_m > p.y_m) != (b.y_m > p.y_m) {
                let x_cross = a.x_m + (p.y_m - a.y_m) * (b.x_m - a.x_m) / (b.y_m - a.y_m);
                if p.x_m < x_cross {
                    inside = !inside;
                }
            }
        }
    }
    inside
}

/// Distance from `p` to segment `ab` in the plane.
pub fn point_segment_distance(p: LocalXY, a: LocalXY, b: LocalXY) -> f64 {
    let (dx, dy) = (b.x_m - a.x_m, b.y_m - a.y_m);
    let len2 = dx * dx + dy * dy;
    let t = if len2 == 0.0 {
        0.0
    } else {
        (((p.x_m - a.x_m) * dx + (p.y_m - a.y_m) * dy) / len2).clamp(0.0, 1.0)
    };
    let (cx, cy) = (a.x_m + t * dx, a.y_m + t * dy);
    (p.x_m - cx).hypot(p.y_m - cy)
}

/// Shortest ground distance in meters from `from` to the geometry; zero
/// when the point is inside a polygon.
pub fn distance_to_feature(from: &GeoPoint, geom: &FeatureGeometry, proj: &LocalProjection) -> Result<f64> {
    check_srid(geom, from.srid())?;
    let p = proj.to_local(from)?;
    let project =
        |ring: &[GeoPoint]| -> Vec<LocalXY> { ring.iter().map(|q| proj.project_unchecked(q.lon(), q.lat())).collect() };
    let mut best = f64::INFINITY;
    match geom {
        FeatureGeometry::Polyline(line) => {
            let local = project(line);
            for w in local.windows(2) {
                best = best.min(point_segment_distance(p, w[0], w[1]));
            }
            if local.len() == 1 {
                best = (p.x_m - local[0].x_m).hypot(p.y_m - local[0].y_m);
            }
        }
        _ => {
            for poly in geom.polygons() {
                let rings: Vec<Vec<LocalXY>> = poly.rings().map(|r| project(r.points())).collect();
                if ring_area_signed(&rings[0])? == 0.0 {
                    return Err(Error::DegenerateGeometry("polygon has zero area".into()));
                }
                if local_point_in_rings(p, &rings) {
                    return Ok(0.0);
                }
                for ring in &rings {
                    for w in ring.windows(2) {
                        best = best.min(point_segment_distance(p, w[0], w[1]));
                    }
                }
            }
        }
    }
    if best.is_finite() {
        Ok(best)
    } else {
        Err(Error::DegenerateGeometry("geometry has no edges".into()))
    }
}

/// Compass bearing from `from` to `to` on the local plane: 0 = north,
/// 90 = east.
pub fn bearing_to(from: &GeoPoint, to: &GeoPoint, proj: &LocalProjection) -> Result<f64> {
    let a = proj.to_local(from)?;
    let b = proj.to_local(to)?;
    let (dx, dy) = (b.x_m - a.x_m, b.y_m - a.y_m);
    if dx == 0.0 && dy == 0.0 {
        return Err(Error::UndefinedBearing);
    }
    normalize_heading(dx.atan2(dy).to_degrees())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(lon: f64, lat: f64) -> GeoPoint {
        GeoPoint::new(lon, lat).unwrap()
    }

    fn square(x: f64, y: f64, s: f64) -> PolygonShape {
        let pts = [(x, y), (x + s, y), (x + s, y + s), (x, y + s)]
            .iter()
            .map(|&(a, b)| pt(a, b))
            .collect();
        PolygonShape::simple(Ring::closing(pts).unwrap())
    }

    #[test]
    fn buffer_vertex_counts() {
        let c = pt(-0.627, 52.073);
        assert_eq!(build_buffer(c, 0.00001, 2).unwrap().ring.points().len(), 9);
        let z = build_buffer(c, 0.012, 8).unwrap();
        assert_eq!(z.ring.points().len(), 33);
        for p in z.ring.points() {
            assert!((p.degree_distance(&c) - 0.012).abs() <= 1e-12);
        }
        assert!(z.ring.area_signed_deg() > 0.0, "counterclockwise");
        assert!(build_buffer(c, 0.0, 8).is_err());
        assert!(build_buffer(c, -1.0, 8).is_err());
        assert!(build_buffer(c, 1.0, 0).is_err());
    }

    #[test]
    fn buffer_area_near_circle() {
        let z = build_buffer(pt(0.0, 0.0), 0.012, 8).unwrap();
        let circle = PI * 0.012 * 0.012;
        assert!((z.ring.area_signed_deg() - circle).abs() / circle < 0.01);
    }

    #[test]
    fn metrics_at_equator() {
        let c = pt(0.0, 0.0);
        let z = build_buffer(c, 0.012, 8).unwrap();
        let proj = LocalProjection::standard(c).unwrap();
        let (r, a) = buffer_metrics(&z, &proj).unwrap();
        assert!((r - 0.012 * 111_320.0).abs() / (0.012 * 111_320.0) < 0.01);
        assert_eq!((a / PI).sqrt(), r);
    }

    #[test]
    fn within_examples() {
        let c = pt(10.0, 50.0);
        let z = build_buffer(c, 0.01, 8).unwrap();
        let tiny = FeatureGeometry::from(square(9.9999, 49.9999, 0.0002));
        let far = FeatureGeometry::from(square(10.5, 50.5, 0.001));
        let straddle = FeatureGeometry::from(square(10.005, 50.0, 0.01));
        assert!(within_buffer(&tiny, &z).unwrap());
        assert!(!within_buffer(&far, &z).unwrap());
        assert!(!within_buffer(&straddle, &z).unwrap());
        let other = build_buffer(GeoPoint::with_srid(10.0, 50.0, 3857).unwrap(), 0.01, 8).unwrap();
        assert!(matches!(within_buffer(&tiny, &other), Err(Error::SridMismatch { .. })));
    }

    #[test]
    fn pip_examples() {
        let sq = square(0.0, 0.0, 1.0);
        assert!(point_in_polygon(&pt(0.5, 0.5), &sq));
        assert!(!point_in_polygon(&pt(2.0, 2.0), &sq));
        assert!(point_in_polygon(&pt(1.0, 0.5), &sq), "edge");
        assert!(point_in_polygon(&pt(0.0, 0.0), &sq), "vertex");
    }

    #[test]
    fn pip_respects_holes() {
        let outer = square(0.0, 0.0, 10.0).outer;
        let hole = square(4.0, 4.0, 2.0).outer;
        let poly = PolygonShape::new(outer, vec![hole]).unwrap();
        assert!(!point_in_polygon(&pt(5.0, 5.0), &poly));
        assert!(point_in_polygon(&pt(1.0, 5.0), &poly));
    }

    #[test]
    fn distance_examples() {
        // meters == degrees when meters_per_degree is scaled out; use a tiny
        // square near the equator and compare in projected meters instead.
        let origin = pt(0.0, 0.0);
        let proj = LocalProjection::standard(origin).unwrap();
        let deg = 1.0 / 111_320.0;
        let sq = FeatureGeometry::from(square(0.0, 0.0, deg));
        let inside = pt(0.5 * deg, 0.5 * deg);
        assert_eq!(distance_to_feature(&inside, &sq, &proj).unwrap(), 0.0);
        let right = pt(2.0 * deg, 0.5 * deg);
        assert!((distance_to_feature(&right, &sq, &proj).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn polyline_distance() {
        let proj = LocalProjection::standard(pt(0.0, 0.0)).unwrap();
        let deg = 1.0 / 111_320.0;
        let line = FeatureGeometry::Polyline(vec![pt(0.0, 0.0), pt(10.0 * deg, 0.0)]);
        let d = distance_to_feature(&pt(5.0 * deg, 3.0 * deg), &line, &proj).unwrap();
        assert!((d - 3.0).abs() < 1e-9);
    }

    #[test]
    fn bearing_examples() {
        let o = pt(-0.627, 52.073);
        let proj = LocalProjection::standard(o).unwrap();
        assert_eq!(bearing_to(&o, &pt(-0.627, 52.08), &proj).unwrap(), 0.0);
        assert!((bearing_to(&o, &pt(-0.62, 52.073), &proj).unwrap() - 90.0).abs() < 1e-12);
        assert!((bearing_to(&o, &pt(-0.627, 52.07), &proj).unwrap() - 180.0).abs() < 1e-12);
        assert!((bearing_to(&o, &pt(-0.63, 52.073), &proj).unwrap() - 270.0).abs() < 1e-12);
        assert_eq!(bearing_to(&o, &o, &proj), Err(Error::UndefinedBearing));
    }
}
