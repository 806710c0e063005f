//! WGS84 geometry primitives and UAV kinematic state.
//!
//! Every type here is an immutable value. Constructors validate the
//! invariants, so a `Ring` in hand is always closed and a `GeoPoint` is
//! always within the lon/lat domain.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// WGS84 geographic 2D.
pub const SRID_WGS84: i32 = 4326;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPoint")]
pub struct GeoPoint {
    lon: f64,
    lat: f64,
    srid: i32,
}

#[derive(Deserialize)]
struct RawPoint {
    lon: f64,
    lat: f64,
    #[serde(default = "default_srid")]
    srid: i32,
}

fn default_srid() -> i32 {
    SRID_WGS84
}

impl TryFrom<RawPoint> for GeoPoint {
    type Error = Error;

    fn try_from(raw: RawPoint) -> Result<Self> {
        GeoPoint::with_srid(raw.lon, raw.lat, raw.srid)
    }
}

impl GeoPoint {
    pub fn new(lon: f64, lat: f64) -> Result<Self> {
        Self::with_srid(lon, lat, SRID_WGS84)
    }

    pub fn with_srid(lon: f64, lat: f64, srid: i32) -> Result<Self> {
        if !lon.is_finite() || !(-180.0..=180.0).contains(&lon) {
            return Err(Error::InvalidInput(format!("longitude {lon} outside [-180, 180]")));
        }
        if !lat.is_finite() || !(-90.0..=90.0).contains(&lat) {
            return Err(Error::InvalidInput(format!("latitude {lat} outside [-90, 90]")));
        }
        Ok(GeoPoint { lon, lat, srid })
    }

    pub fn lon(&self) -> f64 {
        self.lon
    }

    pub fn lat(&self) -> f64 {
        self.lat
    }

    pub fn srid(&self) -> i32 {
        self.srid
    }

    /// Planar distance in degree space, the metric PostGIS uses for
    /// geometry-typed SRID 4326 data.
    pub fn degree_distance(&self, other: &GeoPoint) -> f64 {
        (self.lon - other.lon).hypot(self.lat - other.lat)
    }
}

/// Axis-aligned lon/lat box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BBox {
    pub min_lon: f64,
    pub min_lat: f64,
    pub max_lon: f64,
    pub max_lat: f64,
}

impl BBox {
    pub fn empty() -> Self {
        BBox {
            min_lon: f64::INFINITY,
            min_lat: f64::INFINITY,
            max_lon: f64::NEG_INFINITY,
            max_lat: f64::NEG_INFINITY,
        }
    }

    pub fn of_points<'a>(points: impl IntoIterator<Item = &'a GeoPoint>) -> Self {
        let mut bb = BBox::empty();
        for p in points {
            bb.expand(p.lon, p.lat);
        }
        bb
    }

    pub fn expand(&mut self, lon: f64, lat: f64) {
        self.min_lon = self.min_lon.min(lon);
        self.min_lat = self.min_lat.min(lat);
        self.max_lon = self.max_lon.max(lon);
        self.max_lat = self.max_lat.max(lat);
    }

    pub fn union(&self, other: &BBox) -> BBox {
        BBox {
            min_lon: self.min_lon.min(other.min_lon),
            min_lat: self.min_lat.min(other.min_lat),
            max_lon: self.max_lon.max(other.max_lon),
            max_lat: self.max_lat.max(other.max_lat),
        }
    }

    pub fn intersects(&self, other: &BBox) -> bool {
        self.min_lon <= other.max_lon
            && other.min_lon <= self.max_lon
            && self.min_lat <= other.max_lat
            && other.min_lat <= self.max_lat
    }

    pub fn is_empty(&self) -> bool {
        self.min_lon > self.max_lon || self.min_lat > self.max_lat
    }

    pub fn center(&self) -> (f64, f64) {
        (0.5 * (self.min_lon + self.max_lon), 0.5 * (self.min_lat + self.max_lat))
    }
}

/// Closed sequence of points: first equals last, at least three distinct
/// vertices, one srid throughout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<GeoPoint>", into = "Vec<GeoPoint>")]
pub struct Ring {
    points: Vec<GeoPoint>,
}

impl TryFrom<Vec<GeoPoint>> for Ring {
    type Error = Error;

    fn try_from(points: Vec<GeoPoint>) -> Result<Self> {
        Ring::new(points)
    }
}

impl From<Ring> for Vec<GeoPoint> {
    fn from(ring: Ring) -> Self {
        ring.points
    }
}

impl Ring {
    pub fn new(points: Vec<GeoPoint>) -> Result<Self> {
        if points.len() < 4 {
            return Err(Error::InvalidGeometry(format!(
                "ring needs at least 4 stored points, got {}",
                points.len()
            )));
        }
        let first = points[0];
        let last = points[points.len() - 1];
        if first.lon != last.lon || first.lat != last.lat {
            return Err(Error::InvalidGeometry("ring is not closed".into()));
        }
        if let Some(p) = points.iter().find(|p| p.srid != first.srid) {
            return Err(Error::SridMismatch {
                expected: first.srid,
                found: p.srid,
            });
        }
        if distinct_vertices(&points[..points.len() - 1]) < 3 {
            return Err(Error::DegenerateGeometry(
                "ring has fewer than 3 distinct vertices".into(),
            ));
        }
        Ok(Ring { points })
    }

    /// Closes `points` if the last point does not repeat the first.
    pub fn closing(mut points: Vec<GeoPoint>) -> Result<Self> {
        if let (Some(first), Some(last)) = (points.first().copied(), points.last()) {
            if first.lon != last.lon || first.lat != last.lat {
                points.push(first);
            }
        }
        Ring::new(points)
    }

    pub fn points(&self) -> &[GeoPoint] {
        &self.points
    }

    pub fn srid(&self) -> i32 {
        self.points[0].srid
    }

    pub fn bbox(&self) -> BBox {
        BBox::of_points(&self.points)
    }

    /// Signed shoelace area in square degrees.
    pub fn area_signed_deg(&self) -> f64 {
        let origin = self.points[0];
        let mut twice = 0.0;
        for w in self.points.windows(2) {
            let (x0, y0) = (w[0].lon - origin.lon, w[0].lat - origin.lat);
            let (x1, y1) = (w[1].lon - origin.lon, w[1].lat - origin.lat);
            twice += x0 * y1 - x1 * y0;
        }
        0.5 * twice
    }
}

fn distinct_vertices(points: &[GeoPoint]) -> usize {
    let mut seen: Vec<(u64, u64)> = points.iter().map(|p| (p.lon.to_bits(), p.lat.to_bits())).collect();
    seen.sort_unstable();
    seen.dedup();
    seen.len()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolygonShape {
    pub outer: Ring,
    #[serde(default)]
    pub holes: Vec<Ring>,
}

impl PolygonShape {
    pub fn new(outer: Ring, holes: Vec<Ring>) -> Result<Self> {
        if let Some(h) = holes.iter().find(|h| h.srid() != outer.srid()) {
            return Err(Error::SridMismatch {
                expected: outer.srid(),
                found: h.srid(),
            });
        }
        Ok(PolygonShape { outer, holes })
    }

    pub fn simple(outer: Ring) -> Self {
        PolygonShape {
            outer,
            holes: Vec::new(),
        }
    }

    pub fn srid(&self) -> i32 {
        self.outer.srid()
    }

    pub fn rings(&self) -> impl Iterator<Item = &Ring> {
        std::iter::once(&self.outer).chain(self.holes.iter())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiPolygonShape {
    pub polygons: Vec<PolygonShape>,
}

impl MultiPolygonShape {
    pub fn new(polygons: Vec<PolygonShape>) -> Result<Self> {
        if let Some(first) = polygons.first() {
            if let Some(p) = polygons.iter().find(|p| p.srid() != first.srid()) {
                return Err(Error::SridMismatch {
                    expected: first.srid(),
                    found: p.srid(),
                });
            }
        }
        Ok(MultiPolygonShape { polygons })
    }

    pub fn is_empty(&self) -> bool {
        self.polygons.is_empty()
    }
}

/// Position in meters on a local tangent plane. Only meaningful relative to
/// the projection origin that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LocalXY {
    pub x_m: f64,
    pub y_m: f64,
}

impl LocalXY {
    pub const fn new(x_m: f64, y_m: f64) -> Self {
        LocalXY { x_m, y_m }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UavState {
    pub position: GeoPoint,
    pub height_m: f64,
    pub heading_deg: f64,
    pub velocity_ms: f64,
    /// Unix epoch milliseconds.
    pub last_update: u64,
}

impl UavState {
    /// Builds a state, normalizing the heading and stamping the current time.
    pub fn new(position: GeoPoint, height_m: f64, heading_deg: f64, velocity_ms: f64) -> Result<Self> {
        if !height_m.is_finite() {
            return Err(Error::InvalidInput("height must be finite".into()));
        }
        if !velocity_ms.is_finite() || velocity_ms < 0.0 {
            return Err(Error::InvalidInput(format!(
                "velocity {velocity_ms} must be finite and non-negative"
            )));
        }
        Ok(UavState {
            position,
            height_m,
            heading_deg: normalize_heading(heading_deg)?,
            velocity_ms,
            last_update: now_millis(),
        })
    }
}

pub(crate) fn now_millis() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0)
}

/// Wraps a heading into `[0, 360)`.
pub fn normalize_heading(raw_deg: f64) -> Result<f64> {
    if !raw_deg.is_finite() {
        return Err(Error::InvalidInput(format!("heading {raw_deg} is not finite")));
    }
    let h = raw_deg.rem_euclid(360.0);
    // rem_euclid can round up to exactly 360 for tiny negative inputs
    Ok(if h >= 360.0 { 0.0 } else { h })
}

/// Shoelace signed area of a closed ring already in local meters.
/// Counterclockwise rings are positive.
pub fn ring_area_signed(points: &[LocalXY]) -> Result<f64> {
    if points.len() < 4 {
        return Err(Error::InvalidGeometry(format!(
            "ring needs at least 4 stored points, got {}",
            points.len()
        )));
    }
    if points[0] != points[points.len() - 1] {
        return Err(Error::InvalidGeometry("ring is not closed".into()));
    }
    let mut twice = 0.0;
    for w in points.windows(2) {
        twice += w[0].x_m * w[1].y_m - w[1].x_m * w[0].y_m;
    }
    Ok(0.5 * twice)
}

/// Area-weighted centroid of the outer ring, computed in degree space.
pub fn polygon_centroid(poly: &PolygonShape) -> Result<GeoPoint> {
    ring_centroid(&poly.outer)
}

pub(crate) fn ring_centroid(ring: &Ring) -> Result<GeoPoint> {
    let pts = ring.points();
    let origin = pts[0];
    let (mut twice_area, mut cx, mut cy) = (0.0, 0.0, 0.0);
    for w in pts.windows(2) {
        let (x0, y0) = (w[0].lon - origin.lon, w[0].lat - origin.lat);
        let (x1, y1) = (w[1].lon - origin.lon, w[1].lat - origin.lat);
        let cross = x0 * y1 - x1 * y0;
        twice_area += cross;
        cx += (x0 + x1) * cross;
        cy += (y0 + y1) * cross;
    }
    let scale = pts
        .iter()
        .map(|p| (p.lon - origin.lon).abs().max((p.lat - origin.lat).abs()))
        .fold(0.0, f64::max);
    if scale == 0.0 || twice_area.abs() <= 1e-12 * scale * scale {
        return Err(Error::DegenerateGeometry("ring has zero area".into()));
    }
    let lon = origin.lon + cx / (3.0 * twice_area);
    let lat = origin.lat + cy / (3.0 * twice_area);
    GeoPoint::with_srid(lon, lat, ring.srid())
}
