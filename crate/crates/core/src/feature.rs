use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{ring_centroid, BBox, GeoPoint, MultiPolygonShape, PolygonShape};

/// Map-object classes the fence rules can select on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Category {
    Building,
    Natural,
    Landuse,
    Roads,
    Waterways,
    Railways,
}

impl Category {
    pub const ALL: [Category; 6] = [
        Category::Building,
        Category::Natural,
        Category::Landuse,
        Category::Roads,
        Category::Waterways,
        Category::Railways,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Category::Building => "building",
            Category::Natural => "natural",
            Category::Landuse => "landuse",
            Category::Roads => "roads",
            Category::Waterways => "waterways",
            Category::Railways => "railways",
        }
    }

    /// Linear categories may be ingested from open ways.
    pub fn is_linear(self) -> bool {
        matches!(self, Category::Roads | Category::Waterways | Category::Railways)
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Category {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim().to_ascii_lowercase().as_str() {
            "building" | "buildings" => Category::Building,
            "natural" => Category::Natural,
            "landuse" => Category::Landuse,
            "roads" | "road" | "highway" => Category::Roads,
            "waterways" | "waterway" => Category::Waterways,
            "railways" | "railway" => Category::Railways,
            other => return Err(Error::InvalidInput(format!("unknown category `{other}`"))),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "data", rename_all = "snake_case")]
pub enum FeatureGeometry {
    Polygon(PolygonShape),
    MultiPolygon(MultiPolygonShape),
    Polyline(Vec<GeoPoint>),
}

impl FeatureGeometry {
    pub fn bbox(&self) -> BBox {
        let mut bb = BBox::empty();
        self.for_each_vertex(|p| bb.expand(p.lon(), p.lat()));
        bb
    }

    pub fn srid(&self) -> Option<i32> {
        match self {
            FeatureGeometry::Polygon(p) => Some(p.srid()),
            FeatureGeometry::MultiPolygon(m) => m.polygons.first().map(|p| p.srid()),
            FeatureGeometry::Polyline(line) => line.first().map(|p| p.srid()),
        }
    }

    pub fn for_each_vertex(&self, mut f: impl FnMut(&GeoPoint)) {
        match self {
            FeatureGeometry::Polygon(p) => p.rings().flat_map(|r| r.points()).for_each(&mut f),
            FeatureGeometry::MultiPolygon(m) => m
                .polygons
                .iter()
                .flat_map(|p| p.rings())
                .flat_map(|r| r.points())
                .for_each(&mut f),
            FeatureGeometry::Polyline(line) => line.iter().for_each(f),
        }
    }

    /// Polygons making up this geometry; empty for polylines.
    pub fn polygons(&self) -> &[PolygonShape] {
        match self {
            FeatureGeometry::Polygon(p) => std::slice::from_ref(p),
            FeatureGeometry::MultiPolygon(m) => &m.polygons,
            FeatureGeometry::Polyline(_) => &[],
        }
    }

    /// Area-weighted centroid of the outer rings, or the length-weighted
    /// midpoint of a polyline.
    pub fn centroid(&self) -> Result<GeoPoint> {
        match self {
            FeatureGeometry::Polygon(p) => ring_centroid(&p.outer),
            FeatureGeometry::MultiPolygon(m) => {
                let (mut w, mut lon, mut lat, mut srid) = (0.0, 0.0, 0.0, None);
                for p in &m.polygons {
                    let a = p.outer.area_signed_deg().abs();
                    if a == 0.0 {
                        continue;
                    }
                    let c = ring_centroid(&p.outer)?;
                    w += a;
                    lon += a * c.lon();
                    lat += a * c.lat();
                    srid = Some(c.srid());
                }
                match srid {
                    Some(srid) if w > 0.0 => GeoPoint::with_srid(lon / w, lat / w, srid),
                    _ => Err(Error::DegenerateGeometry("multipolygon has zero area".into())),
                }
            }
            FeatureGeometry::Polyline(line) => {
                let (mut total, mut lon, mut lat) = (0.0, 0.0, 0.0);
                for w in line.windows(2) {
                    let len = w[0].degree_distance(&w[1]);
                    total += len;
                    lon += len * 0.5 * (w[0].lon() + w[1].lon());
                    lat += len * 0.5 * (w[0].lat() + w[1].lat());
                }
                if total == 0.0 {
                    return Err(Error::DegenerateGeometry("polyline has zero length".into()));
                }
                GeoPoint::with_srid(lon / total, lat / total, line[0].srid())
            }
        }
    }
}

impl From<PolygonShape> for FeatureGeometry {
    fn from(p: PolygonShape) -> Self {
        FeatureGeometry::Polygon(p)
    }
}

impl From<MultiPolygonShape> for FeatureGeometry {
    fn from(m: MultiPolygonShape) -> Self {
        FeatureGeometry::MultiPolygon(m)
    }
}

/// One map object with its attributes and geometry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapFeature {
    pub osm_id: i64,
    pub category: Category,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    /// Value of the tag that decided the category, e.g. `hospital` for
    /// `building=hospital`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ftype: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub height_m: Option<f64>,
    #[serde(default)]
    pub tags: BTreeMap<String, String>,
    pub geometry: FeatureGeometry,
}

impl MapFeature {
    pub fn new(osm_id: i64, category: Category, geometry: impl Into<FeatureGeometry>) -> Self {
        MapFeature {
            osm_id,
            category,
            name: None,
            ftype: None,
            height_m: None,
            tags: BTreeMap::new(),
            geometry: geometry.into(),
        }
    }

    /// True when `key=value` matches. The pseudo-key `type` matches the
    /// category tag's value as well as a literal `type` tag.
    pub fn matches_tag(&self, key: &str, value: &str) -> bool {
        if key == "type" && self.ftype.as_deref() == Some(value) {
            return true;
        }
        self.tags.get(key).is_some_and(|v| v == value)
    }
}
