//! Coordinate reference machinery: unit conversion, the local tangent-plane
//! projection used for all meter-valued distances, the seven-parameter
//! Helmert datum transform and geoid height.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{GeoPoint, LocalXY};

/// Meters per degree of latitude (and of longitude at the equator) on the
/// mean-radius sphere.
pub const STANDARD_METERS_PER_DEGREE: f64 = 111_320.0;
/// Rounded figure of 100 km per degree, used by `ProjectionMode::Rounded`.
pub const TABLE_METERS_PER_DEGREE: f64 = 100_000.0;

const METERS_PER_NAUTICAL_MILE: f64 = 1852.0;

/// Degrees, arc-minutes and arc-seconds to decimal degrees. The sign of
/// `deg` applies to the whole angle.
pub fn sexagesimal_to_decimal(deg: i32, min: i32, sec: f64) -> Result<f64> {
    if !(0..60).contains(&min) {
        return Err(Error::InvalidInput(format!("minutes {min} outside [0, 60)")));
    }
    if !sec.is_finite() || !(0.0..60.0).contains(&sec) {
        return Err(Error::InvalidInput(format!("seconds {sec} outside [0, 60)")));
    }
    let magnitude = f64::from(deg.unsigned_abs()) + f64::from(min) / 60.0 + sec / 3600.0;
    Ok(if deg < 0 { -magnitude } else { magnitude })
}

pub fn knots_to_ms(v_kn: f64) -> Result<f64> {
    if !v_kn.is_finite() || v_kn < 0.0 {
        return Err(Error::InvalidInput(format!("speed {v_kn} kn must be non-negative")));
    }
    Ok(v_kn * METERS_PER_NAUTICAL_MILE / 3600.0)
}

/// Source of the geoid-ellipsoid separation N at a location.
pub trait GeoidModel {
    fn separation(&self, at: &GeoPoint) -> Result<f64>;
}

/// Largest plausible |N| anywhere on Earth.
pub const MAX_GEOID_SEPARATION_M: f64 = 120.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstantGeoid {
    pub separation_m: f64,
}

impl GeoidModel for ConstantGeoid {
    fn separation(&self, _at: &GeoPoint) -> Result<f64> {
        let n = self.separation_m;
        if !n.is_finite() || n.abs() > MAX_GEOID_SEPARATION_M {
            return Err(Error::ModelUnavailable(format!(
                "separation {n} m outside ±{MAX_GEOID_SEPARATION_M} m"
            )));
        }
        Ok(n)
    }
}

/// H = h + N.
pub fn geoid_height(h_ellipsoid_m: f64, model: &dyn GeoidModel, at: &GeoPoint) -> Result<f64> {
    if !h_ellipsoid_m.is_finite() {
        return Err(Error::InvalidInput("ellipsoidal height must be finite".into()));
    }
    Ok(h_ellipsoid_m + model.separation(at)?)
}

/// Seven-parameter Helmert transform. Rotations are small angles in
/// radians; `s_ppm` is the scale factor minus one, in parts per million.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct HelmertParams {
    pub tx_m: f64,
    pub ty_m: f64,
    pub tz_m: f64,
    pub rx_rad: f64,
    pub ry_rad: f64,
    pub rz_rad: f64,
    pub s_ppm: f64,
}

impl HelmertParams {
    pub fn new(t: [f64; 3], r: [f64; 3], s_ppm: f64) -> Result<Self> {
        let p = HelmertParams {
            tx_m: t[0],
            ty_m: t[1],
            tz_m: t[2],
            rx_rad: r[0],
            ry_rad: r[1],
            rz_rad: r[2],
            s_ppm,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn identity() -> Self {
        Self::default()
    }

    pub fn validate(&self) -> Result<()> {
        let all = [
            self.tx_m,
            self.ty_m,
            self.tz_m,
            self.rx_rad,
            self.ry_rad,
            self.rz_rad,
            self.s_ppm,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("helmert parameters must be finite".into()));
        }
        if self.s_ppm.abs() >= 1000.0 {
            return Err(Error::InvalidInput(format!(
                "helmert scale {} ppm exceeds ±1000",
                self.s_ppm
            )));
        }
        Ok(())
    }

    /// The 3×3 linear part:
    ///
    /// ```text
    /// | 1+s  -rz   ry |
    /// |  rz  1+s  -rx |
    /// | -ry   rx  1+s |
    /// ```
    pub fn matrix(&self) -> [[f64; 3]; 3] {
        let d = 1.0 + self.s_ppm * 1e-6;
        [
            [d, -self.rz_rad, self.ry_rad],
            [self.rz_rad, d, -self.rx_rad],
            [-self.ry_rad, self.rx_rad, d],
        ]
    }
}

/// Maps a geocentric cartesian triple from datum A to datum B.
pub fn helmert_transform(p: [f64; 3], params: &HelmertParams) -> Result<[f64; 3]> {
    if p.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("cartesian input must be finite".into()));
    }
    let m = params.matrix();
    let t = [params.tx_m, params.ty_m, params.tz_m];
    let mut out = [0.0; 3];
    for (i, row) in m.iter().enumerate() {
        out[i] = t[i] + row[0] * p[0] + row[1] * p[1] + row[2] * p[2];
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProjectionMode {
    Standard,
    Rounded,
}

/// Equirectangular tangent plane around `origin`. Longitude is scaled by
/// the cosine of the origin latitude, so accuracy degrades with distance
/// from the origin; the fence engine keeps it within a few kilometres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalProjection {
    origin: GeoPoint,
    meters_per_degree: f64,
    mode: ProjectionMode,
    cos_lat: f64,
}

impl LocalProjection {
    pub fn new(origin: GeoPoint, mode: ProjectionMode) -> Result<Self> {
        if !(origin.lat() > -89.0 && origin.lat() < 89.0) {
            return Err(Error::ProjectionUndefined { lat: origin.lat() });
        }
        let meters_per_degree = match mode {
            ProjectionMode::Standard => STANDARD_METERS_PER_DEGREE,
            ProjectionMode::Rounded => TABLE_METERS_PER_DEGREE,
        };
        Ok(LocalProjection {
            origin,
            meters_per_degree,
            mode,
            cos_lat: origin.lat().to_radians().cos(),
        })
    }

    pub fn standard(origin: GeoPoint) -> Result<Self> {
        Self::new(origin, ProjectionMode::Standard)
    }

    pub fn rounded(origin: GeoPoint) -> Result<Self> {
        Self::new(origin, ProjectionMode::Rounded)
    }

    pub fn origin(&self) -> GeoPoint {
        self.origin
    }

    pub fn meters_per_degree(&self) -> f64 {
        self.meters_per_degree
    }

    pub fn mode(&self) -> ProjectionMode {
        self.mode
    }

    /// Meters per degree of longitude at the origin latitude.
    pub fn meters_per_degree_lon(&self) -> f64 {
        self.meters_per_degree * self.cos_lat
    }

    pub fn to_local(&self, p: &GeoPoint) -> Result<LocalXY> {
        if p.srid() != self.origin.srid() {
            return Err(Error::SridMismatch {
                expected: self.origin.srid(),
                found: p.srid(),
            });
        }
        Ok(self.project_unchecked(p.lon(), p.lat()))
    }

    #[inline]
    pub(crate) fn project_unchecked(&self, lon: f64, lat: f64) -> LocalXY {
        LocalXY {
            x_m: (lon - self.origin.lon()) * self.meters_per_degree * self.cos_lat,
            y_m: (lat - self.origin.lat()) * self.meters_per_degree,
        }
    }

    pub fn from_local(&self, xy: LocalXY) -> Result<GeoPoint> {
        let lon = self.origin.lon() + xy.x_m / (self.meters_per_degree * self.cos_lat);
        let lat = self.origin.lat() + xy.y_m / self.meters_per_degree;
        GeoPoint::with_srid(lon, lat, self.origin.srid())
    }
}

/// Ground length of a longitude difference at a given latitude.
pub fn lon_arc_length(dlon_deg: f64, lat_deg: f64, proj: &LocalProjection) -> Result<f64> {
    if !lat_deg.is_finite() || lat_deg.abs() >= 89.0 {
        return Err(Error::ProjectionUndefined { lat: lat_deg });
    }
    Ok(dlon_deg * proj.meters_per_degree() * lat_deg.to_radians().cos())
}
