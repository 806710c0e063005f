//! Per-tick geofence evaluation.
//!
//! A tick takes the UAV state, draws the buffer zone around it, keeps the
//! obstacles that lie entirely inside the zone (and, under the 2.5D rule,
//! are at least as tall as the UAV is high), reports their distance and
//! bearing, and raises an advisory for any whose bearing falls inside the
//! cone around the UAV heading.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::crs::{geoid_height, ConstantGeoid, LocalProjection};
use crate::error::{Error, Result};
use crate::feature::{Category, MapFeature};
use crate::geometry::UavState;
use crate::ingest::FenceConfig;
use crate::store::{
    bearing_to, build_buffer, distance_to_feature, query_candidates, within_buffer, BufferZone, FeatureStore,
    BUFFER_QUAD_SEGS,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObstacleRuleSet {
    pub categories: BTreeSet<Category>,
    pub type_filters: Vec<(String, String)>,
    pub whitelist_ids: BTreeSet<i64>,
    pub default_height_m: f64,
    pub height_rule: bool,
}

impl From<&FenceConfig> for ObstacleRuleSet {
    fn from(c: &FenceConfig) -> Self {
        ObstacleRuleSet {
            categories: c.obstacle_categories.clone(),
            type_filters: c.obstacle_type_filters.clone(),
            whitelist_ids: c.whitelist_ids.clone(),
            default_height_m: c.default_building_height_m,
            height_rule: c.height_rule,
        }
    }
}

impl ObstacleRuleSet {
    /// Category or tag match, with the whitelist taking precedence.
    pub fn is_obstacle(&self, f: &MapFeature) -> bool {
        if self.whitelist_ids.contains(&f.osm_id) {
            return false;
        }
        self.categories.contains(&f.category) || self.type_filters.iter().any(|(k, v)| f.matches_tag(k, v))
    }

    /// Under the 2.5D rule an obstacle only constrains a UAV flying at or
    /// below its height.
    pub fn constrains_at(&self, f: &MapFeature, uav_height_m: f64) -> bool {
        !self.height_rule || uav_height_m <= f.height_m.unwrap_or(self.default_height_m)
    }
}

pub fn classify_obstacles(store: &FeatureStore, rules: &ObstacleRuleSet) -> BTreeSet<i64> {
    store
        .features()
        .iter()
        .filter(|f| rules.is_obstacle(f))
        .map(|f| f.osm_id)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SituationEntry {
    pub osm_id: i64,
    pub distance_m: f64,
    pub bearing_deg: f64,
}

impl fmt::Display for SituationEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Object OSM ID: {} at degree:{} with distance of {} meter",
            self.osm_id,
            format_half_up(self.bearing_deg, 1),
            format_half_up(self.distance_m, 1)
        )
    }
}

/// Fixed-point formatting that rounds ties away from zero, as `%.Nf` does
/// in the JVM; Rust's own `{:.N}` rounds ties to even.
pub fn format_half_up(v: f64, decimals: usize) -> String {
    if !v.is_finite() {
        return v.to_string();
    }
    // 1100 fractional digits hold any f64 exactly, so nothing is rounded yet
    let exact = format!("{:.1100}", v.abs());
    let (int_part, frac_part) = exact.split_once('.').unwrap_or((&exact, ""));
    let mut digits: Vec<u8> = int_part.bytes().chain(frac_part.bytes().take(decimals)).collect();
    if frac_part.as_bytes().get(decimals).is_some_and(|&d| d >= b'5') {
        let mut i = digits.len();
        loop {
            if i == 0 {
                digits.insert(0, b'1');
                break;
            }
            i -= 1;
            if digits[i] == b'9' {
                digits[i] = b'0';
            } else {
                digits[i] += 1;
                break;
            }
        }
    }
    let split = digits.len() - decimals;
    let mut out = String::with_capacity(digits.len() + 2);
    if v.is_sign_negative() {
        out.push('-');
    }
    out.push_str(std::str::from_utf8(&digits[..split]).unwrap_or("0"));
    if decimals > 0 {
        out.push('.');
        out.push_str(std::str::from_utf8(&digits[split..]).unwrap_or("0"));
    }
    out
}

/// Renders the situation as log lines, one per entry.
pub fn situation_lines(entries: &[SituationEntry]) -> String {
    let mut out = String::new();
    for e in entries {
        out.push_str(&e.to_string());
        out.push('\n');
    }
    out
}

/// Distance and bearing for each obstacle, nearest first; equal distances
/// are ordered by id.
pub fn situation_report(
    obstacles: &[&MapFeature],
    uav: &UavState,
    proj: &LocalProjection,
) -> Result<Vec<SituationEntry>> {
    let mut entries = Vec::with_capacity(obstacles.len());
    for f in obstacles {
        let distance_m = distance_to_feature(&uav.position, &f.geometry, proj)?;
        let target = match f.geometry.centroid() {
            Ok(c) => c,
            Err(_) => {
                let (lon, lat) = f.geometry.bbox().center();
                crate::geometry::GeoPoint::with_srid(lon, lat, uav.position.srid())?
            }
        };
        // a UAV sitting on the centroid has the object dead ahead
        let bearing_deg = match bearing_to(&uav.position, &target, proj) {
            Ok(b) => b,
            Err(Error::UndefinedBearing) => uav.heading_deg,
            Err(e) => return Err(e),
        };
        entries.push(SituationEntry {
            osm_id: f.osm_id,
            distance_m,
            bearing_deg,
        });
    }
    entries.sort_by(|a, b| a.distance_m.total_cmp(&b.distance_m).then(a.osm_id.cmp(&b.osm_id)));
    Ok(entries)
}

/// Smallest angle between two compass directions, in `[0, 180]`.
pub fn circular_diff(a_deg: f64, b_deg: f64) -> f64 {
    let d = (a_deg - b_deg).rem_euclid(360.0);
    d.min(360.0 - d)
}

/// True when `bearing` lies strictly within `half_angle` of `heading`.
pub fn cone_test(heading_deg: f64, bearing_deg: f64, half_angle_deg: f64) -> bool {
    circular_diff(heading_deg, bearing_deg) < half_angle_deg
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum AlertLevel {
    None,
    Caution,
    Stop,
}

impl AlertLevel {
    pub fn as_str(self) -> &'static str {
        match self {
            AlertLevel::None => "NONE",
            AlertLevel::Caution => "CAUTION",
            AlertLevel::Stop => "STOP",
        }
    }
}

impl fmt::Display for AlertLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Advisory {
    pub level: AlertLevel,
    pub triggering_ids: Vec<i64>,
    pub messages: Vec<String>,
    pub eta_s: Option<f64>,
    /// Raised for STOP; stands in for the audible warning.
    pub alert_event: bool,
}

impl Advisory {
    pub fn none() -> Self {
        Advisory {
            level: AlertLevel::None,
            triggering_ids: Vec::new(),
            messages: Vec::new(),
            eta_s: None,
            alert_event: false,
        }
    }
}

pub fn diversion_message(bearing_deg: f64) -> String {
    format!(
        "Make diversion to avoid going {} degree",
        format_half_up(bearing_deg, 1)
    )
}

/// Time to cover `distance_m` at `velocity_ms`; `None` when not moving.
pub fn eta_to_object(distance_m: f64, velocity_ms: f64) -> Option<f64> {
    (velocity_ms > 0.0).then(|| distance_m.max(0.0) / velocity_ms)
}

/// Cone-test advisory over a sorted situation.
pub fn advise(situation: &[SituationEntry], uav: &UavState, config: &FenceConfig) -> Advisory {
    let triggering: Vec<&SituationEntry> = situation
        .iter()
        .filter(|e| cone_test(uav.heading_deg, e.bearing_deg, config.cone_half_angle_deg))
        .collect();
    if triggering.is_empty() {
        return Advisory::none();
    }
    let stop_distance = config.min_separation_m.max(uav.velocity_ms * config.stop_time_s);
    let nearest = triggering.iter().map(|e| e.distance_m).fold(f64::INFINITY, f64::min);
    let level = if nearest <= stop_distance {
        AlertLevel::Stop
    } else {
        AlertLevel::Caution
    };
    Advisory {
        level,
        triggering_ids: triggering.iter().map(|e| e.osm_id).collect(),
        messages: triggering.iter().map(|e| diversion_message(e.bearing_deg)).collect(),
        eta_s: eta_to_object(nearest, uav.velocity_ms),
        alert_event: level == AlertLevel::Stop,
    }
}

/// Distance covered in `window_s` at `velocity_ms`.
pub fn buffer_radius_m_from_speed(velocity_ms: f64, window_s: f64) -> Result<f64> {
    if !(velocity_ms.is_finite() && velocity_ms >= 0.0) {
        return Err(Error::InvalidInput(format!("velocity {velocity_ms} must be >= 0")));
    }
    if !(window_s.is_finite() && window_s > 0.0) {
        return Err(Error::InvalidInput(format!("window {window_s} must be > 0")));
    }
    Ok(velocity_ms * window_s)
}

/// Degree radius covering `velocity × window` meters. Uses the longitude
/// scale at the projection latitude, which gives the larger degree value.
pub fn buffer_radius_from_speed(velocity_ms: f64, window_s: f64, proj: &LocalProjection) -> Result<f64> {
    Ok(buffer_radius_m_from_speed(velocity_ms, window_s)? / proj.meters_per_degree_lon())
}

/// Buffer radius for this tick: the configured radius, widened to the
/// speed-derived one when a window is configured.
pub fn effective_radius_deg(config: &FenceConfig, uav: &UavState, proj: &LocalProjection) -> Result<f64> {
    match config.buffer_window_s {
        Some(window) => Ok(config
            .buffer_radius_deg
            .max(buffer_radius_from_speed(uav.velocity_ms, window, proj)?)),
        None => Ok(config.buffer_radius_deg),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TickSnapshot {
    pub uav: UavState,
    pub zone: BufferZone,
    pub candidates: Vec<i64>,
    pub obstacles_in_zone: Vec<i64>,
    pub situation: Vec<SituationEntry>,
    pub advisory: Advisory,
}

impl TickSnapshot {
    pub fn situation_lines(&self) -> String {
        situation_lines(&self.situation)
    }
}

/// One evaluation cycle. Pure in `(store, rules, config, uav)`.
pub fn evaluate_tick(
    store: &FeatureStore,
    rules: &ObstacleRuleSet,
    config: &FenceConfig,
    uav: &UavState,
) -> Result<TickSnapshot> {
    let mut uav = *uav;
    if let Some(n) = config.geoid_separation_m {
        uav.height_m = geoid_height(uav.height_m, &ConstantGeoid { separation_m: n }, &uav.position)?;
    }
    let proj = store.projection_for(&uav.position, config.projection_mode)?;
    let radius = effective_radius_deg(config, &uav, &proj)?;
    let zone = build_buffer(uav.position, radius, BUFFER_QUAD_SEGS)?;

    let candidates = query_candidates(store, &zone);
    let mut obstacles = Vec::new();
    for f in &candidates {
        if rules.is_obstacle(f) && rules.constrains_at(f, uav.height_m) && within_buffer(&f.geometry, &zone)? {
            obstacles.push(*f);
        }
    }
    let situation = situation_report(&obstacles, &uav, &proj)?;
    let advisory = advise(&situation, &uav, config);
    Ok(TickSnapshot {
        uav,
        candidates: candidates.iter().map(|f| f.osm_id).collect(),
        obstacles_in_zone: obstacles.iter().map(|f| f.osm_id).collect(),
        zone,
        situation,
        advisory,
    })
}
