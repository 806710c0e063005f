//! The fence construction file: one `key,value` pair per line, `#` starts a
//! comment. Absent keys take their defaults; unknown keys are reported as
//! warnings.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::crs::{HelmertParams, ProjectionMode};
use crate::error::{Error, Result};
use crate::feature::Category;

pub const DEFAULT_BUFFER_RADIUS_DEG: f64 = 0.012;
pub const DEFAULT_BUILDING_HEIGHT_M: f64 = 30.0;
pub const DEFAULT_CONE_HALF_ANGLE_DEG: f64 = 10.0;
pub const DEFAULT_RASTER_PX: u32 = 500;
pub const DEFAULT_STOP_TIME_S: f64 = 5.0;
pub const DEFAULT_MIN_SEPARATION_M: f64 = 50.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FenceConfig {
    /// Buffer radius, and the floor when the radius follows speed.
    pub buffer_radius_deg: f64,
    pub obstacle_categories: BTreeSet<Category>,
    pub obstacle_type_filters: Vec<(String, String)>,
    pub whitelist_ids: BTreeSet<i64>,
    pub default_building_height_m: f64,
    pub cone_half_angle_deg: f64,
    pub raster_px: u32,
    pub stop_time_s: f64,
    pub min_separation_m: f64,
    /// 2.5D rule: an obstacle only constrains a UAV at or below its height.
    pub height_rule: bool,
    /// When set, the buffer radius grows to cover `velocity × window`.
    pub buffer_window_s: Option<f64>,
    pub projection_mode: ProjectionMode,
    pub helmert: HelmertParams,
    /// Constant geoid-ellipsoid separation applied to incoming UAV heights.
    pub geoid_separation_m: Option<f64>,
}

impl Default for FenceConfig {
    fn default() -> Self {
        FenceConfig {
            buffer_radius_deg: DEFAULT_BUFFER_RADIUS_DEG,
            obstacle_categories: BTreeSet::from([Category::Building]),
            obstacle_type_filters: Vec::new(),
            whitelist_ids: BTreeSet::new(),
            default_building_height_m: DEFAULT_BUILDING_HEIGHT_M,
            cone_half_angle_deg: DEFAULT_CONE_HALF_ANGLE_DEG,
            raster_px: DEFAULT_RASTER_PX,
            stop_time_s: DEFAULT_STOP_TIME_S,
            min_separation_m: DEFAULT_MIN_SEPARATION_M,
            height_rule: true,
            buffer_window_s: None,
            projection_mode: ProjectionMode::Standard,
            helmert: HelmertParams::identity(),
            geoid_separation_m: None,
        }
    }
}

impl FenceConfig {
    /// Checks the invariants; the error names the offending key.
    pub fn validate(&self) -> std::result::Result<(), (&'static str, String)> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.buffer_radius_deg) {
            return Err(("buffer_radius_deg", "must be > 0".into()));
        }
        if !(self.cone_half_angle_deg > 0.0 && self.cone_half_angle_deg < 90.0) {
            return Err(("cone_half_angle_deg", "must be in (0, 90)".into()));
        }
        if !(16..=4096).contains(&self.raster_px) {
            return Err(("raster_px", "must be in [16, 4096]".into()));
        }
        if !(self.default_building_height_m.is_finite() && self.default_building_height_m >= 0.0) {
            return Err(("default_building_height_m", "must be >= 0".into()));
        }
        if !(self.stop_time_s.is_finite() && self.stop_time_s >= 0.0) {
            return Err(("stop_time_s", "must be >= 0".into()));
        }
        if !(self.min_separation_m.is_finite() && self.min_separation_m >= 0.0) {
            return Err(("min_separation_m", "must be >= 0".into()));
        }
        if let Some(w) = self.buffer_window_s {
            if !positive(w) {
                return Err(("buffer_window_s", "must be > 0".into()));
            }
        }
        if let Err(e) = self.helmert.validate() {
            return Err(("helmert", e.to_string()));
        }
        if let Some(n) = self.geoid_separation_m {
            if !(n.is_finite() && n.abs() <= crate::crs::MAX_GEOID_SEPARATION_M) {
                return Err(("geoid_separation_m", "must be within ±120 m".into()));
            }
        }
        Ok(())
    }
}

/// Partial update, as accepted by the service's config endpoint.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FenceConfigPatch {
    pub buffer_radius_deg: Option<f64>,
    pub obstacle_categories: Option<BTreeSet<Category>>,
    pub obstacle_type_filters: Option<Vec<(String, String)>>,
    pub whitelist_ids: Option<BTreeSet<i64>>,
    pub default_building_height_m: Option<f64>,
    pub cone_half_angle_deg: Option<f64>,
    pub raster_px: Option<u32>,
    pub stop_time_s: Option<f64>,
    pub min_separation_m: Option<f64>,
    pub height_rule: Option<bool>,
    pub buffer_window_s: Option<f64>,
}

impl FenceConfigPatch {
    /// Applies the patch to a copy of `base`, rejecting invalid results.
    pub fn apply(&self, base: &FenceConfig) -> Result<FenceConfig> {
        let mut c = base.clone();
        macro_rules! set {
            ($($field:ident),*) => {
                $(if let Some(v) = &self.$field { c.$field = v.clone(); })*
            };
        }
        set!(
            buffer_radius_deg,
            obstacle_categories,
            obstacle_type_filters,
            whitelist_ids,
            default_building_height_m,
            cone_half_angle_deg,
            raster_px,
            stop_time_s,
            min_separation_m,
            height_rule
        );
        if let Some(w) = self.buffer_window_s {
            c.buffer_window_s = Some(w);
        }
        c.validate().map_err(|(key, message)| Error::Config {
            key: key.into(),
            line: 0,
            message,
        })?;
        Ok(c)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParsedConfig {
    pub config: FenceConfig,
    pub warnings: Vec<String>,
}

fn split_list(value: &str) -> impl Iterator<Item = &str> {
    value.split([',', ';']).map(str::trim).filter(|s| !s.is_empty())
}

pub fn parse_construction_file(text: &str) -> Result<ParsedConfig> {
    let mut config = FenceConfig::default();
    let mut warnings = Vec::new();
    let mut categories: Option<BTreeSet<Category>> = None;
    let mut last_line_for: Vec<(&'static str, usize)> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once(',') else {
            return Err(Error::Config {
                key: line.to_string(),
                line: line_no,
                message: "expected `key,value`".into(),
            });
        };
        let key = key.trim();
        let value = value.trim();
        let err = |message: String| Error::Config {
            key: key.to_string(),
            line: line_no,
            message,
        };
        let float = || -> Result<f64> {
            value
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| err(format!("`{value}` is not a number")))
        };
        let canonical: &'static str = match key {
            "buffer_radius_deg" => {
                config.buffer_radius_deg = float()?;
                "buffer_radius_deg"
            }
            "obstacle_categories" | "obstacle_category" => {
                let set = categories.get_or_insert_with(BTreeSet::new);
                for name in split_list(value) {
                    set.insert(name.parse().map_err(|e: Error| err(e.to_string()))?);
                }
                "obstacle_categories"
            }
            "obstacle_type_filters" | "obstacle_type_filter" => {
                for pair in split_list(value) {
                    let (k, v) = pair
                        .split_once('=')
                        .ok_or_else(|| err(format!("filter `{pair}` is not `tag=value`")))?;
                    config
                        .obstacle_type_filters
                        .push((k.trim().to_string(), v.trim().to_string()));
                }
                "obstacle_type_filters"
            }
            "whitelist_ids" | "whitelist_id" => {
                for id in split_list(value) {
                    let id = id.parse::<i64>().map_err(|_| err(format!("`{id}` is not an osm id")))?;
                    config.whitelist_ids.insert(id);
                }
                "whitelist_ids"
            }
            "default_building_height_m" => {
                config.default_building_height_m = float()?;
                "default_building_height_m"
            }
            "cone_half_angle_deg" => {
                config.cone_half_angle_deg = float()?;
                "cone_half_angle_deg"
            }
            "raster_px" => {
                config.raster_px = value
                    .parse::<u32>()
                    .map_err(|_| err(format!("`{value}` is not a pixel count in [16, 4096]")))?;
                "raster_px"
            }
            "stop_time_s" => {
                config.stop_time_s = float()?;
                "stop_time_s"
            }
            "min_separation_m" => {
                config.min_separation_m = float()?;
                "min_separation_m"
            }
            "height_rule" => {
                config.height_rule = match value.to_ascii_lowercase().as_str() {
                    "true" | "on" | "yes" | "1" => true,
                    "false" | "off" | "no" | "0" => false,
                    _ => return Err(err(format!("`{value}` is not a boolean"))),
                };
                "height_rule"
            }
            "buffer_window_s" => {
                config.buffer_window_s = Some(float()?);
                "buffer_window_s"
            }
            "projection_mode" => {
                config.projection_mode = match value {
                    "standard" => ProjectionMode::Standard,
                    "rounded" | "table" => ProjectionMode::Rounded,
                    _ => return Err(err(format!("unknown projection mode `{value}`"))),
                };
                "projection_mode"
            }
            "helmert" => {
                let parts: Vec<f64> = value
                    .split(',')
                    .map(|s| s.trim().parse::<f64>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| err("expected seven decimals tx,ty,tz,rx,ry,rz,s_ppm".into()))?;
                if parts.len() != 7 {
                    return Err(err(format!(
                        "expected seven decimals tx,ty,tz,rx,ry,rz,s_ppm, got {}",
                        parts.len()
                    )));
                }
                config.helmert =
                    HelmertParams::new([parts[0], parts[1], parts[2]], [parts[3], parts[4], parts[5]], parts[6])
                        .map_err(|e| err(e.to_string()))?;
                "helmert"
            }
            "geoid_separation_m" => {
                config.geoid_separation_m = Some(float()?);
                "geoid_separation_m"
            }
            _ => {
                warnings.push(format!("line {line_no}: unknown key `{key}` ignored"));
                continue;
            }
        };
        last_line_for.retain(|(k, _)| *k != canonical);
        last_line_for.push((canonical, line_no));
    }

    if let Some(set) = categories {
        config.obstacle_categories = set;
    }
    if let Err((key, message)) = config.validate() {
        let line = last_line_for.iter().find(|(k, _)| *k == key).map_or(0, |(_, l)| *l);
        return Err(Error::Config {
            key: key.to_string(),
            line,
            message,
        });
    }
    Ok(ParsedConfig { config, warnings })
}
