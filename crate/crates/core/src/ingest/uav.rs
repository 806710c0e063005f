//! UAV state line protocol: `lat,lon,height_m,heading_deg,velocity_ms`.

use crate::error::{Error, Result};
use crate::geometry::{normalize_heading, now_millis, GeoPoint, UavState};

const FIELDS: [&str; 5] = ["lat", "lon", "height_m", "heading_deg", "velocity_ms"];

/// Parses one state line. Field indices in errors are 1-based.
pub fn parse_uav_line(text: &str) -> Result<UavState> {
    let parts: Vec<&str> = text.trim().split(',').map(str::trim).collect();
    if parts.len() != FIELDS.len() {
        let field = if parts.len() < FIELDS.len() {
            parts.len() + 1
        } else {
            FIELDS.len() + 1
        };
        return Err(Error::UavLine {
            field,
            message: format!("expected 5 comma-separated fields, got {}", parts.len()),
        });
    }
    let mut values = [0.0; 5];
    for (i, (raw, slot)) in parts.iter().zip(values.iter_mut()).enumerate() {
        *slot = raw
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| Error::UavLine {
                field: i + 1,
                message: format!("{} `{raw}` is not a finite number", FIELDS[i]),
            })?;
    }
    let [lat, lon, height_m, heading, velocity_ms] = values;
    let field_err = |field: usize, message: String| Error::UavLine { field, message };
    if !(-90.0..=90.0).contains(&lat) {
        return Err(field_err(1, format!("latitude {lat} outside [-90, 90]")));
    }
    let position = GeoPoint::new(lon, lat).map_err(|e| field_err(2, e.to_string()))?;
    if velocity_ms < 0.0 {
        return Err(field_err(5, format!("velocity {velocity_ms} is negative")));
    }
    Ok(UavState {
        position,
        height_m,
        heading_deg: normalize_heading(heading).map_err(|e| field_err(4, e.to_string()))?,
        velocity_ms,
        last_update: now_millis(),
    })
}
