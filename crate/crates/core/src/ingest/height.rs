//! External building heights as `osm_id,height_m` rows.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::feature::MapFeature;

pub fn parse_height_csv(text: &str) -> Result<HashMap<i64, f64>> {
    let mut out = HashMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with("osm_id") {
            continue;
        }
        let bad = |message: &str| Error::Config {
            key: "osm_id,height_m".into(),
            line: idx + 1,
            message: message.into(),
        };
        let (id, h) = line.split_once(',').ok_or_else(|| bad("expected `osm_id,height_m`"))?;
        let id: i64 = id.trim().parse().map_err(|_| bad("osm_id is not an integer"))?;
        let h: f64 = h
            .trim()
            .parse()
            .ok()
            .filter(|h: &f64| h.is_finite() && *h >= 0.0)
            .ok_or_else(|| bad("height is not a non-negative number"))?;
        out.insert(id, h);
    }
    Ok(out)
}

/// Overrides feature heights from the table; returns how many were set.
pub fn apply_heights(features: &mut [MapFeature], heights: &HashMap<i64, f64>) -> usize {
    let mut n = 0;
    for f in features.iter_mut() {
        if let Some(&h) = heights.get(&f.osm_id) {
            f.height_m = Some(h);
            n += 1;
        }
    }
    n
}
