//! Buffer-size sweep: how long the candidate filter plus containment test
//! takes as the buffer grows.

use std::hint::black_box;
use std::time::{Duration, Instant};

use geofence_core::engine::ObstacleRuleSet;
use geofence_core::ingest::FenceConfig;
use geofence_core::store::{build_buffer, query_candidates, within_buffer, BUFFER_QUAD_SEGS};
use geofence_core::{FeatureStore, GeoPoint};
use serde::Serialize;

use crate::session::SimError;

pub const MIN_RUNS: usize = 5;
/// Buffer centres per timed run, on a grid over the middle of the data.
pub const PROBES_PER_AXIS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BenchResult {
    pub buffer_radius_deg: f64,
    /// Mean wall time of one run (all probes), warm runs only.
    pub mean_ms: f64,
    pub runs: usize,
}

fn probes(store: &FeatureStore) -> Result<Vec<GeoPoint>, SimError> {
    let e = store.extent();
    let (cx, cy) = e.center();
    // middle half of the extent, so large buffers still see uniform density
    let (hw, hh) = ((e.max_lon - e.min_lon) / 4.0, (e.max_lat - e.min_lat) / 4.0);
    let n = PROBES_PER_AXIS;
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let fx = (i as f64 + 0.5) / n as f64 * 2.0 - 1.0;
            let fy = (j as f64 + 0.5) / n as f64 * 2.0 - 1.0;
            out.push(GeoPoint::new(cx + fx * hw, cy + fy * hh)?);
        }
    }
    Ok(out)
}

fn one_run(
    store: &FeatureStore,
    rules: &ObstacleRuleSet,
    probes: &[GeoPoint],
    radius: f64,
) -> Result<Duration, SimError> {
    let started = Instant::now();
    let mut kept = 0usize;
    for p in probes {
        let zone = build_buffer(*p, radius, BUFFER_QUAD_SEGS)?;
        for f in query_candidates(store, &zone) {
            if rules.is_obstacle(f) && within_buffer(&f.geometry, &zone)? {
                kept += 1;
            }
        }
    }
    black_box(kept);
    Ok(started.elapsed())
}

/// Times the candidate + containment stage for each radius. One untimed
/// warm-up pass precedes the timed runs, and radii are interleaved within
/// each run so clock drift spreads evenly. Results follow input order.
pub fn bench_buffer_sweep(
    store: &FeatureStore,
    config: &FenceConfig,
    radii: &[f64],
    runs: usize,
) -> Result<Vec<BenchResult>, SimError> {
    if store.is_empty() {
        return Err(SimError::Bench("feature store is empty".into()));
    }
    if runs < MIN_RUNS {
        return Err(SimError::Bench(format!("runs must be at least {MIN_RUNS}, got {runs}")));
    }
    if let Some(r) = radii.iter().find(|r| !(r.is_finite() && **r > 0.0)) {
        return Err(SimError::Bench(format!("radius {r} must be > 0")));
    }
    let rules = ObstacleRuleSet::from(config);
    let probes = probes(store)?;
    for &r in radii {
        one_run(store, &rules, &probes, r)?;
    }
    let mut totals = vec![Duration::ZERO; radii.len()];
    for _ in 0..runs {
        for (total, &r) in totals.iter_mut().zip(radii) {
            *total += one_run(store, &rules, &probes, r)?;
        }
    }
    Ok(radii
        .iter()
        .zip(totals)
        .map(|(&r, total)| BenchResult {
            buffer_radius_deg: r,
            mean_ms: total.as_secs_f64() * 1e3 / runs as f64,
            runs,
        })
        .collect())
}
