//! Geofencing engine for small UAVs: map ingest, a spatially indexed
//! feature store, per-tick obstacle evaluation with cone-test advisories,
//! and raster overlays.

pub mod crs;
pub mod engine;
pub mod error;
pub mod feature;
pub mod geometry;
pub mod ingest;
pub mod raster;
pub mod store;
pub mod synth;

pub use engine::{evaluate_tick, Advisory, AlertLevel, ObstacleRuleSet, SituationEntry, TickSnapshot};
pub use error::{Error, Result};
pub use feature::{Category, FeatureGeometry, MapFeature};
pub use geometry::{BBox, GeoPoint, PolygonShape, Ring, UavState};
pub use ingest::FenceConfig;
pub use store::FeatureStore;
