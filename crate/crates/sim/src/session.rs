use std::path::{Path, PathBuf};
use std::time::Instant;

use geofence_core::engine::{evaluate_tick, ObstacleRuleSet, TickSnapshot};
use geofence_core::ingest::{apply_heights, parse_construction_file, parse_height_csv, parse_osm_xml, FenceConfig};
use geofence_core::raster::{render_tick_layers, ColorScheme, TickLayers};
use geofence_core::{FeatureStore, MapFeature, UavState};
use serde::{Deserialize, Serialize};

/// Most recent stage timings kept per session.
const TIMING_LOG_CAP: usize = 1024;

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Data {
        path: PathBuf,
        #[source]
        source: geofence_core::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error(transparent)]
    Engine(#[from] geofence_core::Error),
    #[error("benchmark precondition: {0}")]
    Bench(String),
}

fn read(path: &Path) -> Result<Vec<u8>, SimError> {
    std::fs::read(path).map_err(|source| SimError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn data_err(path: &Path) -> impl FnOnce(geofence_core::Error) -> SimError + '_ {
    move |source| SimError::Data {
        path: path.to_path_buf(),
        source,
    }
}

/// What `ingest` writes: the parsed features plus the parser's notes.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SessionDump {
    pub features: Vec<MapFeature>,
    #[serde(default)]
    pub warnings: Vec<String>,
}

/// Reads OSM XML, or a session dump when the file ends in `.json`.
/// Returns the features and any ingest warnings.
pub fn load_map(path: &Path) -> Result<(Vec<MapFeature>, Vec<String>), SimError> {
    let bytes = read(path)?;
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
        let dump: SessionDump = serde_json::from_slice(&bytes).map_err(|source| SimError::Json {
            path: path.to_path_buf(),
            source,
        })?;
        return Ok((dump.features, dump.warnings));
    }
    let doc = parse_osm_xml(&bytes).map_err(data_err(path))?;
    let mut warnings = doc.warnings;
    for (id, why) in doc.rejected {
        warnings.push(format!("way {id} rejected: {why}"));
    }
    Ok((doc.features, warnings))
}

pub fn load_config(path: Option<&Path>) -> Result<(FenceConfig, Vec<String>), SimError> {
    let Some(path) = path else {
        return Ok((FenceConfig::default(), Vec::new()));
    };
    let text = String::from_utf8_lossy(&read(path)?).into_owned();
    let parsed = parse_construction_file(&text).map_err(data_err(path))?;
    Ok((parsed.config, parsed.warnings))
}

pub fn load_heights(features: &mut [MapFeature], path: &Path) -> Result<usize, SimError> {
    let text = String::from_utf8_lossy(&read(path)?).into_owned();
    let heights = parse_height_csv(&text).map_err(data_err(path))?;
    Ok(apply_heights(features, &heights))
}

/// Scenario state: the loaded map, the active configuration and the most
/// recent evaluation.
#[derive(Debug, Clone)]
pub struct SimSession {
    pub store: FeatureStore,
    pub config: FenceConfig,
    rules: ObstacleRuleSet,
    pub uav: Option<UavState>,
    pub tick_count: u64,
    pub last_snapshot: Option<TickSnapshot>,
    /// `(stage, microseconds)`, newest last.
    pub timing_log: Vec<(&'static str, u64)>,
    pub warnings: Vec<String>,
}

impl SimSession {
    pub fn new(store: FeatureStore, config: FenceConfig) -> Self {
        SimSession {
            rules: ObstacleRuleSet::from(&config),
            store,
            config,
            uav: None,
            tick_count: 0,
            last_snapshot: None,
            timing_log: Vec::new(),
            warnings: Vec::new(),
        }
    }

    pub fn load(map: &Path, config: Option<&Path>, heights: Option<&Path>) -> Result<Self, SimError> {
        let (mut features, mut warnings) = load_map(map)?;
        if let Some(h) = heights {
            let n = load_heights(&mut features, h)?;
            log::info!("applied {n} heights from {}", h.display());
        }
        let (config, config_warnings) = load_config(config)?;
        warnings.extend(config_warnings);
        for w in &warnings {
            log::warn!("{w}");
        }
        let store = FeatureStore::new(features).map_err(data_err(map))?;
        let mut session = SimSession::new(store, config);
        session.warnings = warnings;
        Ok(session)
    }

    fn record(&mut self, stage: &'static str, started: Instant) {
        if self.timing_log.len() >= TIMING_LOG_CAP {
            self.timing_log.drain(..TIMING_LOG_CAP / 2);
        }
        self.timing_log.push((stage, started.elapsed().as_micros() as u64));
    }

    /// Evaluates `uav` and makes it the current state. On error nothing
    /// changes.
    pub fn tick(&mut self, uav: UavState) -> Result<&TickSnapshot, SimError> {
        let started = Instant::now();
        let snapshot = evaluate_tick(&self.store, &self.rules, &self.config, &uav)?;
        self.record("evaluate", started);
        self.uav = Some(uav);
        self.tick_count += 1;
        Ok(self.last_snapshot.insert(snapshot))
    }

    /// Swaps the configuration. The current UAV state, if any, is
    /// re-evaluated under the new one.
    pub fn set_config(&mut self, config: FenceConfig) -> Result<(), SimError> {
        config.validate().map_err(|(key, message)| {
            SimError::Engine(geofence_core::Error::Config {
                key: key.into(),
                line: 0,
                message,
            })
        })?;
        let previous = std::mem::replace(&mut self.config, config);
        self.rules = ObstacleRuleSet::from(&self.config);
        if let Some(uav) = self.uav {
            if let Err(e) = self.tick(uav) {
                self.config = previous;
                self.rules = ObstacleRuleSet::from(&self.config);
                return Err(e);
            }
        }
        Ok(())
    }

    pub fn render_layers(&mut self, scheme: &ColorScheme) -> Result<Option<TickLayers>, SimError> {
        let Some(snapshot) = &self.last_snapshot else {
            return Ok(None);
        };
        let started = Instant::now();
        let layers = render_tick_layers(snapshot, &self.store, scheme, &self.config)?;
        self.record("render", started);
        Ok(Some(layers))
    }
}
