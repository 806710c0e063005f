//! Parsers for everything that enters the engine from outside: map data,
//! WKT geometry, the construction file and the UAV state stream.

pub mod config;
pub mod height;
pub mod osm;
pub mod uav;
pub mod wkt;

pub use config::{parse_construction_file, FenceConfig, FenceConfigPatch, ParsedConfig};
pub use height::{apply_heights, parse_height_csv};
pub use osm::{parse_osm_xml, OsmDocument};
pub use uav::parse_uav_line;
pub use wkt::{parse_wkt, serialize_wkt, WktGeometry};
