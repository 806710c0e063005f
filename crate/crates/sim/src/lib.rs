//! Drives the geofence engine: session state, per-tick file outputs, the
//! buffer-size benchmark, the HTTP API and the command line.

pub mod bench;
pub mod cli;
pub mod output;
pub mod service;
pub mod session;

pub use bench::{bench_buffer_sweep, BenchResult};
pub use output::{advisory_text, append_situation_log, write_advisory_file, write_layer_pngs};
pub use session::{load_map, SimError, SimSession};
