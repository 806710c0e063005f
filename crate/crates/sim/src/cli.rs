//! Command line. Usage errors exit with 2, data errors with 1.

use std::ffi::OsString;
use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use clap::{Parser, Subcommand};
use geofence_core::geometry::BBox;
use geofence_core::ingest::parse_uav_line;
use geofence_core::raster::ColorScheme;
use geofence_core::synth::building_corpus;
use geofence_core::FeatureStore;

use crate::bench::{bench_buffer_sweep, MIN_RUNS};
use crate::output::{advisory_text, encode_layers, write_tick_outputs};
use crate::service::{self, ServiceOptions};
use crate::session::{load_config, load_heights, load_map, SessionDump, SimError, SimSession};

/// Radii swept by `bench` when none are given.
pub const DEFAULT_BENCH_RADII: [f64; 5] = [0.05, 0.02, 0.01, 0.005, 0.002];
/// Size of the synthetic corpus `bench` builds when no map is given.
pub const SYNTHETIC_FEATURES: usize = 10_000;
pub const SYNTHETIC_SEED: u64 = 0x6765_6f66;

/// Square over which the synthetic benchmark corpus is spread.
pub fn synthetic_extent() -> BBox {
    BBox {
        min_lon: -0.727,
        min_lat: 51.973,
        max_lon: -0.527,
        max_lat: 52.173,
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "geofence-sim",
    version,
    about = "Geofence engine simulator",
    arg_required_else_help = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse a map and write DIR/session.json.
    Ingest {
        #[arg(long)]
        map: PathBuf,
        /// CSV of `osm_id,height_m` overrides.
        #[arg(long)]
        heights: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate one UAV line and print the situation and advisory.
    Tick {
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        heights: Option<PathBuf>,
        /// `lat,lon,height,heading,velocity`
        #[arg(long, allow_hyphen_values = true)]
        uav: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Replay a file of UAV lines at a fixed rate.
    Simulate {
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        heights: Option<PathBuf>,
        #[arg(long)]
        uav_file: PathBuf,
        /// Ticks per second; 0 replays without pausing.
        #[arg(long, default_value_t = 1.0)]
        rate: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Time the candidate and containment stage across buffer radii.
    Bench {
        /// Map to benchmark; a synthetic corpus is used when absent.
        #[arg(long)]
        map: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        radii: Option<Vec<f64>>,
        #[arg(long, default_value_t = MIN_RUNS)]
        runs: usize,
    },
    /// Serve the HTTP API.
    Serve {
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        heights: Option<PathBuf>,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Initial UAV line.
        #[arg(long, allow_hyphen_values = true)]
        uav: Option<String>,
    },
}

fn ensure_dir(dir: &Path) -> Result<(), SimError> {
    std::fs::create_dir_all(dir).map_err(|source| SimError::Io {
        path: dir.to_path_buf(),
        source,
    })
}

fn uav_err(line: &str) -> impl FnOnce(geofence_core::Error) -> SimError + '_ {
    move |source| SimError::Data {
        path: PathBuf::from(format!("uav line `{line}`")),
        source,
    }
}

/// Evaluates one line and writes its outputs; returns the printed text.
fn tick_once(session: &mut SimSession, line: &str, out: Option<&Path>) -> Result<String, SimError> {
    let uav = parse_uav_line(line).map_err(uav_err(line))?;
    let snapshot = session.tick(uav)?.clone();
    if let Some(dir) = out {
        let scheme = ColorScheme::default();
        let pngs = match session.render_layers(&scheme)? {
            Some(layers) => Some(encode_layers(&layers, &scheme)?),
            None => None,
        };
        write_tick_outputs(dir, &snapshot, pngs.as_ref());
    }
    let mut text = snapshot.situation_lines();
    text.push_str(&advisory_text(&snapshot.advisory));
    text.push('\n');
    Ok(text)
}

fn execute(command: Command, stdout: &mut dyn Write) -> Result<(), SimError> {
    let io = |source| SimError::Io {
        path: PathBuf::from("<stdout>"),
        source,
    };
    match command {
        Command::Ingest { map, heights, out } => {
            let (mut features, warnings) = load_map(&map)?;
            if let Some(h) = heights {
                load_heights(&mut features, &h)?;
            }
            // surfaces duplicate ids before anything is written
            let store = FeatureStore::new(features)?;
            ensure_dir(&out)?;
            let dump = SessionDump {
                features: store.into_features(),
                warnings,
            };
            let path = out.join("session.json");
            let json = serde_json::to_vec_pretty(&dump).map_err(|source| SimError::Json {
                path: path.clone(),
                source,
            })?;
            crate::output::write_atomic(&path, &json).map_err(|source| SimError::Io {
                path: path.clone(),
                source,
            })?;
            writeln!(
                stdout,
                "ingested {} features into {} ({} warnings)",
                dump.features.len(),
                path.display(),
                dump.warnings.len()
            )
            .map_err(io)?;
        }
        Command::Tick {
            map,
            config,
            heights,
            uav,
            out,
        } => {
            let mut session = SimSession::load(&map, config.as_deref(), heights.as_deref())?;
            if let Some(dir) = &out {
                ensure_dir(dir)?;
            }
            let text = tick_once(&mut session, &uav, out.as_deref())?;
            stdout.write_all(text.as_bytes()).map_err(io)?;
        }
        Command::Simulate {
            map,
            config,
            heights,
            uav_file,
            rate,
            out,
        } => {
            if !(rate.is_finite() && rate >= 0.0) {
                return Err(SimError::Bench(format!("rate {rate} must be >= 0")));
            }
            let mut session = SimSession::load(&map, config.as_deref(), heights.as_deref())?;
            if let Some(dir) = &out {
                ensure_dir(dir)?;
            }
            let text = std::fs::read_to_string(&uav_file).map_err(|source| SimError::Io {
                path: uav_file.clone(),
                source,
            })?;
            let period = (rate > 0.0).then(|| Duration::from_secs_f64(1.0 / rate));
            let mut next = Instant::now();
            for line in text
                .lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
            {
                if let Some(p) = period {
                    std::thread::sleep(next.saturating_duration_since(Instant::now()));
                    next += p;
                }
                let out_text = tick_once(&mut session, line, out.as_deref())?;
                writeln!(stdout, "# tick {}", session.tick_count).map_err(io)?;
                stdout.write_all(out_text.as_bytes()).map_err(io)?;
            }
        }
        Command::Bench {
            map,
            config,
            radii,
            runs,
        } => {
            let (config, _) = load_config(config.as_deref())?;
            let store = match map {
                Some(m) => FeatureStore::new(load_map(&m)?.0)?,
                None => FeatureStore::new(building_corpus(SYNTHETIC_FEATURES, synthetic_extent(), SYNTHETIC_SEED))?,
            };
            let radii = radii.unwrap_or_else(|| DEFAULT_BENCH_RADII.to_vec());
            for r in bench_buffer_sweep(&store, &config, &radii, runs)? {
                writeln!(
                    stdout,
                    "buffer_radius_deg={} mean_ms={:.3} runs={}",
                    r.buffer_radius_deg, r.mean_ms, r.runs
                )
                .map_err(io)?;
            }
        }
        Command::Serve {
            map,
            config,
            heights,
            port,
            out,
            uav,
        } => {
            let mut session = SimSession::load(&map, config.as_deref(), heights.as_deref())?;
            if let Some(line) = &uav {
                session.tick(parse_uav_line(line).map_err(uav_err(line))?)?;
            }
            if let Some(dir) = &out {
                ensure_dir(dir)?;
            }
            let addr = SocketAddr::from(([0, 0, 0, 0], port));
            let rt = tokio::runtime::Runtime::new().map_err(io)?;
            rt.block_on(async move {
                let listener = tokio::net::TcpListener::bind(addr)
                    .await
                    .map_err(|source| SimError::Io {
                        path: PathBuf::from(addr.to_string()),
                        source,
                    })?;
                log::warn!("listening on http://{addr}");
                service::serve(
                    listener,
                    session,
                    ServiceOptions {
                        out_dir: out,
                        scheme: ColorScheme::default(),
                    },
                )
                .await
            })?;
        }
    }
    Ok(())
}

/// Parses `args` (program name first) and runs the subcommand, writing
/// normal output to `stdout`. Returns the process exit code.
pub fn run_with<I, T>(args: I, stdout: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(cli.command, stdout) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    run_with(args, &mut lock)
}
