//! Files written for the ground-control side: the advisory text file, the
//! situation log and the layer PNGs.

use std::fs::{self, OpenOptions};
use std::io::{self, Write};
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};

use geofence_core::engine::{Advisory, TickSnapshot};
use geofence_core::raster::{export_png, ColorScheme, TickLayers};

use crate::session::SimError;

/// `LEVEL:<level>` followed by one diversion message per line, no trailing
/// newline.
pub fn advisory_text(advisory: &Advisory) -> String {
    let mut out = format!("LEVEL:{}", advisory.level);
    for m in &advisory.messages {
        out.push('\n');
        out.push_str(m);
    }
    out
}

static TEMP_SEQ: AtomicU64 = AtomicU64::new(0);

/// Replaces `path` in one step so a concurrent reader sees either the old
/// or the new content, never a mix.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = dir.join(format!(
        ".{name}.{}.{}.tmp",
        std::process::id(),
        TEMP_SEQ.fetch_add(1, Ordering::Relaxed)
    ));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result
}

pub fn write_advisory_file(advisory: &Advisory, path: &Path) -> io::Result<()> {
    write_atomic(path, advisory_text(advisory).as_bytes())
}

pub fn append_situation_log(path: &Path, snapshot: &TickSnapshot) -> io::Result<()> {
    let lines = snapshot.situation_lines();
    if lines.is_empty() {
        return Ok(());
    }
    let mut f = OpenOptions::new().create(true).append(true).open(path)?;
    f.write_all(lines.as_bytes())
}

/// The three PNGs served over HTTP, encoded once per tick.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayerPngs {
    pub reference: Vec<u8>,
    pub obstacles: Vec<u8>,
    pub composite: Vec<u8>,
}

pub fn encode_layers(layers: &TickLayers, scheme: &ColorScheme) -> Result<LayerPngs, SimError> {
    Ok(LayerPngs {
        reference: export_png(&layers.reference)?,
        obstacles: export_png(&layers.obstacles)?,
        composite: export_png(&layers.composite(scheme.background)?)?,
    })
}

pub fn write_layer_pngs(dir: &Path, pngs: &LayerPngs) -> io::Result<()> {
    write_atomic(&dir.join("reference.png"), &pngs.reference)?;
    write_atomic(&dir.join("obstacles.png"), &pngs.obstacles)?;
    write_atomic(&dir.join("composite.png"), &pngs.composite)
}

/// Writes every per-tick output into `dir`. Failures are logged rather
/// than returned so a full disk cannot stall evaluation.
pub fn write_tick_outputs(dir: &Path, snapshot: &TickSnapshot, pngs: Option<&LayerPngs>) {
    if let Err(e) = write_advisory_file(&snapshot.advisory, &dir.join("advisory_out.txt")) {
        log::error!("advisory file: {e}");
    }
    if let Err(e) = append_situation_log(&dir.join("situation.log"), snapshot) {
        log::error!("situation log: {e}");
    }
    if let Some(p) = pngs {
        if let Err(e) = write_layer_pngs(dir, p) {
            log::error!("layer images: {e}");
        }
    }
}
