//! Pixel layers for obstacles, reference map and open area, alpha
//! compositing, and PNG export.
//!
//! Pixels are sampled at their centres with no anti-aliasing. Longitude maps
//! linearly to columns (west on the left) and latitude to rows (north on
//! top). Overlapping polygons are unioned by painting each in turn.

use serde::{Deserialize, Serialize};

use crate::engine::TickSnapshot;
use crate::error::{Error, Result};
use crate::feature::FeatureGeometry;
use crate::geometry::{BBox, GeoPoint, PolygonShape};
use crate::ingest::FenceConfig;
use crate::store::FeatureStore;

pub type Rgba = [u8; 4];

pub const TRANSPARENT: Rgba = [0, 0, 0, 0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColorScheme {
    pub obstacle: Rgba,
    pub reference: Rgba,
    pub open_area: Rgba,
    pub uav_marker: Rgba,
    pub background: Rgba,
}

impl Default for ColorScheme {
    fn default() -> Self {
        ColorScheme {
            obstacle: [255, 0, 0, 255],
            reference: [255, 255, 255, 255],
            open_area: [0, 160, 0, 255],
            uav_marker: [255, 165, 0, 255],
            background: [0, 0, 0, 255],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RasterLayer {
    width_px: u32,
    height_px: u32,
    extent: BBox,
    pixels: Vec<u8>,
}

fn check_extent(extent: &BBox) -> Result<()> {
    let ok = [extent.min_lon, extent.min_lat, extent.max_lon, extent.max_lat]
        .iter()
        .all(|v| v.is_finite())
        && extent.min_lon < extent.max_lon
        && extent.min_lat < extent.max_lat;
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidExtent(format!(
            "[{}, {}] x [{}, {}]",
            extent.min_lon, extent.max_lon, extent.min_lat, extent.max_lat
        )))
    }
}

impl RasterLayer {
    /// A fully transparent layer.
    pub fn transparent(extent: BBox, width_px: u32, height_px: u32) -> Result<Self> {
        RasterLayer::filled(extent, width_px, height_px, TRANSPARENT)
    }

    pub fn filled(extent: BBox, width_px: u32, height_px: u32, color: Rgba) -> Result<Self> {
        check_extent(&extent)?;
        if width_px == 0 || height_px == 0 {
            return Err(Error::InvalidInput(format!(
                "raster size {width_px}x{height_px} must be at least 1x1"
            )));
        }
        let n = width_px as usize * height_px as usize;
        let pixels = color.iter().copied().cycle().take(n * 4).collect();
        Ok(RasterLayer {
            width_px,
            height_px,
            extent,
            pixels,
        })
    }

    /// Wraps raw row-major RGBA samples.
    pub fn from_pixels(extent: BBox, width_px: u32, height_px: u32, pixels: Vec<u8>) -> Result<Self> {
        let mut layer = RasterLayer::transparent(extent, width_px, height_px)?;
        if pixels.len() != layer.pixels.len() {
            return Err(Error::InvalidInput(format!(
                "expected {} RGBA bytes, got {}",
                layer.pixels.len(),
                pixels.len()
            )));
        }
        layer.pixels = pixels;
        Ok(layer)
    }

    pub fn width_px(&self) -> u32 {
        self.width_px
    }

    pub fn height_px(&self) -> u32 {
        self.height_px
    }

    pub fn extent(&self) -> BBox {
        self.extent
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn pixel(&self, col: u32, row: u32) -> Rgba {
        let i = (row as usize * self.width_px as usize + col as usize) * 4;
        [
            self.pixels[i],
            self.pixels[i + 1],
            self.pixels[i + 2],
            self.pixels[i + 3],
        ]
    }

    pub fn set_pixel(&mut self, col: u32, row: u32, color: Rgba) {
        let i = (row as usize * self.width_px as usize + col as usize) * 4;
        self.pixels[i..i + 4].copy_from_slice(&color);
    }

    /// Pixels with non-zero alpha.
    pub fn painted_count(&self) -> usize {
        self.pixels.chunks_exact(4).filter(|p| p[3] != 0).count()
    }

    pub fn count_color(&self, color: Rgba) -> usize {
        self.pixels.chunks_exact(4).filter(|p| *p == color).count()
    }

    fn col_f(&self, lon: f64) -> f64 {
        (lon - self.extent.min_lon) / (self.extent.max_lon - self.extent.min_lon) * f64::from(self.width_px)
    }

    fn row_f(&self, lat: f64) -> f64 {
        (self.extent.max_lat - lat) / (self.extent.max_lat - self.extent.min_lat) * f64::from(self.height_px)
    }

    fn same_grid(&self, other: &RasterLayer) -> bool {
        self.width_px == other.width_px && self.height_px == other.height_px && self.extent == other.extent
    }
}

/// Fills one polygon (outer ring and holes, even-odd) with `color`.
fn fill_polygon(layer: &mut RasterLayer, poly: &PolygonShape, color: Rgba) {
    let edges: Vec<((f64, f64), (f64, f64))> = poly
        .rings()
        .flat_map(|r| {
            r.points()
                .windows(2)
                .map(|w| {
                    (
                        (layer.col_f(w[0].lon()), layer.row_f(w[0].lat())),
                        (layer.col_f(w[1].lon()), layer.row_f(w[1].lat())),
                    )
                })
                .collect::<Vec<_>>()
        })
        .collect();
    let (mut top, mut bottom) = (f64::INFINITY, f64::NEG_INFINITY);
    for &((_, y0), (_, y1)) in &edges {
        top = top.min(y0.min(y1));
        bottom = bottom.max(y0.max(y1));
    }
    if top >= bottom {
        return;
    }
    let h = layer.height_px as i64;
    let w = layer.width_px as i64;
    let first_row = ((top - 0.5).ceil() as i64).clamp(0, h);
    let last_row = ((bottom - 0.5).ceil() as i64).clamp(0, h);
    let mut xs = Vec::new();
    for row in first_row..last_row {
        let yc = row as f64 + 0.5;
        xs.clear();
        for &((x0, y0), (x1, y1)) in &edges {
            // half-open in y so a vertex on the scanline is counted once
            if (y0 <= yc && yc < y1) || (y1 <= yc && yc < y0) {
                xs.push(x0 + (yc - y0) / (y1 - y0) * (x1 - x0));
            }
        }
        xs.sort_by(f64::total_cmp);
        for pair in xs.chunks_exact(2) {
            let c0 = ((pair[0] - 0.5).ceil() as i64).clamp(0, w);
            let c1 = ((pair[1] - 0.5).ceil() as i64).clamp(0, w);
            for col in c0..c1 {
                layer.set_pixel(col as u32, row as u32, color);
            }
        }
    }
}

/// Paints every pixel crossed by the polyline.
fn stroke_polyline(layer: &mut RasterLayer, points: &[GeoPoint], color: Rgba) {
    let mapped: Vec<(f64, f64)> = points
        .iter()
        .map(|p| (layer.col_f(p.lon()), layer.row_f(p.lat())))
        .collect();
    let w = f64::from(layer.width_px);
    let h = f64::from(layer.height_px);
    for seg in mapped.windows(2) {
        let ((x0, y0), (x1, y1)) = (seg[0], seg[1]);
        let steps = ((x1 - x0).abs().max((y1 - y0).abs()) * 2.0).ceil().clamp(1.0, 1e6) as usize;
        for i in 0..=steps {
            let t = i as f64 / steps as f64;
            let (x, y) = (x0 + t * (x1 - x0), y0 + t * (y1 - y0));
            if x >= 0.0 && x < w && y >= 0.0 && y < h {
                layer.set_pixel(x as u32, y as u32, color);
            }
        }
    }
}

/// Rasterizes polygons over `extent`. A pixel takes `color` when its
/// centre is inside any polygon; all other pixels stay transparent.
pub fn rasterize(
    geoms: &[PolygonShape],
    extent: BBox,
    width_px: u32,
    height_px: u32,
    color: Rgba,
) -> Result<RasterLayer> {
    let mut layer = RasterLayer::transparent(extent, width_px, height_px)?;
    for poly in geoms {
        fill_polygon(&mut layer, poly, color);
    }
    Ok(layer)
}

/// Like [`rasterize`], but takes feature geometries; polylines are drawn
/// one pixel wide.
pub fn rasterize_features<'a>(
    geoms: impl IntoIterator<Item = &'a FeatureGeometry>,
    extent: BBox,
    width_px: u32,
    height_px: u32,
    color: Rgba,
) -> Result<RasterLayer> {
    let mut layer = RasterLayer::transparent(extent, width_px, height_px)?;
    for g in geoms {
        match g {
            FeatureGeometry::Polyline(pts) => stroke_polyline(&mut layer, pts, color),
            _ => {
                for poly in g.polygons() {
                    fill_polygon(&mut layer, poly, color);
                }
            }
        }
    }
    Ok(layer)
}

fn blend_pixel(base: &[u8], over: &[u8]) -> Rgba {
    match over[3] {
        0 => [base[0], base[1], base[2], base[3]],
        255 => [over[0], over[1], over[2], over[3]],
        oa => {
            let sa = f64::from(oa) / 255.0;
            let da = f64::from(base[3]) / 255.0;
            let out_a = sa + da * (1.0 - sa);
            let mut out = [0u8; 4];
            for c in 0..3 {
                let v = (f64::from(over[c]) * sa + f64::from(base[c]) * da * (1.0 - sa)) / out_a;
                out[c] = v.round().clamp(0.0, 255.0) as u8;
            }
            out[3] = (out_a * 255.0).round().clamp(0.0, 255.0) as u8;
            out
        }
    }
}

/// Source-over blend of `overlay` onto `base` (straight alpha).
pub fn composite(base: &RasterLayer, overlay: &RasterLayer) -> Result<RasterLayer> {
    if !base.same_grid(overlay) {
        return Err(Error::LayerMismatch);
    }
    let mut out = base.clone();
    for (dst, src) in out.pixels.chunks_exact_mut(4).zip(overlay.pixels.chunks_exact(4)) {
        let px = blend_pixel(dst, src);
        dst.copy_from_slice(&px);
    }
    Ok(out)
}

/// Encodes the layer as an 8-bit RGBA PNG.
pub fn export_png(layer: &RasterLayer) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    {
        let mut enc = png::Encoder::new(&mut out, layer.width_px, layer.height_px);
        enc.set_color(png::ColorType::Rgba);
        enc.set_depth(png::BitDepth::Eight);
        let mut w = enc.write_header().map_err(|e| Error::Png(e.to_string()))?;
        w.write_image_data(&layer.pixels)
            .map_err(|e| Error::Png(e.to_string()))?;
        w.finish().map_err(|e| Error::Png(e.to_string()))?;
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TickLayers {
    pub reference: RasterLayer,
    pub obstacles: RasterLayer,
    pub open_area: RasterLayer,
    pub uav: RasterLayer,
}

impl TickLayers {
    /// Background, open area, reference, obstacles, then the UAV marker.
    pub fn composite(&self, background: Rgba) -> Result<RasterLayer> {
        let base = RasterLayer::filled(
            self.reference.extent,
            self.reference.width_px,
            self.reference.height_px,
            background,
        )?;
        [&self.open_area, &self.reference, &self.obstacles, &self.uav]
            .into_iter()
            .try_fold(base, |acc, layer| composite(&acc, layer))
    }
}

/// Renders one tick over the zone's bounding square at `config.raster_px`.
pub fn render_tick_layers(
    snapshot: &TickSnapshot,
    store: &FeatureStore,
    scheme: &ColorScheme,
    config: &FenceConfig,
) -> Result<TickLayers> {
    let extent = snapshot.zone.bbox();
    let px = config.raster_px;

    let in_extent = store.query_bbox(&extent);
    let reference = rasterize_features(in_extent.iter().map(|f| &f.geometry), extent, px, px, scheme.reference)?;

    let obstacle_geoms: Vec<&FeatureGeometry> = snapshot
        .obstacles_in_zone
        .iter()
        .filter_map(|id| store.get(*id))
        .map(|f| &f.geometry)
        .collect();
    let obstacles = rasterize_features(obstacle_geoms, extent, px, px, scheme.obstacle)?;

    let mut open_area = rasterize(&[snapshot.zone.polygon()], extent, px, px, scheme.open_area)?;
    for (dst, ob) in open_area
        .pixels
        .chunks_exact_mut(4)
        .zip(obstacles.pixels.chunks_exact(4))
    {
        if ob[3] != 0 {
            dst.copy_from_slice(&TRANSPARENT);
        }
    }

    let mut uav = RasterLayer::transparent(extent, px, px)?;
    let cx = uav.col_f(snapshot.uav.position.lon());
    let cy = uav.row_f(snapshot.uav.position.lat());
    let r = (f64::from(px) * 0.01).max(1.0);
    for row in 0..px {
        for col in 0..px {
            let dx = f64::from(col) + 0.5 - cx;
            let dy = f64::from(row) + 0.5 - cy;
            if dx * dx + dy * dy <= r * r {
                uav.set_pixel(col, row, scheme.uav_marker);
            }
        }
    }

    Ok(TickLayers {
        reference,
        obstacles,
        open_area,
        uav,
    })
}
