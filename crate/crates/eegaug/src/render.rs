//! Grayscale heatmaps of TFRs: frequency rows bottom-up, time columns left
//! to right.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use eegaug_core::data::MONTAGE;
use eegaug_core::wavelet::{Normalization, Tfr};

use crate::error::{io, Error, Result};

/// 8-bit intensities, row 0 at the top (highest frequency).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Heatmap {
    pub title: String,
    pub rows: usize,
    pub cols: usize,
    pub pixels: Vec<u8>,
}

fn channel_name(tfr: &Tfr, c: usize) -> String {
    if tfr.n_channels() == MONTAGE.len() {
        MONTAGE[c].to_string()
    } else {
        format!("ch{c}")
    }
}

/// Unit-range maps use the fixed `[−1, 1]` scale; raw magnitudes use
/// `[0, max]` of the whole sample.
pub fn heatmap(tfr: &Tfr, channel: usize) -> Result<Heatmap> {
    let [nc, nf, nt] = tfr.shape();
    if channel >= nc {
        return Err(Error::Invalid(format!("channel {channel} of a {nc}-channel TFR")));
    }
    let (lo, hi) = match tfr.normalization {
        Normalization::UnitRange { .. } => (-1.0, 1.0),
        Normalization::None => (0.0, tfr.values().iter().cloned().fold(0.0, f64::max)),
    };
    let level = |v: f64| {
        if hi > lo {
            (255.0 * ((v - lo) / (hi - lo)).clamp(0.0, 1.0)).round() as u8
        } else {
            0
        }
    };
    let mut pixels = Vec::with_capacity(nf * nt);
    for f in (0..nf).rev() {
        pixels.extend((0..nt).map(|t| level(tfr.get(channel, f, t))));
    }
    Ok(Heatmap {
        title: channel_name(tfr, channel),
        rows: nf,
        cols: nt,
        pixels,
    })
}

/// Binary PGM of `(rows·scale) × (cols·scale)` pixels.
pub fn pgm_bytes(map: &Heatmap, scale: usize) -> Vec<u8> {
    let (h, w) = (map.rows * scale, map.cols * scale);
    let mut out = format!("P5\n{w} {h}\n255\n").into_bytes();
    for y in 0..h {
        for x in 0..w {
            out.push(map.pixels[(y / scale) * map.cols + x / scale]);
        }
    }
    out
}

/// SVG grid of heatmap panels, one `<rect>` per cell. Each inner vector is a
/// row of panels.
pub fn svg_grid(grid: &[Vec<Heatmap>], scale: usize) -> String {
    const GAP: usize = 8;
    const LABEL: usize = 14;
    let panel_w = grid.iter().flatten().map(|m| m.cols * scale).max().unwrap_or(0);
    let panel_h = grid.iter().flatten().map(|m| m.rows * scale).max().unwrap_or(0);
    let ncols = grid.iter().map(Vec::len).max().unwrap_or(0);
    let width = ncols * (panel_w + GAP);
    let height = grid.len() * (panel_h + LABEL + GAP);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" shape-rendering="crispEdges">"#
    );
    for (r, row) in grid.iter().enumerate() {
        for (c, map) in row.iter().enumerate() {
            let x0 = c * (panel_w + GAP);
            let y0 = r * (panel_h + LABEL + GAP);
            let _ = writeln!(
                s,
                r#"<text x="{x0}" y="{}" font-family="sans-serif" font-size="11">{}</text>"#,
                y0 + LABEL - 3,
                map.title
            );
            for y in 0..map.rows {
                for x in 0..map.cols {
                    let v = map.pixels[y * map.cols + x];
                    let _ = writeln!(
                        s,
                        r#"<rect x="{}" y="{}" width="{scale}" height="{scale}" fill="rgb({v},{v},{v})"/>"#,
                        x0 + x * scale,
                        y0 + LABEL + y * scale
                    );
                }
            }
        }
    }
    s.push_str("</svg>\n");
    s
}

fn channel_maps(tfr: &Tfr, prefix: &str) -> Result<Vec<Heatmap>> {
    (0..tfr.n_channels())
        .map(|c| {
            let mut m = heatmap(tfr, c)?;
            if !prefix.is_empty() {
                m.title = format!("{prefix} {}", m.title);
            }
            Ok(m)
        })
        .collect()
}

fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(io(path))
}

/// Writes `sample` to `path`: `.svg` gives one image with a panel per
/// channel; anything else gives one PGM per channel, named
/// `<stem>_<channel>.pgm` (or `path` itself for a single channel). Returns the
/// files written.
pub fn render_tfr(sample: &Tfr, path: &Path, scale: usize) -> Result<Vec<PathBuf>> {
    if scale == 0 {
        return Err(Error::Invalid("scale must be at least 1".into()));
    }
    let maps = channel_maps(sample, "")?;
    if path.extension().is_some_and(|e| e == "svg") {
        write(path, svg_grid(&[maps], scale).as_bytes())?;
        return Ok(vec![path.to_path_buf()]);
    }
    if maps.len() == 1 {
        write(path, &pgm_bytes(&maps[0], scale))?;
        return Ok(vec![path.to_path_buf()]);
    }
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("tfr");
    let mut written = Vec::new();
    for m in &maps {
        let p = path.with_file_name(format!("{stem}_{}.pgm", m.title));
        write(&p, &pgm_bytes(m, scale))?;
        written.push(p);
    }
    Ok(written)
}

/// Raw sample on the top row, artificial sample below, as one SVG.
pub fn render_comparison(raw: &Tfr, artificial: &Tfr, path: &Path, scale: usize) -> Result<()> {
    if scale == 0 {
        return Err(Error::Invalid("scale must be at least 1".into()));
    }
    let grid = [channel_maps(raw, "raw")?, channel_maps(artificial, "artificial")?];
    write(path, svg_grid(&grid, scale).as_bytes())
}
