//! Frame directories and CSV artifacts.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use dstmd::engine::Frame;
use image::codecs::pnm::{PnmEncoder, PnmSubtype, SampleEncoding};
use image::{ExtendedColorType, ImageEncoder};
use serde::Serialize;

use crate::error::{CliError, Result};

const FRAME_EXTENSIONS: [&str; 8] = ["pgm", "pnm", "ppm", "pbm", "png", "bmp", "jpg", "jpeg"];

pub fn frame_name(index: usize) -> String {
    format!("frame_{index:06}.pgm")
}

/// Image files in `dir`, in lexicographic order.
pub fn list_frames(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut paths = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(CliError::io(dir))? {
        let path = entry.map_err(CliError::io(dir))?.path();
        let known = path
            .extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| FRAME_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()));
        if known && path.is_file() {
            paths.push(path);
        }
    }
    paths.sort();
    Ok(paths)
}

/// Loads an image as luminance; colour images use the standard weighting.
pub fn load_frame(path: &Path) -> Result<Frame> {
    let img = image::open(path)
        .map_err(|source| CliError::Image { path: path.to_path_buf(), source })?
        .to_luma8();
    Ok(Frame::from_luma8(img.width() as usize, img.height() as usize, img.as_raw())?)
}

/// Writes a binary 8-bit PGM, rounding and clamping to 0..=255.
pub fn write_pgm(path: &Path, frame: &Frame) -> Result<()> {
    let bytes: Vec<u8> = frame.pixels().iter().map(|v| v.round().clamp(0.0, 255.0) as u8).collect();
    let file = File::create(path).map_err(CliError::io(path))?;
    PnmEncoder::new(BufWriter::new(file))
        .with_subtype(PnmSubtype::Graymap(SampleEncoding::Binary))
        .write_image(&bytes, frame.width() as u32, frame.height() as u32, ExtendedColorType::L8)
        .map_err(|source| CliError::Image { path: path.to_path_buf(), source })
}

pub fn write_csv<R: Serialize>(path: &Path, rows: impl IntoIterator<Item = R>) -> Result<()> {
    let err = |source| CliError::Csv { path: path.to_path_buf(), source };
    let mut w = csv::Writer::from_path(path).map_err(err)?;
    for row in rows {
        w.serialize(row).map_err(err)?;
    }
    w.flush().map_err(CliError::io(path))
}

/// Header-only CSV, for artifacts that came out empty.
pub fn write_header(path: &Path, header: &[&str]) -> Result<()> {
    let err = |source| CliError::Csv { path: path.to_path_buf(), source };
    let mut w = csv::Writer::from_path(path).map_err(err)?;
    w.write_record(header).map_err(err)?;
    w.flush().map_err(CliError::io(path))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let file = File::create(path).map_err(CliError::io(path))?;
    serde_json::to_writer_pretty(BufWriter::new(file), value)
        .map_err(|source| CliError::Json { path: path.to_path_buf(), source })
}

pub fn degrees(radians: Option<f64>) -> Option<f64> {
    radians.map(f64::to_degrees)
}
