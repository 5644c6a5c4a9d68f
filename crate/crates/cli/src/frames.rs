//! Detector frame files: structured text, one frame per file.
//!
//! Format (fixed field order; floats printed in Rust's shortest
//! round-tripping decimal form, so write→read→write is bit-exact):
//!
//! ```text
//! seqweak-frame v1
//! n_pixels 32
//! pixel_pitch 0.25
//! origin_x -4
//! origin_y -4
//! dark_count_prob 0
//! n_gates 0
//! seed 7
//! counts
//! 0 0 1 ...      (n_pixels integers per row, n_pixels rows, row-major)
//! ```
//!
//! The simulated photon budget is deliberately *not* stored: it is ground
//! truth of the simulation, not something a real detector reports, so
//! ingested frames always carry `n_signal_photons = None`.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use seqweak::detector::{DetectionFrame, DetectorConfig};

use crate::{HarnessError, Result};

const MAGIC: &str = "seqweak-frame v1";

/// Renders one frame in the documented format.
pub fn render_frame(frame: &DetectionFrame) -> String {
    let c = &frame.config;
    let mut out = String::new();
    let _ = writeln!(out, "{MAGIC}");
    let _ = writeln!(out, "n_pixels {}", c.n_pixels);
    let _ = writeln!(out, "pixel_pitch {}", c.pixel_pitch);
    let _ = writeln!(out, "origin_x {}", c.origin_offset.0);
    let _ = writeln!(out, "origin_y {}", c.origin_offset.1);
    let _ = writeln!(out, "dark_count_prob {}", c.dark_count_prob);
    let _ = writeln!(out, "n_gates {}", c.n_gates);
    let _ = writeln!(out, "seed {}", c.seed);
    let _ = writeln!(out, "counts");
    for row in frame.counts().chunks(c.n_pixels) {
        let mut line = String::new();
        for (i, count) in row.iter().enumerate() {
            if i > 0 {
                line.push(' ');
            }
            let _ = write!(line, "{count}");
        }
        let _ = writeln!(out, "{line}");
    }
    out
}

fn bad(msg: impl Into<String>) -> HarnessError {
    HarnessError::FrameParse(msg.into())
}

fn header_value<'a>(line: Option<&'a str>, key: &str) -> Result<&'a str> {
    let line = line.ok_or_else(|| bad(format!("missing header line {key:?}")))?;
    line.strip_prefix(key)
        .and_then(|rest| rest.strip_prefix(' '))
        .ok_or_else(|| bad(format!("expected header line {key:?}, found {line:?}")))
}

fn parse_num<T: core::str::FromStr>(s: &str, key: &str) -> Result<T> {
    s.parse()
        .map_err(|_| bad(format!("invalid value {s:?} for {key}")))
}

/// Parses one frame from the documented format.
pub fn parse_frame(text: &str) -> Result<DetectionFrame> {
    let mut lines = text.lines();
    match lines.next() {
        Some(MAGIC) => {}
        other => return Err(bad(format!("missing magic line, found {other:?}"))),
    }
    let n_pixels: usize = parse_num(header_value(lines.next(), "n_pixels")?, "n_pixels")?;
    let pixel_pitch: f64 = parse_num(header_value(lines.next(), "pixel_pitch")?, "pixel_pitch")?;
    let origin_x: f64 = parse_num(header_value(lines.next(), "origin_x")?, "origin_x")?;
    let origin_y: f64 = parse_num(header_value(lines.next(), "origin_y")?, "origin_y")?;
    let dark_count_prob: f64 = parse_num(
        header_value(lines.next(), "dark_count_prob")?,
        "dark_count_prob",
    )?;
    let n_gates: u64 = parse_num(header_value(lines.next(), "n_gates")?, "n_gates")?;
    let seed: u64 = parse_num(header_value(lines.next(), "seed")?, "seed")?;
    match lines.next() {
        Some("counts") => {}
        other => {
            return Err(bad(format!(
                "expected \"counts\" separator, found {other:?}"
            )))
        }
    }
    let mut counts = Vec::with_capacity(n_pixels * n_pixels);
    for line in lines {
        if line.trim().is_empty() {
            continue;
        }
        for token in line.split_whitespace() {
            counts.push(parse_num::<u64>(token, "counts")?);
        }
    }
    let config = DetectorConfig {
        n_pixels,
        pixel_pitch,
        origin_offset: (origin_x, origin_y),
        dark_count_prob,
        n_gates,
        seed,
    };
    DetectionFrame::new(config, counts, None).map_err(|e| bad(format!("inconsistent frame: {e}")))
}

/// File name for the `index`-th frame of a dump.
pub fn frame_file_name(index: usize) -> String {
    format!("frame_{index:04}.txt")
}

/// Writes every frame into `dir` as `frame_0000.txt`, `frame_0001.txt`, …
/// and returns the paths.
pub fn save_frames(dir: &Path, frames: &[DetectionFrame]) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut paths = Vec::with_capacity(frames.len());
    for (i, frame) in frames.iter().enumerate() {
        let path = dir.join(frame_file_name(i));
        std::fs::write(&path, render_frame(frame))?;
        paths.push(path);
    }
    Ok(paths)
}

/// Loads every `*.txt` frame file in `dir`, sorted by file name.
pub fn load_frames(dir: &Path) -> Result<Vec<DetectionFrame>> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|ext| ext == "txt"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(bad(format!("no .txt frame files in {}", dir.display())));
    }
    paths
        .iter()
        .map(|p| {
            let text = std::fs::read_to_string(p)?;
            parse_frame(&text).map_err(|e| bad(format!("{}: {e}", p.display())))
        })
        .collect()
}
