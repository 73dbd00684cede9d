use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::eval::{GroundTruth, TrackingResult};
use crate::geometry::LabeledGrid;
use crate::io::pgm::{read_pgm, write_pgm, Pgm};
use crate::io::text::{format_markers, parse_markers, read_text, read_tracks, write_text, write_tracks};
use crate::proposals::Frame;

/// Frames and, when a `gt/` directory exists, their annotation.
#[derive(Clone, Debug)]
pub struct Dataset {
    pub frames: Vec<Frame>,
    pub gt: Option<GroundTruth>,
}

/// `t000.pgm`, `t001.pgm`, ... (three digits minimum).
pub fn frame_name(t: usize) -> String {
    format!("t{t:03}.pgm")
}

fn frame_number(name: &str) -> Option<usize> {
    let digits = name.strip_prefix('t')?.strip_suffix(".pgm")?;
    if digits.len() < 3 || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let t: usize = digits.parse().ok()?;
    (frame_name(t) == name).then_some(t)
}

/// Numbered frame files in `dir`, which must run from 0 without gaps.
fn numbered(dir: &Path, contiguous: bool) -> Result<BTreeMap<usize, PathBuf>> {
    let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut files = BTreeMap::new();
    for entry in entries {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        if let Some(t) = entry.file_name().to_str().and_then(frame_number) {
            files.insert(t, entry.path());
        }
    }
    if contiguous {
        if let Some((i, _)) = files.keys().enumerate().find(|(i, t)| i != *t) {
            return Err(Error::FrameMismatch(format!(
                "{}: frame {} is missing",
                dir.display(),
                frame_name(i)
            )));
        }
    }
    Ok(files)
}

fn check_dims(path: &Path, w: usize, h: usize, expected: (usize, usize)) -> Result<()> {
    if (w, h) != expected {
        return Err(Error::FrameMismatch(format!(
            "{} is {w}x{h}, expected {}x{}",
            path.display(),
            expected.0,
            expected.1
        )));
    }
    Ok(())
}

pub fn read_frames(dir: impl AsRef<Path>) -> Result<Vec<Frame>> {
    let dir = dir.as_ref();
    let mut frames: Vec<Frame> = Vec::new();
    for (t, path) in numbered(dir, true)? {
        let pgm = read_pgm(&path)?;
        if let Some(first) = frames.first() {
            check_dims(&path, pgm.width, pgm.height, (first.width, first.height))?;
        }
        frames.push(pgm.to_frame(t));
    }
    Ok(frames)
}

/// 16-bit frames.
pub fn write_frames(dir: impl AsRef<Path>, frames: &[Frame]) -> Result<()> {
    let dir = dir.as_ref();
    create_dir(dir)?;
    frames
        .iter()
        .try_for_each(|f| write_pgm(dir.join(frame_name(f.t)), &Pgm::from_frame(f, u16::MAX)))
}

/// Label grids from `seg/`; any subset of frames may be present.
fn read_grids(dir: &Path, num_frames: usize, dims: (usize, usize)) -> Result<BTreeMap<usize, LabeledGrid>> {
    if !dir.is_dir() {
        return Ok(BTreeMap::new());
    }
    let mut grids = BTreeMap::new();
    for (t, path) in numbered(dir, false)? {
        if t >= num_frames {
            return Err(Error::FrameMismatch(format!(
                "{} is beyond the {num_frames} frames",
                path.display()
            )));
        }
        let pgm = read_pgm(&path)?;
        check_dims(&path, pgm.width, pgm.height, dims)?;
        grids.insert(t, pgm.to_labels());
    }
    Ok(grids)
}

fn write_grids<'a>(dir: &Path, grids: impl IntoIterator<Item = (usize, &'a LabeledGrid)>) -> Result<()> {
    create_dir(dir)?;
    grids
        .into_iter()
        .try_for_each(|(t, g)| write_pgm(dir.join(frame_name(t)), &Pgm::from_labels(g)?))
}

pub(crate) fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// `gt/markers.csv` and `gt/tracks.txt` (both required) plus optional
/// `gt/seg/tNNN.pgm` label grids.
pub fn read_ground_truth(dir: impl AsRef<Path>, num_frames: usize, width: usize, height: usize) -> Result<GroundTruth> {
    let dir = dir.as_ref();
    let markers_path = dir.join("markers.csv");
    let markers =
        parse_markers(&read_text(&markers_path)?, num_frames).map_err(|e| crate::io::pgm::in_file(&markers_path, e))?;
    let gt = GroundTruth {
        width,
        height,
        markers,
        label_grids: read_grids(&dir.join("seg"), num_frames, (width, height))?,
        tracks: read_tracks(dir.join("tracks.txt"))?,
    };
    gt.validate()?;
    Ok(gt)
}

pub fn write_ground_truth(dir: impl AsRef<Path>, gt: &GroundTruth) -> Result<()> {
    let dir = dir.as_ref();
    create_dir(dir)?;
    write_text(&dir.join("markers.csv"), &format_markers(&gt.markers))?;
    write_tracks(dir.join("tracks.txt"), &gt.tracks)?;
    if !gt.label_grids.is_empty() {
        write_grids(&dir.join("seg"), gt.label_grids.iter().map(|(&t, g)| (t, g)))?;
    }
    Ok(())
}

pub fn read_dataset(dir: impl AsRef<Path>) -> Result<Dataset> {
    let dir = dir.as_ref();
    if !dir.is_dir() {
        return Err(Error::io(
            dir,
            std::io::Error::new(std::io::ErrorKind::NotFound, "dataset directory not found"),
        ));
    }
    let frames = read_frames(dir)?;
    let gt_dir = dir.join("gt");
    let gt = if gt_dir.is_dir() {
        let (w, h) = frames.first().map_or((0, 0), |f| (f.width, f.height));
        Some(read_ground_truth(&gt_dir, frames.len(), w, h)?)
    } else {
        None
    };
    Ok(Dataset { frames, gt })
}

pub fn write_dataset(dir: impl AsRef<Path>, frames: &[Frame], gt: Option<&GroundTruth>) -> Result<()> {
    let dir = dir.as_ref();
    write_frames(dir, frames)?;
    if let Some(gt) = gt {
        write_ground_truth(dir.join("gt"), gt)?;
    }
    Ok(())
}

/// `tracks.txt` plus one 16-bit label grid per frame under `seg/`.
pub fn write_result(dir: impl AsRef<Path>, result: &TrackingResult) -> Result<()> {
    let dir = dir.as_ref();
    create_dir(dir)?;
    write_tracks(dir.join("tracks.txt"), &result.tracks)?;
    write_grids(&dir.join("seg"), result.label_grids().iter().enumerate())
}

pub fn read_result(dir: impl AsRef<Path>) -> Result<TrackingResult> {
    let dir = dir.as_ref();
    let tracks = read_tracks(dir.join("tracks.txt"))?;
    let seg = dir.join("seg");
    let mut grids: Vec<LabeledGrid> = Vec::new();
    for (_, path) in numbered(&seg, true)? {
        let pgm = read_pgm(&path)?;
        if let Some(first) = grids.first() {
            check_dims(&path, pgm.width, pgm.height, (first.width, first.height))?;
        }
        grids.push(pgm.to_labels());
    }
    TrackingResult::from_label_grids(tracks, &grids)
}
