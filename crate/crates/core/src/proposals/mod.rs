//! Cell candidates: frames, proposals, classical generators, and the pairwise
//! conflict relation used by the selection program.

mod conflict;
mod log_blob;
mod threshold;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use conflict::{conflicts, ConflictMatrix};
pub use log_blob::{log_blob_proposals, LogBlobConfig};
pub use threshold::{multi_threshold_proposals, otsu_threshold, ThresholdConfig};

use crate::error::{Error, Result};
use crate::geometry::{BBox, Mask};
use crate::par;

/// One grayscale image of a sequence, intensities normalised to `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Frame {
    pub t: usize,
    pub width: usize,
    pub height: usize,
    pub data: Vec<f64>,
}

impl Frame {
    pub fn new(t: usize, width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::InvalidArgument(format!(
                "frame {t}: {} samples for a {width}x{height} image",
                data.len()
            )));
        }
        if let Some(v) = data.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::InvalidArgument(format!(
                "frame {t}: intensity {v} outside [0, 1]"
            )));
        }
        Ok(Frame { t, width, height, data })
    }

    pub fn zeros(t: usize, width: usize, height: usize) -> Self {
        Frame {
            t,
            width,
            height,
            data: vec![0.0; width * height],
        }
    }

    #[inline]
    pub fn at(&self, x: i32, y: i32) -> f64 {
        self.data[y as usize * self.width + x as usize]
    }

    #[inline]
    pub fn in_bounds(&self, x: i32, y: i32) -> bool {
        x >= 0 && y >= 0 && (x as usize) < self.width && (y as usize) < self.height
    }
}

/// A candidate segmentation of one cell in one frame.
#[derive(Clone, Debug, PartialEq)]
pub struct Proposal {
    pub id: u64,
    pub t: usize,
    pub mask: Mask,
    /// Generator confidence in `[0, 1]`.
    pub score: f64,
}

impl Proposal {
    /// Builds a proposal; the mask is stored in tight form.
    pub fn new(id: u64, t: usize, mask: Mask, score: f64) -> Self {
        let mask = if mask.is_tight() { mask } else { mask.tighten() };
        Proposal { id, t, mask, score }
    }

    pub fn bbox(&self) -> BBox {
        self.mask.bbox()
    }

    pub fn area(&self) -> usize {
        self.mask.area()
    }

    pub fn centroid(&self) -> (f64, f64) {
        self.mask.centroid()
    }
}

/// Area bounds shared by the generators.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AreaBounds {
    pub min_area: usize,
    pub max_area: usize,
}

impl Default for AreaBounds {
    fn default() -> Self {
        AreaBounds {
            min_area: 9,
            max_area: 10_000,
        }
    }
}

impl AreaBounds {
    pub fn admits(&self, area: usize) -> bool {
        (self.min_area..=self.max_area).contains(&area)
    }
}

/// Something that turns a frame into candidate masks.
pub trait ProposalGenerator: Sync {
    fn generate(&self, frame: &Frame) -> Vec<Proposal>;
}

impl ProposalGenerator for ThresholdConfig {
    fn generate(&self, frame: &Frame) -> Vec<Proposal> {
        multi_threshold_proposals(frame, self)
    }
}

impl ProposalGenerator for LogBlobConfig {
    fn generate(&self, frame: &Frame) -> Vec<Proposal> {
        log_blob_proposals(frame, self)
    }
}

/// Runs a generator over every frame (frames in parallel) and assigns
/// sequence-unique ids in frame-major order.
pub fn generate_sequence(generator: &dyn ProposalGenerator, frames: &[Frame]) -> Vec<Proposal> {
    let per_frame = par::map(frames, |f| generator.generate(f));
    renumber(per_frame.into_iter().flatten().collect())
}

/// Reassigns ids `0..n` ordered by (frame, previous id).
pub fn renumber(mut props: Vec<Proposal>) -> Vec<Proposal> {
    props.sort_by_key(|p| (p.t, p.id));
    for (i, p) in props.iter_mut().enumerate() {
        p.id = i as u64;
    }
    props
}

/// Proposals grouped by frame index, each group in input order.
pub fn by_frame(props: &[Proposal]) -> BTreeMap<usize, Vec<&Proposal>> {
    let mut out: BTreeMap<usize, Vec<&Proposal>> = BTreeMap::new();
    for p in props {
        out.entry(p.t).or_default().push(p);
    }
    out
}
