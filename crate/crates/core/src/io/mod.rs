//! File formats: PGM frames and label grids, the dataset layout, track and
//! marker tables, proposal JSON lines, and versioned JSON documents.

mod dataset;
mod json;
mod pgm;
mod proposals;
mod text;

use std::path::Path;

pub use dataset::{
    frame_name, read_dataset, read_frames, read_ground_truth, read_result, write_dataset, write_frames,
    write_ground_truth, write_result, Dataset,
};
pub use json::{from_envelope, read_json, to_envelope, write_json, SUPPORTED_VERSIONS, VERSION};
pub use pgm::{read_pgm, write_pgm, Pgm};
pub use proposals::{format_proposals, parse_proposals, read_proposals, rle_decode, rle_encode, write_proposals};
pub use text::{format_markers, format_tracks, parse_markers, parse_tracks, read_tracks, write_tracks};

use crate::error::Result;
use crate::eval::EvalReport;
use crate::graph::TrackingGraph;
use crate::pipeline::Models;

pub const MODEL_FORMAT: &str = "model";
pub const GRAPH_FORMAT: &str = "graph";
pub const REPORT_FORMAT: &str = "report";

pub fn write_model(path: impl AsRef<Path>, models: &Models) -> Result<()> {
    write_json(path, MODEL_FORMAT, models)
}

/// Reads and validates the three forests.
pub fn read_model(path: impl AsRef<Path>) -> Result<Models> {
    let path = path.as_ref();
    let m: Models = read_json(path, MODEL_FORMAT)?;
    for f in [&m.proposal, &m.moves, &m.mitosis] {
        f.validate()?;
    }
    Ok(m)
}

pub fn write_graph(path: impl AsRef<Path>, g: &TrackingGraph) -> Result<()> {
    write_json(path, GRAPH_FORMAT, g)
}

pub fn read_graph(path: impl AsRef<Path>) -> Result<TrackingGraph> {
    let g: TrackingGraph = read_json(path, GRAPH_FORMAT)?;
    g.validate()?;
    Ok(g)
}

pub fn write_report(path: impl AsRef<Path>, report: &EvalReport) -> Result<()> {
    write_json(path, REPORT_FORMAT, report)
}

pub fn read_report(path: impl AsRef<Path>) -> Result<EvalReport> {
    read_json(path, REPORT_FORMAT)
}
