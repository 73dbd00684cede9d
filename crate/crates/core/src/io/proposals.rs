use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Mask;
use crate::io::json::{check_header, VERSION};
use crate::io::pgm::in_file;
use crate::io::text::{read_text, write_text};
use crate::proposals::Proposal;

pub const PROPOSALS_FORMAT: &str = "proposals";

/// Run lengths of the mask's bounding box in row-major order, alternating
/// background and foreground and starting with background (so a mask whose
/// first pixel is set starts with 0). The runs sum to `w * h`.
pub fn rle_encode(bits: &[bool]) -> Vec<u32> {
    let mut runs = Vec::new();
    let mut current = false;
    let mut len = 0u32;
    for &b in bits {
        if b != current {
            runs.push(len);
            current = b;
            len = 0;
        }
        len += 1;
    }
    if !bits.is_empty() {
        runs.push(len);
    }
    runs
}

/// Inverse of [`rle_encode`]; only the first run may be empty.
pub fn rle_decode(runs: &[u32], n: usize) -> std::result::Result<Vec<bool>, String> {
    let mut bits = Vec::with_capacity(n);
    for (i, &r) in runs.iter().enumerate() {
        if r == 0 && i > 0 {
            return Err(format!("run {i} is empty"));
        }
        if bits.len() + r as usize > n {
            return Err(format!("runs cover more than the {n} box pixels"));
        }
        bits.extend(std::iter::repeat_n(i % 2 == 1, r as usize));
    }
    if bits.len() != n {
        return Err(format!("runs cover {} of {n} box pixels", bits.len()));
    }
    Ok(bits)
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Record {
    id: u64,
    t: usize,
    bbox: [i64; 4],
    score: f64,
    mask_rle: Vec<u32>,
}

#[derive(Serialize)]
struct Header {
    format: &'static str,
    version: u32,
}

/// JSON lines: a `{"format": "proposals", "version": 1}` header, then one
/// object per proposal in the given order.
pub fn format_proposals(props: &[Proposal]) -> Result<String> {
    let mut s = serde_json::to_string(&Header {
        format: PROPOSALS_FORMAT,
        version: VERSION,
    })?;
    s.push('\n');
    for p in props {
        let m = &p.mask;
        s.push_str(&serde_json::to_string(&Record {
            id: p.id,
            t: p.t,
            bbox: [m.x0() as i64, m.y0() as i64, m.width() as i64, m.height() as i64],
            score: p.score,
            mask_rle: rle_encode(m.bits()),
        })?);
        s.push('\n');
    }
    Ok(s)
}

pub fn parse_proposals(text: &str) -> Result<Vec<Proposal>> {
    let mut offset = 0;
    let mut out = Vec::new();
    let mut ids = BTreeSet::new();
    let mut header = false;
    for (i, raw) in text.split_inclusive('\n').enumerate() {
        let at = offset;
        offset += raw.len();
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let bad = |what: String| Error::format(format!("line {}: {what}", i + 1), at);
        if !header {
            check_header(line, PROPOSALS_FORMAT).map_err(|e| match e {
                Error::Format { what, .. } => bad(what),
                e => e,
            })?;
            header = true;
            continue;
        }
        let r: Record = serde_json::from_str(line).map_err(|e| bad(e.to_string()))?;
        let [x, y, w, h] = r.bbox;
        let coord_ok = |v: i64| i32::try_from(v).is_ok();
        if !(coord_ok(x) && coord_ok(y) && w > 0 && h > 0 && w <= u32::MAX as i64 && h <= u32::MAX as i64) {
            return Err(bad(format!("invalid bbox {:?}", r.bbox)));
        }
        let n = (w as u64)
            .checked_mul(h as u64)
            .filter(|&n| n <= (1 << 32))
            .ok_or_else(|| bad(format!("bbox {:?} is too large", r.bbox)))? as usize;
        if !(0.0..=1.0).contains(&r.score) {
            return Err(bad(format!("score {} outside [0, 1]", r.score)));
        }
        let bits = rle_decode(&r.mask_rle, n).map_err(bad)?;
        if !bits.iter().any(|&b| b) {
            return Err(bad("empty mask".into()));
        }
        if !ids.insert(r.id) {
            return Err(bad(format!("duplicate id {}", r.id)));
        }
        let mask = Mask::new(x as i32, y as i32, w as u32, h as u32, bits).map_err(|e| bad(e.to_string()))?;
        out.push(Proposal::new(r.id, r.t, mask, r.score));
    }
    if !header {
        return Err(Error::format("missing proposals header line", 0));
    }
    Ok(out)
}

pub fn read_proposals(path: impl AsRef<Path>) -> Result<Vec<Proposal>> {
    let path = path.as_ref();
    parse_proposals(&read_text(path)?).map_err(|e| in_file(path, e))
}

pub fn write_proposals(path: impl AsRef<Path>, props: &[Proposal]) -> Result<()> {
    write_text(path.as_ref(), &format_proposals(props)?)
}
