use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::LabeledGrid;
use crate::proposals::Frame;

/// A decoded graymap at its source depth.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pgm {
    pub width: usize,
    pub height: usize,
    pub maxval: u16,
    pub samples: Vec<u16>,
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    fn skip_space_and_comments(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while self.bytes.get(self.pos).is_some_and(|&b| b != b'\n' && b != b'\r') {
                    self.pos += 1;
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    /// Decimal integer after optional whitespace and comments.
    fn number(&mut self, what: &str, max: u64) -> Result<u64> {
        self.skip_space_and_comments();
        let start = self.pos;
        let mut v: u64 = 0;
        while let Some(&b) = self.bytes.get(self.pos).filter(|b| b.is_ascii_digit()) {
            v = v
                .checked_mul(10)
                .and_then(|v| v.checked_add((b - b'0') as u64))
                .filter(|&v| v <= max)
                .ok_or_else(|| Error::format(format!("{what} exceeds {max}"), start))?;
            self.pos += 1;
        }
        if self.pos == start {
            return Err(match self.bytes.get(start) {
                None => Error::format(format!("missing {what}: unexpected end of file"), start),
                Some(_) => Error::format(format!("expected {what}"), start),
            });
        }
        Ok(v)
    }
}

impl Pgm {
    pub fn bytes_per_sample(&self) -> usize {
        if self.maxval < 256 {
            1
        } else {
            2
        }
    }

    /// Parses binary (`P5`) or ASCII (`P2`) graymaps; 16-bit samples are big
    /// endian. Exactly one image per file.
    pub fn parse(bytes: &[u8]) -> Result<Pgm> {
        let ascii = match bytes.get(..2) {
            Some(b"P5") => false,
            Some(b"P2") => true,
            _ => return Err(Error::format("not a PGM file: magic must be P5 or P2", 0)),
        };
        let mut c = Cursor { bytes, pos: 2 };
        if !c.bytes.get(2).is_some_and(|b| b.is_ascii_whitespace() || *b == b'#') {
            return Err(Error::format("expected whitespace after magic", 2));
        }
        let width = c.number("width", u32::MAX as u64)? as usize;
        let height = c.number("height", u32::MAX as u64)? as usize;
        let maxval_at = c.pos;
        let maxval = c.number("maxval", 65535)? as u16;
        if width == 0 || height == 0 {
            return Err(Error::format(format!("empty image {width}x{height}"), maxval_at));
        }
        if maxval == 0 {
            return Err(Error::format("maxval must be at least 1", maxval_at));
        }
        let n = width
            .checked_mul(height)
            .ok_or_else(|| Error::format("image dimensions overflow", maxval_at))?;
        let mut pgm = Pgm {
            width,
            height,
            maxval,
            samples: Vec::new(),
        };
        if ascii {
            pgm.samples.reserve(n.min(bytes.len()));
            for _ in 0..n {
                c.skip_space_and_comments();
                let at = c.pos;
                let v = c.number("sample", 65535)?;
                if v > maxval as u64 {
                    return Err(Error::format(format!("sample {v} exceeds maxval {maxval}"), at));
                }
                pgm.samples.push(v as u16);
            }
            c.skip_space_and_comments();
            if c.pos != bytes.len() {
                return Err(Error::format("trailing data after raster", c.pos));
            }
            return Ok(pgm);
        }
        match bytes.get(c.pos) {
            Some(b) if b.is_ascii_whitespace() => c.pos += 1,
            Some(_) => return Err(Error::format("expected one whitespace byte after maxval", c.pos)),
            None => return Err(Error::format("missing raster: unexpected end of file", c.pos)),
        }
        let size = pgm.bytes_per_sample();
        let need = n
            .checked_mul(size)
            .ok_or_else(|| Error::format("image dimensions overflow", maxval_at))?;
        let raster = &bytes[c.pos..];
        if raster.len() < need {
            return Err(Error::format(
                format!("truncated raster: {} of {need} bytes", raster.len()),
                bytes.len(),
            ));
        }
        if raster.len() > need {
            return Err(Error::format("trailing data after raster", c.pos + need));
        }
        pgm.samples = if size == 1 {
            raster.iter().map(|&b| b as u16).collect()
        } else {
            raster
                .chunks_exact(2)
                .map(|p| u16::from_be_bytes([p[0], p[1]]))
                .collect()
        };
        if let Some(i) = pgm.samples.iter().position(|&v| v > maxval) {
            return Err(Error::format(
                format!("sample {} exceeds maxval {maxval}", pgm.samples[i]),
                c.pos + i * size,
            ));
        }
        Ok(pgm)
    }

    /// Binary encoding with a minimal header.
    pub fn to_p5(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n{}\n", self.width, self.height, self.maxval).into_bytes();
        if self.bytes_per_sample() == 1 {
            out.extend(self.samples.iter().map(|&v| v as u8));
        } else {
            out.extend(self.samples.iter().flat_map(|v| v.to_be_bytes()));
        }
        out
    }

    /// ASCII encoding, one row per line.
    pub fn to_p2(&self) -> Vec<u8> {
        let mut out = format!("P2\n{} {}\n{}\n", self.width, self.height, self.maxval);
        for row in self.samples.chunks(self.width) {
            let line: Vec<String> = row.iter().map(u16::to_string).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out.into_bytes()
    }

    /// Intensities `sample / maxval`.
    pub fn to_frame(&self, t: usize) -> Frame {
        let m = self.maxval as f64;
        Frame {
            t,
            width: self.width,
            height: self.height,
            data: self.samples.iter().map(|&v| v as f64 / m).collect(),
        }
    }

    /// Quantises `[0, 1]` intensities to `0..=maxval`, rounding to nearest.
    pub fn from_frame(frame: &Frame, maxval: u16) -> Pgm {
        let m = maxval as f64;
        Pgm {
            width: frame.width,
            height: frame.height,
            maxval,
            samples: frame
                .data
                .iter()
                .map(|&v| (v.clamp(0.0, 1.0) * m).round() as u16)
                .collect(),
        }
    }

    /// Samples read as labels.
    pub fn to_labels(&self) -> LabeledGrid {
        LabeledGrid {
            width: self.width,
            height: self.height,
            labels: self.samples.iter().map(|&v| v as u32).collect(),
        }
    }

    /// 16-bit encoding of a label grid.
    pub fn from_labels(grid: &LabeledGrid) -> Result<Pgm> {
        let samples = grid
            .labels
            .iter()
            .map(|&l| {
                u16::try_from(l).map_err(|_| Error::InvalidArgument(format!("label {l} does not fit a 16-bit graymap")))
            })
            .collect::<Result<_>>()?;
        Ok(Pgm {
            width: grid.width,
            height: grid.height,
            maxval: u16::MAX,
            samples,
        })
    }
}

pub(crate) fn in_file(path: &Path, e: Error) -> Error {
    match e {
        Error::Format { what, offset } => Error::Format {
            what: format!("{}: {what}", path.display()),
            offset,
        },
        e => e,
    }
}

pub fn read_pgm(path: impl AsRef<Path>) -> Result<Pgm> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Pgm::parse(&bytes).map_err(|e| in_file(path, e))
}

pub fn write_pgm(path: impl AsRef<Path>, pgm: &Pgm) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, pgm.to_p5()).map_err(|e| Error::io(path, e))
}
