use std::path::Path;

use crate::error::{Error, Result};
use crate::eval::{validate_tracks, Marker, TrackRecord};
use crate::io::pgm::in_file;

/// Byte offset of each line start, with the line.
fn lines(text: &str) -> impl Iterator<Item = (usize, usize, &str)> {
    let mut offset = 0;
    text.split_inclusive('\n').enumerate().map(move |(i, raw)| {
        let at = offset;
        offset += raw.len();
        (i + 1, at, raw.trim_end_matches(['\n', '\r']))
    })
}

fn field<T: std::str::FromStr>(tok: &str, what: &str, line: usize, at: usize) -> Result<T> {
    tok.parse()
        .map_err(|_| Error::format(format!("line {line}: {what} {tok:?} is not a non-negative integer"), at))
}

/// `L B E P` rows: label, first frame, last frame, parent label (0 = none).
/// Blank lines are ignored. The table is validated.
pub fn parse_tracks(text: &str) -> Result<Vec<TrackRecord>> {
    let mut out = Vec::new();
    for (line, at, s) in lines(text) {
        let toks: Vec<&str> = s.split_whitespace().collect();
        if toks.is_empty() {
            continue;
        }
        if toks.len() != 4 {
            return Err(Error::format(
                format!("line {line}: expected 4 integers, found {}", toks.len()),
                at,
            ));
        }
        out.push(TrackRecord {
            label: field(toks[0], "label", line, at)?,
            birth: field(toks[1], "birth", line, at)?,
            end: field(toks[2], "end", line, at)?,
            parent: field(toks[3], "parent", line, at)?,
        });
    }
    validate_tracks(&out)?;
    Ok(out)
}

/// Rows sorted by label.
pub fn format_tracks(tracks: &[TrackRecord]) -> String {
    let mut rows = tracks.to_vec();
    rows.sort_by_key(|r| r.label);
    rows.iter()
        .map(|r| format!("{} {} {} {}\n", r.label, r.birth, r.end, r.parent))
        .collect()
}

pub const MARKER_HEADER: &str = "t,track_id,x,y";

/// Marker table with a `t,track_id,x,y` header; returns one list per frame
/// for `num_frames` frames.
pub fn parse_markers(text: &str, num_frames: usize) -> Result<Vec<Vec<Marker>>> {
    let mut out = vec![Vec::new(); num_frames];
    let mut rows = lines(text).filter(|(_, _, s)| !s.trim().is_empty());
    match rows.next() {
        Some((_, _, h)) if h.trim() == MARKER_HEADER => {}
        Some((line, at, _)) => {
            return Err(Error::format(
                format!("line {line}: expected header {MARKER_HEADER}"),
                at,
            ))
        }
        None => return Err(Error::format(format!("missing header {MARKER_HEADER}"), 0)),
    }
    for (line, at, s) in rows {
        let toks: Vec<&str> = s.split(',').map(str::trim).collect();
        if toks.len() != 4 {
            return Err(Error::format(
                format!("line {line}: expected 4 fields, found {}", toks.len()),
                at,
            ));
        }
        let t: usize = field(toks[0], "frame", line, at)?;
        let m = Marker {
            track_id: field(toks[1], "track id", line, at)?,
            x: field::<u32>(toks[2], "x", line, at)? as i32,
            y: field::<u32>(toks[3], "y", line, at)? as i32,
        };
        if m.track_id == 0 || m.x < 0 || m.y < 0 {
            return Err(Error::format(format!("line {line}: marker out of range"), at));
        }
        let frame = out
            .get_mut(t)
            .ok_or_else(|| Error::format(format!("line {line}: frame {t} beyond the {num_frames} frames"), at))?;
        frame.push(m);
    }
    Ok(out)
}

pub fn format_markers(markers: &[Vec<Marker>]) -> String {
    let mut s = format!("{MARKER_HEADER}\n");
    for (t, frame) in markers.iter().enumerate() {
        let mut frame = frame.clone();
        frame.sort_by_key(|m| m.track_id);
        for m in frame {
            s.push_str(&format!("{t},{},{},{}\n", m.track_id, m.x, m.y));
        }
    }
    s
}

pub(crate) fn read_text(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    String::from_utf8(bytes).map_err(|e| in_file(path, Error::format("invalid UTF-8", e.utf8_error().valid_up_to())))
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_tracks(path: impl AsRef<Path>) -> Result<Vec<TrackRecord>> {
    let path = path.as_ref();
    parse_tracks(&read_text(path)?).map_err(|e| in_file(path, e))
}

pub fn write_tracks(path: impl AsRef<Path>, tracks: &[TrackRecord]) -> Result<()> {
    write_text(path.as_ref(), &format_tracks(tracks))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn track_rows() {
        let t = parse_tracks("1 0 10 0\n").unwrap();
        assert_eq!(
            t,
            vec![TrackRecord {
                label: 1,
                birth: 0,
                end: 10,
                parent: 0
            }]
        );
        assert!(parse_tracks("").unwrap().is_empty());
        assert!(parse_tracks("\n  \n").unwrap().is_empty());
        let t = parse_tracks("1 0 4 0\n3 5 9 1\n").unwrap();
        assert_eq!(t[1].parent, 1);
        assert!(matches!(parse_tracks("3 5 9 1\n"), Err(Error::Tracks(_))));
        assert!(matches!(parse_tracks("1 0 5 0\n3 5 9 1\n"), Err(Error::Tracks(_))));
    }

    #[test]
    fn track_syntax_errors_point_at_line() {
        match parse_tracks("1 0 4 0\n2 0 x 0\n") {
            Err(Error::Format { offset, what }) => {
                assert_eq!(offset, 8);
                assert!(what.contains("line 2"), "{what}");
            }
            other => panic!("{other:?}"),
        }
        assert!(parse_tracks("1 0 4\n").is_err());
        assert!(parse_tracks("1 0 4 -1\n").is_err());
    }

    #[test]
    fn tracks_round_trip_sorted() {
        let rows = vec![
            TrackRecord {
                label: 3,
                birth: 5,
                end: 9,
                parent: 1,
            },
            TrackRecord {
                label: 1,
                birth: 0,
                end: 4,
                parent: 0,
            },
        ];
        let text = format_tracks(&rows);
        assert_eq!(text, "1 0 4 0\n3 5 9 1\n");
        let mut sorted = rows.clone();
        sorted.sort();
        assert_eq!(parse_tracks(&text).unwrap(), sorted);
    }

    #[test]
    fn markers_round_trip() {
        let m = |track_id, x, y| Marker { track_id, x, y };
        let markers = vec![vec![m(1, 3, 4), m(2, 10, 0)], vec![], vec![m(1, 4, 4)]];
        let text = format_markers(&markers);
        assert_eq!(parse_markers(&text, 3).unwrap(), markers);
        assert!(parse_markers(&text, 2).is_err());
        assert!(parse_markers("t,x\n", 1).is_err());
        assert!(parse_markers("t,track_id,x,y\n0,0,1,1\n", 1).is_err());
    }
}
