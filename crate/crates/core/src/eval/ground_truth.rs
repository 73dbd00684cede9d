use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::geometry::{LabeledGrid, Mask};

/// Annotated cell position: the pixel at the floor of the cell center.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Marker {
    pub track_id: u32,
    pub x: i32,
    pub y: i32,
}

/// One row of the `L B E P` track table. `parent == 0` means no parent.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct TrackRecord {
    pub label: u32,
    pub birth: usize,
    pub end: usize,
    pub parent: u32,
}

/// Reference annotation of a sequence: markers in every frame, cell masks
/// in some frames, and the lineage table.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct GroundTruth {
    pub width: usize,
    pub height: usize,
    /// Indexed by frame.
    pub markers: Vec<Vec<Marker>>,
    pub label_grids: BTreeMap<usize, LabeledGrid>,
    pub tracks: Vec<TrackRecord>,
}

impl GroundTruth {
    pub fn num_frames(&self) -> usize {
        self.markers.len()
    }

    pub fn markers_at(&self, t: usize) -> Result<&[Marker]> {
        self.markers
            .get(t)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::MissingGroundTruth(format!("no markers for frame {t}")))
    }

    pub fn track(&self, label: u32) -> Option<&TrackRecord> {
        self.tracks.iter().find(|r| r.label == label)
    }

    /// Markers of frame `t` whose pixel is set in `mask`.
    pub fn markers_inside(&self, t: usize, mask: &Mask) -> Result<Vec<Marker>> {
        Ok(self
            .markers_at(t)?
            .iter()
            .filter(|m| mask.contains(m.x, m.y))
            .copied()
            .collect())
    }

    /// Children of each track label, in label order.
    pub fn children(&self) -> BTreeMap<u32, Vec<u32>> {
        let mut out: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
        let mut tracks = self.tracks.clone();
        tracks.sort();
        for r in tracks.iter().filter(|r| r.parent != 0) {
            out.entry(r.parent).or_default().push(r.label);
        }
        out
    }

    /// Checks the track table and marker consistency: unique labels, known
    /// parents ending right before the child's birth, markers only inside
    /// their track's frame range.
    pub fn validate(&self) -> Result<()> {
        validate_tracks(&self.tracks)?;
        let ranges: BTreeMap<u32, (usize, usize)> = self.tracks.iter().map(|r| (r.label, (r.birth, r.end))).collect();
        for (t, frame) in self.markers.iter().enumerate() {
            let mut seen = BTreeSet::new();
            for m in frame {
                match ranges.get(&m.track_id) {
                    Some(&(b, e)) if (b..=e).contains(&t) => {}
                    Some(_) => {
                        return Err(Error::Tracks(format!(
                            "marker of track {} in frame {t} outside its frame range",
                            m.track_id
                        )))
                    }
                    None => {
                        return Err(Error::Tracks(format!(
                            "marker in frame {t} references unknown track {}",
                            m.track_id
                        )))
                    }
                }
                if !seen.insert(m.track_id) {
                    return Err(Error::Tracks(format!(
                        "track {} has two markers in frame {t}",
                        m.track_id
                    )));
                }
            }
        }
        Ok(())
    }

    /// Centroid displacements between consecutive frames of the same cell and
    /// from each parent's last position to its daughters' first positions.
    pub fn displacements(&self) -> Vec<f64> {
        let mut pos: BTreeMap<(u32, usize), (i32, i32)> = BTreeMap::new();
        for (t, frame) in self.markers.iter().enumerate() {
            for m in frame {
                pos.insert((m.track_id, t), (m.x, m.y));
            }
        }
        let dist = |a: (i32, i32), b: (i32, i32)| ((a.0 - b.0) as f64).hypot((a.1 - b.1) as f64);
        let mut out = Vec::new();
        for (&(id, t), &p) in &pos {
            if let Some(&q) = pos.get(&(id, t + 1)) {
                out.push(dist(p, q));
            }
        }
        for r in self.tracks.iter().filter(|r| r.parent != 0 && r.birth > 0) {
            if let (Some(&p), Some(&q)) = (pos.get(&(r.parent, r.birth - 1)), pos.get(&(r.label, r.birth))) {
                out.push(dist(p, q));
            }
        }
        out
    }
}

/// Track-table rules: unique non-zero labels, `birth <= end`, parents known
/// and ending exactly one frame before the child starts.
pub fn validate_tracks(tracks: &[TrackRecord]) -> Result<()> {
    let mut by_label = BTreeMap::new();
    for r in tracks {
        if r.label == 0 {
            return Err(Error::Tracks("label 0 is reserved for background".into()));
        }
        if r.birth > r.end {
            return Err(Error::Tracks(format!(
                "track {} ends ({}) before it begins ({})",
                r.label, r.end, r.birth
            )));
        }
        if by_label.insert(r.label, *r).is_some() {
            return Err(Error::Tracks(format!("duplicate track label {}", r.label)));
        }
    }
    for r in tracks.iter().filter(|r| r.parent != 0) {
        let parent = by_label
            .get(&r.parent)
            .ok_or_else(|| Error::Tracks(format!("track {} has unknown parent {}", r.label, r.parent)))?;
        if parent.end + 1 != r.birth {
            return Err(Error::Tracks(format!(
                "track {} starts at frame {} but parent {} ends at frame {}",
                r.label, r.birth, r.parent, parent.end
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(label: u32, birth: usize, end: usize, parent: u32) -> TrackRecord {
        TrackRecord {
            label,
            birth,
            end,
            parent,
        }
    }

    #[test]
    fn track_rules() {
        assert!(validate_tracks(&[]).is_ok());
        assert!(validate_tracks(&[rec(1, 0, 10, 0)]).is_ok());
        assert!(validate_tracks(&[rec(1, 0, 4, 0), rec(3, 5, 9, 1)]).is_ok());
        assert!(validate_tracks(&[rec(1, 0, 5, 0), rec(3, 5, 9, 1)]).is_err());
        assert!(validate_tracks(&[rec(3, 5, 9, 1)]).is_err());
        assert!(validate_tracks(&[rec(1, 3, 2, 0)]).is_err());
        assert!(validate_tracks(&[rec(1, 0, 2, 0), rec(1, 0, 2, 0)]).is_err());
    }

    #[test]
    fn markers_inside_and_displacements() {
        let gt = GroundTruth {
            width: 20,
            height: 20,
            markers: vec![
                vec![Marker {
                    track_id: 1,
                    x: 2,
                    y: 2,
                }],
                vec![
                    Marker {
                        track_id: 2,
                        x: 5,
                        y: 2,
                    },
                    Marker {
                        track_id: 3,
                        x: 2,
                        y: 6,
                    },
                ],
            ],
            label_grids: BTreeMap::new(),
            tracks: vec![rec(1, 0, 0, 0), rec(2, 1, 1, 1), rec(3, 1, 1, 1)],
        };
        gt.validate().unwrap();
        let m = Mask::rect(0, 0, 4, 4).unwrap();
        assert_eq!(gt.markers_inside(0, &m).unwrap().len(), 1);
        assert!(gt.markers_inside(2, &m).is_err());
        let mut d = gt.displacements();
        d.sort_by(f64::total_cmp);
        assert_eq!(d, vec![3.0, 4.0]);
        assert_eq!(gt.children()[&1], vec![2, 3]);
    }
}
