//! Synthetic sequences with known lineage, and controlled corruption of the
//! ideal proposals derived from them.

mod corrupt;

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

pub use corrupt::{corrupt, CorruptionConfig};

use crate::error::{Error, Result};
use crate::eval::{GroundTruth, Marker, TrackRecord};
use crate::geometry::LabeledGrid;
use crate::par;
use crate::proposals::Frame;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Border {
    /// A cell whose center leaves the arena exits the sequence.
    #[default]
    Absorbing,
    Reflecting,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimConfig {
    pub seed: u64,
    pub frames: usize,
    pub width: usize,
    pub height: usize,
    pub initial_cells: usize,
    pub radius_min: f64,
    pub radius_max: f64,
    /// Radius gained per frame, up to `radius_max`.
    pub growth: f64,
    /// Standard deviation of the per-axis displacement, px/frame.
    pub motion_sigma: f64,
    /// Division probability per cell and frame.
    pub division_rate: f64,
    /// Frames a cell must exist before it may divide.
    pub min_division_age: usize,
    /// Probability per frame that a cell enters at the border.
    pub enter_rate: f64,
    /// Death probability per cell and frame.
    pub death_rate: f64,
    /// Frames a cell stays in view before it may exit or die; border entries
    /// stop once they could no longer last this long.
    pub min_lifetime: usize,
    pub border: Border,
    /// Minimum center distance as a multiple of the summed radii.
    pub min_separation: f64,
    pub intensity_min: f64,
    pub intensity_max: f64,
    pub background: f64,
    pub noise_sigma: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            seed: 0,
            frames: 50,
            width: 200,
            height: 200,
            initial_cells: 15,
            radius_min: 4.0,
            radius_max: 6.0,
            growth: 0.05,
            motion_sigma: 1.5,
            division_rate: 0.012,
            min_division_age: 5,
            enter_rate: 0.1,
            death_rate: 0.0,
            min_lifetime: 5,
            border: Border::Absorbing,
            min_separation: 1.3,
            intensity_min: 0.6,
            intensity_max: 0.9,
            background: 0.05,
            noise_sigma: 0.02,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let rate = |name: &str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(Error::Config(format!("sim.{name} = {v} is not in [0, 1]")))
            }
        };
        rate("division_rate", self.division_rate)?;
        rate("enter_rate", self.enter_rate)?;
        rate("death_rate", self.death_rate)?;
        rate("background", self.background)?;
        if !(self.radius_min >= 2.0 && self.radius_max >= self.radius_min) {
            return Err(Error::Config("sim radii need 2 <= radius_min <= radius_max".into()));
        }
        if !(0.0 < self.intensity_min && self.intensity_min <= self.intensity_max && self.intensity_max <= 1.0) {
            return Err(Error::Config("sim intensities need 0 < min <= max <= 1".into()));
        }
        if !(self.motion_sigma >= 0.0 && self.noise_sigma >= 0.0 && self.growth >= 0.0) {
            return Err(Error::Config(
                "sim motion, noise and growth must be non-negative".into(),
            ));
        }
        if !(self.min_separation >= 1.0) {
            return Err(Error::Config("sim.min_separation must be at least 1".into()));
        }
        if self.min_lifetime == 0 {
            return Err(Error::Config("sim.min_lifetime must be at least 1".into()));
        }
        if self.width == 0 || self.height == 0 {
            return Err(Error::Config("sim arena must be non-empty".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug)]
struct Cell {
    label: u32,
    x: f64,
    y: f64,
    r: f64,
    amplitude: f64,
    birth: usize,
}

/// Cells present in each frame, dynamics only.
struct History {
    frames: Vec<Vec<Cell>>,
    tracks: Vec<TrackRecord>,
}

struct World<'a> {
    cfg: &'a SimConfig,
    rng: ChaCha8Rng,
    cells: Vec<Cell>,
    next_label: u32,
    records: BTreeMap<u32, TrackRecord>,
}

impl World<'_> {
    fn free(&self, x: f64, y: f64, r: f64, skip: &[u32]) -> bool {
        self.cells
            .iter()
            .filter(|c| !skip.contains(&c.label))
            .all(|c| (c.x - x).hypot(c.y - y) >= self.cfg.min_separation * (c.r + r))
    }

    fn inside(&self, x: f64, y: f64) -> bool {
        x >= 0.0 && y >= 0.0 && x < self.cfg.width as f64 && y < self.cfg.height as f64
    }

    fn spawn(&mut self, x: f64, y: f64, r: f64, birth: usize, parent: u32) -> Cell {
        let label = self.next_label;
        self.next_label += 1;
        let amplitude = self.rng.gen_range(self.cfg.intensity_min..=self.cfg.intensity_max);
        self.records.insert(
            label,
            TrackRecord {
                label,
                birth,
                end: birth,
                parent,
            },
        );
        Cell {
            label,
            x,
            y,
            r,
            amplitude,
            birth,
        }
    }

    fn random_radius(&mut self) -> f64 {
        self.rng.gen_range(self.cfg.radius_min..=self.cfg.radius_max)
    }

    /// Up to ten placement attempts for a cell of radius `r`.
    fn place(&mut self, mut sample: impl FnMut(&mut ChaCha8Rng) -> (f64, f64), r: f64) -> Option<(f64, f64)> {
        for _ in 0..10 {
            let (x, y) = sample(&mut self.rng);
            if self.inside(x, y) && self.free(x, y, r, &[]) {
                return Some((x, y));
            }
        }
        None
    }

    fn populate(&mut self) {
        let (w, h) = (self.cfg.width as f64, self.cfg.height as f64);
        for _ in 0..self.cfg.initial_cells {
            let r = self.random_radius();
            if let Some((x, y)) = self.place(|rng| (rng.gen_range(0.0..w), rng.gen_range(0.0..h)), r) {
                let c = self.spawn(x, y, r, 0, 0);
                self.cells.push(c);
            }
        }
    }

    /// Advances from frame `t` to `t + 1`.
    fn step(&mut self, t: usize) {
        let cfg = self.cfg;
        let motion = Normal::new(0.0, cfg.motion_sigma.max(1e-12)).expect("valid sigma");
        let last = cfg.frames - 1;
        let mut next = Vec::with_capacity(self.cells.len() + 2);
        let order: Vec<u32> = self.cells.iter().map(|c| c.label).collect();
        for label in order {
            let Some(pos) = self.cells.iter().position(|c| c.label == label) else {
                continue;
            };
            let mut c = self.cells[pos];
            let age = t - c.birth;
            let may_end = age + 1 >= cfg.min_lifetime;
            let u_death: f64 = self.rng.gen();
            let u_div: f64 = self.rng.gen();
            if may_end && u_death < cfg.death_rate {
                self.cells.remove(pos);
                continue;
            }
            if age >= cfg.min_division_age && u_div < cfg.division_rate {
                if let Some(daughters) = self.divide(&c, t + 1) {
                    self.cells.remove(pos);
                    self.cells.extend(daughters);
                    next.extend(daughters);
                    continue;
                }
            }
            let mut moved = false;
            for _ in 0..10 {
                let (mut x, mut y) = (c.x + motion.sample(&mut self.rng), c.y + motion.sample(&mut self.rng));
                if !self.inside(x, y) {
                    if cfg.border == Border::Absorbing && may_end {
                        self.cells.remove(pos);
                        moved = true;
                        break;
                    }
                    x = reflect(x, cfg.width as f64);
                    y = reflect(y, cfg.height as f64);
                }
                let r = (c.r + cfg.growth).min(cfg.radius_max.max(c.r));
                if self.free(x, y, r, &[c.label]) {
                    (c.x, c.y, c.r) = (x, y, r);
                    self.cells[pos] = c;
                    next.push(c);
                    moved = true;
                    break;
                }
            }
            if !moved {
                next.push(c);
            }
        }
        self.cells = next;
        if t + cfg.min_lifetime <= last && self.rng.gen::<f64>() < cfg.enter_rate {
            let r = self.random_radius();
            let (w, h) = (cfg.width as f64, cfg.height as f64);
            let ring = |rng: &mut ChaCha8Rng| {
                let inset = rng.gen_range(0.0..r);
                let along: f64 = rng.gen();
                match rng.gen_range(0..4) {
                    0 => (along * w, inset),
                    1 => (along * w, h - 1.0 - inset),
                    2 => (inset, along * h),
                    _ => (w - 1.0 - inset, along * h),
                }
            };
            if let Some((x, y)) = self.place(ring, r) {
                let c = self.spawn(x, y, r, t + 1, 0);
                self.cells.push(c);
            }
        }
        for c in &self.cells {
            self.records.get_mut(&c.label).expect("recorded").end = t + 1;
        }
    }

    /// Daughters at the parent's center plus and minus `1.2 r` along a random
    /// direction, each with three quarters of the parent's radius.
    fn divide(&mut self, parent: &Cell, birth: usize) -> Option<[Cell; 2]> {
        let r = (parent.r * 0.75).max(2.0);
        for _ in 0..10 {
            let a: f64 = self.rng.gen_range(0.0..std::f64::consts::TAU);
            let (dx, dy) = (a.cos() * 1.2 * parent.r, a.sin() * 1.2 * parent.r);
            let (p, q) = ((parent.x + dx, parent.y + dy), (parent.x - dx, parent.y - dy));
            let ok = |w: &Self, (x, y): (f64, f64)| w.inside(x, y) && w.free(x, y, r, &[parent.label]);
            if ok(self, p) && ok(self, q) {
                let d1 = self.spawn(p.0, p.1, r, birth, parent.label);
                let d2 = self.spawn(q.0, q.1, r, birth, parent.label);
                return Some([d1, d2]);
            }
        }
        None
    }
}

fn reflect(v: f64, size: f64) -> f64 {
    let hi = size - 1e-9;
    if v < 0.0 {
        (-v).min(hi)
    } else if v >= size {
        (2.0 * size - v).clamp(0.0, hi)
    } else {
        v
    }
}

fn run_dynamics(cfg: &SimConfig) -> History {
    let mut world = World {
        cfg,
        rng: ChaCha8Rng::seed_from_u64(cfg.seed),
        cells: Vec::new(),
        next_label: 1,
        records: BTreeMap::new(),
    };
    let mut frames = Vec::with_capacity(cfg.frames);
    if cfg.frames == 0 {
        return History {
            frames,
            tracks: Vec::new(),
        };
    }
    world.populate();
    for t in 0..cfg.frames {
        let mut cells = world.cells.clone();
        cells.sort_by_key(|c| c.label);
        frames.push(cells);
        if t + 1 < cfg.frames {
            world.step(t);
        }
    }
    History {
        frames,
        tracks: world.records.into_values().collect(),
    }
}

/// Half-peak radius of a Gaussian blob of standard deviation `r`.
fn half_peak(r: f64) -> f64 {
    r * (2.0 * std::f64::consts::LN_2).sqrt()
}

fn render(cfg: &SimConfig, t: usize, cells: &[Cell]) -> (Frame, LabeledGrid, Vec<Marker>) {
    let (w, h) = (cfg.width, cfg.height);
    let mut data = vec![cfg.background; w * h];
    // normalised distance of the owning cell, per pixel
    let mut owner = vec![(f64::INFINITY, 0u32); w * h];
    for c in cells {
        let reach = (4.0 * c.r).ceil() as i64;
        let hp = half_peak(c.r);
        let (cx, cy) = (c.x.floor() as i64, c.y.floor() as i64);
        for y in (cy - reach).max(0)..=(cy + reach).min(h as i64 - 1) {
            for x in (cx - reach).max(0)..=(cx + reach).min(w as i64 - 1) {
                // pixel centers at integer coordinates + 0.5
                let d2 = (x as f64 + 0.5 - c.x).powi(2) + (y as f64 + 0.5 - c.y).powi(2);
                let i = y as usize * w + x as usize;
                data[i] += c.amplitude * (-d2 / (2.0 * c.r * c.r)).exp();
                let d = d2.sqrt();
                if d <= hp && d / c.r < owner[i].0 {
                    owner[i] = (d / c.r, c.label);
                }
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(t as u64 + 1);
    if cfg.noise_sigma > 0.0 {
        let noise = Normal::new(0.0, cfg.noise_sigma).expect("valid sigma");
        for v in data.iter_mut() {
            *v += noise.sample(&mut rng);
        }
    }
    for v in data.iter_mut() {
        *v = v.clamp(0.0, 1.0);
    }
    let mut grid = LabeledGrid::new(w, h, owner.iter().map(|o| o.1).collect()).expect("sized");
    let markers: Vec<Marker> = cells
        .iter()
        .map(|c| Marker {
            track_id: c.label,
            x: c.x.floor() as i32,
            y: c.y.floor() as i32,
        })
        .collect();
    for m in &markers {
        grid.labels[m.y as usize * w + m.x as usize] = m.track_id;
    }
    (
        Frame {
            t,
            width: w,
            height: h,
            data,
        },
        grid,
        markers,
    )
}

/// Renders a deterministic sequence: Gaussian blobs under Brownian motion
/// with divisions, border entries and exits. Markers sit at the blob centers,
/// and every frame is annotated with the half-peak regions of its cells.
pub fn simulate(cfg: &SimConfig) -> Result<(Vec<Frame>, GroundTruth)> {
    cfg.validate()?;
    let history = run_dynamics(cfg);
    let rendered = par::map_range(history.frames.len(), |t| render(cfg, t, &history.frames[t]));
    let mut frames = Vec::with_capacity(rendered.len());
    let mut gt = GroundTruth {
        width: cfg.width,
        height: cfg.height,
        tracks: history.tracks,
        ..Default::default()
    };
    for (t, (frame, grid, markers)) in rendered.into_iter().enumerate() {
        frames.push(frame);
        gt.markers.push(markers);
        gt.label_grids.insert(t, grid);
    }
    gt.validate()?;
    Ok((frames, gt))
}

/// Counts of lineage events in a reference annotation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventCounts {
    pub tracks: usize,
    pub divisions: usize,
    /// Tracks starting after frame 0 without a parent.
    pub enters: usize,
    /// Tracks ending before the last frame without children.
    pub exits: usize,
}

pub fn event_counts(gt: &GroundTruth) -> EventCounts {
    let children = gt.children();
    let last = gt.num_frames().saturating_sub(1);
    EventCounts {
        tracks: gt.tracks.len(),
        divisions: children.values().filter(|k| k.len() >= 2).count(),
        enters: gt.tracks.iter().filter(|r| r.birth > 0 && r.parent == 0).count(),
        exits: gt
            .tracks
            .iter()
            .filter(|r| r.end < last && !children.contains_key(&r.label))
            .count(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SimConfig {
        SimConfig {
            frames: 20,
            width: 80,
            height: 60,
            initial_cells: 5,
            ..Default::default()
        }
    }

    #[test]
    fn zero_frames_is_empty() {
        let (frames, gt) = simulate(&SimConfig { frames: 0, ..small() }).unwrap();
        assert!(frames.is_empty());
        assert!(gt.tracks.is_empty() && gt.markers.is_empty());
    }

    #[test]
    fn no_events_keeps_count() {
        let cfg = SimConfig {
            division_rate: 0.0,
            enter_rate: 0.0,
            border: Border::Reflecting,
            ..small()
        };
        let (_, gt) = simulate(&cfg).unwrap();
        assert_eq!(gt.tracks.len(), 5);
        assert!(gt.markers.iter().all(|m| m.len() == 5));
        assert!(gt.tracks.iter().all(|r| r.birth == 0 && r.end == 19));
    }

    #[test]
    fn deterministic() {
        let cfg = SimConfig {
            division_rate: 0.05,
            ..small()
        };
        let a = simulate(&cfg).unwrap();
        let b = simulate(&cfg).unwrap();
        assert_eq!(a, b);
        let c = par::sequential(|| simulate(&cfg).unwrap());
        assert_eq!(a, c);
        let d = simulate(&SimConfig { seed: 1, ..cfg }).unwrap();
        assert_ne!(a.1, d.1);
    }

    #[test]
    fn markers_inside_own_regions() {
        let cfg = SimConfig {
            division_rate: 0.05,
            enter_rate: 0.3,
            ..small()
        };
        let (frames, gt) = simulate(&cfg).unwrap();
        assert_eq!(frames.len(), 20);
        for (t, ms) in gt.markers.iter().enumerate() {
            let grid = &gt.label_grids[&t];
            for m in ms {
                assert_eq!(grid.get(m.x, m.y), m.track_id);
            }
        }
        let e = event_counts(&gt);
        assert!(e.divisions > 0, "{e:?}");
        // tracks last min_lifetime frames unless cut by a division or the end
        let divided: Vec<u32> = gt.children().into_keys().collect();
        for r in &gt.tracks {
            let cut = r.parent != 0 || r.end == 19 || divided.contains(&r.label);
            assert!(r.end + 1 - r.birth >= cfg.min_lifetime || cut, "{r:?}");
        }
    }

    #[test]
    fn rejects_bad_rates() {
        assert!(simulate(&SimConfig {
            division_rate: 1.5,
            ..small()
        })
        .is_err());
        assert!(simulate(&SimConfig {
            radius_min: 1.0,
            ..small()
        })
        .is_err());
    }
}
