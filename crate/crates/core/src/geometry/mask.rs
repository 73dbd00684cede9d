use std::collections::{BTreeMap, VecDeque};

use crate::error::{Error, Result};
use crate::geometry::BBox;

/// Binary pixel mask stored as a row-major bitmap over an integer-aligned box.
///
/// A mask always holds at least one set pixel. The box is not required to be
/// tight; [`Mask::tighten`] produces the tight form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mask {
    x0: i32,
    y0: i32,
    w: u32,
    h: u32,
    bits: Vec<bool>,
    area: usize,
}

impl Mask {
    pub fn new(x0: i32, y0: i32, w: u32, h: u32, bits: Vec<bool>) -> Result<Self> {
        if w == 0 || h == 0 {
            return Err(Error::InvalidArgument("mask box must be non-empty".into()));
        }
        if bits.len() != (w as usize) * (h as usize) {
            return Err(Error::InvalidArgument(format!(
                "mask bitmap has {} bits, box is {w}x{h}",
                bits.len()
            )));
        }
        let area = bits.iter().filter(|&&b| b).count();
        if area == 0 {
            return Err(Error::InvalidArgument("mask has no set pixels".into()));
        }
        Ok(Mask {
            x0,
            y0,
            w,
            h,
            bits,
            area,
        })
    }

    /// Tight mask from a pixel list; duplicates are ignored.
    pub fn from_pixels(pixels: &[(i32, i32)]) -> Result<Self> {
        let Some(&(fx, fy)) = pixels.first() else {
            return Err(Error::InvalidArgument("mask has no set pixels".into()));
        };
        let (mut x0, mut y0, mut x1, mut y1) = (fx, fy, fx, fy);
        for &(x, y) in pixels {
            x0 = x0.min(x);
            y0 = y0.min(y);
            x1 = x1.max(x);
            y1 = y1.max(y);
        }
        let w = (x1 - x0 + 1) as u32;
        let h = (y1 - y0 + 1) as u32;
        let mut bits = vec![false; w as usize * h as usize];
        for &(x, y) in pixels {
            bits[(y - y0) as usize * w as usize + (x - x0) as usize] = true;
        }
        Mask::new(x0, y0, w, h, bits)
    }

    /// Filled rectangle.
    pub fn rect(x0: i32, y0: i32, w: u32, h: u32) -> Result<Self> {
        Mask::new(x0, y0, w, h, vec![true; w as usize * h as usize])
    }

    pub fn x0(&self) -> i32 {
        self.x0
    }

    pub fn y0(&self) -> i32 {
        self.y0
    }

    pub fn width(&self) -> u32 {
        self.w
    }

    pub fn height(&self) -> u32 {
        self.h
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn area(&self) -> usize {
        self.area
    }

    pub fn bbox(&self) -> BBox {
        BBox {
            x: self.x0 as f64,
            y: self.y0 as f64,
            w: self.w as f64,
            h: self.h as f64,
        }
    }

    pub fn contains(&self, x: i32, y: i32) -> bool {
        let (lx, ly) = (x - self.x0, y - self.y0);
        if lx < 0 || ly < 0 || lx >= self.w as i32 || ly >= self.h as i32 {
            return false;
        }
        self.bits[ly as usize * self.w as usize + lx as usize]
    }

    /// Set pixels in row-major order.
    pub fn pixels(&self) -> impl Iterator<Item = (i32, i32)> + '_ {
        let w = self.w as usize;
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(move |(i, _)| (self.x0 + (i % w) as i32, self.y0 + (i / w) as i32))
    }

    /// Mean pixel coordinate.
    pub fn centroid(&self) -> (f64, f64) {
        let (lx, ly) = self.local_centroid();
        (self.x0 as f64 + lx, self.y0 as f64 + ly)
    }

    /// Mean pixel coordinate relative to the box origin; exact under integer translation.
    pub fn local_centroid(&self) -> (f64, f64) {
        let w = self.w as usize;
        let (mut sx, mut sy) = (0u64, 0u64);
        for (i, _) in self.bits.iter().enumerate().filter(|(_, &b)| b) {
            sx += (i % w) as u64;
            sy += (i / w) as u64;
        }
        let n = self.area as f64;
        (sx as f64 / n, sy as f64 / n)
    }

    pub fn is_tight(&self) -> bool {
        let t = self.tighten();
        (t.x0, t.y0, t.w, t.h) == (self.x0, self.y0, self.w, self.h)
    }

    pub fn tighten(&self) -> Mask {
        let pixels: Vec<_> = self.pixels().collect();
        Mask::from_pixels(&pixels).expect("mask is non-empty")
    }

    pub fn translate(&self, dx: i32, dy: i32) -> Mask {
        Mask {
            x0: self.x0 + dx,
            y0: self.y0 + dy,
            ..self.clone()
        }
    }

    pub fn fits_in(&self, width: usize, height: usize) -> bool {
        self.x0 >= 0
            && self.y0 >= 0
            && self.x0 as i64 + self.w as i64 <= width as i64
            && self.y0 as i64 + self.h as i64 <= height as i64
    }

    /// Restricts the mask to a frame; `None` when nothing remains.
    pub fn clip(&self, width: usize, height: usize) -> Option<Mask> {
        let pixels: Vec<_> = self
            .pixels()
            .filter(|&(x, y)| x >= 0 && y >= 0 && (x as usize) < width && (y as usize) < height)
            .collect();
        Mask::from_pixels(&pixels).ok()
    }

    /// Number of pixels set in both masks.
    pub fn intersection(&self, other: &Mask) -> usize {
        let x0 = self.x0.max(other.x0);
        let y0 = self.y0.max(other.y0);
        let x1 = (self.x0 + self.w as i32).min(other.x0 + other.w as i32);
        let y1 = (self.y0 + self.h as i32).min(other.y0 + other.h as i32);
        if x0 >= x1 || y0 >= y1 {
            return 0;
        }
        let mut n = 0;
        for y in y0..y1 {
            let ra = (y - self.y0) as usize * self.w as usize;
            let rb = (y - other.y0) as usize * other.w as usize;
            for x in x0..x1 {
                if self.bits[ra + (x - self.x0) as usize] && other.bits[rb + (x - other.x0) as usize] {
                    n += 1;
                }
            }
        }
        n
    }

    pub fn union(&self, other: &Mask) -> Mask {
        let pixels: Vec<_> = self.pixels().chain(other.pixels()).collect();
        Mask::from_pixels(&pixels).expect("union of non-empty masks")
    }

    /// Dilation by a Euclidean disk of the given radius.
    pub fn dilate(&self, radius: u32) -> Mask {
        if radius == 0 {
            return self.clone();
        }
        let offsets = disk_offsets(radius);
        let r = radius as i32;
        let w = self.w as i32 + 2 * r;
        let h = self.h as i32 + 2 * r;
        let mut bits = vec![false; (w * h) as usize];
        for (x, y) in self.pixels() {
            let (lx, ly) = (x - self.x0 + r, y - self.y0 + r);
            for &(dx, dy) in &offsets {
                bits[((ly + dy) * w + lx + dx) as usize] = true;
            }
        }
        Mask::new(self.x0 - r, self.y0 - r, w as u32, h as u32, bits)
            .expect("dilation keeps pixels")
            .tighten()
    }
}

/// Offsets `(dx, dy)` with `dx^2 + dy^2 <= r^2`, row-major.
pub fn disk_offsets(radius: u32) -> Vec<(i32, i32)> {
    let r = radius as i32;
    let mut out = Vec::new();
    for dy in -r..=r {
        for dx in -r..=r {
            if dx * dx + dy * dy <= r * r {
                out.push((dx, dy));
            }
        }
    }
    out
}

pub fn iou_mask(a: &Mask, b: &Mask) -> f64 {
    let inter = a.intersection(b);
    if inter == 0 {
        return 0.0;
    }
    inter as f64 / (a.area() + b.area() - inter) as f64
}

/// Row-major grid of non-negative labels, 0 = background.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabeledGrid {
    pub width: usize,
    pub height: usize,
    pub labels: Vec<u32>,
}

impl LabeledGrid {
    pub fn new(width: usize, height: usize, labels: Vec<u32>) -> Result<Self> {
        if labels.len() != width * height {
            return Err(Error::InvalidArgument(format!(
                "grid has {} labels, expected {width}x{height}",
                labels.len()
            )));
        }
        Ok(LabeledGrid { width, height, labels })
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        LabeledGrid {
            width,
            height,
            labels: vec![0; width * height],
        }
    }

    pub fn get(&self, x: i32, y: i32) -> u32 {
        if x < 0 || y < 0 || x as usize >= self.width || y as usize >= self.height {
            return 0;
        }
        self.labels[y as usize * self.width + x as usize]
    }

    /// Writes `label` on every in-frame pixel of the mask.
    pub fn paint(&mut self, mask: &Mask, label: u32) {
        for (x, y) in mask.pixels() {
            if x >= 0 && y >= 0 && (x as usize) < self.width && (y as usize) < self.height {
                self.labels[y as usize * self.width + x as usize] = label;
            }
        }
    }

    /// One mask per non-zero label (pixels of a label need not be connected).
    pub fn masks_by_label(&self) -> BTreeMap<u32, Mask> {
        let mut pixels: BTreeMap<u32, Vec<(i32, i32)>> = BTreeMap::new();
        for (i, &l) in self.labels.iter().enumerate() {
            if l != 0 {
                pixels
                    .entry(l)
                    .or_default()
                    .push(((i % self.width) as i32, (i / self.width) as i32));
            }
        }
        pixels
            .into_iter()
            .map(|(l, px)| (l, Mask::from_pixels(&px).expect("non-empty")))
            .collect()
    }
}

/// 8-connected components of the non-zero pixels, ordered by the scanline
/// position of each component's first pixel.
pub fn connected_components(grid: &LabeledGrid) -> Vec<Mask> {
    let fg: Vec<bool> = grid.labels.iter().map(|&l| l != 0).collect();
    components_of(grid.width, grid.height, &fg)
}

pub fn components_of(width: usize, height: usize, foreground: &[bool]) -> Vec<Mask> {
    debug_assert_eq!(foreground.len(), width * height);
    let mut seen = vec![false; foreground.len()];
    let mut out = Vec::new();
    let mut queue = VecDeque::new();
    for start in 0..foreground.len() {
        if !foreground[start] || seen[start] {
            continue;
        }
        seen[start] = true;
        queue.push_back(start);
        let mut pixels = Vec::new();
        while let Some(i) = queue.pop_front() {
            let (x, y) = ((i % width) as i64, (i / width) as i64);
            pixels.push((x as i32, y as i32));
            for dy in -1..=1i64 {
                for dx in -1..=1i64 {
                    let (nx, ny) = (x + dx, y + dy);
                    if nx < 0 || ny < 0 || nx >= width as i64 || ny >= height as i64 {
                        continue;
                    }
                    let j = ny as usize * width + nx as usize;
                    if foreground[j] && !seen[j] {
                        seen[j] = true;
                        queue.push_back(j);
                    }
                }
            }
        }
        out.push(Mask::from_pixels(&pixels).expect("component is non-empty"));
    }
    out
}

/// Boundary pixels (set, with at least one unset 4-neighbour) and, for each
/// radius, the ring `dilate(m, r) \ m`. Both in row-major order, unclipped.
pub fn boundary_and_dilations(m: &Mask, radii: &[u32]) -> (Vec<(i32, i32)>, Vec<Vec<(i32, i32)>>) {
    let boundary = m
        .pixels()
        .filter(|&(x, y)| {
            !(m.contains(x - 1, y) && m.contains(x + 1, y) && m.contains(x, y - 1) && m.contains(x, y + 1))
        })
        .collect();
    let rings = radii
        .iter()
        .map(|&r| m.dilate(r).pixels().filter(|&(x, y)| !m.contains(x, y)).collect())
        .collect();
    (boundary, rings)
}
