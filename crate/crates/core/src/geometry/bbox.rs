use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Axis-aligned box in continuous frame coordinates: left, top, width, height.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BBox {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

impl BBox {
    pub fn new(x: f64, y: f64, w: f64, h: f64) -> Result<Self> {
        if !(w > 0.0 && h > 0.0) || !(x.is_finite() && y.is_finite() && w.is_finite() && h.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "box ({x}, {y}, {w}, {h}) must be finite with positive size"
            )));
        }
        Ok(BBox { x, y, w, h })
    }

    pub fn area(&self) -> f64 {
        self.w * self.h
    }

    pub fn right(&self) -> f64 {
        self.x + self.w
    }

    pub fn bottom(&self) -> f64 {
        self.y + self.h
    }

    pub fn center(&self) -> (f64, f64) {
        (self.x + 0.5 * self.w, self.y + 0.5 * self.h)
    }

    pub fn intersection_area(&self, other: &BBox) -> f64 {
        let iw = self.right().min(other.right()) - self.x.max(other.x);
        let ih = self.bottom().min(other.bottom()) - self.y.max(other.y);
        if iw <= 0.0 || ih <= 0.0 {
            0.0
        } else {
            iw * ih
        }
    }
}

/// Box regression target relative to an anchor box.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxDelta {
    pub dx: f64,
    pub dy: f64,
    pub dw: f64,
    pub dh: f64,
}

pub fn iou_box(a: &BBox, b: &BBox) -> f64 {
    let inter = a.intersection_area(b);
    if inter <= 0.0 {
        return 0.0;
    }
    let union = a.area() + b.area() - inter;
    (inter / union).clamp(0.0, 1.0)
}

pub fn anchor_encode(b: &BBox, anchor: &BBox) -> BoxDelta {
    BoxDelta {
        dx: (b.x - anchor.x) / anchor.w,
        dy: (b.y - anchor.y) / anchor.h,
        dw: (b.w / anchor.w).ln(),
        dh: (b.h / anchor.h).ln(),
    }
}

pub fn anchor_decode(d: &BoxDelta, anchor: &BBox) -> BBox {
    BBox {
        x: anchor.x + d.dx * anchor.w,
        y: anchor.y + d.dy * anchor.h,
        w: anchor.w * d.dw.exp(),
        h: anchor.h * d.dh.exp(),
    }
}

/// Grows every side by `margin`, clipped to the frame `[0, frame_w] x [0, frame_h]`.
pub fn expand_box(b: &BBox, margin: f64, frame_w: f64, frame_h: f64) -> BBox {
    let x0 = (b.x - margin).max(0.0);
    let y0 = (b.y - margin).max(0.0);
    let x1 = (b.right() + margin).min(frame_w);
    let y1 = (b.bottom() + margin).min(frame_h);
    BBox {
        x: x0,
        y: y0,
        w: x1 - x0,
        h: y1 - y0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(x: f64, y: f64, w: f64, h: f64) -> BBox {
        BBox::new(x, y, w, h).unwrap()
    }

    #[test]
    fn iou_examples() {
        assert_eq!(iou_box(&b(0., 0., 10., 10.), &b(0., 0., 10., 10.)), 1.0);
        assert_eq!(iou_box(&b(0., 0., 10., 10.), &b(20., 20., 5., 5.)), 0.0);
        // intersection 50, union 150
        let v = iou_box(&b(0., 0., 10., 10.), &b(5., 0., 10., 10.));
        assert!((v - 50.0 / 150.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_degenerate() {
        assert!(BBox::new(0., 0., 0., 1.).is_err());
        assert!(BBox::new(0., 0., 1., -1.).is_err());
        assert!(BBox::new(f64::NAN, 0., 1., 1.).is_err());
    }

    #[test]
    fn anchor_examples() {
        let a = b(10., 10., 10., 10.);
        let d = anchor_encode(&b(12., 10., 20., 10.), &a);
        assert!((d.dx - 0.2).abs() < 1e-15);
        assert_eq!(d.dy, 0.0);
        assert!((d.dw - 2f64.ln()).abs() < 1e-15);
        assert_eq!(d.dh, 0.0);

        let anchor = b(3., 4., 5., 6.);
        assert_eq!(
            anchor_encode(&anchor, &anchor),
            BoxDelta {
                dx: 0.,
                dy: 0.,
                dw: 0.,
                dh: 0.
            }
        );
        let zero = BoxDelta {
            dx: 0.,
            dy: 0.,
            dw: 0.,
            dh: 0.,
        };
        assert_eq!(anchor_decode(&zero, &anchor), anchor);

        let back = anchor_decode(
            &BoxDelta {
                dx: 0.2,
                dy: 0.0,
                dw: 2f64.ln(),
                dh: 0.0,
            },
            &a,
        );
        assert!((back.x - 12.).abs() < 1e-12 && (back.w - 20.).abs() < 1e-12);
        assert_eq!((back.y, back.h), (10., 10.));
    }

    #[test]
    fn expand_examples() {
        assert_eq!(expand_box(&b(5., 5., 10., 10.), 0., 100., 100.), b(5., 5., 10., 10.));
        assert_eq!(expand_box(&b(5., 5., 10., 10.), 3., 100., 100.), b(2., 2., 16., 16.));
        assert_eq!(expand_box(&b(0., 0., 10., 10.), 3., 100., 100.), b(0., 0., 13., 13.));
        assert_eq!(expand_box(&b(90., 95., 10., 5.), 3., 100., 100.), b(87., 92., 13., 8.));
    }
}
