//! Binary rasterization with exact integer pixel decisions.
//!
//! Geometry is quantized to 1/256 pixel. Pixel `(col, row)` samples the point
//! `(col, row)` in pixel space. A pixel is inside a disc when its squared
//! distance to the centre is at most `r^2`, and inside a stroke when its
//! distance to the segment is at most half the stroke width. Both tests are
//! carried out on the quantized integers, so rendering is bit-reproducible.

use alloc::vec;
use alloc::vec::Vec;

pub const SUBPIXEL_BITS: u32 = 8;
pub const SUBPIXEL: i64 = 1 << SUBPIXEL_BITS;

pub const WHITE: u8 = 255;
pub const BLACK: u8 = 0;

/// Quantizes a pixel-space length or coordinate to subpixel units.
pub fn to_fixed(v: f64) -> i64 {
    libm::round(v * SUBPIXEL as f64) as i64
}

/// A point in subpixel units.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FixedPoint {
    pub x: i64,
    pub y: i64,
}

impl FixedPoint {
    pub fn from_pixels(x: f64, y: f64) -> Self {
        FixedPoint { x: to_fixed(x), y: to_fixed(y) }
    }
}

/// Disc membership on subpixel integers.
pub fn disc_contains(centre: FixedPoint, radius: i64, px: i64, py: i64) -> bool {
    let dx = i128::from(px - centre.x);
    let dy = i128::from(py - centre.y);
    let r = i128::from(radius);
    dx * dx + dy * dy <= r * r
}

/// Stroke membership: distance from `(px, py)` to segment `ab` at most `half_width`.
pub fn segment_contains(a: FixedPoint, b: FixedPoint, half_width: i64, px: i64, py: i64) -> bool {
    let (dx, dy) = (i128::from(b.x - a.x), i128::from(b.y - a.y));
    let (vx, vy) = (i128::from(px - a.x), i128::from(py - a.y));
    let hw2 = i128::from(half_width) * i128::from(half_width);
    let len2 = dx * dx + dy * dy;
    let t = vx * dx + vy * dy;
    if len2 == 0 || t <= 0 {
        return vx * vx + vy * vy <= hw2;
    }
    if t >= len2 {
        let (wx, wy) = (i128::from(px - b.x), i128::from(py - b.y));
        return wx * wx + wy * wy <= hw2;
    }
    // perpendicular distance^2 = cross^2 / len2
    let cross = vx * dy - vy * dx;
    cross * cross <= hw2 * len2
}

/// Square single-channel canvas, initially white.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Canvas {
    size: u32,
    pixels: Vec<u8>,
}

impl Canvas {
    pub fn new(size: u32) -> Self {
        Canvas { size, pixels: vec![WHITE; (size as usize) * (size as usize)] }
    }

    pub fn size(&self) -> u32 {
        self.size
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn into_pixels(self) -> Vec<u8> {
        self.pixels
    }

    fn last(&self) -> i64 {
        i64::from(self.size) - 1
    }

    fn set(&mut self, col: i64, row: i64) {
        let idx = row as usize * self.size as usize + col as usize;
        self.pixels[idx] = BLACK;
    }

    /// Pixel index range `[lo, hi]` covering subpixel interval `[lo_q, hi_q]`,
    /// clipped to the canvas.
    fn span(&self, lo_q: i64, hi_q: i64) -> Option<(i64, i64)> {
        let lo = lo_q.div_euclid(SUBPIXEL) + i64::from(lo_q.rem_euclid(SUBPIXEL) != 0);
        let hi = hi_q.div_euclid(SUBPIXEL);
        let (lo, hi) = (lo.max(0), hi.min(self.last()));
        (lo <= hi).then_some((lo, hi))
    }

    pub fn fill_disc(&mut self, centre: FixedPoint, radius: i64) {
        let Some((r0, r1)) = self.span(centre.y - radius, centre.y + radius) else { return };
        let Some((c0, c1)) = self.span(centre.x - radius, centre.x + radius) else { return };
        for row in r0..=r1 {
            for col in c0..=c1 {
                if disc_contains(centre, radius, col * SUBPIXEL, row * SUBPIXEL) {
                    self.set(col, row);
                }
            }
        }
    }

    /// Thick segment with round caps.
    pub fn fill_segment(&mut self, a: FixedPoint, b: FixedPoint, half_width: i64) {
        let Some((r0, r1)) = self.span(a.y.min(b.y) - half_width, a.y.max(b.y) + half_width) else {
            return;
        };
        for row in r0..=r1 {
            // Conservative column window from the part of the centre line
            // within half_width of this row, padded by one pixel. Membership
            // itself is still decided by the integer predicate.
            let Some((lo_q, hi_q)) = row_window(a, b, half_width, row * SUBPIXEL) else { continue };
            let Some((c0, c1)) = self.span(lo_q - SUBPIXEL, hi_q + SUBPIXEL) else { continue };
            for col in c0..=c1 {
                if segment_contains(a, b, half_width, col * SUBPIXEL, row * SUBPIXEL) {
                    self.set(col, row);
                }
            }
        }
    }
}

fn row_window(a: FixedPoint, b: FixedPoint, half_width: i64, y: i64) -> Option<(i64, i64)> {
    let (ax, ay, bx, by) = (a.x as f64, a.y as f64, b.x as f64, b.y as f64);
    let (ylo, yhi) = ((y - half_width) as f64, (y + half_width) as f64);
    let (xlo, xhi) = if a.y == b.y {
        if ay < ylo || ay > yhi {
            return None;
        }
        (ax.min(bx), ax.max(bx))
    } else {
        let t1 = (ylo - ay) / (by - ay);
        let t2 = (yhi - ay) / (by - ay);
        let (tlo, thi) = (t1.min(t2).max(0.0), t1.max(t2).min(1.0));
        if tlo > thi {
            return None;
        }
        let x1 = ax + tlo * (bx - ax);
        let x2 = ax + thi * (bx - ax);
        (x1.min(x2), x1.max(x2))
    };
    Some((libm::floor(xlo) as i64 - half_width, libm::ceil(xhi) as i64 + half_width))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn black(c: &Canvas) -> usize {
        c.pixels().iter().filter(|&&p| p == BLACK).count()
    }

    #[test]
    fn radius_four_disc_has_49_pixels() {
        // lattice points with x^2 + y^2 <= 16
        let mut c = Canvas::new(32);
        c.fill_disc(FixedPoint::from_pixels(16.0, 16.0), to_fixed(4.0));
        assert_eq!(black(&c), 49);
    }

    #[test]
    fn disc_clipped_at_border() {
        let mut c = Canvas::new(16);
        c.fill_disc(FixedPoint::from_pixels(0.0, 0.0), to_fixed(2.0));
        // quarter of the 13-point radius-2 lattice disc, axes included
        assert_eq!(black(&c), 6);
        let mut c = Canvas::new(16);
        c.fill_disc(FixedPoint::from_pixels(-50.0, -50.0), to_fixed(3.0));
        assert_eq!(black(&c), 0);
    }

    #[test]
    fn horizontal_stroke() {
        let mut c = Canvas::new(32);
        c.fill_segment(FixedPoint::from_pixels(4.0, 10.0), FixedPoint::from_pixels(20.0, 10.0), SUBPIXEL);
        // rows 9..=11 across columns 4..=20, plus the cap pixels at 3 and 21 on row 10
        assert_eq!(black(&c), 3 * 17 + 2);
    }

    #[test]
    fn degenerate_segment_is_a_dot() {
        let p = FixedPoint::from_pixels(5.0, 5.0);
        let mut c = Canvas::new(12);
        c.fill_segment(p, p, SUBPIXEL);
        assert_eq!(black(&c), 5);
    }

    #[test]
    fn segment_predicate_matches_float_distance_away_from_boundary() {
        let a = FixedPoint::from_pixels(3.3, 7.1);
        let b = FixedPoint::from_pixels(40.7, 29.9);
        let (ax, ay, bx, by) = (3.3f64, 7.1f64, 40.7f64, 29.9f64);
        for py in 0..48 {
            for px in 0..48 {
                let (x, y) = (px as f64, py as f64);
                let (dx, dy) = (bx - ax, by - ay);
                let t = (((x - ax) * dx + (y - ay) * dy) / (dx * dx + dy * dy)).clamp(0.0, 1.0);
                let d = ((x - ax - t * dx).powi(2) + (y - ay - t * dy).powi(2)).sqrt();
                if (d - 1.5).abs() > 0.02 {
                    assert_eq!(
                        segment_contains(a, b, to_fixed(1.5), px * SUBPIXEL, py * SUBPIXEL),
                        d <= 1.5,
                        "pixel ({px}, {py}) at distance {d}"
                    );
                }
            }
        }
    }
}
