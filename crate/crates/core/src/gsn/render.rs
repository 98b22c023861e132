//! Rasterizing diamond glyphs into binary images.
//!
//! A glyph is a filled square whose diagonal equals `size`, rotated by
//! `rotation` degrees about its centre; at 0 degrees its vertices lie on the
//! image axes (a diamond). Pixel `(x, y)` is lit when its centre
//! `(x + 0.5, y + 0.5)` lies in the square. Membership is half-open in the
//! square's own frame: the two lower/left sides are included, the other two
//! are not.
//!
//! Rotations are reduced modulo 90 degrees and quantized to 1e-6 degrees
//! before use, so `rotation` and `rotation + 90` rasterize identically.

use std::f64::consts::FRAC_1_SQRT_2;

use super::{FeatureLayout, Glyph, GsnError, Result};

/// Binary image, row-major, `true` = white glyph pixel.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GsnImage {
    pub width: usize,
    pub height: usize,
    pixels: Vec<bool>,
}

impl GsnImage {
    pub fn blank(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            pixels: vec![false; width * height],
        }
    }

    pub fn from_pixels(width: usize, height: usize, pixels: Vec<bool>) -> Result<Self> {
        if pixels.len() != width * height {
            return Err(GsnError::DimensionMismatch {
                expected: width * height,
                found: pixels.len(),
            });
        }
        Ok(Self { width, height, pixels })
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.pixels[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, value: bool) {
        self.pixels[y * self.width + x] = value;
    }

    /// Row-major pixel values; index `y * width + x`.
    pub fn pixels(&self) -> &[bool] {
        &self.pixels
    }

    pub fn count_white(&self) -> usize {
        self.pixels.iter().filter(|p| **p).count()
    }
}

/// Image size and the margin kept free around the SOM grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImageGeometry {
    pub width: usize,
    pub height: usize,
    pub margin: f64,
}

impl ImageGeometry {
    /// Pixel-space centre of grid cell `(gx, gy)`.
    pub fn cell_center(&self, layout: &FeatureLayout, gx: usize, gy: usize) -> (f64, f64) {
        let axis = |g: usize, cells: usize, extent: usize| {
            if cells <= 1 {
                extent as f64 / 2.0
            } else {
                self.margin + g as f64 * (extent as f64 - 2.0 * self.margin) / (cells - 1) as f64
            }
        };
        (
            axis(gx, layout.grid_width, self.width),
            axis(gy, layout.grid_height, self.height),
        )
    }
}

pub fn canonical_rotation_deg(rotation_deg: f64) -> f64 {
    let reduced = rotation_deg.rem_euclid(90.0);
    let q = (reduced * 1e6).round() / 1e6;
    if q >= 90.0 {
        0.0
    } else {
        q
    }
}

/// Whether point `(px, py)` lies in the glyph centred at `(cx, cy)`.
pub fn glyph_contains(cx: f64, cy: f64, size: f64, rotation_deg: f64, px: f64, py: f64) -> bool {
    let theta = canonical_rotation_deg(rotation_deg).to_radians();
    let (sin, cos) = theta.sin_cos();
    contains_with(cx, cy, size * 0.5 * FRAC_1_SQRT_2, sin, cos, px, py)
}

#[inline]
fn contains_with(cx: f64, cy: f64, half_side: f64, sin: f64, cos: f64, px: f64, py: f64) -> bool {
    let dx = px - cx;
    let dy = py - cy;
    // undo the glyph rotation, then express in the square's edge-aligned frame
    let a = dx * cos + dy * sin;
    let b = -dx * sin + dy * cos;
    let u = (a + b) * FRAC_1_SQRT_2;
    let v = (b - a) * FRAC_1_SQRT_2;
    -half_side <= u && u < half_side && -half_side <= v && v < half_side
}

/// OR one glyph into `img`. Returns `true` if part of the glyph fell outside
/// the image and was clipped.
pub fn rasterize_glyph(img: &mut GsnImage, cx: f64, cy: f64, size: f64, rotation_deg: f64) -> bool {
    if !(size > 0.0) {
        return false;
    }
    let theta = canonical_rotation_deg(rotation_deg).to_radians();
    let (sin, cos) = theta.sin_cos();
    let half_side = size * 0.5 * FRAC_1_SQRT_2;
    let reach = size * 0.5;

    let clipped =
        cx - reach < 0.0 || cy - reach < 0.0 || cx + reach > img.width as f64 || cy + reach > img.height as f64;

    let x0 = (cx - reach - 0.5).floor().max(0.0) as usize;
    let y0 = (cy - reach - 0.5).floor().max(0.0) as usize;
    let x1 = ((cx + reach - 0.5).ceil().max(-1.0) + 1.0).min(img.width as f64) as usize;
    let y1 = ((cy + reach - 0.5).ceil().max(-1.0) + 1.0).min(img.height as f64) as usize;
    for y in y0..y1 {
        for x in x0..x1 {
            if contains_with(cx, cy, half_side, sin, cos, x as f64 + 0.5, y as f64 + 0.5) {
                img.set(x, y, true);
            }
        }
    }
    clipped
}

/// Draw every feature of one sample. Overlapping glyphs are OR-ed; glyphs
/// crossing the border are clipped with a warning.
pub fn render_gsn(layout: &FeatureLayout, params: &[Glyph], geometry: &ImageGeometry) -> Result<GsnImage> {
    if params.len() != layout.len() {
        return Err(GsnError::DimensionMismatch {
            expected: layout.len(),
            found: params.len(),
        });
    }
    let mut img = GsnImage::blank(geometry.width, geometry.height);
    let mut clipped = 0;
    for (&(gx, gy), glyph) in layout.coords.iter().zip(params) {
        let (cx, cy) = geometry.cell_center(layout, gx, gy);
        if rasterize_glyph(&mut img, cx, cy, glyph.size, glyph.rotation_deg) {
            clipped += 1;
        }
    }
    if clipped > 0 {
        log::warn!("{clipped} glyph(s) clipped at the image border");
    }
    Ok(img)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single(size: f64, rotation: f64) -> GsnImage {
        let layout = FeatureLayout::new(1, 1, vec![(0, 0)], vec!["f".into()]).unwrap();
        let geometry = ImageGeometry {
            width: 9,
            height: 9,
            margin: 0.0,
        };
        render_gsn(
            &layout,
            &[Glyph {
                size,
                rotation_deg: rotation,
            }],
            &geometry,
        )
        .unwrap()
    }

    #[test]
    fn size_three_diamond_is_a_plus() {
        let img = single(3.0, 0.0);
        let lit: Vec<(usize, usize)> = (0..9)
            .flat_map(|y| (0..9).map(move |x| (x, y)))
            .filter(|&(x, y)| img.get(x, y))
            .collect();
        assert_eq!(lit, vec![(4, 3), (3, 4), (4, 4), (5, 4), (4, 5)]);
    }

    #[test]
    fn half_turn_and_quarter_turn_are_identical() {
        assert_eq!(single(5.3, 0.0), single(5.3, 180.0));
        assert_eq!(single(6.1, 17.25), single(6.1, 107.25));
        assert_eq!(canonical_rotation_deg(10.3), canonical_rotation_deg(100.3));
        assert_eq!(canonical_rotation_deg(89.999_999_99), 0.0);
    }

    #[test]
    fn no_features_is_black() {
        let layout = FeatureLayout::new(2, 2, vec![], vec![]).unwrap();
        let geometry = ImageGeometry {
            width: 10,
            height: 8,
            margin: 2.0,
        };
        let img = render_gsn(&layout, &[], &geometry).unwrap();
        assert_eq!(img.count_white(), 0);
    }

    #[test]
    fn clipping_is_reported_not_fatal() {
        let mut img = GsnImage::blank(5, 5);
        assert!(rasterize_glyph(&mut img, 0.5, 0.5, 4.0, 30.0));
        assert!(img.get(0, 0));
        assert!(!rasterize_glyph(&mut img, 2.5, 2.5, 3.0, 0.0));
    }

    #[test]
    fn grid_cells_map_inside_margins() {
        let layout = FeatureLayout::new(3, 2, vec![(0, 0)], vec!["f".into()]).unwrap();
        let g = ImageGeometry {
            width: 44,
            height: 32,
            margin: 4.0,
        };
        assert_eq!(g.cell_center(&layout, 0, 0), (4.0, 4.0));
        assert_eq!(g.cell_center(&layout, 2, 1), (40.0, 28.0));
        assert_eq!(g.cell_center(&layout, 1, 0), (22.0, 4.0));
    }
}
