//! Grayscale rasters and the pixel-level operations the detector needs:
//! dyadic padding, absolute central-difference derivatives and bilinear
//! rotation.

mod io;

pub use io::{load_image, save_image, save_pgm16};

use crate::error::{Error, Result};

/// A row-major raster of intensities in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl GrayImage {
    /// Wraps `data` as a `width` x `height` image.
    ///
    /// Fails if either side is zero, the buffer length does not match, or a
    /// value falls outside `[0, 1]` (NaN included).
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::degenerate(format!(
                "image must be nonempty, got {width}x{height}"
            )));
        }
        if data.len() != width * height {
            return Err(Error::domain(format!(
                "buffer holds {} values, expected {}x{} = {}",
                data.len(),
                width,
                height,
                width * height
            )));
        }
        if let Some(pos) = data.iter().position(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::domain(format!(
                "intensity {} at index {} is outside [0, 1]",
                data[pos], pos
            )));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    /// All-zero image. Panics if either side is zero.
    pub fn zeros(width: usize, height: usize) -> Self {
        Self::filled(width, height, 0.0)
    }

    /// Constant image. Panics if either side is zero or `value` is outside `[0, 1]`.
    pub fn filled(width: usize, height: usize, value: f64) -> Self {
        assert!(width > 0 && height > 0, "image must be nonempty");
        assert!((0.0..=1.0).contains(&value), "intensity out of range");
        Self {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    /// Builds an image by evaluating `f(x, y)` at every pixel; values are
    /// clamped into `[0, 1]`.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        assert!(width > 0 && height > 0, "image must be nonempty");
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y).clamp(0.0, 1.0));
            }
        }
        Self {
            width,
            height,
            data,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: f64) {
        debug_assert!((0.0..=1.0).contains(&value));
        self.data[y * self.width + x] = value;
    }

    pub fn row(&self, y: usize) -> &[f64] {
        &self.data[y * self.width..(y + 1) * self.width]
    }

    pub fn total(&self) -> f64 {
        self.data.iter().sum()
    }

    pub fn transpose(&self) -> Self {
        let mut data = vec![0.0; self.data.len()];
        for y in 0..self.height {
            for x in 0..self.width {
                data[x * self.height + y] = self.data[y * self.width + x];
            }
        }
        Self {
            width: self.height,
            height: self.width,
            data,
        }
    }

    /// Multiplies every intensity by `factor`, which must lie in `[0, 1]`.
    pub fn scaled(&self, factor: f64) -> Self {
        assert!(
            (0.0..=1.0).contains(&factor),
            "scale factor must be in [0, 1]"
        );
        Self {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|v| v * factor).collect(),
        }
    }

    /// Binarizes at `level`: pixels `>= level` become 1, the rest 0.
    pub fn thresholded(&self, level: f64) -> Self {
        Self {
            width: self.width,
            height: self.height,
            data: self
                .data
                .iter()
                .map(|&v| if v >= level { 1.0 } else { 0.0 })
                .collect(),
        }
    }

    pub fn inverted(&self) -> Self {
        Self {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|v| 1.0 - v).collect(),
        }
    }
}

/// Zero-pads `img` to a square of side `2^ceil(log2(max(width, height)))`,
/// keeping the original content at the top-left corner.
pub fn pad_to_dyadic(img: &GrayImage) -> GrayImage {
    let side = img.width.max(img.height).next_power_of_two();
    if img.width == side && img.height == side {
        return img.clone();
    }
    let mut data = vec![0.0; side * side];
    for y in 0..img.height {
        data[y * side..y * side + img.width].copy_from_slice(img.row(y));
    }
    GrayImage {
        width: side,
        height: side,
        data,
    }
}

/// `|I(x+1, y) - I(x-1, y)| / 2` with replicated borders.
pub fn horizontal_derivative(img: &GrayImage) -> Result<GrayImage> {
    let (w, h) = (img.width, img.height);
    if w < 2 {
        return Err(Error::degenerate(format!(
            "horizontal derivative needs width >= 2, got {w}"
        )));
    }
    let mut data = Vec::with_capacity(w * h);
    for y in 0..h {
        let row = img.row(y);
        for x in 0..w {
            let right = row[(x + 1).min(w - 1)];
            let left = row[x.saturating_sub(1)];
            data.push((right - left).abs() / 2.0);
        }
    }
    Ok(GrayImage {
        width: w,
        height: h,
        data,
    })
}

/// `|I(x, y+1) - I(x, y-1)| / 2` with replicated borders.
pub fn vertical_derivative(img: &GrayImage) -> Result<GrayImage> {
    let (w, h) = (img.width, img.height);
    if h < 2 {
        return Err(Error::degenerate(format!(
            "vertical derivative needs height >= 2, got {h}"
        )));
    }
    let mut data = Vec::with_capacity(w * h);
    for y in 0..h {
        let below = img.row((y + 1).min(h - 1));
        let above = img.row(y.saturating_sub(1));
        data.extend(below.iter().zip(above).map(|(b, a)| (b - a).abs() / 2.0));
    }
    Ok(GrayImage {
        width: w,
        height: h,
        data,
    })
}

/// Rotates about the image center by `angle` degrees with bilinear sampling.
/// Samples that fall outside the source read 0.
///
/// The rotation is counterclockwise in the (x right, y down) pixel frame,
/// i.e. a source offset `(dx, dy)` from the center lands at
/// `(dx cos a - dy sin a, dx sin a + dy cos a)`.
pub fn rotate(img: &GrayImage, angle: f64) -> GrayImage {
    rotate_with_fill(img, angle, 0.0)
}

/// [`rotate`] with a caller-chosen value for samples outside the source.
pub fn rotate_with_fill(img: &GrayImage, angle: f64, fill: f64) -> GrayImage {
    assert!(angle.is_finite(), "rotation angle must be finite");
    assert!((0.0..=1.0).contains(&fill), "fill must be in [0, 1]");
    let (w, h) = (img.width, img.height);
    let mut data = vec![fill; w * h];
    for_each_rotated(img, angle, |x, y, v| data[y * w + x] = v);
    GrayImage {
        width: w,
        height: h,
        data,
    }
}

/// Column sums of `rotate(img, angle)`, without materializing the rotated
/// image. Bit-identical to summing the rotated rows top to bottom.
pub(crate) fn rotated_column_sums(img: &GrayImage, angle: f64) -> Vec<f64> {
    assert!(angle.is_finite(), "rotation angle must be finite");
    let mut sums = vec![0.0; img.width];
    for_each_rotated(img, angle, |x, _, v| sums[x] += v);
    sums
}

/// Visits every output pixel of a rotation whose source point lies inside
/// the image, row by row, left to right.
#[inline(always)]
fn for_each_rotated(img: &GrayImage, angle: f64, mut visit: impl FnMut(usize, usize, f64)) {
    let (w, h) = (img.width, img.height);
    let (sin, cos) = angle.to_radians().sin_cos();
    let cx = (w as f64 - 1.0) / 2.0;
    let cy = (h as f64 - 1.0) / 2.0;
    let max_x = (w - 1) as f64;
    let max_y = (h - 1) as f64;
    for y in 0..h {
        let dy = y as f64 - cy;
        let (lo, hi) = inside_span(dy, cx, cy, cos, sin, max_x, max_y, w);
        for x in lo..hi {
            let dx = x as f64 - cx;
            let sx = cx + dx * cos + dy * sin;
            let sy = cy - dx * sin + dy * cos;
            // the span is widened by one pixel each side, so recheck exactly
            if (0.0..=max_x).contains(&sx) && (0.0..=max_y).contains(&sy) {
                visit(x, y, bilinear(img, sx, sy));
            }
        }
    }
}

/// Conservative range of output columns in row `dy` whose source point can
/// land inside the image.
#[allow(clippy::too_many_arguments)]
fn inside_span(
    dy: f64,
    cx: f64,
    cy: f64,
    cos: f64,
    sin: f64,
    max_x: f64,
    max_y: f64,
    w: usize,
) -> (usize, usize) {
    let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
    // source coordinate = base + slope * dx must stay within [0, limit]
    let mut clip = |base: f64, slope: f64, limit: f64| {
        if slope.abs() < 1e-12 {
            if !(-1e-9..=limit + 1e-9).contains(&base) {
                lo = f64::INFINITY;
            }
            return;
        }
        let a = (0.0 - base) / slope;
        let b = (limit - base) / slope;
        lo = lo.max(a.min(b));
        hi = hi.min(a.max(b));
    };
    clip(cx + dy * sin, cos, max_x);
    clip(cy + dy * cos, -sin, max_y);
    if lo > hi {
        return (0, 0);
    }
    let first = (lo + cx - 1.0).floor().max(0.0);
    let last = (hi + cx + 1.0).ceil().min(w as f64 - 1.0);
    if first > last {
        return (0, 0);
    }
    (first as usize, last as usize + 1)
}

/// Bilinear read at an in-bounds fractional position.
///
/// Coordinates are non-negative here, so truncation is the floor.
#[inline]
fn bilinear(img: &GrayImage, sx: f64, sy: f64) -> f64 {
    let x0 = (sx as usize).min(img.width.saturating_sub(2));
    let y0 = (sy as usize).min(img.height.saturating_sub(2));
    let x1 = (x0 + 1).min(img.width - 1);
    let y1 = (y0 + 1).min(img.height - 1);
    let fx = sx - x0 as f64;
    let fy = sy - y0 as f64;
    let (r0, r1) = (y0 * img.width, y1 * img.width);
    let d = &img.data;
    let top = d[r0 + x0] * (1.0 - fx) + d[r0 + x1] * fx;
    let bottom = d[r1 + x0] * (1.0 - fx) + d[r1 + x1] * fx;
    (top * (1.0 - fy) + bottom * fy).clamp(0.0, 1.0)
}
