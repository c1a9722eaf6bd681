//! Synthetic text pages with known skew.
//!
//! A page is a set of text lines, each a run of words made of solid glyph
//! blocks separated by one-pixel gaps; some glyphs carry a thin ascender
//! stroke. Layout is in whole pixels so an unrotated page is exactly
//! binary. Rotation is rendered analytically with 4x4 supersampling per
//! pixel, so the rotated page has no resampling blur.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::raster::GrayImage;

pub const MIN_SIZE: usize = 64;
pub const MAX_ANGLE: f64 = 20.0;

const SUPERSAMPLE: usize = 4;

#[derive(Debug, Clone)]
struct Glyph {
    x0: usize,
    x1: usize,
    /// ascender as `(x0, x1)`, rising `ascent` pixels above the line
    stroke: Option<(usize, usize)>,
}

#[derive(Debug, Clone)]
struct TextLine {
    top: usize,
    height: usize,
    ascent: usize,
    glyphs: Vec<Glyph>,
}

/// Pixel layout of an unrotated page.
#[derive(Debug, Clone)]
pub struct PageLayout {
    size: usize,
    lines: Vec<TextLine>,
}

impl PageLayout {
    pub fn generate(size: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let margin = (size / 16).max(4);
        let usable = size - 2 * margin;

        let count = rng.gen_range(8..=20usize);
        let mut heights: Vec<usize> = (0..count).map(|_| rng.gen_range(4..=12)).collect();
        // each line needs its ascender zone plus a one-pixel gap
        let need = |hs: &[usize]| hs.iter().map(|h| h + h / 2 + 1).sum::<usize>();
        while need(&heights) > usable {
            let tallest = (0..heights.len()).max_by_key(|&i| heights[i]).unwrap();
            if heights[tallest] > 4 {
                heights[tallest] -= 1;
            } else if heights.len() > 8 {
                heights.pop();
            } else {
                break;
            }
        }

        // spread the leftover height over random gaps
        let spare = usable.saturating_sub(need(&heights));
        let weights: Vec<f64> = (0..=heights.len())
            .map(|_| rng.gen_range(0.2..1.0))
            .collect();
        let total_weight: f64 = weights.iter().sum();
        let mut y = margin as f64;
        let mut lines = Vec::with_capacity(heights.len());
        for (i, &height) in heights.iter().enumerate() {
            y += spare as f64 * weights[i] / total_weight;
            let ascent = height / 2;
            let top = y.floor() as usize + ascent + 1;
            lines.push(TextLine {
                top,
                height,
                ascent,
                glyphs: Self::words(&mut rng, margin, usable, height),
            });
            y += (height + ascent + 1) as f64;
        }
        Self { size, lines }
    }

    fn words(rng: &mut ChaCha8Rng, margin: usize, usable: usize, height: usize) -> Vec<Glyph> {
        let length = (usable as f64 * rng.gen_range(0.5..=1.0)) as usize;
        let start = margin + rng.gen_range(0..=usable - length);
        let end = start + length;
        let max_glyph = (height / 2 + 1).max(2);

        let mut glyphs = Vec::new();
        let mut x = start;
        'line: loop {
            let letters = rng.gen_range(2..=9);
            for _ in 0..letters {
                let w = rng.gen_range(2..=max_glyph);
                if x + w > end {
                    break 'line;
                }
                let stroke = rng.gen_bool(0.25).then(|| {
                    let sw = rng.gen_range(1..=2).min(w);
                    (x, x + sw)
                });
                glyphs.push(Glyph {
                    x0: x,
                    x1: x + w,
                    stroke,
                });
                x += w + 1;
            }
            x += rng.gen_range(height / 2 + 1..=height + 2);
            if x >= end {
                break;
            }
        }
        glyphs
    }

    /// Whether the continuous page point `(u, v)` is inked. Pixel `i`
    /// covers `[i - 0.5, i + 0.5)` on each axis.
    fn inked(&self, u: f64, v: f64) -> bool {
        let (u, v) = (u + 0.5, v + 0.5);
        if u < 0.0 || v < 0.0 {
            return false;
        }
        // lines are sorted by top, ascender zones do not overlap
        let idx = self
            .lines
            .partition_point(|l| ((l.top - l.ascent) as f64) <= v);
        let Some(line) = idx.checked_sub(1).map(|i| &self.lines[i]) else {
            return false;
        };
        let bottom = (line.top + line.height) as f64;
        if v >= bottom {
            return false;
        }
        let g = line.glyphs.partition_point(|g| (g.x0 as f64) <= u);
        let Some(glyph) = g.checked_sub(1).map(|i| &line.glyphs[i]) else {
            return false;
        };
        if u >= glyph.x1 as f64 {
            return false;
        }
        if v >= line.top as f64 {
            return true;
        }
        matches!(glyph.stroke, Some((s0, s1)) if u < s1 as f64 && u >= s0 as f64)
    }

    /// Renders the page rotated by `angle` degrees about its center, with
    /// the same sign convention as [`crate::raster::rotate`].
    pub fn render(&self, angle: f64) -> GrayImage {
        let n = self.size;
        let (sin, cos) = angle.to_radians().sin_cos();
        let c = (n as f64 - 1.0) / 2.0;
        let offsets: Vec<f64> = (0..SUPERSAMPLE)
            .map(|i| (i as f64 + 0.5) / SUPERSAMPLE as f64 - 0.5)
            .collect();
        let samples = (SUPERSAMPLE * SUPERSAMPLE) as f64;
        GrayImage::from_fn(n, n, |x, y| {
            let mut hits = 0usize;
            for oy in &offsets {
                let dy = y as f64 + oy - c;
                for ox in &offsets {
                    let dx = x as f64 + ox - c;
                    let u = c + dx * cos + dy * sin;
                    let v = c - dx * sin + dy * cos;
                    if self.inked(u, v) {
                        hits += 1;
                    }
                }
            }
            1.0 - hits as f64 / samples
        })
    }

    /// Row spans `(top, bottom)` of the line bodies, excluding ascenders.
    pub fn line_spans(&self) -> Vec<(usize, usize)> {
        self.lines
            .iter()
            .map(|l| (l.top, l.top + l.height))
            .collect()
    }

    /// Column spans of the glyphs on line `i`.
    pub fn glyph_spans(&self, i: usize) -> Vec<(usize, usize)> {
        self.lines[i].glyphs.iter().map(|g| (g.x0, g.x1)).collect()
    }
}

/// Renders a `size` x `size` page skewed by `angle` degrees. Layout is a
/// deterministic function of `seed`; returns the page and its ground truth.
pub fn synth_document(size: usize, angle: f64, seed: u64) -> Result<(GrayImage, f64)> {
    if size < MIN_SIZE {
        return Err(Error::domain(format!(
            "synthetic page size {size} is below {MIN_SIZE}"
        )));
    }
    if !(-MAX_ANGLE..=MAX_ANGLE).contains(&angle) {
        return Err(Error::domain(format!(
            "synthetic skew {angle} is outside +-{MAX_ANGLE} degrees"
        )));
    }
    Ok((PageLayout::generate(size, seed).render(angle), angle))
}
