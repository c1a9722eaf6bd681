//! Brady-Yong fast Hough transform over dyadic line patterns, a brute-force
//! reference implementation of the same sums, and the classical
//! rotate-and-project Radon transform used for timing comparisons.
//!
//! A pass traverses the image along one axis (`t`) and, for every shift `s`
//! and start offset `y`, sums the samples `P(t, y + d(t, s))` where `d` is the
//! dyadic staircase from `0` to `s`. Reads that leave the image contribute
//! zero; there is no cyclic wraparound.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::raster::{rotated_column_sums, save_pgm16, GrayImage};

/// Line family covered by a pass.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Orientation {
    /// Lines within 45 degrees of the x axis; traversal runs along x.
    MostlyHorizontal,
    /// Lines within 45 degrees of the y axis; traversal runs along y.
    MostlyVertical,
}

/// Slope direction of a pass. Negative passes mirror the image along the
/// traversal axis and reuse the positive recursion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SlopeSign {
    Positive,
    Negative,
}

impl SlopeSign {
    pub fn factor(self) -> i64 {
        match self {
            SlopeSign::Positive => 1,
            SlopeSign::Negative => -1,
        }
    }
}

impl fmt::Display for Orientation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Orientation::MostlyHorizontal => "h",
            Orientation::MostlyVertical => "v",
        })
    }
}

impl FromStr for Orientation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "h" | "horizontal" => Ok(Orientation::MostlyHorizontal),
            "v" | "vertical" => Ok(Orientation::MostlyVertical),
            other => Err(Error::domain(format!("unknown orientation {other:?}"))),
        }
    }
}

impl fmt::Display for SlopeSign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SlopeSign::Positive => "+",
            SlopeSign::Negative => "-",
        })
    }
}

impl FromStr for SlopeSign {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "+" | "pos" | "positive" => Ok(SlopeSign::Positive),
            "-" | "neg" | "negative" => Ok(SlopeSign::Negative),
            other => Err(Error::domain(format!("unknown slope sign {other:?}"))),
        }
    }
}

/// Output of one transform pass: `cells[s][y]` is the sum along the dyadic
/// line with shift `s` starting at offset `y`.
#[derive(Debug, Clone, PartialEq)]
pub struct HoughAccumulator {
    pub orientation: Orientation,
    pub sign: SlopeSign,
    n: usize,
    cells: Vec<f64>,
}

impl HoughAccumulator {
    /// Side length of the (square, dyadic) transformed image.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn row(&self, shift: usize) -> &[f64] {
        &self.cells[shift * self.n..(shift + 1) * self.n]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.cells.chunks_exact(self.n)
    }

    pub fn get(&self, shift: usize, offset: usize) -> f64 {
        self.cells[shift * self.n + offset]
    }

    pub fn cells(&self) -> &[f64] {
        &self.cells
    }

    pub fn max_abs_diff(&self, other: &HoughAccumulator) -> f64 {
        assert_eq!(self.n, other.n);
        self.cells
            .iter()
            .zip(&other.cells)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Linear 16-bit quantization, one image row per shift. Returns the
    /// samples and the factor that maps accumulator values to samples.
    pub fn to_u16(&self) -> (Vec<u16>, f64) {
        let max = self.cells.iter().copied().fold(0.0, f64::max);
        let scale = if max > 0.0 { 65535.0 / max } else { 1.0 };
        let samples = self
            .cells
            .iter()
            .map(|v| (v * scale).round().clamp(0.0, 65535.0) as u16)
            .collect();
        (samples, scale)
    }

    /// Writes the accumulator as a 16-bit PGM plus a one-line sidecar
    /// (`<path>.txt`) recording the quantization scale.
    pub fn save_pgm16(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let (samples, scale) = self.to_u16();
        save_pgm16(path, self.n, self.n, &samples)?;
        let mut sidecar = path.as_os_str().to_owned();
        sidecar.push(".txt");
        let line = format!(
            "scale {scale:.9e} orientation {} sign {} n {}\n",
            self.orientation, self.sign, self.n
        );
        std::fs::write(&sidecar, line).map_err(|e| Error::io(sidecar, e))
    }
}

/// Offsets `d(t, s)` for `t = 0..n` of the dyadic line with total shift `s`.
///
/// Width 1 is `[0]`. A width-`n` pattern is the width-`n/2` pattern for
/// `s / 2` on the first half, followed by the same pattern raised by
/// `ceil(s / 2)` on the second half.
pub fn dyadic_pattern(n: usize, s: usize) -> Result<Vec<usize>> {
    if !n.is_power_of_two() {
        return Err(Error::domain(format!(
            "pattern length {n} is not a power of two"
        )));
    }
    if s >= n {
        return Err(Error::domain(format!(
            "shift {s} out of range for length {n}"
        )));
    }
    let mut out = Vec::with_capacity(n);
    fill_pattern(n, s, 0, &mut out);
    Ok(out)
}

fn fill_pattern(n: usize, s: usize, base: usize, out: &mut Vec<usize>) {
    if n == 1 {
        out.push(base);
        return;
    }
    let half = n / 2;
    let sub = s / 2;
    fill_pattern(half, sub, base, out);
    fill_pattern(half, sub, base + s - sub, out);
}

fn check_dyadic(img: &GrayImage) -> Result<usize> {
    let (w, h) = (img.width(), img.height());
    if w != h || !w.is_power_of_two() {
        return Err(Error::domain(format!(
            "transform needs a square image with power-of-two side, got {w}x{h}"
        )));
    }
    Ok(w)
}

/// Lays the image out traversal-major: `buf[t * n + c] = P(t, c)`.
fn traversal_major(img: &GrayImage, orientation: Orientation, sign: SlopeSign) -> Vec<f64> {
    let n = img.width();
    let src = img.data();
    let mut buf = vec![0.0; n * n];
    for t in 0..n {
        let t_src = match sign {
            SlopeSign::Positive => t,
            SlopeSign::Negative => n - 1 - t,
        };
        let dst = &mut buf[t * n..(t + 1) * n];
        match orientation {
            // P(t, c) = pixel(x = t, row = c)
            Orientation::MostlyHorizontal => {
                for (c, v) in dst.iter_mut().enumerate() {
                    *v = src[c * n + t_src];
                }
            }
            // P(t, c) = pixel(x = c, row = t)
            Orientation::MostlyVertical => {
                dst.copy_from_slice(&src[t_src * n..(t_src + 1) * n]);
            }
        }
    }
    buf
}

#[cfg(debug_assertions)]
thread_local! {
    static ADDITIONS: std::cell::Cell<u64> = const { std::cell::Cell::new(0) };
}

/// Returns and resets the number of cell additions performed by [`fht`] on
/// the current thread. Only available in debug builds.
#[cfg(debug_assertions)]
pub fn take_addition_count() -> u64 {
    ADDITIONS.with(|c| c.replace(0))
}

/// Fast Hough transform with `n^2 log2 n` additions.
pub fn fht(img: &GrayImage, orientation: Orientation, sign: SlopeSign) -> Result<HoughAccumulator> {
    let n = check_dyadic(img)?;
    let mut src = traversal_major(img, orientation, sign);
    let mut dst = vec![0.0; n * n];

    // After the pass for `half`, block b of width 2*half holds, at index
    // (b + s) * n + y, the partial sum over its columns for shift s.
    let mut half = 1;
    while half < n {
        let width = 2 * half;
        for block in (0..n).step_by(width) {
            for s in 0..width {
                let sub = s / 2;
                let lift = s - sub;
                let left = &src[(block + sub) * n..(block + sub + 1) * n];
                let right = &src[(block + half + sub) * n..(block + half + sub + 1) * n];
                let out = &mut dst[(block + s) * n..(block + s + 1) * n];
                let inside = n - lift;
                for ((o, l), r) in out[..inside]
                    .iter_mut()
                    .zip(&left[..inside])
                    .zip(&right[lift..])
                {
                    *o = l + r;
                }
                // the right half of these lines starts below the image
                out[inside..].copy_from_slice(&left[inside..]);
            }
            #[cfg(debug_assertions)]
            ADDITIONS.with(|c| c.set(c.get() + (width * n) as u64));
        }
        std::mem::swap(&mut src, &mut dst);
        half = width;
    }

    Ok(HoughAccumulator {
        orientation,
        sign,
        n,
        cells: src,
    })
}

/// Reference transform: materializes every dyadic pattern and sums the
/// pixel reads directly, `O(n^3)`.
pub fn brute_force_hough(
    img: &GrayImage,
    orientation: Orientation,
    sign: SlopeSign,
) -> Result<HoughAccumulator> {
    let n = check_dyadic(img)?;
    let read = |t: usize, c: usize| -> f64 {
        if c >= n {
            return 0.0;
        }
        let t = match sign {
            SlopeSign::Positive => t,
            SlopeSign::Negative => n - 1 - t,
        };
        match orientation {
            Orientation::MostlyHorizontal => img.get(t, c),
            Orientation::MostlyVertical => img.get(c, t),
        }
    };
    let mut cells = vec![0.0; n * n];
    for s in 0..n {
        let pattern = dyadic_pattern(n, s)?;
        for y in 0..n {
            cells[s * n + y] = pattern
                .iter()
                .enumerate()
                .map(|(t, d)| read(t, y + d))
                .sum();
        }
    }
    Ok(HoughAccumulator {
        orientation,
        sign,
        n,
        cells,
    })
}

/// Column sums of `img` rotated by `-angle` degrees.
pub fn drt_projection(img: &GrayImage, angle: f64) -> Vec<f64> {
    rotated_column_sums(img, -angle)
}

/// Row and column projections of `img` as `(column_sums, row_sums)`:
/// the first entry is indexed by column, the second by row.
///
/// Sums are pairwise (recursive halving), which for power-of-two lengths is
/// the same association order the transform uses for its shift-0 row.
pub fn projection_profiles(img: &GrayImage) -> (Vec<f64>, Vec<f64>) {
    let (w, h) = (img.width(), img.height());
    let row_sums = (0..h).map(|y| pairwise_sum(img.row(y))).collect();
    let t = img.transpose();
    let column_sums = (0..w).map(|x| pairwise_sum(t.row(x))).collect();
    (column_sums, row_sums)
}

fn pairwise_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        len => {
            let (a, b) = values.split_at(len / 2);
            pairwise_sum(a) + pairwise_sum(b)
        }
    }
}
