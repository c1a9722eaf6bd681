use std::fmt;
use std::hint::black_box;
use std::time::Instant;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::eval::synth::synth_document;
use crate::fht::{drt_projection, fht, Orientation, SlopeSign};
use crate::raster::{horizontal_derivative, GrayImage};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimingReport {
    pub image_side: usize,
    /// Distinct projection angles produced by the four transform passes.
    pub projections: usize,
    pub fht_micros: f64,
    pub drt_micros: f64,
    pub speedup: f64,
}

impl fmt::Display for TimingReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "image side:   {} px", self.image_side)?;
        writeln!(f, "projections:  {}", self.projections)?;
        writeln!(f, "FHT median:   {:.1} us", self.fht_micros)?;
        writeln!(f, "DRT median:   {:.1} us", self.drt_micros)?;
        write!(f, "speedup:      {:.1}x", self.speedup)
    }
}

/// Projection angles (degrees) matching the four transform passes on an
/// `n`-sided image: `atan(s / (n - 1))` for `|s| < n` around both axes.
pub fn matched_drt_angles(n: usize) -> Vec<f64> {
    let steps = (n - 1) as f64;
    let base: Vec<f64> = (-(n as i64 - 1)..n as i64)
        .map(|s| (s as f64 / steps).atan().to_degrees())
        .collect();
    base.iter()
        .copied()
        .chain(base.iter().map(|a| a + 90.0))
        .collect()
}

fn median(mut samples: Vec<f64>) -> f64 {
    samples.sort_by(f64::total_cmp);
    let mid = samples.len() / 2;
    if samples.len() % 2 == 1 {
        samples[mid]
    } else {
        0.5 * (samples[mid - 1] + samples[mid])
    }
}

fn time_micros(mut f: impl FnMut()) -> f64 {
    let start = Instant::now();
    f();
    (start.elapsed().as_secs_f64() * 1e6).max(f64::MIN_POSITIVE)
}

/// Median wall time of the four transform passes against rotate-and-project
/// at the same number of angles, on one thread.
pub fn time_transforms(side: usize, repeats: usize) -> Result<TimingReport> {
    if side < 256 || !side.is_power_of_two() {
        return Err(Error::domain(format!(
            "timing side {side} must be a power of two >= 256"
        )));
    }
    if repeats < 3 {
        return Err(Error::domain(format!(
            "need at least 3 repeats, got {repeats}"
        )));
    }
    let (page, _) = synth_document(side, 3.0, 0)?;
    let edges = horizontal_derivative(&page)?;
    let angles = matched_drt_angles(side);
    let (fht_runs, drt_runs) = time_pair(&edges, &page, &angles, repeats);
    let fht_micros = median(fht_runs);
    let drt_micros = median(drt_runs);
    Ok(TimingReport {
        image_side: side,
        projections: angles.len(),
        fht_micros,
        drt_micros,
        speedup: drt_micros / fht_micros,
    })
}

fn time_pair(
    edges: &GrayImage,
    page: &GrayImage,
    angles: &[f64],
    repeats: usize,
) -> (Vec<f64>, Vec<f64>) {
    let passes = [
        (Orientation::MostlyHorizontal, SlopeSign::Positive),
        (Orientation::MostlyHorizontal, SlopeSign::Negative),
        (Orientation::MostlyVertical, SlopeSign::Positive),
        (Orientation::MostlyVertical, SlopeSign::Negative),
    ];
    let fht_runs = (0..repeats)
        .map(|_| {
            time_micros(|| {
                for (o, s) in passes {
                    black_box(fht(black_box(edges), o, s).expect("dyadic input"));
                }
            })
        })
        .collect();
    let drt_runs = (0..repeats)
        .map(|_| {
            time_micros(|| {
                for &a in angles {
                    black_box(drt_projection(black_box(page), a));
                }
            })
        })
        .collect();
    (fht_runs, drt_runs)
}
