//! Document skew detection built on the Brady-Yong fast Hough transform.
//!
//! The pipeline takes a grayscale page, computes absolute central-difference
//! derivatives along both axes, runs four dyadic Hough passes (mostly
//! horizontal / mostly vertical, positive / negative slope), scores every
//! accumulator row with a length-weighted sum of squared gradients, and
//! reports the angle whose combined score is largest.
//!
//! ```no_run
//! use fhtskew_core::{detect_skew, load_image, DetectorConfig};
//!
//! let page = load_image("scan.png")?;
//! let estimate = detect_skew(&page, &DetectorConfig::default())?;
//! println!("{:.6}", estimate.angle);
//! # Ok::<(), fhtskew_core::Error>(())
//! ```
//!
//! Angles follow the pixel frame: x grows to the right, y grows downward,
//! and a positive angle is the rotation `(x, y) -> (x cos a - y sin a,
//! x sin a + y cos a)`. A line with positive skew therefore descends from
//! left to right on screen.

pub mod criterion;
pub mod detector;
pub mod error;
pub mod eval;
pub mod fht;
pub mod raster;

pub use criterion::{
    combine, merge_signs, peak_to_angle, resample_profile, ssg, weighted_profile, CriterionProfile,
    ProfileSource, SkewEstimate,
};
pub use detector::{deskew, detect_skew, DetectorConfig};
pub use error::{Error, Result};
pub use eval::{
    bin_by_degree, compute_metrics, group_stats, synth_document, time_transforms, BinStats,
    EvalReport, GroupStats, SampleRecord, TimingReport,
};
pub use fht::{
    brute_force_hough, drt_projection, dyadic_pattern, fht, projection_profiles, HoughAccumulator,
    Orientation, SlopeSign,
};
pub use raster::{
    horizontal_derivative, load_image, pad_to_dyadic, rotate, rotate_with_fill, save_image,
    vertical_derivative, GrayImage,
};
