//! End-to-end skew detection and correction.

use crate::criterion::{
    combine, merge_signs, peak_to_angle, resample_profile, weighted_profile, CriterionProfile,
    SkewEstimate,
};
use crate::error::{Error, Result};
use crate::fht::{fht, Orientation, SlopeSign};
use crate::raster::{
    horizontal_derivative, pad_to_dyadic, rotate_with_fill, vertical_derivative, GrayImage,
};

/// Smallest accepted image side.
pub const MIN_SIDE: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct DetectorConfig {
    /// Half-width of the search window in degrees, in `(0, 45]`.
    pub max_angle: f64,
    /// Add the mostly-vertical channel to the horizontal one.
    pub use_vertical: bool,
    /// Divide each channel by its mean before summing.
    pub normalize_before_combine: bool,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            max_angle: 15.0,
            use_vertical: true,
            normalize_before_combine: false,
        }
    }
}

impl DetectorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.max_angle > 0.0 && self.max_angle <= 45.0) {
            return Err(Error::domain(format!(
                "max angle {} is outside (0, 45]",
                self.max_angle
            )));
        }
        Ok(())
    }
}

/// Merged two-sign profiles of both channels, before combination.
#[derive(Debug, Clone)]
pub struct ChannelProfiles {
    pub horizontal: CriterionProfile,
    pub vertical: CriterionProfile,
}

/// Runs both derivative channels through the transform and scores them.
///
/// Derivatives are taken on the original raster and zero-padded afterwards,
/// so the padding seam carries no gradient energy.
pub fn channel_profiles(img: &GrayImage) -> Result<ChannelProfiles> {
    if img.width().min(img.height()) < MIN_SIDE {
        return Err(Error::degenerate(format!(
            "image is {}x{}, detection needs both sides >= {MIN_SIDE}",
            img.width(),
            img.height()
        )));
    }
    let d_h = pad_to_dyadic(&horizontal_derivative(img)?);
    let d_v = pad_to_dyadic(&vertical_derivative(img)?);

    let ((h_pos, h_neg), (v_pos, v_neg)) = rayon::join(
        || {
            rayon::join(
                || fht(&d_h, Orientation::MostlyHorizontal, SlopeSign::Positive),
                || fht(&d_h, Orientation::MostlyHorizontal, SlopeSign::Negative),
            )
        },
        || {
            rayon::join(
                || fht(&d_v, Orientation::MostlyVertical, SlopeSign::Positive),
                || fht(&d_v, Orientation::MostlyVertical, SlopeSign::Negative),
            )
        },
    );

    let horizontal = merge_signs(&weighted_profile(&h_pos?)?, &weighted_profile(&h_neg?)?)?;
    // vertical passes map positive shifts to negative skew tangents
    let vertical = merge_signs(&weighted_profile(&v_neg?)?, &weighted_profile(&v_pos?)?)?;
    Ok(ChannelProfiles {
        horizontal,
        vertical,
    })
}

/// Combines the channel profiles per `cfg` and picks the peak.
pub fn estimate_from_profiles(
    channels: &ChannelProfiles,
    cfg: &DetectorConfig,
) -> Result<SkewEstimate> {
    cfg.validate()?;
    let c_h = &channels.horizontal;
    let combined = if cfg.use_vertical {
        let c_v = resample_profile(&channels.vertical, c_h.tangents())?;
        if cfg.normalize_before_combine {
            combine(&c_h.mean_normalized(), &c_v.mean_normalized())?
        } else {
            combine(c_h, &c_v)?
        }
    } else {
        c_h.clone()
    };
    peak_to_angle(&combined, cfg.max_angle)
}

/// Estimates the skew of `img` in degrees.
pub fn detect_skew(img: &GrayImage, cfg: &DetectorConfig) -> Result<SkewEstimate> {
    cfg.validate()?;
    estimate_from_profiles(&channel_profiles(img)?, cfg)
}

/// Undoes `estimate` by rotating the page back; uncovered corners are white.
pub fn deskew(img: &GrayImage, estimate: &SkewEstimate) -> GrayImage {
    deskew_by(img, estimate.angle)
}

/// [`deskew`] for a bare angle in degrees.
pub fn deskew_by(img: &GrayImage, angle: f64) -> GrayImage {
    rotate_with_fill(img, -angle, 1.0)
}
