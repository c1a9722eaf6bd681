use std::path::Path;

use rayon::prelude::*;

use crate::criterion::SkewEstimate;
use crate::detector::{detect_skew, DetectorConfig};
use crate::error::Result;
use crate::eval::manifest::ManifestEntry;
use crate::eval::metrics::SampleRecord;
use crate::raster::load_image;

/// One manifest entry after detection.
#[derive(Debug, Clone)]
pub struct Evaluated {
    pub record: SampleRecord,
    pub estimate: SkewEstimate,
}

/// Detects the skew of every manifest image under `images`, in parallel.
/// Results keep manifest order; the first failure aborts the run.
pub fn evaluate_entries(
    images: &Path,
    entries: &[ManifestEntry],
    cfg: &DetectorConfig,
) -> Result<Vec<Evaluated>> {
    cfg.validate()?;
    entries
        .par_iter()
        .map(|entry| {
            let img = load_image(images.join(&entry.filename))?;
            let estimate = detect_skew(&img, cfg)?;
            Ok(Evaluated {
                record: SampleRecord::new(
                    &entry.filename,
                    &entry.group_id,
                    entry.gt_angle,
                    estimate.angle,
                ),
                estimate,
            })
        })
        .collect()
}
