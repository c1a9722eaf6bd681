//! Evaluation: contest-style error metrics, ground-truth manifests,
//! synthetic test pages and the transform timing harness.

pub mod manifest;
pub mod metrics;
pub mod run;
pub mod synth;
pub mod timing;

pub use manifest::{parse_manifest, read_manifest, write_manifest, ManifestEntry};
pub use metrics::{
    bin_by_degree, compute_metrics, error_histogram, group_stats, BinStats, EvalReport, GroupStats,
    SampleRecord, DEFAULT_THRESHOLD,
};
pub use run::{evaluate_entries, Evaluated};
pub use synth::{synth_document, PageLayout};
pub use timing::{matched_drt_angles, time_transforms, TimingReport};
