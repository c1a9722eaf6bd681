use std::cmp::Ordering;
use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};

/// Threshold used for the correct-estimation percentage, in degrees.
pub const DEFAULT_THRESHOLD: f64 = 0.1;

/// Rule used to pick the samples that enter TOP80.
pub const TOP80_RULE: &str = "mean of the floor(0.8 * N) smallest errors, at least one";

/// One evaluated image.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleRecord {
    pub filename: String,
    pub group_id: String,
    pub gt_angle: f64,
    pub est_angle: f64,
    pub error: f64,
}

impl SampleRecord {
    pub fn new(
        filename: impl Into<String>,
        group_id: impl Into<String>,
        gt_angle: f64,
        est_angle: f64,
    ) -> Self {
        Self {
            filename: filename.into(),
            group_id: group_id.into(),
            gt_angle,
            est_angle,
            error: (est_angle - gt_angle).abs(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupStats {
    pub group_id: String,
    pub count: usize,
    pub aed: f64,
    pub top80: f64,
    pub ce: f64,
    pub max: f64,
    pub min: f64,
    pub range: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BinStats {
    /// Lower edge of the one-degree ground-truth bin.
    pub degree_bin: i64,
    pub aed: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub count: usize,
    pub aed: f64,
    pub top80: f64,
    pub ce: f64,
    pub max_error: f64,
    pub threshold: f64,
    pub top80_rule: &'static str,
    pub per_group: Vec<GroupStats>,
    pub per_bin: Vec<BinStats>,
}

impl EvalReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Compensated (Neumaier) sum returned as `(sum, correction)`.
fn compensated_sum(values: impl IntoIterator<Item = f64>) -> (f64, f64) {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for x in values {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    (sum, comp)
}

/// Mean with a compensated sum and an fma-corrected division, so means of
/// short decimal fixtures come out correctly rounded.
pub(crate) fn accurate_mean(values: &[f64]) -> f64 {
    let (sum, comp) = compensated_sum(values.iter().copied());
    let n = values.len() as f64;
    let q = sum / n;
    let rem = (-q).mul_add(n, sum);
    q + (rem + comp) / n
}

struct Summary {
    aed: f64,
    top80: f64,
    ce: f64,
    max: f64,
    min: f64,
}

fn summarize(errors: &[f64], threshold: f64) -> Summary {
    debug_assert!(!errors.is_empty());
    let mut sorted = errors.to_vec();
    sorted.sort_by(f64::total_cmp);
    let keep = ((errors.len() as f64 * 0.8).floor() as usize).max(1);
    let hits = errors.iter().filter(|&&e| e <= threshold).count();
    Summary {
        aed: accurate_mean(errors),
        top80: accurate_mean(&sorted[..keep]),
        ce: 100.0 * hits as f64 / errors.len() as f64,
        max: sorted[sorted.len() - 1],
        min: sorted[0],
    }
}

/// AED, TOP80 and CE over all records, plus per-group and per-degree tables.
pub fn compute_metrics(records: &[SampleRecord], threshold: f64) -> Result<EvalReport> {
    if records.is_empty() {
        return Err(Error::domain("cannot compute metrics over zero records"));
    }
    if threshold.is_nan() || threshold <= 0.0 {
        return Err(Error::domain(format!(
            "threshold {threshold} must be positive"
        )));
    }
    let errors: Vec<f64> = records.iter().map(|r| r.error).collect();
    let all = summarize(&errors, threshold);
    Ok(EvalReport {
        count: records.len(),
        aed: all.aed,
        top80: all.top80,
        ce: all.ce,
        max_error: all.max,
        threshold,
        top80_rule: TOP80_RULE,
        per_group: group_stats(records, threshold),
        per_bin: bin_by_degree(records),
    })
}

/// Numeric ids compare as numbers, anything else lexically.
fn compare_ids(a: &str, b: &str) -> Ordering {
    match (a.parse::<i64>(), b.parse::<i64>()) {
        (Ok(x), Ok(y)) => x.cmp(&y),
        _ => a.cmp(b),
    }
}

/// Per-group statistics, worst (highest AED) first; equal AEDs are ordered
/// by group id.
pub fn group_stats(records: &[SampleRecord], threshold: f64) -> Vec<GroupStats> {
    let mut groups: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for r in records {
        groups.entry(r.group_id.as_str()).or_default().push(r.error);
    }
    let mut out: Vec<GroupStats> = groups
        .into_iter()
        .map(|(id, errors)| {
            let s = summarize(&errors, threshold);
            GroupStats {
                group_id: id.to_string(),
                count: errors.len(),
                aed: s.aed,
                top80: s.top80,
                ce: s.ce,
                max: s.max,
                min: s.min,
                range: s.max - s.min,
            }
        })
        .collect();
    out.sort_by(|a, b| {
        b.aed
            .total_cmp(&a.aed)
            .then_with(|| compare_ids(&a.group_id, &b.group_id))
    });
    out
}

/// AED per one-degree bin of the ground-truth angle (`floor(gt)`), in
/// ascending bin order. Empty bins are omitted.
pub fn bin_by_degree(records: &[SampleRecord]) -> Vec<BinStats> {
    let mut bins: BTreeMap<i64, Vec<f64>> = BTreeMap::new();
    for r in records {
        bins.entry(r.gt_angle.floor() as i64)
            .or_default()
            .push(r.error);
    }
    bins.into_iter()
        .map(|(degree_bin, errors)| BinStats {
            degree_bin,
            aed: accurate_mean(&errors),
            count: errors.len(),
        })
        .collect()
}

/// Histogram of absolute errors with bins `[k * width, (k + 1) * width)`,
/// as `(lower_edge, count)` pairs from zero up to the largest error.
pub fn error_histogram(records: &[SampleRecord], width: f64) -> Vec<(f64, usize)> {
    assert!(width > 0.0, "bin width must be positive");
    let Some(max) = records.iter().map(|r| r.error).reduce(f64::max) else {
        return Vec::new();
    };
    let mut counts = vec![0usize; (max / width).floor() as usize + 1];
    for r in records {
        counts[(r.error / width).floor() as usize] += 1;
    }
    counts
        .into_iter()
        .enumerate()
        .map(|(k, c)| (k as f64 * width, c))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn with_errors(errors: &[f64]) -> Vec<SampleRecord> {
        errors
            .iter()
            .enumerate()
            .map(|(i, &e)| SampleRecord::new(format!("{i}.png"), "0", 0.0, e))
            .collect()
    }

    #[test]
    fn fixture_metrics() {
        let report =
            compute_metrics(&with_errors(&[0.05, 0.05, 0.2, 0.3]), DEFAULT_THRESHOLD).unwrap();
        assert_eq!(report.aed, 0.15);
        assert_eq!(report.top80, 0.1);
        assert_eq!(report.ce, 50.0);
        assert_eq!(report.max_error, 0.3);
    }

    #[test]
    fn perfect_run() {
        let report = compute_metrics(&with_errors(&[0.0; 7]), 0.1).unwrap();
        assert_eq!((report.aed, report.top80, report.ce), (0.0, 0.0, 100.0));
    }

    #[test]
    fn record_error_is_absolute_difference() {
        let r = SampleRecord::new("a", "1", 2.5, -1.0);
        assert_eq!(r.error, 3.5);
    }

    #[test]
    fn empty_input_and_bad_threshold() {
        assert!(matches!(compute_metrics(&[], 0.1), Err(Error::Domain(_))));
        assert!(compute_metrics(&with_errors(&[0.1]), 0.0).is_err());
    }

    #[test]
    fn single_record_top80_uses_one_sample() {
        let report = compute_metrics(&with_errors(&[0.4]), 0.1).unwrap();
        assert_eq!(report.top80, 0.4);
    }

    #[test]
    fn group_table_matches_worst_group_row() {
        // spread chosen to reproduce MAX 0.340 / MIN 0.266 / RANGE 0.074
        let errors = [
            0.340, 0.300, 0.310, 0.290, 0.266, 0.320, 0.305, 0.295, 0.315, 0.330,
        ];
        let records: Vec<_> = errors
            .iter()
            .map(|&e| SampleRecord::new("x", "68", 1.0, 1.0 + e))
            .collect();
        let g = &group_stats(&records, 0.1)[0];
        assert!((g.max - 0.340).abs() < 1e-12);
        assert!((g.min - 0.266).abs() < 1e-12);
        assert!((g.range - 0.074).abs() < 1e-12);
        assert_eq!(g.ce, 0.0);
    }

    #[test]
    fn group_order_and_single_member() {
        let records = vec![
            SampleRecord::new("a", "10", 0.0, 0.2),
            SampleRecord::new("b", "9", 0.0, 0.2),
            SampleRecord::new("c", "2", 0.0, 0.5),
        ];
        let groups = group_stats(&records, 0.1);
        let ids: Vec<_> = groups.iter().map(|g| g.group_id.as_str()).collect();
        assert_eq!(ids, ["2", "9", "10"]);
        assert_eq!(groups[0].max, groups[0].min);
        assert_eq!(groups[0].range, 0.0);
    }

    #[test]
    fn degree_bins() {
        let records = vec![
            SampleRecord::new("a", "0", 0.2, 0.3),
            SampleRecord::new("b", "0", 0.7, 1.0),
            SampleRecord::new("c", "1", -0.5, -0.5),
        ];
        let bins = bin_by_degree(&records);
        assert_eq!(bins.len(), 2);
        assert_eq!((bins[0].degree_bin, bins[0].count), (-1, 1));
        assert_eq!((bins[1].degree_bin, bins[1].count), (0, 2));
        assert!((bins[1].aed - 0.2).abs() < 1e-15);
        assert!(bin_by_degree(&[]).is_empty());
    }

    #[test]
    fn histogram_counts() {
        let h = error_histogram(&with_errors(&[0.01, 0.02, 0.11, 0.35]), 0.1);
        assert_eq!(
            h.iter().map(|(_, c)| *c).collect::<Vec<_>>(),
            vec![2, 1, 0, 1]
        );
        assert!(error_histogram(&[], 0.1).is_empty());
    }

    #[test]
    fn report_json_has_contract_keys() {
        let report = compute_metrics(&with_errors(&[0.05, 0.2]), 0.1).unwrap();
        let v: serde_json::Value = serde_json::from_str(&report.to_json()).unwrap();
        for key in [
            "aed",
            "top80",
            "ce",
            "max_error",
            "threshold",
            "per_group",
            "per_bin",
        ] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
        assert!(v["per_group"].is_array() && v["per_bin"].is_array());
    }

    proptest! {
        #[test]
        fn top80_never_exceeds_aed(errors in proptest::collection::vec(0.0f64..20.0, 1..200)) {
            let r = compute_metrics(&with_errors(&errors), 0.1).unwrap();
            prop_assert!(r.top80 <= r.aed);
            prop_assert!((0.0..=100.0).contains(&r.ce));
        }

        #[test]
        fn ce_monotone_in_threshold(errors in proptest::collection::vec(0.0f64..2.0, 1..50), a in 0.01f64..1.0, b in 0.01f64..1.0) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let records = with_errors(&errors);
            prop_assert!(compute_metrics(&records, lo).unwrap().ce <= compute_metrics(&records, hi).unwrap().ce);
        }

        #[test]
        fn permutation_invariant(errors in proptest::collection::vec(0.0f64..2.0, 1..50), seed in any::<u64>()) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let records = with_errors(&errors);
            let mut shuffled = records.clone();
            shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let a = compute_metrics(&records, 0.1).unwrap();
            let b = compute_metrics(&shuffled, 0.1).unwrap();
            prop_assert_eq!(a.top80, b.top80);
            prop_assert_eq!(a.ce, b.ce);
            prop_assert_eq!(a.max_error, b.max_error);
            prop_assert!((a.aed - b.aed).abs() <= 1e-15 * a.aed.max(1.0));
        }

        #[test]
        fn group_bounds(errors in proptest::collection::vec(0.0f64..2.0, 1..60)) {
            let records: Vec<_> = errors.iter().enumerate()
                .map(|(i, &e)| SampleRecord::new("f", (i % 4).to_string(), 0.0, e))
                .collect();
            for g in group_stats(&records, 0.1) {
                prop_assert!(g.range >= 0.0);
                prop_assert!(g.min <= g.aed + 1e-12 && g.aed <= g.max + 1e-12);
            }
        }
    }
}
