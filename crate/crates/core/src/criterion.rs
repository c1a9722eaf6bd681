//! Scoring of accumulator rows and conversion of the best-scoring row into
//! a skew angle.
//!
//! Every accumulator row is scored with the sum of squared first
//! differences of its values (SSG), multiplied by `K^3` where
//! `K = sqrt(1 + s^2 / (n - 1)^2)` is the length ratio of the shift-`s`
//! line to an axis-aligned one. Scores are indexed by the skew tangent the
//! row stands for, so profiles from different passes can be merged, resampled
//! onto one grid and summed.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fht::{HoughAccumulator, Orientation};

/// Which channel a profile was derived from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ProfileSource {
    Horizontal,
    Vertical,
    Combined,
}

impl From<Orientation> for ProfileSource {
    fn from(o: Orientation) -> Self {
        match o {
            Orientation::MostlyHorizontal => ProfileSource::Horizontal,
            Orientation::MostlyVertical => ProfileSource::Vertical,
        }
    }
}

/// Criterion scores on a strictly increasing grid of skew tangents.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionProfile {
    tangents: Vec<f64>,
    values: Vec<f64>,
    source: ProfileSource,
}

impl CriterionProfile {
    pub fn new(tangents: Vec<f64>, values: Vec<f64>, source: ProfileSource) -> Result<Self> {
        if tangents.is_empty() || tangents.len() != values.len() {
            return Err(Error::domain(format!(
                "profile needs matching nonempty grids, got {} tangents and {} values",
                tangents.len(),
                values.len()
            )));
        }
        if !tangents.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::domain(
                "profile tangents must be strictly increasing",
            ));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::domain(format!(
                "profile value {v} is not a finite nonnegative score"
            )));
        }
        Ok(Self {
            tangents,
            values,
            source,
        })
    }

    pub fn tangents(&self) -> &[f64] {
        &self.tangents
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn source(&self) -> ProfileSource {
        self.source
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Divides every value by the profile mean (no-op on an all-zero profile).
    pub fn mean_normalized(&self) -> Self {
        let mean = self.values.iter().sum::<f64>() / self.values.len() as f64;
        if mean <= 0.0 {
            return self.clone();
        }
        Self {
            tangents: self.tangents.clone(),
            values: self.values.iter().map(|v| v / mean).collect(),
            source: self.source,
        }
    }

    /// Two whitespace-separated columns, `tangent value`, one entry per line.
    pub fn to_two_column(&self) -> String {
        self.tangents
            .iter()
            .zip(&self.values)
            .map(|(t, v)| format!("{t:.9} {v:.9e}\n"))
            .collect()
    }
}

/// Result of a detection run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SkewEstimate {
    /// Skew in degrees.
    pub angle: f64,
    pub peak_value: f64,
    pub peak_index: usize,
    #[serde(skip)]
    pub profile: CriterionProfile,
}

/// Sum of squared first differences.
pub fn ssg(row: &[f64]) -> Result<f64> {
    if row.len() < 2 {
        return Err(Error::domain(format!(
            "ssg needs at least 2 values, got {}",
            row.len()
        )));
    }
    Ok(ssg_unchecked(row))
}

fn ssg_unchecked(row: &[f64]) -> f64 {
    row.windows(2).map(|w| (w[1] - w[0]) * (w[1] - w[0])).sum()
}

/// Scores every row of `acc` as `K^3 * ssg(row)`.
///
/// The tangent of row `s` is `s / (n - 1)` with the pass sign applied. For
/// mostly-vertical passes the sign is also flipped: a page rotated by a
/// positive angle tilts its vertical strokes toward negative `dx/dy`.
pub fn weighted_profile(acc: &HoughAccumulator) -> Result<CriterionProfile> {
    let n = acc.n();
    if n < 2 {
        return Err(Error::domain(format!(
            "accumulator side {n} is too small to score"
        )));
    }
    let direction = match acc.orientation {
        Orientation::MostlyHorizontal => acc.sign.factor(),
        Orientation::MostlyVertical => -acc.sign.factor(),
    };
    let steps = (n - 1) as f64;
    let mut entries: Vec<(f64, f64)> = acc
        .rows()
        .enumerate()
        .map(|(s, row)| {
            let ratio = s as f64 / steps;
            let k = (1.0 + ratio * ratio).sqrt();
            let tangent = (direction * s as i64) as f64 / steps;
            (tangent, k * k * k * ssg_unchecked(row))
        })
        .collect();
    entries.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (tangents, values) = entries.into_iter().unzip();
    CriterionProfile::new(tangents, values, acc.orientation.into())
}

/// Joins a profile covering tangents `>= 0` with one covering `<= 0` into a
/// single profile over both, collapsing the shared zero-tangent entry.
pub fn merge_signs(upper: &CriterionProfile, lower: &CriterionProfile) -> Result<CriterionProfile> {
    if upper.source != lower.source {
        return Err(Error::domain(format!(
            "cannot merge {:?} and {:?} profiles",
            upper.source, lower.source
        )));
    }
    let mirrored_matches = upper.len() == lower.len()
        && upper
            .tangents
            .iter()
            .zip(lower.tangents.iter().rev())
            .all(|(u, l)| *u == -*l);
    if !mirrored_matches || upper.tangents[0] != 0.0 {
        return Err(Error::domain(
            "merge needs mirrored tangent grids that meet at zero",
        ));
    }
    let last = lower.len() - 1;
    let mut tangents = Vec::with_capacity(2 * upper.len() - 1);
    let mut values = Vec::with_capacity(2 * upper.len() - 1);
    tangents.extend_from_slice(&lower.tangents[..last]);
    values.extend_from_slice(&lower.values[..last]);
    tangents.push(0.0);
    values.push(0.5 * (upper.values[0] + lower.values[last]));
    tangents.extend_from_slice(&upper.tangents[1..]);
    values.extend_from_slice(&upper.values[1..]);
    CriterionProfile::new(tangents, values, upper.source)
}

/// Linearly interpolates `src` onto `targets`, which must lie inside the
/// span of `src`'s grid.
pub fn resample_profile(src: &CriterionProfile, targets: &[f64]) -> Result<CriterionProfile> {
    if targets.is_empty() || !targets.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::domain(
            "resample targets must be nonempty and strictly increasing",
        ));
    }
    let lo = src.tangents[0];
    let hi = *src.tangents.last().unwrap();
    if targets[0] < lo || *targets.last().unwrap() > hi {
        return Err(Error::domain(format!(
            "resample targets [{}, {}] leave source span [{lo}, {hi}]",
            targets[0],
            targets.last().unwrap()
        )));
    }
    let values = targets
        .iter()
        .map(|&t| {
            // first grid point >= t
            let i = src.tangents.partition_point(|&g| g < t);
            if src.tangents[i] == t {
                return src.values[i];
            }
            let (t0, t1) = (src.tangents[i - 1], src.tangents[i]);
            let (v0, v1) = (src.values[i - 1], src.values[i]);
            let f = (t - t0) / (t1 - t0);
            v0 + (v1 - v0) * f
        })
        .collect();
    CriterionProfile::new(targets.to_vec(), values, src.source)
}

/// Element-wise sum of two profiles on the same grid.
pub fn combine(c_h: &CriterionProfile, c_v: &CriterionProfile) -> Result<CriterionProfile> {
    if c_h.tangents != c_v.tangents {
        return Err(Error::domain(
            "combine needs profiles on the same tangent grid",
        ));
    }
    let values = c_h
        .values
        .iter()
        .zip(&c_v.values)
        .map(|(a, b)| a + b)
        .collect();
    CriterionProfile::new(c_h.tangents.clone(), values, ProfileSource::Combined)
}

/// Picks the best entry with `|tangent| <= tan(max_angle)` and converts it
/// to degrees. Ties go to the smaller `|tangent|`, then to the negative side.
pub fn peak_to_angle(profile: &CriterionProfile, max_angle: f64) -> Result<SkewEstimate> {
    if !(max_angle > 0.0 && max_angle <= 45.0) {
        return Err(Error::domain(format!(
            "max angle {max_angle} is outside (0, 45]"
        )));
    }
    // tan(45 deg) rounds just below 1
    let limit = max_angle.to_radians().tan() + 1e-12;
    let mut best: Option<usize> = None;
    for (i, (&t, &v)) in profile.tangents.iter().zip(&profile.values).enumerate() {
        if t.abs() > limit {
            continue;
        }
        let better = match best {
            None => true,
            Some(b) => {
                let (bt, bv) = (profile.tangents[b], profile.values[b]);
                v > bv || (v == bv && (t.abs() < bt.abs() || (t.abs() == bt.abs() && t < bt)))
            }
        };
        if better {
            best = Some(i);
        }
    }
    let peak_index = best
        .ok_or_else(|| Error::domain(format!("no profile entry within +-{max_angle} degrees")))?;
    Ok(SkewEstimate {
        angle: profile.tangents[peak_index].atan().to_degrees(),
        peak_value: profile.values[peak_index],
        peak_index,
        profile: profile.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fht::{fht, SlopeSign};
    use crate::raster::GrayImage;
    use proptest::prelude::*;

    fn grid(n: usize) -> Vec<f64> {
        let steps = (n - 1) as f64;
        (-(n as i64 - 1)..n as i64)
            .map(|s| s as f64 / steps)
            .collect()
    }

    fn profile(tangents: Vec<f64>, values: Vec<f64>) -> CriterionProfile {
        CriterionProfile::new(tangents, values, ProfileSource::Combined).unwrap()
    }

    #[test]
    fn ssg_fixtures() {
        assert_eq!(ssg(&[5.0, 5.0, 5.0, 5.0]).unwrap(), 0.0);
        assert_eq!(ssg(&[0.0, 1.0, 0.0]).unwrap(), 2.0);
        assert!(matches!(ssg(&[1.0]), Err(Error::Domain(_))));
    }

    #[test]
    fn weights_at_ends_of_grid() {
        let mut img = GrayImage::zeros(8, 8);
        img.set(0, 0, 1.0);
        let acc = fht(&img, Orientation::MostlyHorizontal, SlopeSign::Positive).unwrap();
        let p = weighted_profile(&acc).unwrap();
        // s = 0: weight 1
        assert_eq!(p.values()[0], ssg(acc.row(0)).unwrap());
        // s = n - 1: weight 2^(3/2)
        let expected = 2f64.powf(1.5) * ssg(acc.row(7)).unwrap();
        assert!((p.values()[7] - expected).abs() < 1e-12);
        assert_eq!(p.tangents()[7], 1.0);
    }

    #[test]
    fn weighted_profile_orders_and_signs_tangents() {
        let img = GrayImage::zeros(4, 4);
        let tangents = |o, s| {
            let acc = fht(&img, o, s).unwrap();
            weighted_profile(&acc).unwrap().tangents().to_vec()
        };
        let up = vec![0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0];
        let down = vec![-1.0, -2.0 / 3.0, -1.0 / 3.0, 0.0];
        assert_eq!(
            tangents(Orientation::MostlyHorizontal, SlopeSign::Positive),
            up
        );
        assert_eq!(
            tangents(Orientation::MostlyHorizontal, SlopeSign::Negative),
            down
        );
        assert_eq!(
            tangents(Orientation::MostlyVertical, SlopeSign::Negative),
            up
        );
        assert_eq!(
            tangents(Orientation::MostlyVertical, SlopeSign::Positive),
            down
        );
        // no negative zero sneaks in
        let t = tangents(Orientation::MostlyHorizontal, SlopeSign::Negative);
        assert!(t[3].is_sign_positive());
    }

    #[test]
    fn zero_accumulator_scores_zero() {
        let acc = fht(
            &GrayImage::zeros(16, 16),
            Orientation::MostlyVertical,
            SlopeSign::Positive,
        )
        .unwrap();
        assert!(weighted_profile(&acc)
            .unwrap()
            .values()
            .iter()
            .all(|&v| v == 0.0));
    }

    #[test]
    fn tiny_accumulator_rejected() {
        let acc = fht(
            &GrayImage::zeros(1, 1),
            Orientation::MostlyHorizontal,
            SlopeSign::Positive,
        )
        .unwrap();
        assert!(weighted_profile(&acc).is_err());
    }

    #[test]
    fn merge_length_and_zero() {
        let img = GrayImage::from_fn(16, 16, |x, y| ((x * 7 + y * 3) % 5) as f64 / 4.0);
        let pos = weighted_profile(
            &fht(&img, Orientation::MostlyHorizontal, SlopeSign::Positive).unwrap(),
        )
        .unwrap();
        let neg = weighted_profile(
            &fht(&img, Orientation::MostlyHorizontal, SlopeSign::Negative).unwrap(),
        )
        .unwrap();
        let merged = merge_signs(&pos, &neg).unwrap();
        assert_eq!(merged.len(), 31);
        assert_eq!(merged.tangents(), grid(16).as_slice());
        assert_eq!(merged.tangents().iter().filter(|&&t| t == 0.0).count(), 1);
        assert_eq!(merged.values()[15], pos.values()[0]);
    }

    #[test]
    fn merge_of_mirror_symmetric_image_is_symmetric() {
        let n = 16;
        let img = GrayImage::from_fn(n, n, |x, y| {
            let xs = x.min(n - 1 - x);
            ((xs * 5 + y * y) % 7) as f64 / 6.0
        });
        let pos = weighted_profile(
            &fht(&img, Orientation::MostlyHorizontal, SlopeSign::Positive).unwrap(),
        )
        .unwrap();
        let neg = weighted_profile(
            &fht(&img, Orientation::MostlyHorizontal, SlopeSign::Negative).unwrap(),
        )
        .unwrap();
        let merged = merge_signs(&pos, &neg).unwrap();
        let v = merged.values();
        for i in 0..v.len() {
            assert_eq!(v[i], v[v.len() - 1 - i]);
        }
    }

    #[test]
    fn merge_all_zero_and_mismatches() {
        let pos = profile(vec![0.0, 0.5, 1.0], vec![0.0; 3]);
        let neg = profile(vec![-1.0, -0.5, 0.0], vec![0.0; 3]);
        assert!(merge_signs(&pos, &neg)
            .unwrap()
            .values()
            .iter()
            .all(|&v| v == 0.0));

        let skewed = profile(vec![-1.0, -0.4, 0.0], vec![0.0; 3]);
        assert!(merge_signs(&pos, &skewed).is_err());
        let other =
            CriterionProfile::new(vec![-1.0, -0.5, 0.0], vec![0.0; 3], ProfileSource::Vertical)
                .unwrap();
        assert!(merge_signs(&pos, &other).is_err());
    }

    #[test]
    fn resample_fixtures() {
        let src = profile(vec![0.0, 1.0], vec![0.0, 10.0]);
        assert_eq!(resample_profile(&src, &[0.5]).unwrap().values(), &[5.0]);
        assert_eq!(resample_profile(&src, src.tangents()).unwrap(), src);

        let flat = profile(vec![-1.0, -0.2, 0.0, 0.7, 1.0], vec![3.0; 5]);
        let r = resample_profile(&flat, &[-0.9, -0.1, 0.33, 0.99]).unwrap();
        assert!(r.values().iter().all(|&v| (v - 3.0).abs() < 1e-15));
    }

    #[test]
    fn resample_rejects_extrapolation() {
        let src = profile(vec![0.0, 1.0], vec![0.0, 10.0]);
        assert!(matches!(
            resample_profile(&src, &[-0.1, 0.5]),
            Err(Error::Domain(_))
        ));
        assert!(resample_profile(&src, &[0.5, 0.4]).is_err());
    }

    #[test]
    fn combine_fixture() {
        let t = vec![-0.5, -0.25, 0.0, 0.25, 0.5];
        let a = profile(t.clone(), vec![1.0, 2.0, 3.0, 4.0, 5.0]);
        let b = profile(t.clone(), vec![0.5, 0.0, 7.0, 1.5, 2.0]);
        let c = combine(&a, &b).unwrap();
        assert_eq!(c.values(), &[1.5, 2.0, 10.0, 5.5, 7.0]);
        assert_eq!(c.source(), ProfileSource::Combined);
        assert_eq!(
            combine(&a, &b).unwrap().values(),
            combine(&b, &a).unwrap().values()
        );
        let zero = profile(t, vec![0.0; 5]);
        assert_eq!(combine(&a, &zero).unwrap().values(), a.values());
        let other = profile(vec![-0.5, -0.2, 0.0, 0.25, 0.5], vec![0.0; 5]);
        assert!(combine(&a, &other).is_err());
    }

    #[test]
    fn peak_fixtures() {
        let t = grid(512);
        let mut spike = vec![0.0; t.len()];
        spike[511] = 1.0;
        assert_eq!(
            peak_to_angle(&profile(t.clone(), spike), 15.0)
                .unwrap()
                .angle,
            0.0
        );

        let mut spike = vec![0.0; t.len()];
        spike[511 + 137] = 4.0;
        let est = peak_to_angle(&profile(t.clone(), spike), 20.0).unwrap();
        assert!((est.angle - (137.0f64 / 511.0).atan().to_degrees()).abs() < 1e-12);
        assert!((est.angle - 15.008156).abs() < 1e-6);
        assert_eq!(est.peak_value, 4.0);
        assert_eq!(est.peak_index, 648);

        let flat = peak_to_angle(&profile(t, vec![1.0; 1023]), 15.0).unwrap();
        assert_eq!(flat.angle, 0.0);
        assert!(flat.angle.is_sign_positive());
    }

    #[test]
    fn peak_respects_window_and_tie_order() {
        let t = vec![-0.5, -0.1, 0.1, 0.5];
        let est = peak_to_angle(&profile(t.clone(), vec![9.0, 1.0, 1.0, 9.0]), 10.0).unwrap();
        assert_eq!(est.peak_index, 1);
        assert!(peak_to_angle(&profile(vec![0.5, 0.9], vec![1.0, 1.0]), 10.0).is_err());
        assert!(peak_to_angle(&profile(t.clone(), vec![1.0; 4]), 0.0).is_err());
        assert!(peak_to_angle(&profile(t, vec![1.0; 4]), 46.0).is_err());
        let full =
            peak_to_angle(&profile(vec![-1.0, 0.0, 1.0], vec![0.0, 0.0, 1.0]), 45.0).unwrap();
        assert!((full.angle - 45.0).abs() < 1e-12);
    }

    fn arb_profile() -> impl Strategy<Value = CriterionProfile> {
        (2usize..40)
            .prop_flat_map(|len| {
                (
                    proptest::collection::vec(0.001f64..1.0, len),
                    proptest::collection::vec(0.0f64..100.0, len),
                    -1.0f64..0.0,
                )
            })
            .prop_map(|(gaps, values, start)| {
                let mut t = start;
                let tangents = gaps
                    .iter()
                    .map(|g| {
                        let cur = t;
                        t += g;
                        cur
                    })
                    .collect();
                profile(tangents, values)
            })
    }

    proptest! {
        #[test]
        fn resample_stays_within_value_bounds(p in arb_profile(), fractions in proptest::collection::vec(0.0f64..=1.0, 1..20)) {
            let lo = p.tangents()[0];
            let hi = *p.tangents().last().unwrap();
            let mut targets: Vec<f64> = fractions.iter().map(|f| lo + f * (hi - lo)).map(|t| t.clamp(lo, hi)).collect();
            targets.sort_by(f64::total_cmp);
            targets.dedup();
            let r = resample_profile(&p, &targets).unwrap();
            let vmin = p.values().iter().copied().fold(f64::INFINITY, f64::min);
            let vmax = p.values().iter().copied().fold(0.0, f64::max);
            for v in r.values() {
                prop_assert!(*v >= vmin - 1e-9 && *v <= vmax + 1e-9);
            }
        }

        #[test]
        fn peak_angle_stays_in_window(p in arb_profile(), max_angle in 1.0f64..=45.0) {
            if let Ok(est) = peak_to_angle(&p, max_angle) {
                prop_assert!(est.angle.abs() <= max_angle + 1e-9);
                let limit = max_angle.to_radians().tan() + 1e-12;
                let best = p.tangents().iter().zip(p.values())
                    .filter(|(t, _)| t.abs() <= limit)
                    .map(|(_, v)| *v)
                    .fold(0.0, f64::max);
                prop_assert_eq!(est.peak_value, best);
            }
        }
    }
}
