//! Rescaled-range (R/S) analysis.
//!
//! The series is cut into `V = floor(N / n)` consecutive segments of length
//! `n`, starting at index 0 (a trailing remainder is discarded). For each
//! segment the range of the mean-centred cumulative walk is divided by the
//! segment standard deviation; the ratios are averaged per scale and
//! `ln (R/S)_n` is regressed on `ln n`. The slope is the Hurst exponent.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::estimate::{Estimator, HurstEstimate};
use crate::regression::{fit_loglog, CurveKind, RegressionError, ScalingCurve};

pub const DEFAULT_MIN_SEGMENT: usize = 8;

/// Segment lengths used for a 250-return window, from 2 up to 15 parts.
pub const PAPER_SCHEDULE_250: [usize; 10] = [16, 20, 25, 31, 35, 41, 50, 62, 83, 125];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RsError {
    #[error("every segment of length {0} has zero standard deviation")]
    AllSegmentsDegenerate(usize),
    #[error("segment length {n} is invalid for a series of {len} values (minimum {min})")]
    BadSegmentLength { n: usize, len: usize, min: usize },
    #[error("invalid partition plan: {0}")]
    InvalidPlan(String),
    #[error(transparent)]
    Regression(#[from] RegressionError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum StdDevKind {
    /// `sqrt((1/n) Σ (x - m)^2)`
    #[default]
    Population,
    /// `sqrt((1/(n-1)) Σ (x - m)^2)`
    Sample,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RsConfig {
    pub min_segment_length: usize,
    pub std_dev: StdDevKind,
}

impl Default for RsConfig {
    fn default() -> Self {
        Self {
            min_segment_length: DEFAULT_MIN_SEGMENT,
            std_dev: StdDevKind::Population,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlanPolicy {
    DivisorsOnly,
    PaperSchedule,
    Explicit(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionPlan {
    total_length: usize,
    segment_lengths: Vec<usize>,
    policy: PlanPolicy,
}

impl PartitionPlan {
    pub fn total_length(&self) -> usize {
        self.total_length
    }

    /// Ascending segment lengths.
    pub fn segment_lengths(&self) -> &[usize] {
        &self.segment_lengths
    }

    pub fn policy(&self) -> &PlanPolicy {
        &self.policy
    }
}

pub fn build_partition_plan(
    total_length: usize,
    policy: PlanPolicy,
    min_segment_length: usize,
) -> Result<PartitionPlan, RsError> {
    let min = min_segment_length.max(2);
    if total_length < 2 * min {
        return Err(RsError::InvalidPlan(format!(
            "series of {total_length} values is shorter than twice the minimum segment {min}"
        )));
    }
    let mut lengths = match &policy {
        PlanPolicy::DivisorsOnly => (min..=total_length / 2)
            .filter(|&n| total_length.is_multiple_of(n))
            .collect::<Vec<_>>(),
        PlanPolicy::PaperSchedule => {
            if total_length != 250 {
                return Err(RsError::InvalidPlan(format!(
                    "the 250-return schedule needs exactly 250 values, got {total_length}"
                )));
            }
            PAPER_SCHEDULE_250
                .iter()
                .copied()
                .filter(|&n| n >= min)
                .collect()
        }
        PlanPolicy::Explicit(list) => {
            if let Some(&bad) = list.iter().find(|&&n| n < min || n > total_length) {
                return Err(RsError::InvalidPlan(format!(
                    "segment length {bad} outside [{min}, {total_length}]"
                )));
            }
            list.clone()
        }
    };
    lengths.sort_unstable();
    lengths.dedup();
    if lengths.len() < 3 {
        return Err(RsError::InvalidPlan(format!(
            "only {} segment length(s) available, at least 3 required",
            lengths.len()
        )));
    }
    Ok(PartitionPlan {
        total_length,
        segment_lengths: lengths,
        policy,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RsSegmentStats {
    pub mean: f64,
    pub std_dev: f64,
    pub range: f64,
    /// `range / std_dev`, absent when `std_dev == 0`.
    pub ratio: Option<f64>,
}

/// Mean, standard deviation, cumulative-deviation range and R/S of one segment.
pub fn segment_stats(segment: &[f64], std_dev: StdDevKind) -> RsSegmentStats {
    assert!(segment.len() >= 2, "segment needs at least two values");
    let n = segment.len() as f64;
    let mean = segment.iter().sum::<f64>() / n;
    let mut walk = 0.0_f64;
    let (mut lo, mut hi) = (0.0_f64, 0.0_f64);
    let mut ss = 0.0_f64;
    for &x in segment {
        let d = x - mean;
        walk += d;
        lo = lo.min(walk);
        hi = hi.max(walk);
        ss += d * d;
    }
    let denom = match std_dev {
        StdDevKind::Population => n,
        StdDevKind::Sample => n - 1.0,
    };
    let s = (ss / denom).sqrt();
    let range = hi - lo;
    RsSegmentStats {
        mean,
        std_dev: s,
        range,
        ratio: (s > 0.0).then(|| range / s),
    }
}

/// Average R/S over all full segments of length `n`, with the number of
/// degenerate (zero-variance) segments that were left out.
pub fn rs_at_scale_detailed(
    series: &[f64],
    n: usize,
    config: &RsConfig,
) -> Result<(f64, usize), RsError> {
    let min = config.min_segment_length.max(2);
    if n < min || n > series.len() {
        return Err(RsError::BadSegmentLength {
            n,
            len: series.len(),
            min,
        });
    }
    let mut sum = 0.0;
    let mut used = 0usize;
    let mut degenerate = 0usize;
    for seg in series.chunks_exact(n) {
        match segment_stats(seg, config.std_dev).ratio {
            Some(r) => {
                sum += r;
                used += 1;
            }
            None => degenerate += 1,
        }
    }
    if used == 0 {
        return Err(RsError::AllSegmentsDegenerate(n));
    }
    Ok((sum / used as f64, degenerate))
}

/// `(R/S)_n` for segment length `n`.
pub fn rs_at_scale(series: &[f64], n: usize, config: &RsConfig) -> Result<f64, RsError> {
    rs_at_scale_detailed(series, n, config).map(|(v, _)| v)
}

/// Builds the `(n, (R/S)_n)` curve over the plan and fits it in log-log space.
pub fn estimate_hurst_rs(
    series: &[f64],
    plan: &PartitionPlan,
    config: &RsConfig,
) -> Result<HurstEstimate, RsError> {
    if plan.total_length != series.len() {
        return Err(RsError::InvalidPlan(format!(
            "plan built for {} values, series has {}",
            plan.total_length,
            series.len()
        )));
    }
    let per_scale: Vec<(usize, f64, usize)> = plan
        .segment_lengths
        .par_iter()
        .map(|&n| rs_at_scale_detailed(series, n, config).map(|(v, d)| (n, v, d)))
        .collect::<Vec<_>>()
        // Sequential pass so the reported error is always the smallest failing scale.
        .into_iter()
        .collect::<Result<_, _>>()?;
    let degenerate = per_scale.iter().map(|p| p.2).sum();
    let curve = ScalingCurve::new(
        CurveKind::RescaledRange,
        per_scale.iter().map(|&(n, v, _)| (n as f64, v)).collect(),
    )?;
    let fit = fit_loglog(&curve)?;
    Ok(HurstEstimate::from_fit(
        fit,
        Estimator::RescaledRange,
        curve,
        degenerate,
    ))
}

/// Convenience: divisor plan with the default configuration.
pub fn hurst_rs_default(series: &[f64]) -> Result<HurstEstimate, RsError> {
    let config = RsConfig::default();
    let plan = build_partition_plan(
        series.len(),
        PlanPolicy::DivisorsOnly,
        config.min_segment_length,
    )?;
    estimate_hurst_rs(series, &plan, &config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn constant_segment_is_degenerate() {
        let s = segment_stats(&[3.0; 4], StdDevKind::Population);
        assert_eq!(s.range, 0.0);
        assert_eq!(s.std_dev, 0.0);
        assert_eq!(s.ratio, None);
    }

    #[test]
    fn alternating_segment() {
        let s = segment_stats(&[1.0, -1.0, 1.0, -1.0], StdDevKind::Population);
        assert_eq!(s.mean, 0.0);
        assert_eq!(s.std_dev, 1.0);
        assert_eq!(s.range, 1.0);
        assert_eq!(s.ratio, Some(1.0));
    }

    #[test]
    fn ramp_segment() {
        let s = segment_stats(&[1.0, 2.0, 3.0, 4.0], StdDevKind::Population);
        // deviations -1.5, -0.5, 0.5, 1.5 walk to -1.5, -2, -1.5, 0
        assert_eq!(s.mean, 2.5);
        assert_eq!(s.range, 2.0);
        assert!((s.std_dev - 1.25f64.sqrt()).abs() < 1e-15);
        assert!((s.ratio.unwrap() - 1.788_854_381_999_831_8).abs() < 1e-12);
        let sample = segment_stats(&[1.0, 2.0, 3.0, 4.0], StdDevKind::Sample);
        assert!((sample.std_dev - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn tiled_alternation() {
        let x = [1.0, -1.0, 1.0, -1.0, 1.0, -1.0, 1.0, -1.0];
        let cfg = RsConfig {
            min_segment_length: 4,
            ..RsConfig::default()
        };
        assert_eq!(rs_at_scale(&x, 4, &cfg), Ok(1.0));
    }

    #[test]
    fn constant_series_fails() {
        let x = vec![2.0; 64];
        assert_eq!(
            rs_at_scale(&x, 8, &RsConfig::default()),
            Err(RsError::AllSegmentsDegenerate(8))
        );
        assert_eq!(
            hurst_rs_default(&x).unwrap_err(),
            RsError::AllSegmentsDegenerate(8)
        );
    }

    #[test]
    fn segment_length_bounds() {
        let x = vec![0.0; 32];
        assert!(matches!(
            rs_at_scale(&x, 4, &RsConfig::default()),
            Err(RsError::BadSegmentLength { .. })
        ));
        assert!(matches!(
            rs_at_scale(&x, 33, &RsConfig::default()),
            Err(RsError::BadSegmentLength { .. })
        ));
    }

    #[test]
    fn plan_examples() {
        let p = build_partition_plan(250, PlanPolicy::PaperSchedule, 8).unwrap();
        assert_eq!(p.segment_lengths(), &PAPER_SCHEDULE_250);
        let p = build_partition_plan(64, PlanPolicy::DivisorsOnly, 8).unwrap();
        assert_eq!(p.segment_lengths(), &[8, 16, 32]);
        let p = build_partition_plan(4096, PlanPolicy::DivisorsOnly, 8).unwrap();
        let pow2: Vec<usize> = (3..=11).map(|k| 1usize << k).collect();
        assert_eq!(p.segment_lengths(), pow2.as_slice());
    }

    #[test]
    fn plan_errors() {
        assert!(matches!(
            build_partition_plan(251, PlanPolicy::PaperSchedule, 8),
            Err(RsError::InvalidPlan(_))
        ));
        assert!(matches!(
            build_partition_plan(10, PlanPolicy::DivisorsOnly, 8),
            Err(RsError::InvalidPlan(_))
        ));
        // 34 = 2 * 17: only 17 qualifies
        assert!(matches!(
            build_partition_plan(34, PlanPolicy::DivisorsOnly, 8),
            Err(RsError::InvalidPlan(_))
        ));
        assert!(matches!(
            build_partition_plan(100, PlanPolicy::Explicit(vec![4, 10, 20]), 8),
            Err(RsError::InvalidPlan(_))
        ));
        assert!(matches!(
            build_partition_plan(100, PlanPolicy::Explicit(vec![10, 20, 200]), 8),
            Err(RsError::InvalidPlan(_))
        ));
        let p = build_partition_plan(100, PlanPolicy::Explicit(vec![50, 10, 20]), 8).unwrap();
        assert_eq!(p.segment_lengths(), &[10, 20, 50]);
    }

    #[test]
    fn plan_length_mismatch() {
        let plan = build_partition_plan(64, PlanPolicy::DivisorsOnly, 8).unwrap();
        assert!(matches!(
            estimate_hurst_rs(&[1.0; 65], &plan, &RsConfig::default()),
            Err(RsError::InvalidPlan(_))
        ));
    }

    proptest! {
        #[test]
        fn walk_closes_and_range_nonnegative(x in proptest::collection::vec(-10.0f64..10.0, 2..64)) {
            let s = segment_stats(&x, StdDevKind::Population);
            let walk: f64 = x.iter().map(|v| v - s.mean).sum();
            prop_assert!(walk.abs() < 1e-10);
            prop_assert!(s.range >= 0.0);
            prop_assert!(s.std_dev >= 0.0);
            prop_assert_eq!(s.ratio.is_some(), s.std_dev > 0.0);
        }

        #[test]
        fn affine_invariance(
            x in proptest::collection::vec(-1.0f64..1.0, 64),
            a in 0.1f64..10.0,
            b in -5.0f64..5.0,
        ) {
            let y: Vec<f64> = x.iter().map(|v| a * v + b).collect();
            let plan = build_partition_plan(64, PlanPolicy::DivisorsOnly, 8).unwrap();
            let cfg = RsConfig::default();
            let ex = estimate_hurst_rs(&x, &plan, &cfg).unwrap();
            let ey = estimate_hurst_rs(&y, &plan, &cfg).unwrap();
            prop_assert!((ex.h - ey.h).abs() < 1e-9);
        }
    }
}
