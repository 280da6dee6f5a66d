//! The V statistic `V_n = (R/S)_n / sqrt(n)` and its trend in `ln n`.
//!
//! The trend is read from the OLS slope of `V_n` on `ln n` divided by the
//! mean `V_n`, so the flat band does not depend on the level of the curve
//! (anti-persistent curves sit well below 1 and have small absolute slopes).

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::regression::{ols, CurveKind, RegressionError, ScalingCurve};

/// Band on the relative slope. Gaussian white noise at N = 4096 with the
/// divisor plan gives relative slopes of roughly 0.005..0.09 (finite-n R/S
/// bias); fGn with H = 0.2 and H = 0.8 stays beyond -0.15 and 0.22.
pub const DEFAULT_FLAT_TOLERANCE: f64 = 0.1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VStatError {
    #[error("V statistic needs a rescaled-range curve, got {0:?}")]
    WrongCurveKind(CurveKind),
    #[error(transparent)]
    Regression(#[from] RegressionError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Trend {
    Flat,
    Increasing,
    Decreasing,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VPoint {
    pub n: f64,
    pub log_n: f64,
    pub v: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VStatCurve {
    pub points: Vec<VPoint>,
    /// OLS slope of `v` on `ln n`.
    pub slope: f64,
    /// `slope` divided by the mean of `v`; compared against `flat_tolerance`.
    pub relative_slope: f64,
    pub trend: Trend,
    pub flat_tolerance: f64,
    /// Scale with the largest `v`. Diagnostic only.
    pub argmax_n: f64,
}

pub fn v_statistic(curve: &ScalingCurve, flat_tolerance: f64) -> Result<VStatCurve, VStatError> {
    if curve.kind() != CurveKind::RescaledRange {
        return Err(VStatError::WrongCurveKind(curve.kind()));
    }
    let points: Vec<VPoint> = curve
        .points()
        .iter()
        .map(|p| VPoint {
            n: p.scale,
            log_n: p.scale.ln(),
            v: p.statistic / p.scale.sqrt(),
        })
        .collect();
    let (x, y): (Vec<f64>, Vec<f64>) = points.iter().map(|p| (p.log_n, p.v)).unzip();
    let (slope, _, _, _) = ols(&x, &y)?;
    let mean_v = y.iter().sum::<f64>() / y.len() as f64;
    let relative_slope = slope / mean_v;
    let trend = if relative_slope.abs() <= flat_tolerance {
        Trend::Flat
    } else if relative_slope > 0.0 {
        Trend::Increasing
    } else {
        Trend::Decreasing
    };
    let argmax_n = points
        .iter()
        .fold(points[0], |best, p| if p.v > best.v { *p } else { best })
        .n;
    Ok(VStatCurve {
        points,
        slope,
        relative_slope,
        trend,
        flat_tolerance,
        argmax_n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn curve(f: impl Fn(f64) -> f64) -> ScalingCurve {
        ScalingCurve::new(
            CurveKind::RescaledRange,
            [16.0, 32.0, 64.0, 128.0]
                .iter()
                .map(|&n| (n, f(n)))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn square_root_curve_is_flat() {
        let v = v_statistic(&curve(f64::sqrt), DEFAULT_FLAT_TOLERANCE).unwrap();
        assert!(v.points.iter().all(|p| p.v == 1.0));
        assert_eq!(v.slope, 0.0);
        assert_eq!(v.trend, Trend::Flat);
    }

    #[test]
    fn persistent_curve_increases() {
        let v = v_statistic(&curve(|n| n.powf(0.7)), DEFAULT_FLAT_TOLERANCE).unwrap();
        assert_eq!(v.trend, Trend::Increasing);
        assert_eq!(v.argmax_n, 128.0);
    }

    #[test]
    fn antipersistent_curve_decreases() {
        let v = v_statistic(&curve(|n| n.powf(0.2)), DEFAULT_FLAT_TOLERANCE).unwrap();
        assert_eq!(v.trend, Trend::Decreasing);
    }

    #[test]
    fn reconstructs_rs() {
        let c = curve(|n| 1.3 * n.powf(0.61));
        let v = v_statistic(&c, DEFAULT_FLAT_TOLERANCE).unwrap();
        for (p, q) in v.points.iter().zip(c.points()) {
            assert!((p.v * p.n.sqrt() - q.statistic).abs() <= 1e-12 * q.statistic);
        }
    }

    #[test]
    fn rejects_dfa_curve() {
        let c = ScalingCurve::new(
            CurveKind::DfaFluctuation,
            vec![(8.0, 1.0), (16.0, 2.0), (32.0, 3.0)],
        )
        .unwrap();
        assert!(matches!(
            v_statistic(&c, 0.1),
            Err(VStatError::WrongCurveKind(_))
        ));
    }
}
