//! Ordinary least squares in log-log space.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RegressionError {
    #[error("degenerate scaling curve: {0}")]
    DegenerateCurve(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveKind {
    RescaledRange,
    DfaFluctuation,
    RankSize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub scale: f64,
    pub statistic: f64,
}

/// Pairs `(scale, statistic)` with strictly increasing positive scales and
/// strictly positive statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingCurve {
    kind: CurveKind,
    points: Vec<CurvePoint>,
}

impl ScalingCurve {
    pub fn new(kind: CurveKind, points: Vec<(f64, f64)>) -> Result<Self, RegressionError> {
        if points.len() < 3 {
            return Err(RegressionError::DegenerateCurve(format!(
                "{} point(s), at least 3 required",
                points.len()
            )));
        }
        for (i, &(scale, stat)) in points.iter().enumerate() {
            if !(scale.is_finite() && scale > 0.0) {
                return Err(RegressionError::DegenerateCurve(format!(
                    "scale {scale} at point {i} is not positive"
                )));
            }
            if !(stat.is_finite() && stat > 0.0) {
                return Err(RegressionError::DegenerateCurve(format!(
                    "statistic {stat} at scale {scale} is not positive"
                )));
            }
        }
        if points.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(RegressionError::DegenerateCurve(
                "scales are not strictly increasing".into(),
            ));
        }
        Ok(Self {
            kind,
            points: points
                .into_iter()
                .map(|(scale, statistic)| CurvePoint { scale, statistic })
                .collect(),
        })
    }

    pub fn kind(&self) -> CurveKind {
        self.kind
    }

    pub fn points(&self) -> &[CurvePoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Same scales with every statistic passed through `f`.
    pub fn map_statistic(&self, f: impl Fn(f64) -> f64) -> Result<Self, RegressionError> {
        Self::new(
            self.kind,
            self.points
                .iter()
                .map(|p| (p.scale, f(p.statistic)))
                .collect(),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub exponent: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Set when every logged statistic is identical: slope 0, `r_squared` 0.
    pub flat: bool,
}

/// Unweighted OLS fit of `y` on `x`.
///
/// Returns `(slope, intercept, r_squared, flat)`.
pub(crate) fn ols(x: &[f64], y: &[f64]) -> Result<(f64, f64, f64, bool), RegressionError> {
    debug_assert_eq!(x.len(), y.len());
    let n = x.len();
    if n < 3 {
        return Err(RegressionError::DegenerateCurve(format!(
            "{n} point(s), at least 3 required"
        )));
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|&v| (v - mx) * (v - mx)).sum();
    if sxx <= 0.0 {
        return Err(RegressionError::DegenerateCurve(
            "zero variance in abscissa".into(),
        ));
    }
    if y.iter().all(|&v| v == y[0]) {
        return Ok((0.0, y[0], 0.0, true));
    }
    let sxy: f64 = x.iter().zip(y).map(|(&a, &b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|&v| (v - my) * (v - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = ((sxy * sxy) / (sxx * syy)).clamp(0.0, 1.0);
    Ok((slope, intercept, r_squared, false))
}

/// Fits `ln(statistic) = intercept + exponent * ln(scale)`.
pub fn fit_loglog(curve: &ScalingCurve) -> Result<PowerLawFit, RegressionError> {
    let (x, y): (Vec<f64>, Vec<f64>) = curve
        .points
        .iter()
        .map(|p| (p.scale.ln(), p.statistic.ln()))
        .unzip();
    let (exponent, intercept, r_squared, flat) = ols(&x, &y)?;
    Ok(PowerLawFit {
        exponent,
        intercept,
        r_squared,
        flat,
    })
}
