//! Hurst exponent estimate and the quantities derived from it.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::regression::{PowerLawFit, ScalingCurve};

#[derive(Debug, Error, Clone, Copy, PartialEq)]
pub enum DerivedError {
    #[error("fractal dimension needs h > 0, got {0}")]
    NonPositiveH(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    #[default]
    RescaledRange,
    Dfa,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Persistence {
    AntiPersistent,
    Random,
    Persistent,
}

impl Persistence {
    /// Exact rule: anything other than h = 0.5 is persistent or anti-persistent.
    pub fn classify(h: f64) -> Self {
        Self::classify_with_band(h, 0.0)
    }

    /// Treats `|h - 0.5| <= band` as random.
    pub fn classify_with_band(h: f64, band: f64) -> Self {
        if (h - 0.5).abs() <= band {
            Persistence::Random
        } else if h < 0.5 {
            Persistence::AntiPersistent
        } else {
            Persistence::Persistent
        }
    }
}

/// Correlation between present and future increments, `2^(2h-1) - 1`.
pub fn autocorrelation_from_h(h: f64) -> f64 {
    (2.0 * h - 1.0).exp2() - 1.0
}

/// Fractal dimension of the price path, `1/h`.
pub fn fractal_dimension(h: f64) -> Result<f64, DerivedError> {
    if h > 0.0 {
        Ok(1.0 / h)
    } else {
        Err(DerivedError::NonPositiveH(h))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HurstEstimate {
    pub h: f64,
    pub r_squared: f64,
    pub intercept: f64,
    pub autocorrelation_c: f64,
    /// `None` when `h <= 0`.
    pub fractal_dimension: Option<f64>,
    pub estimator: Estimator,
    pub curve: ScalingCurve,
    pub diagnostics: EstimateDiagnostics,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EstimateDiagnostics {
    /// Segments with zero standard deviation left out of the scale average.
    pub degenerate_segments: usize,
    /// `h` outside `[0, 1]`; the value is reported unclamped.
    pub out_of_range: bool,
    /// Every logged statistic was identical.
    pub flat: bool,
}

impl HurstEstimate {
    pub(crate) fn from_fit(
        fit: PowerLawFit,
        estimator: Estimator,
        curve: ScalingCurve,
        degenerate_segments: usize,
    ) -> Self {
        let h = fit.exponent;
        Self {
            h,
            r_squared: fit.r_squared,
            intercept: fit.intercept,
            autocorrelation_c: autocorrelation_from_h(h),
            fractal_dimension: fractal_dimension(h).ok(),
            estimator,
            curve,
            diagnostics: EstimateDiagnostics {
                degenerate_segments,
                out_of_range: !(0.0..=1.0).contains(&h),
                flat: fit.flat,
            },
        }
    }

    pub fn persistence(&self) -> Persistence {
        Persistence::classify(self.h)
    }
}
