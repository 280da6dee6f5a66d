//! Rolling ("dynamic") Hurst estimation over sliding windows.

use chrono::NaiveDate;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dfa::{estimate_hurst_dfa, DfaConfig};
use crate::estimate::{Estimator, HurstEstimate};
use crate::rs::{build_partition_plan, estimate_hurst_rs, PlanPolicy, RsConfig};
use crate::series::{ReturnSeries, ReturnTransform, TransformError};

/// Window/lag used for the daily-index figure.
pub const FIGURE_PRESET: (usize, usize) = (250, 5);
/// Lag used for the full 45-index study.
pub const BODY_LAG: usize = 20;
pub const WINDOW_PRESETS: [usize; 3] = [1000, 500, 250];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RollingError {
    #[error("series of {len} returns is shorter than the window {window}")]
    SeriesTooShort { len: usize, window: usize },
    #[error("invalid rolling configuration: {0}")]
    InvalidConfig(String),
    #[error("trace has no successful measurements")]
    EmptyTrace,
    #[error("trace has {0} measurement(s), classification needs at least {MIN_CLASSIFY}")]
    TraceTooShort(usize),
    #[error(transparent)]
    Transform(#[from] TransformError),
}

pub const MIN_CLASSIFY: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RollingConfig {
    pub window: usize,
    pub lag: usize,
    pub estimator: Estimator,
    pub transform: ReturnTransform,
    /// `None` selects the 250-return schedule for 250-wide windows and the
    /// divisor plan otherwise.
    pub plan_policy: Option<PlanPolicy>,
    pub rs: RsConfig,
    pub dfa: DfaConfig,
}

impl Default for RollingConfig {
    fn default() -> Self {
        Self {
            window: FIGURE_PRESET.0,
            lag: FIGURE_PRESET.1,
            estimator: Estimator::RescaledRange,
            transform: ReturnTransform::Raw,
            plan_policy: None,
            rs: RsConfig::default(),
            dfa: DfaConfig::default(),
        }
    }
}

impl RollingConfig {
    pub fn new(window: usize, lag: usize) -> Self {
        Self {
            window,
            lag,
            ..Self::default()
        }
    }

    pub fn effective_plan_policy(&self) -> PlanPolicy {
        match &self.plan_policy {
            Some(p) => p.clone(),
            None if self.window == 250 => PlanPolicy::PaperSchedule,
            None => PlanPolicy::DivisorsOnly,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum WindowOutcome {
    Ok { h: f64, r_squared: f64 },
    Gap { reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Measurement {
    pub start_index: usize,
    pub window_end_date: NaiveDate,
    #[serde(flatten)]
    pub outcome: WindowOutcome,
}

impl Measurement {
    pub fn h(&self) -> Option<f64> {
        match self.outcome {
            WindowOutcome::Ok { h, .. } => Some(h),
            WindowOutcome::Gap { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RollingTrace {
    pub config: RollingConfig,
    pub measurements: Vec<Measurement>,
    pub count: usize,
    pub gaps: usize,
}

impl RollingTrace {
    pub fn h_values(&self) -> Vec<f64> {
        self.measurements
            .iter()
            .filter_map(Measurement::h)
            .collect()
    }
}

/// `floor((len - window) / lag) + 1`, or 0 when the series is shorter than the window.
pub fn window_count(len: usize, window: usize, lag: usize) -> usize {
    if len < window || lag == 0 {
        0
    } else {
        (len - window) / lag + 1
    }
}

/// One standalone estimate on a window's values, as the sweep computes it.
pub fn estimate_window(values: &[f64], config: &RollingConfig) -> Result<HurstEstimate, String> {
    match config.estimator {
        Estimator::RescaledRange => {
            let plan = build_partition_plan(
                values.len(),
                config.effective_plan_policy(),
                config.rs.min_segment_length,
            )
            .map_err(|e| e.to_string())?;
            estimate_hurst_rs(values, &plan, &config.rs).map_err(|e| e.to_string())
        }
        Estimator::Dfa => estimate_hurst_dfa(values, &config.dfa).map_err(|e| e.to_string()),
    }
}

/// Estimates H on windows `[i*lag, i*lag + window)` of the transformed returns.
pub fn sweep(returns: &ReturnSeries, config: &RollingConfig) -> Result<RollingTrace, RollingError> {
    if config.window < 2 || config.lag == 0 {
        return Err(RollingError::InvalidConfig(format!(
            "window {} and lag {} must be at least 2 and 1",
            config.window, config.lag
        )));
    }
    if returns.len() < config.window {
        return Err(RollingError::SeriesTooShort {
            len: returns.len(),
            window: config.window,
        });
    }
    let transformed = returns.transform(config.transform)?;
    let values = transformed.values();
    let dates = transformed.dates();
    let count = window_count(values.len(), config.window, config.lag);

    let measurements: Vec<Measurement> = (0..count)
        .into_par_iter()
        .map(|i| {
            let start = i * config.lag;
            let end = start + config.window;
            let outcome = match estimate_window(&values[start..end], config) {
                Ok(est) => WindowOutcome::Ok {
                    h: est.h,
                    r_squared: est.r_squared,
                },
                Err(reason) => WindowOutcome::Gap { reason },
            };
            Measurement {
                start_index: start,
                window_end_date: dates[end - 1],
                outcome,
            }
        })
        .collect();
    let gaps = measurements.iter().filter(|m| m.h().is_none()).count();
    Ok(RollingTrace {
        config: config.clone(),
        measurements,
        count,
        gaps,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutProportion {
    pub cut: f64,
    /// Fraction of measurements with `h > cut`.
    pub above: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceSummary {
    pub h_min: f64,
    pub h_max: f64,
    pub h_mean: f64,
    pub r_squared_mean: f64,
    pub first_measurement_date: NaiveDate,
    pub count: usize,
    pub gaps: usize,
    pub proportions: Vec<CutProportion>,
    /// Fraction with `h < 0.5`.
    pub fraction_below_half: f64,
}

pub const DEFAULT_CUTS: [f64; 5] = [0.5, 0.55, 0.6, 0.65, 0.7];

/// Extremes, mean and cut-point proportions over the non-gap measurements.
/// Ties at a cut point count on neither side.
pub fn summarize(trace: &RollingTrace, cut_points: &[f64]) -> Result<TraceSummary, RollingError> {
    let ok: Vec<(&Measurement, f64, f64)> = trace
        .measurements
        .iter()
        .filter_map(|m| match m.outcome {
            WindowOutcome::Ok { h, r_squared } => Some((m, h, r_squared)),
            WindowOutcome::Gap { .. } => None,
        })
        .collect();
    if ok.is_empty() {
        return Err(RollingError::EmptyTrace);
    }
    let n = ok.len() as f64;
    let fraction = |pred: &dyn Fn(f64) -> bool| ok.iter().filter(|m| pred(m.1)).count() as f64 / n;
    Ok(TraceSummary {
        h_min: ok.iter().map(|m| m.1).fold(f64::INFINITY, f64::min),
        h_max: ok.iter().map(|m| m.1).fold(f64::NEG_INFINITY, f64::max),
        h_mean: ok.iter().map(|m| m.1).sum::<f64>() / n,
        r_squared_mean: ok.iter().map(|m| m.2).sum::<f64>() / n,
        first_measurement_date: ok[0].0.window_end_date,
        count: ok.len(),
        gaps: trace.gaps,
        proportions: cut_points
            .iter()
            .map(|&cut| CutProportion {
                cut,
                above: fraction(&|h| h > cut),
            })
            .collect(),
        fraction_below_half: fraction(&|h| h < 0.5),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MarketClass {
    Mature,
    Emergent,
    Hybrid,
}

/// Thresholds for the mature/emergent/hybrid rule.
///
/// Defaults are set for 250-return windows, where single-window estimates
/// scatter by about ±0.1 and R/S reads white noise at roughly 0.55..0.59.
///
/// Mature: mean within `mature_mean` and at most `max_excursion_fraction` of
/// windows above `mature_ceiling`. Emergent: mean at least `emergent_mean` and
/// at most `max_excursion_fraction` of windows below `emergent_floor`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarketThresholds {
    pub mature_mean: (f64, f64),
    pub mature_ceiling: f64,
    pub emergent_mean: f64,
    pub emergent_floor: f64,
    pub max_excursion_fraction: f64,
}

impl Default for MarketThresholds {
    fn default() -> Self {
        Self {
            mature_mean: (0.45, 0.6),
            mature_ceiling: 0.7,
            emergent_mean: 0.7,
            emergent_floor: 0.6,
            max_excursion_fraction: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarketClassification {
    pub class: MarketClass,
    pub h_mean: f64,
    pub fraction_above_ceiling: f64,
    pub fraction_below_floor: f64,
    pub thresholds: MarketThresholds,
}

pub fn classify_market(
    trace: &RollingTrace,
    thresholds: &MarketThresholds,
) -> Result<MarketClassification, RollingError> {
    let hs = trace.h_values();
    if hs.len() < MIN_CLASSIFY {
        return Err(RollingError::TraceTooShort(hs.len()));
    }
    let n = hs.len() as f64;
    let h_mean = hs.iter().sum::<f64>() / n;
    let above = hs
        .iter()
        .filter(|&&h| h > thresholds.mature_ceiling)
        .count() as f64
        / n;
    let below = hs
        .iter()
        .filter(|&&h| h < thresholds.emergent_floor)
        .count() as f64
        / n;
    let (lo, hi) = thresholds.mature_mean;
    let class = if (lo..=hi).contains(&h_mean) && above <= thresholds.max_excursion_fraction {
        MarketClass::Mature
    } else if h_mean >= thresholds.emergent_mean && below <= thresholds.max_excursion_fraction {
        MarketClass::Emergent
    } else {
        MarketClass::Hybrid
    };
    Ok(MarketClassification {
        class,
        h_mean,
        fraction_above_ceiling: above,
        fraction_below_floor: below,
        thresholds: *thresholds,
    })
}
