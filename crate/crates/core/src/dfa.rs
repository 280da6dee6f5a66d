//! Detrended fluctuation analysis (first order).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::estimate::{Estimator, HurstEstimate};
use crate::regression::{fit_loglog, CurveKind, RegressionError, ScalingCurve};

pub const MIN_BOX: usize = 4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DfaError {
    #[error("box size {tau} leaves fewer than {min_boxes} boxes in a series of {len} values")]
    BoxTooLarge {
        tau: usize,
        len: usize,
        min_boxes: usize,
    },
    #[error("box size {0} is below the minimum of {MIN_BOX}")]
    BoxTooSmall(usize),
    #[error("invalid DFA configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Regression(#[from] RegressionError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum FitTarget {
    /// Regress `ln <F^2>` on `ln tau`.
    FluctuationSquared,
    /// Regress `ln sqrt(<F^2>)` on `ln tau`.
    #[default]
    FluctuationRms,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DfaConfig {
    /// Empty means "pick from the series length" (see [`default_box_sizes`]).
    pub box_sizes: Vec<usize>,
    pub integrate_first: bool,
    pub fit_target: FitTarget,
}

impl Default for DfaConfig {
    fn default() -> Self {
        Self {
            box_sizes: Vec::new(),
            integrate_first: true,
            fit_target: FitTarget::FluctuationRms,
        }
    }
}

impl DfaConfig {
    /// Box sizes to use for a series of `len` values, validated.
    pub fn resolve_box_sizes(&self, len: usize) -> Result<Vec<usize>, DfaError> {
        let sizes = if self.box_sizes.is_empty() {
            default_box_sizes(len)
        } else {
            self.box_sizes.clone()
        };
        if sizes.len() < 3 {
            return Err(DfaError::InvalidConfig(format!(
                "{} box size(s) for a series of {len} values, at least 3 required",
                sizes.len()
            )));
        }
        if sizes.windows(2).any(|w| w[1] <= w[0]) {
            return Err(DfaError::InvalidConfig(
                "box sizes must be strictly increasing".into(),
            ));
        }
        for &tau in &sizes {
            if tau < MIN_BOX {
                return Err(DfaError::BoxTooSmall(tau));
            }
            if tau > len / 4 {
                return Err(DfaError::BoxTooLarge {
                    tau,
                    len,
                    min_boxes: 4,
                });
            }
        }
        Ok(sizes)
    }
}

/// Powers of two from 8 up to `len / 8`, extended to `len / 4` when that
/// would leave fewer than three scales.
pub fn default_box_sizes(len: usize) -> Vec<usize> {
    let pow2_upto = |cap: usize| {
        std::iter::successors(Some(8usize), |&t| Some(t * 2))
            .take_while(|&t| t <= cap)
            .collect::<Vec<_>>()
    };
    let sizes = pow2_upto(len / 8);
    if sizes.len() >= 3 {
        sizes
    } else {
        pow2_upto(len / 4)
    }
}

/// Cumulative sum of the mean-centred series.
pub fn profile(series: &[f64]) -> Vec<f64> {
    let mean = series.iter().sum::<f64>() / series.len() as f64;
    series
        .iter()
        .scan(0.0, |acc, &x| {
            *acc += x - mean;
            Some(*acc)
        })
        .collect()
}

/// Mean squared residual of the least-squares line through one box.
fn box_fluctuation(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    // local time 0..n-1: mean and centred sum of squares are closed-form
    let t_mean = (n - 1.0) / 2.0;
    let stt = n * (n * n - 1.0) / 12.0;
    let y_mean = values.iter().sum::<f64>() / n;
    let sty: f64 = values
        .iter()
        .enumerate()
        .map(|(t, &y)| (t as f64 - t_mean) * (y - y_mean))
        .sum();
    let slope = sty / stt;
    values
        .iter()
        .enumerate()
        .map(|(t, &y)| {
            let resid = (y - y_mean) - slope * (t as f64 - t_mean);
            resid * resid
        })
        .sum::<f64>()
        / n
}

/// `<F^2(tau)>`: the average over `floor(len / tau)` boxes of the mean squared
/// residual around each box's linear trend.
pub fn dfa_fluctuation(series: &[f64], tau: usize, config: &DfaConfig) -> Result<f64, DfaError> {
    if tau < MIN_BOX {
        return Err(DfaError::BoxTooSmall(tau));
    }
    if series.len() / tau < 2 {
        return Err(DfaError::BoxTooLarge {
            tau,
            len: series.len(),
            min_boxes: 2,
        });
    }
    let owned;
    let data = if config.integrate_first {
        owned = profile(series);
        owned.as_slice()
    } else {
        series
    };
    let boxes = data.chunks_exact(tau);
    let count = boxes.len();
    Ok(boxes.map(box_fluctuation).sum::<f64>() / count as f64)
}

pub fn estimate_hurst_dfa(series: &[f64], config: &DfaConfig) -> Result<HurstEstimate, DfaError> {
    let sizes = config.resolve_box_sizes(series.len())?;
    // integrate once, then fluctuate the profile directly
    let data = if config.integrate_first {
        profile(series)
    } else {
        series.to_vec()
    };
    let raw_cfg = DfaConfig {
        integrate_first: false,
        ..config.clone()
    };
    let points: Vec<(f64, f64)> = sizes
        .par_iter()
        .map(|&tau| dfa_fluctuation(&data, tau, &raw_cfg).map(|f2| (tau as f64, f2)))
        .collect::<Vec<_>>()
        .into_iter()
        .collect::<Result<_, _>>()?;
    let curve = ScalingCurve::new(CurveKind::DfaFluctuation, points)?;
    let fit = match config.fit_target {
        FitTarget::FluctuationSquared => fit_loglog(&curve)?,
        FitTarget::FluctuationRms => fit_loglog(&curve.map_statistic(f64::sqrt)?)?,
    };
    Ok(HurstEstimate::from_fit(fit, Estimator::Dfa, curve, 0))
}

/// Fits an already measured `<F^2(tau)>` curve.
pub fn fit_fluctuation_curve(
    curve: ScalingCurve,
    target: FitTarget,
) -> Result<HurstEstimate, DfaError> {
    let fit = match target {
        FitTarget::FluctuationSquared => fit_loglog(&curve)?,
        FitTarget::FluctuationRms => fit_loglog(&curve.map_statistic(f64::sqrt)?)?,
    };
    Ok(HurstEstimate::from_fit(fit, Estimator::Dfa, curve, 0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn literal() -> DfaConfig {
        DfaConfig {
            integrate_first: false,
            ..DfaConfig::default()
        }
    }

    #[test]
    fn profile_examples() {
        assert_eq!(profile(&[1.0, 1.0, 1.0]), vec![0.0, 0.0, 0.0]);
        assert_eq!(profile(&[1.0, -1.0]), vec![1.0, 0.0]);
    }

    #[test]
    fn linear_series_has_zero_fluctuation() {
        let x: Vec<f64> = (0..64).map(|t| 0.25 * t as f64 - 3.0).collect();
        for tau in [4, 8, 16] {
            assert!(dfa_fluctuation(&x, tau, &literal()).unwrap() < 1e-20);
        }
    }

    #[test]
    fn zigzag_matches_hand_value() {
        // box [0,1,0,1]: slope 0.2, intercept 0.2, residuals -0.2, 0.6, -0.6, 0.2
        let x = [0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0];
        let f2 = dfa_fluctuation(&x, 4, &literal()).unwrap();
        assert!((f2 - 0.2).abs() < 1e-15);
    }

    #[test]
    fn box_errors() {
        assert_eq!(
            dfa_fluctuation(&[0.0; 10], 6, &literal()),
            Err(DfaError::BoxTooLarge {
                tau: 6,
                len: 10,
                min_boxes: 2
            })
        );
        assert_eq!(
            dfa_fluctuation(&[0.0; 10], 3, &literal()),
            Err(DfaError::BoxTooSmall(3))
        );
    }

    #[test]
    fn exact_squared_curve() {
        let curve = ScalingCurve::new(
            CurveKind::DfaFluctuation,
            [8.0, 16.0, 32.0, 64.0].iter().map(|&t| (t, t)).collect(),
        )
        .unwrap();
        let est = fit_fluctuation_curve(curve, FitTarget::FluctuationSquared).unwrap();
        assert!((est.h - 1.0).abs() < 1e-12);
        assert!((est.r_squared - 1.0).abs() < 1e-12);
        assert_eq!(est.estimator, Estimator::Dfa);
    }

    #[test]
    fn default_boxes() {
        assert_eq!(default_box_sizes(4096), vec![8, 16, 32, 64, 128, 256, 512]);
        assert_eq!(default_box_sizes(250), vec![8, 16, 32]);
        assert!(default_box_sizes(40).len() < 3);
        assert!(matches!(
            DfaConfig::default().resolve_box_sizes(40),
            Err(DfaError::InvalidConfig(_))
        ));
        let cfg = DfaConfig {
            box_sizes: vec![8, 16, 300],
            ..DfaConfig::default()
        };
        assert!(matches!(
            cfg.resolve_box_sizes(1000),
            Err(DfaError::BoxTooLarge { .. })
        ));
    }

    #[test]
    fn linear_input_is_degenerate() {
        let x: Vec<f64> = (0..256).map(|t| t as f64).collect();
        assert!(matches!(
            estimate_hurst_dfa(&x, &literal()),
            Err(DfaError::Regression(_))
        ));
    }

    proptest! {
        #[test]
        fn shift_and_scale(
            x in proptest::collection::vec(-1.0f64..1.0, 16..64),
            a in 0.1f64..10.0,
            b in -5.0f64..5.0,
            tau in prop_oneof![Just(4usize), Just(8usize)],
            integrate in any::<bool>(),
        ) {
            let cfg = DfaConfig { integrate_first: integrate, ..DfaConfig::default() };
            let base = dfa_fluctuation(&x, tau, &cfg).unwrap();
            let shifted: Vec<f64> = x.iter().map(|v| v + b).collect();
            let scaled: Vec<f64> = x.iter().map(|v| v * a).collect();
            let fs = dfa_fluctuation(&shifted, tau, &cfg).unwrap();
            let fa = dfa_fluctuation(&scaled, tau, &cfg).unwrap();
            prop_assert!((fs - base).abs() <= 1e-9 * base.max(1e-12));
            prop_assert!((fa - a * a * base).abs() <= 1e-9 * (a * a * base).max(1e-12));
        }

        #[test]
        fn piecewise_linear_is_exact(
            slopes in proptest::collection::vec(-3.0f64..3.0, 4),
            offsets in proptest::collection::vec(-3.0f64..3.0, 4),
        ) {
            let x: Vec<f64> = (0..32)
                .map(|t| slopes[t / 8] * t as f64 + offsets[t / 8])
                .collect();
            prop_assert!(dfa_fluctuation(&x, 8, &literal()).unwrap() < 1e-20);
        }
    }
}
