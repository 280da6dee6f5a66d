//! Python bindings for `hurstkit`.

// Plain tuples are the Python-facing shapes.
#![allow(clippy::type_complexity)]

use chrono::NaiveDate;
use hurstkit::dfa::{estimate_hurst_dfa, DfaConfig, FitTarget};
use hurstkit::downfall::{
    critical_cutoff, extract_downfalls, progressive_kurtosis, DepthMode, DownfallConfig,
    KurtosisKind,
};
use hurstkit::estimate::Persistence;
use hurstkit::rolling::{sweep, RollingConfig};
use hurstkit::rs::{build_partition_plan, estimate_hurst_rs, PlanPolicy, RsConfig, StdDevKind};
use hurstkit::series::ReturnTransform;
use hurstkit::synthetic::{prices_from_log_returns, trading_days};
use hurstkit::{CurveKind, Estimator, GeneratorKind, GeneratorSpec, ReturnSeries, ScalingCurve};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

/// Synthetic calendar start shared with the generators.
fn start_date() -> NaiveDate {
    GeneratorSpec::new(GeneratorKind::WhiteNoise, 0, 0).start_date
}

fn value_err(e: impl ToString) -> PyErr {
    PyValueError::new_err(e.to_string())
}

#[pyclass(name = "HurstEstimate", frozen, get_all, skip_from_py_object)]
#[derive(Clone)]
pub struct PyHurstEstimate {
    pub h: f64,
    pub r_squared: f64,
    pub intercept: f64,
    pub autocorrelation_c: f64,
    pub fractal_dimension: Option<f64>,
    pub estimator: String,
    pub scales: Vec<f64>,
    pub statistics: Vec<f64>,
    pub degenerate_segments: usize,
}

#[pymethods]
impl PyHurstEstimate {
    /// "anti_persistent", "random" or "persistent".
    #[pyo3(signature = (band = 0.0))]
    fn persistence(&self, band: f64) -> &'static str {
        match Persistence::classify_with_band(self.h, band) {
            Persistence::AntiPersistent => "anti_persistent",
            Persistence::Random => "random",
            Persistence::Persistent => "persistent",
        }
    }

    fn __repr__(&self) -> String {
        format!(
            "HurstEstimate(h={:.6}, r_squared={:.6}, estimator='{}')",
            self.h, self.r_squared, self.estimator
        )
    }
}

impl From<hurstkit::HurstEstimate> for PyHurstEstimate {
    fn from(e: hurstkit::HurstEstimate) -> Self {
        Self {
            h: e.h,
            r_squared: e.r_squared,
            intercept: e.intercept,
            autocorrelation_c: e.autocorrelation_c,
            fractal_dimension: e.fractal_dimension,
            estimator: match e.estimator {
                Estimator::RescaledRange => "rs".into(),
                Estimator::Dfa => "dfa".into(),
            },
            scales: e.curve.points().iter().map(|p| p.scale).collect(),
            statistics: e.curve.points().iter().map(|p| p.statistic).collect(),
            degenerate_segments: e.diagnostics.degenerate_segments,
        }
    }
}

fn plan_policy(plan: Option<&Bound<'_, PyAny>>) -> PyResult<PlanPolicy> {
    let Some(plan) = plan else {
        return Ok(PlanPolicy::DivisorsOnly);
    };
    if let Ok(name) = plan.extract::<String>() {
        return match name.as_str() {
            "divisors" => Ok(PlanPolicy::DivisorsOnly),
            "schedule250" => Ok(PlanPolicy::PaperSchedule),
            other => Err(value_err(format!("unknown plan {other:?}"))),
        };
    }
    Ok(PlanPolicy::Explicit(plan.extract::<Vec<usize>>()?))
}

fn std_dev(name: &str) -> PyResult<StdDevKind> {
    match name {
        "population" => Ok(StdDevKind::Population),
        "sample" => Ok(StdDevKind::Sample),
        other => Err(value_err(format!("unknown std_dev {other:?}"))),
    }
}

fn fit_target(name: &str) -> PyResult<FitTarget> {
    match name {
        "rms" => Ok(FitTarget::FluctuationRms),
        "squared" => Ok(FitTarget::FluctuationSquared),
        other => Err(value_err(format!("unknown fit_target {other:?}"))),
    }
}

fn transform(name: &str) -> PyResult<ReturnTransform> {
    match name {
        "raw" => Ok(ReturnTransform::Raw),
        "absolute" => Ok(ReturnTransform::Absolute),
        "squared" => Ok(ReturnTransform::Squared),
        other => Err(value_err(format!("unknown transform {other:?}"))),
    }
}

/// Log returns of a close series (one fewer value than `closes`).
#[pyfunction]
fn log_returns(closes: Vec<f64>) -> PyResult<Vec<f64>> {
    let dates = trading_days(start_date(), closes.len());
    let prices = hurstkit::PriceSeries::new("PY", dates.into_iter().zip(closes).collect())
        .map_err(value_err)?;
    Ok(hurstkit::log_returns(&prices).values().to_vec())
}

/// Rescaled-range estimate. `plan` is "divisors", "schedule250" or a list of segment lengths.
#[pyfunction]
#[pyo3(signature = (values, plan = None, min_segment = 8, std_dev = "population"))]
fn hurst_rs(
    values: Vec<f64>,
    plan: Option<&Bound<'_, PyAny>>,
    min_segment: usize,
    std_dev: &str,
) -> PyResult<PyHurstEstimate> {
    let config = RsConfig {
        min_segment_length: min_segment,
        std_dev: self::std_dev(std_dev)?,
    };
    let plan =
        build_partition_plan(values.len(), plan_policy(plan)?, min_segment).map_err(value_err)?;
    Ok(estimate_hurst_rs(&values, &plan, &config)
        .map_err(value_err)?
        .into())
}

#[pyfunction]
#[pyo3(signature = (values, box_sizes = None, integrate = true, fit_target = "rms"))]
fn hurst_dfa(
    values: Vec<f64>,
    box_sizes: Option<Vec<usize>>,
    integrate: bool,
    fit_target: &str,
) -> PyResult<PyHurstEstimate> {
    let config = DfaConfig {
        box_sizes: box_sizes.unwrap_or_default(),
        integrate_first: integrate,
        fit_target: self::fit_target(fit_target)?,
    };
    Ok(estimate_hurst_dfa(&values, &config)
        .map_err(value_err)?
        .into())
}

/// `(trend, slope, relative_slope, [(n, ln n, V_n), ...])` for an R/S curve.
#[pyfunction]
#[pyo3(signature = (scales, rs_values, tolerance = hurstkit::vstat::DEFAULT_FLAT_TOLERANCE))]
fn v_statistic(
    scales: Vec<f64>,
    rs_values: Vec<f64>,
    tolerance: f64,
) -> PyResult<(String, f64, f64, Vec<(f64, f64, f64)>)> {
    if scales.len() != rs_values.len() {
        return Err(value_err("scales and rs_values differ in length"));
    }
    let curve = ScalingCurve::new(
        CurveKind::RescaledRange,
        scales.into_iter().zip(rs_values).collect(),
    )
    .map_err(value_err)?;
    let v = hurstkit::v_statistic(&curve, tolerance).map_err(value_err)?;
    let trend = match v.trend {
        hurstkit::Trend::Flat => "flat",
        hurstkit::Trend::Increasing => "increasing",
        hurstkit::Trend::Decreasing => "decreasing",
    };
    Ok((
        trend.to_string(),
        v.slope,
        v.relative_slope,
        v.points.iter().map(|p| (p.n, p.log_n, p.v)).collect(),
    ))
}

/// Per-window `(start_index, h or None)` over a return series.
#[pyfunction]
#[pyo3(signature = (returns, window = 250, lag = 5, estimator = "rs", transform = "raw"))]
fn rolling_hurst(
    returns: Vec<f64>,
    window: usize,
    lag: usize,
    estimator: &str,
    transform: &str,
) -> PyResult<Vec<(usize, Option<f64>)>> {
    let config = RollingConfig {
        estimator: match estimator {
            "rs" => Estimator::RescaledRange,
            "dfa" => Estimator::Dfa,
            other => return Err(value_err(format!("unknown estimator {other:?}"))),
        },
        transform: self::transform(transform)?,
        ..RollingConfig::new(window, lag)
    };
    let series = ReturnSeries::from_raw("PY", trading_days(start_date(), returns.len()), returns);
    let trace = sweep(&series, &config).map_err(value_err)?;
    Ok(trace
        .measurements
        .iter()
        .map(|m| (m.start_index, m.h()))
        .collect())
}

/// Episodes as `(peak_index, trough_index, recovery_index or None, depth)`.
#[pyfunction]
#[pyo3(signature = (closes, lookback = 126, min_depth = 0.0, percent = false))]
fn downfalls(
    closes: Vec<f64>,
    lookback: usize,
    min_depth: f64,
    percent: bool,
) -> PyResult<Vec<(usize, usize, Option<usize>, f64)>> {
    let dates = trading_days(start_date(), closes.len());
    let prices = hurstkit::PriceSeries::new("PY", dates.into_iter().zip(closes).collect())
        .map_err(value_err)?;
    let config = DownfallConfig {
        lookback,
        min_depth,
        depth_mode: if percent {
            DepthMode::Percent
        } else {
            DepthMode::Log
        },
    };
    Ok(extract_downfalls(&prices, &config)
        .into_iter()
        .map(|d| (d.peak_index, d.trough_index, d.recovery_index, d.depth))
        .collect())
}

#[pyfunction]
#[pyo3(signature = (values, sample = false))]
fn excess_kurtosis(values: Vec<f64>, sample: bool) -> PyResult<f64> {
    let kind = if sample {
        KurtosisKind::Sample
    } else {
        KurtosisKind::Population
    };
    hurstkit::excess_kurtosis(&values, kind).map_err(value_err)
}

/// Progressive scan `[(k, upper_depth, excess_kurtosis), ...]` and the cutoff depth.
#[pyfunction]
fn kurtosis_scan(depths: Vec<f64>) -> PyResult<(Vec<(usize, f64, f64)>, f64)> {
    let scan = progressive_kurtosis(&depths, KurtosisKind::Population).map_err(value_err)?;
    let critical = critical_cutoff(&scan).map_err(value_err)?;
    Ok((
        scan.entries
            .iter()
            .map(|e| (e.upper_index, e.upper_value, e.excess_kurtosis))
            .collect(),
        critical.cutoff_depth,
    ))
}

/// Seeded values: "white", "fgn" or "fbm"; "walk" returns closing prices.
#[pyfunction]
#[pyo3(signature = (kind, n, h = 0.5, seed = 0))]
fn generate(kind: &str, n: usize, h: f64, seed: u64) -> PyResult<Vec<f64>> {
    let kind = match kind {
        "white" => GeneratorKind::WhiteNoise,
        "fgn" => GeneratorKind::Fgn,
        "fbm" => GeneratorKind::Fbm,
        "walk" => GeneratorKind::RandomWalkPrices,
        other => return Err(value_err(format!("unknown kind {other:?}"))),
    };
    let out =
        hurstkit::generate(&GeneratorSpec::new(kind, n, seed).with_h(h)).map_err(value_err)?;
    Ok(match out {
        hurstkit::synthetic::Generated::Values(v) => v,
        hurstkit::synthetic::Generated::Prices(p) => p.closes().to_vec(),
    })
}

/// Prices `p0 * exp(cumsum(returns))`, starting at `p0`.
#[pyfunction]
#[pyo3(signature = (returns, p0 = 100.0))]
fn prices_from_returns(returns: Vec<f64>, p0: f64) -> PyResult<Vec<f64>> {
    let prices = prices_from_log_returns("PY", p0, start_date(), &returns).map_err(value_err)?;
    Ok(prices.closes().to_vec())
}

#[pyfunction]
fn fgn_autocovariance(h: f64, k: usize) -> PyResult<f64> {
    hurstkit::synthetic::fgn_autocovariance(h, k).map_err(value_err)
}

#[pyfunction]
fn autocorrelation_from_h(h: f64) -> f64 {
    hurstkit::autocorrelation_from_h(h)
}

#[pyfunction]
fn fractal_dimension(h: f64) -> PyResult<f64> {
    hurstkit::fractal_dimension(h).map_err(value_err)
}

#[pymodule]
fn pyhurst(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyHurstEstimate>()?;
    m.add_function(wrap_pyfunction!(log_returns, m)?)?;
    m.add_function(wrap_pyfunction!(hurst_rs, m)?)?;
    m.add_function(wrap_pyfunction!(hurst_dfa, m)?)?;
    m.add_function(wrap_pyfunction!(v_statistic, m)?)?;
    m.add_function(wrap_pyfunction!(rolling_hurst, m)?)?;
    m.add_function(wrap_pyfunction!(downfalls, m)?)?;
    m.add_function(wrap_pyfunction!(excess_kurtosis, m)?)?;
    m.add_function(wrap_pyfunction!(kurtosis_scan, m)?)?;
    m.add_function(wrap_pyfunction!(generate, m)?)?;
    m.add_function(wrap_pyfunction!(prices_from_returns, m)?)?;
    m.add_function(wrap_pyfunction!(fgn_autocovariance, m)?)?;
    m.add_function(wrap_pyfunction!(autocorrelation_from_h, m)?)?;
    m.add_function(wrap_pyfunction!(fractal_dimension, m)?)?;
    Ok(())
}
