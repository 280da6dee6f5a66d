//! Hurst exponent estimation for financial time series.
//!
//! - [`series`]: CSV ingestion of daily closes and log-return transforms.
//! - [`regression`]: log-log least squares shared by the estimators.
//! - [`rs`]: rescaled-range analysis.
//! - [`dfa`]: detrended fluctuation analysis.
//! - [`vstat`]: the V statistic and its trend.
//! - [`rolling`]: sliding-window ("dynamic") Hurst traces and their summaries.
//! - [`downfall`]: drawdown episodes, progressive kurtosis and regime labels.
//! - [`synthetic`]: seeded white noise, fGn, fBm and random-walk prices.

pub mod dfa;
pub mod downfall;
pub mod estimate;
pub mod regression;
pub mod rolling;
pub mod rs;
pub mod series;
pub mod synthetic;
pub mod vstat;

pub use dfa::{estimate_hurst_dfa, DfaConfig, DfaError, FitTarget};
pub use downfall::{
    critical_cutoff, excess_kurtosis, extract_downfalls, progressive_kurtosis, CriticalLevel,
    Downfall, DownfallConfig, DownfallError, KurtosisKind, KurtosisScan, Regime,
};
pub use estimate::{
    autocorrelation_from_h, fractal_dimension, Estimator, HurstEstimate, Persistence,
};
pub use regression::{fit_loglog, CurveKind, PowerLawFit, RegressionError, ScalingCurve};
pub use rolling::{
    classify_market, summarize, sweep, MarketClass, RollingConfig, RollingError, RollingTrace,
    TraceSummary,
};
pub use rs::{
    build_partition_plan, estimate_hurst_rs, rs_at_scale, segment_stats, PartitionPlan, PlanPolicy,
    RsConfig, RsError,
};
pub use series::{
    log_returns, parse_curve_csv, parse_price_csv, parse_return_csv, CsvConfig, IngestError,
    PriceSeries, ReturnSeries, ReturnTransform,
};
pub use synthetic::{generate, GeneratorKind, GeneratorSpec, SynthError};
pub use vstat::{v_statistic, Trend, VStatCurve};
