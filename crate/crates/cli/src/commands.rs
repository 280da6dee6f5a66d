use std::fmt::Write as _;

use chrono::NaiveDate;
use hurstkit::dfa::{estimate_hurst_dfa, DfaConfig, DfaError, FitTarget};
use hurstkit::downfall::{
    classify_episode, critical_cutoff, extract_downfalls, rank_size_points, rank_size_slope,
    scan_downfalls, DepthMode, DownfallConfig, DownfallError, KurtosisKind,
};
use hurstkit::estimate::{HurstEstimate, Persistence};
use hurstkit::rolling::{
    classify_market, summarize, sweep, MarketThresholds, RollingConfig, RollingError,
};
use hurstkit::rs::{build_partition_plan, estimate_hurst_rs, PlanPolicy, RsConfig, StdDevKind};
use hurstkit::series::{parse_curve_csv, ReturnTransform, DEFAULT_DATE_FORMAT};
use hurstkit::synthetic::{
    fbm, fgn, prices_from_log_returns, trading_days, white_noise, SynthError,
};
use hurstkit::vstat::v_statistic;
use hurstkit::{generate, CurveKind, Estimator, GeneratorKind, GeneratorSpec, ScalingCurve};
use serde_json::{json, Value};

use crate::input::{self, Loaded};
use crate::report::{to_value, CliError, CommandEcho, Diagnostics, RunReport};
use crate::{
    DepthArg, DownfallArgs, EstimatorArg, EstimatorArgs, FitTargetArg, HurstArgs, KurtosisArg,
    OutputFormat, RollingArgs, StdDevArg, SynthArgs, SynthKind, TransformArg, VstatArgs,
};

/// Variant name of an error enum, used as the machine-readable error code.
fn variant<E: std::fmt::Debug>(e: &E) -> String {
    let text = format!("{e:?}");
    text.split(|c: char| !c.is_alphanumeric())
        .next()
        .unwrap_or_default()
        .to_string()
}

fn compute_err<E: std::fmt::Debug + std::fmt::Display>(e: E) -> CliError {
    CliError::compute(&variant(&e), e)
}

fn config_err<E: std::fmt::Debug + std::fmt::Display>(e: E) -> CliError {
    CliError::config(&variant(&e), e)
}

fn render(report: RunReport, table: String, format: OutputFormat) -> String {
    match format {
        OutputFormat::Table => table,
        OutputFormat::Json => {
            let mut out = serde_json::to_string_pretty(&report).expect("report serializes");
            out.push('\n');
            out
        }
    }
}

fn echo(name: &str, args: Vec<String>) -> CommandEcho {
    CommandEcho {
        name: name.to_string(),
        args,
    }
}

fn transform_of(arg: TransformArg) -> ReturnTransform {
    match arg {
        TransformArg::Raw => ReturnTransform::Raw,
        TransformArg::Absolute => ReturnTransform::Absolute,
        TransformArg::Squared => ReturnTransform::Squared,
    }
}

fn estimator_of(arg: EstimatorArg) -> Estimator {
    match arg {
        EstimatorArg::Rs => Estimator::RescaledRange,
        EstimatorArg::Dfa => Estimator::Dfa,
    }
}

fn plan_policy(text: &str) -> Result<PlanPolicy, CliError> {
    match text {
        "divisors" => Ok(PlanPolicy::DivisorsOnly),
        "schedule250" => Ok(PlanPolicy::PaperSchedule),
        list => list
            .split(',')
            .map(|n| n.trim().parse::<usize>())
            .collect::<Result<Vec<_>, _>>()
            .map(PlanPolicy::Explicit)
            .map_err(|_| {
                CliError::config(
                    "bad_plan",
                    format!("--plan takes divisors, schedule250 or a comma list, got {list:?}"),
                )
            }),
    }
}

fn rs_config(a: &EstimatorArgs) -> RsConfig {
    RsConfig {
        min_segment_length: a.min_segment,
        std_dev: match a.std_dev {
            StdDevArg::Population => StdDevKind::Population,
            StdDevArg::Sample => StdDevKind::Sample,
        },
    }
}

fn dfa_config(a: &EstimatorArgs) -> DfaConfig {
    DfaConfig {
        box_sizes: a.box_sizes.clone(),
        integrate_first: !a.no_integrate,
        fit_target: match a.fit_target {
            FitTargetArg::Rms => FitTarget::FluctuationRms,
            FitTargetArg::Squared => FitTarget::FluctuationSquared,
        },
    }
}

fn transformed(loaded: &Loaded, arg: TransformArg) -> Result<Vec<f64>, CliError> {
    loaded
        .returns
        .transform(transform_of(arg))
        .map(|r| r.values().to_vec())
        .map_err(config_err)
}

/// Full-series estimate plus the echo of the estimator settings used.
fn estimate(
    values: &[f64],
    estimator: EstimatorArg,
    a: &EstimatorArgs,
) -> Result<(HurstEstimate, Value), CliError> {
    match estimator {
        EstimatorArg::Rs => {
            let rs = rs_config(a);
            let policy = match &a.plan {
                Some(p) => plan_policy(p)?,
                None => PlanPolicy::DivisorsOnly,
            };
            let divisors = policy == PlanPolicy::DivisorsOnly;
            let plan = build_partition_plan(values.len(), policy, rs.min_segment_length)
                .map_err(|e| {
                    let mut err = config_err(e);
                    if divisors {
                        err.message.push_str(
                            "; the series length has too few divisors, pass --plan with explicit segment lengths",
                        );
                    }
                    err
                })?;
            let est = estimate_hurst_rs(values, &plan, &rs).map_err(compute_err)?;
            let config = json!({
                "estimator": Estimator::RescaledRange,
                "rs": rs,
                "plan": plan.policy(),
                "segment_lengths": plan.segment_lengths(),
            });
            Ok((est, config))
        }
        EstimatorArg::Dfa => {
            let dfa = dfa_config(a);
            let sizes = dfa.resolve_box_sizes(values.len());
            let sizes = match sizes {
                Ok(s) => s,
                Err(e) if !dfa.box_sizes.is_empty() => return Err(config_err(e)),
                Err(e) => return Err(compute_err(e)),
            };
            let est = estimate_hurst_dfa(values, &dfa).map_err(|e: DfaError| compute_err(e))?;
            let config = json!({
                "estimator": Estimator::Dfa,
                "dfa": dfa,
                "box_sizes": sizes,
            });
            Ok((est, config))
        }
    }
}

fn curve_rows(curve: &ScalingCurve) -> Vec<Value> {
    curve
        .points()
        .iter()
        .map(|p| {
            json!({
                "scale": p.scale,
                "statistic": p.statistic,
                "log_scale": p.scale.ln(),
                "log_statistic": p.statistic.ln(),
            })
        })
        .collect()
}

fn curve_table(curve: &ScalingCurve) -> String {
    let mut out = String::from("scale,statistic,log_scale,log_statistic\n");
    for p in curve.points() {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            p.scale,
            p.statistic,
            p.scale.ln(),
            p.statistic.ln()
        );
    }
    out
}

fn estimate_diagnostics(est: &HurstEstimate, diag: &mut Diagnostics) {
    diag.count("degenerate_segments", est.diagnostics.degenerate_segments);
    if est.diagnostics.out_of_range {
        diag.warnings
            .push(format!("h = {} lies outside [0, 1]", est.h));
    }
    if est.diagnostics.flat {
        diag.warnings
            .push("every scale gave the same statistic".to_string());
    }
}

pub fn hurst(name: &str, a: HurstArgs, argv: Vec<String>) -> Result<String, CliError> {
    if !(a.random_band >= 0.0 && a.random_band < 0.5) {
        return Err(CliError::config(
            "bad_random_band",
            "--random-band must be in [0, 0.5)",
        ));
    }
    let loaded = input::load(&a.input)?;
    let values = transformed(&loaded, a.estimation.transform)?;
    let (est, est_config) = estimate(&values, a.estimator, &a.estimation)?;
    let mut diagnostics = Diagnostics::default();
    estimate_diagnostics(&est, &mut diagnostics);
    let table = curve_table(&est.curve);
    let report = RunReport {
        command: echo(name, argv),
        input_sha256: loaded.sha256,
        config: json!({
            "input": input::describe(&a.input),
            "transform": transform_of(a.estimation.transform),
            "random_band": a.random_band,
            "estimation": est_config,
        }),
        results: json!({
            "n_values": values.len(),
            "h": est.h,
            "r_squared": est.r_squared,
            "intercept": est.intercept,
            "autocorrelation_c": est.autocorrelation_c,
            "fractal_dimension": est.fractal_dimension,
            "persistence": Persistence::classify_with_band(est.h, a.random_band),
            "curve_kind": est.curve.kind(),
            "curve": curve_rows(&est.curve),
        }),
        diagnostics,
    };
    Ok(render(report, table, a.input.format))
}

pub fn rolling(a: RollingArgs, argv: Vec<String>) -> Result<String, CliError> {
    if a.cuts.iter().any(|c| !c.is_finite()) {
        return Err(CliError::config(
            "bad_cuts",
            "--cuts must be finite numbers",
        ));
    }
    let loaded = input::load(&a.input)?;
    let config = RollingConfig {
        window: a.window,
        lag: a.lag,
        estimator: estimator_of(a.estimator),
        transform: transform_of(a.estimation.transform),
        plan_policy: a.estimation.plan.as_deref().map(plan_policy).transpose()?,
        rs: rs_config(&a.estimation),
        dfa: dfa_config(&a.estimation),
    };
    let trace = sweep(&loaded.returns, &config).map_err(|e| match e {
        RollingError::SeriesTooShort { .. } => CliError::input(&variant(&e), e),
        RollingError::InvalidConfig(_) | RollingError::Transform(_) => config_err(e),
        other => compute_err(other),
    })?;
    let summary = summarize(&trace, &a.cuts).map_err(compute_err)?;
    let mut diagnostics = Diagnostics::default();
    diagnostics.count("gaps", trace.gaps);
    let market = match classify_market(&trace, &MarketThresholds::default()) {
        Ok(m) => Some(m),
        Err(e) => {
            diagnostics
                .warnings
                .push(format!("market class skipped: {e}"));
            None
        }
    };
    for m in &trace.measurements {
        if let hurstkit::rolling::WindowOutcome::Gap { reason } = &m.outcome {
            diagnostics
                .warnings
                .push(format!("window at {} skipped: {reason}", m.start_index));
        }
    }

    let h_plot: Vec<Value> = trace
        .measurements
        .iter()
        .map(|m| json!({ "date": m.window_end_date, "h": m.h() }))
        .collect();
    let price_plot: Option<Vec<Value>> = loaded.prices.as_ref().map(|p| {
        p.observations()
            .map(|(date, close)| json!({ "date": date, "close": close }))
            .collect()
    });
    let table = rolling_table(&trace, loaded.prices.as_ref());
    let report = RunReport {
        command: echo("rolling", argv),
        input_sha256: loaded.sha256,
        config: json!({
            "input": input::describe(&a.input),
            "rolling": config,
            "plan": config.effective_plan_policy(),
            "cuts": a.cuts,
            "market_thresholds": MarketThresholds::default(),
        }),
        results: json!({
            "count": trace.count,
            "gaps": trace.gaps,
            "measurements": trace.measurements,
            "summary": summary,
            "market": market,
            "plot": { "h": h_plot, "price": price_plot },
        }),
        diagnostics,
    };
    Ok(render(report, table, a.input.format))
}

/// `date,close,h` over every price date (h blank where no window ends), or
/// `date,h` per measurement when the input was returns.
fn rolling_table(
    trace: &hurstkit::rolling::RollingTrace,
    prices: Option<&hurstkit::PriceSeries>,
) -> String {
    let cell = |h: Option<f64>| h.map(|v| v.to_string()).unwrap_or_default();
    match prices {
        Some(p) => {
            let mut out = String::from("date,close,h\n");
            let mut ends = trace.measurements.iter().peekable();
            for (date, close) in p.observations() {
                let mut h = None;
                while let Some(m) = ends.peek() {
                    if m.window_end_date == date {
                        h = m.h();
                    }
                    if m.window_end_date <= date {
                        ends.next();
                    } else {
                        break;
                    }
                }
                let _ = writeln!(out, "{date},{close},{}", cell(h));
            }
            out
        }
        None => {
            let mut out = String::from("date,h\n");
            for m in &trace.measurements {
                let _ = writeln!(out, "{},{}", m.window_end_date, cell(m.h()));
            }
            out
        }
    }
}

pub fn vstat(a: VstatArgs, argv: Vec<String>) -> Result<String, CliError> {
    if !(a.tolerance >= 0.0 && a.tolerance.is_finite()) {
        return Err(CliError::config(
            "bad_tolerance",
            "--tolerance must be non-negative",
        ));
    }
    let mut diagnostics = Diagnostics::default();
    let (curve, sha256, source) = if a.curve {
        let raw = input::read_raw(&a.input)?;
        let delimiter = input::csv_config(&a.input)?.delimiter;
        let points =
            parse_curve_csv(&raw.text, delimiter).map_err(|e| CliError::input(&variant(&e), e))?;
        let curve = ScalingCurve::new(CurveKind::RescaledRange, points)
            .map_err(|e| CliError::input(&variant(&e), e))?;
        (curve, raw.sha256, json!({ "curve_table": true }))
    } else {
        let loaded = input::load(&a.input)?;
        let values = transformed(&loaded, a.estimation.transform)?;
        let (est, est_config) = estimate(&values, EstimatorArg::Rs, &a.estimation)?;
        estimate_diagnostics(&est, &mut diagnostics);
        (
            est.curve,
            loaded.sha256,
            json!({ "transform": transform_of(a.estimation.transform), "estimation": est_config }),
        )
    };
    let v = v_statistic(&curve, a.tolerance).map_err(compute_err)?;
    let mut table = String::from("n,log_n,v\n");
    for p in &v.points {
        let _ = writeln!(table, "{},{},{}", p.n, p.log_n, p.v);
    }
    let report = RunReport {
        command: echo("vstat", argv),
        input_sha256: sha256,
        config: json!({
            "input": input::describe(&a.input),
            "source": source,
            "flat_tolerance": a.tolerance,
        }),
        results: to_value(&v),
        diagnostics,
    };
    Ok(render(report, table, a.input.format))
}

pub fn downfalls(a: DownfallArgs, argv: Vec<String>) -> Result<String, CliError> {
    if a.input.returns {
        return Err(CliError::config(
            "needs_prices",
            "downfalls needs closing prices, not returns",
        ));
    }
    if a.lookback == 0 {
        return Err(CliError::config(
            "bad_lookback",
            "--lookback must be at least 1",
        ));
    }
    if !(a.min_depth >= 0.0 && a.min_depth.is_finite()) {
        return Err(CliError::config(
            "bad_min_depth",
            "--min-depth must be non-negative",
        ));
    }
    let loaded = input::load(&a.input)?;
    let prices = loaded.prices.as_ref().expect("price input");
    let config = DownfallConfig {
        lookback: a.lookback,
        min_depth: a.min_depth,
        depth_mode: match a.depth {
            DepthArg::Log => DepthMode::Log,
            DepthArg::Percent => DepthMode::Percent,
        },
    };
    let kind = match a.kurtosis {
        KurtosisArg::Population => KurtosisKind::Population,
        KurtosisArg::Sample => KurtosisKind::Sample,
    };
    let episodes = extract_downfalls(prices, &config);
    let mut diagnostics = Diagnostics::default();
    diagnostics.count("episodes", episodes.len());
    diagnostics.count(
        "open_episodes",
        episodes.iter().filter(|d| d.is_open()).count(),
    );

    let rank_size = match rank_size_points(&episodes) {
        Ok(points) => {
            let fit = if points.len() >= 3 {
                rank_size_slope(&points).ok()
            } else {
                None
            };
            json!({
                "points": points,
                "slope": fit.map(|f| f.0),
                "r_squared": fit.map(|f| f.1),
            })
        }
        Err(_) => Value::Null,
    };
    let scan = match scan_downfalls(&episodes, a.include_open, kind) {
        Ok(scan) => Some(scan),
        Err(e @ DownfallError::TooFew { .. }) => {
            diagnostics
                .warnings
                .push(format!("kurtosis scan skipped: {e}"));
            None
        }
        Err(e) => return Err(compute_err(e)),
    };
    let critical = match &scan {
        Some(s) => match critical_cutoff(s) {
            Ok(c) => Some(c),
            Err(e) => {
                diagnostics.warnings.push(format!("no critical level: {e}"));
                None
            }
        },
        None => None,
    };
    if let Some(s) = &scan {
        diagnostics.count("skipped_zero_variance", s.skipped_zero_variance.len());
    }

    let mut table = String::from(
        "peak_date,trough_date,recovery_date,peak_close,trough_close,depth,duration_days,regime\n",
    );
    let mut rows = Vec::with_capacity(episodes.len());
    for d in &episodes {
        let regime = critical.as_ref().map(|c| classify_episode(d, c));
        let mut row = to_value(d);
        row["open"] = d.is_open().into();
        row["regime"] = to_value(&regime);
        rows.push(row);
        let _ = writeln!(
            table,
            "{},{},{},{},{},{},{},{}",
            d.peak_date,
            d.trough_date,
            d.recovery_date.map(|r| r.to_string()).unwrap_or_default(),
            d.peak_close,
            d.trough_close,
            d.depth,
            d.duration_days,
            regime
                .map(|r| to_value(&r).as_str().unwrap_or_default().to_string())
                .unwrap_or_default(),
        );
    }
    let report = RunReport {
        command: echo("downfalls", argv),
        input_sha256: loaded.sha256,
        config: json!({
            "input": input::describe(&a.input),
            "downfall": config,
            "include_open": a.include_open,
            "kurtosis": kind,
        }),
        results: json!({
            "episodes": rows,
            "rank_size": rank_size,
            "kurtosis_scan": scan,
            "critical": critical,
        }),
        diagnostics,
    };
    Ok(render(report, table, a.input.format))
}

fn synth_err(e: SynthError) -> CliError {
    match e {
        SynthError::FactorizationFailure { .. } | SynthError::Prices(_) => compute_err(e),
        _ => config_err(e),
    }
}

fn start_date() -> NaiveDate {
    GeneratorSpec::new(GeneratorKind::WhiteNoise, 0, 0).start_date
}

/// White noise and fGn become the log returns of a price path (`n` returns,
/// `n + 1` prices); fBm becomes the log price itself (`n` prices).
pub fn synth(a: SynthArgs) -> Result<String, CliError> {
    if a.n == 0 {
        return Err(CliError::config("bad_length", "--n must be positive"));
    }
    if !(a.drift.is_finite() && a.vol.is_finite() && a.vol >= 0.0) {
        return Err(CliError::config(
            "bad_scale",
            "--drift and --vol must be finite, --vol non-negative",
        ));
    }
    let values = match a.kind {
        SynthKind::White => white_noise(a.n, a.seed),
        SynthKind::Fgn => fgn(a.n, a.h, a.seed).map_err(synth_err)?,
        SynthKind::Fbm => fbm(a.n, a.h, a.seed).map_err(synth_err)?,
        SynthKind::Walk => {
            if a.raw {
                return Err(CliError::config(
                    "bad_raw",
                    "--raw does not apply to walk, which already emits prices",
                ));
            }
            let spec = GeneratorSpec {
                initial_price: a.p0,
                ..GeneratorSpec::new(GeneratorKind::RandomWalkPrices, a.n, a.seed)
                    .with_drift(a.drift)
                    .with_volatility(a.vol)
            };
            let prices = generate(&spec)
                .map_err(synth_err)?
                .into_prices()
                .expect("walk yields prices");
            return Ok(prices.to_csv(DEFAULT_DATE_FORMAT));
        }
    };
    if a.raw {
        let mut out = String::from("date,value\n");
        for (d, v) in trading_days(start_date(), values.len()).iter().zip(&values) {
            let _ = writeln!(out, "{d},{v}");
        }
        return Ok(out);
    }
    let log_returns: Vec<f64> = match a.kind {
        SynthKind::Fbm => values
            .windows(2)
            .map(|w| a.drift + a.vol * (w[1] - w[0]))
            .collect(),
        _ => values.iter().map(|z| a.drift + a.vol * z).collect(),
    };
    let prices =
        prices_from_log_returns("SYNTH", a.p0, start_date(), &log_returns).map_err(synth_err)?;
    Ok(prices.to_csv(DEFAULT_DATE_FORMAT))
}
