use chrono::NaiveDate;
use hurstkit::rolling::{classify_market, estimate_window, summarize, sweep, window_count};
use hurstkit::rolling::{MarketClass, MarketThresholds, RollingConfig, DEFAULT_CUTS};
use hurstkit::synthetic::{fgn, trading_days, white_noise};
use hurstkit::ReturnSeries;
use hurstkit_oracles::SplitMix;
use proptest::prelude::*;

fn returns(values: Vec<f64>) -> ReturnSeries {
    let start = NaiveDate::from_ymd_opt(2000, 1, 3).unwrap();
    ReturnSeries::from_raw("SYN", trading_days(start, values.len()), values)
}

fn body_config() -> RollingConfig {
    RollingConfig::new(250, 20)
}

fn class_of(values: Vec<f64>) -> MarketClass {
    let trace = sweep(&returns(values), &body_config()).unwrap();
    classify_market(&trace, &MarketThresholds::default())
        .unwrap()
        .class
}

/// Alternating 500-return blocks of white noise and H = 0.8 fGn.
fn mixture(len: usize, seed: u64) -> Vec<f64> {
    let noise = white_noise(len, seed);
    let persistent = fgn(len, 0.8, seed + 1000).unwrap();
    (0..len)
        .map(|i| {
            if (i / 500) % 2 == 0 {
                noise[i]
            } else {
                persistent[i]
            }
        })
        .collect()
}

#[test]
fn market_classes_on_constructed_series() {
    for seed in 0..3 {
        assert_eq!(
            class_of(white_noise(5000, seed)),
            MarketClass::Mature,
            "seed {seed}"
        );
        assert_eq!(
            class_of(fgn(5000, 0.8, seed).unwrap()),
            MarketClass::Emergent,
            "seed {seed}"
        );
        assert_eq!(
            class_of(mixture(5000, seed)),
            MarketClass::Hybrid,
            "seed {seed}"
        );
    }
}

#[test]
fn white_noise_trace_summary() {
    let trace = sweep(&returns(white_noise(5000, 0)), &body_config()).unwrap();
    assert_eq!(trace.count, 238);
    assert_eq!(trace.gaps, 0);
    let s = summarize(&trace, &DEFAULT_CUTS).unwrap();
    assert!((s.h_mean - 0.5).abs() <= 0.08, "{}", s.h_mean);
    assert!(s.proportions.windows(2).all(|w| w[0].above >= w[1].above));
    assert_eq!(
        s.first_measurement_date,
        trace.measurements[0].window_end_date
    );
}

#[test]
fn crash_segment_raises_rolling_h() {
    let (before, inside) = (1500usize, 1000usize);
    let config = body_config();
    let wins = (0..20u64)
        .filter(|&seed| {
            let mut x = white_noise(before + inside + 1000, seed);
            let sell_off = fgn(inside, 0.85, seed + 500).unwrap();
            for (i, v) in sell_off.iter().enumerate() {
                x[before + i] = v - 0.3;
            }
            let trace = sweep(&returns(x), &config).unwrap();
            let mean_where = |keep: &dyn Fn(usize) -> bool| {
                let hs: Vec<f64> = trace
                    .measurements
                    .iter()
                    .filter(|m| keep(m.start_index))
                    .filter_map(|m| m.h())
                    .collect();
                hs.iter().sum::<f64>() / hs.len() as f64
            };
            let pre = mean_where(&|s| s + 250 <= before);
            let during = mean_where(&|s| s >= before && s + 250 <= before + inside);
            during - pre >= 0.1
        })
        .count();
    assert!(wins >= 16, "only {wins}/20 seeds");
}

#[test]
fn measurements_equal_standalone_estimates() {
    let values = white_noise(3000, 9);
    for config in [RollingConfig::new(250, 20), RollingConfig::new(500, 37)] {
        let trace = sweep(&returns(values.clone()), &config).unwrap();
        let mut rng = SplitMix(3);
        for _ in 0..10 {
            let m = &trace.measurements[rng.below(trace.count)];
            let alone = estimate_window(
                &values[m.start_index..m.start_index + config.window],
                &config,
            )
            .unwrap();
            assert_eq!(m.h().unwrap().to_bits(), alone.h.to_bits());
        }
    }
}

#[test]
fn gaps_are_recorded_not_dropped() {
    let mut values = white_noise(600, 1);
    values[250..500].iter_mut().for_each(|v| *v = 0.0);
    let trace = sweep(&returns(values), &RollingConfig::new(250, 250)).unwrap();
    assert_eq!(trace.count, 2);
    assert_eq!(trace.gaps, 1);
    assert!(trace.measurements[1].h().is_none());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sweep_count_matches_formula(len in 64usize..400, window in 32usize..64, lag in 1usize..40) {
        let trace = sweep(&returns(white_noise(len, len as u64)), &RollingConfig::new(window, lag)).unwrap();
        prop_assert_eq!(trace.count, (len - window) / lag + 1);
        prop_assert_eq!(trace.measurements.len(), window_count(len, window, lag));
        for (i, m) in trace.measurements.iter().enumerate() {
            prop_assert_eq!(m.start_index, i * lag);
        }
    }
}
