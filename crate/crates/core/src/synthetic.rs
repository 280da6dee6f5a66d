//! Seeded ground-truth generators.
//!
//! All randomness comes from ChaCha20 seeded with `seed_from_u64` and
//! standard normal draws from `rand_distr::StandardNormal`, so a spec maps to
//! the same sequence on every platform.
//!
//! Fractional Gaussian noise is generated exactly with the Durbin-Levinson
//! recursion (Hosking's method): each value is drawn from its conditional
//! distribution given all previous values, which is a sequential Cholesky
//! factorisation of the Toeplitz covariance matrix.

use chrono::{Datelike, Duration, NaiveDate, Weekday};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::series::{IngestError, PriceSeries};

pub const MAX_EXACT_LENGTH: usize = 1 << 16;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SynthError {
    #[error("Hurst exponent {0} outside (0, 1)")]
    HOutOfRange(f64),
    #[error("length {0} exceeds the exact-covariance limit of {MAX_EXACT_LENGTH}")]
    LengthTooLarge(usize),
    #[error("covariance factorisation failed at step {step} (partial variance {variance})")]
    FactorizationFailure { step: usize, variance: f64 },
    #[error("invalid generator spec: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Prices(#[from] IngestError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorKind {
    WhiteNoise,
    Fgn,
    Fbm,
    RandomWalkPrices,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub kind: GeneratorKind,
    pub length: usize,
    pub h: f64,
    pub drift: f64,
    pub volatility: f64,
    pub initial_price: f64,
    pub start_date: NaiveDate,
    pub seed: u64,
}

impl GeneratorSpec {
    pub fn new(kind: GeneratorKind, length: usize, seed: u64) -> Self {
        Self {
            kind,
            length,
            h: 0.5,
            drift: 0.0,
            volatility: 0.01,
            initial_price: 100.0,
            start_date: NaiveDate::from_ymd_opt(2000, 1, 3).expect("valid date"),
            seed,
        }
    }

    pub fn with_h(mut self, h: f64) -> Self {
        self.h = h;
        self
    }

    pub fn with_drift(mut self, drift: f64) -> Self {
        self.drift = drift;
        self
    }

    pub fn with_volatility(mut self, volatility: f64) -> Self {
        self.volatility = volatility;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Generated {
    Values(Vec<f64>),
    Prices(PriceSeries),
}

impl Generated {
    pub fn into_values(self) -> Option<Vec<f64>> {
        match self {
            Generated::Values(v) => Some(v),
            Generated::Prices(_) => None,
        }
    }

    pub fn into_prices(self) -> Option<PriceSeries> {
        match self {
            Generated::Prices(p) => Some(p),
            Generated::Values(_) => None,
        }
    }
}

fn check_h(h: f64) -> Result<(), SynthError> {
    if h > 0.0 && h < 1.0 {
        Ok(())
    } else {
        Err(SynthError::HOutOfRange(h))
    }
}

/// Autocovariance of unit-variance fractional Gaussian noise at lag `k`.
pub fn fgn_autocovariance(h: f64, k: usize) -> Result<f64, SynthError> {
    check_h(h)?;
    Ok(fgn_gamma(h, k))
}

fn fgn_gamma(h: f64, k: usize) -> f64 {
    if k == 0 {
        return 1.0;
    }
    let two_h = 2.0 * h;
    let k = k as f64;
    0.5 * ((k + 1.0).powf(two_h) - 2.0 * k.powf(two_h) + (k - 1.0).powf(two_h))
}

fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// `n` i.i.d. standard normal draws.
pub fn white_noise(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = rng(seed);
    (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
}

/// Exact unit-variance fGn of length `n`.
pub fn fgn(n: usize, h: f64, seed: u64) -> Result<Vec<f64>, SynthError> {
    check_h(h)?;
    if n > MAX_EXACT_LENGTH {
        return Err(SynthError::LengthTooLarge(n));
    }
    let gamma: Vec<f64> = (0..n.max(1)).map(|k| fgn_gamma(h, k)).collect();
    let z = white_noise(n, seed);
    let mut out = Vec::with_capacity(n);
    if n == 0 {
        return Ok(out);
    }
    out.push(z[0]);

    // phi holds the prediction coefficients for the current order; phi[j]
    // multiplies x_{t-1-j}.
    let mut phi: Vec<f64> = Vec::with_capacity(n);
    let mut next: Vec<f64> = Vec::with_capacity(n);
    let mut variance = gamma[0];
    for t in 1..n {
        // Durbin-Levinson update to order t
        let acc: f64 = phi
            .iter()
            .enumerate()
            .map(|(j, &p)| p * gamma[t - 1 - j])
            .sum();
        let reflection = (gamma[t] - acc) / variance;
        next.clear();
        next.extend(
            phi.iter()
                .enumerate()
                .map(|(j, &p)| p - reflection * phi[t - 2 - j]),
        );
        next.push(reflection);
        std::mem::swap(&mut phi, &mut next);
        variance *= 1.0 - reflection * reflection;
        if variance.is_nan() || variance <= 0.0 {
            return Err(SynthError::FactorizationFailure { step: t, variance });
        }
        let mean: f64 = phi
            .iter()
            .enumerate()
            .map(|(j, &p)| p * out[t - 1 - j])
            .sum();
        out.push(mean + variance.sqrt() * z[t]);
    }
    Ok(out)
}

/// fBm path of length `n` with `X(0) = 0`, the cumulative sum of `n - 1` fGn values.
pub fn fbm(n: usize, h: f64, seed: u64) -> Result<Vec<f64>, SynthError> {
    let increments = fgn(n.saturating_sub(1), h, seed)?;
    let mut path = Vec::with_capacity(n);
    if n == 0 {
        return Ok(path);
    }
    path.push(0.0);
    let mut acc = 0.0;
    for dx in increments {
        acc += dx;
        path.push(acc);
    }
    Ok(path)
}

/// Weekdays starting at `start` (moved forward to a weekday if needed).
pub fn trading_days(start: NaiveDate, n: usize) -> Vec<NaiveDate> {
    let mut d = start;
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        if !matches!(d.weekday(), Weekday::Sat | Weekday::Sun) {
            out.push(d);
        }
        d += Duration::days(1);
    }
    out
}

/// `p_0 * exp(cumsum(log_returns))` on consecutive trading days; `log_returns`
/// has one value fewer than the resulting series.
pub fn prices_from_log_returns(
    symbol: &str,
    initial_price: f64,
    start: NaiveDate,
    log_returns: &[f64],
) -> Result<PriceSeries, SynthError> {
    if !(initial_price.is_finite() && initial_price > 0.0) {
        return Err(SynthError::InvalidSpec(format!(
            "initial price {initial_price} must be positive"
        )));
    }
    let dates = trading_days(start, log_returns.len() + 1);
    let mut level = 0.0;
    let mut obs = Vec::with_capacity(dates.len());
    obs.push((dates[0], initial_price));
    for (d, r) in dates[1..].iter().zip(log_returns) {
        level += r;
        obs.push((*d, initial_price * level.exp()));
    }
    Ok(PriceSeries::new(symbol, obs)?)
}

pub fn generate(spec: &GeneratorSpec) -> Result<Generated, SynthError> {
    match spec.kind {
        GeneratorKind::WhiteNoise => Ok(Generated::Values(white_noise(spec.length, spec.seed))),
        GeneratorKind::Fgn => Ok(Generated::Values(fgn(spec.length, spec.h, spec.seed)?)),
        GeneratorKind::Fbm => Ok(Generated::Values(fbm(spec.length, spec.h, spec.seed)?)),
        GeneratorKind::RandomWalkPrices => {
            if spec.length < 2 {
                return Err(SynthError::InvalidSpec(
                    "a price path needs at least 2 points".into(),
                ));
            }
            if !(spec.drift.is_finite() && spec.volatility.is_finite()) {
                return Err(SynthError::InvalidSpec(
                    "drift and volatility must be finite".into(),
                ));
            }
            let returns: Vec<f64> = white_noise(spec.length - 1, spec.seed)
                .into_iter()
                .map(|z| spec.drift + spec.volatility * z)
                .collect();
            Ok(Generated::Prices(prices_from_log_returns(
                "SYNTH",
                spec.initial_price,
                spec.start_date,
                &returns,
            )?))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lag_autocov(x: &[f64], k: usize) -> f64 {
        let n = x.len() as f64;
        let m = x.iter().sum::<f64>() / n;
        x.iter()
            .zip(&x[k..])
            .map(|(a, b)| (a - m) * (b - m))
            .sum::<f64>()
            / n
    }

    #[test]
    fn autocovariance_values() {
        assert_eq!(fgn_autocovariance(0.5, 1), Ok(0.0));
        for h in [0.1, 0.5, 0.9] {
            assert_eq!(fgn_autocovariance(h, 0), Ok(1.0));
        }
        let g = fgn_autocovariance(0.7, 1).unwrap();
        assert!((g - 0.5 * (2f64.powf(1.4) - 2.0)).abs() < 1e-15);
        assert!((g - 0.319_507_910_772_894).abs() < 1e-12);
        assert_eq!(
            fgn_autocovariance(1.0, 1),
            Err(SynthError::HOutOfRange(1.0))
        );
        assert_eq!(
            fgn_autocovariance(0.0, 1),
            Err(SynthError::HOutOfRange(0.0))
        );
    }

    #[test]
    fn fgn_half_is_white() {
        let x = fgn(1 << 14, 0.5, 3).unwrap();
        assert!(lag_autocov(&x, 1).abs() < 0.03);
        assert!((lag_autocov(&x, 0) - 1.0).abs() < 0.05);
    }

    #[test]
    fn fgn_lag_one_covariance() {
        let x = fgn(1 << 14, 0.7, 11).unwrap();
        assert!((lag_autocov(&x, 1) - 0.319_508).abs() < 0.03);
    }

    #[test]
    fn fbm_starts_at_zero() {
        for h in [0.2, 0.5, 0.8] {
            let p = fbm(100, h, 1).unwrap();
            assert_eq!(p.len(), 100);
            assert_eq!(p[0], 0.0);
        }
    }

    #[test]
    fn limits() {
        assert_eq!(
            fgn(MAX_EXACT_LENGTH + 1, 0.7, 0),
            Err(SynthError::LengthTooLarge(MAX_EXACT_LENGTH + 1))
        );
        assert!(fgn(0, 0.7, 0).unwrap().is_empty());
        assert_eq!(fgn(1, 0.7, 0).unwrap().len(), 1);
    }

    #[test]
    fn deterministic() {
        assert_eq!(white_noise(64, 9), white_noise(64, 9));
        assert_ne!(white_noise(64, 9), white_noise(64, 10));
        assert_eq!(fgn(300, 0.8, 5).unwrap(), fgn(300, 0.8, 5).unwrap());
    }

    #[test]
    fn prices_are_positive_and_dated_on_weekdays() {
        let spec = GeneratorSpec::new(GeneratorKind::RandomWalkPrices, 500, 4)
            .with_drift(-0.5)
            .with_volatility(3.0);
        let p = generate(&spec).unwrap().into_prices().unwrap();
        assert_eq!(p.len(), 500);
        assert!(p.closes().iter().all(|&c| c > 0.0));
        assert!(p
            .dates()
            .iter()
            .all(|d| !matches!(d.weekday(), Weekday::Sat | Weekday::Sun)));
    }
}
