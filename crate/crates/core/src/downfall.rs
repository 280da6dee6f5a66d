//! Peak-to-trough downfall episodes and the progressive kurtosis scan that
//! splits them into a mesokurtic (random) and a leptokurtic (self-organised)
//! segment.

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::regression::{ols, RegressionError};
use crate::series::PriceSeries;

/// Six months of trading days.
pub const DEFAULT_LOOKBACK: usize = 126;
/// Smallest subset the progressive scan evaluates.
pub const MIN_SCAN_SUBSET: usize = 4;
pub const MIN_SCAN_DOWNFALLS: usize = 5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DownfallError {
    #[error("need at least {needed} values, got {got}")]
    TooFew { needed: usize, got: usize },
    #[error("values have zero variance")]
    ZeroVariance,
    #[error("no downfalls")]
    Empty,
    #[error("kurtosis scan is empty")]
    EmptyScan,
    #[error(transparent)]
    Regression(#[from] RegressionError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DepthMode {
    /// `ln(peak) - ln(trough)`
    #[default]
    Log,
    /// `1 - trough / peak`
    Percent,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DownfallConfig {
    pub lookback: usize,
    /// Episodes shallower than this are dropped after extraction.
    pub min_depth: f64,
    pub depth_mode: DepthMode,
}

impl Default for DownfallConfig {
    fn default() -> Self {
        Self {
            lookback: DEFAULT_LOOKBACK,
            min_depth: 0.0,
            depth_mode: DepthMode::Log,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Downfall {
    pub peak_index: usize,
    pub trough_index: usize,
    /// `None` when the series ends before the episode closes.
    pub recovery_index: Option<usize>,
    pub peak_date: NaiveDate,
    pub trough_date: NaiveDate,
    pub recovery_date: Option<NaiveDate>,
    pub peak_close: f64,
    pub trough_close: f64,
    /// Positive loss magnitude, in the configured [`DepthMode`].
    pub depth: f64,
    /// Trading days from peak to trough.
    pub duration_days: usize,
}

impl Downfall {
    pub fn is_open(&self) -> bool {
        self.recovery_index.is_none()
    }
}

/// Index bounds of an episode before it is dated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EpisodeBounds {
    pub peak: usize,
    pub trough: usize,
    pub recovery: Option<usize>,
}

/// Scans closes left to right for downfall episodes.
///
/// An episode opens on the first decline after a bar (that bar is the peak).
/// At each later bar `t` the recovery level is the lower of the peak close and
/// the highest close in the `lookback` bars before `t`; the episode closes at
/// the first bar reaching that level. The trough is the first minimum close
/// between peak and recovery. A closing bar may itself be the next peak.
pub fn episode_bounds(closes: &[f64], lookback: usize) -> Vec<EpisodeBounds> {
    let lookback = lookback.max(1);
    let mut out = Vec::new();
    let mut t = 1;
    while t < closes.len() {
        if closes[t] >= closes[t - 1] {
            t += 1;
            continue;
        }
        let peak = t - 1;
        let ceiling = closes[peak];
        let mut trough = t;
        let mut recovery = None;
        // sliding max over closes[u - lookback .. u], kept as a monotone deque
        let mut window: std::collections::VecDeque<usize> = std::collections::VecDeque::new();
        let lo0 = t.saturating_sub(lookback);
        for i in lo0..t {
            while window.back().is_some_and(|&j| closes[j] <= closes[i]) {
                window.pop_back();
            }
            window.push_back(i);
        }
        let mut u = t;
        while u < closes.len() {
            let lo = u.saturating_sub(lookback);
            while window.front().is_some_and(|&j| j < lo) {
                window.pop_front();
            }
            let trailing_high = window.front().map_or(ceiling, |&j| closes[j]);
            if closes[u] >= ceiling.min(trailing_high) {
                recovery = Some(u);
                break;
            }
            if closes[u] < closes[trough] {
                trough = u;
            }
            while window.back().is_some_and(|&j| closes[j] <= closes[u]) {
                window.pop_back();
            }
            window.push_back(u);
            u += 1;
        }
        out.push(EpisodeBounds {
            peak,
            trough,
            recovery,
        });
        match recovery {
            Some(r) => t = r + 1,
            None => break,
        }
    }
    out
}

pub fn extract_downfalls(prices: &PriceSeries, config: &DownfallConfig) -> Vec<Downfall> {
    let closes = prices.closes();
    let dates = prices.dates();
    episode_bounds(closes, config.lookback)
        .into_iter()
        .map(|b| {
            let (p, q) = (closes[b.peak], closes[b.trough]);
            let depth = match config.depth_mode {
                DepthMode::Log => p.ln() - q.ln(),
                DepthMode::Percent => 1.0 - q / p,
            };
            Downfall {
                peak_index: b.peak,
                trough_index: b.trough,
                recovery_index: b.recovery,
                peak_date: dates[b.peak],
                trough_date: dates[b.trough],
                recovery_date: b.recovery.map(|r| dates[r]),
                peak_close: p,
                trough_close: q,
                depth,
                duration_days: b.trough - b.peak,
            }
        })
        .filter(|d| d.depth >= config.min_depth)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankSizePoint {
    pub rank: usize,
    pub depth: f64,
    pub log_rank: f64,
    pub log_depth: f64,
}

/// `(ln rank, ln depth)` with rank 1 the deepest episode.
pub fn rank_size_points(downfalls: &[Downfall]) -> Result<Vec<RankSizePoint>, DownfallError> {
    if downfalls.is_empty() {
        return Err(DownfallError::Empty);
    }
    let mut depths: Vec<f64> = downfalls.iter().map(|d| d.depth).collect();
    depths.sort_by(|a, b| b.total_cmp(a));
    Ok(depths
        .into_iter()
        .enumerate()
        .map(|(i, depth)| RankSizePoint {
            rank: i + 1,
            depth,
            log_rank: ((i + 1) as f64).ln(),
            log_depth: depth.ln(),
        })
        .collect())
}

/// OLS slope of `ln depth` on `ln rank`, with R². Needs at least 3 points.
pub fn rank_size_slope(points: &[RankSizePoint]) -> Result<(f64, f64), DownfallError> {
    let (x, y): (Vec<f64>, Vec<f64>) = points.iter().map(|p| (p.log_rank, p.log_depth)).unzip();
    let (slope, _, r2, _) = ols(&x, &y)?;
    Ok((slope, r2))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum KurtosisKind {
    /// `m4 / m2^2 - 3` with `1/n` central moments.
    #[default]
    Population,
    /// Bias-corrected sample excess kurtosis (G2).
    Sample,
}

pub fn excess_kurtosis(values: &[f64], kind: KurtosisKind) -> Result<f64, DownfallError> {
    let needed = 4;
    if values.len() < needed {
        return Err(DownfallError::TooFew {
            needed,
            got: values.len(),
        });
    }
    if values.iter().all(|&v| v == values[0]) {
        return Err(DownfallError::ZeroVariance);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let (m2, m4) = values.iter().fold((0.0, 0.0), |(a, b), &x| {
        let d2 = (x - mean) * (x - mean);
        (a + d2, b + d2 * d2)
    });
    let (m2, m4) = (m2 / n, m4 / n);
    if m2.is_nan() || m2 <= 0.0 {
        return Err(DownfallError::ZeroVariance);
    }
    let g2 = m4 / (m2 * m2) - 3.0;
    Ok(match kind {
        KurtosisKind::Population => g2,
        KurtosisKind::Sample => ((n + 1.0) * g2 + 6.0) * (n - 1.0) / ((n - 2.0) * (n - 3.0)),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanEntry {
    /// Number of smallest downfalls included.
    pub upper_index: usize,
    /// Depth of the largest included downfall.
    pub upper_value: f64,
    pub excess_kurtosis: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KurtosisScan {
    pub entries: Vec<ScanEntry>,
    /// Subset sizes skipped because every included depth was equal.
    pub skipped_zero_variance: Vec<usize>,
}

/// Excess kurtosis of the `k` smallest depths for `k = 4 ..= len`.
pub fn progressive_kurtosis(
    depths: &[f64],
    kind: KurtosisKind,
) -> Result<KurtosisScan, DownfallError> {
    if depths.len() < MIN_SCAN_DOWNFALLS {
        return Err(DownfallError::TooFew {
            needed: MIN_SCAN_DOWNFALLS,
            got: depths.len(),
        });
    }
    let mut sorted = depths.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut entries = Vec::new();
    let mut skipped = Vec::new();
    for k in MIN_SCAN_SUBSET..=sorted.len() {
        match excess_kurtosis(&sorted[..k], kind) {
            Ok(excess_kurtosis) => entries.push(ScanEntry {
                upper_index: k,
                upper_value: sorted[k - 1],
                excess_kurtosis,
            }),
            Err(DownfallError::ZeroVariance) => skipped.push(k),
            Err(e) => return Err(e),
        }
    }
    Ok(KurtosisScan {
        entries,
        skipped_zero_variance: skipped,
    })
}

/// Scan over the closed episodes (plus open ones when `include_open`).
pub fn scan_downfalls(
    downfalls: &[Downfall],
    include_open: bool,
    kind: KurtosisKind,
) -> Result<KurtosisScan, DownfallError> {
    let depths: Vec<f64> = downfalls
        .iter()
        .filter(|d| include_open || !d.is_open())
        .map(|d| d.depth)
        .collect();
    progressive_kurtosis(&depths, kind)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalLevel {
    pub cutoff_depth: f64,
    pub cutoff_index: usize,
    pub kurtosis_at_cutoff: f64,
}

/// Entry with excess kurtosis closest to zero; ties go to the larger subset.
pub fn critical_cutoff(scan: &KurtosisScan) -> Result<CriticalLevel, DownfallError> {
    let best = scan
        .entries
        .iter()
        .fold(None::<&ScanEntry>, |best, e| match best {
            Some(b) if e.excess_kurtosis.abs() > b.excess_kurtosis.abs() => Some(b),
            _ => Some(e),
        })
        .ok_or(DownfallError::EmptyScan)?;
    Ok(CriticalLevel {
        cutoff_depth: best.upper_value,
        cutoff_index: best.upper_index,
        kurtosis_at_cutoff: best.excess_kurtosis,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Mesokurtic,
    Leptokurtic,
}

pub fn classify_depth(depth: f64, critical: &CriticalLevel) -> Regime {
    if depth > critical.cutoff_depth {
        Regime::Leptokurtic
    } else {
        Regime::Mesokurtic
    }
}

pub fn classify_episode(downfall: &Downfall, critical: &CriticalLevel) -> Regime {
    classify_depth(downfall.depth, critical)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthetic::trading_days;

    fn prices(closes: &[f64]) -> PriceSeries {
        let dates = trading_days(NaiveDate::from_ymd_opt(2010, 1, 4).unwrap(), closes.len());
        PriceSeries::new("T", dates.into_iter().zip(closes.iter().copied()).collect()).unwrap()
    }

    fn entries(ks: &[f64]) -> KurtosisScan {
        KurtosisScan {
            entries: ks
                .iter()
                .enumerate()
                .map(|(i, &k)| ScanEntry {
                    upper_index: i + 4,
                    upper_value: (i + 1) as f64,
                    excess_kurtosis: k,
                })
                .collect(),
            skipped_zero_variance: vec![],
        }
    }

    #[test]
    fn monotone_series_has_no_downfalls() {
        let p = prices(&[1.0, 2.0, 3.0, 4.0, 5.0]);
        assert!(extract_downfalls(&p, &DownfallConfig::default()).is_empty());
    }

    #[test]
    fn single_v_shape() {
        let p = prices(&[100.0, 90.0, 80.0, 100.0]);
        let d = extract_downfalls(&p, &DownfallConfig::default());
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].peak_index, 0);
        assert_eq!(d[0].trough_index, 2);
        assert_eq!(d[0].recovery_index, Some(3));
        assert_eq!(d[0].duration_days, 2);
        assert!((d[0].depth - 0.223_143_551_314_209_76).abs() < 1e-12);
    }

    #[test]
    fn open_episode_at_end() {
        let p = prices(&[100.0, 90.0, 95.0, 85.0]);
        let d = extract_downfalls(&p, &DownfallConfig::default());
        assert_eq!(d.len(), 1);
        assert!(d[0].is_open());
        assert_eq!(d[0].trough_index, 3);
    }

    #[test]
    fn trailing_high_closes_long_episode() {
        // peak 100 drops out of a 3-bar lookback; 70 then reaches the
        // trailing high of the previous three bars (70, 60, 65)
        let p = prices(&[100.0, 70.0, 60.0, 65.0, 70.0, 50.0]);
        let d = extract_downfalls(
            &p,
            &DownfallConfig {
                lookback: 3,
                ..DownfallConfig::default()
            },
        );
        assert_eq!(d[0].recovery_index, Some(4));
        assert_eq!(d[0].trough_index, 2);
        // the closing bar opens the next episode
        assert_eq!(d[1].peak_index, 4);
        assert!(d[1].is_open());
    }

    #[test]
    fn min_depth_filter_and_percent_mode() {
        let p = prices(&[100.0, 99.0, 100.0, 50.0, 100.0]);
        let all = extract_downfalls(&p, &DownfallConfig::default());
        assert_eq!(all.len(), 2);
        let deep = extract_downfalls(
            &p,
            &DownfallConfig {
                min_depth: 0.1,
                ..DownfallConfig::default()
            },
        );
        assert_eq!(deep.len(), 1);
        let pct = extract_downfalls(
            &p,
            &DownfallConfig {
                depth_mode: DepthMode::Percent,
                ..DownfallConfig::default()
            },
        );
        assert!((pct[1].depth - 0.5).abs() < 1e-15);
    }

    #[test]
    fn rank_size_examples() {
        let mk = |depths: &[f64]| -> Vec<Downfall> {
            depths
                .iter()
                .map(|&depth| Downfall {
                    peak_index: 0,
                    trough_index: 1,
                    recovery_index: Some(2),
                    peak_date: NaiveDate::MIN,
                    trough_date: NaiveDate::MIN,
                    recovery_date: None,
                    peak_close: 1.0,
                    trough_close: 1.0,
                    depth,
                    duration_days: 1,
                })
                .collect()
        };
        let pts = rank_size_points(&mk(&[2.0, 8.0, 1.0, 4.0])).unwrap();
        assert_eq!(
            pts.iter().map(|p| p.depth).collect::<Vec<_>>(),
            vec![8.0, 4.0, 2.0, 1.0]
        );
        // independent slope of ln d on ln r
        let x: Vec<f64> = (1..=4).map(|r| (r as f64).ln()).collect();
        let y: Vec<f64> = [8.0f64, 4.0, 2.0, 1.0].iter().map(|d| d.ln()).collect();
        let mx = x.iter().sum::<f64>() / 4.0;
        let my = y.iter().sum::<f64>() / 4.0;
        let num: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
        let den: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
        let (slope, _) = rank_size_slope(&pts).unwrap();
        assert!((slope - num / den).abs() < 1e-12);

        let one = rank_size_points(&mk(&[0.3])).unwrap();
        assert_eq!(one.len(), 1);
        assert_eq!(one[0].log_rank, 0.0);
        assert_eq!(one[0].log_depth, 0.3f64.ln());

        let eq = rank_size_points(&mk(&[0.2, 0.2, 0.2])).unwrap();
        assert_eq!(rank_size_slope(&eq).unwrap().0, 0.0);

        assert_eq!(rank_size_points(&[]), Err(DownfallError::Empty));
    }

    #[test]
    fn kurtosis_examples() {
        for n in [4, 6, 10, 100] {
            let v: Vec<f64> = (0..n)
                .map(|i| if i % 2 == 0 { -1.0 } else { 1.0 })
                .collect();
            assert_eq!(excess_kurtosis(&v, KurtosisKind::Population), Ok(-2.0));
        }
        // {0,0,0,1}: mean 1/4, m2 = 3/16, m4 = 21/256 -> 21/256 / (9/256) - 3 = -2/3
        let k = excess_kurtosis(&[0.0, 0.0, 0.0, 1.0], KurtosisKind::Population).unwrap();
        assert!((k - (-2.0 / 3.0)).abs() < 1e-12);
        assert_eq!(
            excess_kurtosis(&[1.0; 5], KurtosisKind::Population),
            Err(DownfallError::ZeroVariance)
        );
        assert_eq!(
            excess_kurtosis(&[1.0, 2.0, 3.0], KurtosisKind::Population),
            Err(DownfallError::TooFew { needed: 4, got: 3 })
        );
    }

    #[test]
    fn sample_kurtosis_formula() {
        let v = [1.0, 2.0, 4.0, 8.0, 16.0];
        let g2 = excess_kurtosis(&v, KurtosisKind::Population).unwrap();
        let big_g2 = excess_kurtosis(&v, KurtosisKind::Sample).unwrap();
        let n = 5.0;
        assert!(
            (big_g2 - ((n - 1.0) / ((n - 2.0) * (n - 3.0)) * ((n + 1.0) * g2 + 6.0))).abs() < 1e-12
        );
    }

    #[test]
    fn scan_edge_cases() {
        let s = progressive_kurtosis(&[0.1; 6], KurtosisKind::Population).unwrap();
        assert!(s.entries.is_empty());
        assert_eq!(s.skipped_zero_variance, vec![4, 5, 6]);
        assert_eq!(critical_cutoff(&s), Err(DownfallError::EmptyScan));
        assert!(matches!(
            progressive_kurtosis(&[0.1, 0.2, 0.3, 0.4], KurtosisKind::Population),
            Err(DownfallError::TooFew { .. })
        ));
    }

    #[test]
    fn cutoff_tie_rules() {
        let c = critical_cutoff(&entries(&[-1.2, -0.1, 0.4])).unwrap();
        assert_eq!(c.kurtosis_at_cutoff, -0.1);
        assert_eq!(c.cutoff_index, 5);
        let c = critical_cutoff(&entries(&[0.2, -0.2])).unwrap();
        assert_eq!(c.kurtosis_at_cutoff, -0.2);
        assert_eq!(c.cutoff_index, 5);
    }

    #[test]
    fn episode_boundary_tie() {
        let crit = CriticalLevel {
            cutoff_depth: 0.1,
            cutoff_index: 10,
            kurtosis_at_cutoff: 0.0,
        };
        assert_eq!(classify_depth(0.1, &crit), Regime::Mesokurtic);
        assert_eq!(classify_depth(0.2, &crit), Regime::Leptokurtic);
    }
}
