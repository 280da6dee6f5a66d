//! Straight-line reference implementations for tests.
//!
//! Nothing here depends on `hurstkit`; each function recomputes its quantity
//! the slow, literal way so it can be compared against the library.

/// R/S of one segment following the textbook steps: mean, standard
/// deviation, the full cumulative-deviation vector, its max minus min.
pub fn rs_segment(segment: &[f64], population: bool) -> Option<f64> {
    let n = segment.len();
    let mut total = 0.0;
    for v in segment {
        total += v;
    }
    let m = total / n as f64;
    let mut sq = 0.0;
    for v in segment {
        sq += (v - m).powi(2);
    }
    let s = if population {
        (sq / n as f64).sqrt()
    } else {
        (sq / (n as f64 - 1.0)).sqrt()
    };
    let mut walk = Vec::with_capacity(n);
    for k in 0..n {
        let mut x = 0.0;
        for v in &segment[..=k] {
            x += v - m;
        }
        walk.push(x);
    }
    let max = walk.iter().cloned().fold(f64::MIN, f64::max);
    let min = walk.iter().cloned().fold(f64::MAX, f64::min);
    if s == 0.0 {
        None
    } else {
        Some((max - min) / s)
    }
}

/// Average R/S over segments `[v*n, (v+1)*n)` for `v < floor(len/n)`,
/// skipping zero-variance segments. `None` when all are degenerate.
pub fn rs_at_scale(series: &[f64], n: usize, population: bool) -> Option<f64> {
    let segments = series.len() / n;
    let mut ratios = Vec::new();
    for v in 0..segments {
        if let Some(r) = rs_segment(&series[v * n..(v + 1) * n], population) {
            ratios.push(r);
        }
    }
    if ratios.is_empty() {
        None
    } else {
        Some(ratios.iter().sum::<f64>() / ratios.len() as f64)
    }
}

/// Closed-form OLS `(slope, intercept)` from raw sums.
pub fn ols(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let sx: f64 = x.iter().sum();
    let sy: f64 = y.iter().sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let sxx: f64 = x.iter().map(|a| a * a).sum();
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    (slope, (sy - slope * sx) / n)
}

/// DFA `<F^2(tau)>` with boxes on the global time axis `t = k*tau + 1 ..`,
/// each detrended by solving the 2x2 normal equations.
pub fn dfa_fluctuation(series: &[f64], tau: usize, integrate: bool) -> f64 {
    let data: Vec<f64> = if integrate {
        let m = series.iter().sum::<f64>() / series.len() as f64;
        let mut acc = 0.0;
        series
            .iter()
            .map(|v| {
                acc += v - m;
                acc
            })
            .collect()
    } else {
        series.to_vec()
    };
    let boxes = data.len() / tau;
    let mut total = 0.0;
    for k in 0..boxes {
        let t: Vec<f64> = (k * tau + 1..=(k + 1) * tau).map(|t| t as f64).collect();
        let y = &data[k * tau..(k + 1) * tau];
        let (a, b) = ols(&t, y);
        let mut f2 = 0.0;
        for (ti, yi) in t.iter().zip(y) {
            f2 += (yi - (a * ti + b)).powi(2);
        }
        total += f2 / tau as f64;
    }
    total / boxes as f64
}

/// Episode bounds `(peak, trough, recovery)` found by recomputing every
/// threshold from scratch.
pub fn downfall_episodes(closes: &[f64], lookback: usize) -> Vec<(usize, usize, Option<usize>)> {
    let mut out = Vec::new();
    let mut t = 1;
    while t < closes.len() {
        if closes[t] >= closes[t - 1] {
            t += 1;
            continue;
        }
        let peak = t - 1;
        let mut recovery = None;
        for u in t..closes.len() {
            let from = u.saturating_sub(lookback);
            let high = closes[from..u].iter().cloned().fold(f64::MIN, f64::max);
            let level = if closes[peak] < high {
                closes[peak]
            } else {
                high
            };
            if closes[u] >= level {
                recovery = Some(u);
                break;
            }
        }
        let end = recovery.unwrap_or(closes.len());
        let mut trough = t;
        for i in t..end {
            if closes[i] < closes[trough] {
                trough = i;
            }
        }
        out.push((peak, trough, recovery));
        match recovery {
            Some(r) => t = r + 1,
            None => break,
        }
    }
    out
}

/// Population excess kurtosis from raw moments.
pub fn excess_kurtosis(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let raw = |p: i32| values.iter().map(|v| v.powi(p)).sum::<f64>() / n;
    let (e1, e2, e3, e4) = (raw(1), raw(2), raw(3), raw(4));
    let m2 = e2 - e1 * e1;
    let m4 = e4 - 4.0 * e1 * e3 + 6.0 * e1 * e1 * e2 - 3.0 * e1.powi(4);
    m4 / (m2 * m2) - 3.0
}

/// Biased sample autocovariance at lag `k`.
pub fn autocovariance(x: &[f64], k: usize) -> f64 {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    let mut acc = 0.0;
    for i in 0..x.len() - k {
        acc += (x[i] - m) * (x[i + k] - m);
    }
    acc / n
}

/// Small deterministic generator (SplitMix64) for oracle corpora, kept
/// separate from the library's RNG.
pub struct SplitMix(pub u64);

impl SplitMix {
    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn below(&mut self, n: usize) -> usize {
        (self.next_u64() % n as u64) as usize
    }

    /// Box-Muller normal.
    pub fn normal(&mut self) -> f64 {
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }
}

/// Labeled depth corpus: 200 half-normal magnitudes (sd 0.03) followed by
/// 20 Pareto magnitudes (xmin 0.12, alpha 1.5). `true` marks a tail event.
pub fn normal_tail_mixture(seed: u64) -> (Vec<f64>, Vec<bool>) {
    let mut rng = SplitMix(seed);
    let mut depths = Vec::with_capacity(220);
    let mut tail = Vec::with_capacity(220);
    for _ in 0..200 {
        depths.push((0.03 * rng.normal()).abs());
        tail.push(false);
    }
    for _ in 0..20 {
        depths.push(0.12 * (1.0 - rng.uniform()).powf(-1.0 / 1.5));
        tail.push(true);
    }
    (depths, tail)
}
