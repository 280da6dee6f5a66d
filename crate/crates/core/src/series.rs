//! Dated price series, CSV ingestion and log-return transforms.

use std::fmt::Write as _;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_DATE_FORMAT: &str = "%Y-%m-%d";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IngestError {
    #[error("malformed row at line {line}: {reason}")]
    MalformedRow { line: usize, reason: String },
    #[error("non-positive close {close} at line {line}")]
    NonPositivePrice { line: usize, close: f64 },
    #[error("duplicate date {0}")]
    DuplicateDate(NaiveDate),
    #[error("series has {0} observation(s), at least 2 are required")]
    TooShort(usize),
    #[error("column {0} not found in header")]
    MissingColumn(String),
    #[error("csv error: {0}")]
    Csv(String),
}

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum TransformError {
    #[error("returns are already {0:?}-transformed; transforms apply to raw returns only")]
    AlreadyTransformed(ReturnTransform),
}

/// Selects a CSV column either by zero-based position or by header name.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ColumnRef {
    Index(usize),
    Name(String),
}

impl ColumnRef {
    fn resolve(&self, headers: &csv::StringRecord) -> Result<usize, IngestError> {
        match self {
            ColumnRef::Index(i) if *i < headers.len() => Ok(*i),
            ColumnRef::Index(i) => Err(IngestError::MissingColumn(i.to_string())),
            ColumnRef::Name(name) => headers
                .iter()
                .position(|h| h.trim() == name)
                .ok_or_else(|| IngestError::MissingColumn(name.clone())),
        }
    }
}

impl std::str::FromStr for ColumnRef {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.parse::<usize>() {
            Ok(i) => ColumnRef::Index(i),
            Err(_) => ColumnRef::Name(s.to_string()),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CsvConfig {
    pub symbol: String,
    pub date_column: ColumnRef,
    pub close_column: ColumnRef,
    pub delimiter: u8,
    pub date_format: String,
}

impl Default for CsvConfig {
    fn default() -> Self {
        Self {
            symbol: "SERIES".to_string(),
            date_column: ColumnRef::Index(0),
            close_column: ColumnRef::Index(1),
            delimiter: b',',
            date_format: DEFAULT_DATE_FORMAT.to_string(),
        }
    }
}

/// Daily closing prices with strictly increasing dates and positive closes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriceSeries {
    symbol: String,
    dates: Vec<NaiveDate>,
    closes: Vec<f64>,
}

impl PriceSeries {
    /// Builds a series from observations, sorting them by date first.
    ///
    /// Line numbers in errors refer to the position in `observations` (1-based).
    pub fn new(
        symbol: impl Into<String>,
        observations: Vec<(NaiveDate, f64)>,
    ) -> Result<Self, IngestError> {
        let mut indexed: Vec<(usize, NaiveDate, f64)> = observations
            .into_iter()
            .enumerate()
            .map(|(i, (d, c))| (i + 1, d, c))
            .collect();
        for &(line, _, close) in &indexed {
            if !close.is_finite() {
                return Err(IngestError::MalformedRow {
                    line,
                    reason: format!("non-finite close {close}"),
                });
            }
            if close <= 0.0 {
                return Err(IngestError::NonPositivePrice { line, close });
            }
        }
        indexed.sort_by_key(|&(_, d, _)| d);
        if let Some(w) = indexed.windows(2).find(|w| w[0].1 == w[1].1) {
            return Err(IngestError::DuplicateDate(w[0].1));
        }
        if indexed.len() < 2 {
            return Err(IngestError::TooShort(indexed.len()));
        }
        let (dates, closes) = indexed.into_iter().map(|(_, d, c)| (d, c)).unzip();
        Ok(Self {
            symbol: symbol.into(),
            dates,
            closes,
        })
    }

    pub fn symbol(&self) -> &str {
        &self.symbol
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn closes(&self) -> &[f64] {
        &self.closes
    }

    pub fn len(&self) -> usize {
        self.closes.len()
    }

    /// Always false for a constructed series; present for API symmetry.
    pub fn is_empty(&self) -> bool {
        self.closes.is_empty()
    }

    pub fn observations(&self) -> impl Iterator<Item = (NaiveDate, f64)> + '_ {
        self.dates.iter().copied().zip(self.closes.iter().copied())
    }

    /// Multiplies every close by `factor` (> 0).
    pub fn scaled(&self, factor: f64) -> Result<Self, IngestError> {
        Self::new(
            self.symbol.clone(),
            self.observations().map(|(d, c)| (d, c * factor)).collect(),
        )
    }

    /// Writes `date,close` CSV that [`parse_price_csv`] reads back exactly.
    pub fn to_csv(&self, date_format: &str) -> String {
        let mut out = String::with_capacity(self.len() * 24);
        out.push_str("date,close\n");
        for (d, c) in self.observations() {
            let _ = writeln!(out, "{},{}", d.format(date_format), c);
        }
        out
    }
}

fn csv_reader(raw_text: &str, delimiter: u8) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .has_headers(true)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(raw_text.as_bytes())
}

/// `(date, number)` rows and the file line each came from.
type DatedRows = (Vec<(NaiveDate, f64)>, Vec<usize>);

/// Reads `(date, number)` rows; also returns the file line of each row.
fn read_dated_rows(
    raw_text: &str,
    config: &CsvConfig,
    what: &str,
) -> Result<DatedRows, IngestError> {
    let mut reader = csv_reader(raw_text, config.delimiter);
    let headers = reader
        .headers()
        .map_err(|e| IngestError::Csv(e.to_string()))?
        .clone();
    let date_idx = config.date_column.resolve(&headers)?;
    let close_idx = config.close_column.resolve(&headers)?;

    let mut observations = Vec::new();
    let mut lines = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| IngestError::Csv(e.to_string()))?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        let field = |idx: usize| {
            record.get(idx).ok_or_else(|| IngestError::MalformedRow {
                line,
                reason: format!("missing column {idx}"),
            })
        };
        let date_text = field(date_idx)?;
        let date = NaiveDate::parse_from_str(date_text, &config.date_format).map_err(|e| {
            IngestError::MalformedRow {
                line,
                reason: format!("bad date {date_text:?}: {e}"),
            }
        })?;
        let close_text = field(close_idx)?;
        let close: f64 = close_text.parse().map_err(|_| IngestError::MalformedRow {
            line,
            reason: format!("bad {what} {close_text:?}"),
        })?;
        observations.push((date, close));
        lines.push(line);
    }
    Ok((observations, lines))
}

/// Parses a delimiter-separated text with a header row into a [`PriceSeries`].
pub fn parse_price_csv(raw_text: &str, config: &CsvConfig) -> Result<PriceSeries, IngestError> {
    let (observations, lines) = read_dated_rows(raw_text, config, "price")?;

    // Re-map positional line numbers from PriceSeries::new back to file lines.
    PriceSeries::new(config.symbol.clone(), observations).map_err(|e| match e {
        IngestError::MalformedRow { line, reason } => IngestError::MalformedRow {
            line: lines[line - 1],
            reason,
        },
        IngestError::NonPositivePrice { line, close } => IngestError::NonPositivePrice {
            line: lines[line - 1],
            close,
        },
        other => other,
    })
}

/// Reads already-computed returns (any finite value) from the column that
/// would hold closes. Rows are sorted by date; dates must be unique.
pub fn parse_return_csv(raw_text: &str, config: &CsvConfig) -> Result<ReturnSeries, IngestError> {
    let (mut rows, lines) = read_dated_rows(raw_text, config, "value")?;
    if let Some(i) = rows.iter().position(|r| !r.1.is_finite()) {
        return Err(IngestError::MalformedRow {
            line: lines[i],
            reason: format!("non-finite value {}", rows[i].1),
        });
    }
    rows.sort_by_key(|r| r.0);
    if let Some(w) = rows.windows(2).find(|w| w[0].0 == w[1].0) {
        return Err(IngestError::DuplicateDate(w[0].0));
    }
    if rows.len() < 2 {
        return Err(IngestError::TooShort(rows.len()));
    }
    let (dates, values) = rows.into_iter().unzip();
    Ok(ReturnSeries::from_raw(config.symbol.clone(), dates, values))
}

/// Reads `(scale, statistic)` pairs from the first two columns.
pub fn parse_curve_csv(raw_text: &str, delimiter: u8) -> Result<Vec<(f64, f64)>, IngestError> {
    let mut reader = csv_reader(raw_text, delimiter);
    let mut points = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| IngestError::Csv(e.to_string()))?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        let number = |idx: usize| -> Result<f64, IngestError> {
            let text = record.get(idx).unwrap_or("");
            text.parse().map_err(|_| IngestError::MalformedRow {
                line,
                reason: format!("bad number {text:?} in column {idx}"),
            })
        };
        points.push((number(0)?, number(1)?));
    }
    Ok(points)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ReturnTransform {
    #[default]
    Raw,
    Absolute,
    Squared,
}

impl ReturnTransform {
    pub fn apply(self, r: f64) -> f64 {
        match self {
            ReturnTransform::Raw => r,
            ReturnTransform::Absolute => r.abs(),
            ReturnTransform::Squared => r * r,
        }
    }
}

/// Daily log-returns, dated by the later of the two prices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReturnSeries {
    source_symbol: String,
    transform: ReturnTransform,
    dates: Vec<NaiveDate>,
    values: Vec<f64>,
}

impl ReturnSeries {
    /// Wraps raw returns that did not come from a price series (synthetic data).
    pub fn from_raw(symbol: impl Into<String>, dates: Vec<NaiveDate>, values: Vec<f64>) -> Self {
        assert_eq!(dates.len(), values.len(), "dates and values must align");
        Self {
            source_symbol: symbol.into(),
            transform: ReturnTransform::Raw,
            dates,
            values,
        }
    }

    pub fn source_symbol(&self) -> &str {
        &self.source_symbol
    }

    pub fn transform_kind(&self) -> ReturnTransform {
        self.transform
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Applies `kind` element-wise. Only raw returns can be transformed.
    pub fn transform(&self, kind: ReturnTransform) -> Result<ReturnSeries, TransformError> {
        if kind == ReturnTransform::Raw {
            return Ok(self.clone());
        }
        if self.transform != ReturnTransform::Raw {
            return Err(TransformError::AlreadyTransformed(self.transform));
        }
        Ok(ReturnSeries {
            source_symbol: self.source_symbol.clone(),
            transform: kind,
            dates: self.dates.clone(),
            values: self.values.iter().map(|&r| kind.apply(r)).collect(),
        })
    }
}

/// `r_t = ln p_{t+1} - ln p_t` for every consecutive pair of closes.
pub fn log_returns(series: &PriceSeries) -> ReturnSeries {
    let values = series
        .closes
        .windows(2)
        .map(|w| w[1].ln() - w[0].ln())
        .collect();
    ReturnSeries {
        source_symbol: series.symbol.clone(),
        transform: ReturnTransform::Raw,
        dates: series.dates[1..].to_vec(),
        values,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(s: &str) -> NaiveDate {
        NaiveDate::parse_from_str(s, DEFAULT_DATE_FORMAT).unwrap()
    }

    #[test]
    fn return_and_curve_tables() {
        let r = parse_return_csv(
            "date,value\n2020-01-03,-0.5\n2020-01-02,0.25\n",
            &CsvConfig::default(),
        )
        .unwrap();
        assert_eq!(r.values(), &[0.25, -0.5]);
        assert_eq!(r.dates()[0], d("2020-01-02"));
        assert!(matches!(
            parse_return_csv(
                "date,value\n2020-01-02,nan\n2020-01-03,1\n",
                &CsvConfig::default()
            ),
            Err(IngestError::MalformedRow { line: 2, .. })
        ));
        let c = parse_curve_csv("n,rs\n8,2.5\n16,4\n", b',').unwrap();
        assert_eq!(c, vec![(8.0, 2.5), (16.0, 4.0)]);
        assert!(parse_curve_csv("n,rs\n8,x\n", b',').is_err());
    }

    #[test]
    fn minimal_two_rows() {
        let s = parse_price_csv(
            "date,close\n2020-01-02,100.0\n2020-01-03,101.0\n",
            &CsvConfig::default(),
        )
        .unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.closes(), &[100.0, 101.0]);
    }

    #[test]
    fn negative_close_rejected() {
        let err = parse_price_csv(
            "date,close\n2020-01-02,100.0\n2020-01-03,-5.0\n",
            &CsvConfig::default(),
        )
        .unwrap_err();
        assert_eq!(
            err,
            IngestError::NonPositivePrice {
                line: 3,
                close: -5.0
            }
        );
    }

    #[test]
    fn error_paths() {
        let cfg = CsvConfig::default();
        assert!(matches!(
            parse_price_csv("date,close\n2020-01-02,100\n2020-01-02,101\n", &cfg),
            Err(IngestError::DuplicateDate(_))
        ));
        assert_eq!(
            parse_price_csv("date,close\n2020-01-02,100\n", &cfg),
            Err(IngestError::TooShort(1))
        );
        assert!(matches!(
            parse_price_csv("date,close\n2020-13-02,100\n2020-01-03,1\n", &cfg),
            Err(IngestError::MalformedRow { line: 2, .. })
        ));
        assert!(matches!(
            parse_price_csv("date,close\n2020-01-02,abc\n2020-01-03,1\n", &cfg),
            Err(IngestError::MalformedRow { line: 2, .. })
        ));
        assert!(matches!(
            parse_price_csv("date,close\n2020-01-02,NaN\n2020-01-03,1\n", &cfg),
            Err(IngestError::MalformedRow { .. })
        ));
        assert!(matches!(
            parse_price_csv("date,close\n2020-01-02,0\n2020-01-03,1\n", &cfg),
            Err(IngestError::NonPositivePrice { .. })
        ));
    }

    #[test]
    fn unsorted_rows_are_sorted_and_columns_by_name() {
        let cfg = CsvConfig {
            date_column: ColumnRef::Name("Date".into()),
            close_column: ColumnRef::Name("Close".into()),
            delimiter: b';',
            date_format: "%d/%m/%Y".into(),
            ..CsvConfig::default()
        };
        let s = parse_price_csv(
            "Open;Close;Date\n1;12.5;06/01/2020\n1;10;03/01/2020\n1;11;02/01/2020\n",
            &cfg,
        )
        .unwrap();
        assert_eq!(
            s.dates(),
            &[d("2020-01-02"), d("2020-01-03"), d("2020-01-06")]
        );
        assert_eq!(s.closes(), &[11.0, 10.0, 12.5]);
    }

    #[test]
    fn missing_column() {
        let cfg = CsvConfig {
            close_column: ColumnRef::Name("adj".into()),
            ..CsvConfig::default()
        };
        assert_eq!(
            parse_price_csv("date,close\n2020-01-02,1\n2020-01-03,2\n", &cfg),
            Err(IngestError::MissingColumn("adj".into()))
        );
    }

    #[test]
    fn log_return_examples() {
        let mk = |a: f64, b: f64| {
            PriceSeries::new("X", vec![(d("2020-01-02"), a), (d("2020-01-03"), b)]).unwrap()
        };
        assert_eq!(log_returns(&mk(100.0, 100.0)).values(), &[0.0]);
        assert_eq!(log_returns(&mk(1.0, std::f64::consts::E)).values(), &[1.0]);
        let r = log_returns(&mk(100.0, 110.0));
        assert!((r.values()[0] - 0.095_310_179_804_324_87).abs() < 1e-15);
        assert_eq!(r.dates(), &[d("2020-01-03")]);
    }

    #[test]
    fn transform_examples() {
        let raw = ReturnSeries::from_raw(
            "X",
            vec![d("2020-01-02"), d("2020-01-03")],
            vec![-0.02, 0.03],
        );
        let abs = raw.transform(ReturnTransform::Absolute).unwrap();
        assert_eq!(abs.values(), &[0.02, 0.03]);
        assert_eq!(abs.dates(), raw.dates());
        let sq = ReturnSeries::from_raw("X", vec![d("2020-01-02")], vec![-0.02])
            .transform(ReturnTransform::Squared)
            .unwrap();
        assert!((sq.values()[0] - 0.0004).abs() < 1e-18);
        assert_eq!(raw.transform(ReturnTransform::Raw).unwrap(), raw);
        assert_eq!(
            abs.transform(ReturnTransform::Squared),
            Err(TransformError::AlreadyTransformed(
                ReturnTransform::Absolute
            ))
        );
        // Raw on an already transformed series is the identity
        assert_eq!(abs.transform(ReturnTransform::Raw).unwrap(), abs);
    }
}
