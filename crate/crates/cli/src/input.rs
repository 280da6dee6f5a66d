use std::io::Read;

use hurstkit::series::{log_returns, parse_price_csv, parse_return_csv, CsvConfig};
use hurstkit::{PriceSeries, ReturnSeries};
use serde_json::{json, Value};

use crate::report::{sha256_hex, CliError};
use crate::InputArgs;

pub struct RawInput {
    pub text: String,
    pub sha256: String,
}

pub struct Loaded {
    pub prices: Option<PriceSeries>,
    pub returns: ReturnSeries,
    pub sha256: String,
}

pub fn read_raw(args: &InputArgs) -> Result<RawInput, CliError> {
    let bytes = match &args.input {
        Some(path) if path.as_os_str() != "-" => std::fs::read(path)
            .map_err(|e| CliError::input("unreadable_input", format!("{}: {e}", path.display())))?,
        _ => {
            let mut buf = Vec::new();
            std::io::stdin()
                .read_to_end(&mut buf)
                .map_err(|e| CliError::input("unreadable_input", e))?;
            buf
        }
    };
    let sha256 = sha256_hex(&bytes);
    let text = String::from_utf8(bytes).map_err(|e| CliError::input("not_utf8", e))?;
    Ok(RawInput { text, sha256 })
}

pub fn csv_config(args: &InputArgs) -> Result<CsvConfig, CliError> {
    if !args.delimiter.is_ascii() {
        return Err(CliError::config(
            "bad_delimiter",
            "delimiter must be a single ASCII character",
        ));
    }
    Ok(CsvConfig {
        symbol: args.symbol.clone(),
        date_column: args.date_column.clone(),
        close_column: args.close_column.clone(),
        delimiter: args.delimiter as u8,
        date_format: args.date_format.clone(),
    })
}

pub fn load(args: &InputArgs) -> Result<Loaded, CliError> {
    let raw = read_raw(args)?;
    let config = csv_config(args)?;
    let ingest = |e: hurstkit::IngestError| CliError::input("ingest", e);
    if args.returns {
        Ok(Loaded {
            prices: None,
            returns: parse_return_csv(&raw.text, &config).map_err(ingest)?,
            sha256: raw.sha256,
        })
    } else {
        let prices = parse_price_csv(&raw.text, &config).map_err(ingest)?;
        Ok(Loaded {
            returns: log_returns(&prices),
            prices: Some(prices),
            sha256: raw.sha256,
        })
    }
}

pub fn describe(args: &InputArgs) -> Value {
    json!({
        "source": args.input.as_ref().map_or("-".to_string(), |p| p.display().to_string()),
        "values": if args.returns { "returns" } else { "prices" },
        "date_column": args.date_column,
        "close_column": args.close_column,
        "delimiter": args.delimiter.to_string(),
        "date_format": args.date_format,
    })
}
