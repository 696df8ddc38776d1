use std::path::Path;

use chrono::NaiveDate;
use serde::Serialize;

use crate::error::{Error, Result};

/// Adjusted close prices on strictly increasing dates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PriceSeries {
    dates: Vec<NaiveDate>,
    close: Vec<f64>,
}

impl PriceSeries {
    pub fn new(dates: Vec<NaiveDate>, close: Vec<f64>) -> Result<Self> {
        if dates.len() != close.len() {
            return Err(Error::DimensionMismatch {
                expected: dates.len(),
                found: close.len(),
            });
        }
        if close.len() < 2 {
            return Err(Error::TooShort {
                needed: 2,
                found: close.len(),
            });
        }
        if let Some(i) = close.iter().position(|c| !(c.is_finite() && *c > 0.0)) {
            return Err(Error::InvalidArgument(format!(
                "price {} on {} is not positive",
                close[i], dates[i]
            )));
        }
        if let Some(w) = dates.windows(2).find(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument(format!(
                "dates not strictly increasing at {}",
                w[1]
            )));
        }
        Ok(PriceSeries { dates, close })
    }

    /// Consecutive calendar days from `start`.
    pub fn daily(start: NaiveDate, close: Vec<f64>) -> Result<Self> {
        let dates = start.iter_days().take(close.len()).collect();
        PriceSeries::new(dates, close)
    }

    pub fn len(&self) -> usize {
        self.close.len()
    }

    pub fn is_empty(&self) -> bool {
        self.close.is_empty()
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn close(&self) -> &[f64] {
        &self.close
    }
}

/// Log returns `ln(S_t / S_{t-1})` dated at `t`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReturnSeries {
    pub dates: Vec<NaiveDate>,
    pub values: Vec<f64>,
}

impl ReturnSeries {
    pub fn new(dates: Vec<NaiveDate>, values: Vec<f64>) -> Result<Self> {
        if dates.len() != values.len() {
            return Err(Error::DimensionMismatch {
                expected: dates.len(),
                found: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("returns must be finite".into()));
        }
        Ok(ReturnSeries { dates, values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

pub fn log_returns(prices: &PriceSeries) -> ReturnSeries {
    let values = prices
        .close
        .windows(2)
        .map(|w| w[1].ln() - w[0].ln())
        .collect();
    ReturnSeries {
        dates: prices.dates[1..].to_vec(),
        values,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PriceColumns {
    pub date: String,
    pub close: String,
}

impl Default for PriceColumns {
    fn default() -> Self {
        PriceColumns {
            date: "date".into(),
            close: "adj_close".into(),
        }
    }
}

pub fn load_prices(path: impl AsRef<Path>) -> Result<PriceSeries> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::from(e).labeled(path.display().to_string()))?;
    parse_prices(&text, &PriceColumns::default())
}

pub fn load_prices_with(path: impl AsRef<Path>, columns: &PriceColumns) -> Result<PriceSeries> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::from(e).labeled(path.display().to_string()))?;
    parse_prices(&text, columns)
}

/// Parses a headed CSV; rows are sorted by date (stable), duplicate dates,
/// bad dates and nonpositive prices are rejected with the row number.
pub fn parse_prices(text: &str, columns: &PriceColumns) -> Result<PriceSeries> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header = reader.headers()?.clone();
    let find = |name: &str| {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Parse(format!("missing column '{name}'")))
    };
    let (di, ci) = (find(&columns.date)?, find(&columns.close)?);

    let mut rows: Vec<(NaiveDate, f64)> = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let record = record?;
        let field = |j: usize| record.get(j).unwrap_or("");
        let date = NaiveDate::parse_from_str(field(di), "%Y-%m-%d")
            .map_err(|e| Error::Parse(format!("row {row}: bad date '{}': {e}", field(di))))?;
        let close: f64 = field(ci)
            .parse()
            .map_err(|_| Error::Parse(format!("row {row}: bad price '{}'", field(ci))))?;
        if !(close.is_finite() && close > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "row {row}: price {close} is not positive"
            )));
        }
        rows.push((date, close));
    }
    rows.sort_by_key(|r| r.0);
    if let Some(w) = rows.windows(2).find(|w| w[0].0 == w[1].0) {
        return Err(Error::InvalidArgument(format!("duplicate date {}", w[0].0)));
    }
    let (dates, close) = rows.into_iter().unzip();
    PriceSeries::new(dates, close)
}
