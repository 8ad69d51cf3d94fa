use std::cmp::Ordering;
use std::fmt;
use std::io::Read;

use chrono::{DateTime, NaiveDate, NaiveDateTime};
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::scalar::Exact;

/// Fundamental sphere a flag column belongs to, chosen by its name prefix.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sphere {
    Econ,
    Pol,
    Soc,
}

impl Sphere {
    pub const ALL: [Sphere; 3] = [Sphere::Econ, Sphere::Pol, Sphere::Soc];

    pub fn prefix(self) -> &'static str {
        match self {
            Sphere::Econ => "econ_",
            Sphere::Pol => "pol_",
            Sphere::Soc => "soc_",
        }
    }

    pub fn from_column(name: &str) -> Option<Self> {
        Self::ALL
            .into_iter()
            .find(|s| name.starts_with(s.prefix()) && name.len() > s.prefix().len())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlagColumn {
    pub name: String,
    pub sphere: Sphere,
}

/// ISO-8601 instant; keeps the source text for round-tripping into reports.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Timestamp {
    text: String,
    instant: NaiveDateTime,
}

impl Timestamp {
    pub fn parse(text: &str) -> Option<Self> {
        let text = text.trim();
        let instant = DateTime::parse_from_rfc3339(text)
            .map(|dt| dt.naive_utc())
            .or_else(|_| NaiveDateTime::parse_from_str(text, "%Y-%m-%dT%H:%M:%S%.f"))
            .or_else(|_| NaiveDateTime::parse_from_str(text, "%Y-%m-%d %H:%M:%S%.f"))
            .or_else(|_| {
                NaiveDate::parse_from_str(text, "%Y-%m-%d")
                    .map(|d| d.and_hms_opt(0, 0, 0).expect("midnight exists"))
            })
            .ok()?;
        Some(Self {
            text: text.to_string(),
            instant,
        })
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }

    pub fn instant(&self) -> NaiveDateTime {
        self.instant
    }
}

impl PartialOrd for Timestamp {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Timestamp {
    fn cmp(&self, other: &Self) -> Ordering {
        self.instant.cmp(&other.instant)
    }
}

impl fmt::Display for Timestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MarketRow {
    pub timestamp: Timestamp,
    pub price: Exact,
    pub volume: Exact,
    /// One flag per [`MarketDataset::flag_columns`] entry.
    pub flags: Vec<bool>,
    /// Recorded behavior as a decision mask (bit 0 = `d_plus`, bit 1 = `d_minus`), when supplied.
    pub decision: Option<u32>,
}

/// Validated market history: strictly increasing timestamps, positive prices,
/// nonnegative volumes, the same flag columns on every row.
#[derive(Clone, Debug, PartialEq)]
pub struct MarketDataset {
    flag_columns: Vec<FlagColumn>,
    has_decisions: bool,
    rows: Vec<MarketRow>,
}

const DECISION_COLUMNS: [&str; 2] = ["d_plus", "d_minus"];

impl MarketDataset {
    pub fn new(flag_columns: Vec<FlagColumn>, rows: Vec<MarketRow>) -> Result<Self> {
        let has_decisions = rows.first().is_some_and(|r| r.decision.is_some());
        for (i, row) in rows.iter().enumerate() {
            let line = i + 2;
            if row.flags.len() != flag_columns.len() {
                return Err(Error::Ingest {
                    row: line,
                    message: format!(
                        "expected {} flags, found {}",
                        flag_columns.len(),
                        row.flags.len()
                    ),
                });
            }
            if row.decision.is_some() != has_decisions {
                return Err(Error::Ingest {
                    row: line,
                    message: "decision columns present on some rows only".into(),
                });
            }
            if !row.price.is_positive() {
                return Err(Error::Ingest {
                    row: line,
                    message: format!("price must be positive, got {}", row.price),
                });
            }
            if row.volume.is_negative() {
                return Err(Error::Ingest {
                    row: line,
                    message: format!("volume must be nonnegative, got {}", row.volume),
                });
            }
            if i > 0 && row.timestamp <= rows[i - 1].timestamp {
                return Err(Error::Ingest {
                    row: line,
                    message: format!(
                        "timestamp {} does not follow {}",
                        row.timestamp,
                        rows[i - 1].timestamp
                    ),
                });
            }
        }
        Ok(Self {
            flag_columns,
            has_decisions,
            rows,
        })
    }

    /// Parses the CSV interchange format. Errors carry the 1-based line number
    /// (the header is line 1).
    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers = rdr
            .headers()
            .map_err(|e| Error::Header(e.to_string()))?
            .clone();
        let names: Vec<&str> = headers.iter().collect();
        if names.len() < 3 || names[..3] != ["timestamp", "price", "volume"] {
            return Err(Error::Header(
                "header must start with `timestamp,price,volume`".into(),
            ));
        }
        let mut flag_columns = Vec::new();
        let mut flag_positions = Vec::new();
        let mut decision_positions = [None, None];
        for (pos, name) in names.iter().enumerate().skip(3) {
            if let Some(k) = DECISION_COLUMNS.iter().position(|c| c == name) {
                if decision_positions[k].replace(pos).is_some() {
                    return Err(Error::Header(format!("duplicate column `{name}`")));
                }
                continue;
            }
            let sphere = Sphere::from_column(name).ok_or_else(|| {
                Error::Header(format!(
                    "unknown column `{name}`: flag columns must start with econ_, pol_ or soc_"
                ))
            })?;
            if flag_columns.iter().any(|c: &FlagColumn| c.name == *name) {
                return Err(Error::Header(format!("duplicate column `{name}`")));
            }
            flag_columns.push(FlagColumn {
                name: name.to_string(),
                sphere,
            });
            flag_positions.push(pos);
        }
        let decision_positions = match decision_positions {
            [Some(p), Some(m)] => Some((p, m)),
            [None, None] => None,
            _ => {
                return Err(Error::Header(
                    "decision history needs both `d_plus` and `d_minus` columns".into(),
                ))
            }
        };

        let mut rows = Vec::new();
        for (i, record) in rdr.records().enumerate() {
            let line = i + 2;
            let record = record.map_err(|e| Error::Ingest {
                row: line,
                message: e.to_string(),
            })?;
            if record.len() != names.len() {
                return Err(Error::Ingest {
                    row: line,
                    message: format!("expected {} fields, found {}", names.len(), record.len()),
                });
            }
            let bad = |message: String| Error::Ingest { row: line, message };
            let timestamp = Timestamp::parse(&record[0])
                .ok_or_else(|| bad(format!("invalid timestamp `{}`", &record[0])))?;
            let price = parse_decimal(&record[1])
                .ok_or_else(|| bad(format!("invalid price `{}`", &record[1])))?;
            let volume = parse_decimal(&record[2])
                .ok_or_else(|| bad(format!("invalid volume `{}`", &record[2])))?;
            let flags = flag_positions
                .iter()
                .map(|&p| parse_flag(&record[p]).ok_or_else(|| bad(format!("flag `{}` must be 0 or 1, got `{}`", names[p], &record[p]))))
                .collect::<Result<Vec<_>>>()?;
            let decision = match decision_positions {
                Some((p, m)) => {
                    let plus = parse_flag(&record[p])
                        .ok_or_else(|| bad(format!("d_plus must be 0 or 1, got `{}`", &record[p])))?;
                    let minus = parse_flag(&record[m])
                        .ok_or_else(|| bad(format!("d_minus must be 0 or 1, got `{}`", &record[m])))?;
                    Some(plus as u32 | (minus as u32) << 1)
                }
                None => None,
            };
            rows.push(MarketRow {
                timestamp,
                price,
                volume,
                flags,
                decision,
            });
        }
        Self::new(flag_columns, rows)
    }

    pub fn from_csv_bytes(bytes: &[u8]) -> Result<Self> {
        Self::from_csv_reader(bytes)
    }

    pub fn rows(&self) -> &[MarketRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn flag_columns(&self) -> &[FlagColumn] {
        &self.flag_columns
    }

    pub fn has_decisions(&self) -> bool {
        self.has_decisions
    }

    pub fn prices(&self) -> Vec<Exact> {
        self.rows.iter().map(|r| r.price).collect()
    }

    pub fn volumes(&self) -> Vec<Exact> {
        self.rows.iter().map(|r| r.volume).collect()
    }

    /// The first `len` rows.
    pub fn prefix(&self, len: usize) -> Self {
        Self {
            flag_columns: self.flag_columns.clone(),
            has_decisions: self.has_decisions,
            rows: self.rows[..len.min(self.rows.len())].to_vec(),
        }
    }

    /// Same rows with every price mapped through `f` (must stay positive).
    pub fn map_prices(&self, f: impl Fn(&Exact) -> Exact) -> Result<Self> {
        let rows = self
            .rows
            .iter()
            .map(|r| MarketRow {
                price: f(&r.price),
                ..r.clone()
            })
            .collect();
        Self::new(self.flag_columns.clone(), rows)
    }
}

fn parse_flag(s: &str) -> Option<bool> {
    match s {
        "0" => Some(false),
        "1" => Some(true),
        _ => None,
    }
}

const MAX_FRACTION_DIGITS: u32 = 12;

/// Parses a plain decimal literal (`-12.5`, `3`, `.25`) into an exact rational.
/// Exponents, NaN and infinities are rejected.
pub fn parse_decimal(s: &str) -> Option<Exact> {
    let s = s.trim();
    let (negative, body) = match s.as_bytes().first()? {
        b'-' => (true, &s[1..]),
        b'+' => (false, &s[1..]),
        _ => (false, s),
    };
    let (int_part, frac_part) = match body.split_once('.') {
        Some((i, f)) => (i, f),
        None => (body, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return None;
    }
    if frac_part.len() as u32 > MAX_FRACTION_DIGITS || int_part.len() > 24 {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let numer: i128 = if digits.is_empty() { 0 } else { digits.parse().ok()? };
    let denom = 10i128.pow(frac_part.len() as u32);
    let value = Exact::new(numer, denom);
    Some(if negative && !value.is_zero() { -value } else { value })
}
