use num_traits::{FromPrimitive, Num};

use crate::error::{Error, Result};
use crate::event_algebra::{EventFamily, EventSet};
use crate::market::dataset::{MarketDataset, Sphere, Timestamp};
use crate::scalar::Exact;

/// Labels of the circumstance sextet, in bit order.
pub const CIRCUMSTANCE_LABELS: [&str; 6] = ["f1", "f2", "f3", "f4", "f5", "f6"];

pub fn circumstance_family() -> EventFamily {
    EventFamily::new(CIRCUMSTANCE_LABELS).expect("six distinct labels")
}

/// Sliding-average lookbacks: the short and long windows span `n1 + 1` and `n2 + 1` rows.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct IndicatorConfig {
    pub n1: usize,
    pub n2: usize,
}

impl IndicatorConfig {
    pub fn new(n1: usize, n2: usize) -> Result<Self> {
        let config = Self { n1, n2 };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n1 >= self.n2 {
            return Err(Error::InvalidConfig(format!(
                "n1 ({}) must be smaller than n2 ({})",
                self.n1, self.n2
            )));
        }
        Ok(())
    }

    /// Rows dropped before the first circumstance record.
    pub fn warmup(&self) -> usize {
        self.n2
    }
}

/// Trailing mean over `window` values: `out[k]` averages `values[k..k + window]`.
///
/// The output is aligned so that `out[t - (window - 1)]` is the average ending at `t`.
pub fn sliding_average<T>(values: &[T], window: usize) -> Result<Vec<T>>
where
    T: Num + Clone + FromPrimitive,
{
    if window == 0 {
        return Err(Error::InvalidConfig("window must hold at least one value".into()));
    }
    if values.len() < window {
        return Err(Error::InsufficientHistory {
            needed: window,
            available: values.len(),
        });
    }
    let divisor = T::from_usize(window).expect("window fits the scalar type");
    Ok(values
        .windows(window)
        .map(|w| {
            w.iter()
                .cloned()
                .fold(T::zero(), |acc, v| acc + v)
                / divisor.clone()
        })
        .collect())
}

/// Technical events at one moment.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TechnicalEvents {
    /// Price at or above the short average.
    pub f1: bool,
    /// Price at or above the long average.
    pub f2: bool,
    /// Short average at or above the long average.
    pub f3: bool,
}

fn check_history(dataset: &MarketDataset, needed: usize) -> Result<()> {
    if dataset.len() < needed {
        return Err(Error::InsufficientHistory {
            needed,
            available: dataset.len(),
        });
    }
    Ok(())
}

/// Technical events for every row `t >= n2`.
pub fn detect_technical(dataset: &MarketDataset, config: &IndicatorConfig) -> Result<Vec<TechnicalEvents>> {
    config.validate()?;
    check_history(dataset, config.n2 + 1)?;
    let prices = dataset.prices();
    let short = sliding_average(&prices, config.n1 + 1)?;
    let long = sliding_average(&prices, config.n2 + 1)?;
    Ok((config.n2..prices.len())
        .map(|t| {
            let a = &prices[t];
            let a1 = &short[t - config.n1];
            let a2 = &long[t - config.n2];
            TechnicalEvents {
                f1: a >= a1,
                f2: a >= a2,
                f3: a1 >= a2,
            }
        })
        .collect())
}

/// Short and long sliding averages of volume for every row `t >= n2`.
/// Diagnostics only; no event is derived from them.
pub fn volume_averages(dataset: &MarketDataset, config: &IndicatorConfig) -> Result<Vec<(Exact, Exact)>> {
    config.validate()?;
    check_history(dataset, config.n2 + 1)?;
    let volumes = dataset.volumes();
    let short = sliding_average(&volumes, config.n1 + 1)?;
    let long = sliding_average(&volumes, config.n2 + 1)?;
    Ok((config.n2..volumes.len())
        .map(|t| (short[t - config.n1], long[t - config.n2]))
        .collect())
}

/// Per row: whether any flag of the econ, pol and soc spheres is raised.
pub fn aggregate_fundamental(dataset: &MarketDataset) -> Vec<[bool; 3]> {
    let columns = dataset.flag_columns();
    dataset
        .rows()
        .iter()
        .map(|row| {
            let mut out = [false; 3];
            for (col, &flag) in columns.iter().zip(&row.flags) {
                let slot = match col.sphere {
                    Sphere::Econ => 0,
                    Sphere::Pol => 1,
                    Sphere::Soc => 2,
                };
                out[slot] |= flag;
            }
            out
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CircumstanceRecord {
    /// Index of the source row in the dataset.
    pub row: usize,
    pub timestamp: Timestamp,
    pub set: EventSet,
}

/// Occurred circumstance sets `F_t` for every post-warm-up row.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CircumstanceSeries {
    family: EventFamily,
    records: Vec<CircumstanceRecord>,
}

impl CircumstanceSeries {
    /// Assembles a series from explicit records; rows must be strictly increasing.
    pub fn new(family: EventFamily, records: Vec<CircumstanceRecord>) -> Result<Self> {
        for (i, rec) in records.iter().enumerate() {
            family.ensure_same(rec.set.family())?;
            if i > 0 && rec.row <= records[i - 1].row {
                return Err(Error::Invalid(format!(
                    "circumstance records must have increasing rows ({} after {})",
                    rec.row,
                    records[i - 1].row
                )));
            }
        }
        Ok(Self { family, records })
    }

    pub fn family(&self) -> &EventFamily {
        &self.family
    }

    pub fn records(&self) -> &[CircumstanceRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn masks(&self) -> Vec<u32> {
        self.records.iter().map(|r| r.set.bits()).collect()
    }

    pub fn sets(&self) -> Vec<EventSet> {
        self.records.iter().map(|r| r.set.clone()).collect()
    }
}

pub fn build_circumstance_series(dataset: &MarketDataset, config: &IndicatorConfig) -> Result<CircumstanceSeries> {
    config.validate()?;
    check_history(dataset, config.n2 + 2)?;
    let technical = detect_technical(dataset, config)?;
    let fundamental = aggregate_fundamental(dataset);
    let family = circumstance_family();
    let records = technical
        .iter()
        .enumerate()
        .map(|(k, tech)| {
            let row = k + config.n2;
            let fund = fundamental[row];
            let bits = [tech.f1, tech.f2, tech.f3, fund[0], fund[1], fund[2]]
                .iter()
                .enumerate()
                .fold(0u32, |acc, (i, &on)| acc | (on as u32) << i);
            CircumstanceRecord {
                row,
                timestamp: dataset.rows()[row].timestamp.clone(),
                set: family.set(bits).expect("six bits fit the sextet"),
            }
        })
        .collect();
    Ok(CircumstanceSeries { family, records })
}
