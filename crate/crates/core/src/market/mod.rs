//! Market history ingestion and the six circumstance events.

pub mod dataset;
pub mod indicators;

pub use dataset::{parse_decimal, FlagColumn, MarketDataset, MarketRow, Sphere, Timestamp};
pub use indicators::{
    aggregate_fundamental, build_circumstance_series, circumstance_family, detect_technical,
    sliding_average, volume_averages, CircumstanceRecord, CircumstanceSeries, IndicatorConfig,
    TechnicalEvents, CIRCUMSTANCE_LABELS,
};
