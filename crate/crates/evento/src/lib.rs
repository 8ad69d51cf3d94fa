//! Model fitting, walk-forward backtesting and the HTTP what-if service on
//! top of `evento-core`.

pub mod api;
pub mod backtest;
pub mod error;
pub mod model;

pub use backtest::{run_backtest, BacktestReport};
pub use error::{ServiceError, ServiceResult};
pub use model::{fit, FitConfig, Model, ModelArtifact};
