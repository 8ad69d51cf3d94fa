use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use evento::api::{self, CircumstanceQuery, RecommendationView};
use evento::backtest::{report_to_json, run_backtest, BacktestReport};
use evento::model::{fit, sha256_hex, to_json, FitConfig, Model, DEFAULT_TRAIN_FRAC};
use evento_core::decision::{Method, DEFAULT_TOLERANCE};
use evento_core::market::{IndicatorConfig, MarketDataset, Sphere};

#[derive(Parser)]
#[command(name = "evento", version, about = "Eventological decisions on market circumstances")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a market CSV and summarize it.
    Ingest {
        csv: PathBuf,
        /// Only validate; print a one-line verdict.
        #[arg(long)]
        check: bool,
    },
    /// Fit a model on the training prefix of a market CSV.
    Fit {
        csv: PathBuf,
        #[command(flatten)]
        fit: FitArgs,
        /// Output path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recommend decisions for one circumstance set.
    Decide {
        model: PathBuf,
        /// Comma-separated labels (`f1,f4`), a mask (`9`), or empty for none.
        #[arg(long, default_value = "")]
        circumstances: String,
        #[arg(long, default_value = "m1")]
        method: Method,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Fit on the training prefix and trade the remainder.
    Backtest {
        csv: PathBuf,
        #[command(flatten)]
        fit: FitArgs,
        #[arg(long, default_value = "m1")]
        method: Method,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output path; stdout when omitted.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Serve the HTTP API for a fitted model.
    Serve {
        model: PathBuf,
        #[arg(long, default_value = "127.0.0.1:8080")]
        bind: String,
        /// Backtest report exposed at /api/backtest/report.
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

#[derive(Args)]
struct FitArgs {
    #[arg(long, default_value_t = 5)]
    n1: usize,
    #[arg(long, default_value_t = 20)]
    n2: usize,
    /// Mean value the Gibbs method must attain, or `auto` for E_{p*}[V].
    #[arg(long, default_value = "auto")]
    target_mean: String,
    #[arg(long, default_value_t = DEFAULT_TRAIN_FRAC)]
    train_frac: f64,
    /// Training prefix length; overrides --train-frac.
    #[arg(long)]
    train_rows: Option<usize>,
    /// Signed Gibbs rate α (p ∝ exp(α V) p*); excludes --target-mean.
    #[arg(long, allow_hyphen_values = true)]
    rate: Option<f64>,
    /// Add-λ smoothing of the own distribution p*.
    #[arg(long, default_value_t = 0.0)]
    smoothing: f64,
    /// Forbid selling and buying at the same moment.
    #[arg(long)]
    disjoint_decisions: bool,
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    tolerance: f64,
}

impl FitArgs {
    fn config(&self) -> Result<FitConfig> {
        let target_mean = match self.target_mean.as_str() {
            "auto" => None,
            v => Some(v.parse::<f64>().with_context(|| format!("--target-mean: `{v}` is neither `auto` nor a number"))?),
        };
        if target_mean.is_some() && self.rate.is_some() {
            bail!("--rate and --target-mean are mutually exclusive");
        }
        Ok(FitConfig {
            indicators: IndicatorConfig::new(self.n1, self.n2)?,
            target_mean,
            train_frac: self.train_frac,
            train_rows: self.train_rows,
            rate_override: self.rate,
            smoothing: self.smoothing,
            disjoint_decisions: self.disjoint_decisions,
            tolerance: self.tolerance,
        })
    }
}

#[derive(Serialize)]
struct FlagSummary {
    name: String,
    sphere: Sphere,
}

#[derive(Serialize)]
struct IngestSummary {
    rows: usize,
    start: String,
    end: String,
    flag_columns: Vec<FlagSummary>,
    has_decisions: bool,
    sha256: String,
}

fn read(path: &PathBuf) -> Result<Vec<u8>> {
    std::fs::read(path).with_context(|| format!("reading {}", path.display()))
}

fn emit(text: &str, out: Option<&PathBuf>) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn parse_circumstances(text: &str) -> CircumstanceQuery {
    let text = text.trim();
    if !text.is_empty() && text.bytes().all(|b| b.is_ascii_digit()) {
        if let Ok(mask) = text.parse() {
            return CircumstanceQuery::Mask(mask);
        }
    }
    CircumstanceQuery::Labels(
        text.split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(String::from)
            .collect(),
    )
}

fn pretty<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("value serializes");
    text.push('\n');
    text
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Ingest { csv, check } => {
            let bytes = read(&csv)?;
            let ds = MarketDataset::from_csv_bytes(&bytes).with_context(|| format!("validating {}", csv.display()))?;
            let rows = ds.rows();
            if check {
                println!("ok: {} rows, {} flag columns", rows.len(), ds.flag_columns().len());
                return Ok(());
            }
            let summary = IngestSummary {
                rows: rows.len(),
                start: rows[0].timestamp.to_string(),
                end: rows[rows.len() - 1].timestamp.to_string(),
                flag_columns: ds
                    .flag_columns()
                    .iter()
                    .map(|c| FlagSummary {
                        name: c.name.clone(),
                        sphere: c.sphere,
                    })
                    .collect(),
                has_decisions: ds.has_decisions(),
                sha256: sha256_hex(&bytes),
            };
            print!("{}", pretty(&summary));
        }
        Command::Fit { csv, fit: args, out } => {
            let artifact = fit(&read(&csv)?, &args.config()?)?;
            emit(&to_json(&artifact), out.as_ref())?;
        }
        Command::Decide {
            model,
            circumstances,
            method,
            seed,
        } => {
            let model = Model::from_json(&read(&model)?)?;
            let f = parse_circumstances(&circumstances).resolve(&model)?;
            let rec = model.decide(&f, method, seed)?;
            print!("{}", pretty(&RecommendationView::new(&model, &rec)));
        }
        Command::Backtest {
            csv,
            fit: args,
            method,
            seed,
            report,
        } => {
            let result = run_backtest(&read(&csv)?, &args.config()?, method, seed)?;
            emit(&report_to_json(&result), report.as_ref())?;
        }
        Command::Serve { model, bind, report } => {
            let model = Model::from_json(&read(&model)?)?;
            let report: Option<BacktestReport> = match report {
                Some(path) => Some(serde_json::from_slice(&read(&path)?).context("parsing backtest report")?),
                None => None,
            };
            let runtime = tokio::runtime::Runtime::new()?;
            eprintln!("listening on {bind}");
            runtime.block_on(api::serve(model, report, &bind))?;
        }
    }
    Ok(())
}
