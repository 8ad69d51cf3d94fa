//! Walk-forward backtest: fit once on a training prefix, act out-of-sample.

use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use evento_core::decision::Method;
use evento_core::market::{build_circumstance_series, CircumstanceRecord, MarketDataset};
use evento_core::valuation::{BUY, SELL};
use evento_core::{EventFamily, Exact, Recommendation64};

use crate::error::ServiceResult;
use crate::model::{fit_dataset, sha256_hex, FitConfig, Model};

/// A mask with its labels, for readable reports.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Labeled {
    pub mask: u32,
    pub labels: Vec<String>,
}

impl Labeled {
    pub fn new(family: &EventFamily, mask: u32) -> Self {
        Self {
            mask,
            labels: family.labels_of(mask).into_iter().map(String::from).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentRecord {
    pub row: usize,
    pub timestamp: String,
    pub circumstances: Labeled,
    pub method: Method,
    /// Probability per decision mask, ascending.
    pub distribution: Vec<f64>,
    pub mode_decision: u32,
    pub seed: u64,
    pub action: Labeled,
    pub unmodeled_circumstance: bool,
    /// Units held from `t` to `t + 1`: +1 long, -1 short, 0 flat.
    pub position: i8,
    /// `position * (a_{t+1} - a_t)`; 0 at the last row.
    pub pnl: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TerracePnl {
    pub circumstances: Labeled,
    pub moments: usize,
    pub pnl: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ActionCount {
    pub action: Labeled,
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BacktestReport {
    pub method: Method,
    pub seed: u64,
    pub train_rows: usize,
    pub dataset_sha256: String,
    pub records: Vec<MomentRecord>,
    pub total_pnl: f64,
    /// Only circumstance masks that occurred out-of-sample, ascending.
    pub per_terrace: Vec<TerracePnl>,
    pub action_counts: Vec<ActionCount>,
    /// Share of non-flat moments with a following price whose pnl was positive.
    pub hit_rate: Option<f64>,
}

/// `{d_minus}` buys one unit, `{d_plus}` sells one; nothing or both nets flat.
pub fn position(decision: u32) -> i8 {
    match decision {
        BUY => 1,
        SELL => -1,
        _ => 0,
    }
}

/// Per-moment seed so a draw never depends on how many moments came before.
pub fn moment_seed(seed: u64, row: usize) -> u64 {
    // splitmix64 finalizer
    let mut z = seed ^ (row as u64).wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn to_f64(x: &Exact) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Runs `decide` at every record and accrues pnl against the next price.
///
/// The action is the sampled decision when the recommendation carries one,
/// else its mode.
pub fn simulate(
    dataset: &MarketDataset,
    records: &[CircumstanceRecord],
    decisions: &EventFamily,
    method: Method,
    seed: u64,
    train_rows: usize,
    mut decide: impl FnMut(&CircumstanceRecord) -> ServiceResult<Recommendation64>,
) -> ServiceResult<BacktestReport> {
    let rows = dataset.rows();
    let mut moments = Vec::with_capacity(records.len());
    let mut total = Exact::zero();
    let mut terrace: Vec<(usize, Exact)> = vec![(0, Exact::zero()); records.first().map_or(0, |r| r.set.family().subset_count())];
    let mut actions = vec![0usize; decisions.subset_count()];
    let (mut active, mut hits) = (0usize, 0usize);
    for rec in records {
        let rec_out = decide(rec)?;
        let action = rec_out.sampled_decision.map_or(rec_out.mode_decision, |(d, _)| d);
        let pos = position(action);
        let pnl = match rows.get(rec.row + 1) {
            Some(next) => {
                let pnl = Exact::from_integer(pos as i128) * (next.price - rows[rec.row].price);
                if pos != 0 {
                    active += 1;
                    hits += (pnl > Exact::zero()) as usize;
                }
                pnl
            }
            None => Exact::zero(),
        };
        total += pnl;
        let slot = &mut terrace[rec.set.bits() as usize];
        slot.0 += 1;
        slot.1 += pnl;
        actions[action as usize] += 1;
        moments.push(MomentRecord {
            row: rec.row,
            timestamp: rec.timestamp.to_string(),
            circumstances: Labeled::new(rec.set.family(), rec.set.bits()),
            method,
            distribution: rec_out.distribution,
            mode_decision: rec_out.mode_decision,
            seed: rec_out.sampled_decision.map_or(0, |(_, s)| s),
            action: Labeled::new(decisions, action),
            unmodeled_circumstance: rec_out.unmodeled_circumstance,
            position: pos,
            pnl: to_f64(&pnl),
        });
    }
    let circumstance_family = records.first().map(|r| r.set.family().clone());
    let per_terrace = match &circumstance_family {
        Some(fam) => terrace
            .iter()
            .enumerate()
            .filter(|(_, (n, _))| *n > 0)
            .map(|(f, (n, pnl))| TerracePnl {
                circumstances: Labeled::new(fam, f as u32),
                moments: *n,
                pnl: to_f64(pnl),
            })
            .collect(),
        None => Vec::new(),
    };
    Ok(BacktestReport {
        method,
        seed,
        train_rows,
        dataset_sha256: String::new(),
        records: moments,
        total_pnl: to_f64(&total),
        per_terrace,
        action_counts: actions
            .iter()
            .enumerate()
            .map(|(d, &count)| ActionCount {
                action: Labeled::new(decisions, d as u32),
                count,
            })
            .collect(),
        hit_rate: (active > 0).then(|| hits as f64 / active as f64),
    })
}

/// Fits on the training prefix and walks every later post-warm-up moment.
pub fn run_backtest(bytes: &[u8], config: &FitConfig, method: Method, seed: u64) -> ServiceResult<BacktestReport> {
    let dataset = MarketDataset::from_csv_bytes(bytes)?;
    run_backtest_dataset(&dataset, sha256_hex(bytes), config, method, seed)
}

pub fn run_backtest_dataset(
    dataset: &MarketDataset,
    digest: String,
    config: &FitConfig,
    method: Method,
    seed: u64,
) -> ServiceResult<BacktestReport> {
    let model = Model::from_artifact(fit_dataset(dataset, digest.clone(), config)?)?;
    let train_rows = model.artifact().fit_config.train_rows;
    let cs = build_circumstance_series(dataset, &config.indicators)?;
    let out_of_sample: Vec<CircumstanceRecord> =
        cs.records().iter().filter(|r| r.row >= train_rows).cloned().collect();
    let mut report = simulate(
        dataset,
        &out_of_sample,
        model.decision_family(),
        method,
        seed,
        train_rows,
        |rec| model.decide(&rec.set, method, Some(moment_seed(seed, rec.row))),
    )?;
    report.dataset_sha256 = digest;
    Ok(report)
}

pub fn report_to_json(report: &BacktestReport) -> String {
    let mut text = serde_json::to_string_pretty(report).expect("report serializes");
    text.push('\n');
    text
}
