//! Fitted model artifact: everything the decision methods need, persisted as JSON.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use evento_core::decision::{
    expected_value, gibbs_distribution, gibbs_normalizer, method1_policy, method2_conditional,
    method3_conditional, recommend, solve_rate, Branch, Method, DEFAULT_TOLERANCE,
};
use evento_core::edist::{
    estimate_edist, estimate_joint, ConditionalEDistribution, EDistribution, JointEDistribution,
};
use evento_core::market::{build_circumstance_series, circumstance_family, IndicatorConfig, MarketDataset};
use evento_core::valuation::{
    decision_family, estimate_value_matrix, lift_to_sets, value_function_from_matrix, SetValueMatrix,
    ValueFunction, ValueMatrix, BUY, SELL,
};
use evento_core::{EventFamily, EventSet, JointLayout, PolicyMap, Recommendation64};

use crate::error::{ServiceError, ServiceResult};

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_TRAIN_FRAC: f64 = 0.7;

/// Both decisions at once; forbidden under `disjoint_decisions`.
const BOTH: u32 = SELL | BUY;

#[derive(Clone, Debug, PartialEq)]
pub struct FitConfig {
    pub indicators: IndicatorConfig,
    /// Target mean value for the Gibbs method; `None` keeps `E_{p*}[V]` (rate 0).
    pub target_mean: Option<f64>,
    pub train_frac: f64,
    /// Explicit training prefix length; overrides `train_frac`.
    pub train_rows: Option<usize>,
    /// Signed rate `α` with `p ∝ exp(α V) p*`; bypasses the target solver.
    pub rate_override: Option<f64>,
    /// Add-λ smoothing of `p*` over observed circumstance columns.
    pub smoothing: f64,
    pub disjoint_decisions: bool,
    pub tolerance: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            indicators: IndicatorConfig { n1: 5, n2: 20 },
            target_mean: None,
            train_frac: DEFAULT_TRAIN_FRAC,
            train_rows: None,
            rate_override: None,
            smoothing: 0.0,
            disjoint_decisions: false,
            tolerance: DEFAULT_TOLERANCE,
        }
    }
}

impl FitConfig {
    pub fn with_indicators(n1: usize, n2: usize) -> Self {
        Self {
            indicators: IndicatorConfig { n1, n2 },
            ..Self::default()
        }
    }

    /// Length of the training prefix for a dataset of `len` rows.
    pub fn resolve_train_rows(&self, len: usize) -> ServiceResult<usize> {
        self.indicators.validate()?;
        let rows = match self.train_rows {
            Some(rows) => rows,
            None => {
                if !(self.train_frac > 0.0 && self.train_frac <= 1.0) {
                    return Err(ServiceError::InvalidRequest(format!(
                        "train fraction must lie in (0, 1], got {}",
                        self.train_frac
                    )));
                }
                (self.train_frac * len as f64).floor() as usize
            }
        };
        if rows > len {
            return Err(ServiceError::InvalidRequest(format!(
                "training prefix of {rows} rows exceeds the dataset ({len} rows)"
            )));
        }
        // warm-up plus at least one increment
        let needed = self.indicators.warmup() + 2;
        if rows < needed {
            return Err(evento_core::Error::InsufficientHistory { needed, available: rows }.into());
        }
        Ok(rows)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EventFamilies {
    pub circumstances: Vec<String>,
    pub decisions: Vec<String>,
    pub disjoint_decisions: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitSettings {
    pub target_mean: Option<f64>,
    pub train_rows: usize,
    pub rate_override: Option<f64>,
    pub smoothing: f64,
    /// `"recorded"` when the CSV carried decision columns, else `"method1"`.
    pub decision_source: String,
}

/// Per-circumstance values of the two decisions plus the lifted set values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValueMatrices {
    /// `[val(d_plus, F), val(d_minus, F)]` per F-mask.
    pub values: Vec<[f64; 2]>,
    /// `val(D, F)` per F-mask, D ascending.
    pub set_values: Vec<Vec<f64>>,
    pub counts: Vec<u64>,
    pub unobserved: Vec<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GibbsSummary {
    pub branch: Branch,
    pub rate: f64,
    /// `α` with `p ∝ exp(α V) p*`.
    pub signed_rate: f64,
    pub target_mean_value: f64,
    pub achieved_mean_value: f64,
    /// `null` when `Z` overflows.
    pub normalizer: Option<f64>,
    pub tolerance: f64,
    pub iterations: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeRange {
    pub start: String,
    pub end: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitMetadata {
    pub rows_total: usize,
    pub rows_train: usize,
    pub records_train: usize,
    pub warmup_rows: usize,
    pub time_range: TimeRange,
    pub train_time_range: TimeRange,
    pub dataset_sha256: String,
}

/// Serialized model. Probability arrays are ascending by mask; joint masks put
/// decisions in the low bits (`x = D | F << |D|`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelArtifact {
    pub schema_version: u32,
    pub event_families: EventFamilies,
    pub indicator_config: IndicatorConfig,
    pub fit_config: FitSettings,
    /// `p(F)` over the circumstance family.
    pub p: Vec<f64>,
    /// Own distribution `p*(D + F)` over the joint family.
    pub p_star: Vec<f64>,
    /// `π(D, F)`, one row per decision mask.
    pub joint: Vec<Vec<f64>>,
    pub value_matrices: ValueMatrices,
    /// Method 1 policy `F -> D_F` as decision masks.
    pub policy: Vec<u32>,
    pub gibbs_params: GibbsSummary,
    /// The fitted Gibbs distribution over the joint family.
    pub gibbs_joint: Vec<f64>,
    pub fit_metadata: FitMetadata,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// `p*` from counts with `λ` added to every admissible cell of an observed column.
fn smoothed_own_distribution(
    layout: &JointLayout,
    decisions: &[EventSet],
    circumstances: &[EventSet],
    lambda: f64,
    disjoint: bool,
) -> ServiceResult<EDistribution<f64>> {
    let joint = estimate_joint::<f64>(decisions, circumstances)?;
    let p_star = joint.to_joint_edist(layout)?;
    if lambda == 0.0 {
        return Ok(p_star);
    }
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(ServiceError::InvalidRequest(format!("smoothing must be finite and >= 0, got {lambda}")));
    }
    let n_d = layout.decisions().subset_count() as u32;
    let mut weights = vec![0.0; layout.joint().subset_count()];
    let mut observed = vec![false; layout.circumstances().subset_count()];
    for (d, f) in decisions.iter().zip(circumstances) {
        weights[layout.combine(d.bits(), f.bits()) as usize] += 1.0;
        observed[f.bits() as usize] = true;
    }
    for (f, _) in observed.iter().enumerate().filter(|(_, seen)| **seen) {
        for d in (0..n_d).filter(|&d| !(disjoint && d == BOTH)) {
            weights[layout.combine(d, f as u32) as usize] += lambda;
        }
    }
    let total: f64 = weights.iter().sum();
    Ok(EDistribution::new(
        layout.joint().clone(),
        weights.into_iter().map(|w| w / total).collect(),
    )?)
}

/// Fits a model on the training prefix of the CSV `bytes`.
pub fn fit(bytes: &[u8], config: &FitConfig) -> ServiceResult<ModelArtifact> {
    let dataset = MarketDataset::from_csv_bytes(bytes)?;
    fit_dataset(&dataset, sha256_hex(bytes), config)
}

pub fn fit_dataset(dataset: &MarketDataset, digest: String, config: &FitConfig) -> ServiceResult<ModelArtifact> {
    let train_rows = config.resolve_train_rows(dataset.len())?;
    let train = dataset.prefix(train_rows);
    let cs = build_circumstance_series(&train, &config.indicators)?;
    let vm: ValueMatrix<f64> = estimate_value_matrix(&train, &cs)?;
    let svm = lift_to_sets(&vm);
    let (policy, _) = method1_policy(&vm)?;

    let decisions = decision_family();
    let recorded = train.has_decisions();
    let decision_series = cs
        .records()
        .iter()
        .map(|rec| {
            let mask = match train.rows()[rec.row].decision {
                Some(mask) if recorded => mask,
                _ => policy.decision_for(rec.set.bits()),
            };
            if config.disjoint_decisions && mask == BOTH {
                return Err(ServiceError::InvalidRequest(format!(
                    "row {} records both decisions but disjoint_decisions is set",
                    rec.row
                )));
            }
            Ok(decisions.set(mask)?)
        })
        .collect::<ServiceResult<Vec<_>>>()?;

    let circumstances = cs.sets();
    let p: EDistribution<f64> = estimate_edist(&circumstances)?;
    let joint: JointEDistribution<f64> = estimate_joint(&decision_series, &circumstances)?;
    let (layout, v) = value_function_from_matrix(&svm)?;
    let p_star = smoothed_own_distribution(
        &layout,
        &decision_series,
        &circumstances,
        config.smoothing,
        config.disjoint_decisions,
    )?;
    let gibbs_params = solve_gibbs(&p_star, &v, config)?;
    let gibbs_joint = gibbs_distribution(&p_star, &v, gibbs_params.rate, gibbs_params.branch)?;

    let n_d = decisions.subset_count();
    let rows = dataset.rows();
    let train_rows_slice = train.rows();
    Ok(ModelArtifact {
        schema_version: SCHEMA_VERSION,
        event_families: EventFamilies {
            circumstances: cs.family().labels().to_vec(),
            decisions: decisions.labels().to_vec(),
            disjoint_decisions: config.disjoint_decisions,
        },
        indicator_config: config.indicators,
        fit_config: FitSettings {
            target_mean: config.target_mean,
            train_rows,
            rate_override: config.rate_override,
            smoothing: config.smoothing,
            decision_source: if recorded { "recorded" } else { "method1" }.into(),
        },
        p: p.into_probs(),
        p_star: p_star.into_probs(),
        joint: (0..n_d as u32)
            .map(|d| (0..cs.family().subset_count() as u32).map(|f| joint.prob(d, f)).collect())
            .collect(),
        value_matrices: ValueMatrices {
            values: (0..cs.family().subset_count() as u32)
                .map(|f| [vm.value(0, f), vm.value(1, f)])
                .collect(),
            set_values: (0..cs.family().subset_count() as u32).map(|f| svm.row(f).to_vec()).collect(),
            counts: vm.counts().to_vec(),
            unobserved: (0..cs.family().subset_count() as u32).map(|f| vm.unobserved(f)).collect(),
        },
        policy: policy.as_slice().to_vec(),
        gibbs_params,
        gibbs_joint: gibbs_joint.into_probs(),
        fit_metadata: FitMetadata {
            rows_total: rows.len(),
            rows_train: train_rows,
            records_train: cs.len(),
            warmup_rows: config.indicators.warmup(),
            time_range: TimeRange {
                start: rows[0].timestamp.to_string(),
                end: rows[rows.len() - 1].timestamp.to_string(),
            },
            train_time_range: TimeRange {
                start: train_rows_slice[0].timestamp.to_string(),
                end: train_rows_slice[train_rows - 1].timestamp.to_string(),
            },
            dataset_sha256: digest,
        },
    })
}

fn solve_gibbs(p_star: &EDistribution<f64>, v: &ValueFunction<f64>, config: &FitConfig) -> ServiceResult<GibbsSummary> {
    let (branch, rate, target, iterations) = match (config.rate_override, config.target_mean) {
        (Some(_), Some(_)) => {
            return Err(ServiceError::InvalidRequest(
                "a rate override and a target mean value are mutually exclusive".into(),
            ))
        }
        (Some(alpha), None) => {
            if !alpha.is_finite() {
                return Err(ServiceError::InvalidRequest(format!("rate override must be finite, got {alpha}")));
            }
            let branch = if alpha > 0.0 { Branch::Antigibbsean } else { Branch::Gibbsean };
            let p = gibbs_distribution(p_star, v, alpha.abs(), branch)?;
            (branch, alpha.abs(), expected_value(&p, v)?, 0)
        }
        (None, target) => {
            let target = match target {
                Some(t) => t,
                None => expected_value(p_star, v)?,
            };
            let params = solve_rate(p_star, v, target, config.tolerance)?;
            (params.branch, params.rate, target, params.iterations)
        }
    };
    let p = gibbs_distribution(p_star, v, rate, branch)?;
    let normalizer = gibbs_normalizer(p_star, v, rate, branch)?;
    let signed = if branch == Branch::Antigibbsean { rate } else { -rate };
    Ok(GibbsSummary {
        branch,
        rate,
        signed_rate: if signed == 0.0 { 0.0 } else { signed },
        target_mean_value: target,
        achieved_mean_value: expected_value(&p, v)?,
        normalizer: normalizer.is_finite().then_some(normalizer),
        tolerance: config.tolerance,
        iterations,
    })
}

/// A validated artifact with the three methods' conditionals ready to query.
#[derive(Clone, Debug)]
pub struct Model {
    artifact: ModelArtifact,
    circumstances: EventFamily,
    decisions: EventFamily,
    m1: ConditionalEDistribution<f64>,
    m2: ConditionalEDistribution<f64>,
    m3: ConditionalEDistribution<f64>,
}

fn schema(message: impl Into<String>) -> ServiceError {
    ServiceError::Schema(message.into())
}

fn expect_len<T>(name: &str, v: &[T], len: usize) -> ServiceResult<()> {
    if v.len() != len {
        return Err(schema(format!("{name} has {} entries, expected {len}", v.len())));
    }
    Ok(())
}

impl Model {
    pub fn from_artifact(artifact: ModelArtifact) -> ServiceResult<Self> {
        if artifact.schema_version != SCHEMA_VERSION {
            return Err(schema(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                artifact.schema_version
            )));
        }
        let circumstances = circumstance_family();
        let decisions = decision_family();
        if artifact.event_families.circumstances != circumstances.labels()
            || artifact.event_families.decisions != decisions.labels()
        {
            return Err(schema("event family labels do not match the circumstance sextet and decision doublet"));
        }
        artifact.indicator_config.validate()?;
        let layout = JointLayout::new(&decisions, &circumstances)?;
        let n_f = circumstances.subset_count();
        let n_d = decisions.subset_count();
        let n_x = layout.joint().subset_count();

        EDistribution::new(circumstances.clone(), artifact.p.clone())?;
        let p_star = EDistribution::new(layout.joint().clone(), artifact.p_star.clone())?;
        let gibbs = EDistribution::new(layout.joint().clone(), artifact.gibbs_joint.clone())?;
        expect_len("joint", &artifact.joint, n_d)?;
        for row in &artifact.joint {
            expect_len("joint row", row, n_f)?;
        }
        JointEDistribution::new(decisions.clone(), circumstances.clone(), artifact.joint.concat())?;

        let vmx = &artifact.value_matrices;
        expect_len("values", &vmx.values, n_f)?;
        expect_len("set_values", &vmx.set_values, n_f)?;
        expect_len("counts", &vmx.counts, n_f)?;
        expect_len("unobserved", &vmx.unobserved, n_f)?;
        for row in &vmx.set_values {
            expect_len("set_values row", row, n_d)?;
        }
        if vmx.values.iter().flatten().chain(vmx.set_values.iter().flatten()).any(|v| !v.is_finite()) {
            return Err(schema("value matrices must be finite"));
        }
        let vm = ValueMatrix::new(
            decisions.clone(),
            circumstances.clone(),
            vmx.values.concat(),
            vmx.counts.clone(),
        )?;
        let svm = SetValueMatrix::new(decisions.clone(), circumstances.clone(), vmx.set_values.concat())?;

        expect_len("policy", &artifact.policy, n_f)?;
        let policy = PolicyMap::new(circumstances.clone(), decisions.clone(), artifact.policy.clone())?;
        let (derived, m1) = method1_policy(&vm)?;
        if derived != policy {
            return Err(schema("policy disagrees with the signs of the value matrix"));
        }
        if artifact.event_families.disjoint_decisions {
            let both_used = policy.as_slice().contains(&BOTH)
                || (0..n_x as u32)
                    .filter(|&x| layout.split(x).0 == BOTH)
                    .any(|x| p_star.prob(x) > 0.0 || gibbs.prob(x) > 0.0);
            if both_used {
                return Err(schema("disjoint_decisions is set but mass sits on both decisions at once"));
            }
        }
        let m2 = method2_conditional(&svm)?;
        let m3 = method3_conditional(&layout, &gibbs)?;
        Ok(Self {
            artifact,
            circumstances,
            decisions,
            m1,
            m2,
            m3,
        })
    }

    pub fn from_json(bytes: &[u8]) -> ServiceResult<Self> {
        let artifact: ModelArtifact =
            serde_json::from_slice(bytes).map_err(|e| schema(format!("model JSON: {e}")))?;
        Self::from_artifact(artifact)
    }

    pub fn artifact(&self) -> &ModelArtifact {
        &self.artifact
    }

    pub fn circumstance_family(&self) -> &EventFamily {
        &self.circumstances
    }

    pub fn decision_family(&self) -> &EventFamily {
        &self.decisions
    }

    pub fn disjoint_decisions(&self) -> bool {
        self.artifact.event_families.disjoint_decisions
    }

    /// Decision masks the model may recommend, ascending.
    pub fn decision_terraces(&self) -> Vec<u32> {
        (0..self.decisions.subset_count() as u32)
            .filter(|&d| !(self.disjoint_decisions() && d == BOTH))
            .collect()
    }

    pub fn circumstance_terraces(&self) -> usize {
        self.circumstances.subset_count()
    }

    pub fn conditional(&self, method: Method) -> &ConditionalEDistribution<f64> {
        match method {
            Method::M1 => &self.m1,
            Method::M2 => &self.m2,
            Method::M3 => &self.m3,
        }
    }

    /// The method's row at `circumstances`. Circumstances never seen in training
    /// are flagged for every method; Method 3 has no row there and falls back
    /// to doing nothing, which is also what Methods 1 and 2 give on a zero row.
    pub fn decide(&self, circumstances: &EventSet, method: Method, seed: Option<u64>) -> ServiceResult<Recommendation64> {
        let mut rec = recommend(self.conditional(method), circumstances, method, seed)?;
        rec.unmodeled_circumstance |= self.artifact.p[circumstances.bits() as usize] == 0.0;
        Ok(rec)
    }
}

/// Pretty JSON with a trailing newline; byte-stable for equal artifacts.
pub fn to_json(artifact: &ModelArtifact) -> String {
    let mut text = serde_json::to_string_pretty(artifact).expect("artifact serializes");
    text.push('\n');
    text
}
