//! Read-only HTTP API over one immutable model.

use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::State;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};

use evento_core::decision::Method;
use evento_core::market::IndicatorConfig;
use evento_core::{EventSet, Recommendation64};

use crate::backtest::{BacktestReport, Labeled};
use crate::error::ServiceError;
use crate::model::{EventFamilies, FitMetadata, FitSettings, GibbsSummary, Model};

/// `{"error": code, "message": text}` with a status.
#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    code: String,
    message: String,
}

impl ApiError {
    fn bad_request(code: &str, message: impl Into<String>) -> Self {
        Self {
            status: StatusCode::BAD_REQUEST,
            code: code.into(),
            message: message.into(),
        }
    }
}

impl From<ServiceError> for ApiError {
    fn from(e: ServiceError) -> Self {
        let status = match e {
            ServiceError::NotFound(_) => StatusCode::NOT_FOUND,
            _ => StatusCode::BAD_REQUEST,
        };
        Self {
            status,
            code: e.code().into(),
            message: e.to_string(),
        }
    }
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    error: &'a str,
    message: &'a str,
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = ErrorBody {
            error: &self.code,
            message: &self.message,
        };
        (self.status, Json(body)).into_response()
    }
}

/// Circumstances as a label list or a raw mask.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum CircumstanceQuery {
    Labels(Vec<String>),
    Mask(u64),
}

impl CircumstanceQuery {
    pub fn resolve(&self, model: &Model) -> Result<EventSet, ServiceError> {
        let family = model.circumstance_family();
        Ok(match self {
            CircumstanceQuery::Labels(labels) => family.set_from_labels(labels)?,
            CircumstanceQuery::Mask(mask) => {
                let mask = u32::try_from(*mask).map_err(|_| evento_core::Error::MaskOutOfRange {
                    mask: u32::MAX,
                    size: family.size(),
                })?;
                family.set(mask)?
            }
        })
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct DecideRequest {
    circumstances: CircumstanceQuery,
    method: String,
    seed: Option<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct WhatifRequest {
    circumstances: CircumstanceQuery,
    /// Accepted for symmetry with `/api/decide`; all methods are returned.
    #[allow(dead_code)]
    method: Option<String>,
    seed: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecisionProbability {
    pub decisions: Vec<String>,
    pub mask: u32,
    pub probability: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampledDecision {
    pub mask: u32,
    pub labels: Vec<String>,
    pub seed: u64,
}

/// Wire form of a recommendation, shared by the CLI and the API.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecommendationView {
    pub circumstances: Labeled,
    pub method: Method,
    pub distribution: Vec<DecisionProbability>,
    pub mode_decision: Labeled,
    pub sampled_decision: Option<SampledDecision>,
    pub unmodeled_circumstance: bool,
}

impl RecommendationView {
    pub fn new(model: &Model, rec: &Recommendation64) -> Self {
        let decisions = model.decision_family();
        Self {
            circumstances: Labeled::new(rec.circumstances.family(), rec.circumstances.bits()),
            method: rec.method,
            distribution: model
                .decision_terraces()
                .into_iter()
                .map(|d| DecisionProbability {
                    decisions: Labeled::new(decisions, d).labels,
                    mask: d,
                    probability: rec.distribution[d as usize],
                })
                .collect(),
            mode_decision: Labeled::new(decisions, rec.mode_decision),
            sampled_decision: rec.sampled_decision.map(|(mask, seed)| SampledDecision {
                mask,
                labels: Labeled::new(decisions, mask).labels,
                seed,
            }),
            unmodeled_circumstance: rec.unmodeled_circumstance,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WhatifView {
    pub circumstances: Labeled,
    pub recommendations: Vec<RecommendationView>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StructuralCounts {
    pub circumstance_terraces: usize,
    pub decision_terraces: usize,
    pub joint_terraces: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelSummary {
    pub schema_version: u32,
    pub event_families: EventFamilies,
    pub structural_counts: StructuralCounts,
    pub indicator_config: IndicatorConfig,
    pub fit_config: FitSettings,
    pub gibbs_params: GibbsSummary,
    pub policy: Vec<u32>,
    pub fit_metadata: FitMetadata,
}

impl ModelSummary {
    pub fn new(model: &Model) -> Self {
        let a = model.artifact();
        Self {
            schema_version: a.schema_version,
            event_families: a.event_families.clone(),
            structural_counts: StructuralCounts {
                circumstance_terraces: model.circumstance_terraces(),
                decision_terraces: model.decision_terraces().len(),
                joint_terraces: model.circumstance_terraces() * model.decision_terraces().len(),
            },
            indicator_config: a.indicator_config,
            fit_config: a.fit_config.clone(),
            gibbs_params: a.gibbs_params.clone(),
            policy: a.policy.clone(),
            fit_metadata: a.fit_metadata.clone(),
        }
    }
}

pub fn parse_method(name: &str) -> Result<Method, ApiError> {
    name.parse()
        .map_err(|_| ApiError::bad_request("unknown_method", format!("unknown method `{name}` (expected m1, m2 or m3)")))
}

struct AppState {
    model: Model,
    report: Option<BacktestReport>,
}

fn parse_body<T: for<'de> Deserialize<'de>>(body: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| ApiError::bad_request("invalid_request", e.to_string()))
}

async fn model_summary(State(state): State<Arc<AppState>>) -> Json<ModelSummary> {
    Json(ModelSummary::new(&state.model))
}

async fn decide(State(state): State<Arc<AppState>>, body: Bytes) -> Result<Json<RecommendationView>, ApiError> {
    let req: DecideRequest = parse_body(&body)?;
    let method = parse_method(&req.method)?;
    let f = req.circumstances.resolve(&state.model)?;
    let rec = state.model.decide(&f, method, req.seed)?;
    Ok(Json(RecommendationView::new(&state.model, &rec)))
}

async fn whatif(State(state): State<Arc<AppState>>, body: Bytes) -> Result<Json<WhatifView>, ApiError> {
    let req: WhatifRequest = parse_body(&body)?;
    if let Some(name) = &req.method {
        parse_method(name)?;
    }
    let f = req.circumstances.resolve(&state.model)?;
    let recommendations = Method::ALL
        .iter()
        .map(|&m| {
            let rec = state.model.decide(&f, m, req.seed)?;
            Ok(RecommendationView::new(&state.model, &rec))
        })
        .collect::<Result<Vec<_>, ServiceError>>()?;
    Ok(Json(WhatifView {
        circumstances: Labeled::new(f.family(), f.bits()),
        recommendations,
    }))
}

async fn backtest_report(State(state): State<Arc<AppState>>) -> Result<Json<BacktestReport>, ApiError> {
    state
        .report
        .clone()
        .map(Json)
        .ok_or_else(|| ServiceError::NotFound("the service was started without a backtest report".into()).into())
}

pub fn router(model: Model, report: Option<BacktestReport>) -> Router {
    Router::new()
        .route("/api/model", get(model_summary))
        .route("/api/decide", post(decide))
        .route("/api/whatif", post(whatif))
        .route("/api/backtest/report", get(backtest_report))
        .with_state(Arc::new(AppState { model, report }))
}

pub async fn serve(model: Model, report: Option<BacktestReport>, bind: &str) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(bind).await?;
    axum::serve(listener, router(model, report)).await
}
