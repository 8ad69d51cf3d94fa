mod common;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

use common::{config, fixture, model};
use evento::api::{router, RecommendationView};
use evento::backtest::run_backtest;
use evento::model::FitConfig;
use evento_core::decision::Method;

async fn call(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let request = Request::builder().method(method).uri(uri);
    let request = match body {
        Some(v) => request
            .header("content-type", "application/json")
            .body(Body::from(v.to_string()))
            .unwrap(),
        None => request.body(Body::empty()).unwrap(),
    };
    let response = app.clone().oneshot(request).await.unwrap();
    let status = response.status();
    let bytes = response.into_body().collect().await.unwrap().to_bytes();
    (status, serde_json::from_slice(&bytes).unwrap_or(Value::Null))
}

fn app(cfg: &FitConfig) -> Router {
    router(model("market_16.csv", cfg), None)
}

#[tokio::test]
async fn model_summary_reports_structural_counts() {
    let (status, body) = call(&app(&config()), "GET", "/api/model", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["structural_counts"]["circumstance_terraces"], 64);
    assert_eq!(body["structural_counts"]["decision_terraces"], 4);
    assert_eq!(body["event_families"]["circumstances"], json!(["f1", "f2", "f3", "f4", "f5", "f6"]));
    assert_eq!(body["event_families"]["decisions"], json!(["d_plus", "d_minus"]));
    assert_eq!(body["fit_metadata"]["rows_total"], 16);

    let disjoint = app(&FitConfig { disjoint_decisions: true, ..config() });
    let (_, body) = call(&disjoint, "GET", "/api/model", None).await;
    assert_eq!(body["structural_counts"]["decision_terraces"], 3);
    assert_eq!(body["event_families"]["disjoint_decisions"], true);
}

#[tokio::test]
async fn decide_matches_the_library() {
    let m = model("market_16.csv", &config());
    let app = router(m.clone(), None);
    for (query, mask) in [(json!(["f1", "f4"]), 0b001001), (json!(9), 9), (json!(15), 15), (json!([]), 0)] {
        for method in Method::ALL {
            let (status, body) = call(
                &app,
                "POST",
                "/api/decide",
                Some(json!({"circumstances": query, "method": method.as_str(), "seed": 11})),
            )
            .await;
            assert_eq!(status, StatusCode::OK);
            let view: RecommendationView = serde_json::from_value(body).unwrap();
            let f = m.circumstance_family().set(mask).unwrap();
            assert_eq!(view, RecommendationView::new(&m, &m.decide(&f, method, Some(11)).unwrap()));
            let total: f64 = view.distribution.iter().map(|d| d.probability).sum();
            assert!((total - 1.0).abs() < 1e-12);
        }
    }
}

#[tokio::test]
async fn decide_payload_shape() {
    let (status, body) = call(
        &app(&config()),
        "POST",
        "/api/decide",
        Some(json!({"circumstances": ["f1", "f2", "f3", "f4"], "method": "m2"})),
    )
    .await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["circumstances"], json!({"mask": 15, "labels": ["f1", "f2", "f3", "f4"]}));
    assert_eq!(body["distribution"][1], json!({"decisions": ["d_plus"], "mask": 1, "probability": 1.0}));
    assert_eq!(body["mode_decision"]["labels"], json!(["d_plus"]));
    assert_eq!(body["sampled_decision"], Value::Null);
    assert_eq!(body["unmodeled_circumstance"], false);
}

#[tokio::test]
async fn whatif_returns_all_methods() {
    let (status, body) = call(
        &app(&FitConfig { smoothing: 1.0, ..config() }),
        "POST",
        "/api/whatif",
        Some(json!({"circumstances": 15, "seed": 4})),
    )
    .await;
    assert_eq!(status, StatusCode::OK);
    let recs = body["recommendations"].as_array().unwrap();
    let methods: Vec<_> = recs.iter().map(|r| r["method"].as_str().unwrap()).collect();
    assert_eq!(methods, ["m1", "m2", "m3"]);
    assert!(recs.iter().all(|r| r["sampled_decision"]["seed"] == 4));
    assert!((recs[2]["distribution"][1]["probability"].as_f64().unwrap() - 0.4).abs() < 1e-15);

    let (_, unseen) = call(&app(&config()), "POST", "/api/whatif", Some(json!({"circumstances": 7}))).await;
    assert!(unseen["recommendations"].as_array().unwrap().iter().all(|r| r["unmodeled_circumstance"] == true));
}

#[tokio::test]
async fn validation_errors_are_400() {
    let app = app(&config());
    let cases = [
        (json!({"circumstances": ["f1", "f9"], "method": "m1"}), "unknown_label", "f9"),
        (json!({"circumstances": 64, "method": "m1"}), "invalid_mask", ""),
        (json!({"circumstances": 1, "method": "m4"}), "unknown_method", "m4"),
        (json!({"circumstances": "f1", "method": "m1"}), "invalid_request", ""),
        (json!({"method": "m1"}), "invalid_request", ""),
        (json!({"circumstances": 1, "method": "m1", "extra": 1}), "invalid_request", ""),
    ];
    for (body, code, mentions) in cases {
        let (status, reply) = call(&app, "POST", "/api/decide", Some(body.clone())).await;
        assert_eq!(status, StatusCode::BAD_REQUEST, "{body}");
        assert_eq!(reply["error"], code, "{body}");
        assert!(reply["message"].as_str().unwrap().contains(mentions), "{reply}");
    }
    let request = Request::builder().method("POST").uri("/api/decide").body(Body::from("{not json")).unwrap();
    let response = app.clone().oneshot(request).await.unwrap();
    assert_eq!(response.status(), StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn backtest_report_endpoint() {
    let (status, body) = call(&app(&config()), "GET", "/api/backtest/report", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(body["error"], "not_found");

    let report = run_backtest(&fixture("market_16.csv"), &config(), Method::M1, 0).unwrap();
    let app = router(model("market_16.csv", &config()), Some(report.clone()));
    let (status, body) = call(&app, "GET", "/api/backtest/report", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body, serde_json::to_value(&report).unwrap());
}

#[tokio::test]
async fn every_toggle_combination_maps_to_its_mask() {
    let app = app(&config());
    let labels = ["f1", "f2", "f3", "f4", "f5", "f6"];
    for mask in 0u32..64 {
        let on: Vec<_> = labels.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, l)| *l).collect();
        let (_, body) = call(&app, "POST", "/api/decide", Some(json!({"circumstances": on, "method": "m1"}))).await;
        assert_eq!(body["circumstances"]["mask"], mask);
    }
}
