use std::sync::Arc;

use axum::body::Body;
use axum::http::{header, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;
use xca_core::default_kb;
use xca_core::loader::DEFAULT_KB_JSON;
use xca_service::{router, AppState, ServiceConfig};

fn app_with(config: ServiceConfig) -> (Router, Arc<AppState>) {
    let state = Arc::new(AppState::new(default_kb().clone(), config.admin_reload));
    (router(Arc::clone(&state), &config), state)
}

fn app() -> Router {
    app_with(ServiceConfig::default()).0
}

fn fixture(name: &str) -> Value {
    let path = format!("{}/../../fixtures/{name}.json", env!("CARGO_MANIFEST_DIR"));
    serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap()
}

async fn send(app: &Router, req: Request<Body>) -> (StatusCode, axum::http::HeaderMap, Vec<u8>) {
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let headers = resp.headers().clone();
    let body = resp.into_body().collect().await.unwrap().to_bytes().to_vec();
    (status, headers, body)
}

fn post(uri: &str, body: impl Into<Body>) -> Request<Body> {
    Request::post(uri)
        .header(header::CONTENT_TYPE, "application/json")
        .body(body.into())
        .unwrap()
}

fn json_of(body: &[u8]) -> Value {
    serde_json::from_slice(body).unwrap()
}

fn assert_api_error(status: StatusCode, body: &[u8]) -> Value {
    let v = json_of(body);
    assert_eq!(v["status"], status.as_u16());
    assert!(v["code"].is_string() && v["detail"].is_string(), "{v}");
    v
}

#[tokio::test]
async fn kb_listing_and_etag() {
    let app = app();
    let (status, headers, body) = send(&app, Request::get("/api/v1/kb").body(Body::empty()).unwrap()).await;
    assert_eq!(status, StatusCode::OK);
    let v = json_of(&body);
    assert_eq!(v["counts"], json!({"regulations": 3, "goals": 11, "methods": 23}));
    assert_eq!(v["methods"].as_array().unwrap().len(), 23);
    let fp = default_kb().fingerprint();
    assert_eq!(v["fingerprint"], fp.as_str());
    assert_eq!(headers[header::ETAG], format!("\"{fp}\"").as_str());

    let req = Request::get("/api/v1/kb")
        .header(header::IF_NONE_MATCH, format!("\"{fp}\""))
        .body(Body::empty())
        .unwrap();
    let (status, _, body) = send(&app, req).await;
    assert_eq!(status, StatusCode::NOT_MODIFIED);
    assert!(body.is_empty());
}

#[tokio::test]
async fn analyze_rns() {
    let app = app();
    let req = post("/api/v1/analyze?deterministic=true", fixture("rns").to_string());
    let (status, headers, body) = send(&app, req).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(headers[header::CONTENT_TYPE], "application/json");
    let v = json_of(&body);
    assert!(v["recommendation"]["covers"].as_array().unwrap().contains(&json!(["MA-1"])));
    assert!(v.get("generated_at").is_none());

    // Identical requests give identical bodies.
    let (_, _, again) = send(&app, post("/api/v1/analyze?deterministic=true", fixture("rns").to_string())).await;
    assert_eq!(body, again);
}

#[tokio::test]
async fn analyze_stamps_time_unless_deterministic() {
    let (_, _, body) = send(&app(), post("/api/v1/analyze?cap=2", fixture("rns").to_string())).await;
    let v = json_of(&body);
    assert!(v["generated_at"].is_string());
    assert!(v["recommendation"]["covers"].as_array().unwrap().len() <= 2);
}

#[tokio::test]
async fn analyze_scs_gdpr_off() {
    let (status, _, body) = send(&app(), post("/api/v1/analyze?deterministic", fixture("scs").to_string())).await;
    assert_eq!(status, StatusCode::OK);
    let v = json_of(&body);
    let gdpr = v["findings"].as_array().unwrap().iter().find(|f| f["regulation"] == "gdpr").unwrap();
    assert_eq!(gdpr["applies"], false);
}

#[tokio::test]
async fn analyze_missing_field_is_422() {
    let mut doc = fixture("rns");
    doc["device"].as_object_mut().unwrap().remove("model_types");
    let (status, _, body) = send(&app(), post("/api/v1/analyze", doc.to_string())).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    let v = assert_api_error(status, &body);
    assert_eq!(v["location"], "device.model_types");
    assert_eq!(v["code"], "E_SCHEMA");
}

#[tokio::test]
async fn analyze_invalid_profile_is_422() {
    let mut doc = fixture("rns");
    doc["device"]["model_types"] = json!([]);
    let (status, _, body) = send(&app(), post("/api/v1/analyze", doc.to_string())).await;
    let v = assert_api_error(status, &body);
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(v["code"], "E_EMPTY_MODEL_TYPES");
    assert_eq!(v["location"], "device.model_types");
}

#[tokio::test]
async fn malformed_body_is_400() {
    let (status, _, body) = send(&app(), post("/api/v1/analyze", "{\"device\": ")).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(assert_api_error(status, &body)["code"], "E_BAD_REQUEST");
    let (status, _, body) = send(&app(), post("/api/v1/analyze?cap=0", fixture("rns").to_string())).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_api_error(status, &body);
}

#[tokio::test]
async fn diff_scs_to_closed() {
    let base = fixture("scs");
    let mut modified = base.clone();
    modified["device"]["loop_type"] = json!("closed");
    let (status, _, body) = send(&app(), post("/api/v1/diff", json!({"base": base, "modified": modified}).to_string())).await;
    assert_eq!(status, StatusCode::OK);
    let v = json_of(&body);
    assert_eq!(v["goals_added"], json!(["C", "D", "E", "G"]));
    assert_eq!(v["addressable_added"], json!(["D", "E", "G"]));
}

#[tokio::test]
async fn diff_identical_is_empty() {
    let p = fixture("rns");
    let (_, _, body) = send(&app(), post("/api/v1/diff", json!({"base": p, "modified": p}).to_string())).await;
    let v = json_of(&body);
    for key in ["findings_changed", "requirement_changes", "eligible_added", "eligible_removed", "covers_added", "covers_removed"] {
        assert_eq!(v[key], json!([]), "{key}");
    }
    assert!(v.get("audience").is_none());
}

#[tokio::test]
async fn diff_errors_carry_side() {
    let mut base = fixture("scs");
    base["device"]["input_modalities"] = json!([]);
    let (status, _, body) =
        send(&app(), post("/api/v1/diff", json!({"base": base, "modified": fixture("rns")}).to_string())).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(json_of(&body)["location"], "base.device.input_modalities");

    let mut modified = fixture("scs");
    modified["device"]["loop_type"] = json!("ajar");
    let (status, _, body) =
        send(&app(), post("/api/v1/diff", json!({"base": fixture("rns"), "modified": modified}).to_string())).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(json_of(&body)["location"], "modified.device.loop_type");

    let (status, _, _) = send(&app(), post("/api/v1/diff", json!({"base": fixture("rns")}).to_string())).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
}

#[tokio::test]
async fn every_error_is_an_api_error() {
    let app = app();
    let (status, _, body) = send(&app, Request::get("/nowhere").body(Body::empty()).unwrap()).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_api_error(status, &body);
    let (status, _, body) = send(&app, Request::get("/api/v1/analyze").body(Body::empty()).unwrap()).await;
    assert_eq!(status, StatusCode::METHOD_NOT_ALLOWED);
    assert_api_error(status, &body);
    // Reload is off by default.
    let (status, _, body) = send(&app, post("/api/v1/admin/reload", DEFAULT_KB_JSON)).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_api_error(status, &body);
}

#[tokio::test]
async fn reload_swaps_fingerprint() {
    let (app, state) = app_with(ServiceConfig { admin_reload: true, ..Default::default() });
    let old = state.snapshot().fingerprint.clone();
    let mut kb: Value = serde_json::from_str(DEFAULT_KB_JSON).unwrap();
    kb["version"] = json!("1.1.0");
    let (status, _, body) = send(&app, post("/api/v1/admin/reload", kb.to_string())).await;
    assert_eq!(status, StatusCode::OK);
    let new = json_of(&body)["fingerprint"].as_str().unwrap().to_owned();
    assert_ne!(new, old);
    let (_, headers, body) = send(&app, Request::get("/api/v1/kb").body(Body::empty()).unwrap()).await;
    assert_eq!(headers[header::ETAG], format!("\"{new}\"").as_str());
    assert_eq!(json_of(&body)["version"], "1.1.0");

    // An invalid KB is rejected and the snapshot is untouched.
    kb["goals"][2]["xai_addressable"] = json!(true);
    let (status, _, _) = send(&app, post("/api/v1/admin/reload", kb.to_string())).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(state.snapshot().fingerprint, new);
}

#[tokio::test]
async fn cors_only_when_configured() {
    let origin = "http://localhost:5173";
    let req = || Request::get("/api/v1/kb").header(header::ORIGIN, origin).body(Body::empty()).unwrap();
    let (_, headers, _) = send(&app(), req()).await;
    assert!(headers.get(header::ACCESS_CONTROL_ALLOW_ORIGIN).is_none());
    let (app, _) = app_with(ServiceConfig { cors_origin: Some(origin.into()), ..Default::default() });
    let (_, headers, _) = send(&app, req()).await;
    assert_eq!(headers[header::ACCESS_CONTROL_ALLOW_ORIGIN], origin);
}

#[tokio::test]
async fn schema_endpoint() {
    let (status, _, body) = send(&app(), Request::get("/api/v1/schema").body(Body::empty()).unwrap()).await;
    assert_eq!(status, StatusCode::OK);
    let v = json_of(&body);
    assert!(v["properties"]["device"]["properties"]["loop_type"]["enum"]
        .as_array()
        .unwrap()
        .contains(&json!("semi_closed")));
}

#[tokio::test]
async fn concurrent_requests_agree() {
    let app = app();
    let body = fixture("rns").to_string();
    let handles: Vec<_> = (0..8)
        .map(|_| {
            let app = app.clone();
            let body = body.clone();
            tokio::spawn(async move { send(&app, post("/api/v1/analyze?deterministic=true", body)).await.2 })
        })
        .collect();
    let mut outputs = Vec::new();
    for h in handles {
        outputs.push(h.await.unwrap());
    }
    assert!(outputs.windows(2).all(|w| w[0] == w[1]));
}
