//! HTTP facade over the analysis engine.
//!
//! Every handler reads one immutable KB snapshot; reloads swap the snapshot
//! atomically, so a request never observes two KB versions.

mod error;
mod schema;

use std::net::SocketAddr;
use std::sync::{Arc, RwLock};

use axum::body::{Body, Bytes};
use axum::extract::{RawQuery, Request, State};
use axum::http::{header, HeaderMap, HeaderValue, Method, StatusCode};
use axum::middleware::{self, Next};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use serde_json::{json, Value};
use tower_http::cors::{AllowOrigin, CorsLayer};
use xca_core::canonical::to_canonical_pretty;
use xca_core::loader::{check_profile, parse_document, parse_value, KbDocument, ProfileDocument};
use xca_core::{
    analyze, diff_reports, load_kb, render, AnalysisReport, DeviceProfile, KnowledgeBase, RenderFormat,
    DEFAULT_COVER_CAP,
};

pub use error::ApiError;
pub use schema::profile_schema;

pub const API_PREFIX: &str = "/api/v1";

/// A validated KB plus its cached fingerprint.
#[derive(Debug)]
pub struct Snapshot {
    pub kb: KnowledgeBase,
    pub fingerprint: String,
}

impl Snapshot {
    pub fn new(kb: KnowledgeBase) -> Self {
        let fingerprint = kb.fingerprint();
        Self { kb, fingerprint }
    }
}

#[derive(Debug, Clone, Default)]
pub struct ServiceConfig {
    /// Origin allowed by CORS; `None` disables CORS headers.
    pub cors_origin: Option<String>,
    /// Exposes `POST /api/v1/admin/reload`.
    pub admin_reload: bool,
}

#[derive(Debug)]
pub struct AppState {
    snapshot: RwLock<Arc<Snapshot>>,
    admin_reload: bool,
}

impl AppState {
    pub fn new(kb: KnowledgeBase, admin_reload: bool) -> Self {
        Self {
            snapshot: RwLock::new(Arc::new(Snapshot::new(kb))),
            admin_reload,
        }
    }

    pub fn snapshot(&self) -> Arc<Snapshot> {
        Arc::clone(&self.snapshot.read().expect("snapshot lock"))
    }

    /// Replace the KB; returns the new fingerprint.
    pub fn reload(&self, kb: KnowledgeBase) -> String {
        let next = Arc::new(Snapshot::new(kb));
        let fp = next.fingerprint.clone();
        *self.snapshot.write().expect("snapshot lock") = next;
        fp
    }
}

pub(crate) fn json_response(status: StatusCode, value: &Value) -> Response {
    bytes_response(status, to_canonical_pretty(value).into_bytes())
}

fn bytes_response(status: StatusCode, body: Vec<u8>) -> Response {
    let mut resp = Response::new(Body::from(body));
    *resp.status_mut() = status;
    resp.headers_mut()
        .insert(header::CONTENT_TYPE, HeaderValue::from_static("application/json"));
    resp
}

pub fn router(state: Arc<AppState>, config: &ServiceConfig) -> Router {
    let api = Router::new()
        .route("/kb", get(get_kb))
        .route("/schema", get(get_schema))
        .route("/analyze", post(post_analyze))
        .route("/diff", post(post_diff))
        .route("/admin/reload", post(post_reload));
    let mut app = Router::new()
        .nest(API_PREFIX, api)
        .fallback(|| async { ApiError::not_found() })
        .method_not_allowed_fallback(|| async {
            ApiError::new(StatusCode::METHOD_NOT_ALLOWED, error::BAD_REQUEST, "method not allowed")
        })
        .layer(middleware::from_fn(ensure_api_error))
        .with_state(state);
    if let Some(origin) = &config.cors_origin {
        let origin = HeaderValue::from_str(origin).expect("CORS origin is a valid header value");
        app = app.layer(
            CorsLayer::new()
                .allow_origin(AllowOrigin::exact(origin))
                .allow_methods([Method::GET, Method::POST])
                .allow_headers([header::CONTENT_TYPE, header::IF_NONE_MATCH])
                .expose_headers([header::ETAG]),
        );
    }
    app
}

/// Rewrite error responses produced outside the handlers (body limits,
/// extractor rejections) into the ApiError shape.
async fn ensure_api_error(req: Request, next: Next) -> Response {
    let resp = next.run(req).await;
    let status = resp.status();
    let is_json = resp
        .headers()
        .get(header::CONTENT_TYPE)
        .is_some_and(|v| v.as_bytes().starts_with(b"application/json"));
    if status.is_success() || status.is_redirection() || is_json {
        return resp;
    }
    let detail = status.canonical_reason().unwrap_or("request failed");
    ApiError::new(status, error::BAD_REQUEST, detail).into_response()
}

fn kb_body(snap: &Snapshot) -> Value {
    let doc = KbDocument::from(&snap.kb);
    json!({
        "version": doc.version,
        "fingerprint": snap.fingerprint,
        "counts": {
            "regulations": doc.regulations.len(),
            "goals": doc.goals.len(),
            "methods": doc.catalog.len(),
        },
        "regulations": doc.regulations,
        "goals": doc.goals,
        "methods": doc.catalog,
    })
}

fn etag_matches(headers: &HeaderMap, fingerprint: &str) -> bool {
    headers
        .get_all(header::IF_NONE_MATCH)
        .iter()
        .filter_map(|v| v.to_str().ok())
        .flat_map(|v| v.split(','))
        .map(|tag| tag.trim().trim_start_matches("W/").trim_matches('"'))
        .any(|tag| tag == "*" || tag == fingerprint)
}

async fn get_kb(State(state): State<Arc<AppState>>, headers: HeaderMap) -> Response {
    let snap = state.snapshot();
    let etag = HeaderValue::from_str(&format!("\"{}\"", snap.fingerprint)).expect("hex fingerprint");
    let mut resp = if etag_matches(&headers, &snap.fingerprint) {
        let mut r = Response::new(Body::empty());
        *r.status_mut() = StatusCode::NOT_MODIFIED;
        r
    } else {
        json_response(StatusCode::OK, &kb_body(&snap))
    };
    resp.headers_mut().insert(header::ETAG, etag);
    resp
}

async fn get_schema() -> Response {
    json_response(StatusCode::OK, &profile_schema())
}

#[derive(Debug, PartialEq, Eq)]
struct AnalyzeParams {
    cap: usize,
    deterministic: bool,
}

fn parse_params(query: Option<&str>) -> Result<AnalyzeParams, ApiError> {
    let mut params = AnalyzeParams {
        cap: DEFAULT_COVER_CAP,
        deterministic: false,
    };
    for pair in query.unwrap_or("").split('&').filter(|p| !p.is_empty()) {
        let (key, value) = pair.split_once('=').unwrap_or((pair, ""));
        match key {
            "cap" => {
                params.cap = value
                    .parse()
                    .ok()
                    .filter(|&c: &usize| c >= 1)
                    .ok_or_else(|| ApiError::bad_request("cap must be a positive integer").at("cap"))?;
            }
            "deterministic" => {
                params.deterministic = match value {
                    "" | "true" | "1" => true,
                    "false" | "0" => false,
                    _ => return Err(ApiError::bad_request("deterministic must be true or false").at("deterministic")),
                };
            }
            other => return Err(ApiError::bad_request(format!("unknown query parameter `{other}`")).at(other)),
        }
    }
    Ok(params)
}

fn run(profile: &DeviceProfile, kb: &KnowledgeBase, params: &AnalyzeParams) -> AnalysisReport {
    let mut report = analyze(profile, kb, params.cap);
    if !params.deterministic {
        report.generated_at = Some(chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true));
    }
    report
}

async fn post_analyze(State(state): State<Arc<AppState>>, RawQuery(query): RawQuery, body: Bytes) -> Response {
    let result = (|| {
        let params = parse_params(query.as_deref())?;
        let doc: ProfileDocument = parse_document(&body, "").map_err(|e| ApiError::from_load(&e))?;
        let profile = check_profile(doc.device, "device").map_err(|e| ApiError::from_load(&e))?;
        let snap = state.snapshot();
        Ok::<_, ApiError>(render(&run(&profile, &snap.kb, &params), RenderFormat::Structured))
    })();
    match result {
        Ok(bytes) => bytes_response(StatusCode::OK, bytes),
        Err(e) => e.into_response(),
    }
}

fn profile_at(body: &mut serde_json::Map<String, Value>, key: &str) -> Result<DeviceProfile, ApiError> {
    let value = body.remove(key).ok_or_else(|| {
        ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "E_SCHEMA", format!("missing field `{key}`")).at(key)
    })?;
    let doc: ProfileDocument = parse_value(value, key).map_err(|e| ApiError::from_load(&e))?;
    check_profile(doc.device, &format!("{key}.device")).map_err(|e| ApiError::from_load(&e))
}

async fn post_diff(State(state): State<Arc<AppState>>, body: Bytes) -> Response {
    let result = (|| {
        let value: Value =
            serde_json::from_slice(&body).map_err(|e| ApiError::bad_request(format!("malformed JSON: {e}")))?;
        let Value::Object(mut obj) = value else {
            return Err(ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "E_SCHEMA", "expected an object").at("$"));
        };
        let base = profile_at(&mut obj, "base")?;
        let modified = profile_at(&mut obj, "modified")?;
        if let Some(extra) = obj.keys().next() {
            return Err(ApiError::new(
                StatusCode::UNPROCESSABLE_ENTITY,
                "E_SCHEMA",
                format!("unknown field `{extra}`, expected `base` or `modified`"),
            )
            .at(extra.clone()));
        }
        let snap = state.snapshot();
        let params = AnalyzeParams { cap: DEFAULT_COVER_CAP, deterministic: true };
        let diff = diff_reports(&run(&base, &snap.kb, &params), &run(&modified, &snap.kb, &params));
        Ok(serde_json::to_value(diff).expect("diff serializes"))
    })();
    match result {
        Ok(v) => json_response(StatusCode::OK, &v),
        Err(e) => e.into_response(),
    }
}

async fn post_reload(State(state): State<Arc<AppState>>, body: Bytes) -> Response {
    if !state.admin_reload {
        return ApiError::not_found().into_response();
    }
    match load_kb(&body) {
        Ok(kb) => {
            let fingerprint = state.reload(kb);
            json_response(StatusCode::OK, &json!({ "fingerprint": fingerprint }))
        }
        Err(e) => ApiError::from_load(&e).into_response(),
    }
}

/// Bind and serve until ctrl-c.
pub async fn serve(addr: SocketAddr, state: Arc<AppState>, config: ServiceConfig) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(state, &config))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn query_parsing() {
        assert_eq!(parse_params(None).unwrap(), AnalyzeParams { cap: 10, deterministic: false });
        assert_eq!(
            parse_params(Some("cap=3&deterministic=true")).unwrap(),
            AnalyzeParams { cap: 3, deterministic: true }
        );
        assert!(parse_params(Some("deterministic")).unwrap().deterministic);
        assert_eq!(parse_params(Some("cap=0")).unwrap_err().location.as_deref(), Some("cap"));
        assert!(parse_params(Some("colour=red")).is_err());
    }

    #[test]
    fn etag_forms() {
        let mut h = HeaderMap::new();
        h.insert(header::IF_NONE_MATCH, HeaderValue::from_static("W/\"abc\", \"def\""));
        assert!(etag_matches(&h, "def"));
        assert!(etag_matches(&h, "abc"));
        assert!(!etag_matches(&h, "xyz"));
        assert!(!etag_matches(&HeaderMap::new(), "abc"));
    }
}
