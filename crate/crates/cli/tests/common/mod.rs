#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use axum::Router;
use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use http_body_util::BodyExt;
use ottrkit::Library;
use ottrkit::docgen::load_docs;
use ottrkit::lint::LintConfig;
use ottrkit::syntax::parse_library;
use ottrkit::workflow::Workflow;
use ottrkit_cli::service::{AppState, ServiceConfig, router};
use serde_json::Value;
use tower::ServiceExt;

pub const BASE: &str = "http://example.org/run";

pub fn fixture_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

pub fn fixture(name: &str) -> String {
    std::fs::read_to_string(fixture_path(name)).unwrap()
}

pub fn library(name: &str) -> Library {
    parse_library(&fixture(name)).unwrap()
}

/// Router over `lib` with the given workflows; sessions persist in `state_dir` when set.
pub fn app_with(lib: Library, workflows: &[&str], state_dir: Option<&Path>) -> Router {
    let prefixes = lib.effective_prefixes();
    let workflows = workflows.iter().map(|w| Workflow::from_toml(&fixture(w), &prefixes).unwrap()).collect();
    let docs = if lib.templates.contains_key("http://tpl.ex.org/pizza/Pizza") {
        load_docs(&fixture("pizza.docs.toml"), &lib).unwrap()
    } else {
        BTreeMap::new()
    };
    let config = ServiceConfig {
        library: lib,
        base: BASE.into(),
        state_dir: state_dir.map(Path::to_path_buf),
        workflows,
        docs,
        lint: LintConfig::default(),
    };
    router(AppState::open(config).unwrap())
}

pub async fn send(app: &Router, method: Method, uri: &str, body: Option<Value>) -> (StatusCode, String) {
    let mut req = Request::builder().method(method).uri(uri);
    let body = match body {
        Some(v) => {
            req = req.header("content-type", "application/json");
            Body::from(v.to_string())
        }
        None => Body::empty(),
    };
    let resp = app.clone().oneshot(req.body(body).unwrap()).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    (status, String::from_utf8(bytes.to_vec()).unwrap())
}

pub async fn send_json(app: &Router, method: Method, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let (status, text) = send(app, method, uri, body).await;
    let value = serde_json::from_str(&text).unwrap_or_else(|e| panic!("{uri}: {e}: {text}"));
    (status, value)
}

pub async fn new_session(app: &Router) -> String {
    let (status, v) = send_json(app, Method::POST, "/api/sessions", None).await;
    assert_eq!(status, StatusCode::CREATED);
    v["sessionId"].as_str().unwrap().to_string()
}

pub fn encode(iri: &str) -> String {
    iri.bytes()
        .map(|b| match b {
            b'A'..=b'Z' | b'a'..=b'z' | b'0'..=b'9' | b'-' | b'.' | b'_' | b'~' => (b as char).to_string(),
            _ => format!("%{b:02X}"),
        })
        .collect()
}
