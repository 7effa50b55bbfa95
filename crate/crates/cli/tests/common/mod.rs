#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use frc_cli::api::{router, AppState, ServiceConfig};
use frc_core::ingest::{load_event, parse_rankings};
use frc_core::predictor::{train, ModelConfig, TrainedModel};
use frc_core::schema::load_year_schema;
use frc_core::stats::{build_profiles, ProfileSet};
use frc_core::synthetic::synthetic_samples;
use frc_core::TeamId;
use http_body_util::BodyExt;
use serde_json::Value;
use tower::ServiceExt;

pub fn repo_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

pub fn fixture(name: &str) -> PathBuf {
    repo_root().join("fixtures").join(name)
}

/// Seats 1-8 followed by the first teams out of the captain block.
pub const NARRATED: [&str; 11] = ["2539", "5404", "103", "2168", "747", "3974", "1218", "708", "4342", "433", "293"];

pub fn narrated_ranking() -> Vec<TeamId> {
    let text = std::fs::read_to_string(fixture("2019paphi.rankings.json")).unwrap();
    parse_rankings(&text).unwrap()
}

pub fn narrated_profiles() -> ProfileSet {
    let schema = load_year_schema(&repo_root().join("schemas/2019.json")).unwrap();
    let event = load_event(&fixture("2019paphi.json")).unwrap();
    build_profiles(&[event], &schema).unwrap()
}

pub fn small_model() -> TrainedModel {
    let config = ModelConfig {
        hidden_layers: vec![8],
        max_epochs: 30,
        seed: 5,
        ..ModelConfig::default()
    };
    train(&config, &synthetic_samples(400, 0.1, 5)).unwrap()
}

pub fn service(model: Option<TrainedModel>, state_dir: Option<PathBuf>) -> (Arc<AppState>, Router) {
    let state = Arc::new(
        AppState::new(ServiceConfig {
            profiles: narrated_profiles(),
            ranking: narrated_ranking(),
            model,
            state_dir,
        })
        .unwrap(),
    );
    let app = router(state.clone());
    (state, app)
}

pub async fn call(app: &Router, method: Method, uri: &str, body: Option<&str>) -> (StatusCode, Value) {
    let mut req = Request::builder().method(method).uri(uri);
    if body.is_some() {
        req = req.header("content-type", "application/json");
    }
    let req = req.body(Body::from(body.unwrap_or("").to_string())).unwrap();
    let res = app.clone().oneshot(req).await.unwrap();
    let status = res.status();
    let bytes = res.into_body().collect().await.unwrap().to_bytes();
    let value = if bytes.is_empty() {
        Value::Null
    } else {
        serde_json::from_slice(&bytes).unwrap_or_else(|_| Value::String(String::from_utf8_lossy(&bytes).into()))
    };
    (status, value)
}

pub async fn get(app: &Router, uri: &str) -> (StatusCode, Value) {
    call(app, Method::GET, uri, None).await
}

pub async fn post(app: &Router, uri: &str, body: &str) -> (StatusCode, Value) {
    call(app, Method::POST, uri, Some(body)).await
}
