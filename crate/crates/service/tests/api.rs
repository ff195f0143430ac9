// SPDX-License-Identifier: Apache-2.0

use std::time::Duration;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use harmnet_core::fixtures::fixture;
use harmnet_core::ingest::GraphDocument;
use harmnet_core::whatif::{influence, scored_with, vulnerability, ScenarioOverlay};
use harmnet_core::{network_harm, Aggregator, HarmConfig, HarmGraph};
use harmnet_service::{router, AppState, Settings, VERSION, VERSION_HEADER};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

fn app_with(name: &str, settings: Settings) -> Router {
    router(AppState::with_graph(settings, fixture(name).unwrap().graph))
}

fn app(name: &str) -> Router {
    app_with(name, Settings::default())
}

async fn call(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let (status, _, v) = call_full(app, method, uri, body).await;
    (status, v)
}

async fn call_full(
    app: &Router,
    method: &str,
    uri: &str,
    body: Option<Value>,
) -> (StatusCode, axum::http::HeaderMap, Value) {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(match body {
            Some(b) => Body::from(b.to_string()),
            None => Body::empty(),
        })
        .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let headers = resp.headers().clone();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let v = if bytes.is_empty() { Value::Null } else { serde_json::from_slice(&bytes).unwrap() };
    (status, headers, v)
}

async fn raw(app: &Router, method: &str, uri: &str, body: &str) -> (StatusCode, Value) {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .body(Body::from(body.to_string()))
        .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    (status, serde_json::from_slice(&bytes).unwrap())
}

fn fields(v: &Value) -> Vec<String> {
    v["error"]["fields"]
        .as_array()
        .map(|a| a.iter().map(|f| f["field"].as_str().unwrap().to_string()).collect())
        .unwrap_or_default()
}

fn graph_of(name: &str) -> HarmGraph {
    fixture(name).unwrap().graph
}

#[tokio::test]
async fn health_reports_counts_and_version() {
    let (status, headers, v) = call_full(&app("fig5a"), "GET", "/api/health", None).await;
    assert_eq!(status, StatusCode::OK);
    let g = graph_of("fig5a");
    assert_eq!(v["nodes"], g.node_count());
    assert_eq!(v["edges"], g.edge_count());
    assert_eq!(v["version"], VERSION);
    assert_eq!(headers[VERSION_HEADER], VERSION);
}

#[tokio::test]
async fn version_header_on_errors_too() {
    let (status, headers, _) = call_full(&app("fig5a"), "GET", "/api/nope", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(headers[VERSION_HEADER], VERSION);
}

#[tokio::test]
async fn unavailable_before_load() {
    let app = router(AppState::new(Settings::default()));
    let (status, v) = call(&app, "GET", "/api/graph", None).await;
    assert_eq!(status, StatusCode::SERVICE_UNAVAILABLE);
    assert_eq!(v["error"]["status"], 503);
    let (status, v) = call(&app, "GET", "/api/health", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v["status"], "loading");
    let (status, _) = call(&app, "POST", "/api/score", Some(json!({"target": "t0"}))).await;
    assert_eq!(status, StatusCode::SERVICE_UNAVAILABLE);
}

#[tokio::test]
async fn graph_document_round_trips() {
    let (status, v) = call(&app("fig5a"), "GET", "/api/graph", None).await;
    assert_eq!(status, StatusCode::OK);
    let doc: GraphDocument = serde_json::from_value(v["graph"].clone()).unwrap();
    let back = doc.to_graph().unwrap();
    let g = graph_of("fig5a");
    assert_eq!(back.node_count(), g.node_count());
    for n in g.nodes() {
        let id = back.node(g.label(n)).unwrap();
        assert_eq!(back.harm(id), g.harm(n));
        assert_eq!(v["labels"][g.label(n)], n.0);
    }
    assert_eq!(back.edges().count(), g.edges().count());
}

#[tokio::test]
async fn score_tree_avg_avg() {
    let body = json!({"target": "t0", "config": {"inner": "avg", "outer": "avg", "alpha": 1.0}});
    let (status, v) = call(&app("fig5a"), "POST", "/api/score", Some(body)).await;
    assert_eq!(status, StatusCode::OK, "{v}");
    assert!((v["H"].as_f64().unwrap() - 54.0).abs() <= 0.5);
    assert_eq!(v["target"], "t0");
    let levels = v["levels"].as_array().unwrap();
    // Exhaustive depth is n - 1; only the first two levels are populated.
    assert_eq!(levels.iter().filter(|l| !l["x_m"].is_null()).count(), 2);
    for key in ["m", "size", "x_m", "weighted"] {
        assert!(levels[0].get(key).is_some(), "missing {key}");
    }
}

#[tokio::test]
async fn score_single_level() {
    let body = json!({"target": 0, "config": {"mmax": 1}});
    let (status, v) = call(&app("fig5a"), "POST", "/api/score", Some(body)).await;
    assert_eq!(status, StatusCode::OK, "{v}");
    assert_eq!(v["levels"].as_array().unwrap().len(), 1);
}

#[tokio::test]
async fn score_is_pure() {
    let app = app("fig5b");
    let body = json!({"target": "t0", "config": {"scheme": "simple"}});
    let (_, a) = call(&app, "POST", "/api/score", Some(body.clone())).await;
    let (_, b) = call(&app, "POST", "/api/score", Some(body)).await;
    assert_eq!(a.to_string(), b.to_string());
}

#[tokio::test]
async fn score_matches_library() {
    let g = graph_of("fig6");
    let cfg = HarmConfig::new(Aggregator::Max, Aggregator::Avg, 0.85);
    let want = network_harm(&g, g.node("t0").unwrap(), &cfg).unwrap();
    let (_, v) = call(&app("fig6"), "POST", "/api/score", Some(json!({"target": "t0"}))).await;
    assert_eq!(v["H"].as_f64().unwrap(), want);
}

#[tokio::test]
async fn malformed_requests_name_fields() {
    let app = app("fig5a");
    let (status, v) = call(
        &app,
        "POST",
        "/api/score",
        Some(json!({"target": "t0", "config": {"alpha": 1.5, "mmax": 0}})),
    )
    .await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(fields(&v), ["config.alpha", "config.mmax"]);

    let (status, v) = call(
        &app,
        "POST",
        "/api/score",
        Some(json!({"target": "t0", "config": {"inner": "median"}})),
    )
    .await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(fields(&v), ["config.inner"]);

    let (status, v) = call(&app, "POST", "/api/score", Some(json!({"target": "t0", "bogus": 1}))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(v["error"]["code"], "bad_request");

    let (status, v) = raw(&app, "POST", "/api/score", "{not json").await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(v["error"]["status"], 400);

    let (status, _) = call(&app, "POST", "/api/score", Some(json!({"target": "zz"}))).await;
    assert_eq!(status, StatusCode::NOT_FOUND);

    let (status, v) = call(
        &app,
        "POST",
        "/api/score",
        Some(json!({"target": "t0", "config": {"scheme": "all"}})),
    )
    .await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(fields(&v), ["config.mmax"]);
}

async fn open(app: &Router, target: &str, config: Value) -> String {
    let (status, v) = call(app, "POST", "/api/session", Some(json!({"target": target, "config": config}))).await;
    assert_eq!(status, StatusCode::CREATED, "{v}");
    assert_eq!(v["delta"], 0.0);
    v["id"].as_str().unwrap().to_string()
}

#[tokio::test]
async fn session_deltas_are_vulnerability_and_influence() {
    let g = graph_of("fig5b");
    let t = g.node("t0").unwrap();
    let cfg = HarmConfig::default();
    let app = app("fig5b");
    for b in g.nodes().filter(|&b| b != t) {
        let id = open(&app, "t0", json!({})).await;
        let label = g.label(b);
        let (status, v) = call(
            &app,
            "POST",
            &format!("/api/session/{id}/override"),
            Some(json!({"node": label, "harm": 100.0})),
        )
        .await;
        assert_eq!(status, StatusCode::OK, "{v}");
        let d = v["delta"].as_f64().unwrap();
        assert_eq!(d, vulnerability(&g, t, b, &cfg).unwrap());
        assert!(d >= 0.0);

        let (_, v) = call(&app, "POST", &format!("/api/session/{id}/reset"), None).await;
        assert_eq!(v["delta"], 0.0);
        let (status, v) = call(
            &app,
            "POST",
            &format!("/api/session/{id}/remove"),
            Some(json!({"node": b.0})),
        )
        .await;
        assert_eq!(status, StatusCode::OK, "{v}");
        let d = v["delta"].as_f64().unwrap();
        assert_eq!(d, influence(&g, t, b, &cfg).unwrap());
        assert!((-100.0..=100.0).contains(&d));
        let (status, _) = call(&app, "DELETE", &format!("/api/session/{id}"), None).await;
        assert_eq!(status, StatusCode::NO_CONTENT);
    }
}

#[tokio::test]
async fn interleaved_sessions_stay_isolated() {
    let g = graph_of("fig6");
    let t = g.node("t0").unwrap();
    let cfg = HarmConfig::default();
    let app = app("fig6");
    let s1 = open(&app, "t0", json!({})).await;
    let s2 = open(&app, "t0", json!({})).await;

    call(&app, "POST", &format!("/api/session/{s1}/override"), Some(json!({"node": "n20", "harm": 100}))).await;
    call(&app, "POST", &format!("/api/session/{s2}/remove"), Some(json!({"node": "n90"}))).await;
    call(&app, "POST", &format!("/api/session/{s1}/remove"), Some(json!({"node": "n55"}))).await;
    let (_, v2) = call(&app, "POST", &format!("/api/session/{s2}/override"), Some(json!({"node": "n30", "harm": 0}))).await;
    let (_, v1) = call(&app, "GET", &format!("/api/session/{s1}"), None).await;

    let o1 = ScenarioOverlay::new()
        .with_override(g.node("n20").unwrap(), 100.0)
        .unwrap()
        .with_removal(g.node("n55").unwrap())
        .unwrap();
    let o2 = ScenarioOverlay::new()
        .with_removal(g.node("n90").unwrap())
        .unwrap()
        .with_override(g.node("n30").unwrap(), 0.0)
        .unwrap();
    assert_eq!(v1["H"].as_f64().unwrap(), scored_with(&g, &o1, t, &cfg).unwrap());
    assert_eq!(v2["H"].as_f64().unwrap(), scored_with(&g, &o2, t, &cfg).unwrap());
    assert_eq!(v1["removed"][0]["label"], "n55");
    assert_eq!(v2["removed"][0]["label"], "n90");
    assert_eq!(v1["overrides"].as_array().unwrap().len(), 1);
}

#[tokio::test]
async fn session_edits_and_conflicts() {
    let app = app("fig5b");
    let id = open(&app, "t0", json!({"scheme": "simple"})).await;
    let url = |s: &str| format!("/api/session/{id}/{s}");

    let (status, _) = call(&app, "POST", &url("remove"), Some(json!({"node": "n85"}))).await;
    assert_eq!(status, StatusCode::OK);
    let (status, v) = call(&app, "POST", &url("override"), Some(json!({"node": "n85", "harm": 10}))).await;
    assert_eq!(status, StatusCode::CONFLICT, "{v}");
    let (status, _) = call(&app, "POST", &url("remove"), Some(json!({"node": "t0"}))).await;
    assert_eq!(status, StatusCode::CONFLICT);

    let (status, _) = call(&app, "POST", &url("override"), Some(json!({"node": "n60", "harm": 5}))).await;
    assert_eq!(status, StatusCode::OK);
    let (status, _) = call(&app, "POST", &url("remove"), Some(json!({"node": "n60"}))).await;
    assert_eq!(status, StatusCode::CONFLICT);
    let (status, v) = call(&app, "POST", &url("override"), Some(json!({"node": "n60", "harm": 101}))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(fields(&v), ["harm"]);
    let (status, _) = call(&app, "POST", &url("override"), Some(json!({"node": "zz", "harm": 1}))).await;
    assert_eq!(status, StatusCode::NOT_FOUND);

    let (status, v) = call(&app, "DELETE", &url("override/n60"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert!(v["overrides"].as_array().unwrap().is_empty());
    let (status, _) = call(&app, "DELETE", &url("override/n60"), None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let (status, v) = call(&app, "DELETE", &url("remove/n85"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v["delta"], 0.0);

    let (status, v) = call(&app, "POST", &url("config"), Some(json!({"config": {"inner": "max", "outer": "max", "alpha": 1}}))).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v["H"], 100.0);
    assert_eq!(v["baseline"], 100.0);

    let (status, _) = call(&app, "GET", "/api/session/not-a-uuid", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    call(&app, "DELETE", &format!("/api/session/{id}"), None).await;
    let (status, _) = call(&app, "GET", &format!("/api/session/{id}"), None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn sessions_expire_when_idle() {
    let settings = Settings {
        session_ttl: Duration::from_millis(50),
        ..Settings::default()
    };
    let app = app_with("pair", settings);
    let id = open(&app, "a", json!({})).await;
    let (status, _) = call(&app, "GET", &format!("/api/session/{id}"), None).await;
    assert_eq!(status, StatusCode::OK);
    tokio::time::sleep(Duration::from_millis(120)).await;
    let (status, _) = call(&app, "GET", &format!("/api/session/{id}"), None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn star_ties_break_by_label() {
    let body = json!({"target": "hub", "kind": "vulnerability", "top_n": 10});
    let (status, v) = call(&app("star"), "POST", "/api/rankings", Some(body)).await;
    assert_eq!(status, StatusCode::OK, "{v}");
    let labels: Vec<&str> = v["entries"].as_array().unwrap().iter().map(|e| e["label"].as_str().unwrap()).collect();
    assert_eq!(labels, ["l1", "l2", "l3", "l4", "l5"]);
    let scores: Vec<f64> = v["entries"].as_array().unwrap().iter().map(|e| e["score"].as_f64().unwrap()).collect();
    assert!(scores.windows(2).all(|w| w[0] == w[1]));
}

#[tokio::test]
async fn pair_global_influence() {
    let body = json!({"kind": "global", "top_n": 1});
    let (status, v) = call(&app("pair"), "POST", "/api/rankings", Some(body)).await;
    assert_eq!(status, StatusCode::OK, "{v}");
    let scores: Vec<f64> = v["entries"].as_array().unwrap().iter().map(|e| e["score"].as_f64().unwrap()).collect();
    assert_eq!(scores, [-100.0]);
    assert_eq!(v["entries"][0]["label"], "b");
}

#[tokio::test]
async fn toy_influence_ranking_leads_with_negative() {
    let body = json!({"target": "t0", "kind": "influence", "config": {"inner": "max", "outer": "max", "scheme": "simple"}});
    let (status, v) = call(&app("fig6"), "POST", "/api/rankings", Some(body)).await;
    assert_eq!(status, StatusCode::OK, "{v}");
    assert!(v["entries"][0]["score"].as_f64().unwrap() < 0.0);
}

#[tokio::test]
async fn ranking_validation() {
    let app = app("pair");
    let (status, v) = call(&app, "POST", "/api/rankings", Some(json!({"kind": "influence"}))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(fields(&v), ["target"]);
    let (status, v) = call(&app, "POST", "/api/rankings", Some(json!({"target": "a", "kind": "fame"}))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(fields(&v), ["kind"]);
}

#[tokio::test]
async fn slow_rankings_answer_accepted_then_poll() {
    let settings = Settings {
        ranking_timeout: Duration::ZERO,
        ..Settings::default()
    };
    let app = app_with("fig6", settings);
    let (status, v) = call(&app, "POST", "/api/rankings", Some(json!({"kind": "global"}))).await;
    assert_eq!(status, StatusCode::ACCEPTED, "{v}");
    let poll = v["poll"].as_str().unwrap().to_string();
    for _ in 0..200 {
        let (status, v) = call(&app, "GET", &poll, None).await;
        assert_eq!(status, StatusCode::OK);
        if v["status"] == "done" {
            assert_eq!(v["result"]["kind"], "global");
            assert!(!v["result"]["entries"].as_array().unwrap().is_empty());
            return;
        }
        tokio::time::sleep(Duration::from_millis(25)).await;
    }
    panic!("job never finished");
}

#[tokio::test]
async fn cors_allows_local_ui() {
    let req = Request::builder()
        .method("OPTIONS")
        .uri("/api/score")
        .header("origin", "http://localhost:5173")
        .header("access-control-request-method", "POST")
        .body(Body::empty())
        .unwrap();
    let resp = app("pair").oneshot(req).await.unwrap();
    assert_eq!(resp.headers()["access-control-allow-origin"], "http://localhost:5173");
}
