use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use http_body_util::BodyExt;
use iolap::{Catalog, SessionManager, SharedCatalog};
use iolap_engine::{router, AppState};
use serde_json::{json, Value};
use tower::ServiceExt;

fn app() -> axum::Router {
    let c = Catalog::load_dir(concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures/catalog")).unwrap();
    router(AppState {
        sessions: Arc::new(SessionManager::new(SharedCatalog::new(c), 42)),
    })
}

async fn call(app: &axum::Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let mut req = Request::builder().method(method).uri(uri);
    let body = match body {
        Some(b) => {
            req = req.header("content-type", "application/json");
            Body::from(b.to_string())
        }
        None => Body::empty(),
    };
    let resp = app.clone().oneshot(req.body(body).unwrap()).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let v = if bytes.is_empty() { Value::Null } else { serde_json::from_slice(&bytes).unwrap() };
    (status, v)
}

#[tokio::test]
async fn session_lifecycle() {
    let app = app();
    let (s, v) = call(&app, "POST", "/sessions", None).await;
    assert_eq!(s, StatusCode::CREATED);
    assert_eq!(v["id"], 1);
    let (_, v2) = call(&app, "POST", "/sessions", None).await;
    assert_eq!(v2["id"], 2);

    let (s, d) = call(
        &app,
        "POST",
        "/sessions/1/intentions",
        Some(json!({"text": "with CO describe HoursPerWeek by work_class.L0"})),
    )
    .await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(d["highlight"]["component"], "Outliers");
    assert_eq!(d["highlight"]["core_cell_coordinates"].as_array().unwrap().len(), 2);
    assert!(d["provenance"]["intention_text"].is_string());

    let (_, dash) = call(&app, "GET", "/sessions/1/dashboard", None).await;
    assert_eq!(dash, json!([d]));
    let (_, again) = call(&app, "GET", "/sessions/1/dashboard", None).await;
    assert_eq!(dash.to_string(), again.to_string());
    let (_, other) = call(&app, "GET", "/sessions/2/dashboard", None).await;
    assert_eq!(other, json!([]));

    let (s, _) = call(&app, "DELETE", "/sessions/2", None).await;
    assert_eq!(s, StatusCode::NO_CONTENT);
    let (s, e) = call(&app, "GET", "/sessions/2/dashboard", None).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    assert_eq!(e["stage"], "session");
}

#[tokio::test]
async fn errors_are_structured() {
    let app = app();
    call(&app, "POST", "/sessions", None).await;
    let (s, e) = call(&app, "POST", "/sessions/1/intentions", Some(json!({"text": "with CN describe"}))).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    assert_eq!(e["stage"], "parse");
    assert!(e["position"]["column"].as_u64().unwrap() > 0);
    let (s, e) = call(&app, "POST", "/sessions/1/intentions", Some(json!({"text": "with Nope describe m"}))).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    assert_eq!(e["stage"], "plan");
    assert!(e["position"].is_null());
    let (s, e) = call(&app, "POST", "/sessions/9/intentions", Some(json!({"text": "with CN describe m"}))).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    assert_eq!(e["stage"], "session");
}

#[tokio::test]
async fn catalog_registration_drives_assessment() {
    let app = app();
    call(&app, "POST", "/sessions", None).await;
    let (s, _) = call(
        &app,
        "POST",
        "/catalog/kpi-rules",
        Some(json!({"name": "Target2", "rules": [{"hi": 42, "label": "Short"}, {"lo": 42, "label": "Long"}]})),
    )
    .await;
    assert_eq!(s, StatusCode::CREATED);
    let (s, e) = call(&app, "POST", "/catalog/kpi-rules", Some(json!({"name": "Target2", "rules": []}))).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    assert_eq!(e["stage"], "catalog");

    let (_, d) = call(&app, "POST", "/sessions/1/intentions", Some(json!({"text": "with T_CN assess HoursPerWeek using Target2"}))).await;
    let comps = d["models"][0]["components"].as_array().unwrap();
    let labels = comps.iter().find(|c| c["name"] == "Assessment").unwrap()["elements"].as_array().unwrap();
    for (cell, l) in d["cube"]["cells"].as_array().unwrap().iter().zip(labels) {
        let v = cell["measures"][0].as_f64().unwrap();
        assert_eq!(l, if v < 42.0 { "Short" } else { "Long" });
    }

    let (_, cat) = call(&app, "GET", "/catalog", None).await;
    assert!(cat["kpi_rules"].as_array().unwrap().iter().any(|k| k["name"] == "Target2"));
}

#[tokio::test]
async fn render_returns_canonical_text() {
    let app = app();
    let (s, v) = call(&app, "POST", "/render", Some(json!({"text": "WITH CN  DESCRIBE HoursPerWeek BY work_class.L0"}))).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(v["canonical"], "with CN describe HoursPerWeek by work_class.L0");
    let (s, v) = call(&app, "POST", "/render", Some(json!({"text": "with"}))).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    assert_eq!(v["stage"], "parse");
}
