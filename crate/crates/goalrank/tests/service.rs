use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use goalrank::load::bundled;
use goalrank::service::{router, Store, VERSION_HEADER};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

fn situation(text: &str) -> Value {
    let map: serde_json::Map<String, Value> = text
        .split_whitespace()
        .map(|kv| {
            let (k, v) = kv.split_once('=').unwrap();
            (k.to_string(), Value::from(v))
        })
        .collect();
    Value::Object(map)
}

fn store_with_fragment() -> (Arc<Store>, String) {
    let store = Arc::new(Store::new());
    let (ws, _) = store
        .create(None, bundled::FRAGMENT_MODEL, bundled::SCHEMA, bundled::CATALOGUE)
        .unwrap();
    (store, ws.id.clone())
}

async fn call(store: &Arc<Store>, method: &str, uri: &str, body: Option<Value>, if_match: Option<&str>) -> (StatusCode, Option<String>, Value) {
    let mut req = Request::builder().method(method).uri(uri);
    if let Some(v) = if_match {
        req = req.header("if-match", v);
    }
    let body = match body {
        Some(b) => {
            req = req.header("content-type", "application/json");
            Body::from(b.to_string())
        }
        None => Body::empty(),
    };
    let resp = router(store.clone()).oneshot(req.body(body).unwrap()).await.unwrap();
    let status = resp.status();
    let version = resp
        .headers()
        .get(VERSION_HEADER)
        .map(|v| v.to_str().unwrap().to_string());
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let value = if bytes.is_empty() {
        Value::Null
    } else {
        serde_json::from_slice(&bytes).unwrap_or_else(|_| Value::from(String::from_utf8_lossy(&bytes).into_owned()))
    };
    (status, version, value)
}

fn psds(report: &Value) -> Vec<String> {
    report["solutions"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| s["psd"].as_str().unwrap().to_string())
        .collect()
}

#[tokio::test]
async fn create_and_rank() {
    let store = Arc::new(Store::new());
    let body = json!({
        "model": bundled::FRAGMENT_MODEL,
        "schema": bundled::SCHEMA,
        "catalogue": bundled::CATALOGUE,
    });
    let (status, version, v) = call(&store, "POST", "/workspaces", Some(body), None).await;
    assert_eq!(status, StatusCode::CREATED);
    assert_eq!(version.as_deref(), Some("1"));
    assert!(v["diagnostics"].as_array().unwrap().iter().all(|d| d["severity"] == "warning"));
    let id = v["id"].as_str().unwrap().to_string();

    let req = json!({ "situation": situation(bundled::DEMENTIA) });
    let (status, _, v) = call(&store, "POST", &format!("/workspaces/{id}/rank"), Some(req), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(psds(&v), ["24", "14", "11", "1"]);
    assert_eq!(v["version"], 1);
    assert_eq!(v["solutions"][0]["tasks"], json!(["t5", "t7", "t9"]));

    let req = json!({ "situation": situation(bundled::DEMENTIA), "top": 2, "mode": "dominance" });
    let (_, _, v) = call(&store, "POST", &format!("/workspaces/{id}/rank"), Some(req), None).await;
    assert_eq!(v["mode"], "dominance");
    assert_eq!(v["solutions"].as_array().unwrap().len(), 2);
}

#[tokio::test]
async fn invalid_workspace_is_422_with_spans() {
    let store = Arc::new(Store::new());
    let body = json!({
        "model": "goal g1\nroot g1\nand g1 { t1 }\n",
        "schema": "element w { a a }\n",
        "catalogue": bundled::CATALOGUE,
    });
    let (status, _, v) = call(&store, "POST", "/workspaces", Some(body), None).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    let diags = v["diagnostics"].as_array().unwrap();
    assert!(diags.iter().any(|d| d["code"] == "UndeclaredId" && d["line"] == 3));
    assert!(diags.iter().any(|d| d["code"] == "DuplicateValue" && d["file"] == "schema.ctx"));
    assert!(store.ids().is_empty());
}

#[tokio::test]
async fn schema_endpoint() {
    let (store, id) = store_with_fragment();
    let (status, _, v) = call(&store, "GET", &format!("/workspaces/{id}/schema"), None, None).await;
    assert_eq!(status, StatusCode::OK);
    let els = v["elements"].as_array().unwrap();
    assert_eq!(els.len(), 6);
    assert_eq!(els[2]["name"], "patient_illness");
    assert_eq!(els[2]["values"], json!(["dementia", "MCI", "normal"]));
}

#[tokio::test]
async fn unknown_workspace_is_404() {
    let (store, _) = store_with_fragment();
    let req = json!({ "situation": situation(bundled::DEMENTIA) });
    let (status, _, _) = call(&store, "POST", "/workspaces/nope/rank", Some(req), None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let (status, _, _) = call(&store, "GET", "/workspaces/nope/schema", None, None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn bad_situation_is_422() {
    let (store, id) = store_with_fragment();
    let mut sit = situation(bundled::DEMENTIA);
    sit["weather"] = Value::from("stormy");
    sit.as_object_mut().unwrap().remove("patient_activity");
    let (status, _, v) = call(&store, "POST", &format!("/workspaces/{id}/rank"), Some(json!({ "situation": sit })), None).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    let codes: Vec<&str> = v["diagnostics"].as_array().unwrap().iter().map(|d| d["code"].as_str().unwrap()).collect();
    assert!(codes.contains(&"UnknownValue"), "{codes:?}");
    assert!(codes.contains(&"MissingElement"), "{codes:?}");
}

#[tokio::test]
async fn compare_gives_deltas() {
    let (store, id) = store_with_fragment();
    let req = json!({
        "left": situation(bundled::DEMENTIA),
        "right": situation(bundled::NORMAL_BAD_WEATHER),
    });
    let (status, _, v) = call(&store, "POST", &format!("/workspaces/{id}/compare"), Some(req), None).await;
    assert_eq!(status, StatusCode::OK);
    let deltas: Vec<&str> = v["delta"].as_array().unwrap().iter().map(|d| d["delta"].as_str().unwrap()).collect();
    assert_eq!(deltas, ["18", "16", "9", "7"]);
    assert_eq!(v["delta"][0]["tasks"], json!(["t5", "t7", "t9"]));
    assert_eq!(psds(&v["left"]), ["24", "14", "11", "1"]);
    assert_eq!(psds(&v["right"]), ["6", "2", "-2", "-6"]);
}

#[tokio::test]
async fn catalogue_edit_bumps_version_and_reranks() {
    let (store, id) = store_with_fragment();
    let (status, version, v) = call(
        &store,
        "PUT",
        &format!("/workspaces/{id}/catalogue"),
        Some(json!({ "catalogue": bundled::OPTION_TWO_CATALOGUE })),
        Some("1"),
    )
    .await;
    assert_eq!(status, StatusCode::OK, "{v}");
    assert_eq!(version.as_deref(), Some("2"));
    let req = json!({ "situation": situation(bundled::NORMAL) });
    let (_, _, v) = call(&store, "POST", &format!("/workspaces/{id}/rank"), Some(req), None).await;
    assert_eq!(v["version"], 2);
    assert_eq!(v["solutions"][0]["tasks"], json!(["t6", "t8", "t9"]));
    assert_eq!(psds(&v), ["9", "5", "2", "-2"]);
}

#[tokio::test]
async fn raw_text_catalogue_edit() {
    let (store, id) = store_with_fragment();
    let req = Request::builder()
        .method("PUT")
        .uri(format!("/workspaces/{id}/catalogue"))
        .header("content-type", "text/plain")
        .body(Body::from(bundled::OPTION_TWO_CATALOGUE))
        .unwrap();
    let resp = router(store.clone()).oneshot(req).await.unwrap();
    assert_eq!(resp.status(), StatusCode::OK);
    assert_eq!(store.get(&id).unwrap().version, 2);
}

#[tokio::test]
async fn failed_edit_leaves_workspace_unchanged() {
    let (store, id) = store_with_fragment();
    let before = store.get(&id).unwrap();
    let bad = "pref p1 { perform t5 } when weather in {sunny} score 3\npref p2 { perform t5 } when true score 11\n";
    let (status, _, v) = call(&store, "PUT", &format!("/workspaces/{id}/catalogue"), Some(json!({ "catalogue": bad })), None).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert!(!v["diagnostics"].as_array().unwrap().is_empty());
    let after = store.get(&id).unwrap();
    assert_eq!(after.version, 1);
    assert_eq!(after.catalogue, before.catalogue);
    // Binds against the schema too: unknown value.
    let unbound = "pref p1 { perform t5 } when weather in {sunny} score 3\n";
    let (status, _, v) = call(&store, "PUT", &format!("/workspaces/{id}/catalogue"), Some(json!({ "catalogue": unbound })), None).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(v["diagnostics"][0]["code"], "UnknownContextValue");
    assert_eq!(store.get(&id).unwrap().version, 1);
}

#[tokio::test]
async fn stale_version_is_409() {
    let (store, id) = store_with_fragment();
    let put = |v: &'static str| {
        let store = store.clone();
        let id = id.clone();
        async move {
            call(&store, "PUT", &format!("/workspaces/{id}/catalogue"), Some(json!({ "catalogue": bundled::CATALOGUE })), Some(v)).await
        }
    };
    assert_eq!(put("1").await.0, StatusCode::OK);
    let (status, _, v) = put("1").await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_eq!(v["version"], 2);
    let req = json!({ "situation": situation(bundled::DEMENTIA) });
    let (status, _, _) = call(&store, "POST", &format!("/workspaces/{id}/rank"), Some(req.clone()), Some("\"1\"")).await;
    assert_eq!(status, StatusCode::CONFLICT);
    let (status, _, _) = call(&store, "POST", &format!("/workspaces/{id}/rank"), Some(req), Some("\"2\"")).await;
    assert_eq!(status, StatusCode::OK);
}

#[tokio::test]
async fn cors_preflight() {
    let (store, _) = store_with_fragment();
    let req = Request::builder()
        .method("OPTIONS")
        .uri("/workspaces")
        .header("origin", "http://localhost:5173")
        .header("access-control-request-method", "POST")
        .body(Body::empty())
        .unwrap();
    let resp = router(store).oneshot(req).await.unwrap();
    assert!(resp.headers().contains_key("access-control-allow-origin"));
}

#[tokio::test]
async fn identical_requests_give_identical_responses() {
    let (store, id) = store_with_fragment();
    let req = json!({ "situation": situation(bundled::NORMAL) });
    let a = call(&store, "POST", &format!("/workspaces/{id}/rank"), Some(req.clone()), None).await.2;
    let b = call(&store, "POST", &format!("/workspaces/{id}/rank"), Some(req), None).await.2;
    assert_eq!(a.to_string(), b.to_string());
}

/// Readers racing with catalogue swaps only ever see one of the two
/// complete catalogues.
#[tokio::test(flavor = "multi_thread", worker_threads = 4)]
async fn edits_are_atomic_under_concurrent_ranking() {
    let (store, id) = store_with_fragment();
    let original = ["6", "5", "2", "1"].map(String::from).to_vec();
    let edited = ["9", "5", "2", "-2"].map(String::from).to_vec();
    let mut tasks = Vec::new();
    for i in 0..40 {
        let store = store.clone();
        let id = id.clone();
        tasks.push(tokio::spawn(async move {
            if i % 4 == 0 {
                let text = if i % 8 == 0 { bundled::OPTION_TWO_CATALOGUE } else { bundled::CATALOGUE };
                let (s, _, _) = call(&store, "PUT", &format!("/workspaces/{id}/catalogue"), Some(json!({ "catalogue": text })), None).await;
                assert_eq!(s, StatusCode::OK);
                None
            } else {
                let req = json!({ "situation": situation(bundled::NORMAL) });
                let (_, _, v) = call(&store, "POST", &format!("/workspaces/{id}/rank"), Some(req), None).await;
                Some(psds(&v))
            }
        }));
    }
    for t in tasks {
        if let Some(p) = t.await.unwrap() {
            assert!(p == original || p == edited, "{p:?}");
        }
    }
    assert_eq!(store.get(&id).unwrap().version, 11);
}

#[tokio::test]
async fn fixtures_directory_preload() {
    let store = Arc::new(Store::new());
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let ids = store.load_fixtures(&dir).unwrap();
    assert_eq!(ids, ["fragment", "medication"]);
    let req = json!({ "situation": situation(bundled::BUSY_TIRED), "top": 1 });
    let (status, _, v) = call(&store, "POST", "/workspaces/medication/rank", Some(req), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v["solutions"][0]["tasks"], json!(["t1", "t5", "t7", "t9"]));
    let (_, _, list) = call(&store, "GET", "/workspaces", None, None).await;
    assert_eq!(list["workspaces"].as_array().unwrap().len(), 2);
}
