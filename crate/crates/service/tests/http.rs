use std::path::Path;
use std::time::Duration;

use axum::body::Body;
use axum::http::{header, Method, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use intervene_core::{parse_network, Limits, RiskTable};
use intervene_service::{router, run_query, QueryRequest, ServiceConfig};
use serde_json::{json, Value};
use tempfile::TempDir;
use tower::ServiceExt;

const DEMO: &str = include_str!("../../../data/models/demo.json");
const DEMO_MANIFEST: &str = include_str!("../../../data/models/demo.manifest.json");

/// X is deterministic here, so evidence X=x1 has probability zero.
const POINT_MASS: &str = r#"{"name": "point", "variables": [
  {"name": "X", "states": ["x0", "x1"], "parents": [], "cpt": [[1.0, 0.0]]},
  {"name": "Y", "states": ["y0", "y1"], "parents": ["X"], "cpt": [[0.8, 0.2], [0.1, 0.9]]}
]}"#;

fn model_dir(files: &[(&str, &str)]) -> TempDir {
    let dir = tempfile::tempdir().unwrap();
    for (name, text) in files {
        std::fs::write(dir.path().join(name), text).unwrap();
    }
    dir
}

fn demo_dir() -> TempDir {
    model_dir(&[
        ("demo.json", DEMO),
        ("demo.manifest.json", DEMO_MANIFEST),
        ("point.json", POINT_MASS),
    ])
}

fn app(dir: &Path) -> Router {
    router(&ServiceConfig::new(dir))
}

async fn call(app: &Router, method: Method, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let mut req = Request::builder().method(method).uri(uri);
    let body = match body {
        Some(v) => {
            req = req.header(header::CONTENT_TYPE, "application/json");
            Body::from(v.to_string())
        }
        None => Body::empty(),
    };
    let resp = app.clone().oneshot(req.body(body).unwrap()).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let value = if bytes.is_empty() {
        Value::Null
    } else {
        serde_json::from_slice(&bytes)
            .unwrap_or_else(|_| Value::String(String::from_utf8_lossy(&bytes).into()))
    };
    (status, value)
}

async fn wait_for(app: &Router, job: &str) -> Value {
    for _ in 0..500 {
        let (status, view) = call(app, Method::GET, &format!("/jobs/{job}"), None).await;
        assert_eq!(status, StatusCode::OK);
        if view["status"] != "running" {
            return view;
        }
        tokio::time::sleep(Duration::from_millis(10)).await;
    }
    panic!("job {job} did not finish");
}

#[tokio::test]
async fn lists_models_in_id_order() {
    let dir = demo_dir();
    let (status, body) = call(&app(dir.path()), Method::GET, "/models", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(
        body,
        json!([{"id": "demo", "name": "demo"}, {"id": "point", "name": "point"}])
    );

    let empty = model_dir(&[]);
    let (_, body) = call(&app(empty.path()), Method::GET, "/models", None).await;
    assert_eq!(body, json!([]));

    let (_, body) = call(
        &app(&empty.path().join("missing")),
        Method::GET,
        "/models",
        None,
    )
    .await;
    assert_eq!(body, json!([]));
}

#[tokio::test]
async fn schema_echoes_network_and_manifest() {
    let dir = demo_dir();
    let app = app(dir.path());
    let (status, body) = call(&app, Method::GET, "/models/demo/schema", None).await;
    assert_eq!(status, StatusCode::OK);
    let net = parse_network(DEMO).unwrap();
    let vars = body["variables"].as_array().unwrap();
    assert_eq!(vars.len(), net.len());
    for (v, schema) in net.variables().iter().zip(vars) {
        assert_eq!(schema["name"], json!(v.name));
        assert_eq!(schema["states"], json!(v.states));
        assert_eq!(schema["parents"], json!(v.parents));
    }
    assert_eq!(vars[0]["roles"], json!(["feature", "intervention"]));
    assert_eq!(vars[1]["roles"], json!(["target"]));
    assert_eq!(
        body["default_target"],
        json!({"variable": "Y", "state": "y1"})
    );
    assert_eq!(body["risk_table"][4]["label"], "High");

    let (_, point) = call(&app, Method::GET, "/models/point/schema", None).await;
    assert_eq!(point["variables"][0]["roles"], json!([]));
    assert_eq!(point["default_space"], Value::Null);

    for uri in [
        "/models/nope/schema",
        "/models/..%2Fdemo/schema",
        "/models/demo.manifest/schema",
    ] {
        let (status, body) = call(&app, Method::GET, uri, None).await;
        assert_eq!(status, StatusCode::NOT_FOUND, "{uri}");
        assert_eq!(body["error"]["code"], "not-found");
    }
}

#[tokio::test]
async fn query_posterior_and_intervention() {
    let dir = demo_dir();
    let app = app(dir.path());
    let (status, body) = call(
        &app,
        Method::POST,
        "/models/demo/query",
        Some(json!({"evidence": {}, "target": {"variable": "Y", "state": "y1"}})),
    )
    .await;
    assert_eq!(status, StatusCode::OK);
    assert!((body["probability"].as_f64().unwrap() - 0.41).abs() < 1e-15);
    assert_eq!(body["risk_group"], "High");
    assert_eq!(body["distribution"]["states"], json!(["y0", "y1"]));

    let (_, body) = call(
        &app,
        Method::POST,
        "/models/demo/query",
        Some(json!({"do": {"X": "x1"}, "target": {"variable": "Y", "state": "y1"}})),
    )
    .await;
    assert_eq!(body["probability"].as_f64().unwrap(), 0.9);
}

#[tokio::test]
async fn query_matches_library_bit_for_bit() {
    let dir = demo_dir();
    let app = app(dir.path());
    let net = parse_network(DEMO).unwrap();
    for req in [
        json!({"target": {"variable": "X", "state": "x1"}, "evidence": {"Y": "y1"}}),
        json!({"target": {"variable": "Y", "state": "y0"}, "do": {"X": "x0"}}),
    ] {
        let (_, body) = call(&app, Method::POST, "/models/demo/query", Some(req.clone())).await;
        let parsed: QueryRequest = serde_json::from_value(req).unwrap();
        let direct = run_query(&net, &RiskTable::default(), &parsed).unwrap();
        assert_eq!(body, serde_json::to_value(&direct).unwrap());
        assert_eq!(
            body["probability"].as_f64().unwrap().to_bits(),
            direct.probability.to_bits()
        );
    }
}

#[tokio::test]
async fn query_errors() {
    let dir = demo_dir();
    let app = app(dir.path());
    let target = json!({"variable": "Y", "state": "y1"});
    let cases = [
        (
            "/models/point/query",
            json!({"evidence": {"X": "x1"}, "target": target}),
            StatusCode::CONFLICT,
            "inconsistent-evidence",
        ),
        (
            "/models/demo/query",
            json!({"evidence": {"Q": "q"}, "target": target}),
            StatusCode::UNPROCESSABLE_ENTITY,
            "unknown-variable",
        ),
        (
            "/models/demo/query",
            json!({"evidence": {"X": "x9"}, "target": target}),
            StatusCode::UNPROCESSABLE_ENTITY,
            "unknown-state",
        ),
        (
            "/models/demo/query",
            json!({"evidence": {"X": "x1"}, "do": {"X": "x0"}, "target": target}),
            StatusCode::UNPROCESSABLE_ENTITY,
            "evidence-intervention-overlap",
        ),
        (
            "/models/demo/query",
            json!({"evidence": {}}),
            StatusCode::UNPROCESSABLE_ENTITY,
            "invalid-request",
        ),
        (
            "/models/demo/query",
            json!({"target": target, "extra": 1}),
            StatusCode::UNPROCESSABLE_ENTITY,
            "invalid-request",
        ),
        (
            "/models/nope/query",
            json!({"target": target}),
            StatusCode::NOT_FOUND,
            "not-found",
        ),
    ];
    for (uri, body, status, code) in cases {
        let (got, resp) = call(&app, Method::POST, uri, Some(body.clone())).await;
        assert_eq!(got, status, "{body}");
        assert_eq!(resp["error"]["code"], code, "{body}");
    }

    let req = Request::post("/models/demo/query")
        .body(Body::from("{not json"))
        .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    assert_eq!(resp.status(), StatusCode::UNPROCESSABLE_ENTITY);
}

#[tokio::test]
async fn bound_jobs_run_to_completion() {
    let dir = demo_dir();
    let app = app(dir.path());
    let (status, started) = call(
        &app,
        Method::POST,
        "/models/demo/bounds",
        Some(json!({
            "space": {"interventions": [{"variable": "X", "values": ["x0", "x1"]}]},
            "target": {"variable": "Y", "state": "y1"},
            "direction": "max"
        })),
    )
    .await;
    assert_eq!(status, StatusCode::ACCEPTED);
    assert_eq!(started["progress"]["total"], 3);
    let done = wait_for(&app, started["id"].as_str().unwrap()).await;
    assert_eq!(done["status"], "done");
    assert_eq!(done["progress"], json!({"explored": 3, "total": 3}));
    assert_eq!(done["result"]["value"].as_f64().unwrap(), 0.9);
    assert_eq!(done["result"]["witness"], json!({"X": "x1"}));
    assert_eq!(done["result"]["rendered"], "0.900000 witness: X=x1");

    // Target and space default to the manifest.
    let (_, started) = call(
        &app,
        Method::POST,
        "/models/demo/bounds",
        Some(json!({"direction": "min"})),
    )
    .await;
    let done = wait_for(&app, started["id"].as_str().unwrap()).await;
    assert_eq!(done["result"]["rendered"], "0.200000 witness: X=x0");

    let (_, started) = call(
        &app,
        Method::POST,
        "/models/demo/bounds",
        Some(json!({"space": {"interventions": []}, "target": {"variable": "Y", "state": "y1"}})),
    )
    .await;
    let done = wait_for(&app, started["id"].as_str().unwrap()).await;
    assert!((done["result"]["value"].as_f64().unwrap() - 0.41).abs() < 1e-15);
    assert_eq!(done["result"]["witness"], json!({}));
}

#[tokio::test]
async fn bound_request_errors() {
    let dir = demo_dir();
    let capped = router(&ServiceConfig {
        limits: Limits::uniform(2),
        ..ServiceConfig::new(dir.path())
    });
    let space = json!({"interventions": [{"variable": "X", "values": ["x0", "x1"]}]});
    let (status, body) = call(
        &capped,
        Method::POST,
        "/models/demo/bounds",
        Some(json!({"space": space, "target": {"variable": "Y", "state": "y1"}})),
    )
    .await;
    assert_eq!(status, StatusCode::PAYLOAD_TOO_LARGE);
    assert_eq!(body["error"]["code"], "cap-exceeded");

    let app = app(dir.path());
    let (status, body) = call(
        &app,
        Method::POST,
        "/models/point/bounds",
        Some(json!({"space": space})),
    )
    .await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(body["error"]["code"], "invalid-request");

    let (status, _) = call(
        &app,
        Method::POST,
        "/models/demo/bounds",
        Some(json!({"space": space, "evidence": {"X": "x0"}})),
    )
    .await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);

    // Every policy inconsistent with the evidence: the job fails with the
    // engine's code.
    let (status, started) = call(
        &app,
        Method::POST,
        "/models/point/bounds",
        Some(json!({
            "space": {"interventions": [{"variable": "Y", "values": ["y0"], "may_abstain": false}]},
            "evidence": {"X": "x1"},
            "target": {"variable": "Y", "state": "y1"}
        })),
    )
    .await;
    assert_eq!(status, StatusCode::ACCEPTED);
    let failed = wait_for(&app, started["id"].as_str().unwrap()).await;
    assert_eq!(failed["status"], "failed");
    assert_eq!(failed["error"]["code"], "inconsistent-evidence");

    let (status, _) = call(&app, Method::GET, "/jobs/999999", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

/// Binary chain of `n` variables with an intervention space over the first
/// `k`, large enough that a search is still running when polled.
fn slow_model(n: usize) -> String {
    let mut vars =
        vec![json!({"name": "V0", "states": ["a", "b"], "parents": [], "cpt": [[0.5, 0.5]]})];
    for i in 1..n {
        vars.push(json!({
            "name": format!("V{i}"),
            "states": ["a", "b"],
            "parents": [format!("V{}", i - 1)],
            "cpt": [[0.6, 0.4], [0.3, 0.7]]
        }));
    }
    json!({"name": "slow", "variables": vars}).to_string()
}

#[tokio::test]
async fn one_running_job_per_model_and_cancellation() {
    let dir = model_dir(&[("slow.json", &slow_model(30)), ("demo.json", DEMO)]);
    let app = app(dir.path());
    let space: Vec<Value> = (0..12)
        .map(|i| json!({"variable": format!("V{i}"), "values": ["a", "b"]}))
        .collect();
    let req =
        json!({"space": {"interventions": space}, "target": {"variable": "V29", "state": "b"}});

    let (status, first) = call(&app, Method::POST, "/models/slow/bounds", Some(req.clone())).await;
    assert_eq!(status, StatusCode::ACCEPTED);
    let id = first["id"].as_str().unwrap().to_string();

    let (status, body) = call(&app, Method::POST, "/models/slow/bounds", Some(req.clone())).await;
    assert_eq!(status, StatusCode::TOO_MANY_REQUESTS);
    assert_eq!(body["error"]["code"], "job-limit");

    // Other models are unaffected.
    let (status, _) = call(
        &app,
        Method::POST,
        "/models/demo/bounds",
        Some(json!({"space": {"interventions": []}, "target": {"variable": "Y", "state": "y1"}})),
    )
    .await;
    assert_eq!(status, StatusCode::ACCEPTED);

    let (status, view) = call(&app, Method::GET, &format!("/jobs/{id}"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(view["status"], "running");
    assert_eq!(view["progress"]["total"], 531_441u64);

    let (status, view) = call(&app, Method::DELETE, &format!("/jobs/{id}"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(view["status"], "cancelled");
    let (status, body) = call(&app, Method::DELETE, &format!("/jobs/{id}"), None).await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_eq!(body["error"]["code"], "job-finished");

    let (status, again) = call(&app, Method::POST, "/models/slow/bounds", Some(req)).await;
    assert_eq!(status, StatusCode::ACCEPTED);
    let (status, _) = call(
        &app,
        Method::DELETE,
        &format!("/jobs/{}", again["id"].as_str().unwrap()),
        None,
    )
    .await;
    assert_eq!(status, StatusCode::OK);
}

#[tokio::test]
async fn cors_and_static_files() {
    let dir = demo_dir();
    let web = model_dir(&[("index.html", "<p>console</p>")]);
    let app = router(&ServiceConfig {
        static_dir: Some(web.path().to_path_buf()),
        ..ServiceConfig::new(dir.path())
    });
    let req = Request::get("/models")
        .header(header::ORIGIN, "http://localhost:5173")
        .body(Body::empty())
        .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    assert_eq!(resp.headers()[header::ACCESS_CONTROL_ALLOW_ORIGIN], "*");

    let (status, body) = call(&app, Method::GET, "/index.html", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body, Value::String("<p>console</p>".into()));

    let locked = router(&ServiceConfig {
        cors_origin: Some("http://console.local".into()),
        ..ServiceConfig::new(dir.path())
    });
    let req = Request::get("/models")
        .header(header::ORIGIN, "http://console.local")
        .body(Body::empty())
        .unwrap();
    let resp = locked.oneshot(req).await.unwrap();
    assert_eq!(
        resp.headers()[header::ACCESS_CONTROL_ALLOW_ORIGIN],
        "http://console.local"
    );
}

#[tokio::test]
async fn edited_model_files_are_reloaded() {
    let dir = model_dir(&[("m.json", DEMO)]);
    let app = app(dir.path());
    let target = json!({"target": {"variable": "Y", "state": "y1"}});
    let (_, before) = call(&app, Method::POST, "/models/m/query", Some(target.clone())).await;
    assert!((before["probability"].as_f64().unwrap() - 0.41).abs() < 1e-15);
    std::fs::write(
        dir.path().join("m.json"),
        DEMO.replace("[0.7, 0.3]", "[0.55, 0.45]"),
    )
    .unwrap();
    let (_, after) = call(&app, Method::POST, "/models/m/query", Some(target)).await;
    assert!((after["probability"].as_f64().unwrap() - 0.515).abs() < 1e-15);
}
