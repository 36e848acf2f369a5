use std::sync::Arc;

use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use dembudget_service::{router, Store};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tempfile::TempDir;
use tower::ServiceExt;

struct Server {
    dir: TempDir,
    app: Router,
}

impl Server {
    fn new() -> Server {
        let dir = tempfile::tempdir().unwrap();
        let app = router(Arc::new(Store::open(dir.path()).unwrap()));
        Server { dir, app }
    }

    fn reopen(&self) -> Router {
        router(Arc::new(Store::open(self.dir.path()).unwrap()))
    }

    async fn call(&self, method: Method, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
        call(&self.app, method, uri, body).await
    }

    async fn create(&self, election: Value) -> String {
        let (status, body) = self.call(Method::POST, "/elections", Some(election)).await;
        assert_eq!(status, StatusCode::CREATED, "{body}");
        body["id"].as_str().unwrap().to_string()
    }

    async fn vote(&self, id: &str, voter: &str, ballot: Value) -> (StatusCode, Value) {
        self.call(Method::PUT, &format!("/elections/{id}/ballots/{voter}"), Some(ballot)).await
    }
}

async fn call(app: &Router, method: Method, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let (status, text) = call_raw(app, method, uri, body.map(|b| b.to_string())).await;
    (status, serde_json::from_str(&text).unwrap())
}

async fn call_raw(app: &Router, method: Method, uri: &str, body: Option<String>) -> (StatusCode, String) {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(body.map(Body::from).unwrap_or_else(Body::empty))
        .unwrap();
    let res = app.clone().oneshot(req).await.unwrap();
    let status = res.status();
    let bytes = res.into_body().collect().await.unwrap().to_bytes();
    (status, String::from_utf8(bytes.to_vec()).unwrap())
}

fn example1() -> Value {
    json!({
        "proposal": {"items": [
            {"id": "a", "cost": 1}, {"id": "b", "cost": 2}, {"id": "c", "cost": 4}]},
        "limit": 3,
        "previous_budget": ["a"]
    })
}

fn sections() -> Value {
    json!({
        "sections": [
            {"id": "A", "proposal": {"items": [{"id": "a1", "cost": 1}, {"id": "a2", "cost": 1}]}},
            {"id": "B", "proposal": {"items": [{"id": "b", "cost": 1}]}}
        ],
        "limit": 2
    })
}

#[tokio::test]
async fn example1_budget_over_http() {
    let s = Server::new();
    let id = s.create(example1()).await;
    assert_eq!(s.vote(&id, "v1", json!({"linear": ["a", "b", "c"]})).await.0, StatusCode::OK);
    assert_eq!(s.vote(&id, "v2", json!({"linear": ["c", "a", "b"]})).await.0, StatusCode::OK);
    let (status, body) = s.call(Method::GET, &format!("/elections/{id}/budget"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["budget"], json!(["a", "b"]));
    assert_eq!(body["ranking"], json!([["a", "c"], ["b"]]));
}

#[tokio::test]
async fn budget_reads_are_idempotent() {
    let s = Server::new();
    let id = s.create(example1()).await;
    s.vote(&id, "v1", json!({"linear": ["a", "b", "c"]})).await;
    let uri = format!("/elections/{id}/budget");
    let first = call_raw(&s.app, Method::GET, &uri, None).await;
    for _ in 0..3 {
        assert_eq!(call_raw(&s.app, Method::GET, &uri, None).await, first);
    }
}

#[tokio::test]
async fn replacing_a_ballot_changes_the_budget() {
    let s = Server::new();
    let mut election = example1();
    election["limit"] = json!(4);
    election.as_object_mut().unwrap().remove("previous_budget");
    let id = s.create(election).await;
    let uri = format!("/elections/{id}/budget");

    let (_, body) = s.vote(&id, "v1", json!({"linear": ["c", "a", "b"]})).await;
    assert_eq!(body["replaced"], json!(false));
    assert_eq!(s.call(Method::GET, &uri, None).await.1["budget"], json!(["c"]));

    let (status, body) = s.vote(&id, "v1", json!({"linear": ["a", "b", "c"]})).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["replaced"], json!(true));
    assert_eq!(s.call(Method::GET, &uri, None).await.1["budget"], json!(["a", "b"]));
    let (_, file) = s.call(Method::GET, &format!("/elections/{id}"), None).await;
    assert_eq!(file["ballots"], json!([{"voter": "v1", "linear": ["a", "b", "c"]}]));
}

#[tokio::test]
async fn ballot_round_trip() {
    let s = Server::new();
    let id = s.create(example1()).await;
    let ballot = json!({"partition": [["b"], ["a", "c"]]});
    s.vote(&id, "v9", ballot.clone()).await;
    let (status, back) = s.call(Method::GET, &format!("/elections/{id}/ballots/v9"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(back, ballot);
}

#[tokio::test]
async fn hierarchy_what_if() {
    let s = Server::new();
    let id = s.create(sections()).await;
    for (voter, order) in [("v1", ["a1", "a2", "b"]), ("v2", ["a1", "b", "a2"]), ("v3", ["a2", "b", "a1"])] {
        assert_eq!(s.vote(&id, voter, json!({"linear": order})).await.0, StatusCode::OK);
        let a: Vec<&str> = order.iter().copied().filter(|x| x.starts_with('a')).collect();
        let uri = format!("/elections/{id}/ballots/{voter}?section=A");
        assert_eq!(s.call(Method::PUT, &uri, Some(json!({"linear": a}))).await.0, StatusCode::OK);
        let uri = format!("/elections/{id}/ballots/{voter}?section=B");
        assert_eq!(s.call(Method::PUT, &uri, Some(json!({"linear": ["b"]}))).await.0, StatusCode::OK);
    }

    let whatif = format!("/elections/{id}/whatif");
    let (status, body) = s.call(Method::POST, &whatif, Some(json!({"limits": {"A": 2, "B": 0}}))).await;
    assert_eq!(status, StatusCode::OK, "{body}");
    assert_eq!(body["sections"][0]["budget"], json!(["a1", "a2"]));
    assert_eq!(body["sections"][1]["budget"], json!([]));
    let (_, body) = s.call(Method::POST, &whatif, Some(json!({"limits": {"A": 1, "B": 1}}))).await;
    assert_eq!(body["sections"][0]["budget"], json!(["a1"]));
    assert_eq!(body["sections"][1]["budget"], json!(["b"]));

    let (status, body) = s.call(Method::GET, &format!("/elections/{id}/hierarchy"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["direct"]["budget"], json!(["a1", "a2"]));
    assert_eq!(body["sections"][0]["budget"], json!(["a1"]));
    assert_eq!(body["sections"][1]["budget"], json!(["b"]));

    let (status, body) = s.call(Method::GET, &format!("/elections/{id}/sections/rankings"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body[0]["linearized"], json!(["a1", "a2"]));

    let (status, _) = s.call(Method::POST, &whatif, Some(json!({"limits": {"C": 1}}))).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
}

#[tokio::test]
async fn verify_reports_and_refuses() {
    let s = Server::new();
    let id = s.create(example1()).await;
    s.vote(&id, "v1", json!({"linear": ["a", "b", "c"]})).await;
    let (status, body) = s.call(Method::GET, &format!("/elections/{id}/verify"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["smith_member"], json!(true));

    let items: Vec<Value> = (0..21).map(|i| json!({"id": format!("x{i}"), "cost": 1})).collect();
    let big = s.create(json!({"proposal": {"items": items}, "limit": 2})).await;
    let (status, body) = s.call(Method::GET, &format!("/elections/{big}/verify"), None).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert!(body["error"].as_str().unwrap().contains("refused"));
}

#[tokio::test]
async fn status_codes() {
    let s = Server::new();
    let (status, body) = s.call(Method::POST, "/elections", Some(json!({"proposal": {"items": []}, "limit": 1}))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert!(body["error"].as_str().unwrap().starts_with("proposal.items"), "{body}");
    let (status, _) = call_raw(&s.app, Method::POST, "/elections", Some("{".into())).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let mut with_ballots = example1();
    with_ballots["ballots"] = json!([{"linear": ["a", "b", "c"]}]);
    assert_eq!(s.call(Method::POST, "/elections", Some(with_ballots)).await.0, StatusCode::BAD_REQUEST);

    let missing = "00000000-0000-4000-8000-000000000000";
    assert_eq!(s.call(Method::GET, &format!("/elections/{missing}/budget"), None).await.0, StatusCode::NOT_FOUND);
    assert_eq!(s.call(Method::GET, "/elections/../budget", None).await.0, StatusCode::NOT_FOUND);

    let id = s.create(example1()).await;
    assert_eq!(s.vote(&id, "v1", json!({"linear": ["a", "z"]})).await.0, StatusCode::BAD_REQUEST);
    assert_eq!(s.vote(&id, "v1", json!({"voter": "v2", "linear": ["a"]})).await.0, StatusCode::BAD_REQUEST);
    // Copy counts need a quantitative proposal.
    assert_eq!(
        s.vote(&id, "v1", json!({"partition": [[["a", 2]]]})).await.0,
        StatusCode::BAD_REQUEST
    );
    s.vote(&id, "v1", json!({"linear": ["a", "b", "c"]})).await;
    assert_eq!(s.vote(&id, "v2", json!({"partial": [["a", "b"]]})).await.0, StatusCode::CONFLICT);
    assert_eq!(s.call(Method::GET, &format!("/elections/{id}/sections/rankings"), None).await.0, StatusCode::CONFLICT);
    let uri = format!("/elections/{id}/ballots/v1?section=A");
    assert_eq!(s.call(Method::PUT, &uri, Some(json!({"linear": ["a"]}))).await.0, StatusCode::NOT_FOUND);

    let quant = s
        .create(json!({"proposal": {"mode": "quantitative", "items": [{"id": "s", "cum_cost": [1, 2]}]}, "limit": 2}))
        .await;
    assert_eq!(s.vote(&quant, "v1", json!({"partial": [["s", "s"]]})).await.0, StatusCode::CONFLICT);
    let (status, _) = s.call(
        Method::POST,
        "/elections",
        Some(json!({"proposal": {"items": [{"id": "a", "cost": 1}]}, "limit": 1, "previous_budget": ["a", "a"]})),
    )
    .await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn store_survives_a_restart() {
    let s = Server::new();
    let id = s.create(example1()).await;
    s.vote(&id, "v1", json!({"linear": ["a", "b", "c"]})).await;
    s.vote(&id, "v2", json!({"linear": ["b", "a", "c"]})).await;
    s.vote(&id, "v2", json!({"linear": ["c", "a", "b"]})).await;
    let uri = format!("/elections/{id}/budget");
    let before = call_raw(&s.app, Method::GET, &uri, None).await;

    let app = s.reopen();
    assert_eq!(call_raw(&app, Method::GET, &uri, None).await, before);
    let (_, file) = call(&app, Method::GET, &format!("/elections/{id}"), None).await;
    assert_eq!(file["ballots"].as_array().unwrap().len(), 2);
}

#[tokio::test]
async fn torn_final_record_is_dropped() {
    let s = Server::new();
    let id = s.create(example1()).await;
    s.vote(&id, "v1", json!({"linear": ["a", "b", "c"]})).await;
    let log = s.dir.path().join(format!("{id}.jsonl"));
    let mut text = std::fs::read_to_string(&log).unwrap();
    text.push_str(r#"{"type":"ballot","voter":"v2","bal"#);
    std::fs::write(&log, text).unwrap();

    let app = s.reopen();
    let (_, file) = call(&app, Method::GET, &format!("/elections/{id}"), None).await;
    assert_eq!(file["ballots"].as_array().unwrap().len(), 1);
    // Later appends land on a clean line.
    let (status, _) = call(&app, Method::PUT, &format!("/elections/{id}/ballots/v3"), Some(json!({"linear": ["c", "b", "a"]}))).await;
    assert_eq!(status, StatusCode::OK);
    let app = s.reopen();
    let (_, file) = call(&app, Method::GET, &format!("/elections/{id}"), None).await;
    assert_eq!(file["ballots"].as_array().unwrap().len(), 2);
}

#[tokio::test]
async fn concurrent_voters_all_persist() {
    let s = Arc::new(Server::new());
    let id = s.create(example1()).await;
    let tasks: Vec<_> = (0..16)
        .map(|i| {
            let (s, id) = (s.clone(), id.clone());
            tokio::spawn(async move {
                let order = if i % 2 == 0 { ["a", "b", "c"] } else { ["c", "b", "a"] };
                s.vote(&id, &format!("v{i:02}"), json!({"linear": order})).await.0
            })
        })
        .collect();
    for t in tasks {
        assert_eq!(t.await.unwrap(), StatusCode::OK);
    }
    let app = s.reopen();
    let (_, file) = call(&app, Method::GET, &format!("/elections/{id}"), None).await;
    assert_eq!(file["ballots"].as_array().unwrap().len(), 16);
}
