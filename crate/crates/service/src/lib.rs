//! HTTP front end for elections: create them, collect ballots voter by
//! voter, and recompute the budget on every read.
//!
//! | method | path | body | result |
//! |---|---|---|---|
//! | POST | `/elections` | election file without ballots | `{"id": ...}` |
//! | GET | `/elections/{id}` | | election file with all ballots |
//! | PUT | `/elections/{id}/ballots/{voter}[?section=S]` | one ballot | stored, replacing the voter's earlier one |
//! | GET | `/elections/{id}/ballots/{voter}[?section=S]` | | the stored ballot |
//! | GET | `/elections/{id}/budget` | | budget and ranking |
//! | GET | `/elections/{id}/hierarchy` | | section budgets and consolidation |
//! | GET | `/elections/{id}/sections/rankings` | | ranking of each section |
//! | POST | `/elections/{id}/whatif` | `{"limits": {...}}` | budget of each section |
//! | GET | `/elections/{id}/verify` | | oracle report |
//!
//! Errors are `{"error": message}` with 400 for malformed input, 404 for an
//! unknown election, ballot or section, 409 when a ballot does not fit the
//! election's mode or ballot kind, and 422 for infeasible parameters and
//! oracle refusals.

mod error;
mod store;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use dembudget::format::{parse_election, BallotDoc, ElectionFile};
use dembudget::{to_canonical_json, Election};
use serde::{Deserialize, Serialize};
use uuid::Uuid;

pub use error::ApiError;
pub use store::Store;

type ApiResult = Result<Response, ApiError>;

pub fn json_response<T: Serialize>(status: StatusCode, body: &T) -> Response {
    (
        status,
        [(header::CONTENT_TYPE, "application/json")],
        to_canonical_json(body),
    )
        .into_response()
}

fn ok<T: Serialize>(body: &T) -> ApiResult {
    Ok(json_response(StatusCode::OK, body))
}

/// Builds the router over a store opened at `data_dir`.
pub fn app(data_dir: impl Into<PathBuf>) -> std::io::Result<Router> {
    Ok(router(Arc::new(Store::open(data_dir)?)))
}

pub fn router(store: Arc<Store>) -> Router {
    Router::new()
        .route("/elections", post(create))
        .route("/elections/{id}", get(show))
        .route("/elections/{id}/ballots/{voter}", get(show_ballot).put(put_ballot))
        .route("/elections/{id}/budget", get(budget))
        .route("/elections/{id}/hierarchy", get(hierarchy))
        .route("/elections/{id}/sections/rankings", get(section_rankings))
        .route("/elections/{id}/whatif", post(what_if))
        .route("/elections/{id}/verify", get(verify))
        .with_state(store)
}

fn parse_id(id: &str) -> Result<Uuid, ApiError> {
    Uuid::parse_str(id).map_err(|_| ApiError::NotFound(format!("no election {id:?}")))
}

fn entry(store: &Store, id: &str) -> Result<Arc<std::sync::Mutex<store::Entry>>, ApiError> {
    store
        .get(parse_id(id)?)
        .ok_or_else(|| ApiError::NotFound(format!("no election {id:?}")))
}

fn snapshot(store: &Store, id: &str) -> Result<ElectionFile, ApiError> {
    Ok(entry(store, id)?.lock().unwrap().snapshot())
}

/// Compiles the current state and runs `f` off the async workers.
async fn compute<T, F>(store: &Store, id: &str, f: F) -> ApiResult
where
    T: Serialize + Send + 'static,
    F: FnOnce(Election) -> Result<T, ApiError> + Send + 'static,
{
    let file = snapshot(store, id)?;
    let out = tokio::task::spawn_blocking(move || f(file.compile()?))
        .await
        .map_err(|e| ApiError::Internal(e.to_string()))??;
    ok(&out)
}

fn require_sections(e: &Election) -> Result<(), ApiError> {
    match e.hierarchy {
        Some(_) => Ok(()),
        None => Err(ApiError::Conflict("election has no sections".into())),
    }
}

#[derive(Serialize)]
struct Created {
    id: String,
}

async fn create(State(store): State<Arc<Store>>, body: Bytes) -> ApiResult {
    let file = parse_election(&body)?;
    if !file.ballots.is_empty() {
        return Err(ApiError::BadRequest("ballots: submit ballots one voter at a time".into()));
    }
    if let Some(i) = file.sections.iter().flatten().position(|s| !s.ballots.is_empty()) {
        return Err(ApiError::BadRequest(format!(
            "sections[{i}].ballots: submit ballots one voter at a time"
        )));
    }
    file.compile()?;
    let id = store.create(file)?;
    tracing::info!(%id, "election created");
    Ok(json_response(StatusCode::CREATED, &Created { id: id.to_string() }))
}

async fn show(State(store): State<Arc<Store>>, Path(id): Path<String>) -> ApiResult {
    ok(&snapshot(&store, &id)?)
}

#[derive(Deserialize)]
struct BallotQuery {
    section: Option<String>,
}

#[derive(Serialize)]
struct Stored {
    voter: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    section: Option<String>,
    replaced: bool,
}

async fn put_ballot(
    State(store): State<Arc<Store>>,
    Path((id, voter)): Path<(String, String)>,
    Query(q): Query<BallotQuery>,
    body: Bytes,
) -> ApiResult {
    let mut ballot: BallotDoc =
        serde_json::from_slice(&body).map_err(|e| ApiError::BadRequest(format!("ballot: {e}")))?;
    match &ballot.voter {
        Some(v) if *v != voter => {
            return Err(ApiError::BadRequest(format!(
                "ballot names voter {v:?} but was sent for {voter:?}"
            )))
        }
        _ => ballot.voter = None,
    }
    let entry = entry(&store, &id)?;
    // Held across validation and the append so writes to one election are
    // serialized.
    let mut guard = entry.lock().unwrap();
    if let Some(s) = &q.section {
        if !guard.has_section(s) {
            return Err(ApiError::NotFound(format!("no section {s:?}")));
        }
    }
    let key = (q.section, voter);
    guard.with_ballot(Some((&key, &ballot))).compile()?;
    let replaced = guard.ballot(&key).is_some();
    guard.put_ballot(key.clone(), ballot)?;
    drop(guard);
    ok(&Stored {
        voter: key.1,
        section: key.0,
        replaced,
    })
}

async fn show_ballot(
    State(store): State<Arc<Store>>,
    Path((id, voter)): Path<(String, String)>,
    Query(q): Query<BallotQuery>,
) -> ApiResult {
    let entry = entry(&store, &id)?;
    let guard = entry.lock().unwrap();
    let key = (q.section, voter);
    match guard.ballot(&key) {
        Some(b) => ok(b),
        None => Err(ApiError::NotFound(format!("no ballot from {:?}", key.1))),
    }
}

async fn budget(State(store): State<Arc<Store>>, Path(id): Path<String>) -> ApiResult {
    compute(&store, &id, |e| {
        let out = e.run()?;
        Ok(e.budget_report(&out))
    })
    .await
}

async fn hierarchy(State(store): State<Arc<Store>>, Path(id): Path<String>) -> ApiResult {
    compute(&store, &id, |e| {
        require_sections(&e)?;
        let out = e.consolidate()?;
        Ok(e.hierarchy_report(&out)?)
    })
    .await
}

async fn section_rankings(State(store): State<Arc<Store>>, Path(id): Path<String>) -> ApiResult {
    compute(&store, &id, |e| {
        require_sections(&e)?;
        Ok(e.section_rankings_report()?)
    })
    .await
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct WhatIf {
    limits: BTreeMap<String, u64>,
}

async fn what_if(State(store): State<Arc<Store>>, Path(id): Path<String>, body: Bytes) -> ApiResult {
    let req: WhatIf =
        serde_json::from_slice(&body).map_err(|e| ApiError::BadRequest(format!("whatif: {e}")))?;
    compute(&store, &id, move |e| {
        require_sections(&e)?;
        Ok(e.what_if_report(&req.limits)?)
    })
    .await
}

async fn verify(State(store): State<Arc<Store>>, Path(id): Path<String>) -> ApiResult {
    compute(&store, &id, |e| Ok(e.verify()?)).await
}
