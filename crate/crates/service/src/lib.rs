//! JSON-over-HTTP facade for annotation projects.
//!
//! | method | path | |
//! |---|---|---|
//! | GET | `/api/schema[?project=]` | annotation scheme |
//! | GET | `/api/projects/{id}/next` | oldest pending assignment of the caller |
//! | GET | `/api/documents/{id}` | one document |
//! | POST | `/api/projects/{id}/annotations` | submit an annotation |
//! | GET | `/api/projects/{id}/reports/agreement?round=&threshold=` | agreement table |
//! | GET | `/api/projects/{id}/reports/ml?task=&classifier=` | classifier evaluation, polled |
//!
//! Callers identify themselves with the `X-Annotator-Id` header and must be
//! on the project team. Errors share the [`ErrorBody`] shape.

mod error;
mod ml;

use std::collections::BTreeMap;
use std::sync::{Arc, RwLock};

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use idwatch::agreement::{store_report, AgreementConfig, AgreementReport};
use idwatch::mlpipe::EvalConfig;
use idwatch::schema::{Annotation, Document, SchemaDef};
use idwatch::store::{RoundSelector, Store};

pub use error::{ApiError, ErrorBody};
pub use ml::{MlJobStatus, MlQuery};

pub const ANNOTATOR_HEADER: &str = "x-annotator-id";

type ApiResult<T> = Result<T, ApiError>;

pub(crate) struct ProjectHandle {
    /// Single writer: every mutation goes through the write lock.
    pub store: RwLock<Store>,
    pub ml_jobs: ml::Jobs,
}

/// Shared server state: the open projects plus defaults for ML jobs.
#[derive(Clone)]
pub struct AppState {
    projects: Arc<BTreeMap<String, Arc<ProjectHandle>>>,
    schema: Arc<SchemaDef>,
    ml_defaults: Arc<EvalConfig>,
}

impl AppState {
    pub fn new(stores: Vec<Store>) -> Self {
        let projects = stores
            .into_iter()
            .map(|s| {
                let id = s.project().id.clone();
                let handle = ProjectHandle {
                    store: RwLock::new(s),
                    ml_jobs: ml::Jobs::default(),
                };
                (id, Arc::new(handle))
            })
            .collect();
        AppState {
            projects: Arc::new(projects),
            schema: Arc::new(SchemaDef::expert()),
            ml_defaults: Arc::new(EvalConfig::default()),
        }
    }

    /// Defaults applied to ML report requests that leave a parameter out.
    pub fn with_ml_defaults(mut self, config: EvalConfig) -> Self {
        self.ml_defaults = Arc::new(config);
        self
    }

    pub fn project_ids(&self) -> Vec<String> {
        self.projects.keys().cloned().collect()
    }

    fn project(&self, id: &str) -> ApiResult<Arc<ProjectHandle>> {
        self.projects
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::unknown_project(id))
    }

    /// Resolves the caller and checks team membership.
    fn member(&self, headers: &HeaderMap, id: &str) -> ApiResult<(Arc<ProjectHandle>, String)> {
        let project = self.project(id)?;
        let annotator = annotator_id(headers)?;
        let ok = read(&project.store).project().has_annotator(&annotator);
        if !ok {
            return Err(ApiError::new(
                StatusCode::FORBIDDEN,
                "unknown-annotator",
                format!("annotator {annotator:?} is not on project {id:?}"),
            ));
        }
        Ok((project, annotator))
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/api/schema", get(get_schema))
        .route("/api/projects/{id}/next", get(next_assignment))
        .route("/api/documents/{id}", get(get_document))
        .route("/api/projects/{id}/annotations", post(submit))
        .route(
            "/api/projects/{id}/reports/agreement",
            get(agreement_report),
        )
        .route("/api/projects/{id}/reports/ml", get(ml::ml_report))
        .with_state(state)
}

/// Binds `addr` and serves until the process stops.
pub async fn serve(state: AppState, addr: &str) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router(state)).await
}

fn annotator_id(headers: &HeaderMap) -> ApiResult<String> {
    headers
        .get(ANNOTATOR_HEADER)
        .and_then(|v| v.to_str().ok())
        .map(str::trim)
        .filter(|v| !v.is_empty())
        .map(str::to_string)
        .ok_or_else(|| {
            ApiError::new(
                StatusCode::FORBIDDEN,
                "missing-annotator",
                "X-Annotator-Id header is required",
            )
        })
}

pub(crate) fn read(lock: &RwLock<Store>) -> std::sync::RwLockReadGuard<'_, Store> {
    lock.read().unwrap_or_else(|e| e.into_inner())
}

fn write(lock: &RwLock<Store>) -> std::sync::RwLockWriteGuard<'_, Store> {
    lock.write().unwrap_or_else(|e| e.into_inner())
}

pub(crate) async fn blocking<T, F>(f: F) -> ApiResult<T>
where
    F: FnOnce() -> ApiResult<T> + Send + 'static,
    T: Send + 'static,
{
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()))?
}

#[derive(Debug, Deserialize)]
struct SchemaQuery {
    project: Option<String>,
}

async fn get_schema(
    State(state): State<AppState>,
    Query(q): Query<SchemaQuery>,
) -> ApiResult<Json<SchemaDef>> {
    match q.project {
        Some(id) => Ok(Json(read(&state.project(&id)?.store).schema().clone())),
        None => Ok(Json(state.schema.as_ref().clone())),
    }
}

/// Body of `GET /next`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum NextAssignment {
    Assigned {
        document: Document,
        schema: SchemaDef,
        publication_date: String,
        remaining: usize,
    },
    NoneRemaining,
}

async fn next_assignment(
    State(state): State<AppState>,
    Path(id): Path<String>,
    headers: HeaderMap,
) -> ApiResult<Json<NextAssignment>> {
    let (project, annotator) = state.member(&headers, &id)?;
    let store = read(&project.store);
    let pending: Vec<_> = store.pending_for(&annotator).collect();
    let Some(first) = pending.first() else {
        return Ok(Json(NextAssignment::NoneRemaining));
    };
    let document = store
        .document(&first.document_id)
        .cloned()
        .ok_or_else(|| idwatch::Error::DocumentNotFound(first.document_id.clone()))?;
    Ok(Json(NextAssignment::Assigned {
        publication_date: document.publication_date.to_string(),
        document,
        schema: store.schema().clone(),
        remaining: pending.len(),
    }))
}

async fn get_document(
    State(state): State<AppState>,
    Path(doc_id): Path<String>,
    headers: HeaderMap,
) -> ApiResult<Json<Document>> {
    let annotator = annotator_id(&headers)?;
    let mut found = false;
    for project in state.projects.values() {
        let store = read(&project.store);
        if let Some(doc) = store.document(&doc_id) {
            found = true;
            if store.project().has_annotator(&annotator) {
                return Ok(Json(doc.clone()));
            }
        }
    }
    if found {
        Err(ApiError::new(
            StatusCode::FORBIDDEN,
            "unknown-annotator",
            format!("annotator {annotator:?} has no access to {doc_id:?}"),
        ))
    } else {
        Err(idwatch::Error::DocumentNotFound(doc_id).into())
    }
}

/// Body of a successful submission.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Accepted {
    pub status: String,
    pub id: String,
    pub document_id: String,
}

/// Parses a submission. `annotator_id` defaults to the caller, `round` to
/// initial and `submitted_at` to now; an explicit `annotator_id` must
/// match the caller.
fn parse_submission(body: &[u8], annotator: &str) -> ApiResult<Annotation> {
    let mut value: Value = serde_json::from_slice(body)
        .map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, "parse-error", e.to_string()))?;
    let obj = value.as_object_mut().ok_or_else(|| {
        ApiError::new(
            StatusCode::BAD_REQUEST,
            "parse-error",
            "annotation must be a JSON object",
        )
    })?;
    match obj.get("annotator_id").and_then(Value::as_str) {
        Some(given) if given != annotator => {
            return Err(ApiError::new(
                StatusCode::FORBIDDEN,
                "annotator-mismatch",
                format!("body names annotator {given:?}, header {annotator:?}"),
            ))
        }
        Some(_) => {}
        None => {
            obj.insert("annotator_id".into(), json!(annotator));
        }
    }
    obj.entry("round").or_insert_with(|| json!("initial"));
    obj.entry("submitted_at")
        .or_insert_with(|| json!(chrono::Utc::now()));
    serde_json::from_value(value)
        .map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, "parse-error", e.to_string()))
}

async fn submit(
    State(state): State<AppState>,
    Path(id): Path<String>,
    headers: HeaderMap,
    body: Bytes,
) -> ApiResult<Response> {
    let (project, annotator) = state.member(&headers, &id)?;
    let annotation = parse_submission(&body, &annotator)?;
    let document_id = annotation.document_id.clone();
    let stored = blocking(move || {
        let mut store = write(&project.store);
        if store.document(&annotation.document_id).is_none() {
            return Err(idwatch::Error::DocumentNotFound(annotation.document_id.clone()).into());
        }
        Ok(store.submit(annotation)?)
    })
    .await?;
    let body = Accepted {
        status: "accepted".into(),
        id: stored,
        document_id,
    };
    Ok((StatusCode::CREATED, Json(body)).into_response())
}

#[derive(Debug, Deserialize)]
struct AgreementQuery {
    round: Option<String>,
    threshold: Option<f64>,
}

async fn agreement_report(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Query(q): Query<AgreementQuery>,
) -> ApiResult<Json<AgreementReport>> {
    let project = state.project(&id)?;
    let round: RoundSelector = q.round.as_deref().unwrap_or("current").parse()?;
    let mut config = AgreementConfig::default();
    if let Some(t) = q.threshold {
        if !(0.0..=1.0).contains(&t) {
            return Err(ApiError::bad_request(format!(
                "threshold {t} outside [0, 1]"
            )));
        }
        config = config.with_threshold(t);
    }
    let report = blocking(move || Ok(store_report(&read(&project.store), round, &config)?)).await?;
    Ok(Json(report))
}
