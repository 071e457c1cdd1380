//! Classifier evaluation as background jobs. The first request for a
//! parameter set starts the job and answers `running` with a token; later
//! requests with the same parameters poll it.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::{Deserialize, Serialize};

use idwatch::mlpipe::{build_labeled_sets, evaluate_all, ClassifierKind, LabelTask, MlReport};
use idwatch::store::RoundSelector;

use crate::{read, ApiError, AppState, ErrorBody};

#[derive(Debug, Clone, Default, Deserialize)]
pub struct MlQuery {
    pub task: Option<String>,
    pub classifier: Option<String>,
    pub splits: Option<usize>,
    pub folds: Option<usize>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum MlJobStatus {
    Running { token: String },
    Done { token: String, report: MlReport },
    Failed { token: String, error: ErrorBody },
}

#[derive(Default)]
pub(crate) struct Jobs(Arc<Mutex<HashMap<String, MlJobStatus>>>);

impl Jobs {
    fn set(&self, token: &str, status: MlJobStatus) {
        self.0
            .lock()
            .unwrap_or_else(|e| e.into_inner())
            .insert(token.to_string(), status);
    }
}

pub(crate) async fn ml_report(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Query(q): Query<MlQuery>,
) -> Result<Response, ApiError> {
    let project = state.project(&id)?;
    let task: LabelTask = q.task.as_deref().unwrap_or("relevance").parse()?;
    let kind: ClassifierKind = q.classifier.as_deref().unwrap_or("logreg").parse()?;
    let mut config = state.ml_defaults.as_ref().clone();
    if let Some(s) = q.splits {
        config.splits = s;
    }
    if let Some(f) = q.folds {
        config.folds = f;
    }
    if let Some(s) = q.seed {
        config.seed = s;
    }
    if config.splits == 0 || config.folds < 2 {
        return Err(ApiError::bad_request("splits must be >= 1 and folds >= 2"));
    }
    let token = format!(
        "ml-{}-{}-s{}-k{}-seed{}",
        task.as_str(),
        kind.as_str(),
        config.splits,
        config.folds,
        config.seed
    );

    {
        let mut jobs = project.ml_jobs.0.lock().unwrap_or_else(|e| e.into_inner());
        if let Some(status) = jobs.get(&token) {
            let code = match status {
                MlJobStatus::Running { .. } => StatusCode::ACCEPTED,
                _ => StatusCode::OK,
            };
            return Ok((code, Json(status.clone())).into_response());
        }
        jobs.insert(
            token.clone(),
            MlJobStatus::Running {
                token: token.clone(),
            },
        );
    }

    let job_project = project.clone();
    let job_token = token.clone();
    tokio::task::spawn_blocking(move || {
        // Copy what the job needs so the store lock is not held while training.
        let (documents, labeled) = {
            let store = read(&job_project.store);
            let annotations: Vec<_> = store
                .annotations(RoundSelector::Current)
                .into_iter()
                .map(|s| &s.annotation)
                .collect();
            let labeled = build_labeled_sets(&annotations).get(task).clone();
            (store.documents().to_vec(), labeled)
        };
        let outcome = evaluate_all(&[kind], &documents, &labeled, &config);
        let status = match outcome {
            Ok(report) => MlJobStatus::Done {
                token: job_token.clone(),
                report,
            },
            Err(e) => MlJobStatus::Failed {
                token: job_token.clone(),
                error: ApiError::from(e).body,
            },
        };
        job_project.ml_jobs.set(&job_token, status);
    });

    Ok((StatusCode::ACCEPTED, Json(MlJobStatus::Running { token })).into_response())
}
