use std::collections::BTreeMap;
use std::net::SocketAddr;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use mrweb_core::iqa::RatingRecord;
use mrweb_core::raster::RasterImage;
use mrweb_core::resource::ResourceList;
use mrweb_gen::PromptStrategy;
use serde::Deserialize;
use tokio::sync::{oneshot, Semaphore};

use crate::api::{ApiError, GenerateRequest, JobCreated, JobState, JobStatus, PageSummary, ValidationFailure};
use crate::error::Error;
use crate::ops::{self, RatingOutcome};
use crate::workspace::{atomic_write, Workspace};

#[derive(Debug, Clone, Default)]
pub struct ServeOptions {
    /// Used instead of reading the configured credential variable.
    pub api_key: Option<String>,
}

struct AppState {
    ws: Workspace,
    options: ServeOptions,
    ratings: tokio::sync::Mutex<()>,
    jobs: Mutex<BTreeMap<u64, JobStatus>>,
    next_job: AtomicU64,
    slots: Arc<Semaphore>,
}

type Shared = Arc<AppState>;

fn error(status: StatusCode, message: impl ToString) -> Response {
    (status, Json(ApiError { error: message.to_string() })).into_response()
}

impl IntoResponse for Error {
    fn into_response(self) -> Response {
        let status = if self.is_not_found() {
            StatusCode::NOT_FOUND
        } else {
            StatusCode::INTERNAL_SERVER_ERROR
        };
        error(status, self)
    }
}

type Reply = Result<Response, Error>;

pub fn router(ws: Workspace, options: ServeOptions) -> Router {
    let slots = Arc::new(Semaphore::new(ws.config.max_in_flight));
    let state = Arc::new(AppState {
        ws,
        options,
        ratings: tokio::sync::Mutex::new(()),
        jobs: Mutex::new(BTreeMap::new()),
        next_job: AtomicU64::new(1),
        slots,
    });
    Router::new()
        .route("/api/pages", get(list_pages))
        .route("/api/pages/{id}/image", get(page_image))
        .route("/api/pages/{id}/generated/{strategy}/image", get(generated_image))
        .route("/api/pages/{id}/resources", get(get_resources).put(put_resources))
        .route("/api/pages/{id}/generate", post(start_generation))
        .route("/api/rating-tasks/next", get(next_task))
        .route("/api/ratings", post(post_rating))
        .route("/api/jobs/{id}", get(job_status))
        .fallback(|| async { error(StatusCode::NOT_FOUND, "no such endpoint") })
        .with_state(state)
}

pub async fn serve(listener: tokio::net::TcpListener, ws: Workspace, options: ServeOptions) -> std::io::Result<()> {
    axum::serve(listener, router(ws, options)).await
}

/// A server on an ephemeral local port, running on its own thread until
/// dropped.
pub struct RunningServer {
    pub addr: SocketAddr,
    shutdown: Option<oneshot::Sender<()>>,
    thread: Option<std::thread::JoinHandle<()>>,
}

impl RunningServer {
    pub fn start(ws: Workspace, options: ServeOptions) -> std::io::Result<Self> {
        let listener = std::net::TcpListener::bind("127.0.0.1:0")?;
        listener.set_nonblocking(true)?;
        let addr = listener.local_addr()?;
        let (tx, rx) = oneshot::channel::<()>();
        let thread = std::thread::spawn(move || {
            let rt = tokio::runtime::Runtime::new().expect("tokio runtime");
            rt.block_on(async move {
                let listener = tokio::net::TcpListener::from_std(listener).expect("listener");
                axum::serve(listener, router(ws, options))
                    .with_graceful_shutdown(async {
                        let _ = rx.await;
                    })
                    .await
                    .expect("server runs");
            });
        });
        Ok(Self {
            addr,
            shutdown: Some(tx),
            thread: Some(thread),
        })
    }

    pub fn url(&self, path: &str) -> String {
        format!("http://{}{}", self.addr, path)
    }
}

impl Drop for RunningServer {
    fn drop(&mut self) {
        if let Some(tx) = self.shutdown.take() {
            let _ = tx.send(());
        }
        if let Some(t) = self.thread.take() {
            let _ = t.join();
        }
    }
}

fn png(bytes: Vec<u8>) -> Response {
    ([(header::CONTENT_TYPE, "image/png")], bytes).into_response()
}

fn json_bytes(bytes: Vec<u8>) -> Response {
    ([(header::CONTENT_TYPE, "application/json")], bytes).into_response()
}

fn read_existing(path: &std::path::Path) -> Result<Vec<u8>, Error> {
    std::fs::read(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::Missing(path.to_path_buf()),
        _ => e.into(),
    })
}

fn parse_strategy(s: &str) -> Result<PromptStrategy, Response> {
    s.parse().map_err(|e: mrweb_gen::Error| error(StatusCode::NOT_FOUND, e))
}

async fn list_pages(State(st): State<Shared>) -> Reply {
    let mut pages = Vec::new();
    for id in st.ws.page_ids()? {
        let image = RasterImage::open(st.ws.reference_image_path(&id)?)?;
        pages.push(PageSummary {
            width: image.width(),
            height: image.height(),
            strategies: st.ws.strategies(&id)?.iter().map(|s| s.to_string()).collect(),
            id,
        });
    }
    Ok(Json(pages).into_response())
}

async fn page_image(State(st): State<Shared>, Path(id): Path<String>) -> Reply {
    Ok(png(read_existing(&st.ws.reference_image_path(&id)?)?))
}

async fn generated_image(State(st): State<Shared>, Path((id, strategy)): Path<(String, String)>) -> Reply {
    let strategy = match parse_strategy(&strategy) {
        Ok(s) => s,
        Err(r) => return Ok(r),
    };
    Ok(png(read_existing(&st.ws.generated_dir(&id, strategy)?.join("page.png"))?))
}

async fn get_resources(State(st): State<Shared>, Path(id): Path<String>) -> Reply {
    Ok(json_bytes(read_existing(&st.ws.resources_path(&id)?)?))
}

/// Validates the upload and stores the bytes exactly as received.
async fn put_resources(State(st): State<Shared>, Path(id): Path<String>, body: Bytes) -> Reply {
    let path = st.ws.resources_path(&id)?;
    let text = match std::str::from_utf8(&body) {
        Ok(t) => t,
        Err(_) => return Ok(error(StatusCode::UNPROCESSABLE_ENTITY, "body is not UTF-8")),
    };
    let list = match ResourceList::from_json(text) {
        Ok(l) => l,
        Err(e) => {
            let failure = ValidationFailure {
                error: e.to_string(),
                violations: Vec::new(),
            };
            return Ok((StatusCode::UNPROCESSABLE_ENTITY, Json(failure)).into_response());
        }
    };
    let violations = list.validate();
    if !violations.is_empty() {
        let failure = ValidationFailure {
            error: format!("{} violation(s)", violations.len()),
            violations,
        };
        return Ok((StatusCode::UNPROCESSABLE_ENTITY, Json(failure)).into_response());
    }
    atomic_write(&path, &body)?;
    Ok(StatusCode::NO_CONTENT.into_response())
}

#[derive(Deserialize)]
struct RaterQuery {
    rater: String,
}

async fn next_task(State(st): State<Shared>, Query(q): Query<RaterQuery>) -> Reply {
    if q.rater.trim().is_empty() {
        return Ok(error(StatusCode::UNPROCESSABLE_ENTITY, "rater must not be empty"));
    }
    let _guard = st.ratings.lock().await;
    Ok(Json(ops::next_task(&st.ws, &q.rater)?).into_response())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RatingBody {
    rater: String,
    pair: String,
    score: i64,
}

async fn post_rating(State(st): State<Shared>, body: Bytes) -> Reply {
    let body: RatingBody = match serde_json::from_slice(&body) {
        Ok(b) => b,
        Err(e) => return Ok(error(StatusCode::UNPROCESSABLE_ENTITY, e)),
    };
    if body.rater.trim().is_empty() {
        return Ok(error(StatusCode::UNPROCESSABLE_ENTITY, "rater must not be empty"));
    }
    let record = match u8::try_from(body.score).map_err(|_| ()).and_then(|s| {
        RatingRecord::new(body.rater, body.pair, s).map_err(|_| ())
    }) {
        Ok(r) => r,
        Err(()) => return Ok(error(StatusCode::UNPROCESSABLE_ENTITY, format!("score {} is outside 1..=5", body.score))),
    };
    let _guard = st.ratings.lock().await;
    Ok(match ops::add_rating(&st.ws, &record)? {
        RatingOutcome::Stored => (StatusCode::CREATED, Json(record)).into_response(),
        RatingOutcome::Duplicate => error(StatusCode::CONFLICT, format!("{} already rated {}", record.rater, record.pair)),
        RatingOutcome::UnknownPair => error(StatusCode::NOT_FOUND, format!("unknown pair {:?}", record.pair)),
    })
}

async fn start_generation(State(st): State<Shared>, Path(id): Path<String>, body: Bytes) -> Reply {
    st.ws.page_dir(&id)?;
    let req: GenerateRequest = match serde_json::from_slice(&body) {
        Ok(r) => r,
        Err(e) => return Ok(error(StatusCode::UNPROCESSABLE_ENTITY, e)),
    };
    let strategy: PromptStrategy = match req.strategy.parse() {
        Ok(s) => s,
        Err(e) => return Ok(error(StatusCode::UNPROCESSABLE_ENTITY, e)),
    };
    let job = st.next_job.fetch_add(1, Ordering::SeqCst);
    st.jobs.lock().unwrap().insert(
        job,
        JobStatus {
            id: job,
            page: id.clone(),
            strategy: strategy.to_string(),
            state: JobState::Queued,
            error: None,
        },
    );
    let state = st.clone();
    tokio::spawn(async move {
        let _permit = state.slots.clone().acquire_owned().await.expect("semaphore open");
        set_job(&state, job, JobState::Running, None);
        let worker = state.clone();
        let result = tokio::task::spawn_blocking(move || {
            let chat = ops::chat_client(&worker.ws, worker.options.api_key.as_deref())?;
            ops::generate(&worker.ws, &id, strategy, &chat)
        })
        .await;
        match result {
            Ok(Ok(())) => set_job(&state, job, JobState::Done, None),
            Ok(Err(e)) => set_job(&state, job, JobState::Failed, Some(e.to_string())),
            Err(e) => set_job(&state, job, JobState::Failed, Some(e.to_string())),
        }
    });
    Ok((StatusCode::ACCEPTED, Json(JobCreated { job })).into_response())
}

fn set_job(st: &AppState, job: u64, state: JobState, error: Option<String>) {
    if let Some(j) = st.jobs.lock().unwrap().get_mut(&job) {
        j.state = state;
        j.error = error;
    }
}

async fn job_status(State(st): State<Shared>, Path(id): Path<String>) -> Reply {
    let job = id.parse::<u64>().ok().and_then(|n| st.jobs.lock().unwrap().get(&n).cloned());
    Ok(match job {
        Some(j) => Json(j).into_response(),
        None => error(StatusCode::NOT_FOUND, format!("unknown job {id:?}")),
    })
}
