//! HTTP front end for editing sessions, with an on-disk session store.

mod backends;
mod config;
mod problem;
mod store;

use std::collections::{BTreeMap, HashSet};
use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex, RwLock};

use axum::body::Bytes;
use axum::extract::{DefaultBodyLimit, Path, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Json;
use base64::Engine;
use serde::{Deserialize, Serialize};
use tokio::net::TcpListener;
use veriloop_core::backend::{RecordingBackend, VisionBackend};
use veriloop_core::feedback::{ChatEntry, VerificationBundle};
use veriloop_core::image::{ImageBuffer, LabelMap};
use veriloop_core::registry::ObjectEntry;
use veriloop_core::router::PromptKind;
use veriloop_core::session::{EditSession, SessionConfig, SessionTranscript};
use veriloop_core::Error;

pub use backends::BackendSource;
pub use config::{BackendArgs, EditArgs, RoutingArg, ServeArgs, DEFAULT_QUEUE_DEPTH};
pub use problem::Problem;
pub use store::Store;

/// Upload limit for session creation; images arrive base64-encoded.
const BODY_LIMIT: usize = 64 * 1024 * 1024;

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub source: BackendSource,
    pub session: SessionConfig,
    pub store: Option<PathBuf>,
    pub queue_depth: usize,
}

impl ServiceConfig {
    pub fn new(source: BackendSource) -> Self {
        Self {
            source,
            session: SessionConfig::default(),
            store: None,
            queue_depth: DEFAULT_QUEUE_DEPTH,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CreateSession {
    /// Base64 of a PNG or JPEG.
    pub image: String,
    /// Base64 of a 16-bit grayscale label PNG.
    #[serde(default)]
    pub labels: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PromptRequest {
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionSummary {
    pub session_id: String,
    pub general: String,
    pub objects: Vec<ObjectEntry>,
    /// Edits in the history, including undone ones still available for redo.
    pub edits: usize,
    /// Image version currently shown; 0 is the original.
    pub cursor: usize,
    pub current_digest: String,
    pub can_undo: bool,
    pub can_redo: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EditReply {
    pub seq: u32,
    pub bundle: VerificationBundle,
    pub before_version: usize,
    pub after_version: usize,
    pub digest: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptReply {
    pub kind: PromptKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub answer: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edit: Option<EditReply>,
    /// Chat entries this prompt added.
    pub chat: Vec<ChatEntry>,
    pub state: SessionSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoryReply {
    pub seq: u32,
    pub state: SessionSummary,
}

/// Read-only copy of a session published after every change, so reads
/// never wait for a running prompt.
struct View {
    summary: SessionSummary,
    /// Index 0 is the original, then every snapshot in the history.
    images: Vec<Arc<ImageBuffer>>,
    som: Arc<ImageBuffer>,
    chat: Vec<ChatEntry>,
    transcript: SessionTranscript,
}

impl View {
    fn of(s: &EditSession) -> Self {
        let mut images = vec![Arc::clone(s.original())];
        images.extend(s.history().iter().map(|r| Arc::clone(&r.image_after)));
        Self {
            summary: summary(s),
            images,
            som: Arc::new(s.som_current()),
            chat: s.chat().to_vec(),
            transcript: s.transcript(),
        }
    }
}

fn summary(s: &EditSession) -> SessionSummary {
    let registry = s.registry();
    SessionSummary {
        session_id: s.id().to_string(),
        general: registry.general.clone(),
        objects: registry.entries().to_vec(),
        edits: s.history().len(),
        cursor: s.cursor(),
        current_digest: s.current_image().digest(),
        can_undo: s.cursor() > 0,
        can_redo: s.cursor() < s.history().len(),
    }
}

struct Slot {
    session: Arc<tokio::sync::Mutex<EditSession>>,
    view: RwLock<Arc<View>>,
    /// Running plus waiting writers.
    pending: AtomicUsize,
}

/// Place in a session's writer queue; released on drop.
struct Ticket(Arc<Slot>);

impl Drop for Ticket {
    fn drop(&mut self) {
        self.0.pending.fetch_sub(1, Ordering::SeqCst);
    }
}

impl Slot {
    fn new(session: EditSession) -> Self {
        Self {
            view: RwLock::new(Arc::new(View::of(&session))),
            session: Arc::new(tokio::sync::Mutex::new(session)),
            pending: AtomicUsize::new(0),
        }
    }

    fn view(&self) -> Arc<View> {
        Arc::clone(&self.view.read().unwrap())
    }

    fn enter(self: &Arc<Self>, depth: usize) -> Option<Ticket> {
        if self.pending.fetch_add(1, Ordering::SeqCst) > depth {
            self.pending.fetch_sub(1, Ordering::SeqCst);
            return None;
        }
        Some(Ticket(Arc::clone(self)))
    }
}

pub struct App {
    config: ServiceConfig,
    store: Option<Store>,
    sessions: RwLock<BTreeMap<String, Arc<Slot>>>,
    reserved: Mutex<HashSet<String>>,
}

impl std::fmt::Debug for App {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("App")
            .field("store", &self.store)
            .field("sessions", &self.sessions.read().unwrap().len())
            .finish()
    }
}

impl App {
    /// Opens the store, if any, and restores every session in it.
    pub fn new(config: ServiceConfig) -> anyhow::Result<Arc<Self>> {
        let store = config.store.as_ref().map(Store::open).transpose()?;
        let mut sessions = BTreeMap::new();
        if let Some(store) = &store {
            for id in store.ids()? {
                let backend = recording(&config.source, Some(store.wire_log(&id)))?;
                match store.load(&id, backend, config.source.inpainter()) {
                    Ok(s) => {
                        sessions.insert(id, Arc::new(Slot::new(s)));
                    }
                    Err(e) => log::warn!("skipping stored session {id}: {e}"),
                }
            }
            log::info!("restored {} sessions from {}", sessions.len(), store.root().display());
        }
        Ok(Arc::new(Self {
            config,
            store,
            sessions: RwLock::new(sessions),
            reserved: Mutex::new(HashSet::new()),
        }))
    }

    pub fn session_ids(&self) -> Vec<String> {
        self.sessions.read().unwrap().keys().cloned().collect()
    }

    pub fn router(self: Arc<Self>) -> axum::Router {
        axum::Router::new()
            .route("/health", get(|| async { "ok" }))
            .route("/sessions", post(create_session).get(list_sessions))
            .route("/sessions/{id}", get(get_session))
            .route("/sessions/{id}/prompts", post(post_prompt))
            .route("/sessions/{id}/undo", post(post_undo))
            .route("/sessions/{id}/redo", post(post_redo))
            .route("/sessions/{id}/images/{version}", get(get_image))
            .route("/sessions/{id}/chat", get(get_chat))
            .route("/sessions/{id}/transcript", get(get_transcript))
            .layer(DefaultBodyLimit::max(BODY_LIMIT))
            .with_state(self)
    }

    fn slot(&self, id: &str) -> Result<Arc<Slot>, Problem> {
        self.sessions
            .read()
            .unwrap()
            .get(id)
            .cloned()
            .ok_or_else(|| Problem::not_found(format!("no session `{id}`")))
    }

    /// Picks an unused id derived from the image digest.
    fn reserve_id(&self, image: &ImageBuffer) -> String {
        let base = image.digest()[..12].to_string();
        let sessions = self.sessions.read().unwrap();
        let mut reserved = self.reserved.lock().unwrap();
        let taken = |id: &str| {
            sessions.contains_key(id) || reserved.contains(id) || self.store.as_ref().is_some_and(|s| s.contains(id))
        };
        let mut id = base.clone();
        let mut n = 2;
        while taken(&id) {
            id = format!("{base}-{n}");
            n += 1;
        }
        reserved.insert(id.clone());
        id
    }

    fn create(&self, req: CreateSession) -> Result<SessionSummary, Problem> {
        let image = ImageBuffer::decode(&decode_b64(&req.image, "image")?).map_err(Problem::bad_request)?;
        let labels = match &req.labels {
            Some(l) => Some(LabelMap::decode_png(&decode_b64(l, "labels")?).map_err(Problem::bad_request)?),
            None => None,
        };
        if let Some(l) = &labels {
            l.check_dimensions(image.dimensions()).map_err(Problem::bad_request)?;
        }
        let id = self.reserve_id(&image);
        let result = self.open(&id, image, labels);
        self.reserved.lock().unwrap().remove(&id);
        if result.is_err() {
            if let Some(store) = &self.store {
                store.discard(&id);
            }
        }
        result
    }

    fn open(&self, id: &str, image: ImageBuffer, labels: Option<LabelMap>) -> Result<SessionSummary, Problem> {
        let wire = match &self.store {
            Some(store) => {
                store.reserve(id)?;
                Some(store.wire_log(id))
            }
            None => None,
        };
        let source = &self.config.source;
        let backend = recording(source, wire)?;
        let segmentation = source.segmentation();
        let session = EditSession::new(image, labels, segmentation.as_deref(), backend, self.config.session.clone())?
            .with_id(id)
            .with_inpainter(source.inpainter());
        if let Some(store) = &self.store {
            store.save(&session)?;
        }
        let slot = Arc::new(Slot::new(session));
        let summary = slot.view().summary.clone();
        self.sessions.write().unwrap().insert(id.to_string(), slot);
        log::info!("created session {id}");
        Ok(summary)
    }

    /// Persists and republishes after a change.
    fn commit(&self, slot: &Slot, session: &EditSession) -> Result<(), Problem> {
        *slot.view.write().unwrap() = Arc::new(View::of(session));
        if let Some(store) = &self.store {
            store.save(session)?;
        }
        Ok(())
    }

    /// Runs `op` as the session's single writer.
    async fn write<T, F>(self: Arc<Self>, id: &str, op: F) -> Result<T, Problem>
    where
        T: Send + 'static,
        F: FnOnce(&mut EditSession) -> Result<T, Error> + Send + 'static,
    {
        let slot = self.slot(id)?;
        let ticket = slot.enter(self.config.queue_depth).ok_or_else(Problem::queue_full)?;
        let mut session = Arc::clone(&slot.session).lock_owned().await;
        tokio::task::spawn_blocking(move || {
            let _ticket = ticket;
            let result = op(&mut session);
            self.commit(&slot, &session)?;
            result.map_err(Problem::from)
        })
        .await
        .map_err(Problem::internal)?
    }
}

fn recording(source: &BackendSource, wire: Option<PathBuf>) -> veriloop_core::Result<Arc<dyn VisionBackend>> {
    let inner = source.backend()?;
    Ok(match wire {
        Some(path) => Arc::new(RecordingBackend::with_log_file(inner, path)?),
        None => inner,
    })
}

fn decode_b64(text: &str, field: &str) -> Result<Vec<u8>, Problem> {
    base64::engine::general_purpose::STANDARD
        .decode(text.trim())
        .map_err(|e| Problem::new(StatusCode::BAD_REQUEST, "InvalidImage", format!("{field} is not base64: {e}")))
}

fn parse<T: serde::de::DeserializeOwned>(body: &[u8]) -> Result<T, Problem> {
    serde_json::from_slice(body)
        .map_err(|e| Problem::new(StatusCode::BAD_REQUEST, "BadRequest", format!("invalid request body: {e}")))
}

async fn create_session(State(app): State<Arc<App>>, body: Bytes) -> Result<Response, Problem> {
    let req: CreateSession = parse(&body)?;
    let summary = tokio::task::spawn_blocking(move || app.create(req))
        .await
        .map_err(Problem::internal)??;
    Ok((StatusCode::CREATED, Json(summary)).into_response())
}

async fn list_sessions(State(app): State<Arc<App>>) -> Json<Vec<SessionSummary>> {
    let slots: Vec<Arc<Slot>> = app.sessions.read().unwrap().values().cloned().collect();
    Json(slots.iter().map(|s| s.view().summary.clone()).collect())
}

async fn get_session(State(app): State<Arc<App>>, Path(id): Path<String>) -> Result<Json<SessionSummary>, Problem> {
    Ok(Json(app.slot(&id)?.view().summary.clone()))
}

async fn post_prompt(
    State(app): State<Arc<App>>,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<Json<PromptReply>, Problem> {
    let req: PromptRequest = parse(&body)?;
    let reply = app
        .write(&id, move |s| {
            let r = s.submit_prompt(&req.text)?;
            let edit = r.edit.map(|(seq, bundle)| EditReply {
                seq,
                bundle,
                before_version: s.cursor() - 1,
                after_version: s.cursor(),
                digest: s.current_image().digest(),
            });
            Ok(PromptReply {
                kind: r.routed.kind,
                answer: r.answer,
                edit,
                chat: r.chat,
                state: summary(s),
            })
        })
        .await?;
    Ok(Json(reply))
}

async fn post_undo(State(app): State<Arc<App>>, Path(id): Path<String>) -> Result<Json<HistoryReply>, Problem> {
    let reply = app
        .write(&id, |s| {
            let seq = s.undo()?;
            Ok(HistoryReply { seq, state: summary(s) })
        })
        .await?;
    Ok(Json(reply))
}

async fn post_redo(State(app): State<Arc<App>>, Path(id): Path<String>) -> Result<Json<HistoryReply>, Problem> {
    let reply = app
        .write(&id, |s| {
            let seq = s.redo()?;
            Ok(HistoryReply { seq, state: summary(s) })
        })
        .await?;
    Ok(Json(reply))
}

/// `original`, `current`, `som-current` or a version number.
async fn get_image(
    State(app): State<Arc<App>>,
    Path((id, version)): Path<(String, String)>,
) -> Result<Response, Problem> {
    let view = app.slot(&id)?.view();
    let (image, digest) = match version.as_str() {
        "original" => (Arc::clone(&view.images[0]), view.images[0].digest()),
        "current" => (Arc::clone(&view.images[view.summary.cursor]), view.summary.current_digest.clone()),
        "som-current" => (Arc::clone(&view.som), view.summary.current_digest.clone()),
        v => {
            let img = v
                .parse::<usize>()
                .ok()
                .and_then(|n| view.images.get(n))
                .ok_or_else(|| Problem::not_found(format!("session `{id}` has no image version `{v}`")))?;
            (Arc::clone(img), img.digest())
        }
    };
    let png = tokio::task::spawn_blocking(move || image.encode_png())
        .await
        .map_err(Problem::internal)?;
    Ok((
        [(header::CONTENT_TYPE, "image/png".to_string()), (IMAGE_DIGEST_HEADER, digest)],
        png,
    )
        .into_response())
}

/// Digest of the underlying image; for `som-current` that is the current image.
pub const IMAGE_DIGEST_HEADER: header::HeaderName = header::HeaderName::from_static("x-image-digest");

async fn get_chat(State(app): State<Arc<App>>, Path(id): Path<String>) -> Result<Json<Vec<ChatEntry>>, Problem> {
    Ok(Json(app.slot(&id)?.view().chat.clone()))
}

async fn get_transcript(State(app): State<Arc<App>>, Path(id): Path<String>) -> Result<Response, Problem> {
    let view = app.slot(&id)?.view();
    Ok(([(header::CONTENT_TYPE, "application/json")], view.transcript.to_json()).into_response())
}

/// Serves until the listener fails.
pub async fn serve(app: Arc<App>, listener: TcpListener) -> std::io::Result<()> {
    axum::serve(listener, app.router()).await
}
