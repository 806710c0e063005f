//! HTTP API over a running session.
//!
//! One worker thread owns the [`SimSession`]. Requests that change state are
//! sent to it over a channel; after each evaluation it publishes an
//! immutable [`Published`] view, and read handlers clone that `Arc` so every
//! response describes exactly one tick.

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::{mpsc, Arc, RwLock};
use std::thread;

use axum::extract::{Path as UrlPath, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use geofence_core::engine::{AlertLevel, TickSnapshot};
use geofence_core::ingest::{FenceConfig, FenceConfigPatch};
use geofence_core::raster::ColorScheme;
use geofence_core::{GeoPoint, UavState};
use serde::Serialize;
use serde_json::{json, Value};
use tokio::sync::oneshot;
use tower_http::cors::CorsLayer;

use crate::output::{encode_layers, write_tick_outputs, LayerPngs};
use crate::session::{SimError, SimSession};

#[derive(Debug, Clone, Default)]
pub struct ServiceOptions {
    /// Directory for advisory_out.txt, situation.log and the PNGs.
    pub out_dir: Option<PathBuf>,
    pub scheme: ColorScheme,
}

/// Everything the read endpoints serve, from one tick.
#[derive(Debug, Clone, Serialize)]
pub struct Published {
    pub tick: u64,
    pub uav: Option<UavState>,
    pub config: FenceConfig,
    pub snapshot: Option<TickSnapshot>,
    #[serde(skip)]
    pub pngs: Option<Arc<LayerPngs>>,
}

enum Command {
    Uav(UavState, oneshot::Sender<Result<Arc<Published>, String>>),
    Config(FenceConfig, oneshot::Sender<Result<Arc<Published>, String>>),
}

#[derive(Clone)]
struct AppState {
    current: Arc<RwLock<Arc<Published>>>,
    commands: mpsc::Sender<Command>,
}

impl AppState {
    fn current(&self) -> Arc<Published> {
        match self.current.read() {
            Ok(g) => Arc::clone(&g),
            Err(poisoned) => Arc::clone(&poisoned.into_inner()),
        }
    }
}

fn publish(session: &mut SimSession, options: &ServiceOptions) -> Result<Published, SimError> {
    let pngs = match session.render_layers(&options.scheme)? {
        Some(layers) => Some(Arc::new(encode_layers(&layers, &options.scheme)?)),
        None => None,
    };
    if let (Some(dir), Some(snap)) = (&options.out_dir, &session.last_snapshot) {
        write_tick_outputs(dir, snap, pngs.as_deref());
    }
    Ok(Published {
        tick: session.tick_count,
        uav: session.uav,
        config: session.config.clone(),
        snapshot: session.last_snapshot.clone(),
        pngs,
    })
}

fn worker(
    mut session: SimSession,
    options: ServiceOptions,
    current: Arc<RwLock<Arc<Published>>>,
    commands: mpsc::Receiver<Command>,
) {
    for cmd in commands {
        let (outcome, reply) = match cmd {
            Command::Uav(uav, reply) => (session.tick(uav).map(|_| ()), reply),
            Command::Config(cfg, reply) => (session.set_config(cfg), reply),
        };
        let result = outcome
            .and_then(|()| publish(&mut session, &options))
            .map(|p| {
                let p = Arc::new(p);
                match current.write() {
                    Ok(mut g) => *g = Arc::clone(&p),
                    Err(poisoned) => *poisoned.into_inner() = Arc::clone(&p),
                }
                p
            })
            .map_err(|e| e.to_string());
        let _ = reply.send(result);
    }
}

fn error_body(status: StatusCode, body: Value) -> Response {
    (status, Json(body)).into_response()
}

/// Field order of the UAV body, matching the UAV line: lat, lon, height,
/// heading, velocity. Errors carry the 1-based index of the bad field.
pub fn parse_uav_body(body: &Value) -> Result<UavState, (usize, String)> {
    const FIELDS: [&str; 5] = ["lat", "lon", "height_m", "heading_deg", "velocity_ms"];
    let obj = body.as_object().ok_or((0, "body must be a JSON object".to_string()))?;
    let mut v = [0.0f64; 5];
    for (i, name) in FIELDS.iter().enumerate() {
        v[i] = obj
            .get(*name)
            .and_then(Value::as_f64)
            .ok_or((i + 1, format!("`{name}` must be a number")))?;
    }
    let pos = GeoPoint::new(v[1], v[0]).map_err(|e| {
        let field = if (-90.0..=90.0).contains(&v[0]) { 2 } else { 1 };
        (field, e.to_string())
    })?;
    if v[4] < 0.0 {
        return Err((5, "`velocity_ms` must be >= 0".into()));
    }
    UavState::new(pos, v[2], v[3], v[4]).map_err(|e| (3, e.to_string()))
}

async fn dispatch(
    state: &AppState,
    make: impl FnOnce(oneshot::Sender<Result<Arc<Published>, String>>) -> Command,
) -> Result<Arc<Published>, Response> {
    let (tx, rx) = oneshot::channel();
    if state.commands.send(make(tx)).is_err() {
        return Err(error_body(
            StatusCode::SERVICE_UNAVAILABLE,
            json!({"error": "worker stopped"}),
        ));
    }
    match rx.await {
        Ok(Ok(p)) => Ok(p),
        Ok(Err(e)) => Err(error_body(StatusCode::UNPROCESSABLE_ENTITY, json!({"error": e}))),
        Err(_) => Err(error_body(
            StatusCode::SERVICE_UNAVAILABLE,
            json!({"error": "worker stopped"}),
        )),
    }
}

async fn post_uav(State(state): State<AppState>, body: String) -> Response {
    let value: Value = match serde_json::from_str(&body) {
        Ok(v) => v,
        Err(e) => return error_body(StatusCode::BAD_REQUEST, json!({"error": e.to_string(), "field": 0})),
    };
    let uav = match parse_uav_body(&value) {
        Ok(u) => u,
        Err((field, msg)) => return error_body(StatusCode::BAD_REQUEST, json!({"error": msg, "field": field})),
    };
    match dispatch(&state, |tx| Command::Uav(uav, tx)).await {
        Ok(p) => Json(json!({
            "tick": p.tick,
            "level": p.snapshot.as_ref().map_or(AlertLevel::None, |s| s.advisory.level),
        }))
        .into_response(),
        Err(r) => r,
    }
}

async fn post_config(State(state): State<AppState>, body: String) -> Response {
    let patch: FenceConfigPatch = match serde_json::from_str(&body) {
        Ok(p) => p,
        Err(e) => return error_body(StatusCode::BAD_REQUEST, json!({"error": e.to_string()})),
    };
    let base = state.current().config.clone();
    let config = match patch.apply(&base) {
        Ok(c) => c,
        Err(e) => return error_body(StatusCode::BAD_REQUEST, json!({"error": e.to_string()})),
    };
    match dispatch(&state, |tx| Command::Config(config, tx)).await {
        Ok(p) => Json(json!({"tick": p.tick, "config": p.config})).into_response(),
        Err(r) => r,
    }
}

async fn get_state(State(state): State<AppState>) -> Response {
    let p = state.current();
    Json(json!({"uav": p.uav, "tick": p.tick, "config": p.config})).into_response()
}

async fn get_situation(State(state): State<AppState>) -> Response {
    let p = state.current();
    let entries = p.snapshot.as_ref().map(|s| s.situation.as_slice()).unwrap_or_default();
    Json(json!({"tick": p.tick, "uav": p.uav, "entries": entries})).into_response()
}

async fn get_advisory(State(state): State<AppState>) -> Response {
    let p = state.current();
    let none = geofence_core::Advisory::none();
    let a = p.snapshot.as_ref().map_or(&none, |s| &s.advisory);
    Json(json!({
        "tick": p.tick,
        "level": a.level,
        "messages": a.messages,
        "eta_s": a.eta_s,
        "alert_event": a.alert_event,
    }))
    .into_response()
}

async fn get_layer(State(state): State<AppState>, UrlPath(file): UrlPath<String>) -> Response {
    let p = state.current();
    let Some(pngs) = &p.pngs else {
        return error_body(StatusCode::NOT_FOUND, json!({"error": "no tick evaluated yet"}));
    };
    let bytes = match file.as_str() {
        "reference.png" => &pngs.reference,
        "obstacles.png" => &pngs.obstacles,
        "composite.png" => &pngs.composite,
        _ => return error_body(StatusCode::NOT_FOUND, json!({"error": format!("no layer `{file}`")})),
    };
    ([(header::CONTENT_TYPE, "image/png")], bytes.clone()).into_response()
}

/// Builds the router and starts the worker. The session's current state,
/// if any, is published before the first request.
pub fn router(mut session: SimSession, options: ServiceOptions) -> Result<Router, SimError> {
    let initial = Arc::new(publish(&mut session, &options)?);
    let current = Arc::new(RwLock::new(initial));
    let (tx, rx) = mpsc::channel();
    let worker_current = Arc::clone(&current);
    thread::Builder::new()
        .name("geofence-worker".into())
        .spawn(move || worker(session, options, worker_current, rx))
        .map_err(|e| SimError::Io {
            path: PathBuf::from("<worker>"),
            source: e,
        })?;
    let state = AppState { current, commands: tx };
    Ok(Router::new()
        .route("/state", get(get_state))
        .route("/uav", post(post_uav))
        .route("/situation", get(get_situation))
        .route("/advisory", get(get_advisory))
        .route("/layers/{file}", get(get_layer))
        .route("/config", post(post_config))
        .layer(CorsLayer::permissive())
        .with_state(state))
}

/// Serves until the process ends.
pub async fn serve(
    listener: tokio::net::TcpListener,
    session: SimSession,
    options: ServiceOptions,
) -> Result<(), SimError> {
    let app = router(session, options)?;
    axum::serve(listener, app).await.map_err(|e| SimError::Io {
        path: PathBuf::from("<http>"),
        source: e,
    })
}

/// Starts the service on a background runtime; for tests and embedding.
pub fn spawn(session: SimSession, options: ServiceOptions, addr: SocketAddr) -> Result<SocketAddr, SimError> {
    let std_listener = std::net::TcpListener::bind(addr).map_err(|source| SimError::Io {
        path: PathBuf::from(addr.to_string()),
        source,
    })?;
    let local = std_listener.local_addr().map_err(|source| SimError::Io {
        path: PathBuf::from(addr.to_string()),
        source,
    })?;
    std_listener.set_nonblocking(true).map_err(|source| SimError::Io {
        path: PathBuf::from(addr.to_string()),
        source,
    })?;
    let app = router(session, options)?;
    thread::Builder::new()
        .name("geofence-http".into())
        .spawn(move || {
            let rt = match tokio::runtime::Builder::new_multi_thread()
                .enable_all()
                .worker_threads(2)
                .build()
            {
                Ok(rt) => rt,
                Err(e) => return log::error!("runtime: {e}"),
            };
            rt.block_on(async move {
                match tokio::net::TcpListener::from_std(std_listener) {
                    Ok(l) => {
                        if let Err(e) = axum::serve(l, app).await {
                            log::error!("http: {e}");
                        }
                    }
                    Err(e) => log::error!("listener: {e}"),
                }
            });
        })
        .map_err(|source| SimError::Io {
            path: PathBuf::from("<http>"),
            source,
        })?;
    Ok(local)
}
