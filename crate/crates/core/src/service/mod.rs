//! The HTTP front end.
//!
//! | route | |
//! |---|---|
//! | `GET /` | landing page with the URL form |
//! | `GET /render?url=&preset=&scale=` | the transformed page |
//! | `GET /api/report?url=` | load times and conversion rate as JSON |
//! | `GET /api/presets` | the preset catalog as JSON |
//! | `GET /healthz` | `ok` |
//! | `/assets/` | files from `assets_dir` |

mod config;
mod pages;

use std::sync::Arc;

use axum::extract::{Query, State};
use axum::http::{header, HeaderValue, StatusCode};
use axum::response::{Html, IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use tokio::net::TcpListener;
use tokio::sync::Semaphore;
use tower_http::services::ServeDir;

use crate::eval::measure_load;
use crate::fetcher::{FetchError, Fetcher, SourceUrl};
use crate::pipeline::{transform_url, PipelineError, TransformConfig, ViewSettings};
use crate::style::{ClearPrintPreset, PresetCatalog, PresetError};

pub use config::{ConfigError, ServiceConfig, ENV_LISTEN, ENV_PUBLIC_BASE};
pub use pages::{error_page, landing_page};

/// Response header carrying the transform counters.
pub const STATS_HEADER: &str = "x-clearlens-stats";

#[derive(Debug, thiserror::Error)]
pub enum ServiceError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("cannot load presets from {path}: {message}")]
    Presets { path: String, message: String },
    #[error(transparent)]
    Preset(#[from] PresetError),
    #[error(transparent)]
    Fetch(#[from] FetchError),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
    #[error("cannot listen on {addr}: {source}")]
    Bind {
        addr: String,
        source: std::io::Error,
    },
    #[error("server error: {0}")]
    Io(#[from] std::io::Error),
}

/// Shared, read-only service state plus the transform limiter.
#[derive(Clone)]
pub struct AppState {
    inner: Arc<Inner>,
}

struct Inner {
    config: ServiceConfig,
    catalog: PresetCatalog,
    fetcher: Fetcher,
    limiter: Semaphore,
    public: SourceUrl,
}

impl AppState {
    pub fn new(config: ServiceConfig) -> Result<Self, ServiceError> {
        config.validate()?;
        let catalog = match &config.presets_file {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| ServiceError::Presets {
                    path: path.display().to_string(),
                    message: e.to_string(),
                })?;
                PresetCatalog::from_toml(&text).map_err(|e| ServiceError::Presets {
                    path: path.display().to_string(),
                    message: e.to_string(),
                })?
            }
            None => PresetCatalog::builtin(),
        };
        catalog.get(&config.default_preset)?;
        let fetcher = Fetcher::new(config.fetch.clone())?;
        let public = SourceUrl::parse(&config.public_base)
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        Ok(AppState {
            inner: Arc::new(Inner {
                limiter: Semaphore::new(config.max_concurrent_transforms),
                config,
                catalog,
                fetcher,
                public,
            }),
        })
    }

    pub fn config(&self) -> &ServiceConfig {
        &self.inner.config
    }

    pub fn catalog(&self) -> &PresetCatalog {
        &self.inner.catalog
    }

    fn default_preset(&self) -> &ClearPrintPreset {
        self.inner
            .catalog
            .get(&self.inner.config.default_preset)
            .expect("checked at startup")
    }

    /// Validates a render request into a target URL and a transform config.
    fn prepare(&self, q: &RenderQuery) -> Result<(SourceUrl, TransformConfig), Failure> {
        let raw = q
            .url
            .as_deref()
            .filter(|u| !u.trim().is_empty())
            .ok_or_else(|| Failure::bad_request("Missing address", "Add a web address to read, for example ?url=example.com."))?;
        let url = SourceUrl::parse(raw)
            .map_err(|e| Failure::bad_request("Address not accepted", &e.to_string()))?;
        if url.host().eq_ignore_ascii_case(self.inner.public.host())
            && url.port() == self.inner.public.port()
        {
            return Err(Failure::bad_request(
                "Address not accepted",
                "That address is this service itself. Enter the address of the page you want to read.",
            ));
        }
        let scale = match q.scale.as_deref().map(str::trim).filter(|s| !s.is_empty()) {
            None => None,
            Some(s) => Some(s.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| {
                Failure::bad_request("Text size not understood", &format!("{s:?} is not a number."))
            })?),
        };
        let view = ViewSettings {
            preset: q.preset.clone().filter(|p| !p.is_empty()),
            scale,
        };
        let cfg = TransformConfig::for_view(
            &self.inner.catalog,
            &self.inner.config.default_preset,
            &view,
            &self.inner.config.public_base,
            self.inner.config.fetch.clone(),
        )
        .map_err(|e| Failure::from_pipeline(&e))?;
        Ok((url, cfg))
    }
}

/// A request that could not be served.
#[derive(Debug)]
struct Failure {
    status: StatusCode,
    title: &'static str,
    message: String,
}

impl Failure {
    fn bad_request(title: &'static str, message: &str) -> Self {
        Failure {
            status: StatusCode::BAD_REQUEST,
            title,
            message: message.to_string(),
        }
    }

    fn from_pipeline(err: &PipelineError) -> Self {
        let (status, title) = match err {
            PipelineError::Fetch(FetchError::Url(_)) => {
                (StatusCode::BAD_REQUEST, "Address not accepted")
            }
            PipelineError::Preset(_) => (StatusCode::BAD_REQUEST, "Unknown colour scheme"),
            PipelineError::Fetch(FetchError::Timeout { .. }) => {
                (StatusCode::GATEWAY_TIMEOUT, "The site took too long")
            }
            PipelineError::Fetch(FetchError::BodyTooLarge { .. }) => {
                (StatusCode::PAYLOAD_TOO_LARGE, "The page is too large")
            }
            PipelineError::Fetch(FetchError::NotHtml { .. }) => {
                (StatusCode::BAD_GATEWAY, "That address is not a web page")
            }
            _ => (StatusCode::BAD_GATEWAY, "The page could not be fetched"),
        };
        Failure {
            status,
            title,
            message: err.to_string(),
        }
    }

    fn page(self, preset: &ClearPrintPreset) -> Response {
        let body = error_page(preset, self.title, &self.message);
        (self.status, Html(body)).into_response()
    }

    fn json(self) -> Response {
        let body = serde_json::json!({ "error": self.title, "detail": self.message });
        (self.status, Json(body)).into_response()
    }
}

#[derive(Debug, Default, Deserialize)]
struct RenderQuery {
    url: Option<String>,
    preset: Option<String>,
    scale: Option<String>,
}

pub fn router(state: AppState) -> Router {
    let mut app = Router::new()
        .route("/", get(home))
        .route("/render", get(render))
        .route("/api/report", get(report))
        .route("/api/presets", get(presets))
        .route("/healthz", get(|| async { "ok" }));
    if let Some(dir) = &state.config().assets_dir {
        app = app.nest_service("/assets", ServeDir::new(dir));
    }
    app.fallback(not_found).with_state(state)
}

async fn home(State(state): State<AppState>) -> Response {
    if let Some(dir) = &state.config().assets_dir {
        if let Ok(page) = tokio::fs::read_to_string(dir.join("index.html")).await {
            return Html(page).into_response();
        }
    }
    Html(landing_page(state.default_preset(), state.catalog().names())).into_response()
}

async fn render(State(state): State<AppState>, Query(q): Query<RenderQuery>) -> Response {
    let (url, cfg) = match state.prepare(&q) {
        Ok(v) => v,
        Err(f) => return f.page(state.default_preset()),
    };
    let result = {
        let _permit = state.inner.limiter.acquire().await.expect("limiter is never closed");
        transform_url(&state.inner.fetcher, &url, &cfg).await
    };
    match result {
        Ok(page) => {
            tracing::info!(url = %url, stats = %page.stats, "rendered");
            let mut resp = Html(page.html).into_response();
            if let Ok(v) = HeaderValue::from_str(&page.stats.to_string()) {
                resp.headers_mut().insert(STATS_HEADER, v);
            }
            resp
        }
        Err(e) => {
            tracing::warn!(url = %url, error = %e, "render failed");
            Failure::from_pipeline(&e).page(&cfg.preset)
        }
    }
}

async fn report(State(state): State<AppState>, Query(q): Query<RenderQuery>) -> Response {
    let (url, cfg) = match state.prepare(&q) {
        Ok(v) => v,
        Err(f) => return f.json(),
    };
    let result = {
        let _permit = state.inner.limiter.acquire().await.expect("limiter is never closed");
        measure_load(&state.inner.fetcher, &url, &cfg).await
    };
    match result {
        Ok(m) => Json(m).into_response(),
        Err(e) => Failure::from_pipeline(&e).json(),
    }
}

#[derive(Serialize)]
struct PresetList<'a> {
    default: &'a str,
    presets: Vec<&'a ClearPrintPreset>,
}

async fn presets(State(state): State<AppState>) -> Response {
    let body = PresetList {
        default: &state.config().default_preset,
        presets: state.catalog().iter().collect(),
    };
    let mut resp = Json(body).into_response();
    resp.headers_mut()
        .insert(header::CACHE_CONTROL, HeaderValue::from_static("max-age=300"));
    resp
}

async fn not_found(State(state): State<AppState>) -> Response {
    Failure {
        status: StatusCode::NOT_FOUND,
        title: "Page not found",
        message: "There is nothing at this address on the service.".into(),
    }
    .page(state.default_preset())
}

/// Serves on an already bound listener until `shutdown` resolves.
pub async fn serve_on(
    listener: TcpListener,
    state: AppState,
    shutdown: impl std::future::Future<Output = ()> + Send + 'static,
) -> Result<(), ServiceError> {
    axum::serve(listener, router(state))
        .with_graceful_shutdown(shutdown)
        .await?;
    Ok(())
}

/// Binds `listen_address` and serves until Ctrl-C.
pub async fn serve(config: ServiceConfig) -> Result<(), ServiceError> {
    let state = AppState::new(config)?;
    let addr = state.config().listen_address.clone();
    let listener = TcpListener::bind(&addr)
        .await
        .map_err(|source| ServiceError::Bind {
            addr: addr.clone(),
            source,
        })?;
    tracing::info!(
        listen = %listener.local_addr()?,
        public_base = %state.config().public_base,
        "clearlens listening"
    );
    serve_on(listener, state, async {
        let _ = tokio::signal::ctrl_c().await;
    })
    .await
}
