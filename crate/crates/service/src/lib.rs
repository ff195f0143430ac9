// SPDX-License-Identifier: Apache-2.0

//! HTTP/JSON API over a loaded harm graph: scoring, what-if sessions and
//! rankings. Payloads are described in `API.md`.

mod error;
mod handlers;
mod state;

use axum::http::{HeaderName, HeaderValue, Method};
use axum::routing::{delete, get, post};
use axum::Router;
use tokio::net::TcpListener;
use tower_http::cors::{AllowOrigin, CorsLayer};
use tower_http::set_header::SetResponseHeaderLayer;

pub use error::{ApiError, ErrorBody, FieldError};
pub use handlers::{parse_config, VERSION};
pub use state::{AppState, Settings, Shared};

pub const VERSION_HEADER: &str = "x-harmnet-version";

fn local_origin(origin: &HeaderValue) -> bool {
    let Ok(o) = origin.to_str() else { return false };
    let rest = o.strip_prefix("http://").or_else(|| o.strip_prefix("https://"));
    rest.is_some_and(|host| {
        let host = host.split(':').next().unwrap_or_default();
        matches!(host, "localhost" | "127.0.0.1" | "[::1]")
    })
}

fn cors(settings: &Settings) -> CorsLayer {
    let extra: Vec<HeaderValue> = settings
        .cors_origins
        .iter()
        .filter_map(|o| HeaderValue::from_str(o).ok())
        .collect();
    CorsLayer::new()
        .allow_origin(AllowOrigin::predicate(move |origin, _| {
            local_origin(origin) || extra.contains(origin)
        }))
        .allow_methods([Method::GET, Method::POST, Method::DELETE])
        .allow_headers([axum::http::header::CONTENT_TYPE])
        .expose_headers([HeaderName::from_static(VERSION_HEADER)])
}

pub fn router(state: Shared) -> Router {
    use handlers::*;
    let cors = cors(&state.settings);
    Router::new()
        .route("/api/health", get(health))
        .route("/api/graph", get(graph))
        .route("/api/score", post(score))
        .route("/api/session", post(create_session))
        .route("/api/session/{id}", get(get_session).delete(delete_session))
        .route("/api/session/{id}/override", post(set_override))
        .route("/api/session/{id}/override/{node}", delete(clear_override))
        .route("/api/session/{id}/remove", post(remove_node))
        .route("/api/session/{id}/remove/{node}", delete(restore_node))
        .route("/api/session/{id}/reset", post(reset_session))
        .route("/api/session/{id}/config", post(set_config))
        .route("/api/rankings", post(rankings))
        .route("/api/jobs/{id}", get(job))
        .fallback(|| async { ApiError::not_found("no such endpoint") })
        .layer(cors)
        .layer(SetResponseHeaderLayer::overriding(
            HeaderName::from_static(VERSION_HEADER),
            HeaderValue::from_static(VERSION),
        ))
        .with_state(state)
}

pub async fn serve(listener: TcpListener, state: Shared) -> std::io::Result<()> {
    axum::serve(listener, router(state)).await
}
