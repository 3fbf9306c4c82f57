//! Axum router for the local service.
//!
//! | method | path                  | body             | response            |
//! |--------|-----------------------|------------------|---------------------|
//! | GET    | `/healthz`            |                  | `ok`                |
//! | GET    | `/api/scenarios`      |                  | bundled scenarios   |
//! | POST   | `/api/solve`          | `ComputeRequest` | `SolveResponse`     |
//! | POST   | `/api/contour`        | `ComputeRequest` | `ContourResponse`   |
//! | POST   | `/api/region-metrics` | `ComputeRequest` | `MetricsResponse`   |
//! | POST   | `/api/field`          | `ComputeRequest` | `FieldResponse`     |
//! | POST   | `/api/compute`        | `ComputeRequest` | `ComputeResponse`   |
//!
//! Errors come back as `{"error": {"code", "message", "field"?, "s0"?}}`
//! with status 400 (malformed or invalid input), 422 (no curve at the
//! requested level, or region cut by the box) or 500.

use std::net::SocketAddr;

use axum::body::Bytes;
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use serde::Serialize;
use tower_http::cors::CorsLayer;

use crate::api::{self, ApiError, ComputeRequest};

pub const DEFAULT_PORT: u16 = 7350;

pub fn router() -> Router {
    Router::new()
        .route("/healthz", get(|| async { "ok" }))
        .route(
            "/api/scenarios",
            get(|| async { json(StatusCode::OK, &api::scenarios()) }),
        )
        .route("/api/solve", post(|body: Bytes| run(body, api::solve)))
        .route("/api/contour", post(|body: Bytes| run(body, api::contour)))
        .route(
            "/api/region-metrics",
            post(|body: Bytes| run(body, api::region_metrics)),
        )
        .route("/api/field", post(|body: Bytes| run(body, api::field)))
        .route("/api/compute", post(|body: Bytes| run(body, api::compute)))
        .layer(CorsLayer::permissive())
}

/// Parses and handles the request on the blocking pool so long grid jobs
/// do not stall the accept loop.
async fn run<T, H>(body: Bytes, handler: H) -> Response
where
    T: Serialize + Send + 'static,
    H: Fn(&ComputeRequest) -> Result<T, ApiError> + Send + 'static,
{
    let outcome = tokio::task::spawn_blocking(move || api::parse_request(&body).and_then(|req| handler(&req))).await;
    match outcome {
        Ok(Ok(value)) => json(StatusCode::OK, &value),
        Ok(Err(e)) => error(&e),
        Err(join) => error(&ApiError {
            status: 500,
            code: "internal".into(),
            message: join.to_string(),
            field: None,
            s0: None,
        }),
    }
}

fn json<T: Serialize>(status: StatusCode, value: &T) -> Response {
    match serde_json::to_vec(value) {
        Ok(bytes) => (status, [(header::CONTENT_TYPE, "application/json")], bytes).into_response(),
        Err(e) => (StatusCode::INTERNAL_SERVER_ERROR, e.to_string()).into_response(),
    }
}

fn error(e: &ApiError) -> Response {
    let status = StatusCode::from_u16(e.status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
    json(status, &e.body())
}

/// Serves until Ctrl-C.
pub async fn serve(addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router())
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
