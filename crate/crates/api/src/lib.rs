//! HTTP/JSON service over a forest road store.
//!
//! Authentication is a static bearer token per configured user. CCO and AM
//! users can read, report problems and edit segments; resolving, assigning
//! and deleting reports is reserved to AM. Anonymous callers may read only
//! when `public_read` is on.

pub mod config;
pub mod error;
pub mod handlers;
pub mod state;

use std::future::Future;
use std::time::Instant;

use axum::extract::Request;
use axum::middleware::{self, Next};
use axum::response::Response;
use axum::routing::{get, post};
use axum::Router;
use tokio::net::TcpListener;

pub use config::{Config, UserEntry};
pub use error::ApiError;
pub use handlers::RouteRequest;
pub use state::{Access, AppState, Caller};

pub fn router(state: AppState) -> Router {
    use handlers::*;
    Router::new()
        .route("/health", get(health))
        .route("/segments", get(list_segments))
        .route("/segments/{id}", get(get_segment).put(put_segment))
        .route("/junctions", get(list_junctions))
        .route("/map.geojson", get(map_geojson))
        .route("/reports", get(list_reports).post(create_report))
        .route("/reports/resolve", post(resolve_reports))
        .route("/reports/{id}", get(get_report).patch(patch_report).delete(delete_report))
        .route("/assignments", get(list_assignments).post(create_assignment))
        .route("/assignments/estimate", post(estimate_assignment))
        .route("/catalog", get(get_catalog))
        .route("/profiles", get(list_profiles))
        .route("/route", post(plan_route))
        .layer(middleware::from_fn(log_request))
        .with_state(state)
}

async fn log_request(req: Request, next: Next) -> Response {
    let method = req.method().clone();
    let path = req.uri().path().to_owned();
    let started = Instant::now();
    let response = next.run(req).await;
    tracing::info!(
        method = %method,
        path = %path,
        status = response.status().as_u16(),
        elapsed_ms = started.elapsed().as_secs_f64() * 1000.0,
        "request"
    );
    response
}

/// Serves until `shutdown` completes.
pub async fn serve(
    listener: TcpListener,
    state: AppState,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    axum::serve(listener, router(state))
        .with_graceful_shutdown(shutdown)
        .await
}
