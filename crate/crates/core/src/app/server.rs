//! HTTP transport for [`super::api::handle`].

use std::net::SocketAddr;
use std::sync::Arc;

use axum::extract::State;
use axum::http::{Method, StatusCode, Uri};
use axum::response::{IntoResponse, Response};
use axum::{Json, Router};
use tokio::net::TcpListener;

use super::api::handle;
use super::Snapshot;

async fn dispatch(State(snapshot): State<Arc<Snapshot>>, method: Method, uri: Uri) -> Response {
    if method != Method::GET {
        let body = serde_json::json!({ "error": "only GET is supported" });
        return (StatusCode::METHOD_NOT_ALLOWED, Json(body)).into_response();
    }
    let resp = handle(&snapshot, uri.path(), uri.query().unwrap_or(""));
    let status = StatusCode::from_u16(resp.status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
    (status, Json(resp.body)).into_response()
}

pub fn router(snapshot: Arc<Snapshot>) -> Router {
    Router::new().fallback(dispatch).with_state(snapshot)
}

/// Serve on an already-bound listener until the task is dropped.
pub async fn serve_listener(snapshot: Arc<Snapshot>, listener: TcpListener) -> std::io::Result<()> {
    axum::serve(listener, router(snapshot)).await
}

/// Bind `addr` and serve forever on a multi-threaded runtime.
pub fn serve(snapshot: Snapshot, addr: SocketAddr) -> std::io::Result<()> {
    let runtime = tokio::runtime::Builder::new_multi_thread().enable_all().build()?;
    runtime.block_on(async move {
        let listener = TcpListener::bind(addr).await?;
        eprintln!("listening on http://{}", listener.local_addr()?);
        serve_listener(Arc::new(snapshot), listener).await
    })
}
