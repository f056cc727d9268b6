//! The HTTP front: `POST /query`, `GET /signature`, `GET /health`.

use std::sync::Arc;

use anyhow::{Context as _, Result};
use axum::extract::State;
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use qmt::frontend::{Format, QueryService};

pub fn router(svc: Arc<QueryService>) -> Router {
    Router::new()
        .route("/query", post(query))
        .route("/signature", get(signature))
        .route("/health", get(health))
        .with_state(svc)
}

/// An explicit `Accept` of one of the three formats picks the response
/// format; otherwise it follows the request.
fn requested_format(headers: &HeaderMap) -> Option<Format> {
    let accept = headers.get(header::ACCEPT)?.to_str().ok()?;
    accept.split(',').find_map(|part| match part.split(';').next()?.trim() {
        "application/xml" | "text/xml" => Some(Format::Xml),
        "application/json" => Some(Format::Json),
        "text/plain" => Some(Format::Text),
        _ => None,
    })
}

async fn query(State(svc): State<Arc<QueryService>>, headers: HeaderMap, body: String) -> Response {
    let format = requested_format(&headers);
    let r = match tokio::task::spawn_blocking(move || svc.handle(&body, format)).await {
        Ok(r) => r,
        Err(e) => return (StatusCode::INTERNAL_SERVER_ERROR, e.to_string()).into_response(),
    };
    let status = StatusCode::from_u16(r.status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
    (status, [(header::CONTENT_TYPE, r.content_type())], r.body).into_response()
}

async fn signature(State(svc): State<Arc<QueryService>>) -> Response {
    ([(header::CONTENT_TYPE, "application/xml")], svc.signature_xml()).into_response()
}

async fn health() -> &'static str {
    "ok\n"
}

/// Runs the server until interrupted. Prints the bound address first so
/// callers asking for port 0 learn the real one.
pub fn serve(svc: Arc<QueryService>, host: &str, port: u16) -> Result<()> {
    let rt = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()?;
    rt.block_on(async move {
        let listener = tokio::net::TcpListener::bind((host, port))
            .await
            .with_context(|| format!("binding {host}:{port}"))?;
        println!("listening on http://{}", listener.local_addr()?);
        axum::serve(listener, router(svc))
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await?;
        Ok(())
    })
}
