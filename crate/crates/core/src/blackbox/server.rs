//! HTTP front for a sealed checkpoint. The only route is `POST /predict`.

use std::net::SocketAddr;
use std::path::Path;
use std::sync::Arc;
use std::thread::JoinHandle;

use axum::body::Bytes;
use axum::extract::State;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::post;
use axum::{Json, Router};
use ndarray::Array2;
use tokio::sync::oneshot;

use super::protocol::{ErrorResponse, PredictRequest, PredictResponse};
use crate::error::{Error, Result};
use crate::model::{load_checkpoint, ClassifierModel};

pub const MAX_ROWS_PER_REQUEST: usize = 1024;

/// A running prediction service. Dropping the handle shuts the service down.
pub struct ServerHandle {
    addr: SocketAddr,
    shutdown: Option<oneshot::Sender<()>>,
    thread: Option<JoinHandle<()>>,
}

impl ServerHandle {
    pub fn local_addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn url(&self) -> String {
        format!("http://{}", self.addr)
    }

    /// Block until the service stops.
    pub fn wait(mut self) {
        if let Some(t) = self.thread.take() {
            let _ = t.join();
        }
    }

    pub fn shutdown(mut self) {
        self.stop();
    }

    fn stop(&mut self) {
        if let Some(tx) = self.shutdown.take() {
            let _ = tx.send(());
        }
        if let Some(t) = self.thread.take() {
            let _ = t.join();
        }
    }
}

impl Drop for ServerHandle {
    fn drop(&mut self) {
        self.stop();
    }
}

/// Load a checkpoint and serve it on `bind` (e.g. `127.0.0.1:8080`, port 0 for any).
pub fn serve(checkpoint_path: impl AsRef<Path>, bind: &str) -> Result<ServerHandle> {
    serve_model(load_checkpoint(checkpoint_path)?, bind)
}

pub fn serve_model(model: ClassifierModel, bind: &str) -> Result<ServerHandle> {
    let listener = std::net::TcpListener::bind(bind)
        .map_err(|e| Error::Transport(format!("cannot bind {bind}: {e}")))?;
    listener
        .set_nonblocking(true)
        .map_err(|e| Error::Transport(e.to_string()))?;
    let addr = listener
        .local_addr()
        .map_err(|e| Error::Transport(e.to_string()))?;
    let runtime = tokio::runtime::Builder::new_multi_thread()
        .worker_threads(2)
        .enable_all()
        .build()
        .map_err(|e| Error::Transport(e.to_string()))?;
    let app = router(Arc::new(model));
    let (tx, rx) = oneshot::channel::<()>();
    let thread = std::thread::spawn(move || {
        runtime.block_on(async move {
            let listener = tokio::net::TcpListener::from_std(listener).expect("tokio listener");
            let served = axum::serve(listener, app)
                .with_graceful_shutdown(async {
                    let _ = rx.await;
                })
                .await;
            if let Err(e) = served {
                log::error!("server stopped: {e}");
            }
        });
    });
    log::info!("serving predictions on http://{addr}/predict");
    Ok(ServerHandle {
        addr,
        shutdown: Some(tx),
        thread: Some(thread),
    })
}

fn router(model: Arc<ClassifierModel>) -> Router {
    Router::new()
        .route("/predict", post(predict))
        .fallback(|| async { error(StatusCode::NOT_FOUND, "no such route; use POST /predict".into()) })
        .with_state(model)
}

fn error(status: StatusCode, msg: String) -> Response {
    (status, Json(ErrorResponse { error: msg })).into_response()
}

async fn predict(State(model): State<Arc<ClassifierModel>>, body: Bytes) -> Response {
    let req: PredictRequest = match serde_json::from_slice(&body) {
        Ok(r) => r,
        Err(e) => return error(StatusCode::BAD_REQUEST, format!("malformed request: {e}")),
    };
    let n = req.inputs.len();
    if n > MAX_ROWS_PER_REQUEST {
        return error(
            StatusCode::PAYLOAD_TOO_LARGE,
            format!("{n} rows exceeds the per-request limit of {MAX_ROWS_PER_REQUEST}"),
        );
    }
    let d = model.input_dim();
    if let Some((i, row)) = req.inputs.iter().enumerate().find(|(_, r)| r.len() != d) {
        return error(
            StatusCode::BAD_REQUEST,
            format!("row {i} has {} features, expected d={d}", row.len()),
        );
    }
    if n == 0 {
        return Json(PredictResponse { probs: Vec::new() }).into_response();
    }
    let x = Array2::from_shape_vec((n, d), req.inputs.into_iter().flatten().collect())
        .expect("rows checked");
    match model.forward(x.view()) {
        Ok(p) => Json(PredictResponse {
            probs: p.rows().into_iter().map(|r| r.to_vec()).collect(),
        })
        .into_response(),
        Err(e) => error(StatusCode::BAD_REQUEST, e.to_string()),
    }
}
