//! Prediction-only access to a classifier.
//!
//! A [`BlackBoxHandle`] answers exactly one question: the class-probability
//! vectors for a batch of inputs. Whether the model lives in-process or behind
//! the HTTP `/predict` route, callers never see parameters.

mod client;
pub mod protocol;
mod server;

use std::sync::Arc;
use std::time::Duration;

use ndarray::{Array2, ArrayView2};

pub use client::RemoteOptions;
pub use server::{serve, serve_model, ServerHandle, MAX_ROWS_PER_REQUEST};

use crate::error::{Error, Result};
use crate::model::ClassifierModel;

/// Rows whose probabilities sum further than this from 1 are rejected.
pub const PROB_SUM_TOLERANCE: f64 = 1e-6;

#[derive(Clone)]
enum Backend {
    Local(Arc<ClassifierModel>),
    Remote(Arc<client::RemoteClient>),
}

#[derive(Clone)]
pub struct BlackBoxHandle {
    backend: Backend,
}

impl std::fmt::Debug for BlackBoxHandle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.backend {
            Backend::Local(_) => f.write_str("BlackBoxHandle(local)"),
            Backend::Remote(c) => write!(f, "BlackBoxHandle(remote {})", c.endpoint()),
        }
    }
}

/// Seal a model behind a prediction-only handle. The model is moved, not copied.
pub fn wrap_as_blackbox(model: ClassifierModel) -> BlackBoxHandle {
    BlackBoxHandle {
        backend: Backend::Local(Arc::new(model)),
    }
}

impl BlackBoxHandle {
    /// Handle to a model served at `endpoint` (base URL, e.g. `http://127.0.0.1:8080`).
    pub fn remote(endpoint: &str, options: RemoteOptions) -> Result<Self> {
        Ok(Self {
            backend: Backend::Remote(Arc::new(client::RemoteClient::new(endpoint, options)?)),
        })
    }

    /// Probability vector for each row of `batch`.
    pub fn predict_batch(&self, batch: ArrayView2<f64>) -> Result<Array2<f64>> {
        match &self.backend {
            Backend::Local(model) => model.forward(batch),
            Backend::Remote(client) => client.predict(batch),
        }
    }
}

/// Check that every row is a probability vector and all rows share a width.
pub(crate) fn validate_probs(rows: &[Vec<f64>], expected_rows: usize) -> Result<()> {
    if rows.len() != expected_rows {
        return Err(Error::Protocol(format!(
            "asked for {expected_rows} rows, received {}",
            rows.len()
        )));
    }
    let Some(width) = rows.first().map(Vec::len) else {
        return Ok(());
    };
    if width < 2 {
        return Err(Error::Protocol(format!("probability rows have width {width}")));
    }
    for (i, row) in rows.iter().enumerate() {
        if row.len() != width {
            return Err(Error::Protocol(format!(
                "row {i} has {} entries, expected {width}",
                row.len()
            )));
        }
        if row.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::Protocol(format!("row {i} has a negative or non-finite entry")));
        }
        let sum: f64 = row.iter().sum();
        if (sum - 1.0).abs() > PROB_SUM_TOLERANCE {
            return Err(Error::Protocol(format!("row {i} sums to {sum}")));
        }
    }
    Ok(())
}

pub(crate) fn default_timeout() -> Duration {
    std::env::var("ILNL_TIMEOUT_MS")
        .ok()
        .and_then(|v| v.parse().ok())
        .map(Duration::from_millis)
        .unwrap_or(Duration::from_secs(30))
}
