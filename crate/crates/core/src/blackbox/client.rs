use std::thread;
use std::time::Duration;

use ndarray::{s, Array2, ArrayView2};
use ureq::Agent;

use super::protocol::{ErrorResponse, PredictRequest, PredictResponse};
use super::{default_timeout, validate_probs, MAX_ROWS_PER_REQUEST};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct RemoteOptions {
    /// Per-request timeout. Defaults to `ILNL_TIMEOUT_MS` or 30 s.
    pub timeout: Duration,
    /// Total attempts per request.
    pub attempts: u32,
    /// Delay before the first retry; doubles each retry.
    pub backoff: Duration,
    pub max_rows: usize,
    /// Requests issued concurrently for large batches.
    pub in_flight: usize,
}

impl Default for RemoteOptions {
    fn default() -> Self {
        Self {
            timeout: default_timeout(),
            attempts: 3,
            backoff: Duration::from_millis(100),
            max_rows: MAX_ROWS_PER_REQUEST,
            in_flight: 4,
        }
    }
}

pub(crate) struct RemoteClient {
    url: String,
    agent: Agent,
    options: RemoteOptions,
}

enum Failure {
    Retryable(String),
    Fatal(Error),
}

impl RemoteClient {
    pub(crate) fn new(endpoint: &str, options: RemoteOptions) -> Result<Self> {
        if !(endpoint.starts_with("http://") || endpoint.starts_with("https://")) {
            return Err(Error::Config(format!("endpoint {endpoint:?} is not an http(s) URL")));
        }
        if options.attempts == 0 || options.max_rows == 0 || options.in_flight == 0 {
            return Err(Error::Config("remote attempts, max_rows and in_flight must be >= 1".into()));
        }
        let agent: Agent = Agent::config_builder()
            .timeout_global(Some(options.timeout))
            .http_status_as_error(false)
            .build()
            .into();
        Ok(Self {
            url: format!("{}/predict", endpoint.trim_end_matches('/')),
            agent,
            options,
        })
    }

    pub(crate) fn endpoint(&self) -> &str {
        &self.url
    }

    pub(crate) fn predict(&self, batch: ArrayView2<f64>) -> Result<Array2<f64>> {
        let n = batch.nrows();
        if n == 0 {
            let rows = self.request_with_retry(&[])?;
            validate_probs(&rows, 0)?;
            return Ok(Array2::zeros((0, 0)));
        }
        let chunks: Vec<(usize, usize)> = (0..n)
            .step_by(self.options.max_rows)
            .map(|start| (start, (start + self.options.max_rows).min(n)))
            .collect();
        let mut results: Vec<Option<Result<Vec<Vec<f64>>>>> = (0..chunks.len()).map(|_| None).collect();
        for (group_idx, group) in chunks.chunks(self.options.in_flight).enumerate() {
            let base = group_idx * self.options.in_flight;
            thread::scope(|scope| {
                let handles: Vec<_> = group
                    .iter()
                    .map(|&(a, b)| {
                        let view = batch.slice(s![a..b, ..]);
                        scope.spawn(move || {
                            let inputs: Vec<Vec<f64>> = view.rows().into_iter().map(|r| r.to_vec()).collect();
                            let rows = self.request_with_retry(&inputs)?;
                            validate_probs(&rows, b - a)?;
                            Ok(rows)
                        })
                    })
                    .collect();
                for (i, h) in handles.into_iter().enumerate() {
                    results[base + i] = Some(h.join().expect("request thread panicked"));
                }
            });
        }
        let mut all = Vec::with_capacity(n);
        for r in results {
            all.extend(r.expect("every chunk requested")?);
        }
        let width = all[0].len();
        if all.iter().any(|r| r.len() != width) {
            return Err(Error::Protocol("probability width changed between requests".into()));
        }
        Ok(Array2::from_shape_vec((n, width), all.into_iter().flatten().collect())
            .expect("uniform width"))
    }

    fn request_with_retry(&self, inputs: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        let body = serde_json::to_string(&PredictRequest {
            inputs: inputs.to_vec(),
        })
        .map_err(|e| Error::Protocol(e.to_string()))?;
        let mut delay = self.options.backoff;
        let mut last = String::new();
        for attempt in 0..self.options.attempts {
            if attempt > 0 {
                thread::sleep(delay);
                delay *= 2;
            }
            match self.request_once(&body) {
                Ok(rows) => return Ok(rows),
                Err(Failure::Fatal(e)) => return Err(e),
                Err(Failure::Retryable(msg)) => {
                    log::warn!("{}: attempt {} failed: {msg}", self.url, attempt + 1);
                    last = msg;
                }
            }
        }
        Err(Error::Transport(format!(
            "{} unreachable after {} attempts: {last}",
            self.url, self.options.attempts
        )))
    }

    fn request_once(&self, body: &str) -> std::result::Result<Vec<Vec<f64>>, Failure> {
        let mut resp = self
            .agent
            .post(&self.url)
            .header("Content-Type", "application/json")
            .send(body)
            .map_err(|e| Failure::Retryable(e.to_string()))?;
        let status = resp.status().as_u16();
        let text = resp
            .body_mut()
            .read_to_string()
            .map_err(|e| Failure::Retryable(e.to_string()))?;
        if status >= 500 {
            return Err(Failure::Retryable(format!("HTTP {status}: {text}")));
        }
        if status != 200 {
            let msg = serde_json::from_str::<ErrorResponse>(&text)
                .map(|e| e.error)
                .unwrap_or(text);
            return Err(Failure::Fatal(Error::Protocol(format!("HTTP {status}: {msg}"))));
        }
        let parsed: PredictResponse = serde_json::from_str(&text)
            .map_err(|e| Failure::Fatal(Error::Protocol(format!("malformed response: {e}"))))?;
        Ok(parsed.probs)
    }
}
