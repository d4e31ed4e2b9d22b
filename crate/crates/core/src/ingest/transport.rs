//! HTTP transport abstraction so every ingestion test runs offline against
//! canned payloads.

use std::cell::Cell;
use std::path::Path;

use super::{FetchOptions, IngestError};

#[derive(Debug, Clone)]
pub struct HttpResponse {
    pub status: u16,
    pub body: String,
}

pub trait Transport {
    fn get(&self, url: &str, headers: &[(&str, &str)]) -> Result<HttpResponse, IngestError>;
}

/// Live network transport.
pub struct HttpTransport {
    client: reqwest::blocking::Client,
}

impl HttpTransport {
    pub fn new() -> Result<Self, IngestError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(std::time::Duration::from_secs(60))
            .build()
            .map_err(|e| IngestError::Http {
                status: None,
                message: format!("building http client: {e}"),
            })?;
        Ok(Self { client })
    }
}

impl Transport for HttpTransport {
    fn get(&self, url: &str, headers: &[(&str, &str)]) -> Result<HttpResponse, IngestError> {
        let mut req = self.client.get(url);
        for (name, value) in headers {
            req = req.header(*name, *value);
        }
        let resp = req.send().map_err(|e| IngestError::Http {
            status: None,
            message: e.to_string(),
        })?;
        let status = resp.status().as_u16();
        let body = resp.text().map_err(|e| IngestError::Http {
            status: Some(status),
            message: format!("reading body: {e}"),
        })?;
        Ok(HttpResponse { status, body })
    }
}

/// Transport for `--offline` runs: every call is an error, so a fetch that
/// completes proves the cache served it.
pub struct OfflineTransport;

impl Transport for OfflineTransport {
    fn get(&self, _url: &str, _headers: &[(&str, &str)]) -> Result<HttpResponse, IngestError> {
        Err(IngestError::NetworkForbidden)
    }
}

/// Canned responses matched by URL substring, with a call counter so tests
/// can assert that the cache prevented network traffic.
pub struct FixtureTransport {
    routes: Vec<(String, String)>,
    fail_first: Cell<u32>,
    calls: Cell<usize>,
}

impl FixtureTransport {
    pub fn new() -> Self {
        Self {
            routes: Vec::new(),
            fail_first: Cell::new(0),
            calls: Cell::new(0),
        }
    }

    /// Serve `body` for any URL containing `pattern`.
    pub fn with_route(mut self, pattern: &str, body: impl Into<String>) -> Self {
        self.routes.push((pattern.to_string(), body.into()));
        self
    }

    /// Respond 503 to the first `n` calls, then behave normally.
    pub fn failing_first(self, n: u32) -> Self {
        self.fail_first.set(n);
        self
    }

    /// Load fixtures from a directory using the documented names:
    /// `hydapi.json` answers HydAPI URLs, `openmeteo_hourly.json` and
    /// `openmeteo_daily.json` answer Open-Meteo URLs by resolution.
    pub fn from_dir(dir: &Path) -> Result<Self, IngestError> {
        let mut transport = Self::new();
        let mappings = [
            ("hydapi.json", "hydapi.nve.no"),
            ("openmeteo_hourly.json", "hourly="),
            ("openmeteo_daily.json", "daily="),
        ];
        for (file, pattern) in mappings {
            let path = dir.join(file);
            if path.exists() {
                let body = std::fs::read_to_string(&path)?;
                transport = transport.with_route(pattern, body);
            }
        }
        if transport.routes.is_empty() {
            return Err(IngestError::Config {
                message: format!("no fixture files found in {}", dir.display()),
            });
        }
        Ok(transport)
    }

    pub fn calls(&self) -> usize {
        self.calls.get()
    }
}

impl Default for FixtureTransport {
    fn default() -> Self {
        Self::new()
    }
}

impl Transport for FixtureTransport {
    fn get(&self, url: &str, _headers: &[(&str, &str)]) -> Result<HttpResponse, IngestError> {
        self.calls.set(self.calls.get() + 1);
        let remaining = self.fail_first.get();
        if remaining > 0 {
            self.fail_first.set(remaining - 1);
            return Ok(HttpResponse {
                status: 503,
                body: "service unavailable".into(),
            });
        }
        for (pattern, body) in &self.routes {
            if url.contains(pattern.as_str()) {
                return Ok(HttpResponse {
                    status: 200,
                    body: body.clone(),
                });
            }
        }
        Ok(HttpResponse {
            status: 404,
            body: format!("no fixture for {url}"),
        })
    }
}

fn retriable(status: u16) -> bool {
    status == 429 || (500..=599).contains(&status)
}

/// Bounded-retry GET: up to `opts.attempts` tries with exponential backoff
/// starting at `opts.retry_base`. Retries transport errors and 429/5xx;
/// other non-200 statuses fail immediately.
pub fn get_with_retry(
    transport: &dyn Transport,
    url: &str,
    headers: &[(&str, &str)],
    opts: &FetchOptions,
) -> Result<HttpResponse, IngestError> {
    let mut delay = opts.retry_base;
    let mut last_error = IngestError::Http {
        status: None,
        message: "no attempts were made".into(),
    };
    for attempt in 0..opts.attempts.max(1) {
        if attempt > 0 {
            std::thread::sleep(delay);
            delay *= 2;
        }
        match transport.get(url, headers) {
            Ok(resp) if resp.status == 200 => return Ok(resp),
            Ok(resp) if retriable(resp.status) => {
                last_error = IngestError::Http {
                    status: Some(resp.status),
                    message: truncate(&resp.body),
                };
            }
            Ok(resp) => {
                return Err(IngestError::Http {
                    status: Some(resp.status),
                    message: truncate(&resp.body),
                })
            }
            Err(IngestError::NetworkForbidden) => return Err(IngestError::NetworkForbidden),
            Err(e) => last_error = e,
        }
    }
    Err(last_error)
}

fn truncate(body: &str) -> String {
    const LIMIT: usize = 200;
    if body.len() <= LIMIT {
        body.to_string()
    } else {
        format!("{}...", &body[..LIMIT])
    }
}
