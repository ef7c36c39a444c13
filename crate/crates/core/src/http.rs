//! Blocking JSON-over-HTTP client shared by the embedding, chat and
//! moderation clients.

use std::sync::{Condvar, Mutex};
use std::thread;
use std::time::{Duration, Instant};

use log::{debug, warn};
use reqwest::blocking::Client;
use serde_json::Value;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HttpError {
    #[error("HTTP {status}: {body}")]
    Status { status: u16, body: String },
    #[error("transport error: {0}")]
    Transport(String),
    #[error("invalid JSON response: {0}")]
    Decode(String),
    #[error("gave up after {attempts} attempts: {last}")]
    Exhausted { attempts: u32, last: Box<HttpError> },
    #[error("client setup: {0}")]
    Setup(String),
}

impl HttpError {
    fn is_transient(&self) -> bool {
        match self {
            HttpError::Status { status, .. } => *status == 429 || *status >= 500,
            HttpError::Transport(_) => true,
            _ => false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RetryPolicy {
    pub max_retries: u32,
    pub base_delay: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy {
            max_retries: 5,
            base_delay: Duration::from_secs(1),
        }
    }
}

impl RetryPolicy {
    pub fn delay(&self, attempt: u32) -> Duration {
        self.base_delay.saturating_mul(1u32 << attempt.min(16))
    }
}

/// Token bucket: `rate` tokens per second, holding at most `burst`.
#[derive(Debug)]
pub struct RateLimiter {
    rate: f64,
    burst: f64,
    state: Mutex<(f64, Instant)>,
}

impl RateLimiter {
    pub fn new(rate: f64, burst: u32) -> Self {
        let burst = f64::from(burst.max(1));
        RateLimiter {
            rate,
            burst,
            state: Mutex::new((burst, Instant::now())),
        }
    }

    pub fn acquire(&self) {
        loop {
            let wait = {
                let mut st = self.state.lock().unwrap_or_else(|e| e.into_inner());
                let now = Instant::now();
                let refill = now.duration_since(st.1).as_secs_f64() * self.rate;
                st.0 = (st.0 + refill).min(self.burst);
                st.1 = now;
                if st.0 >= 1.0 {
                    st.0 -= 1.0;
                    return;
                }
                Duration::from_secs_f64((1.0 - st.0) / self.rate)
            };
            thread::sleep(wait);
        }
    }
}

/// Counting semaphore bounding concurrent requests.
#[derive(Debug)]
struct Gate {
    free: Mutex<usize>,
    cv: Condvar,
}

struct Permit<'a>(&'a Gate);

impl Gate {
    fn new(n: usize) -> Self {
        Gate {
            free: Mutex::new(n.max(1)),
            cv: Condvar::new(),
        }
    }

    fn enter(&self) -> Permit<'_> {
        let mut free = self.free.lock().unwrap_or_else(|e| e.into_inner());
        while *free == 0 {
            free = self.cv.wait(free).unwrap_or_else(|e| e.into_inner());
        }
        *free -= 1;
        Permit(self)
    }
}

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        *self.0.free.lock().unwrap_or_else(|e| e.into_inner()) += 1;
        self.0.cv.notify_one();
    }
}

#[derive(Debug, Clone)]
pub struct ClientConfig {
    pub retry: RetryPolicy,
    pub max_in_flight: usize,
    /// Requests per second; `None` disables rate limiting.
    pub rate_limit: Option<f64>,
    pub timeout: Duration,
}

impl Default for ClientConfig {
    fn default() -> Self {
        ClientConfig {
            retry: RetryPolicy::default(),
            max_in_flight: 4,
            rate_limit: None,
            timeout: Duration::from_secs(60),
        }
    }
}

#[derive(Debug)]
pub struct JsonClient {
    inner: Client,
    bearer: Option<String>,
    retry: RetryPolicy,
    gate: Gate,
    limiter: Option<RateLimiter>,
}

impl JsonClient {
    pub fn new(config: &ClientConfig, bearer: Option<String>) -> Result<Self, HttpError> {
        let inner = Client::builder()
            .timeout(config.timeout)
            .build()
            .map_err(|e| HttpError::Setup(e.to_string()))?;
        Ok(JsonClient {
            inner,
            bearer,
            retry: config.retry,
            gate: Gate::new(config.max_in_flight),
            limiter: config
                .rate_limit
                .map(|r| RateLimiter::new(r, config.max_in_flight as u32)),
        })
    }

    /// Reads the bearer token from `var`, if set and non-empty.
    pub fn with_env_key(config: &ClientConfig, var: &str) -> Result<Self, HttpError> {
        let key = std::env::var(var).ok().filter(|k| !k.is_empty());
        Self::new(config, key)
    }

    fn attempt(&self, url: &str, body: &Value) -> Result<Value, HttpError> {
        if let Some(l) = &self.limiter {
            l.acquire();
        }
        let _permit = self.gate.enter();
        let mut req = self.inner.post(url).json(body);
        if let Some(key) = &self.bearer {
            req = req.bearer_auth(key);
        }
        let resp = req.send().map_err(|e| HttpError::Transport(e.to_string()))?;
        let status = resp.status();
        let text = resp.text().map_err(|e| HttpError::Transport(e.to_string()))?;
        if !status.is_success() {
            return Err(HttpError::Status {
                status: status.as_u16(),
                body: text,
            });
        }
        serde_json::from_str(&text).map_err(|e| HttpError::Decode(e.to_string()))
    }

    /// POSTs `body` and decodes the JSON reply, retrying 429, 5xx and
    /// transport failures with exponential backoff.
    pub fn post_json(&self, url: &str, body: &Value) -> Result<Value, HttpError> {
        let mut attempt = 0;
        loop {
            match self.attempt(url, body) {
                Ok(v) => return Ok(v),
                Err(e) if e.is_transient() && attempt < self.retry.max_retries => {
                    let delay = self.retry.delay(attempt);
                    warn!("{url}: {e}; retrying in {delay:?}");
                    thread::sleep(delay);
                    attempt += 1;
                }
                Err(e) if e.is_transient() => {
                    return Err(HttpError::Exhausted {
                        attempts: attempt + 1,
                        last: Box::new(e),
                    })
                }
                Err(e) => {
                    debug!("{url}: permanent failure {e}");
                    return Err(e);
                }
            }
        }
    }
}
