//! Contract source retrieval from an Etherscan-compatible HTTP API.
//!
//! Only the verified-source endpoint (`module=contract&action=getsourcecode`)
//! is used. Requests are throttled to a configurable rate and retried with
//! exponential backoff; unverified or persistently failing addresses are
//! skipped with a diagnostic rather than aborting the batch.

use std::thread;
use std::time::{Duration, Instant, SystemTime, UNIX_EPOCH};

use serde::Deserialize;
use thiserror::Error;

use super::{Address, ContractRecord};

pub const DEFAULT_BASE_URL: &str = "https://api.etherscan.io/api";
pub const DEFAULT_RATE_LIMIT: f64 = 4.0;
const MAX_RETRIES: u32 = 3;

#[derive(Debug, Clone)]
pub struct FetchConfig {
    pub api_key: String,
    pub base_url: String,
    /// Maximum request rate in requests per second.
    pub rate_limit: f64,
    /// Per-request timeout.
    pub timeout: Duration,
    /// Base delay for exponential retry backoff.
    pub retry_backoff: Duration,
}

impl FetchConfig {
    pub fn new(api_key: impl Into<String>) -> FetchConfig {
        FetchConfig {
            api_key: api_key.into(),
            base_url: DEFAULT_BASE_URL.to_string(),
            rate_limit: DEFAULT_RATE_LIMIT,
            timeout: Duration::from_secs(30),
            retry_backoff: Duration::from_millis(500),
        }
    }
}

#[derive(Debug, Error)]
pub enum FetchError {
    #[error("api key must not be empty")]
    EmptyApiKey,
    #[error("rate limit must be positive, got {0}")]
    InvalidRateLimit(f64),
    #[error("the API rejected the api key")]
    InvalidApiKey,
}

/// Result of a fetch batch: retrieved records plus one diagnostic per
/// skipped address.
#[derive(Debug, Default)]
pub struct FetchReport {
    pub records: Vec<ContractRecord>,
    pub diagnostics: Vec<String>,
}

#[derive(Deserialize)]
struct ApiEnvelope {
    status: String,
    #[serde(default)]
    result: serde_json::Value,
}

#[derive(Deserialize)]
struct SourceEntry {
    #[serde(rename = "SourceCode", default)]
    source_code: String,
    #[serde(rename = "ABI", default)]
    abi: String,
}

struct Throttle {
    interval: Duration,
    last: Option<Instant>,
}

impl Throttle {
    fn new(rate_limit: f64) -> Throttle {
        Throttle {
            interval: Duration::from_secs_f64(1.0 / rate_limit),
            last: None,
        }
    }

    fn wait(&mut self) {
        if let Some(last) = self.last {
            let elapsed = last.elapsed();
            if elapsed < self.interval {
                thread::sleep(self.interval - elapsed);
            }
        }
        self.last = Some(Instant::now());
    }
}

enum Fetched {
    Verified(Box<SourceEntry>),
    Unverified,
}

/// Fetches verified contract sources for `addresses`.
///
/// Unverified addresses and addresses that still fail after retries are
/// reported in the returned diagnostics; an invalid api key aborts the
/// whole batch.
pub fn fetch_contracts(
    addresses: &[Address],
    config: &FetchConfig,
) -> Result<FetchReport, FetchError> {
    if config.api_key.is_empty() {
        return Err(FetchError::EmptyApiKey);
    }
    if config.rate_limit <= 0.0 || config.rate_limit.is_nan() {
        return Err(FetchError::InvalidRateLimit(config.rate_limit));
    }

    let agent = ureq::AgentBuilder::new().timeout(config.timeout).build();
    let mut throttle = Throttle::new(config.rate_limit);
    let mut report = FetchReport::default();

    for address in addresses {
        match fetch_one(&agent, &mut throttle, config, address)? {
            Ok(Fetched::Verified(entry)) => {
                let abi_json = match entry.abi.as_str() {
                    "" | "Contract source code not verified" => None,
                    abi => Some(abi.to_string()),
                };
                report.records.push(ContractRecord {
                    address: address.clone(),
                    source: entry.source_code,
                    abi_json,
                    bytecode_hex: None,
                    retrieved_at: Some(unix_timestamp()),
                });
            }
            Ok(Fetched::Unverified) => {
                report
                    .diagnostics
                    .push(format!("{address}: source not verified, skipped"));
            }
            Err(last_error) => {
                report.diagnostics.push(format!(
                    "{address}: skipped after {MAX_RETRIES} retries: {last_error}"
                ));
            }
        }
    }
    Ok(report)
}

/// Outer error is fatal for the batch, inner error means this address
/// exhausted its retries.
fn fetch_one(
    agent: &ureq::Agent,
    throttle: &mut Throttle,
    config: &FetchConfig,
    address: &Address,
) -> Result<Result<Fetched, String>, FetchError> {
    let mut last_error = String::new();
    for attempt in 0..=MAX_RETRIES {
        if attempt > 0 {
            thread::sleep(config.retry_backoff * 2u32.pow(attempt - 1));
        }
        throttle.wait();
        match request(agent, config, address) {
            Ok(fetched) => return Ok(Ok(fetched)),
            Err(RequestError::InvalidApiKey) => return Err(FetchError::InvalidApiKey),
            Err(RequestError::Retryable(message)) => last_error = message,
        }
    }
    Ok(Err(last_error))
}

enum RequestError {
    InvalidApiKey,
    Retryable(String),
}

fn request(
    agent: &ureq::Agent,
    config: &FetchConfig,
    address: &Address,
) -> Result<Fetched, RequestError> {
    let response = agent
        .get(&config.base_url)
        .query("module", "contract")
        .query("action", "getsourcecode")
        .query("address", &format!("0x{address}"))
        .query("apikey", &config.api_key)
        .call()
        .map_err(|err| RequestError::Retryable(err.to_string()))?;
    let body = response
        .into_string()
        .map_err(|err| RequestError::Retryable(format!("cannot read body: {err}")))?;
    let envelope: ApiEnvelope = serde_json::from_str(&body)
        .map_err(|err| RequestError::Retryable(format!("malformed response: {err}")))?;

    if envelope.status != "1" {
        let detail = envelope.result.as_str().unwrap_or("").to_string();
        if detail.to_ascii_lowercase().contains("invalid api key") {
            return Err(RequestError::InvalidApiKey);
        }
        return Err(RequestError::Retryable(format!(
            "API status {}: {detail}",
            envelope.status
        )));
    }

    let entries: Vec<SourceEntry> = serde_json::from_value(envelope.result)
        .map_err(|err| RequestError::Retryable(format!("malformed result: {err}")))?;
    match entries.into_iter().next() {
        Some(entry) if !entry.source_code.is_empty() => Ok(Fetched::Verified(Box::new(entry))),
        _ => Ok(Fetched::Unverified),
    }
}

fn unix_timestamp() -> String {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs().to_string())
        .unwrap_or_default()
}
