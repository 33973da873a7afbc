//! HTTP client for a hosted generation model.
//!
//! Wire format: `POST <endpoint>` with
//! `{"input": "...", "num_candidates": k, "seed": n}` answered by
//! `{"candidates": ["...", ...]}`.

use std::net::TcpStream;
use std::sync::{Condvar, Mutex};
use std::time::Duration;

use lyricraft_core::dataset::ExternalModelProfile;
use lyricraft_core::generation::{GenerationBackend, GenerationError};
use rand::RngCore;
use reqwest::blocking::Client;
use reqwest::Url;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone)]
pub struct RemoteConfig {
    pub endpoint: String,
    pub timeout: Duration,
    /// Sent verbatim as a header, e.g. `("Authorization", "Bearer ...")`.
    pub auth_header: Option<(String, String)>,
    pub max_in_flight: usize,
    pub profile: ExternalModelProfile,
}

impl RemoteConfig {
    pub fn new(endpoint: impl Into<String>) -> Self {
        RemoteConfig {
            endpoint: endpoint.into(),
            timeout: Duration::from_secs(30),
            auth_header: None,
            max_in_flight: 4,
            profile: ExternalModelProfile::default(),
        }
    }
}

#[derive(Serialize)]
struct WireRequest<'a> {
    input: &'a str,
    num_candidates: usize,
    seed: u64,
}

#[derive(Deserialize)]
struct WireResponse {
    candidates: Vec<String>,
}

/// Counting semaphore bounding concurrent requests.
#[derive(Debug)]
struct Permits {
    free: Mutex<usize>,
    released: Condvar,
}

impl Permits {
    fn acquire(&self) -> PermitGuard<'_> {
        let mut free = self.free.lock().unwrap_or_else(|e| e.into_inner());
        while *free == 0 {
            free = self.released.wait(free).unwrap_or_else(|e| e.into_inner());
        }
        *free -= 1;
        PermitGuard(self)
    }
}

struct PermitGuard<'a>(&'a Permits);

impl Drop for PermitGuard<'_> {
    fn drop(&mut self) {
        *self.0.free.lock().unwrap_or_else(|e| e.into_inner()) += 1;
        self.0.released.notify_one();
    }
}

/// Blocking backend. Build it outside any async runtime; the service calls
/// it from blocking worker threads.
#[derive(Debug)]
pub struct RemoteBackend {
    config: RemoteConfig,
    url: Url,
    client: Client,
    permits: Permits,
}

impl RemoteBackend {
    pub fn new(config: RemoteConfig) -> Result<Self, GenerationError> {
        let url = Url::parse(&config.endpoint)
            .map_err(|e| GenerationError::InvalidRequest(format!("bad endpoint {:?}: {e}", config.endpoint)))?;
        let client = Client::builder()
            .timeout(config.timeout)
            .build()
            .map_err(|e| GenerationError::BackendUnavailable(e.to_string()))?;
        let permits = Permits { free: Mutex::new(config.max_in_flight.max(1)), released: Condvar::new() };
        Ok(RemoteBackend { config, url, client, permits })
    }

    pub fn config(&self) -> &RemoteConfig {
        &self.config
    }
}

impl GenerationBackend for RemoteBackend {
    fn id(&self) -> &str {
        "remote"
    }

    fn generate(&self, rendered_input: &str, k: usize, rng: &mut dyn RngCore) -> Result<Vec<String>, GenerationError> {
        let body = WireRequest { input: rendered_input, num_candidates: k, seed: rng.next_u64() };
        let _permit = self.permits.acquire();
        let mut req = self.client.post(self.url.clone()).json(&body);
        if let Some((name, value)) = &self.config.auth_header {
            req = req.header(name, value);
        }
        let resp = req.send().map_err(|e| GenerationError::BackendUnavailable(e.to_string()))?;
        let status = resp.status();
        if status.is_server_error() || status == reqwest::StatusCode::TOO_MANY_REQUESTS {
            return Err(GenerationError::BackendUnavailable(format!("status {status}")));
        }
        if !status.is_success() {
            return Err(GenerationError::MalformedResponse(format!("status {status}")));
        }
        let text = resp.text().map_err(|e| GenerationError::BackendUnavailable(e.to_string()))?;
        let parsed: WireResponse =
            serde_json::from_str(&text).map_err(|e| GenerationError::MalformedResponse(e.to_string()))?;
        Ok(parsed.candidates.into_iter().take(k).collect())
    }

    fn is_available(&self) -> bool {
        let Ok(addrs) = self.url.socket_addrs(|| None) else { return false };
        let probe = self.config.timeout.min(Duration::from_secs(2));
        addrs.iter().any(|a| TcpStream::connect_timeout(a, probe).is_ok())
    }
}
