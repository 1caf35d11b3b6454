use std::collections::HashMap;
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::{Duration, Instant};

use ureq::http::Uri;
use ureq::Agent;

use crate::error::{Error, FetchStatus, Result};

/// Crawl etiquette for article downloads.
#[derive(Debug, Clone)]
pub struct Politeness {
    /// Minimum gap between two requests to the same host.
    pub min_delay: Duration,
    /// Extra attempts after the first one for transient failures.
    pub retries: u32,
    pub retry_backoff: Duration,
    pub timeout: Duration,
    pub user_agent: String,
}

impl Default for Politeness {
    fn default() -> Self {
        Self {
            min_delay: Duration::from_millis(500),
            retries: 2,
            retry_backoff: Duration::from_millis(500),
            timeout: Duration::from_secs(20),
            user_agent: concat!("newsim/", env!("CARGO_PKG_VERSION")).to_string(),
        }
    }
}

type HostSlot = Arc<Mutex<Option<Instant>>>;

/// Shared HTTP client. Requests to the same host are serialized and spaced
/// by `min_delay`; different hosts proceed independently.
pub struct Fetcher {
    agent: Agent,
    politeness: Politeness,
    hosts: Mutex<HashMap<String, HostSlot>>,
}

impl Fetcher {
    pub fn new(politeness: Politeness) -> Self {
        let agent: Agent = Agent::config_builder()
            .timeout_global(Some(politeness.timeout))
            .http_status_as_error(false)
            .user_agent(politeness.user_agent.as_str())
            .build()
            .into();
        Self { agent, politeness, hosts: Mutex::new(HashMap::new()) }
    }

    fn host_slot(&self, host: &str) -> HostSlot {
        let mut hosts = self.hosts.lock().unwrap_or_else(|p| p.into_inner());
        hosts.entry(host.to_string()).or_default().clone()
    }

    /// Downloads `url`, returning the body of a 2xx response.
    pub fn fetch(&self, url: &str) -> Result<Vec<u8>> {
        let fail = |status| Error::Fetch { url: url.to_string(), status };
        let uri: Uri = url.parse().map_err(|_| fail(FetchStatus::InvalidUrl))?;
        let host = match (uri.scheme_str(), uri.host()) {
            (Some("http" | "https"), Some(h)) if !h.is_empty() => h.to_string(),
            _ => return Err(fail(FetchStatus::InvalidUrl)),
        };

        let slot = self.host_slot(&host);
        let mut last = slot.lock().unwrap_or_else(|p| p.into_inner());
        let mut attempt = 0;
        loop {
            if let Some(prev) = *last {
                let since = prev.elapsed();
                if since < self.politeness.min_delay {
                    thread::sleep(self.politeness.min_delay - since);
                }
            }
            *last = Some(Instant::now());
            let status = match self.attempt(url) {
                Ok(bytes) => return Ok(bytes),
                Err(status) => status,
            };
            if attempt >= self.politeness.retries || !is_transient(&status) {
                return Err(fail(status));
            }
            attempt += 1;
            log::debug!("retrying {url} after {status} (attempt {attempt})");
            thread::sleep(self.politeness.retry_backoff * attempt);
        }
    }

    fn attempt(&self, url: &str) -> std::result::Result<Vec<u8>, FetchStatus> {
        let mut resp = self.agent.get(url).call().map_err(classify)?;
        let code = resp.status().as_u16();
        if !(200..300).contains(&code) {
            return Err(FetchStatus::Http(code));
        }
        resp.body_mut().read_to_vec().map_err(classify)
    }
}

fn is_transient(status: &FetchStatus) -> bool {
    match status {
        FetchStatus::Http(code) => *code == 408 || *code == 429 || *code >= 500,
        FetchStatus::Timeout | FetchStatus::Network(_) => true,
        FetchStatus::InvalidUrl => false,
    }
}

fn classify(err: ureq::Error) -> FetchStatus {
    match err {
        ureq::Error::Timeout(_) => FetchStatus::Timeout,
        ureq::Error::Io(e) if matches!(e.kind(), std::io::ErrorKind::TimedOut | std::io::ErrorKind::WouldBlock) => {
            FetchStatus::Timeout
        }
        ureq::Error::BadUri(_) => FetchStatus::InvalidUrl,
        other => FetchStatus::Network(other.to_string()),
    }
}

/// One-off fetch with its own client.
pub fn fetch_article(url: &str, politeness: &Politeness) -> Result<Vec<u8>> {
    Fetcher::new(politeness.clone()).fetch(url)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_http_urls() {
        for url in ["ftp://x/y", "not a url", "file:///etc/passwd", "/relative"] {
            let err = fetch_article(url, &Politeness::default()).unwrap_err();
            assert!(
                matches!(err, Error::Fetch { status: FetchStatus::InvalidUrl, .. }),
                "{url}: {err}"
            );
        }
    }

    #[test]
    fn transient_classification() {
        assert!(is_transient(&FetchStatus::Http(503)));
        assert!(is_transient(&FetchStatus::Timeout));
        assert!(!is_transient(&FetchStatus::Http(404)));
    }
}
