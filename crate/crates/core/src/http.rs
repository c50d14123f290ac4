//! Blocking HTTP POST with the retry policy shared by every remote backend:
//! transport failures and 5xx replies are retried with exponential backoff,
//! 4xx replies are refusals and are never retried.

use std::time::Duration;

use crate::error::{Error, Result};

const MAX_BODY: u64 = 64 * 1024 * 1024;

#[derive(Debug, Clone)]
pub struct HttpReply {
    pub status: u16,
    pub content_type: Option<String>,
    pub body: Vec<u8>,
}

impl HttpReply {
    pub fn is_png(&self) -> bool {
        self.content_type
            .as_deref()
            .is_some_and(|ct| ct.starts_with("image/png"))
    }
}

#[derive(Clone)]
pub struct HttpClient {
    agent: ureq::Agent,
    retries: u32,
    backoff: Duration,
}

impl std::fmt::Debug for HttpClient {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HttpClient")
            .field("retries", &self.retries)
            .field("backoff", &self.backoff)
            .finish()
    }
}

impl HttpClient {
    pub fn new(timeout: Duration, retries: u32, backoff: Duration) -> Self {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .http_status_as_error(false)
            .build()
            .into();
        Self {
            agent,
            retries,
            backoff,
        }
    }

    pub fn post(
        &self,
        url: &str,
        headers: &[(&str, String)],
        content_type: &str,
        body: &[u8],
    ) -> Result<HttpReply> {
        let mut last_failure = String::new();
        for attempt in 0..=self.retries {
            if attempt > 0 {
                std::thread::sleep(self.backoff * 2u32.pow(attempt - 1));
            }
            let mut req = self.agent.post(url).header("Content-Type", content_type);
            for (k, v) in headers {
                req = req.header(*k, v.as_str());
            }
            match req.send(body) {
                Ok(resp) => {
                    let status = resp.status().as_u16();
                    let content_type = resp
                        .headers()
                        .get("content-type")
                        .and_then(|v| v.to_str().ok())
                        .map(str::to_owned);
                    let body = resp
                        .into_body()
                        .with_config()
                        .limit(MAX_BODY)
                        .read_to_vec()
                        .map_err(|e| Error::BackendUnavailable(e.to_string()))?;
                    if (200..300).contains(&status) {
                        return Ok(HttpReply {
                            status,
                            content_type,
                            body,
                        });
                    }
                    let text = String::from_utf8_lossy(&body).into_owned();
                    if (400..500).contains(&status) {
                        return Err(Error::BackendRefused {
                            status,
                            message: text,
                        });
                    }
                    last_failure = format!("status {status}: {text}");
                }
                Err(e) => last_failure = e.to_string(),
            }
            log::warn!("POST {url} attempt {} failed: {last_failure}", attempt + 1);
        }
        Err(Error::BackendUnavailable(format!(
            "{url} after {} attempts: {last_failure}",
            self.retries + 1
        )))
    }

    pub fn post_json(
        &self,
        url: &str,
        headers: &[(&str, String)],
        body: &serde_json::Value,
    ) -> Result<HttpReply> {
        self.post(url, headers, "application/json", &serde_json::to_vec(body)?)
    }
}
