use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Duration;

use base64::engine::general_purpose::STANDARD as B64;
use base64::Engine as _;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{BackendRequest, RequestKind, VisionBackend};
use crate::error::{Error, Result};
use crate::http::HttpClient;

pub const TEMPLATES_VERSION: u32 = 1;

const DEFAULT_TEMPLATES: &str = include_str!("../../assets/templates.toml");

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Template {
    pub system: String,
    pub user: String,
}

/// Versioned prompt templates for every request kind.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptTemplates {
    templates: BTreeMap<RequestKind, Template>,
}

#[derive(Deserialize)]
struct TemplateFile {
    version: u32,
    #[serde(flatten)]
    kinds: BTreeMap<String, Template>,
}

impl Default for PromptTemplates {
    fn default() -> Self {
        Self::from_toml(DEFAULT_TEMPLATES).expect("bundled templates are valid")
    }
}

impl PromptTemplates {
    pub fn from_toml(text: &str) -> Result<Self> {
        let file: TemplateFile = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        if file.version != TEMPLATES_VERSION {
            return Err(Error::Config(format!(
                "template version {} is not supported (expected {TEMPLATES_VERSION})",
                file.version
            )));
        }
        let mut templates = BTreeMap::new();
        for kind in RequestKind::ALL {
            let t = file
                .kinds
                .get(kind.as_str())
                .ok_or_else(|| Error::Config(format!("no template for `{kind}`")))?;
            templates.insert(kind, t.clone());
        }
        Ok(Self { templates })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::UnreadableFile {
            path: path.display().to_string(),
            reason: e.to_string(),
        })?;
        Self::from_toml(&text)
    }

    pub fn get(&self, kind: RequestKind) -> &Template {
        &self.templates[&kind]
    }

    /// Fills `{role}` placeholders of the user template from the request.
    pub fn render_user(&self, req: &BackendRequest) -> String {
        let mut out = self.get(req.kind).user.clone();
        for t in &req.texts {
            out = out.replace(&format!("{{{}}}", t.role.as_str()), &t.text);
        }
        out
    }
}

/// Remote backend settings, read from TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackendConfig {
    /// Chat-completions URL.
    pub endpoint: String,
    pub model: String,
    /// Name of the environment variable holding the API key.
    #[serde(default = "default_key_env")]
    pub api_key_env: String,
    #[serde(default = "default_timeout")]
    pub timeout_secs: u64,
    #[serde(default = "default_retries")]
    pub retries: u32,
    #[serde(default)]
    pub temperature: Option<f64>,
    #[serde(default)]
    pub max_tokens: Option<u32>,
    /// Overrides the bundled prompt templates.
    #[serde(default)]
    pub templates: Option<PathBuf>,
    #[serde(default)]
    pub inpaint_endpoint: Option<String>,
    #[serde(default)]
    pub segmentation_endpoint: Option<String>,
}

fn default_key_env() -> String {
    "VERILOOP_API_KEY".into()
}

fn default_timeout() -> u64 {
    60
}

fn default_retries() -> u32 {
    2
}

impl BackendConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::UnreadableFile {
            path: path.display().to_string(),
            reason: e.to_string(),
        })?;
        let mut cfg = Self::from_toml(&text)?;
        if let (Some(t), Some(dir)) = (&cfg.templates, path.parent()) {
            if t.is_relative() {
                cfg.templates = Some(dir.join(t));
            }
        }
        Ok(cfg)
    }

    pub fn timeout(&self) -> Duration {
        Duration::from_secs(self.timeout_secs)
    }
}

/// Vision-capable chat-completions client.
#[derive(Debug)]
pub struct RemoteBackend {
    config: BackendConfig,
    api_key: Option<String>,
    templates: PromptTemplates,
    client: HttpClient,
}

impl RemoteBackend {
    pub fn new(config: BackendConfig) -> Result<Self> {
        let api_key = std::env::var(&config.api_key_env).ok().filter(|k| !k.is_empty());
        Self::with_key(config, api_key)
    }

    pub fn with_key(config: BackendConfig, api_key: Option<String>) -> Result<Self> {
        let templates = match &config.templates {
            Some(p) => PromptTemplates::load(p)?,
            None => PromptTemplates::default(),
        };
        let client = HttpClient::new(config.timeout(), config.retries, Duration::from_millis(250));
        Ok(Self {
            config,
            api_key,
            templates,
            client,
        })
    }

    pub fn with_client(mut self, client: HttpClient) -> Self {
        self.client = client;
        self
    }

    /// The JSON body sent for `req`.
    pub fn request_body(&self, req: &BackendRequest) -> Value {
        let t = self.templates.get(req.kind);
        let mut content = vec![json!({"type": "text", "text": self.templates.render_user(req)})];
        for img in &req.images {
            let url = format!("data:image/png;base64,{}", B64.encode(img.encode_png()));
            content.push(json!({"type": "image_url", "image_url": {"url": url}}));
        }
        let mut body = json!({
            "model": self.config.model,
            "messages": [
                {"role": "system", "content": t.system},
                {"role": "user", "content": content},
            ],
        });
        body["temperature"] = json!(self.config.temperature.unwrap_or(0.0));
        if let Some(n) = self.config.max_tokens {
            body["max_tokens"] = json!(n);
        }
        body
    }
}

/// Copy of `body` with inline image payloads elided, for logging.
fn loggable(body: &Value) -> Value {
    let mut v = body.clone();
    if let Some(msgs) = v["messages"].as_array_mut() {
        for m in msgs {
            if let Some(parts) = m["content"].as_array_mut() {
                for p in parts {
                    if p["type"] == "image_url" {
                        p["image_url"]["url"] = json!("data:image/png;base64,<elided>");
                    }
                }
            }
        }
    }
    v
}

fn extract_content(reply: &Value) -> Option<String> {
    let content = &reply["choices"][0]["message"]["content"];
    if let Some(s) = content.as_str() {
        return Some(s.trim().to_string());
    }
    let parts = content.as_array()?;
    let text: Vec<&str> = parts.iter().filter_map(|p| p["text"].as_str()).collect();
    (!text.is_empty()).then(|| text.join("").trim().to_string())
}

impl VisionBackend for RemoteBackend {
    fn name(&self) -> &str {
        "remote"
    }

    fn complete(&self, req: &BackendRequest) -> Result<String> {
        let body = self.request_body(req);
        let mut headers = Vec::new();
        if let Some(k) = &self.api_key {
            headers.push(("Authorization", format!("Bearer {k}")));
        }
        log::debug!(
            "POST {} (Authorization: {}) {}",
            self.config.endpoint,
            if self.api_key.is_some() { "Bearer <redacted>" } else { "none" },
            loggable(&body)
        );
        let reply = self.client.post_json(&self.config.endpoint, &headers, &body)?;
        let value: Value = serde_json::from_slice(&reply.body)
            .map_err(|e| Error::MalformedResponse(format!("reply is not JSON: {e}")))?;
        log::debug!("reply {value}");
        extract_content(&value)
            .filter(|s| !s.is_empty())
            .ok_or_else(|| Error::MalformedResponse("reply has no message content".into()))
    }
}
