//! The two ways the interactive loop can reach a session.

use std::path::Path;

use anyhow::{anyhow, bail, Context};
use base64::Engine as _;
use serde_json::json;
use veriloop_core::feedback::ChatEntry;
use veriloop_core::image::{ImageBuffer, LabelMap};
use veriloop_core::session::{error_message, EditSession, SessionConfig};
use veriloop_core::Error;
use veriloop_service::{BackendSource, Problem, SessionSummary, Store};

pub trait Engine {
    /// The whole chat so far.
    fn chat(&mut self) -> anyhow::Result<Vec<ChatEntry>>;
    /// `Err` carries a message ready to print.
    fn prompt(&mut self, text: &str) -> Result<(), String>;
    fn undo(&mut self) -> Result<(), String>;
    fn redo(&mut self) -> Result<(), String>;
    /// Writes the current image as PNG and returns its digest.
    fn save(&mut self, path: &Path) -> anyhow::Result<String>;
}

/// In-process session, optionally persisted to a store.
pub struct Local {
    session: EditSession,
    store: Option<Store>,
}

impl Local {
    pub fn open(
        image: ImageBuffer,
        labels: Option<LabelMap>,
        source: &BackendSource,
        config: SessionConfig,
        store: Option<Store>,
    ) -> veriloop_core::Result<Self> {
        let segmentation = source.segmentation();
        let mut id = image.digest()[..12].to_string();
        if let Some(s) = &store {
            let base = id.clone();
            let mut n = 2;
            while s.contains(&id) {
                id = format!("{base}-{n}");
                n += 1;
            }
        }
        let session = EditSession::new(image, labels, segmentation.as_deref(), source.backend()?, config)?
            .with_id(id)
            .with_inpainter(source.inpainter());
        let local = Self { session, store };
        local.persist().map_err(|e| Error::Config(e.to_string()))?;
        Ok(local)
    }

    fn persist(&self) -> veriloop_core::Result<()> {
        match &self.store {
            Some(s) => s.save(&self.session),
            None => Ok(()),
        }
    }

    fn after(&self, r: veriloop_core::Result<()>) -> Result<(), String> {
        if let Err(e) = self.persist() {
            return Err(format!("could not save the session: {e}"));
        }
        r.map_err(|e| error_message(&e))
    }
}

impl Engine for Local {
    fn chat(&mut self) -> anyhow::Result<Vec<ChatEntry>> {
        Ok(self.session.chat().to_vec())
    }

    fn prompt(&mut self, text: &str) -> Result<(), String> {
        let r = self.session.submit_prompt(text).map(|_| ());
        self.after(r)
    }

    fn undo(&mut self) -> Result<(), String> {
        let r = self.session.undo().map(|_| ());
        self.after(r)
    }

    fn redo(&mut self) -> Result<(), String> {
        let r = self.session.redo().map(|_| ());
        self.after(r)
    }

    fn save(&mut self, path: &Path) -> anyhow::Result<String> {
        let img = self.session.current_image();
        std::fs::write(path, img.encode_png()).with_context(|| format!("writing {}", path.display()))?;
        Ok(img.digest())
    }
}

/// A session held by a running service.
pub struct Remote {
    agent: ureq::Agent,
    url: String,
}

/// Non-2xx replies come back as problem bodies.
fn problem(status: u16, body: &[u8]) -> Problem {
    serde_json::from_slice(body).unwrap_or_else(|_| {
        let mut p = Problem::internal(String::from_utf8_lossy(body));
        p.kind = format!("Http{status}");
        p
    })
}

impl Remote {
    pub fn open(base: &str, image: &Path, labels: Option<&Path>) -> anyhow::Result<Self> {
        let b64 = |p: &Path| -> anyhow::Result<String> {
            let bytes = std::fs::read(p).map_err(|e| Error::UnreadableFile {
                path: p.display().to_string(),
                reason: e.to_string(),
            })?;
            Ok(base64::engine::general_purpose::STANDARD.encode(bytes))
        };
        let body = json!({
            "image": b64(image)?,
            "labels": labels.map(b64).transpose()?,
        });
        let agent: ureq::Agent = ureq::Agent::config_builder().http_status_as_error(false).build().into();
        let base = base.trim_end_matches('/');
        let mut r = agent
            .post(format!("{base}/sessions"))
            .send_json(body)
            .map_err(|e| Error::BackendUnavailable(format!("{base}: {e}")))?;
        let status = r.status().as_u16();
        let bytes = r.body_mut().read_to_vec()?;
        if status != 201 {
            let p = problem(status, &bytes);
            if status == 502 {
                return Err(Error::BackendUnavailable(p.message).into());
            }
            bail!("{}", p.message);
        }
        let summary: SessionSummary = serde_json::from_slice(&bytes)?;
        Ok(Self {
            agent,
            url: format!("{base}/sessions/{}", summary.session_id),
        })
    }

    fn post(&self, path: &str, body: Option<serde_json::Value>) -> Result<(), String> {
        let url = format!("{}/{path}", self.url);
        let sent = match body {
            Some(b) => self.agent.post(&url).send_json(b),
            None => self.agent.post(&url).send_empty(),
        };
        let mut r = sent.map_err(|e| format!("Error (BackendUnavailable): {e}"))?;
        if r.status().is_success() {
            return Ok(());
        }
        let status = r.status().as_u16();
        let bytes = r.body_mut().read_to_vec().map_err(|e| e.to_string())?;
        Err(problem(status, &bytes).message)
    }
}

impl Engine for Remote {
    fn chat(&mut self) -> anyhow::Result<Vec<ChatEntry>> {
        let mut r = self.agent.get(format!("{}/chat", self.url)).call()?;
        if !r.status().is_success() {
            return Err(anyhow!("chat request failed with {}", r.status()));
        }
        Ok(r.body_mut().read_json()?)
    }

    fn prompt(&mut self, text: &str) -> Result<(), String> {
        self.post("prompts", Some(json!({ "text": text })))
    }

    fn undo(&mut self) -> Result<(), String> {
        self.post("undo", None)
    }

    fn redo(&mut self) -> Result<(), String> {
        self.post("redo", None)
    }

    fn save(&mut self, path: &Path) -> anyhow::Result<String> {
        let mut r = self.agent.get(format!("{}/images/current", self.url)).call()?;
        if !r.status().is_success() {
            bail!("image request failed with {}", r.status());
        }
        let bytes = r.body_mut().with_config().limit(u64::MAX).read_to_vec()?;
        std::fs::write(path, &bytes).with_context(|| format!("writing {}", path.display()))?;
        Ok(ImageBuffer::decode(&bytes)?.digest())
    }
}
