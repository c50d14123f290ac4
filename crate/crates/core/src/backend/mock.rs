use std::path::Path;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::{BackendRequest, RequestKind, TextRole, VisionBackend};
use crate::error::{Error, Result};

pub const MOCK_SCRIPT_VERSION: u32 = 1;

/// Canned backend responses, loaded from JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MockScript {
    pub version: u32,
    pub entries: Vec<MockEntry>,
}

/// One matcher/response pair. `contains` is a case-insensitive substring of the
/// request's question, prompt, or instruction; `image_digest` is a prefix of
/// the digest of any attached image.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MockEntry {
    pub kind: RequestKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub contains: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub image_digest: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub response: Option<String>,
    /// `"unavailable"` or `"refused"`; simulates a failing backend.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    /// How many requests the entry may answer; 0 means unlimited.
    #[serde(default = "one", skip_serializing_if = "is_one")]
    pub repeat: u32,
}

fn one() -> u32 {
    1
}

fn is_one(n: &u32) -> bool {
    *n == 1
}

impl MockEntry {
    pub fn respond(kind: RequestKind, response: impl Into<String>) -> Self {
        Self {
            kind,
            contains: None,
            image_digest: None,
            response: Some(response.into()),
            error: None,
            repeat: 1,
        }
    }

    pub fn containing(mut self, needle: impl Into<String>) -> Self {
        self.contains = Some(needle.into());
        self
    }

    pub fn on_image(mut self, digest_prefix: impl Into<String>) -> Self {
        self.image_digest = Some(digest_prefix.into());
        self
    }

    pub fn unlimited(mut self) -> Self {
        self.repeat = 0;
        self
    }

    pub fn failing(kind: RequestKind, error: &str) -> Self {
        Self {
            kind,
            contains: None,
            image_digest: None,
            response: None,
            error: Some(error.to_string()),
            repeat: 1,
        }
    }

    fn matches(&self, req: &BackendRequest, haystack: &str, digests: &[String]) -> bool {
        self.kind == req.kind
            && self
                .contains
                .as_ref()
                .is_none_or(|n| haystack.contains(&n.to_lowercase()))
            && self
                .image_digest
                .as_ref()
                .is_none_or(|p| digests.iter().any(|d| d.starts_with(p.as_str())))
    }
}

impl MockScript {
    pub fn new(entries: Vec<MockEntry>) -> Self {
        Self {
            version: MOCK_SCRIPT_VERSION,
            entries,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let script: MockScript = serde_json::from_str(text)?;
        if script.version != MOCK_SCRIPT_VERSION {
            return Err(Error::Config(format!(
                "mock script version {} is not supported (expected {MOCK_SCRIPT_VERSION})",
                script.version
            )));
        }
        for (i, e) in script.entries.iter().enumerate() {
            if e.response.is_some() == e.error.is_some() {
                return Err(Error::Config(format!(
                    "mock entry {i} needs exactly one of `response` or `error`"
                )));
            }
        }
        Ok(script)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::UnreadableFile {
            path: path.display().to_string(),
            reason: e.to_string(),
        })?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("script serializes")
    }
}

#[derive(Debug)]
struct MockState {
    uses: Vec<u32>,
    consumed: Vec<usize>,
}

/// Deterministic backend answering from a [`MockScript`].
///
/// Each request takes the first entry (in script order) that matches it and
/// still has uses left, so concurrent requests of different kinds cannot
/// steal each other's entries. Requests with no such entry fail.
#[derive(Debug)]
pub struct ScriptedMock {
    script: MockScript,
    state: Mutex<MockState>,
}

impl ScriptedMock {
    pub fn new(script: MockScript) -> Self {
        let uses = script.entries.iter().map(|e| e.repeat).collect();
        Self {
            script,
            state: Mutex::new(MockState {
                uses,
                consumed: Vec::new(),
            }),
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Ok(Self::new(MockScript::load(path)?))
    }

    pub fn script(&self) -> &MockScript {
        &self.script
    }

    /// Entry indices in the order they were used.
    pub fn consumption_log(&self) -> Vec<usize> {
        self.state.lock().expect("mock state").consumed.clone()
    }

    /// Indices of bounded entries that still have uses left.
    pub fn remaining(&self) -> Vec<usize> {
        let st = self.state.lock().expect("mock state");
        st.uses
            .iter()
            .enumerate()
            .filter(|(i, &u)| u > 0 && self.script.entries[*i].repeat > 0)
            .map(|(i, _)| i)
            .collect()
    }
}

fn haystack(req: &BackendRequest) -> String {
    req.texts
        .iter()
        .filter(|t| matches!(t.role, TextRole::Question | TextRole::Prompt | TextRole::EditInstruction))
        .map(|t| t.text.to_lowercase())
        .collect::<Vec<_>>()
        .join("\n")
}

impl VisionBackend for ScriptedMock {
    fn name(&self) -> &str {
        "mock"
    }

    fn complete(&self, req: &BackendRequest) -> Result<String> {
        let hay = haystack(req);
        let digests = req.image_digests();
        let mut st = self.state.lock().expect("mock state");
        let hit = self
            .script
            .entries
            .iter()
            .enumerate()
            .find(|(i, e)| (e.repeat == 0 || st.uses[*i] > 0) && e.matches(req, &hay, &digests));
        let Some((i, entry)) = hit else {
            let short: Vec<&str> = digests.iter().map(|d| &d[..12]).collect();
            let msg = format!("{} request (text {hay:?}, images {short:?})", req.kind);
            log::warn!("mock: unmatched {msg}");
            return Err(Error::UnmatchedScriptRequest(msg));
        };
        if entry.repeat > 0 {
            st.uses[i] -= 1;
        }
        st.consumed.push(i);
        log::debug!("mock: entry {i} answers {}", req.kind);
        match (&entry.response, entry.error.as_deref()) {
            (Some(text), _) => Ok(text.clone()),
            (None, Some("refused")) => Err(Error::BackendRefused {
                status: 400,
                message: "scripted refusal".into(),
            }),
            (None, _) => Err(Error::BackendUnavailable("scripted outage".into())),
        }
    }
}
