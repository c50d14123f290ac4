use std::path::Path;

use serde::{Deserialize, Serialize};

use super::SessionConfig;
use crate::edit::TextPlacement;
use crate::error::{Error, Result};
use crate::feedback::{ChatEntry, Exchange, VerificationBundle};
use crate::image::ObjectIndex;
use crate::registry::{ObjectEntry, ObjectRegistry};
use crate::router::{EditIntent, PromptKind, RoutedPrompt, RoutingTier};

pub const TRANSCRIPT_VERSION: u32 = 1;

/// Descriptions obtained when the session was opened.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialDescriptions {
    pub general: String,
    pub objects: Vec<ObjectEntry>,
    pub exchanges: Vec<Exchange>,
}

impl InitialDescriptions {
    pub fn registry(&self) -> ObjectRegistry {
        ObjectRegistry::from_entries(self.general.clone(), self.objects.clone())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoutingInfo {
    pub kind: PromptKind,
    pub classified_by: RoutingTier,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolved_by: Option<RoutingTier>,
}

impl From<&RoutedPrompt> for RoutingInfo {
    fn from(r: &RoutedPrompt) -> Self {
        Self {
            kind: r.kind,
            classified_by: r.classified_by,
            resolved_by: r.resolved_by,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EditEvent {
    pub seq: u32,
    pub intent: EditIntent,
    pub digest_before: String,
    pub digest_after: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub placement: Option<TextPlacement>,
    pub bundle: VerificationBundle,
    pub registry_after: ObjectRegistry,
    pub exchanges: Vec<Exchange>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum PromptOutcomeRecord {
    Answer {
        answer: String,
        exchanges: Vec<Exchange>,
    },
    Edit(Box<EditEvent>),
    Error {
        kind: String,
        message: String,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        candidates: Vec<ObjectIndex>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        exchanges: Vec<Exchange>,
    },
}

impl PromptOutcomeRecord {
    pub(crate) fn error(e: &Error, exchanges: Vec<Exchange>) -> Self {
        PromptOutcomeRecord::Error {
            kind: e.kind().to_string(),
            message: e.to_string(),
            candidates: e.candidates().to_vec(),
            exchanges,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptEvent {
    pub text: String,
    /// Absent when the edit was applied directly rather than routed from text.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub routing: Option<RoutingInfo>,
    /// The intent of a directly applied edit, so it can be replayed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intent: Option<EditIntent>,
    pub outcome: PromptOutcomeRecord,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SessionEvent {
    Prompt(PromptEvent),
    Undo { seq: u32 },
    Redo { seq: u32 },
}

/// Everything needed to replay a session against a scripted backend, or to
/// rebuild it from disk without one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionTranscript {
    pub version: u32,
    pub session_id: String,
    pub config: SessionConfig,
    pub inpainter: String,
    pub original_digest: String,
    pub labels_digest: String,
    pub initial: InitialDescriptions,
    pub events: Vec<SessionEvent>,
    pub cursor: usize,
    pub current_digest: String,
    pub chat: Vec<ChatEntry>,
}

impl SessionTranscript {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("transcript serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        match value.get("version").and_then(|v| v.as_u64()) {
            Some(v) if v == TRANSCRIPT_VERSION as u64 => {}
            other => {
                return Err(Error::Config(format!(
                    "transcript version {other:?} is not supported (expected {TRANSCRIPT_VERSION})"
                )))
            }
        }
        Ok(serde_json::from_value(value)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::UnreadableFile {
            path: path.display().to_string(),
            reason: e.to_string(),
        })?;
        Self::from_json(&text)
    }

    /// Edit events in the order they were applied.
    pub fn edits(&self) -> impl Iterator<Item = &EditEvent> {
        self.events.iter().filter_map(|e| match e {
            SessionEvent::Prompt(PromptEvent {
                outcome: PromptOutcomeRecord::Edit(ed),
                ..
            }) => Some(ed.as_ref()),
            _ => None,
        })
    }
}
