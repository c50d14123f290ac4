//! The four verification texts produced after every edit, and their chat layout.

use serde::{Deserialize, Serialize};

use crate::backend::{parse_object_descriptions, BackendRequest, JudgementContext, RequestKind, VisionBackend};
use crate::error::Result;
use crate::image::{render_som_overlay, ImageBuffer, LabelMap, ObjectIndex};
use crate::par;
use crate::registry::{ObjectRegistry, REMOVED};

pub const SUMMARY_UNAVAILABLE: &str = "[Summary of Visual Changes unavailable]";
pub const JUDGEMENT_UNAVAILABLE: &str = "[AI Judgement unavailable]";
pub const GENERAL_UNAVAILABLE: &str = "[Updated General Description unavailable]";
pub const DESCRIPTION_UNAVAILABLE: &str = "[description unavailable]";

/// Level-2 titles in their fixed order.
pub const SECTION_TITLES: [&str; 4] = [
    "Summary of Visual Changes",
    "AI Judgement",
    "Updated General Description",
    "Updated Object Descriptions",
];

/// One backend call as recorded in a transcript.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Exchange {
    pub kind: RequestKind,
    pub images: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub response: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Sends `req` and records the exchange.
pub fn call(backend: &dyn VisionBackend, req: &BackendRequest) -> (Result<String>, Exchange) {
    let result = backend.complete(req);
    let exchange = Exchange {
        kind: req.kind,
        images: req.image_digests(),
        response: result.as_ref().ok().cloned(),
        error: result.as_ref().err().map(|e| format!("{}: {e}", e.kind())),
    };
    (result, exchange)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObjectFeedback {
    pub index: ObjectIndex,
    /// `None` once the object has been removed.
    pub description: Option<String>,
}

impl ObjectFeedback {
    pub fn line(&self) -> String {
        match &self.description {
            Some(d) => format!("Object {}: {d}", self.index),
            None => format!("Object {}: {REMOVED}", self.index),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationBundle {
    pub summary: String,
    pub judgement: String,
    pub general: String,
    pub objects: Vec<ObjectFeedback>,
}

impl VerificationBundle {
    pub fn object_lines(&self) -> Vec<String> {
        self.objects.iter().map(ObjectFeedback::line).collect()
    }
}

/// Everything the feedback step needs about an edit that has already been applied.
pub struct FeedbackInput<'a> {
    pub before: &'a ImageBuffer,
    pub after: &'a ImageBuffer,
    /// The session's label map; removed objects are filtered out here.
    pub labels: &'a LabelMap,
    pub registry_before: &'a ObjectRegistry,
    /// Registry after the edit with removals applied but descriptions not yet refreshed.
    pub registry_after: &'a ObjectRegistry,
    pub instruction: &'a str,
    /// Skip re-describing objects (text placed on the image rather than on an object).
    pub keep_object_descriptions: bool,
}

#[derive(Debug, Clone)]
pub struct FeedbackOutcome {
    pub bundle: VerificationBundle,
    /// `registry_after` with refreshed descriptions where they were obtained.
    pub registry: ObjectRegistry,
    pub exchanges: Vec<Exchange>,
}

/// Runs the summary, general and object requests (concurrently under the
/// `parallel` feature), then the judgement. Failed parts become marker text.
pub fn generate_verification(input: &FeedbackInput<'_>, backend: &dyn VisionBackend) -> FeedbackOutcome {
    let live = input.registry_after.live_indices();
    let (summary, general, objects) = par::join3(
        || match BackendRequest::summary_of_changes(input.before, input.after) {
            Ok(req) => {
                let (r, x) = call(backend, &req);
                (r, Some(x))
            }
            Err(e) => (Err(e), None),
        },
        || call(backend, &BackendRequest::general_description(input.after)),
        || {
            if input.keep_object_descriptions || live.is_empty() {
                return None;
            }
            let som = render_som_overlay(input.after, &input.registry_after.live_map(input.labels));
            Some(match BackendRequest::object_descriptions(&som, &live) {
                Ok(req) => {
                    let (r, x) = call(backend, &req);
                    (r.and_then(|text| parse_object_descriptions(&text, &live)), Some(x))
                }
                Err(e) => (Err(e), None),
            })
        },
    );

    let mut exchanges = Vec::new();
    let mut registry = input.registry_after.clone();

    let (summary, x) = summary;
    exchanges.extend(x);
    let summary = summary.unwrap_or_else(|e| {
        log::warn!("summary of changes failed: {e}");
        SUMMARY_UNAVAILABLE.to_string()
    });

    let (general, x) = general;
    exchanges.push(x);
    let general = match general {
        Ok(g) => {
            registry.general = g.clone();
            g
        }
        Err(e) => {
            log::warn!("general description failed: {e}");
            GENERAL_UNAVAILABLE.to_string()
        }
    };

    let mut fresh = true;
    if let Some((descs, x)) = objects {
        exchanges.extend(x);
        match descs {
            Ok(d) => registry.update_descriptions(&d),
            Err(e) => {
                log::warn!("object descriptions failed: {e}");
                fresh = false;
            }
        }
    }
    let objects: Vec<ObjectFeedback> = registry
        .entries()
        .iter()
        .map(|e| ObjectFeedback {
            index: e.index,
            description: e.is_live().then(|| {
                if fresh {
                    e.description.clone()
                } else {
                    DESCRIPTION_UNAVAILABLE.to_string()
                }
            }),
        })
        .collect();

    let ctx = JudgementContext {
        prev_general: input.registry_before.general.clone(),
        prev_objects: input.registry_before.listing(),
        new_general: general.clone(),
        new_objects: objects.iter().map(ObjectFeedback::line).collect::<Vec<_>>().join("\n"),
        instruction: input.instruction.to_string(),
    };
    let judgement = match BackendRequest::judgement(input.before, input.after, &ctx) {
        Ok(req) => {
            let (r, x) = call(backend, &req);
            exchanges.push(x);
            r
        }
        Err(e) => Err(e),
    };
    let judgement = judgement.unwrap_or_else(|e| {
        log::warn!("judgement failed: {e}");
        JUDGEMENT_UNAVAILABLE.to_string()
    });

    FeedbackOutcome {
        bundle: VerificationBundle {
            summary,
            judgement,
            general,
            objects,
        },
        registry,
        exchanges,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Author {
    User,
    System,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatEntry {
    pub heading_level: Option<u8>,
    pub author: Author,
    pub text: String,
    pub linked_edit_seq: Option<u32>,
}

impl ChatEntry {
    pub fn user(text: impl Into<String>) -> Self {
        Self {
            heading_level: None,
            author: Author::User,
            text: text.into(),
            linked_edit_seq: None,
        }
    }

    pub fn system(text: impl Into<String>) -> Self {
        Self {
            heading_level: None,
            author: Author::System,
            text: text.into(),
            linked_edit_seq: None,
        }
    }

    pub fn linked(mut self, seq: u32) -> Self {
        self.linked_edit_seq = Some(seq);
        self
    }

    fn heading(level: u8, text: String, seq: u32) -> Self {
        Self {
            heading_level: Some(level),
            author: Author::System,
            text,
            linked_edit_seq: Some(seq),
        }
    }
}

pub fn edit_heading(seq: u32) -> String {
    format!("Verification Output of Edit #{seq} starts from here")
}

pub fn section_heading(seq: u32, section: usize) -> String {
    format!("[#{seq}] {}", SECTION_TITLES[section])
}

/// Chat entries for one edit's verification output.
pub fn format_chat_entries(seq: u32, bundle: &VerificationBundle) -> Vec<ChatEntry> {
    let body = |text: &str| ChatEntry::system(text).linked(seq);
    let mut out = vec![ChatEntry::heading(1, edit_heading(seq), seq)];
    for (i, text) in [&bundle.summary, &bundle.judgement, &bundle.general].into_iter().enumerate() {
        out.push(ChatEntry::heading(2, section_heading(seq, i), seq));
        out.push(body(text));
    }
    out.push(ChatEntry::heading(2, section_heading(seq, 3), seq));
    out.extend(bundle.object_lines().iter().map(|l| body(l)));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bundle() -> VerificationBundle {
        VerificationBundle {
            summary: "s".into(),
            judgement: "j".into(),
            general: "g".into(),
            objects: vec![
                ObjectFeedback {
                    index: 1,
                    description: Some("wall".into()),
                },
                ObjectFeedback {
                    index: 2,
                    description: None,
                },
            ],
        }
    }

    #[test]
    fn chat_layout() {
        let entries = format_chat_entries(4, &bundle());
        let headings: Vec<(u8, &str)> = entries
            .iter()
            .filter_map(|e| e.heading_level.map(|l| (l, e.text.as_str())))
            .collect();
        assert_eq!(
            headings,
            vec![
                (1, "Verification Output of Edit #4 starts from here"),
                (2, "[#4] Summary of Visual Changes"),
                (2, "[#4] AI Judgement"),
                (2, "[#4] Updated General Description"),
                (2, "[#4] Updated Object Descriptions"),
            ]
        );
        let last: Vec<&str> = entries.iter().rev().take(2).map(|e| e.text.as_str()).collect();
        assert_eq!(last, vec!["Object 2: [removed]", "Object 1: wall"]);
        assert!(entries.iter().all(|e| e.linked_edit_seq == Some(4)));
        assert_eq!(entries, format_chat_entries(4, &bundle()));
    }
}
