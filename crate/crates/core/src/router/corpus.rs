//! Labelled prompt sets for measuring the rule router.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{PromptKind, Router};
use crate::edit::{ActionKind, EditAction, TextTarget};
use crate::error::{Error, Result};
use crate::image::{Anchor, ObjectIndex};
use crate::registry::{ObjectEntry, ObjectRegistry, ObjectStatus};

pub const CORPUS_VERSION: u32 = 1;

/// Object descriptions numbered from 1 in list order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scene {
    pub general: String,
    pub objects: Vec<String>,
}

impl Scene {
    pub fn registry(&self) -> ObjectRegistry {
        let entries = self
            .objects
            .iter()
            .enumerate()
            .map(|(i, d)| ObjectEntry {
                index: i as ObjectIndex + 1,
                description: d.clone(),
                status: ObjectStatus::Live,
            })
            .collect();
        ObjectRegistry::from_entries(self.general.clone(), entries)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusPrompt {
    pub prompt: String,
    pub scene: String,
    /// Objects already removed when the prompt is issued.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub removed: Vec<ObjectIndex>,
    pub kind: PromptKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub action: Option<ActionKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub object: Option<ObjectIndex>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub anchor: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub color: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
    /// Expected error kind; when set the prompt must fail with it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Corpus {
    pub version: u32,
    /// Scenes defined inline; others are looked up by the caller.
    #[serde(default)]
    pub scenes: BTreeMap<String, Scene>,
    pub prompts: Vec<CorpusPrompt>,
}

impl Corpus {
    pub fn from_json(text: &str) -> Result<Self> {
        let c: Corpus = serde_json::from_str(text)?;
        if c.version != CORPUS_VERSION {
            return Err(Error::Config(format!("corpus version {} is not supported", c.version)));
        }
        Ok(c)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::UnreadableFile {
            path: path.display().to_string(),
            reason: e.to_string(),
        })?;
        Self::from_json(&text)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusOutcome {
    pub prompt: String,
    pub kind_ok: bool,
    /// `None` for questions.
    pub intent_ok: Option<bool>,
    /// What the router produced, for reports.
    pub got: String,
}

#[derive(Debug, Clone, Default)]
pub struct CorpusReport {
    pub outcomes: Vec<CorpusOutcome>,
}

impl CorpusReport {
    pub fn classification_accuracy(&self) -> f64 {
        ratio(self.outcomes.iter().filter(|o| o.kind_ok).count(), self.outcomes.len())
    }

    /// Share of edit prompts whose action and object (or anchor, or expected error) match.
    pub fn intent_accuracy(&self) -> f64 {
        let edits: Vec<bool> = self.outcomes.iter().filter_map(|o| o.intent_ok).collect();
        ratio(edits.iter().filter(|ok| **ok).count(), edits.len())
    }

    pub fn failures(&self) -> impl Iterator<Item = &CorpusOutcome> {
        self.outcomes.iter().filter(|o| !o.kind_ok || o.intent_ok == Some(false))
    }
}

fn ratio(n: usize, d: usize) -> f64 {
    if d == 0 {
        1.0
    } else {
        n as f64 / d as f64
    }
}

/// Runs every prompt through the rule path. `scene` supplies registries for
/// scenes the corpus does not define inline.
pub fn evaluate(
    router: &Router,
    corpus: &Corpus,
    scene: &dyn Fn(&str) -> Option<ObjectRegistry>,
) -> Result<CorpusReport> {
    let mut report = CorpusReport::default();
    for p in &corpus.prompts {
        let mut registry = match corpus.scenes.get(&p.scene) {
            Some(s) => s.registry(),
            None => scene(&p.scene).ok_or_else(|| Error::MissingFixture(format!("scene `{}`", p.scene)))?,
        };
        for &i in &p.removed {
            registry.mark_removed(i)?;
        }
        let kind = router.classify(&p.prompt);
        let kind_ok = matches!(kind, Ok(k) if k == p.kind);
        let (intent_ok, got) = match p.kind {
            PromptKind::Question => (None, format!("{kind:?}")),
            PromptKind::Edit => {
                let parsed = router.parse_edit_intent(&p.prompt, &registry);
                let got = match &parsed {
                    Ok(i) => format!("{:?} on {:?}", i.action, i.resolved_index),
                    Err(e) => format!("{}: {e}", e.kind()),
                };
                (Some(intent_matches(p, &parsed)), got)
            }
        };
        report.outcomes.push(CorpusOutcome {
            prompt: p.prompt.clone(),
            kind_ok,
            intent_ok,
            got,
        });
    }
    Ok(report)
}

fn intent_matches(p: &CorpusPrompt, parsed: &Result<super::EditIntent>) -> bool {
    let intent = match (parsed, &p.error) {
        (Err(e), Some(want)) => return e.kind() == want,
        (Ok(_), Some(_)) | (Err(_), None) => return false,
        (Ok(i), None) => i,
    };
    if p.action.is_some_and(|a| a != intent.action.kind()) {
        return false;
    }
    if p.object.is_some() && intent.object() != p.object {
        return false;
    }
    match &intent.action {
        EditAction::ChangeColor { color, .. } => p.color.as_ref().is_none_or(|c| c.eq_ignore_ascii_case(color)),
        EditAction::AddText { text, target } => {
            let text_ok = p.text.as_ref().is_none_or(|t| t == text);
            let anchor_ok = match (&p.anchor, target) {
                (None, _) => true,
                (Some(want), TextTarget::Anchor(a)) => want.parse::<Anchor>().is_ok_and(|w| w == *a),
                (Some(_), TextTarget::Object) => false,
            };
            text_ok && anchor_ok
        }
        _ => true,
    }
}
