//! Prompt routing: question vs. edit, edit intent extraction, and object
//! reference resolution. The rule path is a pure function of the prompt and
//! the registry; the backend path asks the vision model and falls back to the
//! rules when it fails.

pub mod corpus;
mod lexicon;
mod parse;
mod resolve;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use lexicon::{has_phrase, normalize, stem, words, Lexicon, WordGroup, LEXICON_VERSION};
pub use parse::{extract_payload, parse_anchor};
pub use resolve::{score_reference, ReferenceScore};

use crate::backend::{BackendRequest, VisionBackend};
use crate::edit::{ColorNameTable, EditAction, TextTarget};
use crate::error::{Error, Result};
use crate::image::{ImageBuffer, ObjectIndex};
use crate::registry::ObjectRegistry;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PromptKind {
    Question,
    Edit,
}

impl fmt::Display for PromptKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PromptKind::Question => "question",
            PromptKind::Edit => "edit",
        })
    }
}

/// Which routing tier produced a decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RoutingTier {
    Backend,
    Rules,
}

/// Whether routing consults the backend first or uses only the rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RoutingMode {
    #[default]
    Rules,
    BackendFirst,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "by", content = "value", rename_all = "snake_case")]
pub enum ObjectRef {
    Index(ObjectIndex),
    Name(String),
    None,
}

/// A parsed edit: the action, how the user referred to the object, and the
/// object it resolved to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EditIntent {
    pub action: EditAction,
    pub object_ref: ObjectRef,
    pub resolved_index: Option<ObjectIndex>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoutedPrompt {
    pub kind: PromptKind,
    pub raw_text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intent: Option<EditIntent>,
    pub classified_by: RoutingTier,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolved_by: Option<RoutingTier>,
}

/// What the backend tier needs: the model plus the current image and its overlay.
#[derive(Clone, Copy)]
pub struct RouteContext<'a> {
    pub backend: &'a dyn VisionBackend,
    pub image: &'a ImageBuffer,
    pub som: &'a ImageBuffer,
}

#[derive(Debug, Clone, Default)]
pub struct Router {
    lexicon: Lexicon,
    colors: ColorNameTable,
    mode: RoutingMode,
}

impl Router {
    pub fn new(lexicon: Lexicon, colors: ColorNameTable, mode: RoutingMode) -> Self {
        Self {
            lexicon,
            colors,
            mode,
        }
    }

    pub fn with_mode(mode: RoutingMode) -> Self {
        Self {
            mode,
            ..Self::default()
        }
    }

    pub fn mode(&self) -> RoutingMode {
        self.mode
    }

    pub fn lexicon(&self) -> &Lexicon {
        &self.lexicon
    }

    pub fn colors(&self) -> &ColorNameTable {
        &self.colors
    }

    /// Rule-based classification.
    pub fn classify(&self, text: &str) -> Result<PromptKind> {
        let ws = words(text);
        if ws.is_empty() {
            return Err(Error::EmptyPrompt);
        }
        let lex = &self.lexicon;
        let first = ws
            .iter()
            .find(|w| !matches!(w.as_str(), "please" | "kindly" | "hey" | "ok" | "okay" | "now" | "so"))
            .unwrap_or(&ws[0]);
        if lex.interrogatives.contains(first) || lex.informational.contains(first) {
            return Ok(PromptKind::Question);
        }
        if text.trim_end().ends_with('?') {
            return Ok(PromptKind::Question);
        }
        let norm = normalize(text);
        let groups = [&lex.blur, &lex.remove, &lex.brightness, &lex.color];
        let in_group = groups
            .iter()
            .any(|g| ws.iter().any(|w| g.words.contains(w)) || g.phrases.iter().any(|p| has_phrase(&norm, p)));
        let other = [&lex.generic_edit, &lex.unsupported, &lex.text.verbs];
        if in_group || other.iter().any(|list| ws.iter().any(|w| list.contains(w))) {
            return Ok(PromptKind::Edit);
        }
        Ok(PromptKind::Question)
    }

    /// Rule-based intent extraction, with the object resolved against `registry`.
    pub fn parse_edit_intent(&self, text: &str, registry: &ObjectRegistry) -> Result<EditIntent> {
        let mut intent = parse::parse(self, text)?;
        if intent.action.needs_object() {
            intent.resolved_index = Some(self.resolve_object_reference(&intent.object_ref, registry)?);
        }
        Ok(intent)
    }

    /// Rule-based reference resolution.
    pub fn resolve_object_reference(&self, r: &ObjectRef, registry: &ObjectRegistry) -> Result<ObjectIndex> {
        match r {
            ObjectRef::Index(i) => {
                registry.check_live(*i)?;
                Ok(*i)
            }
            ObjectRef::Name(name) => resolve::resolve_name(&self.lexicon, name, registry),
            ObjectRef::None => Err(Error::MissingParameter("object".into())),
        }
    }

    /// Full routing. In [`RoutingMode::BackendFirst`] with a context the
    /// backend classifies the prompt and resolves named references; any
    /// backend failure there falls back to the rules.
    pub fn route(&self, text: &str, registry: &ObjectRegistry, ctx: Option<RouteContext<'_>>) -> Result<RoutedPrompt> {
        if text.trim().is_empty() {
            return Err(Error::EmptyPrompt);
        }
        let ctx = ctx.filter(|_| self.mode == RoutingMode::BackendFirst);
        let (kind, classified_by) = match ctx.and_then(|c| self.classify_backend(text, c)) {
            Some(k) => (k, RoutingTier::Backend),
            None => (self.classify(text)?, RoutingTier::Rules),
        };
        let mut routed = RoutedPrompt {
            kind,
            raw_text: text.to_string(),
            intent: None,
            classified_by,
            resolved_by: None,
        };
        if kind == PromptKind::Question {
            return Ok(routed);
        }
        let mut intent = parse::parse(self, text)?;
        if intent.action.needs_object() {
            let by_backend = match (&intent.object_ref, ctx) {
                (ObjectRef::Name(_), Some(c)) => self.resolve_backend(text, registry, c)?,
                _ => None,
            };
            let (idx, tier) = match by_backend {
                Some(i) => (i, RoutingTier::Backend),
                None => (
                    self.resolve_object_reference(&intent.object_ref, registry)?,
                    RoutingTier::Rules,
                ),
            };
            intent.resolved_index = Some(idx);
            routed.resolved_by = Some(tier);
        }
        routed.intent = Some(intent);
        Ok(routed)
    }

    fn classify_backend(&self, text: &str, ctx: RouteContext<'_>) -> Option<PromptKind> {
        let req = BackendRequest::classify(ctx.image, text).ok()?;
        match ctx.backend.complete(&req) {
            Ok(reply) => {
                let w = words(&reply);
                match w.first().map(String::as_str) {
                    Some("edit") => Some(PromptKind::Edit),
                    Some("question") => Some(PromptKind::Question),
                    _ => {
                        log::warn!("unusable classification {reply:?}; using rules");
                        None
                    }
                }
            }
            Err(e) => {
                log::warn!("backend classification failed ({e}); using rules");
                None
            }
        }
    }

    /// `Ok(None)` means "fall back to the rules"; an explicit "none" from the
    /// backend is a grounding failure and is reported as such.
    fn resolve_backend(&self, text: &str, registry: &ObjectRegistry, ctx: RouteContext<'_>) -> Result<Option<ObjectIndex>> {
        let candidates: Vec<(ObjectIndex, String)> =
            registry.live().map(|e| (e.index, e.description.clone())).collect();
        let Ok(req) = BackendRequest::resolve_reference(ctx.som, text, &candidates) else {
            return Ok(None);
        };
        let reply = match ctx.backend.complete(&req) {
            Ok(r) => r,
            Err(e) => {
                log::warn!("backend reference resolution failed ({e}); using rules");
                return Ok(None);
            }
        };
        let w = words(&reply);
        if w.first().map(String::as_str) == Some("none") {
            return Err(Error::NoMatchingObject {
                reference: text.to_string(),
                candidates: Vec::new(),
            });
        }
        match w.iter().find_map(|t| t.parse::<ObjectIndex>().ok()) {
            Some(i) if registry.check_live(i).is_ok() => Ok(Some(i)),
            _ => {
                log::warn!("unusable reference reply {reply:?}; using rules");
                Ok(None)
            }
        }
    }
}

/// Asks the backend a question about the current image.
pub fn answer_question(question: &str, image: &ImageBuffer, backend: &dyn VisionBackend) -> Result<String> {
    backend.complete(&BackendRequest::answer_question(image, question)?)
}

impl EditIntent {
    /// Object the intent applies to, if any.
    pub fn object(&self) -> Option<ObjectIndex> {
        match &self.action {
            EditAction::AddText {
                target: TextTarget::Anchor(_),
                ..
            } => None,
            _ => self.resolved_index,
        }
    }
}
