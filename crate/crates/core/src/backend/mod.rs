//! Vision-language backend abstraction: typed requests, grounding checks,
//! and the shipped implementations.

mod mock;
mod recording;
mod remote;
mod synthetic;

use std::fmt;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

pub use mock::{MockEntry, MockScript, ScriptedMock, MOCK_SCRIPT_VERSION};
pub use recording::{RecordingBackend, WireRecord};
pub use remote::{BackendConfig, PromptTemplates, RemoteBackend, Template, TEMPLATES_VERSION};
pub use synthetic::SyntheticBackend;

use crate::error::{Error, Result};
use crate::image::{ImageBuffer, ObjectIndex};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RequestKind {
    GeneralDescription,
    ObjectDescriptions,
    SummaryOfChanges,
    Judgement,
    AnswerQuestion,
    Classify,
    ResolveReference,
}

impl RequestKind {
    pub const ALL: [RequestKind; 7] = [
        RequestKind::GeneralDescription,
        RequestKind::ObjectDescriptions,
        RequestKind::SummaryOfChanges,
        RequestKind::Judgement,
        RequestKind::AnswerQuestion,
        RequestKind::Classify,
        RequestKind::ResolveReference,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            RequestKind::GeneralDescription => "general_description",
            RequestKind::ObjectDescriptions => "object_descriptions",
            RequestKind::SummaryOfChanges => "summary_of_changes",
            RequestKind::Judgement => "judgement",
            RequestKind::AnswerQuestion => "answer_question",
            RequestKind::Classify => "classify",
            RequestKind::ResolveReference => "resolve_reference",
        }
    }

    /// Number of images the request must carry.
    pub fn image_count(&self) -> usize {
        match self {
            RequestKind::SummaryOfChanges | RequestKind::Judgement => 2,
            _ => 1,
        }
    }

    /// Context roles the request must carry, each exactly once, and nothing else.
    pub fn required_roles(&self) -> &'static [TextRole] {
        use TextRole::*;
        match self {
            RequestKind::GeneralDescription | RequestKind::SummaryOfChanges => &[],
            RequestKind::ObjectDescriptions => &[LiveIndices],
            RequestKind::Judgement => &[
                PrevGeneral,
                PrevObjects,
                NewGeneral,
                NewObjects,
                EditInstruction,
            ],
            RequestKind::AnswerQuestion => &[Question],
            RequestKind::Classify => &[Prompt],
            RequestKind::ResolveReference => &[Prompt, Candidates],
        }
    }
}

impl fmt::Display for RequestKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TextRole {
    PrevGeneral,
    PrevObjects,
    NewGeneral,
    NewObjects,
    EditInstruction,
    Question,
    Prompt,
    Candidates,
    LiveIndices,
}

impl TextRole {
    pub fn as_str(&self) -> &'static str {
        match self {
            TextRole::PrevGeneral => "prev_general",
            TextRole::PrevObjects => "prev_objects",
            TextRole::NewGeneral => "new_general",
            TextRole::NewObjects => "new_objects",
            TextRole::EditInstruction => "instruction",
            TextRole::Question => "question",
            TextRole::Prompt => "prompt",
            TextRole::Candidates => "candidates",
            TextRole::LiveIndices => "live_indices",
        }
    }

    /// Description texts, as opposed to user-authored input.
    pub fn is_description(&self) -> bool {
        matches!(
            self,
            TextRole::PrevGeneral | TextRole::PrevObjects | TextRole::NewGeneral | TextRole::NewObjects
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContextText {
    pub role: TextRole,
    pub text: String,
}

/// One call to a vision backend. Build through the constructors, which enforce
/// the grounding rules; the fields stay public so wrappers can inspect them.
#[derive(Debug, Clone)]
pub struct BackendRequest {
    pub kind: RequestKind,
    pub images: Vec<ImageBuffer>,
    pub texts: Vec<ContextText>,
}

/// Inputs to an AI judgement request.
#[derive(Debug, Clone, Default)]
pub struct JudgementContext {
    pub prev_general: String,
    pub prev_objects: String,
    pub new_general: String,
    pub new_objects: String,
    pub instruction: String,
}

impl BackendRequest {
    fn build(kind: RequestKind, images: Vec<ImageBuffer>, texts: Vec<(TextRole, String)>) -> Result<Self> {
        let req = Self {
            kind,
            images,
            texts: texts
                .into_iter()
                .map(|(role, text)| ContextText { role, text })
                .collect(),
        };
        check_grounding(&req)?;
        Ok(req)
    }

    pub fn general_description(img: &ImageBuffer) -> Self {
        Self::build(RequestKind::GeneralDescription, vec![img.clone()], vec![]).expect("well-formed")
    }

    /// `som` must be the Set-of-Mark overlay of the image being described.
    pub fn object_descriptions(som: &ImageBuffer, live: &[ObjectIndex]) -> Result<Self> {
        Self::build(
            RequestKind::ObjectDescriptions,
            vec![som.clone()],
            vec![(TextRole::LiveIndices, format_indices(live))],
        )
    }

    pub fn summary_of_changes(before: &ImageBuffer, after: &ImageBuffer) -> Result<Self> {
        same_size(before, after)?;
        Self::build(RequestKind::SummaryOfChanges, vec![before.clone(), after.clone()], vec![])
    }

    pub fn judgement(before: &ImageBuffer, after: &ImageBuffer, ctx: &JudgementContext) -> Result<Self> {
        same_size(before, after)?;
        Self::build(
            RequestKind::Judgement,
            vec![before.clone(), after.clone()],
            vec![
                (TextRole::PrevGeneral, ctx.prev_general.clone()),
                (TextRole::PrevObjects, ctx.prev_objects.clone()),
                (TextRole::NewGeneral, ctx.new_general.clone()),
                (TextRole::NewObjects, ctx.new_objects.clone()),
                (TextRole::EditInstruction, ctx.instruction.clone()),
            ],
        )
    }

    pub fn answer_question(img: &ImageBuffer, question: &str) -> Result<Self> {
        Self::build(
            RequestKind::AnswerQuestion,
            vec![img.clone()],
            vec![(TextRole::Question, question.to_string())],
        )
    }

    pub fn classify(img: &ImageBuffer, prompt: &str) -> Result<Self> {
        Self::build(
            RequestKind::Classify,
            vec![img.clone()],
            vec![(TextRole::Prompt, prompt.to_string())],
        )
    }

    /// `candidates` lists live objects as `(index, description)`.
    pub fn resolve_reference(
        som: &ImageBuffer,
        prompt: &str,
        candidates: &[(ObjectIndex, String)],
    ) -> Result<Self> {
        let listing = candidates
            .iter()
            .map(|(i, d)| format!("Object {i}: {d}"))
            .collect::<Vec<_>>()
            .join("\n");
        Self::build(
            RequestKind::ResolveReference,
            vec![som.clone()],
            vec![
                (TextRole::Prompt, prompt.to_string()),
                (TextRole::Candidates, listing),
            ],
        )
    }

    pub fn text(&self, role: TextRole) -> Option<&str> {
        self.texts.iter().find(|t| t.role == role).map(|t| t.text.as_str())
    }

    pub fn image_digests(&self) -> Vec<String> {
        self.images.iter().map(ImageBuffer::digest).collect()
    }
}

fn same_size(a: &ImageBuffer, b: &ImageBuffer) -> Result<()> {
    if a.dimensions() != b.dimensions() {
        return Err(Error::PreconditionViolation(format!(
            "before {:?} and after {:?} differ in size",
            a.dimensions(),
            b.dimensions()
        )));
    }
    Ok(())
}

fn format_indices(live: &[ObjectIndex]) -> String {
    live.iter().map(u32::to_string).collect::<Vec<_>>().join(", ")
}

/// Checks image count and context roles against the request kind.
pub fn check_grounding(req: &BackendRequest) -> Result<()> {
    let want = req.kind.image_count();
    if req.images.len() != want {
        return Err(Error::PreconditionViolation(format!(
            "{} carries {} image(s), expected {want}",
            req.kind,
            req.images.len()
        )));
    }
    let required = req.kind.required_roles();
    for role in required {
        let n = req.texts.iter().filter(|t| t.role == *role).count();
        if n != 1 {
            return Err(Error::PreconditionViolation(format!(
                "{} needs exactly one `{}` text, found {n}",
                req.kind,
                role.as_str()
            )));
        }
    }
    if let Some(extra) = req.texts.iter().find(|t| !required.contains(&t.role)) {
        return Err(Error::PreconditionViolation(format!(
            "{} must not carry `{}` text",
            req.kind,
            extra.role.as_str()
        )));
    }
    let user_input = [TextRole::Question, TextRole::Prompt, TextRole::EditInstruction];
    if let Some(empty) = req
        .texts
        .iter()
        .find(|t| t.text.trim().is_empty() && (t.role.is_description() || user_input.contains(&t.role)))
    {
        return Err(Error::PreconditionViolation(format!(
            "{} has an empty `{}` text",
            req.kind,
            empty.role.as_str()
        )));
    }
    Ok(())
}

/// A vision-language model. Implementations return the raw response text.
pub trait VisionBackend: Send + Sync {
    fn name(&self) -> &str;

    fn complete(&self, req: &BackendRequest) -> Result<String>;
}

impl<B: VisionBackend + ?Sized> VisionBackend for std::sync::Arc<B> {
    fn name(&self) -> &str {
        (**self).name()
    }

    fn complete(&self, req: &BackendRequest) -> Result<String> {
        (**self).complete(req)
    }
}

fn object_line() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"(?i)^\s*[-*]?\s*(?:object\s*)?#?\s*(\d+)\s*[:.)\-]\s*(.+?)\s*$").expect("valid regex")
    })
}

/// Parses `Object <n>: <text>` lines (also `<n>.` / `<n>)` / `#<n>:`).
/// Lines for indices outside `live` are dropped; the first line per index wins.
pub fn parse_object_descriptions(text: &str, live: &[ObjectIndex]) -> Result<Vec<(ObjectIndex, String)>> {
    let mut found: Vec<(ObjectIndex, String)> = Vec::new();
    for line in text.lines() {
        let Some(c) = object_line().captures(line) else {
            continue;
        };
        let Ok(idx) = c[1].parse::<ObjectIndex>() else {
            continue;
        };
        let body = c[2].trim();
        if !live.contains(&idx) || body.is_empty() || found.iter().any(|(i, _)| *i == idx) {
            continue;
        }
        found.push((idx, body.to_string()));
    }
    let mut out = Vec::with_capacity(live.len());
    for &i in live {
        match found.iter().find(|(j, _)| *j == i) {
            Some(entry) => out.push(entry.clone()),
            None => return Err(Error::MissingIndexInResponse(i)),
        }
    }
    Ok(out)
}
