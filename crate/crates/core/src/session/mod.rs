//! One editing loop: image history, object registry, chat log, undo/redo.

mod replay;
mod transcript;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use replay::{replay, EditCheck, ReplayReport};
pub use transcript::{
    EditEvent, InitialDescriptions, PromptEvent, PromptOutcomeRecord, RoutingInfo, SessionEvent, SessionTranscript,
    TRANSCRIPT_VERSION,
};

use crate::backend::{parse_object_descriptions, BackendRequest, VisionBackend};
use crate::edit::{apply_action, BoundaryFill, EditAction, EditConfig, InpaintStrategy, TextPlacement, TextTarget};
use crate::error::{Error, Result};
use crate::feedback::{
    call, format_chat_entries, generate_verification, ChatEntry, Exchange, FeedbackInput, VerificationBundle,
};
use crate::image::{render_som_overlay, ImageBuffer, LabelMap};
use crate::registry::ObjectRegistry;
use crate::router::{EditIntent, PromptKind, RouteContext, RoutedPrompt, Router, RoutingMode};
use crate::segmentation::SegmentationProvider;

pub const DEFAULT_MAX_EDITS: usize = 50;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SessionConfig {
    pub edit: EditConfig,
    pub max_edits: usize,
    pub routing: RoutingMode,
}

impl Default for SessionConfig {
    fn default() -> Self {
        Self {
            edit: EditConfig::default(),
            max_edits: DEFAULT_MAX_EDITS,
            routing: RoutingMode::Rules,
        }
    }
}

#[derive(Debug, Clone)]
pub struct EditRecord {
    pub seq: u32,
    pub prompt: String,
    pub intent: EditIntent,
    pub image_before: Arc<ImageBuffer>,
    pub image_after: Arc<ImageBuffer>,
    pub registry_before: ObjectRegistry,
    pub registry_after: ObjectRegistry,
    pub verification: VerificationBundle,
    pub placement: Option<TextPlacement>,
}

/// What a prompt produced.
#[derive(Debug, Clone)]
pub struct PromptResult {
    pub routed: RoutedPrompt,
    pub answer: Option<String>,
    /// Edit number and bundle when the prompt was an edit.
    pub edit: Option<(u32, VerificationBundle)>,
    /// Chat entries this prompt appended.
    pub chat: Vec<ChatEntry>,
}

pub struct EditSession {
    id: String,
    original: Arc<ImageBuffer>,
    labels: LabelMap,
    initial: InitialDescriptions,
    history: Vec<EditRecord>,
    cursor: usize,
    chat: Vec<ChatEntry>,
    events: Vec<SessionEvent>,
    config: SessionConfig,
    backend: Arc<dyn VisionBackend>,
    inpainter: Arc<dyn InpaintStrategy>,
    router: Router,
}

impl std::fmt::Debug for EditSession {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("EditSession")
            .field("id", &self.id)
            .field("edits", &self.history.len())
            .field("cursor", &self.cursor)
            .field("backend", &self.backend.name())
            .field("inpainter", &self.inpainter.name())
            .finish()
    }
}

/// Chat lines that seed a new session.
fn initial_chat(initial: &InitialDescriptions) -> Vec<ChatEntry> {
    let mut chat = vec![ChatEntry::system(initial.general.clone())];
    chat.extend(initial.objects.iter().map(|o| ChatEntry::system(o.line())));
    chat
}

impl EditSession {
    /// Opens a session. `labels` wins over `segmentation`; with neither the
    /// session cannot be created.
    pub fn new(
        image: ImageBuffer,
        labels: Option<LabelMap>,
        segmentation: Option<&dyn SegmentationProvider>,
        backend: Arc<dyn VisionBackend>,
        config: SessionConfig,
    ) -> Result<Self> {
        let labels = match (labels, segmentation) {
            (Some(l), _) => l,
            (None, Some(p)) => p.segment(&image)?,
            (None, None) => {
                return Err(Error::SegmentationUnavailable(
                    "no label map supplied and no segmentation provider configured".into(),
                ))
            }
        };
        labels.check_dimensions(image.dimensions())?;

        let mut exchanges = Vec::new();
        let (general, x) = call(backend.as_ref(), &BackendRequest::general_description(&image));
        exchanges.push(x);
        let general = general?;
        let indices = labels.indices();
        let descriptions = if indices.is_empty() {
            Vec::new()
        } else {
            let som = render_som_overlay(&image, &labels);
            let (reply, x) = call(backend.as_ref(), &BackendRequest::object_descriptions(&som, &indices)?);
            exchanges.push(x);
            parse_object_descriptions(&reply?, &indices)?
        };
        let registry = ObjectRegistry::from_descriptions(&labels, general.clone(), &descriptions)?;
        let initial = InitialDescriptions {
            general,
            objects: registry.entries().to_vec(),
            exchanges,
        };
        let id = image.digest()[..12].to_string();
        Ok(Self {
            id,
            original: Arc::new(image),
            labels,
            chat: initial_chat(&initial),
            initial,
            history: Vec::new(),
            cursor: 0,
            events: Vec::new(),
            router: Router::with_mode(config.routing),
            config,
            backend,
            inpainter: Arc::new(BoundaryFill),
        })
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }

    pub fn with_inpainter(mut self, inpainter: Arc<dyn InpaintStrategy>) -> Self {
        self.inpainter = inpainter;
        self
    }

    /// Replaces the router; its routing mode is recorded in the config.
    pub fn with_router(mut self, router: Router) -> Self {
        self.config.routing = router.mode();
        self.router = router;
        self
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn config(&self) -> &SessionConfig {
        &self.config
    }

    pub fn original(&self) -> &Arc<ImageBuffer> {
        &self.original
    }

    pub fn labels(&self) -> &LabelMap {
        &self.labels
    }

    pub fn initial(&self) -> &InitialDescriptions {
        &self.initial
    }

    pub fn history(&self) -> &[EditRecord] {
        &self.history
    }

    pub fn cursor(&self) -> usize {
        self.cursor
    }

    pub fn chat(&self) -> &[ChatEntry] {
        &self.chat
    }

    pub fn events(&self) -> &[SessionEvent] {
        &self.events
    }

    pub fn backend(&self) -> &Arc<dyn VisionBackend> {
        &self.backend
    }

    pub fn current_image(&self) -> &Arc<ImageBuffer> {
        match self.cursor {
            0 => &self.original,
            n => &self.history[n - 1].image_after,
        }
    }

    pub fn registry(&self) -> ObjectRegistry {
        match self.cursor {
            0 => self.initial.registry(),
            n => self.history[n - 1].registry_after.clone(),
        }
    }

    /// Image version `v`: 0 is the original, `n` the result of edit `n`.
    /// Versions past the cursor stay readable until a new edit discards them.
    pub fn image_version(&self, v: usize) -> Option<&Arc<ImageBuffer>> {
        match v {
            0 => Some(&self.original),
            n => self.history.get(n - 1).map(|r| &r.image_after),
        }
    }

    /// Set-of-Mark overlay of the current image, live objects only.
    pub fn som_current(&self) -> ImageBuffer {
        render_som_overlay(self.current_image(), &self.registry().live_map(&self.labels))
    }

    /// Routes `text` and answers or edits. Errors leave image, registry and
    /// history untouched; they are still logged to the chat and transcript.
    pub fn submit_prompt(&mut self, text: &str) -> Result<PromptResult> {
        let chat_start = self.chat.len();
        let registry = self.registry();
        let current = Arc::clone(self.current_image());
        let routed = if self.router.mode() == RoutingMode::BackendFirst {
            let som = self.som_current();
            let ctx = RouteContext {
                backend: self.backend.as_ref(),
                image: &current,
                som: &som,
            };
            self.router.route(text, &registry, Some(ctx))
        } else {
            self.router.route(text, &registry, None)
        };
        let routed = match routed {
            Ok(r) => r,
            Err(e) => {
                if !matches!(e, Error::EmptyPrompt) {
                    self.record_error(text, None, None, &e, Vec::new());
                }
                return Err(e);
            }
        };
        match routed.kind {
            PromptKind::Question => {
                self.chat.push(ChatEntry::user(text));
                let (answer, x) = call(self.backend.as_ref(), &BackendRequest::answer_question(&current, text)?);
                match answer {
                    Ok(answer) => {
                        self.chat.push(ChatEntry::system(answer.clone()));
                        self.events.push(SessionEvent::Prompt(PromptEvent {
                            text: text.to_string(),
                            routing: Some(RoutingInfo::from(&routed)),
                            intent: None,
                            outcome: PromptOutcomeRecord::Answer {
                                answer: answer.clone(),
                                exchanges: vec![x],
                            },
                        }));
                        Ok(PromptResult {
                            routed,
                            answer: Some(answer),
                            edit: None,
                            chat: self.chat[chat_start..].to_vec(),
                        })
                    }
                    Err(e) => {
                        self.chat.pop();
                        self.record_error(text, Some(&routed), None, &e, vec![x]);
                        Err(e)
                    }
                }
            }
            PromptKind::Edit => {
                let intent = routed.intent.clone().expect("edit prompts carry an intent");
                let seq = self.run_edit(text, intent, Some(&routed))?;
                let bundle = self.history[seq as usize - 1].verification.clone();
                Ok(PromptResult {
                    routed,
                    answer: None,
                    edit: Some((seq, bundle)),
                    chat: self.chat[chat_start..].to_vec(),
                })
            }
        }
    }

    /// Applies an already-resolved intent, bypassing routing. `prompt` is what
    /// the chat shows as the user's message.
    pub fn apply_edit(&mut self, prompt: &str, intent: EditIntent) -> Result<&EditRecord> {
        let seq = self.run_edit(prompt, intent, None)?;
        Ok(&self.history[seq as usize - 1])
    }

    fn run_edit(&mut self, prompt: &str, intent: EditIntent, routed: Option<&RoutedPrompt>) -> Result<u32> {
        let routing = routed.map(RoutingInfo::from);
        let direct = routed.is_none().then(|| intent.clone());
        match self.execute(prompt, &intent) {
            Ok((record, exchanges)) => {
                let seq = record.seq;
                self.chat.push(ChatEntry::user(prompt).linked(seq));
                self.chat.extend(format_chat_entries(seq, &record.verification));
                self.events.push(SessionEvent::Prompt(PromptEvent {
                    text: prompt.to_string(),
                    routing,
                    intent: direct,
                    outcome: PromptOutcomeRecord::Edit(Box::new(EditEvent {
                        seq,
                        intent: record.intent.clone(),
                        digest_before: record.image_before.digest(),
                        digest_after: record.image_after.digest(),
                        placement: record.placement.clone(),
                        bundle: record.verification.clone(),
                        registry_after: record.registry_after.clone(),
                        exchanges,
                    })),
                }));
                self.history.truncate(self.cursor);
                self.history.push(record);
                self.cursor = self.history.len();
                Ok(seq)
            }
            Err(e) => {
                self.record_error(prompt, routed, direct, &e, Vec::new());
                Err(e)
            }
        }
    }

    /// Computes the next record without touching session state.
    fn execute(&self, prompt: &str, intent: &EditIntent) -> Result<(EditRecord, Vec<Exchange>)> {
        if self.cursor >= self.config.max_edits {
            return Err(Error::SessionFull(self.config.max_edits));
        }
        let registry_before = self.registry();
        let object = intent.object();
        if let Some(i) = object {
            registry_before.check_live(i)?;
        }
        let before = Arc::clone(self.current_image());
        let applied = apply_action(
            &before,
            &self.labels,
            &intent.action,
            object,
            self.inpainter.as_ref(),
            &self.config.edit,
        )?;
        let mut registry_after = registry_before.clone();
        if let (EditAction::Remove, Some(i)) = (&intent.action, object) {
            registry_after.mark_removed(i)?;
        }
        let keep = matches!(
            intent.action,
            EditAction::AddText {
                target: TextTarget::Anchor(_),
                ..
            }
        );
        let outcome = generate_verification(
            &FeedbackInput {
                before: &before,
                after: &applied.image,
                labels: &self.labels,
                registry_before: &registry_before,
                registry_after: &registry_after,
                instruction: prompt,
                keep_object_descriptions: keep,
            },
            self.backend.as_ref(),
        );
        let record = EditRecord {
            seq: self.cursor as u32 + 1,
            prompt: prompt.to_string(),
            intent: intent.clone(),
            image_before: before,
            image_after: Arc::new(applied.image),
            registry_before,
            registry_after: outcome.registry,
            verification: outcome.bundle,
            placement: applied.placement,
        };
        Ok((record, outcome.exchanges))
    }

    fn record_error(
        &mut self,
        text: &str,
        routed: Option<&RoutedPrompt>,
        intent: Option<EditIntent>,
        e: &Error,
        exchanges: Vec<Exchange>,
    ) {
        self.chat.push(ChatEntry::user(text));
        self.chat.push(ChatEntry::system(error_message(e)));
        self.events.push(SessionEvent::Prompt(PromptEvent {
            text: text.to_string(),
            routing: routed.map(RoutingInfo::from),
            intent,
            outcome: PromptOutcomeRecord::error(e, exchanges),
        }));
    }

    pub fn undo(&mut self) -> Result<u32> {
        if self.cursor == 0 {
            return Err(Error::NothingToUndo);
        }
        let seq = self.history[self.cursor - 1].seq;
        self.cursor -= 1;
        self.chat.push(ChatEntry::system(format!("Edit #{seq} undone")).linked(seq));
        self.events.push(SessionEvent::Undo { seq });
        Ok(seq)
    }

    pub fn redo(&mut self) -> Result<u32> {
        if self.cursor >= self.history.len() {
            return Err(Error::NothingToRedo);
        }
        let seq = self.history[self.cursor].seq;
        self.cursor += 1;
        self.chat.push(ChatEntry::system(format!("Edit #{seq} redone")).linked(seq));
        self.events.push(SessionEvent::Redo { seq });
        Ok(seq)
    }

    pub fn transcript(&self) -> SessionTranscript {
        SessionTranscript {
            version: TRANSCRIPT_VERSION,
            session_id: self.id.clone(),
            config: self.config.clone(),
            inpainter: self.inpainter.name().to_string(),
            original_digest: self.original.digest(),
            labels_digest: self.labels.digest(),
            initial: self.initial.clone(),
            events: self.events.clone(),
            cursor: self.cursor,
            current_digest: self.current_image().digest(),
            chat: self.chat.clone(),
        }
    }

    /// Rebuilds a session from its transcript without calling the backend.
    /// Edited images come from `snapshot(seq, digest)` when it returns a
    /// matching image, otherwise they are recomputed; either way every digest
    /// must match the transcript.
    pub fn restore(
        transcript: &SessionTranscript,
        original: ImageBuffer,
        labels: LabelMap,
        backend: Arc<dyn VisionBackend>,
        inpainter: Arc<dyn InpaintStrategy>,
        snapshot: &dyn Fn(u32, &str) -> Option<ImageBuffer>,
    ) -> Result<Self> {
        replay::restore(transcript, original, labels, backend, inpainter, snapshot)
    }
}

/// Chat text for a failed prompt; grounding failures list the candidates.
pub fn error_message(e: &Error) -> String {
    let c = e.candidates();
    if c.is_empty() {
        format!("Error ({}): {e}", e.kind())
    } else {
        let list: Vec<String> = c.iter().map(|i| format!("Object {i}")).collect();
        format!("Error ({}): {e}. Candidates: {}", e.kind(), list.join(", "))
    }
}
