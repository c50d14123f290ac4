use std::sync::Arc;

use super::{EditRecord, EditSession, PromptEvent, PromptOutcomeRecord, SessionEvent, SessionTranscript};
use crate::backend::VisionBackend;
use crate::edit::{apply_action, InpaintStrategy};
use crate::error::{Error, Result};
use crate::image::{ImageBuffer, LabelMap};
use crate::router::Router;

/// Outcome of re-running one recorded edit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EditCheck {
    pub seq: u32,
    /// Position of the event in the transcript.
    pub event: usize,
    pub expected: String,
    pub actual: Option<String>,
    /// Digest and every other recorded field (bundle, registry, exchanges) agree.
    pub ok: bool,
}

#[derive(Debug)]
pub struct ReplayReport {
    pub edits: Vec<EditCheck>,
    /// Non-edit events whose replayed form differs, with a reason.
    pub other_mismatches: Vec<(usize, String)>,
    pub initial_matches: bool,
    pub chat_matches: bool,
    pub session: EditSession,
}

impl ReplayReport {
    pub fn passed(&self) -> bool {
        self.initial_matches && self.chat_matches && self.other_mismatches.is_empty() && self.edits.iter().all(|c| c.ok)
    }
}

fn check_inputs(t: &SessionTranscript, original: &ImageBuffer, labels: &LabelMap) -> Result<()> {
    if original.digest() != t.original_digest {
        return Err(Error::Config("original image does not match the transcript".into()));
    }
    if labels.digest() != t.labels_digest {
        return Err(Error::Config("label map does not match the transcript".into()));
    }
    Ok(())
}

/// Re-runs every recorded event against `backend` and compares the results.
pub fn replay(
    transcript: &SessionTranscript,
    original: ImageBuffer,
    labels: LabelMap,
    backend: Arc<dyn VisionBackend>,
    inpainter: Arc<dyn InpaintStrategy>,
) -> Result<ReplayReport> {
    check_inputs(transcript, &original, &labels)?;
    let mut session = EditSession::new(original, Some(labels), None, backend, transcript.config.clone())?
        .with_id(transcript.session_id.clone())
        .with_inpainter(inpainter);
    let initial_matches = session.initial == transcript.initial;
    let mut edits = Vec::new();
    let mut other_mismatches = Vec::new();

    for (i, recorded) in transcript.events.iter().enumerate() {
        let before = session.events.len();
        match recorded {
            SessionEvent::Prompt(p) => {
                let _ = match (&p.routing, &p.intent) {
                    (None, Some(intent)) => session.apply_edit(&p.text, intent.clone()).map(|_| ()),
                    _ => session.submit_prompt(&p.text).map(|_| ()),
                };
            }
            SessionEvent::Undo { .. } => {
                let _ = session.undo();
            }
            SessionEvent::Redo { .. } => {
                let _ = session.redo();
            }
        }
        let produced = session.events[before..].first();
        match recorded {
            SessionEvent::Prompt(PromptEvent {
                outcome: PromptOutcomeRecord::Edit(ed),
                ..
            }) => {
                let actual = match produced {
                    Some(SessionEvent::Prompt(PromptEvent {
                        outcome: PromptOutcomeRecord::Edit(a),
                        ..
                    })) => Some(a.digest_after.clone()),
                    _ => None,
                };
                edits.push(EditCheck {
                    seq: ed.seq,
                    event: i,
                    expected: ed.digest_after.clone(),
                    actual,
                    ok: produced == Some(recorded),
                });
            }
            _ => {
                if produced != Some(recorded) {
                    other_mismatches.push((i, format!("event {i} replayed differently")));
                }
            }
        }
    }
    if session.cursor != transcript.cursor {
        other_mismatches.push((
            transcript.events.len(),
            format!("cursor {} after replay, {} recorded", session.cursor, transcript.cursor),
        ));
    }
    Ok(ReplayReport {
        edits,
        other_mismatches,
        initial_matches,
        chat_matches: session.chat == transcript.chat,
        session,
    })
}

pub(super) fn restore(
    t: &SessionTranscript,
    original: ImageBuffer,
    labels: LabelMap,
    backend: Arc<dyn VisionBackend>,
    inpainter: Arc<dyn InpaintStrategy>,
    snapshot: &dyn Fn(u32, &str) -> Option<ImageBuffer>,
) -> Result<EditSession> {
    check_inputs(t, &original, &labels)?;
    let original = Arc::new(original);
    let initial_registry = t.initial.registry();
    let mut history: Vec<EditRecord> = Vec::new();
    let mut cursor = 0usize;
    for ev in &t.events {
        match ev {
            SessionEvent::Prompt(PromptEvent {
                text,
                outcome: PromptOutcomeRecord::Edit(ed),
                ..
            }) => {
                let (before, registry_before) = match cursor {
                    0 => (Arc::clone(&original), initial_registry.clone()),
                    n => (Arc::clone(&history[n - 1].image_after), history[n - 1].registry_after.clone()),
                };
                if before.digest() != ed.digest_before {
                    return Err(Error::Config(format!("edit #{} starts from an unexpected image", ed.seq)));
                }
                let after = match snapshot(ed.seq, &ed.digest_after).filter(|img| img.digest() == ed.digest_after) {
                    Some(img) => img,
                    None => {
                        let applied = apply_action(
                            &before,
                            &labels,
                            &ed.intent.action,
                            ed.intent.object(),
                            inpainter.as_ref(),
                            &t.config.edit,
                        )?;
                        if applied.image.digest() != ed.digest_after {
                            return Err(Error::Config(format!(
                                "edit #{} does not reproduce its recorded image",
                                ed.seq
                            )));
                        }
                        applied.image
                    }
                };
                history.truncate(cursor);
                history.push(EditRecord {
                    seq: ed.seq,
                    prompt: text.clone(),
                    intent: ed.intent.clone(),
                    image_before: before,
                    image_after: Arc::new(after),
                    registry_before,
                    registry_after: ed.registry_after.clone(),
                    verification: ed.bundle.clone(),
                    placement: ed.placement.clone(),
                });
                cursor = history.len();
            }
            SessionEvent::Prompt(_) => {}
            SessionEvent::Undo { .. } => cursor = cursor.checked_sub(1).ok_or(Error::NothingToUndo)?,
            SessionEvent::Redo { .. } => {
                if cursor >= history.len() {
                    return Err(Error::NothingToRedo);
                }
                cursor += 1;
            }
        }
    }
    if cursor != t.cursor {
        return Err(Error::Config(format!("transcript cursor {} disagrees with its events ({cursor})", t.cursor)));
    }
    let session = EditSession {
        id: t.session_id.clone(),
        original,
        labels,
        initial: t.initial.clone(),
        history,
        cursor,
        chat: t.chat.clone(),
        events: t.events.clone(),
        config: t.config.clone(),
        backend,
        inpainter,
        router: Router::with_mode(t.config.routing),
    };
    if session.current_image().digest() != t.current_digest {
        return Err(Error::Config("restored image does not match the transcript".into()));
    }
    Ok(session)
}
