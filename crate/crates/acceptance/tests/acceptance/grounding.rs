use std::sync::Arc;

use veriloop_acceptance::{ensure, Outcome};
use veriloop_core::backend::{RecordingBackend, RequestKind, ScriptedMock, TextRole, WireRecord};
use veriloop_core::edit::BoundaryFill;
use veriloop_core::session::{replay, SessionTranscript};

use crate::support::{fixtures, load_scene};

/// Expected (images, descriptions, instruction) per request kind.
fn shape(kind: RequestKind) -> Option<(usize, usize, usize)> {
    match kind {
        RequestKind::SummaryOfChanges => Some((2, 0, 0)),
        RequestKind::GeneralDescription | RequestKind::ObjectDescriptions => Some((1, 0, 0)),
        RequestKind::Judgement => Some((2, 4, 1)),
        _ => None,
    }
}

fn check(r: &WireRecord) -> Result<(), String> {
    let descriptions = r.texts.iter().filter(|t| t.role.is_description()).count();
    let instruction = r.texts.iter().filter(|t| t.role == TextRole::EditInstruction).count();
    let got = (r.images.len(), descriptions, instruction);
    if let Some(want) = shape(r.kind) {
        ensure!(got == want, "{:?} sent {got:?}, expected {want:?}", r.kind);
    } else {
        ensure!(r.images.len() == 1 && descriptions == 0, "{:?} sent {got:?}", r.kind);
    }
    if r.kind == RequestKind::Judgement {
        for role in [TextRole::PrevGeneral, TextRole::PrevObjects, TextRole::NewGeneral, TextRole::NewObjects] {
            let n = r.texts.iter().filter(|t| t.role == role).count();
            ensure!(n == 1, "judgement carries {n} {role:?} texts");
        }
    }
    ensure!(r.violation.is_none(), "recorded violation: {:?}", r.violation);
    Ok(())
}

pub fn grounding() -> Outcome {
    let mut total = 0;
    let mut judgements = 0;
    for name in ["cat", "dog", "bath"] {
        let (img, labels) = load_scene(name);
        let t = SessionTranscript::load(fixtures().join(name).join("transcript.json")).map_err(|e| e.to_string())?;
        let mock = ScriptedMock::load(fixtures().join(name).join("mock.json")).map_err(|e| e.to_string())?;
        let rec = Arc::new(RecordingBackend::new(mock));
        let report = replay(&t, img, labels, rec.clone(), Arc::new(BoundaryFill)).map_err(|e| e.to_string())?;
        ensure!(report.passed(), "{name} replay mismatched");
        ensure!(rec.violations() == 0, "{name}: {} violations", rec.violations());
        let log = rec.records();
        for r in &log {
            check(r).map_err(|e| format!("{name}: {e}"))?;
        }
        let j = log.iter().filter(|r| r.kind == RequestKind::Judgement).count();
        ensure!(j == report.edits.len(), "{name}: {j} judgements for {} edits", report.edits.len());
        total += log.len();
        judgements += j;
    }
    Ok(format!("{total} requests over 3 replays, {judgements} judgements, zero violations"))
}
