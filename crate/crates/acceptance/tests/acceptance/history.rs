use std::sync::Arc;

use rand::Rng;
use veriloop_acceptance::{ensure, Outcome};
use veriloop_core::backend::SyntheticBackend;
use veriloop_core::edit::{BrightnessDirection, ColorNameTable, EditAction, TextTarget};
use veriloop_core::image::Anchor;
use veriloop_core::router::{EditIntent, ObjectRef};
use veriloop_core::session::{EditSession, SessionConfig};

use crate::support::{noise, rng, shapes};

fn intent(rng: &mut impl Rng, live: &[u32]) -> EditIntent {
    let object = live[rng.random_range(0..live.len())];
    let action = match rng.random_range(0..5) {
        0 => EditAction::Blur,
        1 => EditAction::Remove,
        2 => EditAction::AdjustBrightness {
            direction: if rng.random_bool(0.5) { BrightnessDirection::Brighter } else { BrightnessDirection::Darker },
        },
        3 => EditAction::change_color(["red", "blue", "green"][rng.random_range(0..3)], &ColorNameTable::default())
            .unwrap(),
        _ => EditAction::AddText {
            text: "note".into(),
            target: TextTarget::Anchor(Anchor::all()[rng.random_range(0..9)]),
        },
    };
    EditIntent {
        action,
        object_ref: ObjectRef::Index(object),
        resolved_index: Some(object),
    }
}

/// Pixel bytes of the current image, kept independently of the session.
fn pixels(s: &EditSession) -> Vec<u8> {
    s.current_image().as_raw().to_vec()
}

fn one(seed: u64) -> Result<bool, String> {
    let mut r = rng(seed);
    let img = noise(&mut r, 36, 28);
    let labels = shapes(&mut r, 36, 28, 5);
    let original = img.as_raw().to_vec();
    let mut s = EditSession::new(img, Some(labels), None, Arc::new(SyntheticBackend), SessionConfig::default())
        .map_err(|e| e.to_string())?;

    let mut stack: Vec<Vec<u8>> = vec![original.clone()];
    let mut cursor = 0usize;
    let target = r.random_range(1..=20);
    let mut done = 0;
    let mut branched = false;
    while done < target {
        let roll = r.random_range(0..10);
        if roll < 2 && cursor > 0 {
            s.undo().map_err(|e| e.to_string())?;
            cursor -= 1;
        } else if roll == 2 && cursor + 1 < stack.len() {
            s.redo().map_err(|e| e.to_string())?;
            cursor += 1;
        } else {
            let live = s.registry().live_indices();
            if live.is_empty() {
                break;
            }
            let had_tail = cursor + 1 < stack.len();
            let i = intent(&mut r, &live);
            if s.apply_edit("edit", i).is_ok() {
                stack.truncate(cursor + 1);
                stack.push(pixels(&s));
                cursor += 1;
                done += 1;
                if had_tail {
                    branched = true;
                    ensure!(s.redo().is_err(), "seed {seed}: redo tail survived a new edit");
                }
            }
        }
        ensure!(pixels(&s) == stack[cursor], "seed {seed}: image does not match version {cursor}");
        ensure!(s.history().len() + 1 == stack.len(), "seed {seed}: history length drifted");
    }

    let k = r.random_range(0..=cursor);
    let top = pixels(&s);
    for _ in 0..k {
        s.undo().map_err(|e| e.to_string())?;
    }
    ensure!(pixels(&s) == stack[cursor - k], "seed {seed}: undo x{k} landed on the wrong version");
    for _ in 0..k {
        s.redo().map_err(|e| e.to_string())?;
    }
    ensure!(pixels(&s) == top, "seed {seed}: redo x{k} did not restore the pre-undo image");

    while s.cursor() > 0 {
        s.undo().map_err(|e| e.to_string())?;
    }
    ensure!(pixels(&s) == original, "seed {seed}: undo-all differs from the original");
    ensure!(s.undo().is_err(), "seed {seed}: undo past the start succeeded");
    Ok(branched)
}

pub fn undo_redo() -> Outcome {
    let mut branched = 0;
    for seed in 0..200 {
        branched += one(10_000 + seed)? as usize;
    }
    ensure!(branched > 0, "no session exercised a branch edit");
    Ok(format!("200 random sessions, {branched} with a branch edit"))
}
