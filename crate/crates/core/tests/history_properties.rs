mod common;

use std::sync::Arc;

use proptest::prelude::*;
use rand::Rng;
use veriloop_core::backend::SyntheticBackend;
use veriloop_core::edit::{BrightnessDirection, ColorNameTable, EditAction, TextTarget};
use veriloop_core::feedback::{format_chat_entries, ObjectFeedback, VerificationBundle};
use veriloop_core::image::Anchor;
use veriloop_core::router::{EditIntent, ObjectRef};
use veriloop_core::session::{EditSession, SessionConfig};

fn random_intent(rng: &mut impl Rng, live: &[u32]) -> EditIntent {
    let object = live[rng.random_range(0..live.len())];
    let action = match rng.random_range(0..6) {
        0 => EditAction::Blur,
        1 => EditAction::Remove,
        2 => EditAction::AdjustBrightness {
            direction: if rng.random_bool(0.5) { BrightnessDirection::Brighter } else { BrightnessDirection::Darker },
        },
        3 => {
            let names = ["red", "blue", "green", "white", "black", "yellow"];
            EditAction::change_color(names[rng.random_range(0..names.len())], &ColorNameTable::default()).unwrap()
        }
        4 => EditAction::AddText {
            text: "Hi".into(),
            target: TextTarget::Anchor(Anchor::all()[rng.random_range(0..9)]),
        },
        _ => EditAction::AddText { text: "ok".into(), target: TextTarget::Object },
    };
    EditIntent {
        action,
        object_ref: ObjectRef::Index(object),
        resolved_index: Some(object),
    }
}

/// Drives a random session from `seed` and checks it against a model of the history.
fn check_session(seed: u64) -> Result<(), TestCaseError> {
    let mut rng = common::rng(seed);
    let img = common::random_image(&mut rng, 40, 32);
    let labels = common::random_labels(&mut rng, 40, 32, 4);
    let original = img.digest();
    let mut s = EditSession::new(img, Some(labels), None, Arc::new(SyntheticBackend), SessionConfig::default()).unwrap();

    // model: digests of versions 1..=n and a cursor into them
    let mut versions: Vec<String> = Vec::new();
    let mut cursor = 0usize;
    let edits = rng.random_range(1..=20);
    let mut applied = 0;
    while applied < edits {
        match rng.random_range(0..10) {
            0 | 1 if cursor > 0 => {
                s.undo().unwrap();
                cursor -= 1;
            }
            2 if cursor < versions.len() => {
                s.redo().unwrap();
                cursor += 1;
            }
            _ => {
                let live = s.registry().live_indices();
                if live.is_empty() {
                    break;
                }
                let intent = random_intent(&mut rng, &live);
                let before = s.current_image().digest();
                match s.apply_edit("edit", intent) {
                    Ok(r) => {
                        versions.truncate(cursor);
                        versions.push(r.image_after.digest());
                        cursor += 1;
                        applied += 1;
                    }
                    Err(_) => prop_assert_eq!(s.current_image().digest(), before),
                }
            }
        }
        prop_assert_eq!(s.cursor(), cursor);
        prop_assert_eq!(s.history().len(), versions.len());
        let expected = if cursor == 0 { &original } else { &versions[cursor - 1] };
        prop_assert_eq!(&s.current_image().digest(), expected);
    }

    // undo k, redo k
    let k = rng.random_range(0..=cursor);
    let top = s.current_image().digest();
    for _ in 0..k {
        s.undo().unwrap();
    }
    for _ in 0..k {
        s.redo().unwrap();
    }
    prop_assert_eq!(s.current_image().digest(), top);

    // undo everything
    while s.cursor() > 0 {
        s.undo().unwrap();
    }
    prop_assert_eq!(s.current_image().digest(), original);
    prop_assert_eq!(s.current_image().as_raw(), s.original().as_raw());
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn history_algebra(seed in any::<u64>()) {
        check_session(seed)?;
    }
}

fn bundle() -> impl Strategy<Value = VerificationBundle> {
    let objects = prop::collection::btree_map(1u32..40, prop::option::of("[a-z ]{1,20}"), 0..8);
    ("[a-z ]{0,20}", "[a-z ]{0,20}", "[a-z ]{0,20}", objects).prop_map(|(summary, judgement, general, objects)| {
        VerificationBundle {
            summary,
            judgement,
            general,
            objects: objects.into_iter().map(|(index, description)| ObjectFeedback { index, description }).collect(),
        }
    })
}

proptest! {
    #[test]
    fn chat_formatting_is_stable(seq in 1u32..100, b in bundle()) {
        let a = format_chat_entries(seq, &b);
        prop_assert_eq!(&a, &format_chat_entries(seq, &b));
        prop_assert_eq!(a.iter().filter(|c| c.heading_level == Some(1)).count(), 1);
        prop_assert_eq!(a.iter().filter(|c| c.heading_level == Some(2)).count(), 4);
        prop_assert_eq!(a.len(), 1 + 4 + 3 + b.objects.len());
        prop_assert!(a.iter().all(|c| c.linked_edit_seq == Some(seq)));
    }

    #[test]
    fn every_object_has_one_feedback_line(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let img = common::random_image(&mut rng, 40, 32);
        let labels = common::random_labels(&mut rng, 40, 32, 5);
        let mut s = EditSession::new(img, Some(labels), None, Arc::new(SyntheticBackend), SessionConfig::default()).unwrap();
        for _ in 0..4 {
            let live = s.registry().live_indices();
            if live.is_empty() {
                break;
            }
            let intent = random_intent(&mut rng, &live);
            let Ok(rec) = s.apply_edit("edit", intent) else { continue };
            let indices: Vec<u32> = rec.verification.objects.iter().map(|o| o.index).collect();
            let all: Vec<u32> = rec.registry_after.entries().iter().map(|e| e.index).collect();
            prop_assert_eq!(indices, all);
            for (o, e) in rec.verification.objects.iter().zip(rec.registry_after.entries()) {
                prop_assert_eq!(o.description.is_some(), e.is_live());
            }
        }
    }
}
