use veriloop_acceptance::{ensure, Outcome};
use veriloop_core::image::{ImageBuffer, LabelMap};
use veriloop_core::session::{EditSession, SessionConfig};

use crate::support::{load_scene, mask_of, mock};

pub const PROMPTS: [&str; 5] = [
    "remove the orange cat",
    "Blur out the woman in the image",
    "Make the cat brighter to increase its focus.",
    "Change the color of the bow tie to blue.",
    "add text \"Please call 12345 if you find Elsa\" in the center-right of the image",
];

const SECTIONS: [&str; 4] = [
    "Summary of Visual Changes",
    "AI Judgement",
    "Updated General Description",
    "Updated Object Descriptions",
];

fn run(img: ImageBuffer, labels: LabelMap) -> Result<EditSession, String> {
    let mut s = EditSession::new(img, Some(labels), None, mock("cat"), SessionConfig::default())
        .map_err(|e| e.to_string())?;
    for p in PROMPTS {
        let r = s.submit_prompt(p).map_err(|e| format!("{p:?}: {e}"))?;
        ensure!(r.edit.is_some(), "{p:?} was not treated as an edit");
    }
    Ok(s)
}

pub fn walkthrough() -> Outcome {
    let (img, labels) = load_scene("cat");
    ensure!(labels.indices().len() == 8, "label map has {} objects", labels.indices().len());
    let s = run(img.clone(), labels.clone())?;

    let h1: Vec<&str> = s.chat().iter().filter(|c| c.heading_level == Some(1)).map(|c| c.text.as_str()).collect();
    let h2: Vec<&str> = s.chat().iter().filter(|c| c.heading_level == Some(2)).map(|c| c.text.as_str()).collect();
    ensure!(h1.len() == 5 && h2.len() == 20, "{} level-1 and {} level-2 headings", h1.len(), h2.len());
    for (n, h) in h1.iter().enumerate() {
        ensure!(h.contains(&format!("#{}", n + 1)), "level-1 heading {n} is {h:?}");
    }
    for (i, h) in h2.iter().enumerate() {
        let want = format!("[#{}] {}", i / 4 + 1, SECTIONS[i % 4]);
        ensure!(*h == want, "level-2 heading {i} is {h:?}, expected {want:?}");
    }
    let first = &s.history()[0].verification;
    ensure!(
        first.object_lines().iter().any(|l| l == "Object 2: [removed]"),
        "edit 1 objects part: {:?}",
        first.object_lines()
    );

    // allowed: dilated mask 2, masks 5, 4, 8, and the outlined text box
    let (w, h) = img.dimensions();
    let m2 = mask_of(&labels, 2);
    let r = s.config().edit.dilation_radius as i64;
    let mut allowed = vec![false; m2.len()];
    for (i, on) in m2.iter().enumerate() {
        if !on {
            continue;
        }
        let (mx, my) = ((i as u32 % w) as i64, (i as u32 / w) as i64);
        for y in (my - r).max(0)..=(my + r).min(h as i64 - 1) {
            for x in (mx - r).max(0)..=(mx + r).min(w as i64 - 1) {
                if (x - mx).pow(2) + (y - my).pow(2) <= r * r {
                    allowed[(y * w as i64 + x) as usize] = true;
                }
            }
        }
    }
    for idx in [5, 4, 8] {
        for (a, m) in allowed.iter_mut().zip(mask_of(&labels, idx)) {
            *a |= m;
        }
    }
    let b = s.history()[4].placement.as_ref().ok_or("text edit has no placement")?.bbox;
    for (i, a) in allowed.iter_mut().enumerate() {
        let (x, y) = (i as u32 % w, i as u32 / w);
        *a |= x + 1 >= b.x0 && x <= b.x1 + 1 && y + 1 >= b.y0 && y <= b.y1 + 1;
    }
    let last = s.current_image();
    let mut changed = 0;
    for (i, a) in allowed.iter().enumerate() {
        if last.get_index(i) != img.get_index(i) {
            ensure!(*a, "pixel ({}, {}) changed outside the edited regions", i as u32 % w, i as u32 / w);
            changed += 1;
        }
    }

    let again = run(img, labels)?;
    ensure!(
        again.current_image().digest() == last.digest() && again.chat() == s.chat(),
        "second run differs"
    );
    Ok(format!("5 edits, 5 + 20 headings, {changed} pixels changed inside the allowed region, deterministic"))
}
