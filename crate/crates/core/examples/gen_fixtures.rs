//! Regenerates the scene fixtures: image, label map, mock script, and a
//! recorded transcript for each of the three scenes.
//!
//! ```text
//! cargo run -p veriloop-core --example gen_fixtures -- fixtures
//! ```

use std::path::{Path, PathBuf};
use std::sync::Arc;

use veriloop_core::backend::{MockEntry, MockScript, RequestKind as K, ScriptedMock};
use veriloop_core::image::{ImageBuffer, LabelMap};
use veriloop_core::session::{EditSession, SessionConfig};

struct Canvas {
    w: u32,
    h: u32,
    rgb: Vec<u8>,
    labels: Vec<u16>,
}

/// Deterministic per-pixel noise in `[-1, 1]`.
fn noise(x: u32, y: u32, seed: u32) -> f64 {
    let mut v = x.wrapping_mul(0x9E37_79B1) ^ y.wrapping_mul(0x85EB_CA77) ^ seed.wrapping_mul(0xC2B2_AE3D);
    v ^= v >> 15;
    v = v.wrapping_mul(0x2C1B_3C6D);
    v ^= v >> 12;
    (v % 2001) as f64 / 1000.0 - 1.0
}

fn clamp(v: f64) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}

fn shade(base: [u8; 3], delta: f64) -> [u8; 3] {
    base.map(|c| clamp(c as f64 + delta))
}

fn ellipse(cx: f64, cy: f64, rx: f64, ry: f64) -> impl Fn(u32, u32) -> bool {
    move |x, y| {
        let dx = (x as f64 - cx) / rx;
        let dy = (y as f64 - cy) / ry;
        dx * dx + dy * dy <= 1.0
    }
}

fn rect(x0: u32, y0: u32, x1: u32, y1: u32) -> impl Fn(u32, u32) -> bool {
    move |x, y| x >= x0 && x < x1 && y >= y0 && y < y1
}

impl Canvas {
    fn new(w: u32, h: u32) -> Self {
        Self {
            w,
            h,
            rgb: vec![0; (w * h * 3) as usize],
            labels: vec![0; (w * h) as usize],
        }
    }

    /// Paints where `inside` holds; `label` 0 leaves the label untouched.
    fn paint(&mut self, label: u16, inside: impl Fn(u32, u32) -> bool, color: impl Fn(u32, u32) -> [u8; 3]) {
        for y in 0..self.h {
            for x in 0..self.w {
                if inside(x, y) {
                    let i = (y * self.w + x) as usize;
                    self.rgb[i * 3..i * 3 + 3].copy_from_slice(&color(x, y));
                    if label > 0 {
                        self.labels[i] = label;
                    }
                }
            }
        }
    }

    fn finish(self) -> (ImageBuffer, LabelMap) {
        (
            ImageBuffer::from_raw(self.w, self.h, self.rgb).unwrap(),
            LabelMap::new(self.w, self.h, self.labels).unwrap(),
        )
    }
}

const W: u32 = 480;
const H: u32 = 320;

fn cat_scene() -> (ImageBuffer, LabelMap) {
    let mut c = Canvas::new(W, H);
    c.paint(1, |_, y| y < 190, |x, y| shade([214, 168, 92], 18.0 * noise(x, y, 1) - y as f64 * 0.15));
    c.paint(0, |_, y| y >= 190, |x, y| {
        shade([128, 84, 48], 10.0 * noise(x, y, 2) + if (y / 14) % 2 == 0 { 8.0 } else { -8.0 })
    });
    c.paint(3, |x, y| y >= 262 && y < 300 && x < 420, |x, y| shade([62, 40, 26], 6.0 * noise(x, y, 3)));
    c.paint(6, ellipse(410.0, 58.0, 52.0, 40.0), |x, y| shade([252, 244, 214], 3.0 * noise(x, y, 4)));
    c.paint(7, rect(0, 40, 70, 200), |x, y| shade([52, 38, 30], 8.0 * noise(x, y, 5)));
    c.paint(5, ellipse(300.0, 168.0, 52.0, 66.0), |x, y| shade([70, 60, 110], 10.0 * noise(x, y, 6)));
    c.paint(5, ellipse(300.0, 88.0, 27.0, 30.0), |x, y| {
        if y < 76 {
            shade([40, 28, 22], 6.0 * noise(x, y, 7))
        } else {
            shade([226, 184, 150], 6.0 * noise(x, y, 7))
        }
    });
    let orange = |x: u32, y: u32| shade([222, 132, 52], 14.0 * noise(x, y, 8) + if (x / 9) % 2 == 0 { 12.0 } else { -12.0 });
    c.paint(2, ellipse(360.0, 246.0, 50.0, 44.0), orange);
    c.paint(2, ellipse(360.0, 192.0, 30.0, 28.0), orange);
    let cream = |x: u32, y: u32| shade([236, 222, 196], 8.0 * noise(x, y, 9));
    c.paint(4, ellipse(200.0, 246.0, 56.0, 50.0), cream);
    c.paint(4, ellipse(200.0, 182.0, 32.0, 30.0), cream);
    c.paint(8, |x, y| {
        let dx = (x as i32 - 200).abs();
        let dy = (y as i32 - 214).abs();
        dx <= 22 && dy <= 2 + dx / 3
    }, |x, y| shade([196, 30, 36], 8.0 * noise(x, y, 10)));
    c.paint(8, ellipse(200.0, 222.0, 5.0, 5.0), |_, _| [214, 180, 60]);
    c.finish()
}

fn dog_scene() -> (ImageBuffer, LabelMap) {
    let mut c = Canvas::new(W, H);
    c.paint(1, |_, y| y < 200, |x, y| {
        let groove = x % 80 < 3 || (y > 110 && y < 114);
        shade([236, 234, 228], 4.0 * noise(x, y, 11) - if groove { 26.0 } else { 0.0 })
    });
    c.paint(2, |_, y| y >= 200, |x, y| {
        shade([58, 42, 34], 6.0 * noise(x, y, 12) + if (x / 40 + y / 12) % 2 == 0 { 6.0 } else { -6.0 })
    });
    c.paint(4, rect(300, 36, 404, 156), |x, y| {
        let frame = x < 308 || x >= 396 || y < 44 || y >= 148;
        if frame {
            [30, 26, 24]
        } else {
            let face = ellipse(352.0, 86.0, 22.0, 28.0)(x, y);
            let g = if face { 196.0 } else if y > 112 { 46.0 } else { 150.0 };
            let v = clamp(g + 10.0 * noise(x, y, 13));
            [v, v, v]
        }
    });
    let fur = |x: u32, y: u32| shade([246, 244, 240], 7.0 * noise(x, y, 14));
    c.paint(3, ellipse(180.0, 236.0, 70.0, 56.0), fur);
    c.paint(3, ellipse(180.0, 160.0, 40.0, 36.0), fur);
    c.paint(5, ellipse(336.0, 266.0, 38.0, 16.0), |x, y| shade([226, 220, 204], 5.0 * noise(x, y, 15)));
    c.finish()
}

fn bath_scene() -> (ImageBuffer, LabelMap) {
    let mut c = Canvas::new(W, H);
    c.paint(1, |_, y| y < 210, |x, y| {
        let mirror = x > 150 && x < 330 && y > 20 && y < 130;
        shade(if mirror { [150, 164, 170] } else { [64, 60, 58] }, 6.0 * noise(x, y, 21))
    });
    c.paint(4, |_, y| y >= 210, |x, y| {
        let sink = ellipse(240.0, 262.0, 70.0, 26.0)(x, y);
        shade(if sink { [210, 212, 214] } else { [128, 128, 130] }, 5.0 * noise(x, y, 22))
    });
    c.paint(2, rect(20, 40, 100, 200), |x, y| shade([150, 150, 154], 8.0 * noise(x, y, 23) + if y % 10 < 2 { -14.0 } else { 0.0 }));
    c.paint(3, rect(110, 206, 170, 220), |x, y| shade([204, 214, 220], if x % 6 < 2 { -18.0 } else { 0.0 } + 3.0 * noise(x, y, 24)));
    c.paint(5, rect(180, 160, 214, 210), |x, y| {
        if y < 170 { [246, 246, 246] } else { shade([220, 226, 230], 10.0 * noise(x, y, 25)) }
    });
    c.paint(6, ellipse(234.0, 198.0, 14.0, 10.0), |x, y| shade([128, 146, 128], 5.0 * noise(x, y, 26)));
    c.paint(7, rect(256, 156, 292, 210), |x, y| {
        if y > 176 && y < 190 { [60, 120, 200] } else { shade([240, 240, 238], 4.0 * noise(x, y, 27)) }
    });
    c.paint(8, rect(304, 140, 328, 210), |x, y| shade([30, 150, 150], 8.0 * noise(x, y, 28)));
    c.paint(9, rect(340, 130, 366, 210), |x, y| {
        if y > 160 && y < 180 { [236, 236, 236] } else { shade([40, 80, 200], 8.0 * noise(x, y, 29)) }
    });
    c.paint(10, rect(378, 176, 392, 210), |x, y| shade([40, 30, 34], 5.0 * noise(x, y, 30)));
    c.paint(11, rect(404, 150, 412, 210), |x, y| {
        if y < 170 { [210, 40, 40] } else { shade([242, 242, 242], 3.0 * noise(x, y, 31)) }
    });
    c.finish()
}

fn lines(objs: &[(u32, &str)]) -> String {
    objs.iter().map(|(i, d)| format!("Object {i}: {d}")).collect::<Vec<_>>().join("\n")
}

fn with(base: &[(u32, &'static str)], drop: &[u32], replace: &[(u32, &'static str)]) -> Vec<(u32, &'static str)> {
    base.iter()
        .filter(|(i, _)| !drop.contains(i))
        .map(|&(i, d)| (i, replace.iter().find(|(j, _)| *j == i).map_or(d, |r| r.1)))
        .collect()
}

const CAT_OBJECTS: [(u32, &str); 8] = [
    (1, "golden-hued wall with light shining on it revealing textures"),
    (2, "orange tabby cat with light fur, sitting and facing forward"),
    (3, "dark shadow across the floor"),
    (4, "pale cream-colored cat with a stern expression, wearing a bell and a bright red bow tie"),
    (5, "woman with dark hair leaning forward and smiling gently towards the cats"),
    (6, "bright area with sunlight coming through a window or similar light source, creating a flare effect"),
    (7, "dark area with indistinct features, possibly furniture or part of a room"),
    (8, "red bow tie with a bell on the cream-colored cat"),
];

/// One edit's worth of scripted feedback.
struct Feedback<'a> {
    summary: &'a str,
    general: &'a str,
    objects: Option<String>,
    judgement_key: &'a str,
    judgement: &'a str,
}

fn push_edit(entries: &mut Vec<MockEntry>, f: Feedback<'_>) {
    entries.push(MockEntry::respond(K::SummaryOfChanges, f.summary));
    entries.push(MockEntry::respond(K::GeneralDescription, f.general));
    if let Some(o) = f.objects {
        entries.push(MockEntry::respond(K::ObjectDescriptions, o));
    }
    entries.push(MockEntry::respond(K::Judgement, f.judgement).containing(f.judgement_key));
}

fn answer(key: &str, text: &str) -> MockEntry {
    MockEntry::respond(K::AnswerQuestion, text).containing(key)
}

fn cat_script() -> MockScript {
    let mut e = vec![
        MockEntry::respond(
            K::GeneralDescription,
            "Two cats sitting side by side bathed in warm sunlight, with one cat wearing a red bow tie. \
             A dark-haired woman leans in behind them.",
        ),
        MockEntry::respond(K::ObjectDescriptions, lines(&CAT_OBJECTS)),
    ];
    let after1 = with(&CAT_OBJECTS, &[2], &[]);
    push_edit(&mut e, Feedback {
        summary: "The orange cat that sat to the right of the cream-colored cat is no longer present. \
                  Floor and wall tones now fill the spot where it was.",
        general: "A cream-colored cat with a red bow tie and a bell sits alone on a sunlit wooden floor \
                  while a woman leans toward it from behind.",
        objects: Some(lines(&after1)),
        judgement_key: "orange cat",
        judgement: "The edit was successful. The orange tabby listed as object 2 no longer appears \
                    and the new general description mentions a single cat.",
    });
    e.push(answer("how many cats", "One."));
    let after2 = with(&after1, &[], &[(5, "partial view of a human figure in a blurred state")]);
    push_edit(&mut e, Feedback {
        summary: "The woman behind the cat is now blurred and her face can no longer be made out. \
                  The cat and the room look the same as before.",
        general: "A cream-colored cat with a red bow tie sits on a sunlit floor, with a blurred human figure behind it.",
        objects: Some(lines(&after2)),
        judgement_key: "woman",
        judgement: "The edit was successful. Object 5 went from a clearly visible woman to a blurred figure, \
                    which is what the instruction asked for.",
    });
    let after3 = with(&after2, &[], &[(4, "brightly illuminated area on the cat")]);
    push_edit(&mut e, Feedback {
        summary: "The cream-colored cat is lighter than before and stands out more against the room.",
        general: "A bright cream-colored cat wearing a red bow tie sits in warm light, with a blurred figure in the background.",
        objects: Some(lines(&after3)),
        judgement_key: "brighter",
        judgement: "The edit was successful. The cat region is clearly lighter while the rest of the scene is unchanged.",
    });
    e.push(answer("color of the cat", "Cream or white"));
    let after4 = with(&after3, &[], &[(8, "blue bow tie with a bell on the cat's neck")]);
    push_edit(&mut e, Feedback {
        summary: "The cat's bow tie changed from red to blue. Nothing else differs.",
        general: "A cream-colored cat wearing a blue bow tie sits in a sunlit room, with a blurred person behind it.",
        objects: Some(lines(&after4)),
        judgement_key: "bow tie",
        judgement: "The edit was successful. The bow tie is now blue and no other object changed.",
    });
    e.push(answer("nine squares", "Center Right."));
    push_edit(&mut e, Feedback {
        summary: "The words \"Please call 12345 if you find Elsa\" now appear in the center-right of the image.",
        general: "A cream-colored cat with a blue bow tie sits in warm light. \
                  Overlaid text on the right reads \"Please call 12345 if you find Elsa\".",
        objects: None,
        judgement_key: "12345",
        judgement: "The edit was successful. The requested text sits in the center-right cell and the objects are unchanged.",
    });
    e.push(answer("overlap", "No"));
    e.push(answer("stand out", "Yes."));
    MockScript::new(e)
}

const CAT_PROMPTS: [&str; 10] = [
    "remove the orange cat",
    "How many cats are in the image?",
    "Blur out the woman in the image",
    "Make the cat brighter to increase its focus.",
    "What is the color of the cat?",
    "Change the color of the bow tie to blue.",
    "Dividing the image to nine squares, where is a good spot to add text that does not overlap the cat?",
    "add text \"Please call 12345 if you find Elsa\" in the center-right of the image",
    "Does the text overlap with the cat?",
    "Does the cat with blue bow tie stand out in the image?",
];

const DOG_OBJECTS: [(u32, &str); 5] = [
    (1, "white wainscoting on the wall"),
    (2, "dark wooden floor"),
    (3, "white dog with fluffy fur and a happy expression"),
    (4, "framed portrait of a man with curly hair wearing a dark jacket and a light-colored shirt"),
    (5, "off-white round ceramic bowl"),
];

fn dog_script() -> MockScript {
    let mut e = vec![
        MockEntry::respond(
            K::GeneralDescription,
            "A fluffy white dog sits on a dark floor in front of a paneled white wall, \
             next to a framed portrait and a small bowl.",
        ),
        MockEntry::respond(K::ObjectDescriptions, lines(&DOG_OBJECTS)),
    ];
    let a1 = with(&DOG_OBJECTS, &[], &[(1, "blue paneled wainscoting on the wall")]);
    push_edit(&mut e, Feedback {
        summary: "The paneled wall is now blue instead of white. The dog, portrait and bowl are unchanged.",
        general: "A fluffy white dog sits on a dark floor in front of a blue paneled wall with a framed portrait.",
        objects: Some(lines(&a1)),
        judgement_key: "wall",
        judgement: "The edit was successful. Object 1 is now described as blue and nothing else changed.",
    });
    let a2 = with(&a1, &[], &[(4, "framed portrait of a person with obscured features")]);
    push_edit(&mut e, Feedback {
        summary: "The face in the framed portrait is blurred and its features are hidden.",
        general: "A fluffy white dog sits by a blue wall that holds a framed picture of an obscured figure.",
        objects: Some(lines(&a2)),
        judgement_key: "person",
        judgement: "The edit was successful. The portrait now shows a person whose features are obscured.",
    });
    let a3 = with(&a2, &[5], &[]);
    push_edit(&mut e, Feedback {
        summary: "The bowl in front of the dog is gone and the floor continues where it stood.",
        general: "A fluffy white dog sits on a dark floor next to a blue wall and a framed picture.",
        objects: Some(lines(&a3)),
        judgement_key: "bowl",
        judgement: "The edit was successful. Object 5 is no longer listed and the floor is intact.",
    });
    e.push(answer("bowl", "No"));
    let a4 = with(&a3, &[], &[(3, "bright white dog with fluffy fur and a happy expression")]);
    push_edit(&mut e, Feedback {
        summary: "The dog is brighter than before. The rest of the room is unchanged.",
        general: "A bright white fluffy dog sits on a dark floor by a blue wall and a framed picture.",
        objects: Some(lines(&a4)),
        judgement_key: "dog",
        judgement: "The edit was successful. Only the dog region got lighter.",
    });
    push_edit(&mut e, Feedback {
        summary: "The word \"Puppy\" was added in the top-right corner.",
        general: "A bright white dog sits by a blue wall. The word \"Puppy\" appears in the top right.",
        objects: None,
        judgement_key: "puppy",
        judgement: "The edit was successful. The text was placed in the top-right cell as asked.",
    });
    MockScript::new(e)
}

const DOG_PROMPTS: [&str; 6] = [
    "Change the the color of wall to blue.",
    "Blur the person in the picture.",
    "Remove the bowl.",
    "Is there a bowl in the picture?",
    "Increase the brightness of the dog.",
    "Add text \"Puppy\" to the top right of the image.",
];

const BATH_OBJECTS: [(u32, &str); 11] = [
    (1, "dark-colored bathroom wall with a mounted mirror above a backsplash"),
    (2, "gray folded towel hanging on a towel bar"),
    (3, "clear plastic tray with a ridged surface likely used to hold soap"),
    (4, "gray bathroom countertop with a built-in sink"),
    (5, "transparent plastic jar with a white lid containing cotton swabs"),
    (6, "greenish-gray small circular container with a lid, possibly for holding personal items or accessories"),
    (7, "white plastic jar with a label and a white lid, likely filled with cotton balls"),
    (8, "teal plastic hand soap dispenser with a pump"),
    (9, "blue plastic bottle with a label, potentially a hygiene or cleaning product"),
    (10, "small dark bottle, possibly a personal care product like a fragrance or medicinal dropper"),
    (11, "red toothbrush with a white handle placed against the backsplash"),
];

fn bath_script() -> MockScript {
    let mut e = vec![
        MockEntry::respond(
            K::GeneralDescription,
            "A bathroom counter with a sink below a mirror, holding jars, bottles, a soap dispenser and a toothbrush.",
        ),
        MockEntry::respond(K::ObjectDescriptions, lines(&BATH_OBJECTS)),
    ];
    let a1 = with(&BATH_OBJECTS, &[11], &[]);
    push_edit(&mut e, Feedback {
        summary: "The toothbrush at the right edge of the counter has been removed.",
        general: "A bathroom counter with a sink below a mirror, holding jars, bottles and a soap dispenser.",
        objects: Some(lines(&a1)),
        judgement_key: "toothbrush",
        judgement: "The edit was successful. Object 11 no longer appears.",
    });
    let a2 = with(&a1, &[], &[(2, "light gray folded towel hanging on a towel bar")]);
    push_edit(&mut e, Feedback {
        summary: "The towel on the left is lighter than before.",
        general: "A bathroom counter with a sink, a light towel on the left, and several jars and bottles.",
        objects: Some(lines(&a2)),
        judgement_key: "towel",
        judgement: "The edit was successful. The towel region is brighter and the rest is unchanged.",
    });
    let a3 = with(&a2, &[], &[(5, "blurred transparent jar")]);
    push_edit(&mut e, Feedback {
        summary: "The jar of cotton swabs is blurred.",
        general: "A bathroom counter with a sink, a light towel, a blurred jar and several bottles.",
        objects: Some(lines(&a3)),
        judgement_key: "cotton swabs",
        judgement: "The edit was successful. Object 5 is now blurred.",
    });
    let a4 = with(&a3, &[], &[(9, "red plastic bottle with a label")]);
    push_edit(&mut e, Feedback {
        summary: "The blue bottle is now red.",
        general: "A bathroom counter with a sink, a towel, jars, a red bottle and a soap dispenser.",
        objects: Some(lines(&a4)),
        judgement_key: "blue bottle",
        judgement: "The edit was successful. Object 9 changed from blue to red.",
    });
    push_edit(&mut e, Feedback {
        summary: "Text reading \"Please call 12345 if you can help\" was added near the top center.",
        general: "A bathroom counter scene with the text \"Please call 12345 if you can help\" at the top.",
        objects: None,
        judgement_key: "12345",
        judgement: "The edit was successful. The text sits in the top-center cell.",
    });
    MockScript::new(e)
}

const BATH_PROMPTS: [&str; 8] = [
    "Remove the toothbrush.",
    "Remove the pill bottle from this image",
    "Increase the brightness of the towel.",
    "blur out the object 5: transparent plastic jar with a white lid containing cotton swabs",
    "Change the color of the blue bottle to red.",
    ":undo",
    ":redo",
    "Add the text \"Please call 12345 if you can help\" to the center top.",
];

fn write_scene(dir: &Path, scene: (ImageBuffer, LabelMap), script: MockScript, prompts: &[&str]) {
    std::fs::create_dir_all(dir).unwrap();
    let (img, labels) = scene;
    img.save_png(dir.join("image.png")).unwrap();
    labels.save_png(dir.join("labels.png")).unwrap();
    std::fs::write(dir.join("mock.json"), script.to_json()).unwrap();

    let mock = Arc::new(ScriptedMock::new(script));
    let mut session = EditSession::new(img, Some(labels), None, mock.clone(), SessionConfig::default())
        .unwrap()
        .with_id(dir.file_name().unwrap().to_string_lossy());
    for p in prompts {
        let res = match *p {
            ":undo" => session.undo().map(|_| ()),
            ":redo" => session.redo().map(|_| ()),
            text => session.submit_prompt(text).map(|_| ()),
        };
        if let Err(e) = res {
            println!("{}: {p:?} -> {} ({e})", dir.display(), e.kind());
        }
    }
    session.transcript().save(dir.join("transcript.json")).unwrap();
    println!(
        "{}: {} edits, {} unused script entries",
        dir.display(),
        session.history().len(),
        mock.remaining().len()
    );
}

fn main() {
    let out: PathBuf = std::env::args().nth(1).unwrap_or_else(|| "fixtures".into()).into();
    write_scene(&out.join("cat"), cat_scene(), cat_script(), &CAT_PROMPTS);
    write_scene(&out.join("dog"), dog_scene(), dog_script(), &DOG_PROMPTS);
    write_scene(&out.join("bath"), bath_scene(), bath_script(), &BATH_PROMPTS);
}
