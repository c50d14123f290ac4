use std::sync::LazyLock;

use regex::Regex;

use super::lexicon::{has_phrase, words, Lexicon};
use super::{EditIntent, ObjectRef, Router};
use crate::edit::{BrightnessDirection, ColorNameTable, EditAction, TextTarget};
use crate::error::{Error, Result};
use crate::image::{Anchor, Horizontal, Vertical};

static QUOTES: LazyLock<Vec<Regex>> = LazyLock::new(|| {
    [
        r#""([^"]*)""#,
        "\u{201c}([^\u{201d}]*)\u{201d}",
        "\u{2018}([^\u{2019}]*)\u{2019}",
        r"`([^`']*)[`']",
        r#"(?:^|[\s(\[:,])'(.+?)'(?:$|[\s.,!?;:)\]])"#,
    ]
    .iter()
    .map(|p| Regex::new(p).expect("valid pattern"))
    .collect()
});

static TEXT_TAIL: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"(?i)\b(?:text|words?|sentence|caption|write)\b(?:\s+(?:saying|reading|that\s+says))?\s*:?\s+").unwrap()
});

static LOCATION: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?i)(?:^|\s+)(?:to|at|on|onto|in|into|near|over|above|below|under)\s+").unwrap());

static INDEX: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?i)(?:#\s*(\d+)|\b(?:object|obj|item|number|no)\.?\s*#?\s*(\d+)\b)").unwrap());

const ANCHOR_WORDS: &[&str] = &[
    "top", "upper", "bottom", "lower", "left", "right", "center", "centre", "middle",
];

/// Text to be written by an add-text prompt, and the prompt with that text
/// cut out. Quoted text wins; otherwise the words after a text noun (or
/// "write") up to the first location preposition.
pub fn extract_payload(text: &str) -> Option<(String, String)> {
    let quoted = QUOTES
        .iter()
        .filter_map(|re| re.captures(text))
        .min_by_key(|c| c.get(0).expect("whole match").start());
    if let Some(c) = quoted {
        let whole = c.get(0).expect("whole match");
        let payload = c.get(1).map_or("", |m| m.as_str()).trim().to_string();
        let rest = format!("{} {}", &text[..whole.start()], &text[whole.end()..]);
        return Some((payload, rest));
    }
    let m = TEXT_TAIL.find(text)?;
    let tail = &text[m.end()..];
    let cut = LOCATION.find(tail).map_or(tail.len(), |l| l.start());
    let payload = tail[..cut].trim().trim_end_matches(['.', '!', ',', ';']).trim().to_string();
    let rest = format!("{} {}", &text[..m.end()], &tail[cut..]);
    Some((payload, rest))
}

/// Grid cell named by position words; a lone "center" or "middle" fills
/// whichever axis is not named.
pub fn parse_anchor<S: AsRef<str>>(words: &[S]) -> Option<Anchor> {
    let mut v = None;
    let mut h = None;
    let mut center = false;
    for w in words {
        match w.as_ref() {
            "top" | "upper" => v = Some(Vertical::Top),
            "bottom" | "lower" => v = Some(Vertical::Bottom),
            "left" => h = Some(Horizontal::Left),
            "right" => h = Some(Horizontal::Right),
            "center" | "centre" | "middle" | "centered" | "central" => center = true,
            _ => {}
        }
    }
    if v.is_none() && h.is_none() && !center {
        return None;
    }
    Some(Anchor::new(v.unwrap_or(Vertical::Center), h.unwrap_or(Horizontal::Center)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Act {
    Text,
    Blur,
    Remove,
    Brightness,
    Color,
}

fn contains(list: &[String], ws: &[&str]) -> bool {
    ws.iter().any(|w| list.iter().any(|l| l == w))
}

/// Actions mentioned in a run of words, in priority order.
fn detect(lex: &Lexicon, colors: &ColorNameTable, ws: &[&str], quoted: bool) -> Vec<Act> {
    let norm = ws.join(" ");
    let mut out = Vec::new();
    let text_verb = contains(&lex.text.verbs, ws);
    if (contains(&lex.text.nouns, ws) && text_verb) || ws.contains(&"write") || (quoted && text_verb) {
        out.push(Act::Text);
    }
    if contains(&lex.blur.words, ws) {
        out.push(Act::Blur);
    }
    if contains(&lex.remove.words, ws) || lex.remove.phrases.iter().any(|p| has_phrase(&norm, p)) {
        out.push(Act::Remove);
    }
    if contains(&lex.brightness.words, ws) {
        out.push(Act::Brightness);
    }
    if contains(&lex.color.words, ws) || (contains(&lex.color.verbs, ws) && !colors.find_in(ws).is_empty()) {
        out.push(Act::Color);
    }
    out
}

fn supported_list() -> &'static str {
    "blur, remove, change color, adjust brightness, add text"
}

/// Marks the word positions covered by `phrase` (normalized, space separated).
fn mark_phrase(ws: &[&str], phrase: &str, removed: &mut [bool]) {
    let p: Vec<&str> = phrase.split(' ').collect();
    if p.is_empty() || p.len() > ws.len() {
        return;
    }
    for i in 0..=ws.len() - p.len() {
        if ws[i..i + p.len()] == p[..] {
            removed[i..i + p.len()].iter_mut().for_each(|r| *r = true);
        }
    }
}

pub(crate) fn parse(router: &Router, text: &str) -> Result<EditIntent> {
    let lex = router.lexicon();
    let colors = router.colors();

    let payload = extract_payload(text);
    let rest = payload.as_ref().map_or(text, |(_, r)| r.as_str()).to_string();
    let quoted = payload.is_some();
    let owned = words(&rest);
    let ws: Vec<&str> = owned.iter().map(String::as_str).collect();
    if ws.is_empty() {
        return Err(Error::EmptyPrompt);
    }

    let clauses = ws.split(|w| lex.conjunctions.iter().any(|c| c == w));
    let acting = clauses.filter(|c| !detect(lex, colors, c, false).is_empty()).count();
    if acting > 1 {
        return Err(Error::UnrecognizedAction {
            message: "prompt asks for more than one edit; send one edit per prompt".into(),
        });
    }

    let Some(act) = detect(lex, colors, &ws, quoted).first().copied() else {
        let message = match ws.iter().find(|w| lex.unsupported.iter().any(|u| u == *w)) {
            Some(verb) => format!("`{verb}` is not a supported edit; supported edits are {}", supported_list()),
            None => format!("no supported edit found; supported edits are {}", supported_list()),
        };
        return Err(Error::UnrecognizedAction { message });
    };

    let mut removed = vec![false; ws.len()];
    for g in [&lex.blur, &lex.remove, &lex.brightness, &lex.color, &lex.text] {
        for p in &g.phrases {
            mark_phrase(&ws, p, &mut removed);
        }
    }

    let action = match act {
        Act::Blur => EditAction::Blur,
        Act::Remove => EditAction::Remove,
        Act::Brightness => {
            let direction = if contains(&lex.brightness.darker, &ws) {
                BrightnessDirection::Darker
            } else {
                BrightnessDirection::Brighter
            };
            EditAction::AdjustBrightness { direction }
        }
        Act::Color => {
            let found = colors.find_in(&ws);
            let after_to = found
                .iter()
                .rev()
                .find(|(pos, _, _)| *pos > 0 && matches!(ws[pos - 1], "to" | "into"));
            let Some((pos, len, name)) = after_to.or(found.last()).cloned() else {
                return Err(Error::MissingParameter("color".into()));
            };
            removed[pos..pos + len].iter_mut().for_each(|r| *r = true);
            if after_to.is_some() {
                removed[pos - 1] = true;
            }
            EditAction::change_color(&name, colors)?
        }
        Act::Text => {
            let text = payload.as_ref().map(|(p, _)| p.clone()).unwrap_or_default();
            if text.is_empty() {
                return Err(Error::MissingParameter("text".into()));
            }
            EditAction::AddText {
                text,
                target: TextTarget::Object,
            }
        }
    };

    let object_ref = reference(lex, &rest, &ws, &removed, act == Act::Text);

    let action = match action {
        EditAction::AddText { text, .. } => {
            let target = match (parse_anchor(&ws), &object_ref) {
                (Some(a), _) => TextTarget::Anchor(a),
                (None, ObjectRef::None) => TextTarget::Anchor(Anchor::CENTER),
                (None, _) => TextTarget::Object,
            };
            EditAction::AddText { text, target }
        }
        other => other,
    };
    let object_ref = match &action {
        EditAction::AddText {
            target: TextTarget::Anchor(_),
            ..
        } => ObjectRef::None,
        _ => object_ref,
    };

    Ok(EditIntent {
        action,
        object_ref,
        resolved_index: None,
    })
}

/// An explicit index wins; otherwise the content words of the first noun
/// phrase, cut at the first terminator that follows it.
fn reference(lex: &Lexicon, rest: &str, ws: &[&str], removed: &[bool], skip_anchor_words: bool) -> ObjectRef {
    if let Some(c) = INDEX.captures(rest) {
        let digits = c.get(1).or_else(|| c.get(2)).expect("one group matches");
        if let Ok(i) = digits.as_str().parse() {
            return ObjectRef::Index(i);
        }
    }
    let function = lex.function_words();
    let mut tokens = Vec::new();
    for (i, w) in ws.iter().enumerate() {
        if removed[i] {
            continue;
        }
        if !tokens.is_empty() && lex.reference.terminators.iter().any(|t| t == w) {
            break;
        }
        let content = w.len() > 1
            && !function.contains(*w)
            && !(skip_anchor_words && ANCHOR_WORDS.contains(w));
        if content {
            tokens.push(*w);
        }
    }
    if tokens.is_empty() {
        ObjectRef::None
    } else {
        ObjectRef::Name(tokens.join(" "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::edit::ActionKind;

    fn p(text: &str) -> EditIntent {
        parse(&Router::default(), text).unwrap()
    }

    fn name(s: &str) -> ObjectRef {
        ObjectRef::Name(s.into())
    }

    #[test]
    fn quoted_payloads() {
        assert_eq!(
            extract_payload(r#"Add text "Puppy" to the top right"#).unwrap().0,
            "Puppy"
        );
        assert_eq!(extract_payload("add words 'Hello world' on upper third").unwrap().0, "Hello world");
        assert_eq!(extract_payload("add text \u{201c}Hi\u{201d} at top").unwrap().0, "Hi");
        assert_eq!(extract_payload("write hello there at the bottom").unwrap().0, "hello there");
        assert!(extract_payload("I don't want to see the lady").is_none());
    }

    #[test]
    fn anchors() {
        let a = |s: &str| parse_anchor(&words(s)).map(|a| a.to_string());
        assert_eq!(a("top right").as_deref(), Some("top-right"));
        assert_eq!(a("upper third").as_deref(), Some("top-center"));
        assert_eq!(a("center right").as_deref(), Some("center-right"));
        assert_eq!(a("center top").as_deref(), Some("top-center"));
        assert_eq!(a("on the cat"), None);
    }

    #[test]
    fn actions_and_references() {
        let i = p("remove the orange cat");
        assert_eq!((i.action.kind(), i.object_ref), (ActionKind::Remove, name("orange cat")));
        let i = p("Make the cat brighter to increase its focus.");
        assert_eq!(
            i.action,
            EditAction::AdjustBrightness {
                direction: BrightnessDirection::Brighter
            }
        );
        assert_eq!(i.object_ref, name("cat"));
        let i = p("I don't want to see the lady");
        assert_eq!((i.action.kind(), i.object_ref), (ActionKind::Remove, name("lady")));
        let i = p("Blur out the man in the framed photo within the image");
        assert_eq!(i.object_ref, name("man"));
        let i = p("make the cream-colored cat brighter and stand out more in the image");
        assert_eq!(i.object_ref, name("cream colored cat"));
        assert_eq!(p("Make the dog brighter color").action.kind(), ActionKind::AdjustBrightness);
        assert_eq!(
            p("reduce the brightness of the towel").action,
            EditAction::AdjustBrightness {
                direction: BrightnessDirection::Darker
            }
        );
    }

    #[test]
    fn colors() {
        let i = p("change the color of the cat's bow tie from red to blue");
        match &i.action {
            EditAction::ChangeColor { color, .. } => assert_eq!(color, "blue"),
            other => panic!("{other:?}"),
        }
        assert_eq!(i.object_ref, name("cats bow tie"));
        let i = p("Change the color of the blue bottle to red.");
        match &i.action {
            EditAction::ChangeColor { color, .. } => assert_eq!(color, "red"),
            other => panic!("{other:?}"),
        }
        assert_eq!(i.object_ref, name("blue bottle"));
        assert!(matches!(
            parse(&Router::default(), "change the color of the cat"),
            Err(Error::MissingParameter(_))
        ));
    }

    #[test]
    fn indices() {
        assert_eq!(p("make #2 vague").object_ref, ObjectRef::Index(2));
        assert_eq!(p("increase the brightness of the #6 person").object_ref, ObjectRef::Index(6));
        assert_eq!(
            p("blur out the object 5: transparent plastic jar with a white lid").object_ref,
            ObjectRef::Index(5)
        );
    }

    #[test]
    fn text_targets() {
        let i = p(r#"add text "Please call 12345 if you find Elsa" in the center-right of the image"#);
        match &i.action {
            EditAction::AddText {
                text,
                target: TextTarget::Anchor(a),
            } => {
                assert_eq!(text, "Please call 12345 if you find Elsa");
                assert_eq!(a.to_string(), "center-right");
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(i.object_ref, ObjectRef::None);
        assert!(matches!(
            p("generate text 'Hello' to the top left corner").action,
            EditAction::AddText { target: TextTarget::Anchor(a), .. } if a.to_string() == "top-left"
        ));
        let i = p("add text 'Hi' on the dog");
        assert!(matches!(i.action, EditAction::AddText { target: TextTarget::Object, .. }));
        assert_eq!(i.object_ref, name("dog"));
        assert!(matches!(
            p("add text 'Hi'").action,
            EditAction::AddText { target: TextTarget::Anchor(Anchor::CENTER), .. }
        ));
    }

    #[test]
    fn rejections() {
        let r = Router::default();
        match parse(&r, "rotate the cat") {
            Err(Error::UnrecognizedAction { message }) => assert!(message.contains("rotate")),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse(&r, "blur the cat and remove the dog"), Err(Error::UnrecognizedAction { .. })));
        assert!(matches!(parse(&r, "add text at the top"), Err(Error::MissingParameter(_))));
    }
}
