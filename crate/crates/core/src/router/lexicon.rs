use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};

pub const LEXICON_VERSION: u32 = 1;

const DEFAULT_LEXICON: &str = include_str!("../../assets/lexicon.toml");

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default)]
pub struct WordGroup {
    pub words: Vec<String>,
    pub phrases: Vec<String>,
    pub darker: Vec<String>,
    pub verbs: Vec<String>,
    pub nouns: Vec<String>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct ReferenceWords {
    pub terminators: Vec<String>,
    pub stop_words: Vec<String>,
    pub head_terminators: Vec<String>,
}

/// Router vocabulary, loaded from TOML so new phrasings need no code change.
#[derive(Debug, Clone, Deserialize)]
pub struct Lexicon {
    pub version: u32,
    pub interrogatives: Vec<String>,
    pub informational: Vec<String>,
    pub generic_edit: Vec<String>,
    pub unsupported: Vec<String>,
    pub conjunctions: Vec<String>,
    pub blur: WordGroup,
    pub remove: WordGroup,
    pub brightness: WordGroup,
    pub color: WordGroup,
    pub text: WordGroup,
    pub reference: ReferenceWords,
    pub synonyms: BTreeMap<String, Vec<String>>,
}

impl Default for Lexicon {
    fn default() -> Self {
        Self::from_toml(DEFAULT_LEXICON).expect("bundled lexicon is valid")
    }
}

impl Lexicon {
    pub fn from_toml(text: &str) -> Result<Self> {
        let mut lex: Lexicon = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        if lex.version != LEXICON_VERSION {
            return Err(Error::Config(format!(
                "lexicon version {} is not supported (expected {LEXICON_VERSION})",
                lex.version
            )));
        }
        for g in [&mut lex.blur, &mut lex.remove, &mut lex.brightness, &mut lex.color, &mut lex.text] {
            for p in &mut g.phrases {
                *p = normalize(p);
            }
        }
        Ok(lex)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::UnreadableFile {
            path: path.display().to_string(),
            reason: e.to_string(),
        })?;
        Self::from_toml(&text)
    }

    /// Every word that carries routing meaning rather than naming an object.
    pub(crate) fn function_words(&self) -> BTreeSet<String> {
        let mut out: BTreeSet<String> = BTreeSet::new();
        let lists = [
            &self.generic_edit,
            &self.unsupported,
            &self.conjunctions,
            &self.reference.stop_words,
            &self.blur.words,
            &self.remove.words,
            &self.brightness.words,
            &self.brightness.darker,
            &self.color.words,
            &self.color.verbs,
            &self.text.nouns,
            &self.text.verbs,
        ];
        for list in lists {
            out.extend(list.iter().cloned());
        }
        for g in [&self.blur, &self.remove, &self.brightness, &self.color, &self.text] {
            for p in &g.phrases {
                out.extend(p.split(' ').map(str::to_string));
            }
        }
        out
    }
}

/// Lowercases, drops apostrophes, and turns every other non-alphanumeric
/// character into a single space.
pub fn normalize(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for ch in text.chars().flat_map(char::to_lowercase) {
        match ch {
            '\'' | '\u{2019}' | '\u{2018}' | '`' => {}
            c if c.is_alphanumeric() => out.push(c),
            _ => {
                if !out.ends_with(' ') {
                    out.push(' ');
                }
            }
        }
    }
    out.trim().to_string()
}

pub fn words(text: &str) -> Vec<String> {
    normalize(text).split(' ').filter(|w| !w.is_empty()).map(str::to_string).collect()
}

/// Crude English plural folding, applied to both sides of a name match.
pub fn stem(word: &str) -> String {
    if word.len() > 4 && word.ends_with("ies") {
        return format!("{}y", &word[..word.len() - 3]);
    }
    if word.len() > 3 && word.ends_with('s') && !word.ends_with("ss") && !word.ends_with("us") {
        return word[..word.len() - 1].to_string();
    }
    word.to_string()
}

/// Whether `phrase` (already normalized) occurs in `norm` on word boundaries.
pub fn has_phrase(norm: &str, phrase: &str) -> bool {
    format!(" {norm} ").contains(&format!(" {phrase} "))
}
