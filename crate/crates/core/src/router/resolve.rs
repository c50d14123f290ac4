use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::lexicon::{stem, words, Lexicon};
use crate::error::{Error, Result};
use crate::image::ObjectIndex;
use crate::registry::ObjectRegistry;

/// How well a name reference matches one object description.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReferenceScore {
    pub index: ObjectIndex,
    /// Reference tokens found anywhere in the description.
    pub matched: usize,
    pub total: usize,
    /// Twice the weighted score: 2 per token in the head noun phrase, 1 per
    /// token elsewhere.
    pub weight: u32,
}

impl ReferenceScore {
    /// Strictly more than half of the reference tokens matched.
    pub fn accepted(&self) -> bool {
        self.total > 0 && 2 * self.matched > self.total
    }
}

/// Content tokens of a reference phrase, stemmed and deduplicated.
pub(crate) fn reference_tokens(lex: &Lexicon, phrase: &str) -> Vec<String> {
    let function = lex.function_words();
    let mut seen = BTreeSet::new();
    words(phrase)
        .into_iter()
        .filter(|w| w.len() > 1 && !function.contains(w) && !w.chars().all(|c| c.is_ascii_digit()))
        .map(|w| stem(&w))
        .filter(|w| seen.insert(w.clone()))
        .collect()
}

/// Head noun phrase and full token set of a description.
fn description_tokens(lex: &Lexicon, description: &str) -> (BTreeSet<String>, BTreeSet<String>) {
    let first_clause = description.split([',', ';']).next().unwrap_or("");
    let mut head = BTreeSet::new();
    for w in words(first_clause) {
        if lex.reference.head_terminators.contains(&w) {
            break;
        }
        head.insert(stem(&w));
    }
    let all = words(description).iter().map(|w| stem(w)).collect();
    (head, all)
}

pub fn score_reference(lex: &Lexicon, tokens: &[String], registry: &ObjectRegistry) -> Vec<ReferenceScore> {
    registry
        .live()
        .map(|entry| {
            let (head, all) = description_tokens(lex, &entry.description);
            let mut matched = 0;
            let mut weight = 0;
            for t in tokens {
                let mut variants: BTreeSet<String> = BTreeSet::from([t.clone()]);
                if let Some(syn) = lex.synonyms.get(t) {
                    variants.extend(syn.iter().map(|s| stem(s)));
                }
                if variants.iter().any(|v| head.contains(v)) {
                    matched += 1;
                    weight += 2;
                } else if variants.iter().any(|v| all.contains(v)) {
                    matched += 1;
                    weight += 1;
                }
            }
            ReferenceScore {
                index: entry.index,
                matched,
                total: tokens.len(),
                weight,
            }
        })
        .collect()
}

pub(crate) fn resolve_name(lex: &Lexicon, name: &str, registry: &ObjectRegistry) -> Result<ObjectIndex> {
    let tokens = reference_tokens(lex, name);
    if tokens.is_empty() {
        return Err(Error::MissingParameter("object".into()));
    }
    let mut scores = score_reference(lex, &tokens, registry);
    scores.sort_by(|a, b| b.weight.cmp(&a.weight).then(b.matched.cmp(&a.matched)).then(a.index.cmp(&b.index)));
    let accepted: Vec<&ReferenceScore> = scores.iter().filter(|s| s.accepted()).collect();
    match accepted.as_slice() {
        [] => Err(Error::NoMatchingObject {
            reference: name.to_string(),
            candidates: scores.iter().filter(|s| s.matched > 0).take(3).map(|s| s.index).collect(),
        }),
        [best, rest @ ..] => {
            let tied: Vec<ObjectIndex> = std::iter::once(best.index)
                .chain(rest.iter().filter(|s| s.weight == best.weight).map(|s| s.index))
                .collect();
            if tied.len() > 1 {
                let mut tied = tied;
                tied.sort_unstable();
                return Err(Error::AmbiguousReference {
                    reference: name.to_string(),
                    candidates: tied,
                });
            }
            Ok(best.index)
        }
    }
}
