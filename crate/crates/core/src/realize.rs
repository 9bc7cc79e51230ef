//! Turning a source and its tags back into text.
//!
//! Realization runs in three passes:
//!
//! 1. A SWAP tag moves the tokens after it in front of the tokens up to and
//!    including it. The SWAP-tagged token is then treated as kept.
//! 2. Each token becomes a [`Slot`]: its added phrase and, when kept, the
//!    token itself. Registered [`RealizationRule`]s rewrite the slots in
//!    registration order.
//! 3. Casing is fixed at sentence boundaries. The first token of each output
//!    sentence gets an uppercase initial. A source token that opened a
//!    sentence but no longer does is lowercased, unless every occurrence of
//!    the word in the source is capitalized (then it is taken for a name).
//!    All-caps tokens are never touched.

use std::collections::HashSet;

use crate::align::Phrase;
use crate::error::{Error, Result};
use crate::tags::{Base, EditTag, TagSequence};
use crate::text::{self, Token, TokenSequence, POSSESSIVE_CLITIC};

/// One source token and what the tags make of it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Slot {
    /// Position in the original (pre-swap) source.
    pub source_index: usize,
    pub token: String,
    pub tag: EditTag,
    /// Tokens emitted before the source token.
    pub inserted: Phrase,
    pub keep: bool,
}

/// Slots in post-swap order, plus any phrase appended at the very end.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EditStream {
    pub slots: Vec<Slot>,
    pub trailing: Phrase,
}

/// Where an output token came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Origin {
    Source(usize),
    Inserted,
}

impl EditStream {
    /// Output tokens with their origin.
    pub fn flatten(&self) -> Vec<(String, Origin)> {
        let mut out = Vec::new();
        for slot in &self.slots {
            out.extend(slot.inserted.iter().map(|w| (w.clone(), Origin::Inserted)));
            if slot.keep {
                out.push((slot.token.clone(), Origin::Source(slot.source_index)));
            }
        }
        out.extend(self.trailing.iter().map(|w| (w.clone(), Origin::Inserted)));
        out
    }

    pub fn words(&self) -> Vec<String> {
        self.flatten().into_iter().map(|(w, _)| w).collect()
    }
}

type Trigger = dyn Fn(&EditStream, usize) -> bool + Send + Sync;
type Action = dyn Fn(&mut EditStream, usize) + Send + Sync;

/// A named rewrite applied at every slot where its trigger holds.
pub struct RealizationRule {
    name: String,
    trigger: Box<Trigger>,
    action: Box<Action>,
}

impl RealizationRule {
    pub fn new<T, A>(name: impl Into<String>, trigger: T, action: A) -> RealizationRule
    where
        T: Fn(&EditStream, usize) -> bool + Send + Sync + 'static,
        A: Fn(&mut EditStream, usize) + Send + Sync + 'static,
    {
        RealizationRule {
            name: name.into(),
            trigger: Box::new(trigger),
            action: Box::new(action),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Applies the rule at every triggering slot, left to right. Returns the
    /// number of sites rewritten.
    pub fn apply(&self, stream: &mut EditStream) -> usize {
        let mut fired = 0;
        for i in 0..stream.slots.len() {
            if (self.trigger)(stream, i) {
                (self.action)(stream, i);
                fired += 1;
            }
        }
        fired
    }
}

impl std::fmt::Debug for RealizationRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RealizationRule").field("name", &self.name).finish()
    }
}

/// Words that replace an entity mention together with its possessive.
pub const POSSESSIVE_PRONOUNS: [&str; 8] = ["his", "her", "its", "their", "my", "your", "our", "whose"];

fn possessive_clitic_after(stream: &EditStream, i: usize) -> Option<usize> {
    let slot = &stream.slots[i];
    let replaces_with_pronoun = slot.tag.base == Base::Delete
        && matches!(slot.tag.phrase(), Some([w]) if POSSESSIVE_PRONOUNS.contains(&w.to_lowercase().as_str()));
    if !replaces_with_pronoun {
        return None;
    }
    // Skip the rest of a multi-token mention.
    let mut j = i + 1;
    while j < stream.slots.len() && stream.slots[j].tag == EditTag::DELETE {
        j += 1;
    }
    let next = stream.slots.get(j)?;
    (next.token == POSSESSIVE_CLITIC && next.keep).then_some(j)
}

/// When a mention is deleted in favour of a possessive pronoun (`DELETE|his`),
/// the clitic `'s` after the mention is dropped whatever its own tag says.
pub fn possessive_rule() -> RealizationRule {
    RealizationRule::new(
        "possessive",
        |stream, i| possessive_clitic_after(stream, i).is_some(),
        |stream, i| {
            if let Some(j) = possessive_clitic_after(stream, i) {
                stream.slots[j].keep = false;
            }
        },
    )
}

/// Applies tags to sources.
///
/// The engine is immutable once rules are registered; `realize` takes
/// `&self` and can be shared between threads.
#[derive(Debug)]
pub struct RealizationEngine {
    rules: Vec<RealizationRule>,
}

impl Default for RealizationEngine {
    fn default() -> Self {
        RealizationEngine::new()
    }
}

impl RealizationEngine {
    /// Engine with the default rules (the possessive rule).
    pub fn new() -> RealizationEngine {
        RealizationEngine {
            rules: vec![possessive_rule()],
        }
    }

    /// Engine without any rule.
    pub fn without_rules() -> RealizationEngine {
        RealizationEngine { rules: Vec::new() }
    }

    pub fn rule_names(&self) -> Vec<&str> {
        self.rules.iter().map(RealizationRule::name).collect()
    }

    pub fn register_rule(&mut self, rule: RealizationRule) -> Result<()> {
        if self.rules.iter().any(|r| r.name == rule.name) {
            return Err(Error::DuplicateRule(rule.name));
        }
        self.rules.push(rule);
        Ok(())
    }

    /// Builds the edit stream and runs the rules, without casing fixes.
    pub fn edit_stream(&self, source: &TokenSequence, tags: &TagSequence) -> Result<EditStream> {
        if tags.tags.len() != source.len() {
            return Err(Error::LengthMismatch {
                what: "tag sequence",
                expected: source.len(),
                found: tags.tags.len(),
            });
        }
        let order: Vec<usize> = match tags.tags.iter().position(|t| t.base == Base::Swap) {
            Some(k) => (k + 1..source.len()).chain(0..=k).collect(),
            None => (0..source.len()).collect(),
        };
        let slots = order
            .into_iter()
            .map(|i| {
                let tag = tags.tags[i].clone();
                Slot {
                    source_index: i,
                    token: source[i].surface().to_string(),
                    inserted: tag.added_phrase.clone().unwrap_or_default(),
                    keep: tag.base.keeps_token(),
                    tag,
                }
            })
            .collect();
        let mut stream = EditStream {
            slots,
            trailing: tags.end_phrase.clone().unwrap_or_default(),
        };
        for rule in &self.rules {
            rule.apply(&mut stream);
        }
        Ok(stream)
    }

    /// Full realization: reorder, edit, rules, casing.
    pub fn realize(&self, source: &TokenSequence, tags: &TagSequence) -> Result<TokenSequence> {
        let stream = self.edit_stream(source, tags)?;
        let words = fix_casing(source, &stream.flatten());
        Ok(words
            .into_iter()
            .map(|w| Token::new(w).expect("tokens and phrases have no whitespace"))
            .collect())
    }
}

fn fix_casing(source: &TokenSequence, output: &[(String, Origin)]) -> Vec<String> {
    let source_initial = text::sentence_initial_flags(source.iter().map(Token::surface));
    let has_lowercase_use: HashSet<String> = source
        .iter()
        .map(Token::surface)
        .filter(|w| text::starts_lowercase(w))
        .map(str::to_lowercase)
        .collect();
    let output_initial = text::sentence_initial_flags(output.iter().map(|(w, _)| w.as_str()));

    output
        .iter()
        .zip(output_initial)
        .map(|((word, origin), initial)| {
            if text::is_all_caps(word) {
                return word.clone();
            }
            if initial {
                if text::starts_lowercase(word) {
                    return text::upper_first(word);
                }
                return word.clone();
            }
            if let Origin::Source(i) = *origin {
                let demote = source_initial[i]
                    && text::starts_uppercase(word)
                    && word != "I"
                    && has_lowercase_use.contains(&word.to_lowercase());
                if demote {
                    return text::lower_first(word);
                }
            }
            word.clone()
        })
        .collect()
}

/// Realizes with the default engine.
pub fn realize(source: &TokenSequence, tags: &TagSequence) -> Result<TokenSequence> {
    RealizationEngine::new().realize(source, tags)
}
