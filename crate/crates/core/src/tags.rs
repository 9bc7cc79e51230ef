//! Edit tags and target-to-tag conversion.
//!
//! Every source token receives one tag: a base (`KEEP`, `DELETE` or `SWAP`)
//! and an optional phrase inserted before the token. [`Converter`] derives
//! the tag sequence that turns a source into a given target, scanning both
//! left to right and greedily matching tokens first and vocabulary phrases
//! second. Targets that cannot be reached this way come back as
//! non-convertible.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use crate::align::Phrase;
use crate::error::{Error, Result};
use crate::text::{self, Token, TokenSequence};
use crate::vocab::PhraseVocabulary;

/// Token appended to source and target in end-sentinel mode.
pub const END_SENTINEL: &str = "<editkit-end>";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Base {
    Keep,
    Delete,
    Swap,
}

impl Base {
    pub fn as_str(self) -> &'static str {
        match self {
            Base::Keep => "KEEP",
            Base::Delete => "DELETE",
            Base::Swap => "SWAP",
        }
    }

    /// Whether the tagged token appears in the output. SWAP tokens do.
    pub fn keeps_token(self) -> bool {
        !matches!(self, Base::Delete)
    }
}

/// A base tag with an optional added phrase, written `BASE|phrase`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EditTag {
    pub base: Base,
    pub added_phrase: Option<Phrase>,
}

impl EditTag {
    pub const KEEP: EditTag = EditTag {
        base: Base::Keep,
        added_phrase: None,
    };
    pub const DELETE: EditTag = EditTag {
        base: Base::Delete,
        added_phrase: None,
    };
    pub const SWAP: EditTag = EditTag {
        base: Base::Swap,
        added_phrase: None,
    };

    pub fn keep_with(phrase: Phrase) -> EditTag {
        EditTag {
            base: Base::Keep,
            added_phrase: Some(phrase),
        }
    }

    pub fn delete_with(phrase: Phrase) -> EditTag {
        EditTag {
            base: Base::Delete,
            added_phrase: Some(phrase),
        }
    }

    pub fn phrase(&self) -> Option<&[String]> {
        self.added_phrase.as_deref()
    }
}

impl fmt::Display for EditTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.base.as_str())?;
        if let Some(p) = &self.added_phrase {
            write!(f, "|{}", p.join(" "))?;
        }
        Ok(())
    }
}

impl FromStr for EditTag {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (base, phrase) = match s.split_once('|') {
            Some((b, p)) => (b, Some(p)),
            None => (s, None),
        };
        let base = match base {
            "KEEP" => Base::Keep,
            "DELETE" => Base::Delete,
            "SWAP" => Base::Swap,
            other => return Err(format!("unknown base tag {other:?}")),
        };
        let added_phrase = match phrase {
            None => None,
            Some(p) => {
                let words: Phrase = p.split(' ').map(str::to_string).collect();
                if words.iter().any(String::is_empty) || base == Base::Swap {
                    return Err(format!("invalid added phrase in {s:?}"));
                }
                Some(words)
            }
        };
        Ok(EditTag { base, added_phrase })
    }
}

/// Tags for one source, one per token.
///
/// A non-convertible sequence carries no tags. `end_phrase` holds a phrase
/// appended after the last token; only end-sentinel conversion produces one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TagSequence {
    pub tags: Vec<EditTag>,
    pub convertible: bool,
    pub end_phrase: Option<Phrase>,
}

impl TagSequence {
    pub fn new(tags: Vec<EditTag>) -> TagSequence {
        TagSequence {
            tags,
            convertible: true,
            end_phrase: None,
        }
    }

    pub fn non_convertible() -> TagSequence {
        TagSequence {
            tags: Vec::new(),
            convertible: false,
            end_phrase: None,
        }
    }

    pub fn len(&self) -> usize {
        self.tags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tags.is_empty()
    }

    pub fn swap_count(&self) -> usize {
        self.tags.iter().filter(|t| t.base == Base::Swap).count()
    }
}

/// Where an inserted phrase lands when the tokens right before the matching
/// source token are deleted.
///
/// Both placements realize to the same text.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum PhrasePlacement {
    /// On the first token of the preceding run of deletions, as `DELETE|p`.
    #[default]
    FirstDeletion,
    /// On the matching token itself, as `KEEP|p`.
    MatchedToken,
}

impl FromStr for PhrasePlacement {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "first-deletion" => Ok(PhrasePlacement::FirstDeletion),
            "matched-token" => Ok(PhrasePlacement::MatchedToken),
            other => Err(format!("unknown phrase placement {other:?}")),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ConversionOptions {
    /// Append a sentinel to both sides so phrases after the last source
    /// token can be attached.
    pub sentinel: bool,
    pub placement: PhrasePlacement,
}

/// Prefix tree over vocabulary phrases.
#[derive(Clone, Debug, Default)]
pub struct PhraseIndex {
    nodes: Vec<TrieNode>,
    max_len: usize,
}

#[derive(Clone, Debug, Default)]
struct TrieNode {
    children: HashMap<String, usize>,
    terminal: bool,
}

impl PhraseIndex {
    pub fn new(vocab: &PhraseVocabulary) -> PhraseIndex {
        let mut index = PhraseIndex {
            nodes: vec![TrieNode::default()],
            max_len: vocab.max_phrase_len(),
        };
        for phrase in vocab.phrases() {
            let mut node = 0;
            for word in phrase {
                node = match index.nodes[node].children.get(word) {
                    Some(&child) => child,
                    None => {
                        index.nodes.push(TrieNode::default());
                        let child = index.nodes.len() - 1;
                        index.nodes[node].children.insert(word.clone(), child);
                        child
                    }
                };
            }
            index.nodes[node].terminal = true;
        }
        index
    }

    pub fn max_len(&self) -> usize {
        self.max_len
    }

    pub fn contains(&self, phrase: &[String]) -> bool {
        let mut node = 0;
        for w in phrase {
            match self.nodes[node].children.get(w) {
                Some(&c) => node = c,
                None => return false,
            }
        }
        !phrase.is_empty() && self.nodes[node].terminal
    }
}

/// Converts (source, target) pairs into tag sequences for one vocabulary.
#[derive(Clone, Debug)]
pub struct Converter {
    index: PhraseIndex,
    options: ConversionOptions,
}

impl Converter {
    pub fn new(vocab: &PhraseVocabulary, options: ConversionOptions) -> Converter {
        Converter {
            index: PhraseIndex::new(vocab),
            options,
        }
    }

    pub fn options(&self) -> ConversionOptions {
        self.options
    }

    /// Greedy conversion. Never emits SWAP.
    pub fn convert(&self, source: &TokenSequence, target: &TokenSequence) -> TagSequence {
        self.convert_counting(source, target).0
    }

    /// Like [`Converter::convert`], also returning the number of trie steps
    /// spent probing for phrases.
    pub fn convert_counting(
        &self,
        source: &TokenSequence,
        target: &TokenSequence,
    ) -> (TagSequence, usize) {
        let mut probes = 0;
        let tags = if self.options.sentinel {
            let sentinel = Token::new(END_SENTINEL).expect("valid token");
            let src: Vec<&Token> = source.iter().chain([&sentinel]).collect();
            let tgt: Vec<&Token> = target.iter().chain([&sentinel]).collect();
            self.convert_tokens(&src, &tgt, &mut probes).map(|mut tags| {
                let end = tags.pop().expect("sentinel tag");
                TagSequence {
                    tags,
                    convertible: true,
                    end_phrase: end.added_phrase,
                }
            })
        } else {
            let src: Vec<&Token> = source.iter().collect();
            let tgt: Vec<&Token> = target.iter().collect();
            self.convert_tokens(&src, &tgt, &mut probes).map(TagSequence::new)
        };
        (tags.unwrap_or_else(TagSequence::non_convertible), probes)
    }

    fn convert_tokens(
        &self,
        source: &[&Token],
        target: &[&Token],
        probes: &mut usize,
    ) -> Option<Vec<EditTag>> {
        let mut tags = vec![EditTag::DELETE; source.len()];
        let mut is = 0;
        let mut it = 0;
        while it < target.len() {
            if is >= source.len() {
                return None;
            }
            if source[is] == target[it] {
                tags[is] = EditTag::KEEP;
                it += 1;
            } else if let Some(len) = self.match_phrase(source[is], &target[it..], probes) {
                let phrase: Phrase = target[it..it + len]
                    .iter()
                    .map(|t| t.surface().to_string())
                    .collect();
                tags[is] = EditTag::keep_with(phrase);
                if self.options.placement == PhrasePlacement::FirstDeletion {
                    hoist_to_first_deletion(&mut tags, is);
                }
                it += len + 1;
            }
            is += 1;
        }
        Some(tags)
    }

    // Shortest phrase p = rest[..j] (j ≤ n_p) in the vocabulary such that the
    // target token right after it equals the current source token.
    fn match_phrase(&self, source: &Token, rest: &[&Token], probes: &mut usize) -> Option<usize> {
        let mut node = 0;
        for j in 1..=self.index.max_len {
            if j > rest.len() {
                break;
            }
            *probes += 1;
            node = *self.index.nodes[node].children.get(rest[j - 1].surface())?;
            if self.index.nodes[node].terminal && rest.get(j).is_some_and(|t| *t == source) {
                return Some(j);
            }
        }
        None
    }

    /// Tries the source as given, then, for two-sentence sources, with the
    /// sentences swapped. A swapped conversion marks the first sentence's
    /// terminator with SWAP; that token must be plainly kept after the swap.
    pub fn convert_with_swap(&self, source: &TokenSequence, target: &TokenSequence) -> TagSequence {
        let direct = self.convert(source, target);
        if direct.convertible {
            return direct;
        }
        let Some(swap_at) = text::swap_point(source) else {
            return direct;
        };
        let first_len = swap_at + 1;
        let second_len = source.len() - first_len;
        let swapped: TokenSequence = source.tokens()[first_len..]
            .iter()
            .chain(&source.tokens()[..first_len])
            .cloned()
            .collect();
        let attempt = self.convert(&swapped, target);
        if !attempt.convertible {
            return attempt;
        }

        let mut tags = Vec::with_capacity(source.len());
        tags.extend_from_slice(&attempt.tags[second_len..]);
        tags.extend_from_slice(&attempt.tags[..second_len]);
        if tags[swap_at] != EditTag::KEEP {
            return TagSequence::non_convertible();
        }
        tags[swap_at] = EditTag::SWAP;
        TagSequence {
            tags,
            convertible: true,
            end_phrase: attempt.end_phrase,
        }
    }
}

fn hoist_to_first_deletion(tags: &mut [EditTag], at: usize) {
    let mut first = at;
    while first > 0 && tags[first - 1] == EditTag::DELETE {
        first -= 1;
    }
    if first != at {
        let phrase = tags[at].added_phrase.take();
        tags[first].added_phrase = phrase;
    }
}

/// Converts with default options, without SWAP.
pub fn convert_to_tags(
    source: &TokenSequence,
    target: &TokenSequence,
    vocab: &PhraseVocabulary,
) -> TagSequence {
    Converter::new(vocab, ConversionOptions::default()).convert(source, target)
}

/// Converts with default options, retrying two-sentence sources swapped.
pub fn convert_with_swap(
    source: &TokenSequence,
    target: &TokenSequence,
    vocab: &PhraseVocabulary,
) -> TagSequence {
    Converter::new(vocab, ConversionOptions::default()).convert_with_swap(source, target)
}

/// Bijection between tags and integer label ids.
///
/// Ids are assigned `KEEP`, `DELETE`, then `KEEP|p`, `DELETE|p` for each
/// phrase in vocabulary order, then `SWAP` when enabled.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TagLabelIndex {
    labels: Vec<EditTag>,
    lookup: HashMap<EditTag, usize>,
}

impl TagLabelIndex {
    pub fn new(vocab: &PhraseVocabulary, enable_swap: bool) -> TagLabelIndex {
        let mut labels = vec![EditTag::KEEP, EditTag::DELETE];
        for p in vocab.phrases() {
            labels.push(EditTag::keep_with(p.clone()));
            labels.push(EditTag::delete_with(p.clone()));
        }
        if enable_swap {
            labels.push(EditTag::SWAP);
        }
        TagLabelIndex::from_labels(labels).expect("labels are distinct")
    }

    /// Builds an index from an explicit label list; fails on duplicates.
    pub fn from_labels(labels: Vec<EditTag>) -> std::result::Result<TagLabelIndex, String> {
        let mut lookup = HashMap::with_capacity(labels.len());
        for (i, l) in labels.iter().enumerate() {
            if lookup.insert(l.clone(), i).is_some() {
                return Err(format!("duplicate label {l}"));
            }
        }
        Ok(TagLabelIndex { labels, lookup })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[EditTag] {
        &self.labels
    }

    pub fn label(&self, id: usize) -> Option<&EditTag> {
        self.labels.get(id)
    }

    pub fn id(&self, tag: &EditTag) -> Option<usize> {
        self.lookup.get(tag).copied()
    }

    pub fn swap_id(&self) -> Option<usize> {
        self.id(&EditTag::SWAP)
    }

    /// Label ids for a convertible sequence. An end phrase becomes one extra
    /// trailing `KEEP|p` id.
    pub fn encode(&self, tags: &TagSequence) -> Result<Vec<usize>> {
        let mut ids = Vec::with_capacity(tags.len() + 1);
        for t in &tags.tags {
            ids.push(self.id(t).ok_or_else(|| Error::Config(format!("tag {t} is not in the label index")))?);
        }
        if let Some(p) = &tags.end_phrase {
            let end = EditTag::keep_with(p.clone());
            ids.push(self.id(&end).ok_or_else(|| Error::Config(format!("tag {end} is not in the label index")))?);
        }
        Ok(ids)
    }

    /// Inverse of [`TagLabelIndex::encode`] for a source of `source_len`
    /// tokens.
    pub fn decode(&self, ids: &[usize], source_len: usize) -> Result<TagSequence> {
        let to_tag = |&id: &usize| self.label(id).cloned().ok_or(Error::UnknownLabel(id));
        if ids.len() == source_len {
            return Ok(TagSequence::new(ids.iter().map(to_tag).collect::<Result<_>>()?));
        }
        if ids.len() == source_len + 1 {
            let end = to_tag(&ids[source_len])?;
            if end.base == Base::Keep && end.added_phrase.is_some() {
                let mut tags = TagSequence::new(ids[..source_len].iter().map(to_tag).collect::<Result<_>>()?);
                tags.end_phrase = end.added_phrase;
                return Ok(tags);
            }
        }
        Err(Error::LengthMismatch {
            what: "tag sequence",
            expected: source_len,
            found: ids.len(),
        })
    }
}

/// Builds the label index for a vocabulary.
pub fn label_index(vocab: &PhraseVocabulary, enable_swap: bool) -> TagLabelIndex {
    TagLabelIndex::new(vocab, enable_swap)
}
