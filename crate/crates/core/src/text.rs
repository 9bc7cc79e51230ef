//! Word-level tokenization, detokenization, sentence splitting and casing
//! helpers.
//!
//! The tokenizer is rule-based: text is split on whitespace, then leading and
//! trailing punctuation marks are peeled off each chunk as separate tokens.
//! The possessive clitic `'s` is always its own token. Detokenizing the
//! output and tokenizing again reproduces the same token sequence.

use std::fmt;
use std::ops::Index;

/// Punctuation marks that are detached from the edges of a whitespace chunk.
const DETACHABLE: [char; 10] = ['.', ',', '!', '?', ';', ':', '"', '\'', '(', ')'];

/// The possessive clitic.
pub const POSSESSIVE_CLITIC: &str = "'s";

/// Separator token placed between output sentences of a sentence split.
pub const SPLIT_SEPARATOR: &str = "<::::>";

fn is_detachable(c: char) -> bool {
    DETACHABLE.contains(&c)
}

/// A single word-level token.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Token {
    surface: String,
}

impl Token {
    /// Creates a token. Returns `None` for empty surfaces or surfaces with
    /// whitespace.
    pub fn new(surface: impl Into<String>) -> Option<Token> {
        let surface = surface.into();
        if surface.is_empty() || surface.chars().any(char::is_whitespace) {
            return None;
        }
        Some(Token { surface })
    }

    pub fn surface(&self) -> &str {
        &self.surface
    }

    /// True for `.`, `!` and `?`.
    pub fn is_sentence_final(&self) -> bool {
        matches!(self.surface.as_str(), "." | "!" | "?")
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.surface)
    }
}

/// An ordered list of tokens.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct TokenSequence {
    tokens: Vec<Token>,
}

impl TokenSequence {
    pub fn new(tokens: Vec<Token>) -> TokenSequence {
        TokenSequence { tokens }
    }

    /// Builds a sequence from pre-split words.
    ///
    /// # Panics
    ///
    /// Panics if any word is empty or contains whitespace.
    pub fn from_words<S: AsRef<str>>(words: &[S]) -> TokenSequence {
        let tokens = words
            .iter()
            .map(|w| {
                Token::new(w.as_ref())
                    .unwrap_or_else(|| panic!("invalid token {:?}", w.as_ref()))
            })
            .collect();
        TokenSequence { tokens }
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn into_tokens(self) -> Vec<Token> {
        self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Token> {
        self.tokens.iter()
    }

    pub fn surfaces(&self) -> Vec<&str> {
        self.tokens.iter().map(Token::surface).collect()
    }

    pub fn push(&mut self, token: Token) {
        self.tokens.push(token);
    }
}

impl Index<usize> for TokenSequence {
    type Output = Token;

    fn index(&self, index: usize) -> &Token {
        &self.tokens[index]
    }
}

impl FromIterator<Token> for TokenSequence {
    fn from_iter<I: IntoIterator<Item = Token>>(iter: I) -> Self {
        TokenSequence {
            tokens: iter.into_iter().collect(),
        }
    }
}

impl<'a> IntoIterator for &'a TokenSequence {
    type Item = &'a Token;
    type IntoIter = std::slice::Iter<'a, Token>;

    fn into_iter(self) -> Self::IntoIter {
        self.tokens.iter()
    }
}

/// Splits text into word-level tokens. Never fails; empty or blank input
/// yields an empty sequence.
pub fn tokenize(text: &str) -> TokenSequence {
    let mut tokens = Vec::new();
    for chunk in text.split_whitespace() {
        split_chunk(chunk, &mut tokens);
    }
    TokenSequence { tokens }
}

fn push(tokens: &mut Vec<Token>, s: &str) {
    tokens.push(Token {
        surface: s.to_string(),
    });
}

fn split_chunk(chunk: &str, tokens: &mut Vec<Token>) {
    let mut core = chunk;

    // Leading marks. A clitic whose remainder splits off entirely as trailing
    // marks and clitics stays whole.
    while let Some(c) = core.chars().next() {
        if core.starts_with(POSSESSIVE_CLITIC) && split_trailing(core).0 == POSSESSIVE_CLITIC {
            break;
        }
        if !is_detachable(c) {
            break;
        }
        push(tokens, &core[..c.len_utf8()]);
        core = &core[c.len_utf8()..];
    }

    let (core, trailing) = split_trailing(core);
    if !core.is_empty() {
        push(tokens, core);
    }
    for t in trailing.into_iter().rev() {
        push(tokens, t);
    }
}

// Peels trailing marks and clitics; returns the rest and the peeled pieces
// innermost-last.
fn split_trailing(mut core: &str) -> (&str, Vec<&str>) {
    let mut trailing = Vec::new();
    while !core.is_empty() && core != POSSESSIVE_CLITIC {
        if core.ends_with(POSSESSIVE_CLITIC) {
            let cut = core.len() - POSSESSIVE_CLITIC.len();
            trailing.push(&core[cut..]);
            core = &core[..cut];
            continue;
        }
        let last = core.chars().next_back().expect("non-empty");
        if !is_detachable(last) {
            break;
        }
        let cut = core.len() - last.len_utf8();
        trailing.push(&core[cut..]);
        core = &core[..cut];
    }
    (core, trailing)
}

fn attaches_left(surface: &str) -> bool {
    matches!(
        surface,
        "." | "," | "!" | "?" | ";" | ":" | ")" | POSSESSIVE_CLITIC
    )
}

/// Joins tokens with single spaces, except before closing punctuation and the
/// possessive clitic and after an opening parenthesis.
pub fn detokenize(seq: &TokenSequence) -> String {
    detokenize_words(seq.tokens.iter().map(Token::surface))
}

/// [`detokenize`] over plain strings.
pub fn detokenize_words<'a, I>(words: I) -> String
where
    I: IntoIterator<Item = &'a str>,
{
    let mut out = String::new();
    let mut prev: Option<&str> = None;
    for w in words {
        if let Some(p) = prev {
            if !attaches_left(w) && p != "(" {
                out.push(' ');
            }
        }
        out.push_str(w);
        prev = Some(w);
    }
    out
}

/// Splits after every sentence-final token. Concatenating the parts gives
/// back the input.
pub fn split_sentences(seq: &TokenSequence) -> Vec<TokenSequence> {
    let mut parts = Vec::new();
    let mut current = Vec::new();
    for token in &seq.tokens {
        current.push(token.clone());
        if token.is_sentence_final() {
            parts.push(TokenSequence {
                tokens: std::mem::take(&mut current),
            });
        }
    }
    if !current.is_empty() {
        parts.push(TokenSequence { tokens: current });
    }
    parts
}

/// Position of the token that closes the first of exactly two sentences.
/// `None` when the sequence does not split into two sentences.
pub fn swap_point(seq: &TokenSequence) -> Option<usize> {
    let parts = split_sentences(seq);
    if parts.len() == 2 {
        Some(parts[0].len() - 1)
    } else {
        None
    }
}

/// Flags, per token, whether it opens a sentence: the first token, and the
/// first token after a sentence-final mark. Split separators are skipped and
/// count as a boundary.
pub fn sentence_initial_flags<'a, I>(words: I) -> Vec<bool>
where
    I: IntoIterator<Item = &'a str>,
{
    let mut flags = Vec::new();
    let mut at_start = true;
    for w in words {
        if w == SPLIT_SEPARATOR {
            flags.push(false);
            at_start = true;
            continue;
        }
        flags.push(at_start);
        at_start = matches!(w, "." | "!" | "?");
    }
    flags
}

pub fn starts_uppercase(s: &str) -> bool {
    s.chars().next().is_some_and(char::is_uppercase)
}

pub fn starts_lowercase(s: &str) -> bool {
    s.chars().next().is_some_and(char::is_lowercase)
}

/// All cased characters are uppercase and there are at least two of them.
pub fn is_all_caps(s: &str) -> bool {
    let mut cased = 0;
    for c in s.chars() {
        if c.is_lowercase() {
            return false;
        }
        if c.is_uppercase() {
            cased += 1;
        }
    }
    cased >= 2
}

pub fn upper_first(s: &str) -> String {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

pub fn lower_first(s: &str) -> String {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) => c.to_lowercase().chain(chars).collect(),
        None => String::new(),
    }
}
