//! Longest-common-subsequence alignment and added-phrase extraction.

use std::collections::BTreeSet;

use crate::text::{Token, TokenSequence};

/// A phrase: a non-empty run of token surfaces.
pub type Phrase = Vec<String>;

/// Matched positions of a longest common subsequence.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Alignment {
    /// `(source_index, target_index)` pairs, strictly increasing in both.
    pub pairs: Vec<(usize, usize)>,
    pub source_len: usize,
    pub target_len: usize,
}

impl Alignment {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Maximal runs of target positions not covered by the alignment, as
    /// half-open ranges.
    pub fn target_gaps(&self) -> Vec<(usize, usize)> {
        let mut gaps = Vec::new();
        let mut next = 0;
        for &(_, j) in &self.pairs {
            if j > next {
                gaps.push((next, j));
            }
            next = j + 1;
        }
        if self.target_len > next {
            gaps.push((next, self.target_len));
        }
        gaps
    }
}

/// The deduplicated phrases one example needs inserted.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PhraseSet {
    phrases: BTreeSet<Phrase>,
}

impl PhraseSet {
    pub fn new() -> PhraseSet {
        PhraseSet::default()
    }

    /// Adds a phrase; empty phrases are ignored.
    pub fn insert(&mut self, phrase: Phrase) {
        if !phrase.is_empty() {
            self.phrases.insert(phrase);
        }
    }

    pub fn contains(&self, phrase: &[String]) -> bool {
        self.phrases.contains(phrase)
    }

    pub fn len(&self) -> usize {
        self.phrases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phrases.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Phrase> {
        self.phrases.iter()
    }
}

impl<P: Into<Phrase>> FromIterator<P> for PhraseSet {
    fn from_iter<I: IntoIterator<Item = P>>(iter: I) -> Self {
        let mut set = PhraseSet::new();
        for p in iter {
            set.insert(p.into());
        }
        set
    }
}

/// LCS over token surfaces, case-sensitive.
pub fn lcs(a: &TokenSequence, b: &TokenSequence) -> Alignment {
    lcs_by(a.tokens(), b.tokens(), |x: &Token, y: &Token| x == y)
}

/// LCS over arbitrary slices with a custom equality.
///
/// Suffix table, O(|a|·|b|) time and memory. The traceback walks forward and
/// takes the match move whenever it is optimal, so ties resolve towards the
/// earliest source positions.
pub fn lcs_by<A, B, F>(a: &[A], b: &[B], eq: F) -> Alignment
where
    F: Fn(&A, &B) -> bool,
{
    let (n, m) = (a.len(), b.len());
    let width = m + 1;
    let mut table = vec![0u32; (n + 1) * width];
    for i in (0..n).rev() {
        for j in (0..m).rev() {
            table[i * width + j] = if eq(&a[i], &b[j]) {
                table[(i + 1) * width + j + 1] + 1
            } else {
                table[(i + 1) * width + j].max(table[i * width + j + 1])
            };
        }
    }

    let mut pairs = Vec::with_capacity(table[0] as usize);
    let (mut i, mut j) = (0, 0);
    while i < n && j < m {
        let here = table[i * width + j];
        if eq(&a[i], &b[j]) && here == table[(i + 1) * width + j + 1] + 1 {
            pairs.push((i, j));
            i += 1;
            j += 1;
        } else if table[(i + 1) * width + j] >= table[i * width + j + 1] {
            i += 1;
        } else {
            j += 1;
        }
    }

    Alignment {
        pairs,
        source_len: n,
        target_len: m,
    }
}

/// Length of the LCS of two string slices.
pub fn lcs_len(a: &[&str], b: &[&str]) -> usize {
    lcs_by(a, b, |x, y| x == y).len()
}

/// Every maximal run of target tokens outside the LCS, deduplicated.
pub fn extract_phrase_set(source: &TokenSequence, target: &TokenSequence) -> PhraseSet {
    let alignment = lcs(source, target);
    alignment
        .target_gaps()
        .into_iter()
        .map(|(start, end)| {
            target.tokens()[start..end]
                .iter()
                .map(|t| t.surface().to_string())
                .collect::<Phrase>()
        })
        .collect()
}
