//! Phrase-vocabulary selection.
//!
//! Choosing at most `ℓ` phrases so that as many phrase sets as possible are
//! fully contained in the vocabulary is NP-hard. Two heuristics are offered,
//! ranking by phrase-set frequency ([`select_frequency`], the production
//! path) and greedy incremental coverage ([`select_greedy`]). An exhaustive
//! solver for small instances ([`select_exact`]) serves as the reference.

use std::cmp::Reverse;
use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::Write;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::align::{Phrase, PhraseSet};
use crate::error::{Error, Result};

/// Budget used when none is configured.
pub const DEFAULT_VOCAB_SIZE: usize = 500;

/// Largest pool [`select_exact`] will enumerate.
pub const EXACT_PHRASE_LIMIT: usize = 20;

const HEADER: &str = "editkit-vocab v1";

/// An ordered set of distinct, non-empty insertable phrases.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PhraseVocabulary {
    phrases: Vec<Phrase>,
    max_phrase_len: usize,
    source_corpus_id: String,
}

impl PhraseVocabulary {
    /// Builds a vocabulary, dropping empty phrases and later duplicates.
    pub fn new(phrases: impl IntoIterator<Item = Phrase>) -> PhraseVocabulary {
        let mut seen = HashSet::new();
        let phrases: Vec<Phrase> = phrases
            .into_iter()
            .filter(|p| !p.is_empty() && seen.insert(p.clone()))
            .collect();
        let max_phrase_len = phrases.iter().map(Vec::len).max().unwrap_or(0);
        PhraseVocabulary {
            phrases,
            max_phrase_len,
            source_corpus_id: String::new(),
        }
    }

    pub fn empty() -> PhraseVocabulary {
        PhraseVocabulary::default()
    }

    pub fn with_corpus_id(mut self, id: impl Into<String>) -> PhraseVocabulary {
        self.source_corpus_id = id.into();
        self
    }

    pub fn phrases(&self) -> &[Phrase] {
        &self.phrases
    }

    pub fn len(&self) -> usize {
        self.phrases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phrases.is_empty()
    }

    /// Length in tokens of the longest phrase.
    pub fn max_phrase_len(&self) -> usize {
        self.max_phrase_len
    }

    pub fn source_corpus_id(&self) -> &str {
        &self.source_corpus_id
    }

    pub fn contains(&self, phrase: &[String]) -> bool {
        self.phrases.iter().any(|p| p == phrase)
    }

    /// Number of distinct tag labels this vocabulary induces.
    pub fn label_count(&self, swap: bool) -> usize {
        2 * (self.phrases.len() + 1) + usize::from(swap)
    }

    /// Short content hash used to tie downstream artifacts to this vocabulary.
    pub fn fingerprint(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.to_file_string().as_bytes());
        let digest = hasher.finalize();
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Serializes to the versioned text format: a header line followed by one
    /// phrase per line with space-separated tokens.
    pub fn to_file_string(&self) -> String {
        let mut out = format!("{HEADER} {}\n", self.phrases.len());
        for p in &self.phrases {
            out.push_str(&p.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        w.write_all(self.to_file_string().as_bytes())
    }

    /// Parses the text format, validating the header, the count and phrase
    /// distinctness. `path` is used for error messages only.
    pub fn parse(content: &str, path: &Path) -> Result<PhraseVocabulary> {
        let mut lines = content.lines();
        let header = lines.next().ok_or_else(|| Error::EmptyFile(path.into()))?;
        let count: usize = header
            .strip_prefix(HEADER)
            .and_then(|rest| rest.strip_prefix(' '))
            .and_then(|n| n.parse().ok())
            .ok_or_else(|| {
                Error::parse(path, 1, format!("expected header `{HEADER} <count>`, got {header:?}"))
            })?;

        let mut phrases = Vec::with_capacity(count);
        let mut seen = HashSet::new();
        for (i, line) in lines.enumerate() {
            let lineno = i + 2;
            let phrase: Phrase = line.split(' ').map(str::to_string).collect();
            if phrase.iter().any(String::is_empty) {
                return Err(Error::parse(path, lineno, "empty phrase or stray space"));
            }
            if !seen.insert(phrase.clone()) {
                return Err(Error::parse(path, lineno, format!("duplicate phrase {line:?}")));
            }
            phrases.push(phrase);
        }
        if phrases.len() != count {
            return Err(Error::parse(
                path,
                1,
                format!("header declares {count} phrases, found {}", phrases.len()),
            ));
        }
        let corpus_id = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        Ok(PhraseVocabulary::new(phrases).with_corpus_id(corpus_id))
    }

    pub fn load(path: &Path) -> Result<PhraseVocabulary> {
        let content = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        PhraseVocabulary::parse(&content, path)
    }
}

/// How many phrase sets a vocabulary covers.
#[derive(Clone, Debug, PartialEq)]
pub struct CoverageReport {
    pub total_examples: usize,
    pub covered_examples: usize,
    pub coverage: f64,
    /// For each vocabulary phrase, the number of phrase sets containing it.
    pub per_phrase_frequency: BTreeMap<Phrase, usize>,
}

/// Number of phrase sets each phrase occurs in.
pub fn phrase_frequencies(phrase_sets: &[PhraseSet]) -> HashMap<&Phrase, usize> {
    let mut freq = HashMap::new();
    for set in phrase_sets {
        for p in set.iter() {
            *freq.entry(p).or_insert(0) += 1;
        }
    }
    freq
}

/// All distinct phrases ranked by descending frequency, ties in lexicographic
/// order.
pub fn rank_by_frequency(phrase_sets: &[PhraseSet]) -> Vec<(Phrase, usize)> {
    let mut ranked: Vec<(Phrase, usize)> = phrase_frequencies(phrase_sets)
        .into_iter()
        .map(|(p, c)| (p.clone(), c))
        .collect();
    ranked.sort_by(|(pa, ca), (pb, cb)| cb.cmp(ca).then_with(|| pa.cmp(pb)));
    ranked
}

/// The `budget` phrases occurring in the most phrase sets.
pub fn select_frequency(phrase_sets: &[PhraseSet], budget: usize) -> PhraseVocabulary {
    PhraseVocabulary::new(
        rank_by_frequency(phrase_sets)
            .into_iter()
            .take(budget)
            .map(|(p, _)| p),
    )
}

/// Adds one phrase at a time, always the one completing the most
/// still-uncovered phrase sets. Ties go to the more frequent phrase, then to
/// the lexicographically smaller one.
pub fn select_greedy(phrase_sets: &[PhraseSet], budget: usize) -> PhraseVocabulary {
    let ranked = rank_by_frequency(phrase_sets);
    let id_of: HashMap<&Phrase, usize> = ranked.iter().enumerate().map(|(i, (p, _))| (p, i)).collect();

    // Sets each phrase occurs in, and how many phrases each set still lacks.
    let mut occurs_in: Vec<Vec<usize>> = vec![Vec::new(); ranked.len()];
    let mut missing: Vec<usize> = Vec::with_capacity(phrase_sets.len());
    for (s, set) in phrase_sets.iter().enumerate() {
        for p in set.iter() {
            occurs_in[id_of[p]].push(s);
        }
        missing.push(set.len());
    }

    let mut chosen = vec![false; ranked.len()];
    let mut selected = Vec::new();
    while selected.len() < budget {
        // `ranked` is already in (frequency desc, lexicographic) order, so the
        // first maximum wins the tie-break.
        let best = (0..ranked.len())
            .filter(|&p| !chosen[p])
            .map(|p| {
                let gain = occurs_in[p].iter().filter(|&&s| missing[s] == 1).count();
                (p, gain)
            })
            .max_by_key(|&(p, gain)| (gain, Reverse(p)));
        let Some((p, _)) = best else { break };
        chosen[p] = true;
        for &s in &occurs_in[p] {
            missing[s] -= 1;
        }
        selected.push(ranked[p].0.clone());
    }
    PhraseVocabulary::new(selected)
}

/// Exhaustive search over every subset of at most `budget` phrases.
///
/// Among optimal subsets the smallest wins, then the one with the larger
/// total frequency, then the lexicographically smallest when phrases are
/// listed in frequency order.
pub fn select_exact(phrase_sets: &[PhraseSet], budget: usize) -> Result<PhraseVocabulary> {
    let ranked = rank_by_frequency(phrase_sets);
    if ranked.len() > EXACT_PHRASE_LIMIT {
        return Err(Error::InstanceTooLarge {
            phrases: ranked.len(),
            limit: EXACT_PHRASE_LIMIT,
        });
    }
    let id_of: HashMap<&Phrase, usize> = ranked.iter().enumerate().map(|(i, (p, _))| (p, i)).collect();
    let set_masks: Vec<u32> = phrase_sets
        .iter()
        .map(|set| set.iter().fold(0u32, |m, p| m | (1 << id_of[p])))
        .collect();

    let n = ranked.len();
    let budget = budget.min(n);
    // (covered, Reverse(size), total frequency, Reverse(index list))
    let mut best: Option<(usize, Reverse<u32>, usize, Reverse<Vec<usize>>)> = None;
    let mut best_mask = 0u32;
    for mask in 0u32..(1u32 << n) {
        let size = mask.count_ones();
        if size as usize > budget {
            continue;
        }
        let covered = set_masks.iter().filter(|&&s| s & !mask == 0).count();
        let members: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        let freq: usize = members.iter().map(|&i| ranked[i].1).sum();
        let key = (covered, Reverse(size), freq, Reverse(members));
        if best.as_ref().is_none_or(|b| key > *b) {
            best = Some(key);
            best_mask = mask;
        }
    }

    Ok(PhraseVocabulary::new(
        (0..n)
            .filter(|i| best_mask & (1 << i) != 0)
            .map(|i| ranked[i].0.clone()),
    ))
}

/// A phrase set is covered when all its phrases are in the vocabulary. Empty
/// sets are always covered and an empty list has coverage 1.
pub fn coverage(vocab: &PhraseVocabulary, phrase_sets: &[PhraseSet]) -> CoverageReport {
    let members: HashSet<&Phrase> = vocab.phrases().iter().collect();
    let covered_examples = phrase_sets
        .iter()
        .filter(|set| set.iter().all(|p| members.contains(p)))
        .count();
    let total_examples = phrase_sets.len();
    let freq = phrase_frequencies(phrase_sets);
    let per_phrase_frequency = vocab
        .phrases()
        .iter()
        .map(|p| (p.clone(), freq.get(p).copied().unwrap_or(0)))
        .collect();
    CoverageReport {
        total_examples,
        covered_examples,
        coverage: if total_examples == 0 {
            1.0
        } else {
            covered_examples as f64 / total_examples as f64
        },
        per_phrase_frequency,
    }
}
