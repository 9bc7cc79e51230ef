//! Parallel corpora: TSV ingestion, phrase-set extraction, corpus-wide
//! conversion and coverage statistics.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;

use crate::align::{extract_phrase_set, lcs_len, PhraseSet};
use crate::error::{Error, Result};
use crate::tags::{ConversionOptions, Converter, TagSequence, END_SENTINEL};
use crate::text::{self, tokenize, Token, TokenSequence};
use crate::vocab::{coverage, select_frequency, PhraseVocabulary};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Split {
    #[default]
    Train,
    Validation,
    Test,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Validation => "validation",
            Split::Test => "test",
        }
    }
}

impl FromStr for Split {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "train" => Ok(Split::Train),
            "validation" => Ok(Split::Validation),
            "test" => Ok(Split::Test),
            other => Err(format!("unknown split {other:?}")),
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum TaskKind {
    Fusion,
    Split,
    Summarization,
    Gec,
    #[default]
    Generic,
}

impl TaskKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TaskKind::Fusion => "fusion",
            TaskKind::Split => "split",
            TaskKind::Summarization => "summarization",
            TaskKind::Gec => "gec",
            TaskKind::Generic => "generic",
        }
    }
}

impl FromStr for TaskKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "fusion" => Ok(TaskKind::Fusion),
            "split" => Ok(TaskKind::Split),
            "summarization" => Ok(TaskKind::Summarization),
            "gec" => Ok(TaskKind::Gec),
            "generic" => Ok(TaskKind::Generic),
            other => Err(format!("unknown task kind {other:?}")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EditExample {
    pub source: String,
    pub target: String,
    /// References beyond the target, for evaluation.
    pub extra_references: Vec<String>,
    pub split: Split,
}

impl EditExample {
    pub fn source_tokens(&self) -> TokenSequence {
        tokenize(&self.source)
    }

    pub fn target_tokens(&self) -> TokenSequence {
        tokenize(&self.target)
    }

    /// The target followed by any extra references.
    pub fn references(&self) -> Vec<String> {
        std::iter::once(self.target.clone())
            .chain(self.extra_references.iter().cloned())
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParallelCorpus {
    pub id: String,
    pub kind: TaskKind,
    pub examples: Vec<EditExample>,
}

impl ParallelCorpus {
    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    /// Examples of one split, as a corpus with the same id and kind.
    pub fn split(&self, split: Split) -> ParallelCorpus {
        ParallelCorpus {
            id: self.id.clone(),
            kind: self.kind,
            examples: self.examples.iter().filter(|e| e.split == split).cloned().collect(),
        }
    }

    pub fn split_counts(&self) -> [usize; 3] {
        let mut counts = [0; 3];
        for e in &self.examples {
            counts[e.split as usize] += 1;
        }
        counts
    }
}

/// Parses `source\ttarget[\tsplit][\tref…]` records. The third field is a
/// split label only when it reads `train`, `validation` or `test`; otherwise
/// it and every later field are extra references. Blank lines are skipped.
pub fn parse_tsv(content: &str, path: &Path, kind: TaskKind) -> Result<ParallelCorpus> {
    let mut examples = Vec::new();
    for (i, line) in content.lines().enumerate() {
        let n = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() < 2 {
            return Err(Error::parse(path, n, "expected at least 2 tab-separated fields (source, target)"));
        }
        if fields[0].trim().is_empty() {
            return Err(Error::parse(path, n, "empty source"));
        }
        let (split, refs) = match fields.get(2).map(|f| f.parse::<Split>()) {
            Some(Ok(split)) => (split, &fields[3..]),
            _ => (Split::Train, &fields[2..]),
        };
        examples.push(EditExample {
            source: fields[0].to_string(),
            target: fields[1].to_string(),
            extra_references: refs.iter().map(|r| r.to_string()).collect(),
            split,
        });
    }
    if examples.is_empty() {
        return Err(Error::EmptyFile(path.to_path_buf()));
    }
    let id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    Ok(ParallelCorpus { id, kind, examples })
}

pub fn read_tsv(path: &Path, kind: TaskKind) -> Result<ParallelCorpus> {
    let content = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_tsv(&content, path, kind)
}

/// Settings shared by phrase-set extraction and conversion, so the two agree.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CorpusOptions {
    pub conversion: ConversionOptions,
    /// Allow SWAP on fusion corpora.
    pub swap: bool,
}

impl Default for CorpusOptions {
    fn default() -> Self {
        CorpusOptions {
            conversion: ConversionOptions::default(),
            swap: true,
        }
    }
}

impl CorpusOptions {
    fn uses_swap(&self, kind: TaskKind) -> bool {
        self.swap && kind == TaskKind::Fusion
    }
}

fn with_sentinel(seq: &TokenSequence) -> TokenSequence {
    seq.iter()
        .cloned()
        .chain([Token::new(END_SENTINEL).expect("valid token")])
        .collect()
}

/// Phrases one example needs. With SWAP on, a two-sentence source is also
/// aligned with its sentences swapped and the orientation sharing more tokens
/// with the target wins (the given order on ties).
pub fn example_phrase_set(source: &TokenSequence, target: &TokenSequence, sentinel: bool, swap: bool) -> PhraseSet {
    let (src, tgt) = if sentinel {
        (with_sentinel(source), with_sentinel(target))
    } else {
        (source.clone(), target.clone())
    };
    let direct = extract_phrase_set(&src, &tgt);
    if !swap {
        return direct;
    }
    let Some(swap_at) = text::swap_point(source) else {
        return direct;
    };
    let mut swapped: TokenSequence = source.tokens()[swap_at + 1..]
        .iter()
        .chain(&source.tokens()[..=swap_at])
        .cloned()
        .collect();
    if sentinel {
        swapped = with_sentinel(&swapped);
    }
    let direct_len = lcs_len(&src.surfaces(), &tgt.surfaces());
    let swapped_len = lcs_len(&swapped.surfaces(), &tgt.surfaces());
    if swapped_len > direct_len {
        extract_phrase_set(&swapped, &tgt)
    } else {
        direct
    }
}

/// Phrase sets for every example, in corpus order.
pub fn phrase_sets(corpus: &ParallelCorpus, options: &CorpusOptions) -> Vec<PhraseSet> {
    let swap = options.uses_swap(corpus.kind);
    corpus
        .examples
        .par_iter()
        .map(|e| example_phrase_set(&e.source_tokens(), &e.target_tokens(), options.conversion.sentinel, swap))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TaggedExample {
    pub source: TokenSequence,
    pub target: TokenSequence,
    pub tags: TagSequence,
    pub split: Split,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ConversionStats {
    pub total: usize,
    pub convertible: usize,
    pub filtered: usize,
}

impl ConversionStats {
    pub fn convertible_fraction(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.convertible as f64 / self.total as f64
        }
    }
}

impl fmt::Display for ConversionStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "total {} convertible {} filtered {} fraction {:.4}",
            self.total,
            self.convertible,
            self.filtered,
            self.convertible_fraction()
        )
    }
}

/// Converts every example. Non-convertible examples stay in the output
/// (with `tags.convertible == false`) so callers can report on them.
pub fn convert_corpus(
    corpus: &ParallelCorpus,
    vocab: &PhraseVocabulary,
    options: &CorpusOptions,
) -> (Vec<TaggedExample>, ConversionStats) {
    let converter = Converter::new(vocab, options.conversion);
    let swap = options.uses_swap(corpus.kind);
    let tagged: Vec<TaggedExample> = corpus
        .examples
        .par_iter()
        .map(|e| {
            let source = e.source_tokens();
            let target = e.target_tokens();
            let tags = if swap {
                converter.convert_with_swap(&source, &target)
            } else {
                converter.convert(&source, &target)
            };
            TaggedExample {
                source,
                target,
                tags,
                split: e.split,
            }
        })
        .collect();
    let convertible = tagged.iter().filter(|t| t.tags.convertible).count();
    let stats = ConversionStats {
        total: tagged.len(),
        convertible,
        filtered: tagged.len() - convertible,
    };
    (tagged, stats)
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoveragePoint {
    pub budget: usize,
    pub vocab_size: usize,
    pub coverage: f64,
}

/// Coverage of the frequency-selected vocabulary for each budget.
pub fn stats_report(corpus: &ParallelCorpus, budgets: &[usize], options: &CorpusOptions) -> Vec<CoveragePoint> {
    let sets = phrase_sets(corpus, options);
    budgets
        .iter()
        .map(|&budget| {
            let vocab = select_frequency(&sets, budget);
            CoveragePoint {
                budget,
                vocab_size: vocab.len(),
                coverage: coverage(&vocab, &sets).coverage,
            }
        })
        .collect()
}

/// Coverage reachable with every phrase in the pool.
pub fn max_coverable_fraction(sets: &[PhraseSet]) -> f64 {
    let all = PhraseVocabulary::new(sets.iter().flat_map(|s| s.iter().cloned()));
    coverage(&all, sets).coverage
}
