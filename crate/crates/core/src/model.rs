//! Sequence taggers over the edit-tag label index.
//!
//! [`PerceptronModel`] is an averaged perceptron decoding greedily left to
//! right. In autoregressive mode the previously predicted label is a feature;
//! in feedforward mode every position is scored independently. The majority
//! baseline is stored in the same weight format, so both kinds share
//! prediction and persistence.

use std::collections::{BTreeMap, HashMap};
use std::fmt::{self, Write as _};
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::tags::{EditTag, TagLabelIndex, TagSequence};
use crate::text::{self, Token, TokenSequence};

const HEADER: &str = "editkit-model v1";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum DecodeMode {
    #[default]
    Autoregressive,
    Feedforward,
}

impl DecodeMode {
    pub fn as_str(self) -> &'static str {
        match self {
            DecodeMode::Autoregressive => "ar",
            DecodeMode::Feedforward => "ff",
        }
    }
}

impl FromStr for DecodeMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ar" => Ok(DecodeMode::Autoregressive),
            "ff" => Ok(DecodeMode::Feedforward),
            other => Err(format!("unknown mode {other:?} (expected ar or ff)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelKind {
    Perceptron,
    Majority,
}

impl ModelKind {
    fn as_str(self) -> &'static str {
        match self {
            ModelKind::Perceptron => "perceptron",
            ModelKind::Majority => "majority",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub seed: u64,
    pub shuffle: bool,
    pub mode: DecodeMode,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 20,
            seed: 42,
            shuffle: true,
            mode: DecodeMode::Autoregressive,
        }
    }
}

/// Feature strings for position `i`. `prev` is the previously predicted
/// label, `None` in feedforward mode.
pub fn features(tokens: &[Token], i: usize, prev: Option<usize>, sentence_index: usize, swap_at: Option<usize>) -> Vec<String> {
    let word = tokens[i].surface();
    let lower = word.to_lowercase();
    let chars: Vec<char> = lower.chars().collect();
    let context = |offset: isize| -> String {
        let j = i as isize + offset;
        if j < 0 {
            "<s>".to_string()
        } else if j as usize >= tokens.len() {
            "</s>".to_string()
        } else {
            tokens[j as usize].surface().to_lowercase()
        }
    };

    let mut f = Vec::with_capacity(20);
    f.push("bias".to_string());
    f.push(format!("w={lower}"));
    f.push(format!("tok={word}"));
    f.push(format!("shape={}", shape(word)));
    for n in 1..=3.min(chars.len()) {
        f.push(format!("p{n}={}", chars[..n].iter().collect::<String>()));
        f.push(format!("s{n}={}", chars[chars.len() - n..].iter().collect::<String>()));
    }
    f.push(format!("w-1={}", context(-1)));
    f.push(format!("w-2={}", context(-2)));
    f.push(format!("w+1={}", context(1)));
    f.push(format!("w+2={}", context(2)));
    let position = if i == 0 {
        "first"
    } else if i + 1 == tokens.len() {
        "last"
    } else {
        "interior"
    };
    f.push(format!("pos={position}"));
    f.push(format!("sent={}", sentence_index.min(3)));
    if swap_at == Some(i) {
        f.push("swap-point".to_string());
    }
    if let Some(p) = prev {
        f.push(format!("prev={p}"));
        f.push(format!("prev={p}+w={lower}"));
    }
    f
}

// Character classes with runs collapsed: "McDonald's" -> "XxXx'x".
fn shape(word: &str) -> String {
    let mut out = String::new();
    let mut last = None;
    for c in word.chars() {
        let class = if c.is_uppercase() {
            'X'
        } else if c.is_lowercase() {
            'x'
        } else if c.is_ascii_digit() {
            'd'
        } else {
            c
        };
        if last != Some(class) {
            out.push(class);
            last = Some(class);
        }
    }
    out
}

fn sentence_indices(tokens: &[Token]) -> Vec<usize> {
    let mut idx = Vec::with_capacity(tokens.len());
    let mut current = 0;
    for t in tokens {
        idx.push(current);
        if t.is_sentence_final() {
            current += 1;
        }
    }
    idx
}

#[derive(Clone, Copy, Debug, Default)]
struct Accumulator {
    weight: f64,
    total: f64,
    stamp: u64,
}

/// Trained weights with their label index and training metadata.
#[derive(Clone, Debug, PartialEq)]
pub struct PerceptronModel {
    kind: ModelKind,
    labels: TagLabelIndex,
    weights: HashMap<String, Vec<(usize, f64)>>,
    mode: DecodeMode,
    epochs: usize,
    seed: u64,
    vocab_id: String,
}

impl PerceptronModel {
    /// A model with no weights; every position gets label 0.
    pub fn untrained(labels: TagLabelIndex, vocab_id: impl Into<String>) -> PerceptronModel {
        PerceptronModel {
            kind: ModelKind::Perceptron,
            labels,
            weights: HashMap::new(),
            mode: DecodeMode::Autoregressive,
            epochs: 0,
            seed: 0,
            vocab_id: vocab_id.into(),
        }
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn labels(&self) -> &TagLabelIndex {
        &self.labels
    }

    pub fn mode(&self) -> DecodeMode {
        self.mode
    }

    pub fn vocab_id(&self) -> &str {
        &self.vocab_id
    }

    pub fn weight_count(&self) -> usize {
        self.weights.values().map(Vec::len).sum()
    }

    fn scores(&self, feats: &[String]) -> Vec<f64> {
        let mut scores = vec![0.0; self.labels.len()];
        for f in feats {
            if let Some(ws) = self.weights.get(f) {
                for &(label, w) in ws {
                    scores[label] += w;
                }
            }
        }
        scores
    }

    /// Tags a source with the model's own decoding mode.
    pub fn predict(&self, source: &TokenSequence) -> TagSequence {
        self.predict_tags(source, self.mode)
    }

    /// Greedy left-to-right decoding. SWAP is only allowed on the token that
    /// closes the first of two sentences.
    pub fn predict_tags(&self, source: &TokenSequence, mode: DecodeMode) -> TagSequence {
        let ids = self.predict_ids(source, mode);
        TagSequence::new(
            ids.into_iter()
                .map(|id| self.labels.label(id).cloned().expect("predicted id is in the index"))
                .collect(),
        )
    }

    pub fn predict_ids(&self, source: &TokenSequence, mode: DecodeMode) -> Vec<usize> {
        let tokens = source.tokens();
        let swap_at = text::swap_point(source);
        let sentences = sentence_indices(tokens);
        let swap_id = self.labels.swap_id();
        let mut out = Vec::with_capacity(tokens.len());
        // usize::MAX stands for the sequence start.
        let mut prev = None;
        for i in 0..tokens.len() {
            let ctx_prev = match mode {
                DecodeMode::Autoregressive => Some(prev.unwrap_or(usize::MAX)),
                DecodeMode::Feedforward => None,
            };
            let feats = features(tokens, i, ctx_prev, sentences[i], swap_at);
            let scores = self.scores(&feats);
            let best = argmax(&scores, |id| Some(id) != swap_id || swap_at == Some(i));
            out.push(best);
            prev = Some(best);
        }
        out
    }

    /// Serializes to the versioned text format. Weight triples are sorted by
    /// feature, then label, so equal models give equal bytes.
    pub fn to_file_string(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{HEADER}").unwrap();
        writeln!(out, "kind {}", self.kind.as_str()).unwrap();
        writeln!(out, "mode {}", self.mode.as_str()).unwrap();
        writeln!(out, "vocab {}", self.vocab_id).unwrap();
        writeln!(out, "epochs {}", self.epochs).unwrap();
        writeln!(out, "seed {}", self.seed).unwrap();
        writeln!(out, "labels {}", self.labels.len()).unwrap();
        for l in self.labels.labels() {
            writeln!(out, "{l}").unwrap();
        }
        let sorted: BTreeMap<&String, &Vec<(usize, f64)>> = self.weights.iter().collect();
        writeln!(out, "weights {}", self.weight_count()).unwrap();
        for (feature, ws) in sorted {
            let mut ws = ws.clone();
            ws.sort_by_key(|&(l, _)| l);
            for (label, w) in ws {
                writeln!(out, "{feature}\t{label}\t{w}").unwrap();
            }
        }
        out
    }

    pub fn parse(content: &str, path: &Path) -> Result<PerceptronModel> {
        let mut lines = content.lines().enumerate().map(|(i, l)| (i + 1, l));
        let mut next = |what: &str| {
            lines
                .next()
                .ok_or_else(|| Error::parse(path, 0, format!("unexpected end of file, expected {what}")))
        };
        let (n, header) = next("header")?;
        if header != HEADER {
            return Err(Error::parse(path, n, format!("expected header `{HEADER}`, got {header:?}")));
        }
        let field = |(n, line): (usize, &str), key: &str| -> Result<String> {
            line.strip_prefix(key)
                .and_then(|r| r.strip_prefix(' ').or(if r.is_empty() { Some("") } else { None }))
                .map(str::to_string)
                .ok_or_else(|| Error::parse(path, n, format!("expected `{key} …`, got {line:?}")))
        };
        let bad = |n: usize, msg: String| Error::parse(path, n, msg);

        let kind_line = next("kind")?;
        let kind = match field(kind_line, "kind")?.as_str() {
            "perceptron" => ModelKind::Perceptron,
            "majority" => ModelKind::Majority,
            other => return Err(bad(kind_line.0, format!("unknown model kind {other:?}"))),
        };
        let mode_line = next("mode")?;
        let mode: DecodeMode = field(mode_line, "mode")?.parse().map_err(|e| bad(mode_line.0, e))?;
        let vocab_id = field(next("vocab")?, "vocab")?;
        let epochs_line = next("epochs")?;
        let epochs = field(epochs_line, "epochs")?
            .parse()
            .map_err(|e| bad(epochs_line.0, format!("{e}")))?;
        let seed_line = next("seed")?;
        let seed = field(seed_line, "seed")?.parse().map_err(|e| bad(seed_line.0, format!("{e}")))?;
        let labels_line = next("labels")?;
        let label_count: usize = field(labels_line, "labels")?
            .parse()
            .map_err(|e| bad(labels_line.0, format!("{e}")))?;
        let mut labels = Vec::with_capacity(label_count);
        for _ in 0..label_count {
            let (n, line) = next("label")?;
            labels.push(line.parse::<EditTag>().map_err(|e| bad(n, e))?);
        }
        let labels = TagLabelIndex::from_labels(labels).map_err(|e| bad(labels_line.0, e))?;
        let weights_line = next("weights")?;
        let weight_count: usize = field(weights_line, "weights")?
            .parse()
            .map_err(|e| bad(weights_line.0, format!("{e}")))?;
        let mut weights: HashMap<String, Vec<(usize, f64)>> = HashMap::new();
        for _ in 0..weight_count {
            let (n, line) = next("weight triple")?;
            let mut parts = line.split('\t');
            let (Some(feature), Some(label), Some(w), None) = (parts.next(), parts.next(), parts.next(), parts.next()) else {
                return Err(bad(n, format!("malformed weight line {line:?}")));
            };
            let label: usize = label.parse().map_err(|e| bad(n, format!("{e}")))?;
            if label >= labels.len() {
                return Err(bad(n, format!("label id {label} out of range")));
            }
            let w: f64 = w.parse().map_err(|e| bad(n, format!("{e}")))?;
            weights.entry(feature.to_string()).or_default().push((label, w));
        }
        if let Some((n, _)) = lines.next() {
            return Err(bad(n, "trailing content after weights".into()));
        }
        Ok(PerceptronModel {
            kind,
            labels,
            weights,
            mode,
            epochs,
            seed,
            vocab_id,
        })
    }

    pub fn load(path: &Path) -> Result<PerceptronModel> {
        let content = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        PerceptronModel::parse(&content, path)
    }
}

impl fmt::Display for PerceptronModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} model, {} labels, {} weights, mode {}",
            self.kind.as_str(),
            self.labels.len(),
            self.weight_count(),
            self.mode.as_str()
        )
    }
}

fn argmax(scores: &[f64], allowed: impl Fn(usize) -> bool) -> usize {
    let mut best = None;
    for (id, &s) in scores.iter().enumerate() {
        if !allowed(id) {
            continue;
        }
        if best.is_none_or(|(_, b)| s > b) {
            best = Some((id, s));
        }
    }
    best.map(|(id, _)| id).unwrap_or(0)
}

fn check_examples(examples: &[(TokenSequence, TagSequence)], labels: &TagLabelIndex) -> Result<Vec<Vec<usize>>> {
    if examples.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    examples
        .iter()
        .map(|(source, tags)| {
            if !tags.convertible || tags.tags.len() != source.len() {
                return Err(Error::LengthMismatch {
                    what: "training tag sequence",
                    expected: source.len(),
                    found: tags.tags.len(),
                });
            }
            tags.tags
                .iter()
                .map(|t| labels.id(t).ok_or_else(|| Error::Config(format!("tag {t} is not in the label index"))))
                .collect()
        })
        .collect()
}

/// Trains an averaged perceptron.
///
/// Each epoch visits the examples in an order shuffled by a generator seeded
/// from `config.seed` and the epoch number. In autoregressive mode the
/// previous-label feature uses the model's own prediction, as at decoding
/// time. Weights are averaged over every update step.
pub fn train(
    examples: &[(TokenSequence, TagSequence)],
    labels: &TagLabelIndex,
    vocab_id: &str,
    config: &TrainConfig,
) -> Result<PerceptronModel> {
    let gold = check_examples(examples, labels)?;
    let swap_id = labels.swap_id();
    let mut acc: HashMap<String, HashMap<usize, Accumulator>> = HashMap::new();
    let mut step: u64 = 0;
    let mut order: Vec<usize> = (0..examples.len()).collect();

    let score = |acc: &HashMap<String, HashMap<usize, Accumulator>>, feats: &[String]| {
        let mut scores = vec![0.0; labels.len()];
        for f in feats {
            if let Some(ws) = acc.get(f) {
                for (&l, a) in ws {
                    scores[l] += a.weight;
                }
            }
        }
        scores
    };

    for epoch in 0..config.epochs {
        if config.shuffle {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(epoch as u64));
            order.shuffle(&mut rng);
        }
        for &e in &order {
            let tokens = examples[e].0.tokens();
            let swap_at = text::swap_point(&examples[e].0);
            let sentences = sentence_indices(tokens);
            let mut prev: Option<usize> = None;
            for i in 0..tokens.len() {
                let ctx_prev = match config.mode {
                    DecodeMode::Autoregressive => Some(prev.unwrap_or(usize::MAX)),
                    DecodeMode::Feedforward => None,
                };
                let feats = features(tokens, i, ctx_prev, sentences[i], swap_at);
                let scores = score(&acc, &feats);
                let guess = argmax(&scores, |id| Some(id) != swap_id || swap_at == Some(i));
                let truth = gold[e][i];
                step += 1;
                if guess != truth {
                    for f in &feats {
                        let ws = acc.entry(f.clone()).or_default();
                        for (label, delta) in [(truth, 1.0), (guess, -1.0)] {
                            let a = ws.entry(label).or_default();
                            a.total += (step - a.stamp) as f64 * a.weight;
                            a.stamp = step;
                            a.weight += delta;
                        }
                    }
                }
                prev = Some(guess);
            }
        }
    }

    let mut weights: HashMap<String, Vec<(usize, f64)>> = HashMap::new();
    if step > 0 {
        for (f, ws) in acc {
            let mut averaged: Vec<(usize, f64)> = ws
                .into_iter()
                .map(|(l, a)| (l, (a.total + (step - a.stamp) as f64 * a.weight) / step as f64))
                .filter(|&(_, w)| w != 0.0)
                .collect();
            averaged.sort_by_key(|&(l, _)| l);
            if !averaged.is_empty() {
                weights.insert(f, averaged);
            }
        }
    }

    Ok(PerceptronModel {
        kind: ModelKind::Perceptron,
        labels: labels.clone(),
        weights,
        mode: config.mode,
        epochs: config.epochs,
        seed: config.seed,
        vocab_id: vocab_id.to_string(),
    })
}

/// Most frequent training label per token string, falling back to the most
/// frequent label overall. Ties go to the lower label id.
pub fn majority_baseline(
    examples: &[(TokenSequence, TagSequence)],
    labels: &TagLabelIndex,
    vocab_id: &str,
) -> Result<PerceptronModel> {
    let gold = check_examples(examples, labels)?;
    let mut per_token: HashMap<&str, BTreeMap<usize, usize>> = HashMap::new();
    let mut global: BTreeMap<usize, usize> = BTreeMap::new();
    for ((source, _), ids) in examples.iter().zip(&gold) {
        for (token, &id) in source.iter().zip(ids) {
            *per_token.entry(token.surface()).or_default().entry(id).or_insert(0) += 1;
            *global.entry(id).or_insert(0) += 1;
        }
    }
    let most_frequent = |counts: &BTreeMap<usize, usize>| {
        counts
            .iter()
            .max_by_key(|&(&id, &c)| (c, std::cmp::Reverse(id)))
            .map(|(&id, _)| id)
            .expect("non-empty counts")
    };

    // Token evidence (1.0) always outweighs the global fallback (0.5).
    let mut weights: HashMap<String, Vec<(usize, f64)>> = HashMap::new();
    weights.insert("bias".to_string(), vec![(most_frequent(&global), 0.5)]);
    for (token, counts) in per_token {
        weights.insert(format!("tok={token}"), vec![(most_frequent(&counts), 1.0)]);
    }
    Ok(PerceptronModel {
        kind: ModelKind::Majority,
        labels: labels.clone(),
        weights,
        mode: DecodeMode::Feedforward,
        epochs: 0,
        seed: 0,
        vocab_id: vocab_id.to_string(),
    })
}

/// Fraction of tokens whose predicted label equals the gold label.
pub fn token_accuracy(model: &PerceptronModel, examples: &[(TokenSequence, TagSequence)], mode: DecodeMode) -> f64 {
    let mut correct = 0usize;
    let mut total = 0usize;
    for (source, gold) in examples {
        let predicted = model.predict_tags(source, mode);
        correct += predicted.tags.iter().zip(&gold.tags).filter(|(p, g)| p == g).count();
        total += gold.tags.len();
    }
    if total == 0 {
        0.0
    } else {
        correct as f64 / total as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tags::{convert_with_swap, label_index};
    use crate::text::tokenize;
    use crate::vocab::PhraseVocabulary;

    fn p(s: &str) -> Vec<String> {
        s.split(' ').map(str::to_string).collect()
    }

    fn toy() -> (PhraseVocabulary, Vec<(TokenSequence, TagSequence)>) {
        let vocab = PhraseVocabulary::new([p(","), p("and")]);
        let pairs = [
            ("Dylan won Nobel prize . Dylan is an American musician .", "Dylan , an American musician , won Nobel prize ."),
            ("Turing was born in 1912 . Turing died in 1954 .", "Turing was born in 1912 and died in 1954 ."),
            ("Maria sings . Maria dances .", "Maria sings and dances ."),
        ];
        let examples = pairs
            .iter()
            .map(|(s, t)| {
                let (s, t) = (tokenize(s), tokenize(t));
                let tags = convert_with_swap(&s, &t, &vocab);
                assert!(tags.convertible);
                (s, tags)
            })
            .collect();
        (vocab, examples)
    }

    #[test]
    fn untrained_model_predicts_first_label() {
        let (vocab, _) = toy();
        let model = PerceptronModel::untrained(label_index(&vocab, true), "v");
        let tags = model.predict(&tokenize("a b . c d ."));
        assert_eq!(tags.tags, vec![EditTag::KEEP; 6]);
    }

    #[test]
    fn memorizes_a_single_example() {
        let (vocab, examples) = toy();
        let labels = label_index(&vocab, true);
        let one = vec![examples[0].clone()];
        let model = train(&one, &labels, "v", &TrainConfig { epochs: 10, ..Default::default() }).unwrap();
        assert_eq!(model.predict(&one[0].0), one[0].1);
    }

    #[test]
    fn training_is_deterministic() {
        let (vocab, examples) = toy();
        let labels = label_index(&vocab, true);
        let config = TrainConfig::default();
        let a = train(&examples, &labels, "v", &config).unwrap();
        let b = train(&examples, &labels, "v", &config).unwrap();
        assert_eq!(a.to_file_string(), b.to_file_string());
    }

    #[test]
    fn training_errors() {
        let (vocab, examples) = toy();
        let labels = label_index(&vocab, true);
        assert!(matches!(train(&[], &labels, "v", &TrainConfig::default()), Err(Error::EmptyTrainingSet)));
        let bad = vec![(examples[0].0.clone(), TagSequence::new(vec![EditTag::KEEP]))];
        assert!(matches!(
            train(&bad, &labels, "v", &TrainConfig::default()),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(matches!(majority_baseline(&[], &labels, "v"), Err(Error::EmptyTrainingSet)));
    }

    #[test]
    fn persistence_round_trip() {
        let (vocab, examples) = toy();
        let labels = label_index(&vocab, true);
        let model = train(&examples, &labels, "abc", &TrainConfig::default()).unwrap();
        let text = model.to_file_string();
        assert!(text.starts_with("editkit-model v1\nkind perceptron\nmode ar\nvocab abc\n"));
        let loaded = PerceptronModel::parse(&text, Path::new("m")).unwrap();
        assert_eq!(loaded.to_file_string(), text);
        for (source, _) in &examples {
            assert_eq!(loaded.predict(source), model.predict(source));
        }
    }

    #[test]
    fn parse_rejects_garbage() {
        let path = Path::new("m");
        assert!(PerceptronModel::parse("", path).is_err());
        assert!(PerceptronModel::parse("editkit-model v2\n", path).is_err());
        let (vocab, examples) = toy();
        let model = train(&examples, &label_index(&vocab, false), "v", &TrainConfig::default());
        // SWAP labels are needed for the swap example.
        assert!(model.is_err());
        let model = majority_baseline(&examples, &label_index(&vocab, true), "v").unwrap();
        let text = model.to_file_string().replace("weights ", "weights 9");
        assert!(PerceptronModel::parse(&text, path).is_err());
    }

    #[test]
    fn swap_is_masked_off_swap_points() {
        let (vocab, examples) = toy();
        let labels = label_index(&vocab, true);
        let swap = labels.swap_id().unwrap();
        let mut model = PerceptronModel::untrained(labels, "v");
        model.weights.insert("bias".into(), vec![(swap, 5.0)]);
        let one_sentence = tokenize("Maria sings loudly .");
        assert!(model.predict(&one_sentence).tags.iter().all(|t| *t != EditTag::SWAP));
        let two = &examples[0].0;
        let tags = model.predict(two);
        assert_eq!(tags.swap_count(), 1);
        assert_eq!(tags.tags[4], EditTag::SWAP);
        assert_eq!(tags.len(), two.len());
    }

    #[test]
    fn majority_baseline_predictions() {
        let identity: Vec<(TokenSequence, TagSequence)> = ["a b c .", "b c d ."]
            .iter()
            .map(|s| {
                let s = tokenize(s);
                let n = s.len();
                (s, TagSequence::new(vec![EditTag::KEEP; n]))
            })
            .collect();
        let labels = label_index(&PhraseVocabulary::empty(), false);
        let model = majority_baseline(&identity, &labels, "v").unwrap();
        assert_eq!(model.predict(&tokenize("a d x")).tags, vec![EditTag::KEEP; 3]);

        let (vocab, examples) = toy();
        let labels = label_index(&vocab, true);
        let model = majority_baseline(&examples, &labels, "v").unwrap();
        // Unseen tokens fall back to the global majority, KEEP.
        assert_eq!(model.predict(&tokenize("zzz")).tags, [EditTag::KEEP]);
        let reloaded = PerceptronModel::parse(&model.to_file_string(), Path::new("m")).unwrap();
        assert_eq!(reloaded, model);
    }

    #[test]
    fn feature_set() {
        let tokens = tokenize("Dylan won . He sang").into_tokens();
        let f = features(&tokens, 2, Some(1), 0, Some(2));
        for expected in ["bias", "w=.", "tok=.", "shape=.", "w-1=won", "w-2=dylan", "w+1=he", "w+2=sang", "pos=interior", "sent=0", "swap-point", "prev=1"] {
            assert!(f.iter().any(|x| x == expected), "missing {expected}: {f:?}");
        }
        assert!(features(&tokens, 0, None, 0, None).contains(&"w-1=<s>".to_string()));
        assert!(!features(&tokens, 0, None, 0, None).iter().any(|x| x.starts_with("prev")));
        assert_eq!(shape("McDonald's"), "XxXx'x");
        assert_eq!(shape("1954"), "d");
    }
}
