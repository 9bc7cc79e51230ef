//! Evaluation metrics: Exact, SARI, corpus BLEU-4, ROUGE-L and GEC
//! precision/recall/F0.5.
//!
//! Every metric works on tokenized text, so surface spacing differences do
//! not count.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;
use std::str::FromStr;

use rayon::prelude::*;

use crate::align::{lcs_by, lcs_len};
use crate::text::tokenize;

/// One prediction with its source and references.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EvalInstance {
    pub source: String,
    pub prediction: String,
    pub references: Vec<String>,
}

impl EvalInstance {
    pub fn new(source: impl Into<String>, prediction: impl Into<String>, references: Vec<String>) -> EvalInstance {
        assert!(!references.is_empty(), "an instance needs at least one reference");
        EvalInstance {
            source: source.into(),
            prediction: prediction.into(),
            references,
        }
    }
}

struct Tokenized {
    source: Vec<String>,
    prediction: Vec<String>,
    references: Vec<Vec<String>>,
}

fn words(text: &str) -> Vec<String> {
    tokenize(text).surfaces().into_iter().map(str::to_string).collect()
}

fn tokenized(instances: &[EvalInstance]) -> Vec<Tokenized> {
    instances
        .par_iter()
        .map(|inst| Tokenized {
            source: words(&inst.source),
            prediction: words(&inst.prediction),
            references: inst.references.iter().map(|r| words(r)).collect(),
        })
        .collect()
}

/// Percentage of predictions whose tokens equal those of some reference.
pub fn exact_score(instances: &[EvalInstance]) -> f64 {
    if instances.is_empty() {
        return 0.0;
    }
    let hits = tokenized(instances)
        .iter()
        .filter(|t| t.references.contains(&t.prediction))
        .count();
    100.0 * hits as f64 / instances.len() as f64
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SariScore {
    pub sari: f64,
    pub add: f64,
    pub keep: f64,
    pub delete: f64,
}

fn ngram_set(tokens: &[String], n: usize) -> HashSet<&[String]> {
    if tokens.len() < n {
        return HashSet::new();
    }
    tokens.windows(n).collect()
}

// F1 of a predicted operation set against the reference one. Two empty sets
// agree perfectly.
fn operation_f1(predicted: &HashSet<&[String]>, reference: &HashSet<&[String]>) -> f64 {
    if predicted.is_empty() && reference.is_empty() {
        return 1.0;
    }
    let correct = predicted.intersection(reference).count() as f64;
    let p = if predicted.is_empty() { 0.0 } else { correct / predicted.len() as f64 };
    let r = if reference.is_empty() { 0.0 } else { correct / reference.len() as f64 };
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

/// SARI of one instance, components in [0, 1].
///
/// For n = 1..4, the n-gram sets of source, prediction and the union of the
/// references give three operations: added (in output, not in source), kept
/// (in both) and deleted (in source, not in output). Each operation is
/// scored by F1 of prediction against references; deletion uses F1 as well.
/// Scores average over n, then over the three operations.
fn sari_instance(t: &Tokenized) -> (f64, f64, f64) {
    let (mut add, mut keep, mut delete) = (0.0, 0.0, 0.0);
    for n in 1..=4 {
        let source = ngram_set(&t.source, n);
        let prediction = ngram_set(&t.prediction, n);
        let reference: HashSet<&[String]> = t.references.iter().flat_map(|r| ngram_set(r, n)).collect();

        let pred_add = prediction.difference(&source).copied().collect();
        let ref_add = reference.difference(&source).copied().collect();
        let pred_keep = prediction.intersection(&source).copied().collect();
        let ref_keep = reference.intersection(&source).copied().collect();
        let pred_del = source.difference(&prediction).copied().collect();
        let ref_del = source.difference(&reference).copied().collect();

        add += operation_f1(&pred_add, &ref_add);
        keep += operation_f1(&pred_keep, &ref_keep);
        delete += operation_f1(&pred_del, &ref_del);
    }
    (add / 4.0, keep / 4.0, delete / 4.0)
}

/// Corpus SARI: the mean of per-instance scores, ×100.
pub fn sari(instances: &[EvalInstance]) -> SariScore {
    if instances.is_empty() {
        return SariScore {
            sari: 0.0,
            add: 0.0,
            keep: 0.0,
            delete: 0.0,
        };
    }
    let per: Vec<(f64, f64, f64)> = tokenized(instances).par_iter().map(sari_instance).collect();
    let n = per.len() as f64;
    let add = per.iter().map(|s| s.0).sum::<f64>() / n;
    let keep = per.iter().map(|s| s.1).sum::<f64>() / n;
    let delete = per.iter().map(|s| s.2).sum::<f64>() / n;
    SariScore {
        sari: 100.0 * (add + keep + delete) / 3.0,
        add: 100.0 * add,
        keep: 100.0 * keep,
        delete: 100.0 * delete,
    }
}

fn ngram_counts(tokens: &[String], n: usize) -> HashMap<&[String], usize> {
    let mut counts = HashMap::new();
    if tokens.len() >= n {
        for g in tokens.windows(n) {
            *counts.entry(g).or_insert(0) += 1;
        }
    }
    counts
}

#[derive(Clone, Copy, Debug, Default)]
struct BleuStats {
    matches: [usize; 4],
    totals: [usize; 4],
    hyp_len: usize,
    ref_len: usize,
}

fn bleu_stats(t: &Tokenized) -> BleuStats {
    let mut stats = BleuStats {
        hyp_len: t.prediction.len(),
        ..Default::default()
    };
    // Closest reference length, shorter one on ties.
    stats.ref_len = t
        .references
        .iter()
        .map(Vec::len)
        .min_by_key(|&len| (len.abs_diff(t.prediction.len()), len))
        .unwrap_or(0);
    for n in 1..=4 {
        let hyp = ngram_counts(&t.prediction, n);
        let mut max_ref: HashMap<&[String], usize> = HashMap::new();
        for r in &t.references {
            for (g, c) in ngram_counts(r, n) {
                let e = max_ref.entry(g).or_insert(0);
                *e = (*e).max(c);
            }
        }
        stats.matches[n - 1] = hyp
            .iter()
            .map(|(g, &c)| c.min(max_ref.get(g).copied().unwrap_or(0)))
            .sum();
        stats.totals[n - 1] = t.prediction.len().saturating_sub(n - 1);
    }
    stats
}

/// Corpus-level BLEU-4, ×100.
///
/// Clipped n-gram matches and totals are summed over the corpus, the four
/// precisions are combined by geometric mean with uniform weights, and the
/// brevity penalty uses the closest reference length per instance. No
/// smoothing: any zero precision gives 0.
pub fn bleu4(instances: &[EvalInstance]) -> f64 {
    let per: Vec<BleuStats> = tokenized(instances).par_iter().map(bleu_stats).collect();
    let mut total = BleuStats::default();
    for s in &per {
        for n in 0..4 {
            total.matches[n] += s.matches[n];
            total.totals[n] += s.totals[n];
        }
        total.hyp_len += s.hyp_len;
        total.ref_len += s.ref_len;
    }
    if total.hyp_len == 0 || total.matches.contains(&0) {
        return 0.0;
    }
    let log_precision: f64 = (0..4)
        .map(|n| (total.matches[n] as f64 / total.totals[n] as f64).ln())
        .sum::<f64>()
        / 4.0;
    let (c, r) = (total.hyp_len as f64, total.ref_len as f64);
    let brevity = if c > r { 1.0 } else { (1.0 - r / c).exp() };
    100.0 * brevity * log_precision.exp()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RougeL {
    pub recall: f64,
    pub precision: f64,
    pub f: f64,
}

fn rouge_l_instance(t: &Tokenized) -> RougeL {
    let pred: Vec<&str> = t.prediction.iter().map(String::as_str).collect();
    t.references
        .iter()
        .map(|r| {
            let reference: Vec<&str> = r.iter().map(String::as_str).collect();
            let l = lcs_len(&pred, &reference) as f64;
            let recall = if reference.is_empty() { 0.0 } else { l / reference.len() as f64 };
            let precision = if pred.is_empty() { 0.0 } else { l / pred.len() as f64 };
            let f = if recall + precision == 0.0 {
                0.0
            } else {
                2.0 * recall * precision / (recall + precision)
            };
            RougeL { recall, precision, f }
        })
        .fold(None, |best: Option<RougeL>, s| match best {
            Some(b) if (b.f, b.recall) >= (s.f, s.recall) => Some(b),
            _ => Some(s),
        })
        .expect("at least one reference")
}

/// ROUGE-L, ×100. Each instance is scored against the reference with the best
/// F (then recall); the corpus score is the mean over instances. Recall is
/// the headline number.
pub fn rouge_l(instances: &[EvalInstance]) -> RougeL {
    if instances.is_empty() {
        return RougeL {
            recall: 0.0,
            precision: 0.0,
            f: 0.0,
        };
    }
    let per: Vec<RougeL> = tokenized(instances).par_iter().map(rouge_l_instance).collect();
    let n = per.len() as f64;
    RougeL {
        recall: 100.0 * per.iter().map(|s| s.recall).sum::<f64>() / n,
        precision: 100.0 * per.iter().map(|s| s.precision).sum::<f64>() / n,
        f: 100.0 * per.iter().map(|s| s.f).sum::<f64>() / n,
    }
}

/// A replacement of `source[start..end]` by `replacement`. Pure insertions
/// have `start == end`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct EditSpan {
    pub start: usize,
    pub end: usize,
    pub replacement: Vec<String>,
}

/// Edits turning `source` into `output`, read off the gaps of their LCS. A
/// deletion next to an insertion forms a single replacement.
pub fn extract_edits(source: &[String], output: &[String]) -> Vec<EditSpan> {
    let alignment = lcs_by(source, output, |a, b| a == b);
    let mut edits = Vec::new();
    let (mut si, mut oi) = (0, 0);
    let ends = alignment
        .pairs
        .iter()
        .copied()
        .chain([(source.len(), output.len())]);
    for (s, o) in ends {
        if s > si || o > oi {
            edits.push(EditSpan {
                start: si,
                end: s,
                replacement: output[oi..o].to_vec(),
            });
        }
        si = s + 1;
        oi = o + 1;
    }
    edits
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GecScore {
    pub precision: f64,
    pub recall: f64,
    pub f05: f64,
}

/// F-beta with beta = 0.5.
pub fn f05(precision: f64, recall: f64) -> f64 {
    let denom = 0.25 * precision + recall;
    if denom == 0.0 {
        0.0
    } else {
        1.25 * precision * recall / denom
    }
}

fn gec_from_counts(tp: usize, predicted: usize, required: usize) -> GecScore {
    let precision = if predicted == 0 { 1.0 } else { tp as f64 / predicted as f64 };
    let recall = match (required, predicted) {
        (0, 0) => 1.0,
        (0, _) => 0.0,
        _ => tp as f64 / required as f64,
    };
    GecScore {
        precision,
        recall,
        f05: f05(precision, recall),
    }
}

/// Edit-level precision, recall and F0.5 (fractions in [0, 1]).
///
/// Predicted edits count as correct when they match a reference edit exactly
/// in range and replacement. Each instance uses the reference that gives it
/// the best F0.5; counts are then summed over the corpus. With no predicted
/// edits precision is 1; with no required edits recall is 1 if nothing was
/// predicted and 0 otherwise.
pub fn gec_scores(instances: &[EvalInstance]) -> GecScore {
    let per: Vec<(usize, usize, usize)> = tokenized(instances)
        .par_iter()
        .map(|t| {
            let predicted: HashSet<EditSpan> = extract_edits(&t.source, &t.prediction).into_iter().collect();
            let mut best: Option<((usize, usize, usize), f64)> = None;
            for r in &t.references {
                let required: HashSet<EditSpan> = extract_edits(&t.source, r).into_iter().collect();
                let tp = predicted.intersection(&required).count();
                let counts = (tp, predicted.len(), required.len());
                let score = gec_from_counts(tp, predicted.len(), required.len()).f05;
                if best.is_none_or(|(_, s)| score > s) {
                    best = Some((counts, score));
                }
            }
            best.expect("at least one reference").0
        })
        .collect();
    let (tp, predicted, required) = per
        .iter()
        .fold((0, 0, 0), |acc, c| (acc.0 + c.0, acc.1 + c.1, acc.2 + c.2));
    gec_from_counts(tp, predicted, required)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Metric {
    Exact,
    Sari,
    Bleu,
    RougeL,
    Gec,
}

impl Metric {
    pub const ALL: [Metric; 5] = [Metric::Exact, Metric::Sari, Metric::Bleu, Metric::RougeL, Metric::Gec];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Exact => "exact",
            Metric::Sari => "sari",
            Metric::Bleu => "bleu",
            Metric::RougeL => "rouge_l",
            Metric::Gec => "gec",
        }
    }
}

impl FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Metric::ALL
            .into_iter()
            .find(|m| m.name() == s.replace('-', "_"))
            .ok_or_else(|| format!("unknown metric {s:?} (expected one of exact, sari, bleu, rouge_l, gec)"))
    }
}

/// Parses a comma-separated metric list, e.g. `exact,sari`.
pub fn parse_metric_list(s: &str) -> Result<Vec<Metric>, String> {
    let mut out: Vec<Metric> = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let m: Metric = part.parse()?;
        if !out.contains(&m) {
            out.push(m);
        }
    }
    out.sort();
    Ok(out)
}

/// Named scores of one evaluation run, in a fixed order.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricsReport {
    pub corpus_id: String,
    pub instances: usize,
    pub scores: Vec<(String, f64)>,
}

impl MetricsReport {
    pub fn compute(corpus_id: impl Into<String>, instances: &[EvalInstance], metrics: &[Metric]) -> MetricsReport {
        let mut scores = Vec::new();
        let mut selected = metrics.to_vec();
        selected.sort();
        selected.dedup();
        for m in selected {
            match m {
                Metric::Exact => scores.push(("exact".into(), exact_score(instances))),
                Metric::Sari => {
                    let s = sari(instances);
                    scores.push(("sari".into(), s.sari));
                    scores.push(("sari_add".into(), s.add));
                    scores.push(("sari_keep".into(), s.keep));
                    scores.push(("sari_delete".into(), s.delete));
                }
                Metric::Bleu => scores.push(("bleu".into(), bleu4(instances))),
                Metric::RougeL => {
                    let r = rouge_l(instances);
                    scores.push(("rouge_l_recall".into(), r.recall));
                    scores.push(("rouge_l_precision".into(), r.precision));
                    scores.push(("rouge_l_f".into(), r.f));
                }
                Metric::Gec => {
                    let g = gec_scores(instances);
                    scores.push(("gec_precision".into(), g.precision));
                    scores.push(("gec_recall".into(), g.recall));
                    scores.push(("gec_f0.5".into(), g.f05));
                }
            }
        }
        MetricsReport {
            corpus_id: corpus_id.into(),
            instances: instances.len(),
            scores,
        }
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.scores.iter().find(|(n, _)| n == name).map(|(_, v)| *v)
    }

    /// `key = value` lines, values at four decimals.
    pub fn to_key_value(&self) -> String {
        let mut out = String::new();
        writeln!(out, "corpus = {}", self.corpus_id).unwrap();
        writeln!(out, "instances = {}", self.instances).unwrap();
        for (name, value) in &self.scores {
            writeln!(out, "{name} = {value:.4}").unwrap();
        }
        out
    }

    /// One JSON document with the corpus id and every score at four decimals.
    pub fn to_json(&self) -> String {
        let mut out = String::from("{\n");
        writeln!(out, "  \"corpus\": {},", serde_json::Value::from(self.corpus_id.as_str())).unwrap();
        writeln!(out, "  \"instances\": {},", self.instances).unwrap();
        out.push_str("  \"metrics\": {");
        for (i, (name, value)) in self.scores.iter().enumerate() {
            let sep = if i == 0 { "\n" } else { ",\n" };
            write!(out, "{sep}    {}: {value:.4}", serde_json::Value::from(name.as_str())).unwrap();
        }
        if !self.scores.is_empty() {
            out.push('\n');
            out.push_str("  ");
        }
        out.push_str("}\n}\n");
        out
    }
}
