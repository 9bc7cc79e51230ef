//! Command-line pipeline: vocab, convert, train, predict, realize, eval and
//! stats. Each stage reads and writes versioned text files so stages can be
//! rerun and recombined independently.

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use crate::corpus::{self, CorpusOptions, ParallelCorpus, Split, TaskKind};
use crate::error::Error;
use crate::metrics::{parse_metric_list, EvalInstance, Metric, MetricsReport};
use crate::model::{self, DecodeMode, PerceptronModel, TrainConfig};
use crate::realize::RealizationEngine;
use crate::tags::{label_index, ConversionOptions, EditTag, PhrasePlacement, TagSequence};
use crate::text::{detokenize, tokenize, Token, TokenSequence};
use crate::vocab::{self, PhraseVocabulary, DEFAULT_VOCAB_SIZE};

pub const SEED_ENV: &str = "EDITKIT_SEED";
const TAGGED_HEADER: &str = "editkit-tagged v1";
const TAGS_HEADER: &str = "editkit-tags v1";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SelectionMethod {
    #[default]
    Frequency,
    Greedy,
    Exact,
}

impl FromStr for SelectionMethod {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "frequency" => Ok(SelectionMethod::Frequency),
            "greedy" => Ok(SelectionMethod::Greedy),
            "exact" => Ok(SelectionMethod::Exact),
            other => Err(format!("unknown selection method {other:?}")),
        }
    }
}

/// Settings after merging defaults, the config file, the environment and
/// flags, in increasing order of precedence.
#[derive(Clone, Debug, PartialEq)]
pub struct PipelineConfig {
    pub vocab_size: usize,
    pub method: SelectionMethod,
    pub sentinel: bool,
    pub swap: bool,
    pub placement: PhrasePlacement,
    pub epochs: usize,
    pub seed: u64,
    pub mode: DecodeMode,
    pub metrics: Vec<Metric>,
    pub kind: TaskKind,
    pub corpus: Option<PathBuf>,
    pub vocab: Option<PathBuf>,
    pub model: Option<PathBuf>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        let train = TrainConfig::default();
        PipelineConfig {
            vocab_size: DEFAULT_VOCAB_SIZE,
            method: SelectionMethod::Frequency,
            sentinel: false,
            swap: true,
            placement: PhrasePlacement::default(),
            epochs: train.epochs,
            seed: train.seed,
            mode: train.mode,
            metrics: vec![Metric::Exact, Metric::Sari, Metric::Bleu],
            kind: TaskKind::Fusion,
            corpus: None,
            vocab: None,
            model: None,
        }
    }
}

impl PipelineConfig {
    /// Reads flat `key = value` lines. Blank lines and `#` comments are
    /// skipped; unknown keys are errors. Relative paths are taken from the
    /// config file's directory.
    pub fn load(path: &Path) -> crate::Result<PipelineConfig> {
        let content = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new(""));
        let mut config = PipelineConfig::default();
        for (i, line) in content.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::parse(path, i + 1, format!("expected key = value, got {line:?}")));
            };
            config
                .set(key.trim(), value.trim(), base)
                .map_err(|m| Error::parse(path, i + 1, m))?;
        }
        Ok(config)
    }

    fn set(&mut self, key: &str, value: &str, base: &Path) -> Result<(), String> {
        fn num<T: FromStr>(key: &str, v: &str) -> Result<T, String>
        where
            T::Err: std::fmt::Display,
        {
            v.parse().map_err(|e| format!("{key}: {e}"))
        }
        fn flag(key: &str, v: &str) -> Result<bool, String> {
            match v {
                "true" => Ok(true),
                "false" => Ok(false),
                other => Err(format!("{key}: expected true or false, got {other:?}")),
            }
        }
        match key {
            "vocab_size" => self.vocab_size = num(key, value)?,
            "method" => self.method = value.parse()?,
            "sentinel" => self.sentinel = flag(key, value)?,
            "swap" => self.swap = flag(key, value)?,
            "placement" => self.placement = value.parse()?,
            "epochs" => self.epochs = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            "mode" => self.mode = value.parse()?,
            "metrics" => self.metrics = parse_metric_list(value)?,
            "kind" => self.kind = value.parse()?,
            "corpus" => self.corpus = Some(base.join(value)),
            "vocab" => self.vocab = Some(base.join(value)),
            "model" => self.model = Some(base.join(value)),
            other => return Err(format!("unknown config key {other:?}")),
        }
        Ok(())
    }

    fn corpus_options(&self) -> CorpusOptions {
        CorpusOptions {
            conversion: ConversionOptions {
                sentinel: self.sentinel,
                placement: self.placement,
            },
            swap: self.swap,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "editkit", version, about = "Text generation by tagging source tokens with edit operations")]
pub struct Cli {
    /// Flat key = value config file; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Select a phrase vocabulary from a corpus.
    Vocab(VocabArgs),
    /// Convert corpus targets into tag sequences.
    Convert(ConvertArgs),
    /// Train a tagger on a converted corpus.
    Train(TrainArgs),
    /// Predict tags for sources.
    Predict(PredictArgs),
    /// Apply tags to sources and write the output texts.
    Realize(RealizeArgs),
    /// Score predictions against references.
    Eval(EvalArgs),
    /// Coverage curve and conversion statistics.
    Stats(StatsArgs),
}

#[derive(Debug, Args)]
pub struct CorpusArgs {
    /// Corpus TSV: source, target, optional split, extra references.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// fusion, split, summarization, gec or generic.
    #[arg(long)]
    pub kind: Option<TaskKind>,
}

#[derive(Debug, Args)]
pub struct ConversionFlags {
    /// Append an end sentinel so phrases can follow the last token.
    #[arg(long, overrides_with = "no_sentinel")]
    pub sentinel: bool,
    #[arg(long, overrides_with = "sentinel")]
    pub no_sentinel: bool,
    /// Allow SWAP on fusion corpora.
    #[arg(long, overrides_with = "no_swap")]
    pub swap: bool,
    #[arg(long, overrides_with = "swap")]
    pub no_swap: bool,
    /// first-deletion or matched-token.
    #[arg(long)]
    pub placement: Option<PhrasePlacement>,
}

#[derive(Debug, Args)]
pub struct VocabArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    #[command(flatten)]
    pub conversion: ConversionFlags,
    #[arg(long)]
    pub vocab_size: Option<usize>,
    /// frequency, greedy or exact.
    #[arg(long)]
    pub method: Option<SelectionMethod>,
    /// Corpus split to learn from; `all` uses every example.
    #[arg(long, default_value = "train")]
    pub split: String,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ConvertArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    #[command(flatten)]
    pub conversion: ConversionFlags,
    #[arg(long)]
    pub vocab: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    /// Also write conversion statistics here.
    #[arg(long)]
    pub stats: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Output of `convert`.
    #[arg(long)]
    pub tagged: PathBuf,
    #[arg(long)]
    pub vocab: Option<PathBuf>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// ar or ff.
    #[arg(long)]
    pub mode: Option<DecodeMode>,
    /// Fit the per-token majority baseline instead of the perceptron.
    #[arg(long)]
    pub majority: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SourceArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    /// Split of `--corpus` to read; `all` reads every example.
    #[arg(long, default_value = "test")]
    pub split: String,
    /// Plain file with one source per line, instead of `--corpus`.
    #[arg(long, conflicts_with = "corpus")]
    pub sources: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[command(flatten)]
    pub input: SourceArgs,
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Vocabulary the model must have been trained with.
    #[arg(long)]
    pub vocab: Option<PathBuf>,
    #[arg(long)]
    pub mode: Option<DecodeMode>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct RealizeArgs {
    #[command(flatten)]
    pub input: SourceArgs,
    /// Output of `predict`.
    #[arg(long, required_unless_present = "tagged")]
    pub tags: Option<PathBuf>,
    /// Realize the gold tags of a `convert` output instead (convertible
    /// records of `--split` only).
    #[arg(long, conflicts_with = "tags")]
    pub tagged: Option<PathBuf>,
    /// Vocabulary of the `--tagged` file.
    #[arg(long)]
    pub vocab: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// One prediction per line.
    #[arg(long)]
    pub predictions: PathBuf,
    #[command(flatten)]
    pub corpus: CorpusArgs,
    #[arg(long, default_value = "test")]
    pub split: String,
    /// One tab-separated reference list per line, instead of `--corpus`.
    #[arg(long, requires = "sources", conflicts_with = "corpus")]
    pub references: Option<PathBuf>,
    #[arg(long)]
    pub sources: Option<PathBuf>,
    /// Comma-separated: exact, sari, bleu, rouge_l, gec.
    #[arg(long)]
    pub metrics: Option<String>,
    /// Key-value report; the JSON report goes next to it.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    #[command(flatten)]
    pub conversion: ConversionFlags,
    /// Comma-separated vocabulary sizes.
    #[arg(long, default_value = "0,1,2,3,5,10,20,50,100,500")]
    pub budgets: String,
    /// Also report conversion statistics for this vocabulary.
    #[arg(long)]
    pub vocab: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

/// Merges config file, `EDITKIT_SEED` and defaults. Flags are applied by
/// each command.
pub fn base_config(config: Option<&Path>, env_seed: Option<&str>) -> anyhow::Result<PipelineConfig> {
    let mut c = match config {
        Some(path) => PipelineConfig::load(path)?,
        None => PipelineConfig::default(),
    };
    if let Some(seed) = env_seed {
        c.seed = seed
            .trim()
            .parse()
            .with_context(|| format!("{SEED_ENV} must be an unsigned integer, got {seed:?}"))?;
    }
    Ok(c)
}

impl ConversionFlags {
    fn apply(&self, c: &mut PipelineConfig) {
        if self.sentinel {
            c.sentinel = true;
        }
        if self.no_sentinel {
            c.sentinel = false;
        }
        if self.swap {
            c.swap = true;
        }
        if self.no_swap {
            c.swap = false;
        }
        if let Some(p) = self.placement {
            c.placement = p;
        }
    }
}

impl CorpusArgs {
    fn load(&self, c: &PipelineConfig) -> anyhow::Result<ParallelCorpus> {
        let path = self
            .corpus
            .as_ref()
            .or(c.corpus.as_ref())
            .context("no corpus given (use --corpus or the `corpus` config key)")?;
        Ok(corpus::read_tsv(path, self.kind.unwrap_or(c.kind))?)
    }
}

fn select_split(corpus: &ParallelCorpus, split: &str) -> anyhow::Result<ParallelCorpus> {
    if split == "all" {
        return Ok(corpus.clone());
    }
    let split: Split = split.parse().map_err(anyhow::Error::msg)?;
    Ok(corpus.split(split))
}

fn required<'a>(flag: Option<&'a PathBuf>, config: Option<&'a PathBuf>, what: &str) -> anyhow::Result<&'a PathBuf> {
    flag.or(config)
        .with_context(|| format!("no {what} given (use --{what} or the `{what}` config key)"))
}

/// Writes through a temporary file in the same directory, then renames.
pub fn write_atomic(path: &Path, content: &str) -> anyhow::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(content.as_bytes()).map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

fn read_to_string(path: &Path) -> anyhow::Result<String> {
    Ok(std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
}

pub fn run(cli: Cli) -> anyhow::Result<()> {
    let env_seed = std::env::var(SEED_ENV).ok();
    let mut config = base_config(cli.config.as_deref(), env_seed.as_deref())?;
    match cli.command {
        Command::Vocab(args) => cmd_vocab(&args, &mut config),
        Command::Convert(args) => cmd_convert(&args, &mut config),
        Command::Train(args) => cmd_train(&args, &mut config),
        Command::Predict(args) => cmd_predict(&args, &mut config),
        Command::Realize(args) => cmd_realize(&args, &config),
        Command::Eval(args) => cmd_eval(&args, &mut config),
        Command::Stats(args) => cmd_stats(&args, &mut config),
    }
}

fn cmd_vocab(args: &VocabArgs, c: &mut PipelineConfig) -> anyhow::Result<()> {
    args.conversion.apply(c);
    if let Some(n) = args.vocab_size {
        c.vocab_size = n;
    }
    if let Some(m) = args.method {
        c.method = m;
    }
    let corpus = args.corpus.load(c)?;
    let part = select_split(&corpus, &args.split)?;
    let sets = corpus::phrase_sets(&part, &c.corpus_options());
    let vocab = match c.method {
        SelectionMethod::Frequency => vocab::select_frequency(&sets, c.vocab_size),
        SelectionMethod::Greedy => vocab::select_greedy(&sets, c.vocab_size),
        SelectionMethod::Exact => vocab::select_exact(&sets, c.vocab_size)?,
    }
    .with_corpus_id(corpus.id.clone());
    let pool = vocab::rank_by_frequency(&sets).len();
    if pool < c.vocab_size {
        eprintln!(
            "warning: requested {} phrases but the corpus only needs {pool}; vocabulary has {}",
            c.vocab_size,
            vocab.len()
        );
    }
    let report = vocab::coverage(&vocab, &sets);
    eprintln!(
        "vocab: {} phrases, coverage {:.4} ({}/{})",
        vocab.len(),
        report.coverage,
        report.covered_examples,
        report.total_examples
    );
    write_atomic(&args.out, &vocab.to_file_string())
}

fn tagged_header(vocab: &PhraseVocabulary, c: &PipelineConfig) -> String {
    format!(
        "{TAGGED_HEADER} vocab={} swap={} sentinel={}",
        vocab.fingerprint(),
        c.swap,
        c.sentinel
    )
}

fn cmd_convert(args: &ConvertArgs, c: &mut PipelineConfig) -> anyhow::Result<()> {
    args.conversion.apply(c);
    let corpus = args.corpus.load(c)?;
    let vocab = PhraseVocabulary::load(required(args.vocab.as_ref(), c.vocab.as_ref(), "vocab")?)?;
    let swap = c.swap && corpus.kind == TaskKind::Fusion;
    let labels = label_index(&vocab, swap);
    let (tagged, stats) = corpus::convert_corpus(&corpus, &vocab, &c.corpus_options());

    let mut out = tagged_header(&vocab, c);
    out.push('\n');
    for t in &tagged {
        let ids = if t.tags.convertible {
            labels
                .encode(&t.tags)?
                .iter()
                .map(usize::to_string)
                .collect::<Vec<_>>()
                .join(" ")
        } else {
            "-".to_string()
        };
        out.push_str(&format!(
            "{}\t{}\t{}\t{ids}\n",
            t.split,
            t.source.surfaces().join(" "),
            t.target.surfaces().join(" ")
        ));
    }
    eprintln!("convert: {stats}");
    write_atomic(&args.out, &out)?;
    if let Some(path) = &args.stats {
        write_atomic(
            path,
            &format!(
                "total = {}\nconvertible = {}\nfiltered = {}\nconvertible_fraction = {:.4}\n",
                stats.total,
                stats.convertible,
                stats.filtered,
                stats.convertible_fraction()
            ),
        )?;
    }
    Ok(())
}

/// A record of a `convert` output file.
#[derive(Clone, Debug, PartialEq)]
pub struct TaggedRecord {
    pub split: Split,
    pub source: TokenSequence,
    pub target: TokenSequence,
    pub tags: TagSequence,
}

fn space_tokens(s: &str, path: &Path, line: usize) -> crate::Result<TokenSequence> {
    s.split(' ')
        .map(|w| Token::new(w).ok_or_else(|| Error::parse(path, line, format!("invalid token {w:?}"))))
        .collect()
}

/// Reads a `convert` output, checking it was produced with `vocab`.
pub fn read_tagged(path: &Path, vocab: &PhraseVocabulary) -> anyhow::Result<Vec<TaggedRecord>> {
    let content = read_to_string(path)?;
    let mut lines = content.lines().enumerate();
    let Some((_, header)) = lines.next() else {
        return Err(Error::EmptyFile(path.to_path_buf()).into());
    };
    let rest = header
        .strip_prefix(TAGGED_HEADER)
        .ok_or_else(|| Error::parse(path, 1, format!("expected header `{TAGGED_HEADER} …`")))?;
    let mut fingerprint = None;
    let mut swap = None;
    for field in rest.split_whitespace() {
        match field.split_once('=') {
            Some(("vocab", v)) => fingerprint = Some(v),
            Some(("swap", v)) => swap = Some(v == "true"),
            Some(("sentinel", _)) => {}
            _ => return Err(Error::parse(path, 1, format!("bad header field {field:?}")).into()),
        }
    }
    let (Some(fingerprint), Some(swap)) = (fingerprint, swap) else {
        return Err(Error::parse(path, 1, "header lacks vocab= or swap=").into());
    };
    if fingerprint != vocab.fingerprint() {
        return Err(Error::VersionMismatch(format!(
            "{} was converted with vocabulary {fingerprint}, given vocabulary is {}",
            path.display(),
            vocab.fingerprint()
        ))
        .into());
    }
    let labels = label_index(vocab, swap);
    let mut records = Vec::new();
    for (i, line) in lines {
        let n = i + 1;
        let fields: Vec<&str> = line.split('\t').collect();
        let [split, source, target, ids] = fields[..] else {
            return Err(Error::parse(path, n, "expected 4 tab-separated fields").into());
        };
        let split: Split = split.parse().map_err(|e: String| Error::parse(path, n, e))?;
        let source = space_tokens(source, path, n)?;
        let target = space_tokens(target, path, n)?;
        let tags = if ids == "-" {
            TagSequence::non_convertible()
        } else {
            let ids: Vec<usize> = ids
                .split(' ')
                .map(|x| x.parse().map_err(|e| Error::parse(path, n, format!("label id: {e}"))))
                .collect::<crate::Result<_>>()?;
            labels.decode(&ids, source.len())?
        };
        records.push(TaggedRecord {
            split,
            source,
            target,
            tags,
        });
    }
    Ok(records)
}

fn cmd_train(args: &TrainArgs, c: &mut PipelineConfig) -> anyhow::Result<()> {
    if let Some(e) = args.epochs {
        c.epochs = e;
    }
    if let Some(s) = args.seed {
        c.seed = s;
    }
    if let Some(m) = args.mode {
        c.mode = m;
    }
    let vocab = PhraseVocabulary::load(required(args.vocab.as_ref(), c.vocab.as_ref(), "vocab")?)?;
    let records = read_tagged(&args.tagged, &vocab)?;
    let swap = read_to_string(&args.tagged)?
        .lines()
        .next()
        .is_some_and(|h| h.split_whitespace().any(|f| f == "swap=true"));
    let labels = label_index(&vocab, swap);
    // End phrases are not predicted; training uses the per-token tags only.
    let examples: Vec<(TokenSequence, TagSequence)> = records
        .into_iter()
        .filter(|r| r.split == Split::Train && r.tags.convertible)
        .map(|r| (r.source, TagSequence::new(r.tags.tags)))
        .collect();
    let model = if args.majority {
        model::majority_baseline(&examples, &labels, &vocab.fingerprint())?
    } else {
        let config = TrainConfig {
            epochs: c.epochs,
            seed: c.seed,
            shuffle: true,
            mode: c.mode,
        };
        model::train(&examples, &labels, &vocab.fingerprint(), &config)?
    };
    eprintln!("train: {} examples, {model}", examples.len());
    write_atomic(&args.out, &model.to_file_string())
}

impl SourceArgs {
    fn load(&self, c: &PipelineConfig) -> anyhow::Result<Vec<TokenSequence>> {
        if let Some(path) = &self.sources {
            let content = read_to_string(path)?;
            if content.trim().is_empty() {
                return Err(Error::EmptyFile(path.clone()).into());
            }
            return content
                .lines()
                .enumerate()
                .map(|(i, l)| {
                    let seq = tokenize(l);
                    if seq.is_empty() {
                        Err(Error::parse(path, i + 1, "empty source").into())
                    } else {
                        Ok(seq)
                    }
                })
                .collect();
        }
        let corpus = select_split(&self.corpus.load(c)?, &self.split)?;
        Ok(corpus.examples.iter().map(|e| e.source_tokens()).collect())
    }
}

fn cmd_predict(args: &PredictArgs, c: &mut PipelineConfig) -> anyhow::Result<()> {
    let model = PerceptronModel::load(required(args.model.as_ref(), c.model.as_ref(), "model")?)?;
    if let Some(path) = args.vocab.as_ref().or(c.vocab.as_ref()) {
        let vocab = PhraseVocabulary::load(path)?;
        if vocab.fingerprint() != model.vocab_id() {
            return Err(Error::VersionMismatch(format!(
                "model was trained with vocabulary {}, {} is {}",
                model.vocab_id(),
                path.display(),
                vocab.fingerprint()
            ))
            .into());
        }
    }
    let mode = args.mode.unwrap_or(model.mode());
    let sources = args.input.load(c)?;
    let mut out = format!("{TAGS_HEADER} vocab={}\n", model.vocab_id());
    for source in &sources {
        let tags = model.predict_tags(source, mode);
        let line: Vec<String> = tags.tags.iter().map(EditTag::to_string).collect();
        out.push_str(&line.join("\t"));
        out.push('\n');
    }
    eprintln!("predict: {} sources, mode {}", sources.len(), mode.as_str());
    write_atomic(&args.out, &out)
}

/// Reads a `predict` output: one tab-separated label line per source.
pub fn read_tags(path: &Path) -> anyhow::Result<Vec<TagSequence>> {
    let content = read_to_string(path)?;
    let mut lines = content.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.starts_with(TAGS_HEADER) => {}
        Some(_) => return Err(Error::parse(path, 1, format!("expected header `{TAGS_HEADER} …`")).into()),
        None => return Err(Error::EmptyFile(path.to_path_buf()).into()),
    }
    lines
        .map(|(i, line)| {
            let tags = line
                .split('\t')
                .filter(|s| !s.is_empty())
                .map(|t| t.parse::<EditTag>().map_err(|e| Error::parse(path, i + 1, e)))
                .collect::<crate::Result<Vec<_>>>()?;
            Ok(TagSequence::new(tags))
        })
        .collect()
}

fn cmd_realize(args: &RealizeArgs, c: &PipelineConfig) -> anyhow::Result<()> {
    let engine = RealizationEngine::new();
    let pairs: Vec<(TokenSequence, TagSequence)> = if let Some(tagged) = &args.tagged {
        let vocab = PhraseVocabulary::load(required(args.vocab.as_ref(), c.vocab.as_ref(), "vocab")?)?;
        let split = args.input.split.as_str();
        read_tagged(tagged, &vocab)?
            .into_iter()
            .filter(|r| r.tags.convertible && (split == "all" || r.split.as_str() == split))
            .map(|r| (r.source, r.tags))
            .collect()
    } else {
        let tags_path = args.tags.as_ref().expect("clap requires --tags or --tagged");
        let sources = args.input.load(c)?;
        let tags = read_tags(tags_path)?;
        if tags.len() != sources.len() {
            return Err(Error::LengthMismatch {
                what: "tag file",
                expected: sources.len(),
                found: tags.len(),
            }
            .into());
        }
        sources.into_iter().zip(tags).collect()
    };
    let mut out = String::new();
    for (source, tags) in &pairs {
        out.push_str(&detokenize(&engine.realize(source, tags)?));
        out.push('\n');
    }
    eprintln!("realize: {} outputs", pairs.len());
    write_atomic(&args.out, &out)
}

fn cmd_eval(args: &EvalArgs, c: &mut PipelineConfig) -> anyhow::Result<()> {
    if let Some(m) = &args.metrics {
        c.metrics = parse_metric_list(m).map_err(anyhow::Error::msg)?;
    }
    let predictions: Vec<String> = read_to_string(&args.predictions)?.lines().map(str::to_string).collect();
    let (corpus_id, sources, references): (String, Vec<String>, Vec<Vec<String>>) = match &args.references {
        Some(refs) => {
            let sources_path = args.sources.as_ref().expect("clap requires --sources");
            let sources = read_to_string(sources_path)?.lines().map(str::to_string).collect();
            let references = read_to_string(refs)?
                .lines()
                .map(|l| l.split('\t').map(str::to_string).collect())
                .collect();
            let id = refs.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            (id, sources, references)
        }
        None => {
            let corpus = select_split(&args.corpus.load(c)?, &args.split)?;
            (
                corpus.id.clone(),
                corpus.examples.iter().map(|e| e.source.clone()).collect(),
                corpus.examples.iter().map(|e| e.references()).collect(),
            )
        }
    };
    for (what, n) in [("source list", sources.len()), ("reference list", references.len())] {
        if n != predictions.len() {
            return Err(Error::LengthMismatch {
                what,
                expected: predictions.len(),
                found: n,
            }
            .into());
        }
    }
    let instances: Vec<EvalInstance> = predictions
        .into_iter()
        .zip(sources)
        .zip(references)
        .map(|((p, s), r)| EvalInstance::new(s, p, r))
        .collect();
    let report = MetricsReport::compute(corpus_id, &instances, &c.metrics);
    let json_path = args.json.clone().unwrap_or_else(|| {
        let mut p = args.out.clone().into_os_string();
        p.push(".json");
        PathBuf::from(p)
    });
    write_atomic(&args.out, &report.to_key_value())?;
    write_atomic(&json_path, &report.to_json())?;
    eprint!("{}", report.to_key_value());
    Ok(())
}

fn cmd_stats(args: &StatsArgs, c: &mut PipelineConfig) -> anyhow::Result<()> {
    args.conversion.apply(c);
    let corpus = args.corpus.load(c)?;
    let budgets: Vec<usize> = args
        .budgets
        .split(',')
        .map(|b| b.trim().parse().with_context(|| format!("bad budget {b:?}")))
        .collect::<anyhow::Result<_>>()?;
    let options = c.corpus_options();
    let curve = corpus::stats_report(&corpus, &budgets, &options);
    let sets = corpus::phrase_sets(&corpus, &options);
    let mut out = format!(
        "corpus = {}\nexamples = {}\nphrase_pool = {}\nmax_coverable = {:.4}\n",
        corpus.id,
        corpus.len(),
        vocab::rank_by_frequency(&sets).len(),
        corpus::max_coverable_fraction(&sets)
    );
    for point in &curve {
        out.push_str(&format!(
            "coverage[{}] = {:.4} (vocab {})\n",
            point.budget, point.coverage, point.vocab_size
        ));
    }
    if let Some(path) = args.vocab.as_ref().or(c.vocab.as_ref()) {
        let vocab = PhraseVocabulary::load(path)?;
        let (_, stats) = corpus::convert_corpus(&corpus, &vocab, &options);
        out.push_str(&format!(
            "converted = {}/{}\nconvertible_fraction = {:.4}\n",
            stats.convertible,
            stats.total,
            stats.convertible_fraction()
        ));
    }
    write_atomic(&args.out, &out)
}
