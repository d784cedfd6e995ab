//! The `lcr-rot` command line.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 data or format
//! error, 3 numeric failure.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, BufReader};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::corpus::{corpus_stats, load_examples, Example, Sentiment};
use crate::embeddings::EmbeddingTable;
use crate::error::{Error, Result};
use crate::eval::{attention_export, evaluate, majority_baseline, paired_t_test, parse_samples, ExportFormat};
use crate::model::{EmbeddedExample, ModelConfig, Variant};
use crate::rng::{self, streams};
use crate::training::{load_checkpoint, save_checkpoint, tiny_gradcheck, train, Checkpoint, Hyperparams, Regularization};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "lcr-rot", version, about = "Target-level sentiment classification with rotatory attention")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Train a model and write a checkpoint and metrics log.
    Train(TrainArgs),
    /// Evaluate a checkpoint on a labelled corpus.
    Eval(EvalArgs),
    /// Train all five variants with shared seeds and compare them.
    Ablate(AblateArgs),
    /// Class counts and target-length distribution of corpora.
    Stats(StatsArgs),
    /// Paired t-test between two files of per-seed accuracies.
    Ttest(TtestArgs),
    /// Export attention weights of selected examples as JSON or HTML.
    Viz(VizArgs),
    /// Finite-difference check of the analytic gradients on a tiny network.
    Gradcheck(GradcheckArgs),
}

/// Model and optimizer settings. Each can also come from `--config`;
/// explicit flags win.
#[derive(Debug, Clone, Default, Args)]
struct ModelArgs {
    /// `key = value` file with any of the settings below
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// lcr-rot, no-target-attention, no-target-learned, no-attention or
    /// attention-reverse [default: lcr-rot]
    #[arg(long)]
    variant: Option<String>,
    /// Learning rate [default: 0.1]
    #[arg(long)]
    lr: Option<f64>,
    /// L2 weight [default: 1e-5]
    #[arg(long)]
    l2: Option<f64>,
    /// Dropout rate on the final representation [default: 0.5]
    #[arg(long)]
    dropout: Option<f64>,
    /// Momentum [default: 0.9]
    #[arg(long)]
    momentum: Option<f64>,
    /// Embedding dimension [default: 300]
    #[arg(long)]
    dim: Option<usize>,
    /// Hidden size of each LSTM direction [default: 300]
    #[arg(long)]
    hidden: Option<usize>,
    /// Mini-batch size [default: 25]
    #[arg(long)]
    batch_size: Option<usize>,
    /// Number of epochs [default: 30]
    #[arg(long)]
    epochs: Option<usize>,
    /// Random seed [default: 1]
    #[arg(long)]
    seed: Option<u64>,
    /// Whether the L2 penalty covers biases [default: true]
    #[arg(long, value_name = "BOOL")]
    regularize_biases: Option<bool>,
}

#[derive(Debug, Args)]
struct TrainArgs {
    /// Training corpus
    #[arg(long)]
    train: PathBuf,
    /// Held-out corpus evaluated after every epoch
    #[arg(long)]
    dev: Option<PathBuf>,
    /// Pre-trained embeddings (`token v1 .. vd` per line); without it every
    /// token gets a random row
    #[arg(long)]
    embeddings: Option<PathBuf>,
    /// Output checkpoint of the final epoch
    #[arg(long)]
    checkpoint: PathBuf,
    /// Also save the epoch with the best held-out accuracy here (needs --dev)
    #[arg(long, requires = "dev")]
    best_checkpoint: Option<PathBuf>,
    /// Metrics log (`epoch  loss  train_acc  [dev_acc]`); printed to stdout
    /// when omitted
    #[arg(long)]
    metrics: Option<PathBuf>,
    #[command(flatten)]
    model: ModelArgs,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[arg(long)]
    checkpoint: PathBuf,
    /// Corpus to evaluate
    #[arg(long)]
    test: PathBuf,
    /// Training corpus; enables the majority baseline
    #[arg(long)]
    train: Option<PathBuf>,
    #[arg(long)]
    embeddings: Option<PathBuf>,
    /// Write per-example correctness (1 or 0 per line) here
    #[arg(long)]
    predictions: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct AblateArgs {
    #[arg(long)]
    train: PathBuf,
    #[arg(long)]
    test: PathBuf,
    #[arg(long)]
    embeddings: Option<PathBuf>,
    /// Comma-separated seeds shared by all variants [default: --seed]
    #[arg(long, value_delimiter = ',')]
    seeds: Vec<u64>,
    /// Directory for one `<variant>.acc` file of per-seed accuracies each
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[command(flatten)]
    model: ModelArgs,
}

#[derive(Debug, Args)]
struct StatsArgs {
    /// Corpus files
    #[arg(required = true)]
    corpora: Vec<PathBuf>,
}

#[derive(Debug, Args)]
struct TtestArgs {
    /// Per-seed accuracies of the first run, one per line
    a: PathBuf,
    /// Per-seed accuracies of the second run, same seed order
    b: PathBuf,
}

#[derive(Debug, Args)]
struct VizArgs {
    #[arg(long)]
    checkpoint: PathBuf,
    /// Corpus holding the examples
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    embeddings: Option<PathBuf>,
    /// Comma-separated zero-based example indices
    #[arg(long, value_delimiter = ',', default_value = "0")]
    index: Vec<usize>,
    /// json or html
    #[arg(long, default_value = "json")]
    format: String,
    /// Write `example_<i>.<ext>` files here instead of printing
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct GradcheckArgs {
    /// Variant to check [default: all five]
    #[arg(long)]
    variant: Option<String>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// L2 weight included in the checked loss
    #[arg(long, default_value_t = 1e-5)]
    l2: f64,
}

/// Fully resolved model settings.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Settings {
    config: ModelConfig,
    hyperparams: Hyperparams,
}

impl Settings {
    fn describe(&self) -> String {
        let hp = &self.hyperparams;
        format!(
            "variant = {}\ndim = {}\nhidden = {}\nlr = {}\nl2 = {}\ndropout = {}\nmomentum = {}\n\
             batch_size = {}\nepochs = {}\nseed = {}\nregularize_biases = {}\n",
            self.config.variant,
            self.config.embed_dim,
            self.config.hidden_dim,
            hp.learning_rate,
            hp.l2,
            hp.dropout,
            hp.momentum,
            hp.batch_size,
            hp.max_epochs,
            hp.seed,
            hp.regularize_biases
        )
    }
}

/// Parses a `key = value` configuration file. Blank lines and `#` comments
/// are ignored; keys may use `-` or `_`.
fn parse_config(text: &str) -> Result<ModelArgs> {
    let mut out = ModelArgs::default();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let bad = |message: String| Error::Format { line: i + 1, message };
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| bad(format!("expected `key = value`, got {line:?}")))?;
        let (key, value) = (key.trim().replace('-', "_"), value.trim());
        fn num<T: std::str::FromStr>(v: &str, key: &str, line: usize) -> Result<Option<T>> {
            v.parse().map(Some).map_err(|_| Error::Format {
                line,
                message: format!("invalid value {v:?} for {key}"),
            })
        }
        let n = i + 1;
        match key.as_str() {
            "variant" => out.variant = Some(value.to_string()),
            "lr" | "learning_rate" => out.lr = num(value, &key, n)?,
            "l2" => out.l2 = num(value, &key, n)?,
            "dropout" => out.dropout = num(value, &key, n)?,
            "momentum" => out.momentum = num(value, &key, n)?,
            "dim" => out.dim = num(value, &key, n)?,
            "hidden" => out.hidden = num(value, &key, n)?,
            "batch_size" => out.batch_size = num(value, &key, n)?,
            "epochs" => out.epochs = num(value, &key, n)?,
            "seed" => out.seed = num(value, &key, n)?,
            "regularize_biases" => out.regularize_biases = num(value, &key, n)?,
            _ => return Err(bad(format!("unknown key {key:?}"))),
        }
    }
    Ok(out)
}

impl ModelArgs {
    /// Explicit flags, then the config file, then defaults.
    fn resolve(&self) -> Result<Settings> {
        let file = match &self.config {
            Some(path) => parse_config(&read(path)?).map_err(|e| match e {
                Error::Format { line, message } => Error::Config(format!("{}:{line}: {message}", path.display())),
                other => other,
            })?,
            None => ModelArgs::default(),
        };
        let d = Hyperparams::default();
        let variant = match self.variant.as_ref().or(file.variant.as_ref()) {
            Some(v) => v.parse()?,
            None => Variant::LcrRot,
        };
        let hyperparams = Hyperparams {
            learning_rate: self.lr.or(file.lr).unwrap_or(d.learning_rate),
            l2: self.l2.or(file.l2).unwrap_or(d.l2),
            dropout: self.dropout.or(file.dropout).unwrap_or(d.dropout),
            momentum: self.momentum.or(file.momentum).unwrap_or(d.momentum),
            batch_size: self.batch_size.or(file.batch_size).unwrap_or(d.batch_size),
            max_epochs: self.epochs.or(file.epochs).unwrap_or(d.max_epochs),
            seed: self.seed.or(file.seed).unwrap_or(d.seed),
            regularize_biases: self.regularize_biases.or(file.regularize_biases).unwrap_or(d.regularize_biases),
        };
        hyperparams.validate()?;
        let embed_dim = self.dim.or(file.dim).unwrap_or(300);
        let hidden_dim = self.hidden.or(file.hidden).unwrap_or(300);
        if embed_dim == 0 || hidden_dim == 0 {
            return Err(Error::Config("dimensions must be positive".into()));
        }
        Ok(Settings {
            config: ModelConfig::new(variant, embed_dim, hidden_dim),
            hyperparams,
        })
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| with_path(e, path))
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, contents).map_err(|e| with_path(e, path))
}

fn with_path(e: io::Error, path: &Path) -> Error {
    Error::Io(io::Error::new(e.kind(), format!("{}: {e}", path.display())))
}

fn load_corpus(path: &Path) -> Result<Vec<Example>> {
    load_examples(&read(path)?).map_err(|e| match e {
        Error::Record { record, message } => Error::Record {
            record,
            message: format!("{}: {message}", path.display()),
        },
        other => other,
    })
}

fn load_table(path: Option<&Path>, dim: usize) -> Result<EmbeddingTable> {
    match path {
        Some(p) => {
            let file = fs::File::open(p).map_err(|e| with_path(e, p))?;
            EmbeddingTable::load_pretrained(BufReader::new(file), dim)
        }
        None => Ok(EmbeddingTable::new(dim)),
    }
}

fn labels(examples: &[Example]) -> Vec<Sentiment> {
    examples.iter().map(|e| e.label).collect()
}

fn cmd_train(args: &TrainArgs) -> Result<()> {
    let settings = args.model.resolve()?;
    eprint!("effective config:\n{}", settings.describe());
    let hp = settings.hyperparams;
    let train_set = load_corpus(&args.train)?;
    let dev_set = args.dev.as_deref().map(load_corpus).transpose()?;
    let mut table = load_table(args.embeddings.as_deref(), settings.config.embed_dim)?;
    let mut emb_rng = rng::stream(hp.seed, streams::EMBEDDINGS);
    let train_emb = EmbeddedExample::embed_all(&train_set, &mut table, &mut emb_rng);
    let dev_emb = dev_set.map(|d| EmbeddedExample::embed_all(&d, &mut table, &mut emb_rng));

    let outcome = train(&train_emb, dev_emb.as_deref(), settings.config, &hp)?;
    let log = outcome.metrics_log();
    match &args.metrics {
        Some(path) => write(path, &log)?,
        None => print!("{log}"),
    }
    save_checkpoint(&args.checkpoint, &Checkpoint::new(outcome.model, hp, Some(&table)))?;
    if let Some(last) = outcome.log.last() {
        println!("final train accuracy\t{:.6}", last.train_acc);
    }
    if let Some(best) = outcome.best {
        println!("best dev accuracy\t{:.6}\tepoch {}", best.dev_acc, best.epoch);
        if let Some(path) = &args.best_checkpoint {
            save_checkpoint(path, &Checkpoint::new(best.model, hp, Some(&table)))?;
        }
    }
    Ok(())
}

/// Loads a checkpoint and embeds `examples` with its stored OOV rows.
fn restore(checkpoint: &Path, embeddings: Option<&Path>, examples: &[Example]) -> Result<(Checkpoint, Vec<EmbeddedExample>)> {
    let ck = load_checkpoint(checkpoint)?;
    let mut table = load_table(embeddings, ck.model.config().embed_dim)?;
    ck.restore_oov(&mut table)?;
    let mut emb_rng = rng::stream(ck.hyperparams.seed, streams::EMBEDDINGS);
    let embedded = EmbeddedExample::embed_all(examples, &mut table, &mut emb_rng);
    Ok((ck, embedded))
}

fn cmd_eval(args: &EvalArgs) -> Result<()> {
    let test = load_corpus(&args.test)?;
    let (ck, embedded) = restore(&args.checkpoint, args.embeddings.as_deref(), &test)?;
    let result = evaluate(&ck.model, &embedded)?;
    println!("variant\t{}", ck.model.variant());
    println!("accuracy\t{:.6}\t{}/{}", result.accuracy, result.correct(), result.predictions.len());
    if let Some(train_path) = &args.train {
        let train_set = load_corpus(train_path)?;
        let b = majority_baseline(&labels(&train_set), &labels(&test))?;
        println!("majority\t{:.6}\t{}", b.accuracy, b.label);
    }
    if let Some(path) = &args.predictions {
        let text: String = result.correctness().iter().map(|c| format!("{c}\n")).collect();
        write(path, text)?;
    }
    Ok(())
}

fn cmd_ablate(args: &AblateArgs) -> Result<()> {
    if args.model.variant.is_some() {
        return Err(Error::Usage("ablate always runs every variant; drop --variant".into()));
    }
    let settings = args.model.resolve()?;
    let seeds = if args.seeds.is_empty() { vec![settings.hyperparams.seed] } else { args.seeds.clone() };
    eprint!("effective config:\n{}seeds = {seeds:?}\n", settings.describe());
    let train_set = load_corpus(&args.train)?;
    let test_set = load_corpus(&args.test)?;
    let b = majority_baseline(&labels(&train_set), &labels(&test_set))?;

    // One embedding draw per seed, shared by every variant.
    let mut embedded = Vec::with_capacity(seeds.len());
    for &seed in &seeds {
        let mut table = load_table(args.embeddings.as_deref(), settings.config.embed_dim)?;
        let mut emb_rng = rng::stream(seed, streams::EMBEDDINGS);
        let tr = EmbeddedExample::embed_all(&train_set, &mut table, &mut emb_rng);
        let te = EmbeddedExample::embed_all(&test_set, &mut table, &mut emb_rng);
        embedded.push((tr, te));
    }

    let mut table = String::from("variant");
    for s in &seeds {
        let _ = write!(table, "\tseed {s}");
    }
    table.push_str("\tmean\n");
    let mut per_variant: Vec<(Variant, Vec<f64>)> = Vec::new();
    for variant in Variant::ALL {
        let config = ModelConfig { variant, ..settings.config };
        let mut accs = Vec::with_capacity(seeds.len());
        for (&seed, (tr, te)) in seeds.iter().zip(&embedded) {
            let hp = Hyperparams { seed, ..settings.hyperparams };
            let outcome = train(tr, None, config, &hp)?;
            accs.push(evaluate(&outcome.model, te)?.accuracy);
        }
        let mean = accs.iter().sum::<f64>() / accs.len() as f64;
        let _ = write!(table, "{variant}");
        for a in &accs {
            let _ = write!(table, "\t{a:.4}");
        }
        let _ = writeln!(table, "\t{mean:.4}");
        if let Some(dir) = &args.out_dir {
            fs::create_dir_all(dir).map_err(|e| with_path(e, dir))?;
            let text: String = accs.iter().map(|a| format!("{a:?}\n")).collect();
            write(&dir.join(format!("{variant}.acc")), text)?;
        }
        per_variant.push((variant, accs));
    }
    let _ = writeln!(table, "majority\t{:.4}", b.accuracy);
    print!("{table}");

    if seeds.len() >= 2 {
        let (base, base_accs) = &per_variant[0];
        for (v, accs) in &per_variant[1..] {
            match paired_t_test(base_accs, accs) {
                Ok(t) => println!("{base} vs {v}: {t}"),
                Err(e) => println!("{base} vs {v}: {e}"),
            }
        }
    }
    Ok(())
}

fn cmd_stats(args: &StatsArgs) -> Result<()> {
    for path in &args.corpora {
        let stats = corpus_stats(&load_corpus(path)?)?;
        println!("# {}", path.display());
        print!("{stats}");
    }
    Ok(())
}

fn stem(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| path.display().to_string())
}

fn cmd_ttest(args: &TtestArgs) -> Result<()> {
    let a = parse_samples(&read(&args.a)?)?;
    let b = parse_samples(&read(&args.b)?)?;
    let r = paired_t_test(&a, &b)?;
    println!("{} vs {}: {r}", stem(&args.a), stem(&args.b));
    Ok(())
}

fn cmd_viz(args: &VizArgs) -> Result<()> {
    let format: ExportFormat = args.format.parse()?;
    let corpus = load_corpus(&args.corpus)?;
    if let Some(&bad) = args.index.iter().find(|&&i| i >= corpus.len()) {
        return Err(Error::Usage(format!("index {bad} out of range for {} examples", corpus.len())));
    }
    let (ck, embedded) = restore(&args.checkpoint, args.embeddings.as_deref(), &corpus)?;
    for &i in &args.index {
        let rendered = attention_export(&ck.model, &corpus[i], &embedded[i])?.render(format);
        match &args.out_dir {
            Some(dir) => {
                fs::create_dir_all(dir).map_err(|e| with_path(e, dir))?;
                let path = dir.join(format!("example_{i}.{}", format.extension()));
                write(&path, rendered)?;
                println!("{}", path.display());
            }
            None => print!("{rendered}"),
        }
    }
    Ok(())
}

/// Returns whether every checked variant passed.
fn cmd_gradcheck(args: &GradcheckArgs) -> Result<bool> {
    let variants = match &args.variant {
        Some(v) => vec![v.parse()?],
        None => Variant::ALL.to_vec(),
    };
    let reg = Regularization {
        l2: args.l2,
        include_biases: true,
    };
    let mut worst: f64 = 0.0;
    let mut ok = true;
    for v in variants {
        let r = tiny_gradcheck(v, args.seed, reg)?;
        println!(
            "{v}\tentries {}\tmax relative error {:.3e}\t{}",
            r.entries_checked,
            r.max_relative_error,
            if r.passed() { "ok" } else { "FAIL" }
        );
        worst = worst.max(r.max_relative_error);
        ok &= r.passed();
    }
    println!("max relative error {worst:.3e}");
    Ok(ok)
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Usage(_) | Error::Config(_) => EXIT_USAGE,
        Error::Format { .. } | Error::Record { .. } | Error::Checkpoint(_) | Error::Io(_) => EXIT_DATA,
        Error::Domain(_) | Error::Shape { .. } | Error::DegenerateVariance { .. } => EXIT_NUMERIC,
    }
}

/// Runs the command line on `argv` (including the program name) and returns
/// the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let outcome = match &cli.command {
        Command::Train(a) => cmd_train(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Ablate(a) => cmd_ablate(a),
        Command::Stats(a) => cmd_stats(a),
        Command::Ttest(a) => cmd_ttest(a),
        Command::Viz(a) => cmd_viz(a),
        Command::Gradcheck(a) => match cmd_gradcheck(a) {
            Ok(true) => Ok(()),
            Ok(false) => return EXIT_NUMERIC,
            Err(e) => Err(e),
        },
    };
    match outcome {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
