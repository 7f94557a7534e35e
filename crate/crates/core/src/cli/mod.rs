//! Command-line front end: dataset ingestion, configuration files,
//! checkpoints and the subcommands that tie them together.

mod checkpoint;
mod config;
mod dataset;

use std::io::Write;
use std::ops::ControlFlow;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

pub use checkpoint::{
    decode_checkpoint, encode_checkpoint, load_checkpoint, save_checkpoint, CheckpointError, ExpectedDims, MAGIC,
    VERSION,
};
pub use config::{apply_config_text, set_key, ConfigError};
pub use dataset::{
    clean_records, encode_records, unigram_from_texts, ClassSummary, DatasetError, DatasetFile, LineError, Record,
};

use crate::model::{gradient_check, tiny_dims, Classifier};
use crate::numcore::RngStream;
use crate::optim::OptimizerKind;
use crate::preprocess::UnigramTable;
use crate::trainer::{
    ablation_run, evaluate, format_step, stratified_split, train_with, AblationAxis, Dataset, TrainConfig,
    TrainEvent,
};
use crate::vocab::{build_embedding, load_glove, EmbeddingMatrix, GloveVectors, Vocabulary};

/// Fractions of the stratified split used when no validation file is given.
pub const TRAIN_FRACTION: f64 = 0.8;
pub const VAL_FRACTION: f64 = 0.1;
pub const GRADCHECK_TOLERANCE: f64 = 1e-4;

const STREAM_EMBEDDING: u64 = 5;

/// Everything derived from the training text that a model depends on.
#[derive(Clone, Debug)]
pub struct PreparedCorpus {
    pub table: UnigramTable,
    pub vocab: Vocabulary,
    pub embedding: EmbeddingMatrix,
    pub train: Dataset,
    pub val: Dataset,
}

/// Builds the unigram table and vocabulary from `train` only, then encodes
/// both sets and initializes embeddings from `glove`.
pub fn prepare_corpus(
    train: &[Record],
    val: &[Record],
    config: &TrainConfig,
    glove: &GloveVectors,
) -> Result<PreparedCorpus, String> {
    let table = unigram_from_texts(train.iter().map(|r| r.text.as_str()));
    let cleaned_train = clean_records(train, &table);
    let tokens: Vec<_> = cleaned_train.iter().map(|(_, t)| t.clone()).collect();
    let vocab = Vocabulary::build(&tokens, config.min_count);
    let seed = RngStream::new(config.seed).derive(STREAM_EMBEDDING).next_u64();
    let embedding = build_embedding(&vocab, glove, config.embed_dim, seed).map_err(|e| e.to_string())?;
    let train = encode_records(&cleaned_train, &vocab, config.max_len);
    let val = encode_records(&clean_records(val, &table), &vocab, config.max_len);
    Ok(PreparedCorpus {
        table,
        vocab,
        embedding,
        train,
        val,
    })
}

#[derive(Parser, Debug)]
#[command(name = "abusenet", version, about = "Abusive language detection for short posts")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Clean a dataset and write `label<TAB>tokens` lines.
    Preprocess {
        #[arg(long)]
        data: PathBuf,
        /// Output file; defaults to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Word counts (`word count` lines) for segmentation and spelling;
        /// defaults to counts from the dataset itself.
        #[arg(long)]
        unigrams: Option<PathBuf>,
    },
    /// Train a model and write a checkpoint.
    Train {
        #[command(flatten)]
        opts: TrainOpts,
        /// Validation file; when absent `--data` is split 80/10/10.
        #[arg(long)]
        val_data: Option<PathBuf>,
        #[arg(long)]
        checkpoint: PathBuf,
    },
    /// Evaluate a checkpoint on a dataset.
    Eval {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        data: PathBuf,
        /// Required hidden size; the load fails if the checkpoint differs.
        #[arg(long)]
        hidden: Option<usize>,
    },
    /// Classify a text.
    Predict {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        hidden: Option<usize>,
        #[arg(required = true)]
        text: Vec<String>,
    },
    /// Train one model per grid point of an axis and tabulate the results.
    Ablate {
        #[command(flatten)]
        opts: TrainOpts,
        #[arg(long)]
        val_data: Option<PathBuf>,
        #[arg(long, value_parser = parse_axis)]
        axis: AblationAxis,
        #[arg(long, default_value_t = 5)]
        seeds: usize,
        /// Also write comma-separated rows here.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Finite-difference check of the backward pass on tiny models.
    Gradcheck {
        #[arg(long, default_value_t = 20)]
        seeds: u64,
        #[arg(long, default_value_t = 1e-5)]
        eps: f64,
    },
}

fn parse_axis(s: &str) -> Result<AblationAxis, String> {
    s.parse()
}

fn parse_optimizer(s: &str) -> Result<OptimizerKind, String> {
    s.parse()
}

#[derive(Args, Debug)]
struct TrainOpts {
    #[arg(long)]
    data: PathBuf,
    /// GloVe text file; words without a vector start random.
    #[arg(long)]
    glove: Option<PathBuf>,
    /// Flat `key = value` file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long, value_parser = parse_optimizer)]
    optimizer: Option<OptimizerKind>,
    #[arg(long)]
    no_attention: bool,
    #[arg(long, value_name = "RATE")]
    dropout: Option<f64>,
    #[arg(long)]
    unidirectional: bool,
    #[arg(long)]
    max_len: Option<usize>,
    #[arg(long)]
    hidden: Option<usize>,
}

impl TrainOpts {
    fn config(&self) -> Result<TrainConfig, String> {
        let mut c = TrainConfig::default();
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
            apply_config_text(&mut c, &text).map_err(|e| format!("{}: {e}", path.display()))?;
        }
        if let Some(v) = self.seed {
            c.seed = v;
        }
        if let Some(v) = self.lr {
            c.lr = v;
        }
        if let Some(v) = self.batch_size {
            c.batch_size = v;
        }
        if let Some(v) = self.epochs {
            c.epochs = v;
        }
        if let Some(v) = self.optimizer {
            c.optimizer = v;
        }
        if self.no_attention {
            c.attention = false;
        }
        if let Some(v) = self.dropout {
            c.dropout = v;
        }
        if self.unidirectional {
            c.bidirectional = false;
        }
        if let Some(v) = self.max_len {
            c.max_len = v;
        }
        if let Some(v) = self.hidden {
            c.hidden = v;
        }
        c.validate().map_err(|e| e.to_string())?;
        Ok(c)
    }

    fn glove(&self, dim: usize) -> Result<GloveVectors, String> {
        match &self.glove {
            Some(path) => load_glove(path, dim).map_err(|e| e.to_string()),
            None => Ok(GloveVectors {
                dim,
                ..Default::default()
            }),
        }
    }
}

struct Io<'a> {
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
}

type CmdResult = Result<(), String>;

fn w(e: std::io::Error) -> String {
    format!("write failed: {e}")
}

fn load_dataset(path: &Path, io: &mut Io) -> Result<DatasetFile, String> {
    let file = DatasetFile::load(path).map_err(|e| e.to_string())?;
    for e in &file.errors {
        writeln!(io.err, "{}: {e}", path.display()).map_err(w)?;
    }
    Ok(file)
}

/// Train and validation records, splitting `data` when no validation file
/// is given. Split-off parts are written next to `stem`.
fn split_records(
    data: &DatasetFile,
    val_data: Option<&Path>,
    seed: u64,
    stem: Option<&Path>,
    io: &mut Io,
) -> Result<(Vec<Record>, Vec<Record>), String> {
    if let Some(path) = val_data {
        let val = load_dataset(path, io)?;
        return Ok((data.records.clone(), val.records));
    }
    let (train, val, test) =
        stratified_split(&data.records, |r| r.label, TRAIN_FRACTION, VAL_FRACTION, seed).map_err(|e| e.to_string())?;
    if let Some(stem) = stem {
        for (suffix, part) in [("val.tsv", &val), ("test.tsv", &test)] {
            let path = with_suffix(stem, suffix);
            let text: String = part.iter().map(|r| format!("{}\t{}\n", r.label.name(), r.text)).collect();
            std::fs::write(&path, text).map_err(|e| format!("cannot write {}: {e}", path.display()))?;
        }
    }
    writeln!(io.err, "split: {} train, {} validation, {} test", train.len(), val.len(), test.len()).map_err(w)?;
    Ok((train, val))
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".");
    s.push(suffix);
    PathBuf::from(s)
}

fn cmd_preprocess(data: &Path, out: Option<&Path>, unigrams: Option<&Path>, io: &mut Io) -> CmdResult {
    let file = load_dataset(data, io)?;
    write!(io.err, "{}", file.summary()).map_err(w)?;
    let table = match unigrams {
        Some(p) => UnigramTable::load(p).map_err(|e| e.to_string())?,
        None => unigram_from_texts(file.records.iter().map(|r| r.text.as_str())),
    };
    let text: String = clean_records(&file.records, &table)
        .iter()
        .map(|(c, t)| format!("{}\t{}\n", c.name(), t.join()))
        .collect();
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| format!("cannot write {}: {e}", p.display())),
        None => io.out.write_all(text.as_bytes()).map_err(w),
    }
}

fn cmd_train(opts: &TrainOpts, val_data: Option<&Path>, checkpoint: &Path, io: &mut Io) -> CmdResult {
    let config = opts.config()?;
    let data = load_dataset(&opts.data, io)?;
    write!(io.err, "{}", data.summary()).map_err(w)?;
    let (train, val) = split_records(&data, val_data, config.seed, Some(checkpoint), io)?;
    let glove = opts.glove(config.embed_dim)?;
    let corpus = prepare_corpus(&train, &val, &config, &glove)?;
    writeln!(
        io.err,
        "vocabulary: {} entries, {} from GloVe",
        corpus.vocab.len(),
        corpus.embedding.pretrained_rows
    )
    .map_err(w)?;

    let mut log = String::new();
    let mut write_err = None;
    let outcome = train_with(&config, &corpus.train, &corpus.val, &corpus.embedding, |event| {
        if let TrainEvent::Step { step, loss } = event {
            let line = format_step(step, loss);
            if let Err(e) = writeln!(io.out, "{line}") {
                write_err = Some(e);
                return ControlFlow::Break(());
            }
            log.push_str(&line);
            log.push('\n');
        }
        ControlFlow::Continue(())
    })
    .map_err(|e| e.to_string())?;
    if let Some(e) = write_err {
        return Err(w(e));
    }
    write!(io.out, "{}", outcome.report).map_err(w)?;
    std::fs::write(with_suffix(checkpoint, "log"), outcome.log()).map_err(|e| format!("cannot write log: {e}"))?;

    let model = Classifier {
        params: outcome.params,
        vocab: corpus.vocab,
        table: corpus.table,
        max_len: config.max_len,
    };
    save_checkpoint(&model, checkpoint).map_err(|e| e.to_string())
}

fn cmd_eval(checkpoint: &Path, data: &Path, hidden: Option<usize>, io: &mut Io) -> CmdResult {
    let expected = ExpectedDims {
        hidden,
        ..Default::default()
    };
    let model = load_checkpoint(checkpoint, &expected).map_err(|e| e.to_string())?;
    let file = load_dataset(data, io)?;
    let encoded = encode_records(&clean_records(&file.records, &model.table), &model.vocab, model.max_len);
    let report = evaluate(&model.params, &encoded).map_err(|e| e.to_string())?;
    write!(io.out, "{report}").map_err(w)
}

fn cmd_predict(checkpoint: &Path, hidden: Option<usize>, text: &[String], io: &mut Io) -> CmdResult {
    let expected = ExpectedDims {
        hidden,
        ..Default::default()
    };
    let model = load_checkpoint(checkpoint, &expected).map_err(|e| e.to_string())?;
    let p = model.predict_text(&text.join(" ")).map_err(|e| e.to_string())?;
    writeln!(io.out, "label: {}", p.class).map_err(w)?;
    let probs: Vec<String> = crate::model::Class::ALL
        .iter()
        .zip(&p.probs)
        .map(|(c, v)| format!("{c}={v:.6}"))
        .collect();
    writeln!(io.out, "probabilities: {}", probs.join(" ")).map_err(w)?;
    if !p.attention.is_empty() {
        writeln!(io.out, "attention:").map_err(w)?;
        for (tok, a) in p.tokens.iter().zip(&p.attention) {
            writeln!(io.out, "  {tok:<20} {a:.4}").map_err(w)?;
        }
    }
    Ok(())
}

fn cmd_ablate(
    opts: &TrainOpts,
    val_data: Option<&Path>,
    axis: AblationAxis,
    seeds: usize,
    csv: Option<&Path>,
    io: &mut Io,
) -> CmdResult {
    let config = opts.config()?;
    let data = load_dataset(&opts.data, io)?;
    let (train, val) = split_records(&data, val_data, config.seed, None, io)?;
    let glove = opts.glove(config.embed_dim)?;
    let corpus = prepare_corpus(&train, &val, &config, &glove)?;
    let report = ablation_run(&config, axis, seeds, &corpus.train, &corpus.val, &corpus.embedding)
        .map_err(|e| e.to_string())?;
    write!(io.out, "{report}").map_err(w)?;
    if let Some(p) = csv {
        std::fs::write(p, report.to_csv()).map_err(|e| format!("cannot write {}: {e}", p.display()))?;
    }
    Ok(())
}

fn cmd_gradcheck(seeds: u64, eps: f64, io: &mut Io) -> CmdResult {
    let mut worst: f64 = 0.0;
    for (bi, attn) in [(true, true), (false, true), (true, false), (false, false)] {
        let mut mode_worst: f64 = 0.0;
        for seed in 0..seeds {
            let r = gradient_check(tiny_dims(bi, attn), seed, eps).map_err(|e| e.to_string())?;
            mode_worst = mode_worst.max(r.max_rel_error);
        }
        writeln!(
            io.out,
            "{:<15} {:<12} {seeds} seeds  max relative error {mode_worst:.3e}",
            if bi { "bidirectional" } else { "unidirectional" },
            if attn { "attention" } else { "final-state" },
        )
        .map_err(w)?;
        worst = worst.max(mode_worst);
    }
    writeln!(io.out, "max relative error = {worst:e}").map_err(w)?;
    if worst > GRADCHECK_TOLERANCE {
        return Err(format!("gradient check failed: {worst:e} > {GRADCHECK_TOLERANCE:e}"));
    }
    Ok(())
}

/// Runs the command line `argv` (program name first), writing results to
/// `out` and diagnostics to `err`. Returns the exit status: 0 on success,
/// 2 for usage errors, 1 for anything else.
pub fn run_command_with<I, S>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    let mut io = Io { out, err };
    let result = match &cli.command {
        Command::Preprocess { data, out, unigrams } => cmd_preprocess(data, out.as_deref(), unigrams.as_deref(), &mut io),
        Command::Train {
            opts,
            val_data,
            checkpoint,
        } => cmd_train(opts, val_data.as_deref(), checkpoint, &mut io),
        Command::Eval { checkpoint, data, hidden } => cmd_eval(checkpoint, data, *hidden, &mut io),
        Command::Predict {
            checkpoint,
            hidden,
            text,
        } => cmd_predict(checkpoint, *hidden, text, &mut io),
        Command::Ablate {
            opts,
            val_data,
            axis,
            seeds,
            csv,
        } => cmd_ablate(opts, val_data.as_deref(), *axis, *seeds, csv.as_deref(), &mut io),
        Command::Gradcheck { seeds, eps } => cmd_gradcheck(*seeds, *eps, &mut io),
    };
    match result {
        Ok(()) => 0,
        Err(msg) => {
            let _ = writeln!(io.err, "error: {msg}");
            1
        }
    }
}

/// [`run_command_with`] on the process's stdout and stderr.
pub fn run_command<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_command_with(argv, &mut stdout.lock(), &mut stderr.lock())
}
