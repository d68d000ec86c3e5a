//! The `revroles` command line.
//!
//! File formats:
//! - corpus directory: one `<essay_id>.json` per essay plus optional `scores.csv`
//!   (`essay_id,score1_raw,score2_raw,rubric_min,rubric_max`)
//! - revisions: JSON lines, one revision object per line
//! - docs: `{"vocabulary": [63 words], "documents": [{"editor_id", "counts"}]}`
//! - model: `{hyperparams, vocabulary, phi, theta_train, train_log_likelihood}`
//! - theta: CSV `editor_id,topic_0,..,topic_{K-1}`
//! - report: JSON validation report, rendered as text by `report`
//!
//! Exit status is 0 on success, 1 on a domain error (one `error[kind]: ...`
//! line on stderr), 2 on a usage error.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::alignment::{essay_revisions, Revision, DEFAULT_THRESHOLD};
use crate::corpus::{load_corpus, load_scores, LoadOptions, ScaleMode};
use crate::error::{Error, Result};
use crate::lda::{self, Hyperparams, LdaModel};
use crate::synth::{synthesize, SynthConfig};
use crate::validation::{default_labels, validate, ValidationReport};
use crate::vocab::{build_vocabulary, editor_document, EditorDocument};

const LONG_ABOUT: &str = "\
Mine editor roles from essay revision histories.

Pipeline: align -> encode -> train (or sweep) -> infer -> validate -> report.

Formats:
  corpus DIR     one <essay_id>.json per essay:
                 {\"essay_id\", \"original\": [[sentence..]..], \"revised\": [[..]..],
                  \"annotations\": [{\"side\": \"original\"|\"revised\", \"paragraph\", \"sentence\", \"purpose\"}]}
                 plus optional scores.csv: essay_id,score1_raw,score2_raw,rubric_min,rubric_max
  revisions      JSON lines: {\"essay_id\", \"operation\", \"purpose\", \"position\", \"original_ref\", \"revised_ref\"}
  docs           {\"vocabulary\": [63 words], \"documents\": [{\"editor_id\", \"counts\": [63 ints]}]}
  model          {\"hyperparams\", \"vocabulary\", \"phi\", \"theta_train\", \"train_log_likelihood\"}
  theta          CSV: editor_id,topic_0,...,topic_{K-1}
  report         JSON validation report; `revroles report` renders it as text

Purposes: Claims Reasoning Evidence Rebuttal General Precision Grammar Word-Usage Organization.
Log level comes from --log-level or the REVROLES_LOG environment variable.";

#[derive(Debug, Parser)]
#[command(name = "revroles", version, about = "Mine editor roles from essay revision histories", long_about = LONG_ABOUT)]
pub struct RunConfig {
    /// Log filter (error, warn, info, debug, trace); overrides REVROLES_LOG.
    #[arg(long, global = true)]
    pub log_level: Option<String>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Align drafts and extract labelled revisions.
    Align(AlignArgs),
    /// Encode revisions as per-editor bag-of-words documents.
    Encode(EncodeArgs),
    /// Train an LDA role model.
    Train(TrainArgs),
    /// Train one model per K and summarize each.
    Sweep(SweepArgs),
    /// Print the top words of every topic.
    Topics(TopicsArgs),
    /// Infer role mixtures for documents against a trained model.
    Infer(InferArgs),
    /// Validate roles against purpose counts and score improvement.
    Validate(ValidateArgs),
    /// Generate a synthetic corpus from role-shaped ground truth.
    Synth(SynthArgs),
    /// Render a validation report as text tables.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct AlignArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    /// Minimum similarity for two sentences to be aligned, in (0, 1].
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    pub threshold: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EncodeArgs {
    #[arg(long)]
    pub revisions: PathBuf,
    /// Also emit empty documents for essays of this corpus without revisions.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Clone)]
pub struct LdaArgs {
    #[arg(long, default_value_t = 0.1)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.01)]
    pub beta: f64,
    #[arg(long, default_value_t = 2000)]
    pub sweeps: usize,
    /// Sweeps discarded before averaging; defaults to half of --sweeps.
    #[arg(long)]
    pub burn_in: Option<usize>,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Average estimates over post-burn-in sweeps instead of the final state.
    #[arg(long)]
    pub average: bool,
}

impl LdaArgs {
    fn hyperparams(&self, k: usize) -> Hyperparams {
        Hyperparams {
            k,
            alpha: self.alpha,
            beta: self.beta,
            sweeps: self.sweeps,
            burn_in: self.burn_in.unwrap_or(self.sweeps / 2),
            seed: self.seed,
            average_samples: self.average,
        }
    }
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub docs: PathBuf,
    #[arg(long, default_value_t = 5)]
    pub k: usize,
    #[command(flatten)]
    pub lda: LdaArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub docs: PathBuf,
    #[arg(long, default_value_t = 2)]
    pub kmin: usize,
    #[arg(long, default_value_t = 10)]
    pub kmax: usize,
    #[command(flatten)]
    pub lda: LdaArgs,
    #[arg(long, default_value_t = 10)]
    pub top: usize,
    /// Write the sweep summary as JSON here as well as printing it.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TopicsArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, default_value_t = 10)]
    pub top: usize,
    /// JSON array of K role names.
    #[arg(long)]
    pub labels: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct InferArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub docs: PathBuf,
    #[arg(long, default_value_t = 200)]
    pub sweeps: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ScaleArg {
    Rubric,
    Observed,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub docs: PathBuf,
    #[arg(long)]
    pub revisions: PathBuf,
    #[arg(long)]
    pub scores: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// JSON array of K role names; defaults to "Topic 0".."Topic K-1".
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// Regress per-purpose proportions instead of raw counts.
    #[arg(long)]
    pub normalize: bool,
    #[arg(long, value_enum, default_value_t = ScaleArg::Rubric)]
    pub scale: ScaleArg,
    #[arg(long, default_value_t = 200)]
    pub infer_sweeps: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 5)]
    pub k: usize,
    /// Number of synthetic editors.
    #[arg(long, default_value_t = 200)]
    pub docs: usize,
    #[arg(long, default_value_t = 18.0)]
    pub mean_len: f64,
    #[arg(long, default_value_t = 0.1)]
    pub alpha: f64,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub truth: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(long)]
    pub report: PathBuf,
    /// Write the text here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// On-disk document collection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocsFile {
    pub vocabulary: Vec<String>,
    pub documents: Vec<EditorDocument>,
}

impl DocsFile {
    pub fn new(documents: Vec<EditorDocument>) -> Self {
        Self {
            vocabulary: build_vocabulary().word_strings(),
            documents,
        }
    }
}

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(contents).map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn to_json_pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

pub fn read_revisions(path: &Path) -> Result<Vec<Revision>> {
    read(path)?
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, line)| {
            serde_json::from_str(line)
                .map_err(|e| Error::format(format!("revision on line {}", i + 1), e))
        })
        .collect()
}

pub fn read_docs(path: &Path) -> Result<Vec<EditorDocument>> {
    let file: DocsFile =
        serde_json::from_str(&read(path)?).map_err(|e| Error::format("docs file", e))?;
    build_vocabulary().check_matches(&file.vocabulary)?;
    for doc in &file.documents {
        doc.check_len()?;
    }
    Ok(file.documents)
}

pub fn read_model(path: &Path) -> Result<LdaModel> {
    LdaModel::from_json(&read(path)?)
}

fn read_labels(path: Option<&Path>, k: usize) -> Result<Vec<String>> {
    let Some(path) = path else {
        return Ok(default_labels(k));
    };
    let labels: Vec<String> =
        serde_json::from_str(&read(path)?).map_err(|e| Error::format("labels file", e))?;
    if labels.len() != k {
        return Err(Error::Config(format!("{} labels for a {k}-role model", labels.len())));
    }
    Ok(labels)
}

fn group_by_editor(revisions: Vec<Revision>) -> BTreeMap<String, Vec<Revision>> {
    let mut grouped: BTreeMap<String, Vec<Revision>> = BTreeMap::new();
    for r in revisions {
        grouped.entry(r.essay_id.clone()).or_default().push(r);
    }
    grouped
}

fn run_align(args: &AlignArgs) -> Result<()> {
    let essays = load_corpus(&args.corpus, LoadOptions::default())?;
    let mut out = String::new();
    let mut total = 0;
    for essay in &essays {
        for revision in essay_revisions(&essay.draft, args.threshold)? {
            out.push_str(&serde_json::to_string(&revision).expect("revision serializes"));
            out.push('\n');
            total += 1;
        }
    }
    write_atomic(&args.out, out.as_bytes())?;
    log::info!("{} revisions from {} essays", total, essays.len());
    Ok(())
}

fn run_encode(args: &EncodeArgs) -> Result<()> {
    let mut grouped = group_by_editor(read_revisions(&args.revisions)?);
    if let Some(corpus) = &args.corpus {
        for essay in load_corpus(corpus, LoadOptions::default())? {
            grouped.entry(essay.draft.essay_id).or_default();
        }
    }
    let documents = grouped
        .iter()
        .map(|(id, revs)| editor_document(id, revs))
        .collect::<Result<Vec<_>>>()?;
    write_atomic(&args.out, to_json_pretty(&DocsFile::new(documents)).as_bytes())
}

fn run_train(args: &TrainArgs) -> Result<()> {
    let docs = read_docs(&args.docs)?;
    let model = lda::train(&docs, &args.lda.hyperparams(args.k))?;
    write_atomic(&args.out, model.to_json().as_bytes())
}

fn run_sweep(args: &SweepArgs) -> Result<()> {
    if args.kmin == 0 || args.kmin > args.kmax {
        return Err(Error::Config(format!(
            "invalid K range {}..={}",
            args.kmin, args.kmax
        )));
    }
    let docs = read_docs(&args.docs)?;
    let entries = lda::sweep(
        &docs,
        args.kmin..=args.kmax,
        &args.lda.hyperparams(args.kmin),
        args.top,
    )?;
    if let Some(out) = &args.out {
        write_atomic(out, to_json_pretty(&entries).as_bytes())?;
    }
    let mut text = String::new();
    for entry in &entries {
        let _ = writeln!(text, "K={} log-likelihood={:.4}", entry.k, entry.train_log_likelihood);
        for (t, words) in entry.top_words.iter().enumerate() {
            let _ = writeln!(text, "  topic {t}: {}", words.join(" "));
        }
    }
    print!("{text}");
    Ok(())
}

fn run_topics(args: &TopicsArgs) -> Result<()> {
    let model = read_model(&args.model)?;
    let labels = read_labels(args.labels.as_deref(), model.k())?;
    let mut text = String::new();
    for (t, label) in labels.iter().enumerate() {
        let _ = writeln!(text, "{label}");
        for (word, p) in lda::top_words(&model, t, args.top)? {
            let _ = writeln!(text, "  {:<20} {:.4}", word.to_string(), p);
        }
    }
    print!("{text}");
    Ok(())
}

pub fn theta_csv(ids: &[String], theta: &[Vec<f64>]) -> String {
    let k = theta.first().map_or(0, Vec::len);
    let mut out = String::from("editor_id");
    for t in 0..k {
        let _ = write!(out, ",topic_{t}");
    }
    out.push('\n');
    for (id, row) in ids.iter().zip(theta) {
        out.push_str(id);
        for v in row {
            let _ = write!(out, ",{v}");
        }
        out.push('\n');
    }
    out
}

fn run_infer(args: &InferArgs) -> Result<()> {
    let model = read_model(&args.model)?;
    let docs = read_docs(&args.docs)?;
    let theta = lda::infer_all(&model, &docs, args.sweeps, args.seed)?;
    let ids: Vec<String> = docs.iter().map(|d| d.editor_id.clone()).collect();
    write_atomic(&args.out, theta_csv(&ids, &theta).as_bytes())
}

fn run_validate(args: &ValidateArgs) -> Result<()> {
    let model = read_model(&args.model)?;
    let docs = read_docs(&args.docs)?;
    let mut grouped = group_by_editor(read_revisions(&args.revisions)?);
    let scale = match args.scale {
        ScaleArg::Rubric => ScaleMode::Rubric,
        ScaleArg::Observed => ScaleMode::Observed,
    };
    let scores: BTreeMap<String, (f64, f64)> = load_scores(&args.scores, scale)?
        .into_iter()
        .map(|s| (s.essay_id, (s.score1, s.score2)))
        .collect();
    let labels = read_labels(args.labels.as_deref(), model.k())?;

    let theta_all = lda::infer_all(&model, &docs, args.infer_sweeps, args.seed)?;
    let mut theta = Vec::new();
    let mut revisions = Vec::new();
    let (mut score1, mut score2) = (Vec::new(), Vec::new());
    for (doc, row) in docs.iter().zip(theta_all) {
        let Some(&(s1, s2)) = scores.get(&doc.editor_id) else {
            log::debug!("{}: no scores, left out of validation", doc.editor_id);
            continue;
        };
        theta.push(row);
        revisions.push(grouped.remove(&doc.editor_id).unwrap_or_default());
        score1.push(s1);
        score2.push(s2);
    }

    let report = validate(&theta, &revisions, &score1, &score2, &labels, args.normalize)?;
    write_atomic(&args.out, to_json_pretty(&report).as_bytes())?;
    print!("{}", render_report(&report)?);
    Ok(())
}

fn run_synth(args: &SynthArgs) -> Result<()> {
    let config = SynthConfig {
        k: args.k,
        docs: args.docs,
        mean_len: args.mean_len,
        alpha: args.alpha,
        seed: args.seed,
    };
    let (docs, truth) = synthesize(&config)?;
    write_atomic(&args.out, to_json_pretty(&DocsFile::new(docs)).as_bytes())?;
    if let Some(path) = &args.truth {
        write_atomic(path, to_json_pretty(&truth).as_bytes())?;
    }
    Ok(())
}

fn run_report(args: &ReportArgs) -> Result<()> {
    let report: ValidationReport = serde_json::from_str(&read(&args.report)?)
        .map_err(|e| Error::format("report file", e))?;
    let text = render_report(&report)?;
    match &args.out {
        Some(path) => write_atomic(path, text.as_bytes()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// `***` below 0.001, `**` below 0.01, `*` below 0.05.
pub fn significance_stars(p: f64) -> &'static str {
    if p < 0.001 {
        "***"
    } else if p < 0.01 {
        "**"
    } else if p < 0.05 {
        "*"
    } else {
        ""
    }
}

/// `r(p)` to three decimals.
pub fn format_corr(r: f64, p: f64) -> String {
    format!("{r:.3}({p:.3})")
}

/// Plain-text purpose and role tables.
pub fn render_report(report: &ValidationReport) -> Result<String> {
    if report.role_partial.is_empty() {
        return Err(Error::format("report", "role table is empty; a report needs K >= 1 roles"));
    }
    let mut out = String::new();
    let _ = writeln!(out, "Purpose R^2 (edit counts regressed on role probabilities), N={}", report.n);
    let _ = writeln!(out, "{:<14} R^2", "Purpose");
    for row in &report.purpose_r2 {
        let _ = writeln!(
            out,
            "{:<14} {:.3}{}",
            row.purpose.as_str(),
            row.r_squared,
            significance_stars(row.p_value)
        );
    }
    for skipped in &report.skipped_purposes {
        let _ = writeln!(out, "{:<14} skipped: {}", skipped.purpose.as_str(), skipped.reason);
    }
    let _ = writeln!(out, "(*** p<.001, ** p<.01, * p<.05)");
    let _ = writeln!(out);
    let _ = writeln!(out, "Role partial correlation with Score2 controlling Score1, N={}", report.n);
    let _ = writeln!(out, "{:<20} Corr(p-value)", "Role");
    for row in &report.role_partial {
        let cell = match (row.r, row.p_value) {
            (Some(r), Some(p)) => format_corr(r, p),
            _ => format!("n/a ({})", row.flag.as_deref().unwrap_or("not computed")),
        };
        let _ = writeln!(out, "{:<20} {}", row.label, cell);
    }
    match &report.score_corr {
        Some(c) => {
            let _ = writeln!(out, "Score1 vs Score2: {}", format_corr(c.r, c.p_value));
        }
        None => {
            let _ = writeln!(out, "Score1 vs Score2: n/a");
        }
    }
    Ok(out)
}

fn init_logging(level: Option<&str>) {
    let env = env_logger::Env::new().filter_or("REVROLES_LOG", "warn");
    let mut builder = env_logger::Builder::from_env(env);
    if let Some(level) = level {
        builder.parse_filters(level);
    }
    let _ = builder.try_init();
}

pub fn run(config: &RunConfig) -> Result<()> {
    match &config.command {
        Command::Align(a) => run_align(a),
        Command::Encode(a) => run_encode(a),
        Command::Train(a) => run_train(a),
        Command::Sweep(a) => run_sweep(a),
        Command::Topics(a) => run_topics(a),
        Command::Infer(a) => run_infer(a),
        Command::Validate(a) => run_validate(a),
        Command::Synth(a) => run_synth(a),
        Command::Report(a) => run_report(a),
    }
}

/// Parses `args`, runs the command, and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let config = match RunConfig::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    init_logging(config.log_level.as_deref());
    match run(&config) {
        Ok(()) => 0,
        Err(e) => {
            let message = e.to_string().replace(['\n', '\r'], " ");
            eprintln!("error[{}]: {message}", e.kind());
            1
        }
    }
}
