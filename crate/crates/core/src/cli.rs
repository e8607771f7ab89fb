//! `playclass` command line: ingest, train, predict, evaluate.
//!
//! Exit status is 0 on success, 1 on a data or contract error (reported as a
//! single `error[CODE]: message` line on stderr) and 2 on a usage error.

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::classifier::{NbVariant, DEFAULT_ALPHA};
use crate::corpus::{
    apply_filter_profile, compose_document, filter_top_developers, load_raw_csv, read_apps_csv,
    AppFilter, CategoryScope, Corpus, CsvSchema, FilterProfile, DEFAULT_DROPPED_CATEGORIES,
    DEFAULT_MIN_DESCRIPTION_WORDS,
};
use crate::error::{Error, Result};
use crate::evaluation::{
    cross_validate, default_train_sizes, holdout, learning_curve, rfe_cv, write_curve_csv,
    Dataset, SplitPlan, DEFAULT_CURVE_ITERATIONS, DEFAULT_STEP_FRACTION, DEFAULT_TEST_FRACTION,
};
use crate::features::{vectorize_refs, WeightMode, DEFAULT_MAX_DF, DEFAULT_MIN_DF};
use crate::model_file::{load_model, save_model};
use crate::pipeline::{PipelineConfig, TrainedPipeline};
use crate::textproc::{default_stop_words, StopWordList};

pub const DEFAULT_SEED: u64 = 42;
const DEFAULT_KS: [usize; 2] = [2, 10];
const DEFAULT_RFE_K: usize = 5;

#[derive(Debug, Parser)]
#[command(name = "playclass", version, about = "Naive Bayes app-category classifier")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Filter a raw app-metadata CSV into a labeled corpus file.
    Ingest(IngestArgs),
    /// Fit a vocabulary and classifier on a corpus file.
    Train(TrainArgs),
    /// Rank categories for new app text.
    Predict(PredictArgs),
    /// Run a holdout, k-fold, RFE or learning-curve evaluation.
    Evaluate(EvaluateArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ProfileArg {
    All,
    Filtered,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ScopeArg {
    All,
    Games,
    Grouped,
    Other,
}

impl From<ScopeArg> for CategoryScope {
    fn from(s: ScopeArg) -> Self {
        match s {
            ScopeArg::All => CategoryScope::AllCategories,
            ScopeArg::Games => CategoryScope::OnlyGameApps,
            ScopeArg::Grouped => CategoryScope::GroupedGameApps,
            ScopeArg::Other => CategoryScope::OnlyOtherCategories,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum VariantArg {
    Multinomial,
    Bernoulli,
}

impl From<VariantArg> for NbVariant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Multinomial => NbVariant::Multinomial,
            VariantArg::Bernoulli => NbVariant::Bernoulli,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum WeightingArg {
    Tfidf,
    Count,
    Binary,
}

impl From<WeightingArg> for WeightMode {
    fn from(w: WeightingArg) -> Self {
        match w {
            WeightingArg::Tfidf => WeightMode::TfIdf,
            WeightingArg::Count => WeightMode::Count,
            WeightingArg::Binary => WeightMode::Binary,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum EvalArg {
    Holdout,
    Kfold,
    Rfe,
    Curve,
}

impl EvalArg {
    fn name(&self) -> &'static str {
        match self {
            EvalArg::Holdout => "holdout",
            EvalArg::Kfold => "kfold",
            EvalArg::Rfe => "rfe",
            EvalArg::Curve => "curve",
        }
    }
}

#[derive(Debug, Args)]
struct IngestArgs {
    /// Raw app-metadata CSV.
    #[arg(long)]
    input: PathBuf,
    /// Corpus file to write.
    #[arg(long)]
    output: PathBuf,
    #[arg(long, value_enum, default_value = "all")]
    profile: ProfileArg,
    #[arg(long, value_enum, default_value = "all")]
    scope: ScopeArg,
    /// Minimum description length in words (filtered profile).
    #[arg(long, default_value_t = DEFAULT_MIN_DESCRIPTION_WORDS)]
    min_desc_words: usize,
    /// Category removed by the filtered profile. Repeatable; replaces the
    /// default list when given.
    #[arg(long = "drop-category")]
    drop_category: Vec<String>,
}

#[derive(Debug, Args)]
struct ModelArgs {
    #[arg(long, value_enum, default_value = "multinomial")]
    variant: VariantArg,
    /// Feature weighting; defaults to tfidf (multinomial) or binary (bernoulli).
    #[arg(long, value_enum)]
    weighting: Option<WeightingArg>,
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    alpha: f64,
    #[arg(long, default_value_t = DEFAULT_MIN_DF)]
    min_df: f64,
    #[arg(long, default_value_t = DEFAULT_MAX_DF)]
    max_df: f64,
    /// Stop-word file (one word per line); defaults to the built-in list.
    #[arg(long)]
    stop_words: Option<PathBuf>,
}

impl ModelArgs {
    fn config(&self) -> Result<PipelineConfig> {
        let variant = NbVariant::from(self.variant);
        let cfg = PipelineConfig {
            variant,
            weighting: self
                .weighting
                .map(WeightMode::from)
                .unwrap_or(variant.default_weighting()),
            alpha: self.alpha,
            min_df: self.min_df,
            max_df: self.max_df,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

fn stop_words(path: &Option<PathBuf>) -> Result<StopWordList> {
    match path {
        Some(p) => StopWordList::from_file(p),
        None => Ok(default_stop_words()),
    }
}

#[derive(Debug, Args)]
struct TrainArgs {
    /// Corpus file written by `ingest`.
    #[arg(long)]
    input: PathBuf,
    /// Model file to write.
    #[arg(long)]
    output: PathBuf,
    #[command(flatten)]
    model: ModelArgs,
    /// Also write the vocabulary as `token TAB index TAB df`.
    #[arg(long)]
    vocab_out: Option<PathBuf>,
    /// Also write the training matrix as `doc TAB feature TAB weight`.
    #[arg(long)]
    matrix_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    /// One app's text to categorize.
    #[arg(long, conflicts_with = "input", required_unless_present = "input")]
    text: Option<String>,
    /// CSV of apps to categorize (needs AppName and Description columns).
    #[arg(long)]
    input: Option<PathBuf>,
    /// Write results here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u32).range(1..))]
    top_k: u32,
    /// Must match the list the model was trained with.
    #[arg(long)]
    stop_words: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    /// Corpus file written by `ingest`.
    #[arg(long)]
    input: PathBuf,
    /// Directory for report files.
    #[arg(long)]
    output: PathBuf,
    #[arg(long, value_enum, default_value = "holdout")]
    eval: EvalArg,
    #[command(flatten)]
    model: ModelArgs,
    /// Fold count. Repeatable for kfold (default 2 and 10); rfe uses the
    /// first value (default 5).
    #[arg(long, value_parser = clap::value_parser!(u64).range(2..))]
    k: Vec<u64>,
    #[arg(long, default_value_t = DEFAULT_TEST_FRACTION)]
    test_fraction: f64,
    #[arg(long, default_value_t = DEFAULT_STEP_FRACTION)]
    step_fraction: f64,
    /// Shuffle-split iterations for the learning curve.
    #[arg(long, default_value_t = DEFAULT_CURVE_ITERATIONS)]
    splits: usize,
    #[arg(long, env = "PLAYCLASS_SEED", default_value_t = DEFAULT_SEED)]
    seed: u64,
}

/// Parses `std::env::args` and runs; returns the process exit status.
pub fn main() -> i32 {
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .try_init();
    run(std::env::args_os())
}

pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let result = match cli.command {
        Command::Ingest(a) => cmd_ingest(&a, &mut out),
        Command::Train(a) => cmd_train(&a, &mut out),
        Command::Predict(a) => cmd_predict(&a, &mut out),
        Command::Evaluate(a) => cmd_evaluate(&a, &mut out),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            let msg = e.to_string().replace(['\n', '\r'], " ");
            eprintln!("error[{}]: {msg}", e.code());
            1
        }
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).map_err(|e| Error::io(path, e))?,
    ))
}

fn stdout_err(e: io::Error) -> Error {
    Error::io("<stdout>", e)
}

fn cmd_ingest(a: &IngestArgs, out: &mut dyn Write) -> Result<()> {
    let raw = load_raw_csv(&a.input)?;
    let top = filter_top_developers(&raw.records);
    let mut profile = FilterProfile::new(
        match a.profile {
            ProfileArg::All => AppFilter::AllApps,
            ProfileArg::Filtered => AppFilter::FilteredApps,
        },
        a.scope.into(),
    );
    profile.min_description_words = a.min_desc_words;
    profile.dropped_categories = if a.drop_category.is_empty() {
        DEFAULT_DROPPED_CATEGORIES.iter().map(|s| s.to_string()).collect()
    } else {
        a.drop_category.iter().cloned().collect::<BTreeSet<_>>()
    };
    let corpus = apply_filter_profile(&top, &profile)?;
    corpus.save(&a.output)?;

    (|| -> io::Result<()> {
        writeln!(out, "rows read\t{}", raw.rows_read)?;
        writeln!(out, "rows skipped\t{}", raw.skipped.len())?;
        for (kind, n) in raw.skip_counts() {
            writeln!(out, "  {kind}\t{n}")?;
        }
        writeln!(out, "top-developer apps\t{}", top.len())?;
        writeln!(out, "apps retained\t{}", corpus.len())?;
        writeln!(out, "categories\t{}", corpus.categories().len())?;
        for (label, n) in corpus.category_counts() {
            writeln!(out, "{label}\t{n}")?;
        }
        Ok(())
    })()
    .map_err(stdout_err)
}

fn cmd_train(a: &TrainArgs, out: &mut dyn Write) -> Result<()> {
    let config = a.model.config()?;
    let stops = stop_words(&a.model.stop_words)?;
    let corpus = Corpus::load(&a.input)?;
    let texts: Vec<&str> = corpus.documents().iter().map(|d| d.text.as_str()).collect();
    let labels = corpus.labels();
    let pipeline = TrainedPipeline::train(&config, &texts, &labels, stops)?;
    save_model(&pipeline, &a.output)?;

    if let Some(path) = &a.vocab_out {
        let mut w = create(path)?;
        pipeline.vocab().write_tsv(&mut w).map_err(|e| Error::io(path, e))?;
    }
    if let Some(path) = &a.matrix_out {
        let docs = corpus.tokenize(&pipeline.stop_words);
        let refs: Vec<_> = docs.iter().collect();
        let matrix = vectorize_refs(&refs, pipeline.vocab(), config.weighting);
        let mut w = create(path)?;
        matrix.write_triplets(&mut w).map_err(|e| Error::io(path, e))?;
    }

    let m = pipeline.model();
    let counts = corpus.category_counts();
    (|| -> io::Result<()> {
        writeln!(out, "variant\t{}", m.variant.as_str())?;
        writeln!(out, "weighting\t{}", m.weighting.as_str())?;
        writeln!(out, "documents\t{}", corpus.len())?;
        writeln!(out, "classes\t{}", m.n_classes())?;
        writeln!(out, "vocabulary\t{}", pipeline.vocab().len())?;
        writeln!(out, "class\tdocuments\tprior")?;
        for (c, lp) in m.classes.iter().zip(&m.log_prior) {
            writeln!(out, "{c}\t{}\t{:.6}", counts[c], lp.exp())?;
        }
        Ok(())
    })()
    .map_err(stdout_err)
}

fn cmd_predict(a: &PredictArgs, out: &mut dyn Write) -> Result<()> {
    let pipeline = load_model(&a.model)?;
    if let Some(path) = &a.stop_words {
        pipeline.check_stop_words(&StopWordList::from_file(path)?)?;
    }
    let apps: Vec<(String, String)> = match (&a.text, &a.input) {
        (Some(t), _) => vec![("text".to_string(), t.clone())],
        (None, Some(path)) => {
            let file = File::open(path).map_err(|e| Error::io(path, e))?;
            let load = read_apps_csv(io::BufReader::new(file), CsvSchema::Unlabeled)?;
            for (row, reason) in &load.skipped {
                log::warn!("{}: row {row} skipped: {reason}", path.display());
            }
            load.records
                .iter()
                .map(|r| (r.app_name.clone(), compose_document(r)))
                .collect()
        }
        (None, None) => return Err(Error::contract("predict needs --text or --input")),
    };

    let mut sink: Box<dyn Write + '_> = match &a.output {
        Some(p) => Box::new(create(p)?),
        None => Box::new(&mut *out),
    };
    let mut w = csv::Writer::from_writer(&mut sink);
    w.write_record(["app", "rank", "label", "log_score", "posterior"])?;
    for (name, text) in &apps {
        let pred = pipeline.predict_text(text)?;
        let post = pred.posteriors();
        for (rank, ((label, score), (_, p))) in pred
            .ranking
            .iter()
            .zip(&post)
            .take(a.top_k as usize)
            .enumerate()
        {
            w.write_record([
                name.clone(),
                (rank + 1).to_string(),
                label.clone(),
                format!("{score:.6}"),
                format!("{p:.6}"),
            ])?;
        }
    }
    w.flush().map_err(stdout_err)?;
    drop(w);
    sink.flush().map_err(stdout_err)
}

fn cmd_evaluate(a: &EvaluateArgs, out: &mut dyn Write) -> Result<()> {
    let config = a.model.config()?;
    let stops = stop_words(&a.model.stop_words)?;
    let corpus = Corpus::load(&a.input)?;
    let data = Dataset::from_corpus(&corpus, &stops);
    fs::create_dir_all(&a.output).map_err(|e| Error::io(&a.output, e))?;

    let header = format!(
        "# playclass eval={} variant={} weighting={} alpha={} min_df={} max_df={} seed={}\n",
        a.eval.name(),
        config.variant.as_str(),
        config.weighting.as_str(),
        config.alpha,
        config.min_df,
        config.max_df,
        a.seed
    );
    let report_file = |name: &str| -> Result<(PathBuf, BufWriter<File>)> {
        let path = a.output.join(name);
        let mut w = create(&path)?;
        w.write_all(header.as_bytes()).map_err(|e| Error::io(&path, e))?;
        Ok((path, w))
    };
    let finish = |(path, mut w): (PathBuf, BufWriter<File>)| -> Result<()> {
        w.flush().map_err(|e| Error::io(&path, e))
    };
    let ks: Vec<usize> = a.k.iter().map(|&k| k as usize).collect();

    match a.eval {
        EvalArg::Holdout => {
            let r = holdout(&data, &config, &SplitPlan::holdout(a.test_fraction, a.seed))?;
            let mut f = report_file("confusion.csv")?;
            r.confusion.write_csv(&mut f.1)?;
            finish(f)?;
            let mut f = report_file("report.csv")?;
            r.report.write_csv(&mut f.1)?;
            finish(f)?;
            writeln!(
                out,
                "holdout accuracy {:.4} (train {}, test {}, seed {})",
                r.accuracy, r.n_train, r.n_test, a.seed
            )
            .map_err(stdout_err)?;
        }
        EvalArg::Kfold => {
            let ks = if ks.is_empty() { DEFAULT_KS.to_vec() } else { ks };
            let mut f = report_file("cv.csv")?;
            let mut w = csv::Writer::from_writer(&mut f.1);
            w.write_record(["k", "fold", "accuracy"])?;
            for &k in &ks {
                let r = cross_validate(&data, &config, &SplitPlan::kfold(k, a.seed))?;
                for (i, s) in r.fold_scores.iter().enumerate() {
                    w.write_record([k.to_string(), (i + 1).to_string(), format!("{s:.6}")])?;
                }
                w.write_record([k.to_string(), "mean".to_string(), format!("{:.6}", r.mean)])?;
                writeln!(out, "{k}-fold mean accuracy {:.4} (seed {})", r.mean, a.seed)
                    .map_err(stdout_err)?;
            }
            w.flush().map_err(|e| Error::io(&f.0, e))?;
            drop(w);
            finish(f)?;
        }
        EvalArg::Rfe => {
            let k = ks.first().copied().unwrap_or(DEFAULT_RFE_K);
            let points = rfe_cv(&data, &config, a.step_fraction, &SplitPlan::stratified(k, a.seed))?;
            let mut f = report_file("rfe.csv")?;
            write_curve_csv(&points, &mut f.1)?;
            finish(f)?;
            let best = points
                .iter()
                .fold(&points[0], |b, p| if p.mean > b.mean { p } else { b });
            writeln!(
                out,
                "rfe: {} points, best accuracy {:.4} with {} features (seed {})",
                points.len(),
                best.mean,
                best.x,
                a.seed
            )
            .map_err(stdout_err)?;
        }
        EvalArg::Curve => {
            let plan = SplitPlan::shuffle_split(a.splits, a.test_fraction, a.seed);
            let lc = learning_curve(&data, &config, &plan, &default_train_sizes())?;
            let mut f = report_file("learning_curve_train.csv")?;
            write_curve_csv(&lc.train, &mut f.1)?;
            finish(f)?;
            let mut f = report_file("learning_curve_test.csv")?;
            write_curve_csv(&lc.test, &mut f.1)?;
            finish(f)?;
            match lc.test.last() {
                Some(p) => writeln!(
                    out,
                    "learning curve: test accuracy {:.4} at {} training documents (seed {})",
                    p.mean, p.x, a.seed
                ),
                None => writeln!(out, "learning curve: no usable training sizes"),
            }
            .map_err(stdout_err)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(run(["playclass", "train", "--bogus"]), 2);
        assert_eq!(run(["playclass", "evaluate", "--input", "x", "--output", "y", "--k", "1"]), 2);
        assert_eq!(run(["playclass", "frobnicate"]), 2);
    }

    #[test]
    fn flag_parsing() {
        let cli = Cli::try_parse_from([
            "playclass", "evaluate", "--input", "c.tsv", "--output", "out", "--eval", "kfold",
            "--k", "2", "--k", "10", "--variant", "bernoulli", "--seed", "7",
        ])
        .unwrap();
        let Command::Evaluate(a) = cli.command else {
            panic!("wrong subcommand")
        };
        assert_eq!(a.k, vec![2, 10]);
        assert_eq!(a.seed, 7);
        assert_eq!(a.eval, EvalArg::Kfold);
        assert_eq!(a.model.config().unwrap().weighting, WeightMode::Binary);
    }

    #[test]
    fn zero_alpha_is_a_contract_error() {
        let cli = Cli::try_parse_from([
            "playclass", "train", "--input", "c", "--output", "m", "--alpha", "0",
        ])
        .unwrap();
        let Command::Train(a) = cli.command else {
            panic!("wrong subcommand")
        };
        assert!(matches!(a.model.config(), Err(Error::Contract(_))));
    }
}
