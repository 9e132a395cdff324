use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use stylemill_core::eval::{
    compare_methods, cross_validate, evaluate, paired_t_test, ratio_sweep, CompareSpec, CvOptions, Metric,
    ProtocolOptions,
};
use stylemill_core::features::build_profiles;
use stylemill_core::learners::{fit, Schema};
use stylemill_core::sampling::{split_labeled_unlabeled, SplitSpec};
use stylemill_core::semisup::{self_train, tri_train, LabelingConfig, TriTrainModel, TriTrainOptions};
use stylemill_core::synth::{generate, SynthSpec};
use stylemill_core::{Dimension, ModelKind, TrainConfig, TrainedModel};

use crate::error::{Error, Result};
use crate::ingest::{remove_incomplete_users, write_canonical, ParseOptions};
use crate::pipeline::{rerun, run_pipeline, PipelineConfig, RunStatus, MANIFEST_FILE};
use crate::report::{chart_for, read_report, render_svg, report_json, to_table, write_report, ChartKind, Report};
use crate::store;

#[derive(Debug, Parser)]
#[command(name = "stylemill", version, about = "Learning-style detection from LMS event logs")]
pub struct Cli {
    /// Seed for every random choice (default 0, or the config's seed).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Learning-style dimension (processing, input, understanding, perception).
    #[arg(long, global = true, value_parser = parse_dimension)]
    pub dimension: Option<Dimension>,
    /// Output directory for commands that write several files.
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

fn parse_dimension(s: &str) -> std::result::Result<Dimension, String> {
    s.parse().map_err(|e: stylemill_core::Error| e.to_string())
}

fn parse_model(s: &str) -> std::result::Result<ModelKind, String> {
    ModelKind::parse(s).map_err(|e| e.to_string())
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Clean a log export into the canonical five-column event file.
    Ingest(IngestArgs),
    /// Build the feature dataset from canonical events and ILS answers.
    Features(FeaturesArgs),
    /// Split a dataset into labeled and unlabeled pools for one dimension.
    Split(SplitArgs),
    /// Fit one classifier on the labeled rows of a dataset.
    Train(TrainArgs),
    /// One-pass self-training: labeling SVM, self-taught labels, final model.
    Selftrain(SelftrainArgs),
    /// Tri-training with three copies of a learner.
    Tritrain(TritrainArgs),
    /// k-fold cross-validation, or scoring of a saved model.
    Eval(EvalArgs),
    /// Baseline and self-training accuracy across labeled ratios.
    Sweep(SweepArgs),
    /// Supervised vs self-training vs tri-training with paired t-tests.
    Compare(CompareArgs),
    /// Paired t-test of two value lists.
    Ttest(TtestArgs),
    /// Generate a synthetic dataset with known poles.
    Synth(SynthArgs),
    /// Render a report as JSON, a flat table or an SVG chart.
    Report(ReportArgs),
    /// Run the whole pipeline from a config file.
    Run(RunArgs),
    /// Repeat a recorded run and check that every output is identical.
    Rerun(RerunArgs),
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// JSON object mapping extra header names to canonical fields.
    #[arg(long)]
    pub aliases: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    pub min_events: usize,
    /// Fail on the first malformed row.
    #[arg(long)]
    pub strict: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct FeaturesArgs {
    #[arg(long)]
    pub events: PathBuf,
    /// Mapping rules (JSON); the bundled default when omitted.
    #[arg(long)]
    pub mapping: Option<PathBuf>,
    /// ILS answers; every student is unlabeled when omitted.
    #[arg(long)]
    pub ils: Option<PathBuf>,
    /// Dataset file: `.json`, or `.csv` for a matrix plus label sidecar.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SplitArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    #[arg(long)]
    pub ratio: f64,
    #[arg(long)]
    pub no_stratify: bool,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    #[arg(long, value_parser = parse_model, default_value = "svm")]
    pub model: ModelKind,
    /// Learner hyperparameters (JSON TrainConfig).
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SelftrainArgs {
    #[arg(long)]
    pub labeled: PathBuf,
    #[arg(long)]
    pub unlabeled: PathBuf,
    /// Final model trained on L plus the self-taught rows (required).
    #[arg(long = "final", value_parser = parse_model)]
    pub final_kind: ModelKind,
    /// Final-model hyperparameters (JSON TrainConfig).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Labeling SVM settings (JSON LabelingConfig).
    #[arg(long)]
    pub labeling_config: Option<PathBuf>,
    /// Train the labeling SVM on all of L instead of a balanced sample.
    #[arg(long)]
    pub no_balance: bool,
}

#[derive(Debug, Args)]
pub struct TritrainArgs {
    #[arg(long)]
    pub labeled: PathBuf,
    #[arg(long)]
    pub unlabeled: PathBuf,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub no_bootstrap: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    /// Under-sample each training part.
    #[arg(long)]
    pub balance: bool,
    /// Score this saved model on the labeled rows instead of cross-validating.
    #[arg(long)]
    pub model_file: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    #[arg(long, value_delimiter = ',', default_values_t = [0.1, 0.2, 0.5, 0.75, 1.0])]
    pub ratios: Vec<f64>,
    #[arg(long, value_delimiter = ',', value_parser = parse_model, default_value = "svm")]
    pub models: Vec<ModelKind>,
    /// Seeds (comma-separated); the global seed when omitted.
    #[arg(long, value_delimiter = ',')]
    pub seeds: Vec<u64>,
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    #[arg(long, default_value_t = 0.1)]
    pub ratio: f64,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, value_delimiter = ',')]
    pub seeds: Vec<u64>,
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    #[arg(long)]
    pub no_tri: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TtestArgs {
    #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
    pub a: Vec<f64>,
    #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
    pub b: Vec<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// SynthSpec JSON; the built-in spec when omitted.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub truth: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ReportFormat {
    Json,
    Csv,
    Svg,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(long)]
    pub run: PathBuf,
    #[arg(long, value_enum, default_value = "json")]
    pub format: ReportFormat,
    #[arg(long, value_enum)]
    pub chart: Option<ChartKind>,
    /// Output file; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub config: PathBuf,
}

#[derive(Debug, Args)]
pub struct RerunArgs {
    #[arg(long)]
    pub manifest: PathBuf,
}

fn train_config(path: Option<&Path>) -> Result<TrainConfig> {
    let config: TrainConfig = match path {
        Some(p) => store::read_plain_json(p)?,
        None => TrainConfig::default(),
    };
    config.validate()?;
    Ok(config)
}

fn need_dimension(cli: &Cli) -> Result<Dimension> {
    cli.dimension
        .ok_or_else(|| Error::Config("--dimension is required for this command".into()))
}

fn need_out_dir(cli: &Cli) -> Result<PathBuf> {
    cli.out_dir
        .clone()
        .ok_or_else(|| Error::Config("--out-dir is required for this command".into()))
}

fn seeds_or(list: &[u64], seed: u64) -> Vec<u64> {
    if list.is_empty() {
        vec![seed]
    } else {
        list.to_vec()
    }
}

fn print_or_write(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => store::write_text(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_unlabeled_pair(
    labeled: &Path,
    unlabeled: &Path,
) -> Result<(stylemill_core::LearningDataset, stylemill_core::LearningDataset)> {
    Ok((store::read_dataset(labeled)?, store::read_dataset(unlabeled)?))
}

/// Runs one parsed command.
pub fn execute(cli: &Cli) -> Result<()> {
    let seed = cli.seed.unwrap_or(0);
    match &cli.command {
        Command::Ingest(a) => {
            let mut options = ParseOptions {
                strict: a.strict,
                ..ParseOptions::default()
            };
            if let Some(p) = &a.aliases {
                let extra: BTreeMap<String, String> = store::read_plain_json(p)?;
                options = options.with_aliases(&extra)?;
            }
            let (records, mut report) = store::read_events(&a.input, &options)?;
            let (records, removed) = remove_incomplete_users(records, a.min_events);
            report.users_removed_incomplete = removed.users_removed_incomplete;
            write_canonical(&records, store::create(&a.out)?)?;
            print!("{}", store::to_json_string(&report));
        }
        Command::Features(a) => {
            let (events, _) = store::read_events(&a.events, &ParseOptions::default())?;
            let mapping = store::load_mapping(a.mapping.as_deref())?;
            let profiles = build_profiles(&events, &mapping)?;
            let labels = match &a.ils {
                Some(p) => store::read_ils(p)?,
                None => Vec::new(),
            };
            let (dataset, rejects) =
                stylemill_core::dataset::assemble_dataset(mapping.feature_names.clone(), &profiles, &labels)?;
            store::write_dataset(&a.out, &dataset)?;
            println!("students: {}", dataset.len());
            for dim in Dimension::ALL {
                let (first, second) = dataset.class_counts(dim);
                println!(
                    "{}: {} labeled ({} {}, {} {}), {} unlabeled",
                    dim.name(),
                    first + second,
                    first,
                    dim.pole_name(stylemill_core::Pole::First),
                    second,
                    dim.pole_name(stylemill_core::Pole::Second),
                    dataset.len() - first - second
                );
            }
            if !rejects.rejected_user_ids.is_empty() {
                println!("labels for unknown users: {}", rejects.rejected_user_ids.join(", "));
            }
        }
        Command::Split(a) => {
            let dim = need_dimension(cli)?;
            let dir = need_out_dir(cli)?;
            let ds = store::read_dataset(&a.dataset)?;
            let spec = SplitSpec {
                labeled_ratio: a.ratio,
                seed,
                stratified: !a.no_stratify,
            };
            let (l, u, withheld) = split_labeled_unlabeled(&ds, dim, &spec)?;
            store::write_json(&dir.join("labeled.json"), "dataset", &l)?;
            store::write_json(&dir.join("unlabeled.json"), "dataset", &u)?;
            store::write_json(&dir.join("withheld.json"), "withheld_labels", &withheld)?;
            println!(
                "L: {} rows, U: {} rows, withheld labels: {}",
                l.len(),
                u.len(),
                withheld.labels.len()
            );
        }
        Command::Train(a) => {
            let dim = need_dimension(cli)?;
            let ds = store::read_dataset(&a.dataset)?;
            let config = train_config(a.model.config.as_deref())?.reseeded(seed);
            let (x, y) = ds.labeled_xy(dim);
            let schema = Schema::new(ds.feature_names.clone(), Some(dim));
            let model = fit(a.model.model, &config, &schema, &x, &y)?;
            store::write_json(&a.out, "model", &model)?;
            let acc = stylemill_core::learners::training_accuracy(&model, &x, &y)?;
            println!(
                "trained {} on {} rows; training accuracy {acc}",
                a.model.model.short_name(),
                x.len()
            );
            if !model.converged {
                eprintln!("warning: solver stopped at its iteration budget");
            }
        }
        Command::Selftrain(a) => {
            let dim = need_dimension(cli)?;
            let dir = need_out_dir(cli)?;
            let (l, u) = load_unlabeled_pair(&a.labeled, &a.unlabeled)?;
            let mut labeling: LabelingConfig = match &a.labeling_config {
                Some(p) => store::read_plain_json(p)?,
                None => LabelingConfig::default(),
            };
            labeling.seed = seed;
            if a.no_balance {
                labeling.balance = false;
            }
            let config = train_config(a.config.as_deref())?.reseeded(seed);
            let run = self_train(&l, &u, dim, &labeling, a.final_kind, &config)?;
            store::write_json(&dir.join("labeling_model.json"), "model", &run.labeling_model)?;
            store::write_json(&dir.join("final_model.json"), "model", &run.final_model)?;
            store::write_json(&dir.join("d_prime.json"), "dataset", &run.d_prime)?;
            store::write_json(&dir.join("provenance.json"), "provenance", &run.provenance)?;
            println!(
                "L: {}, U: {}, D': {}",
                run.counts.labeled, run.counts.unlabeled, run.counts.combined
            );
        }
        Command::Tritrain(a) => {
            let dim = need_dimension(cli)?;
            let (l, u) = load_unlabeled_pair(&a.labeled, &a.unlabeled)?;
            let config = train_config(a.model.config.as_deref())?;
            let mut opts = TriTrainOptions::uniform(a.model.model, config, seed);
            opts.bootstrap = !a.no_bootstrap;
            let model = tri_train(&l, &u, dim, &opts)?;
            store::write_json(&a.out, "tri_model", &model)?;
            println!("rounds: {}, pseudo-labeled: {:?}", model.rounds, model.pseudo_labeled);
        }
        Command::Eval(a) => {
            let dim = need_dimension(cli)?;
            let ds = store::read_dataset(&a.dataset)?;
            if let Some(path) = &a.model_file {
                let (x, y) = ds.labeled_xy(dim);
                let (cm, m) = match store::peek_kind(path)?.as_str() {
                    "tri_model" => evaluate(&store::read_json::<TriTrainModel>(path, "tri_model")?, &x, &y)?,
                    _ => evaluate(&store::read_json::<TrainedModel>(path, "model")?, &x, &y)?,
                };
                let text = store::to_json_string(&serde_json::json!({ "confusion": cm, "metrics": m }));
                return print_or_write(a.out.as_deref(), &text);
            }
            let config = train_config(a.model.config.as_deref())?;
            let options = CvOptions {
                k: a.k,
                seed,
                stratified: true,
                balance_training: a.balance,
            };
            let report = cross_validate(&ds, dim, a.model.model, &config, &options)?;
            print_summary(&report.summary);
            if let Some(out) = &a.out {
                write_report(out, &Report::Cv(report))?;
            }
        }
        Command::Sweep(a) => {
            let dim = need_dimension(cli)?;
            let ds = store::read_dataset(&a.dataset)?;
            let protocol = ProtocolOptions {
                folds: a.k,
                final_config: train_config(a.config.as_deref())?,
                ..ProtocolOptions::default()
            };
            let report = ratio_sweep(&ds, dim, &a.ratios, &a.models, &seeds_or(&a.seeds, seed), &protocol)?;
            for row in &report.rows {
                println!(
                    "ratio {} {} seed {}: baseline {} self-training {}",
                    row.ratio,
                    row.final_kind.short_name(),
                    row.seed,
                    fmt_opt(row.baseline.mean(Metric::Accuracy)),
                    fmt_opt(row.self_training.mean(Metric::Accuracy))
                );
            }
            write_report(&a.out, &Report::Sweep(report))?;
        }
        Command::Compare(a) => {
            let dim = need_dimension(cli)?;
            let ds = store::read_dataset(&a.dataset)?;
            let spec = CompareSpec {
                ratio: a.ratio,
                final_kind: a.model.model,
                seeds: seeds_or(&a.seeds, seed),
                include_tri_training: !a.no_tri,
                protocol: ProtocolOptions {
                    folds: a.k,
                    final_config: train_config(a.model.config.as_deref())?,
                    ..ProtocolOptions::default()
                },
            };
            let report = compare_methods(&ds, dim, &spec)?;
            let report = Report::Comparison(report);
            print!("{}", to_table(&report)?);
            write_report(&a.out, &report)?;
        }
        Command::Ttest(a) => {
            let r = paired_t_test(&a.a, &a.b)?;
            println!("t = {}, df = {}, p = {}", r.t_value, r.df, r.p_value);
            if let Some(out) = &a.out {
                write_report(out, &Report::TTest(r))?;
            }
        }
        Command::Synth(a) => {
            let mut spec: SynthSpec = match &a.spec {
                Some(p) => store::read_plain_json(p)?,
                None => SynthSpec::default(),
            };
            if let Some(s) = cli.seed {
                spec.seed = s;
            }
            if let Some(n) = a.n {
                spec.n_students = n;
            }
            if let Some(d) = cli.dimension {
                spec.dimension = d;
            }
            let g = generate(&spec)?;
            store::write_dataset(&a.out, &g.dataset)?;
            store::write_json(&a.truth, "withheld_labels", &g.truth)?;
            println!(
                "{} students, {} labeled for {}",
                g.dataset.len(),
                g.dataset.labeled_count(spec.dimension),
                spec.dimension.name()
            );
        }
        Command::Report(a) => {
            let report = read_report(&a.run)?;
            let text = match a.format {
                ReportFormat::Json => report_json(&report),
                ReportFormat::Csv => to_table(&report)?,
                ReportFormat::Svg => render_svg(&chart_for(&report, a.chart)?),
            };
            print_or_write(a.out.as_deref(), &text)?;
        }
        Command::Run(a) => {
            let mut config = PipelineConfig::load(&a.config)?;
            if let Some(s) = cli.seed {
                config.seed = s;
            }
            if let Some(d) = cli.dimension {
                config.dimensions = vec![d];
            }
            if let Some(d) = &cli.out_dir {
                config.paths.out_dir = d.clone();
            }
            let manifest = run_pipeline(&config)?;
            println!(
                "wrote {} files and {} to {}",
                manifest.outputs.len(),
                MANIFEST_FILE,
                config.paths.out_dir.display()
            );
        }
        Command::Rerun(a) => {
            let outcome = rerun(&a.manifest, cli.out_dir.as_deref())?;
            debug_assert_eq!(outcome.manifest.status, RunStatus::Ok);
            if outcome.mismatched.is_empty() {
                println!("all {} outputs identical", outcome.manifest.outputs.len());
            } else {
                return Err(Error::Data(format!(
                    "outputs differ from the recorded run: {}",
                    outcome.mismatched.join(", ")
                )));
            }
        }
    }
    Ok(())
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.4}")).unwrap_or_else(|| "n/a".into())
}

fn print_summary(summary: &BTreeMap<Metric, stylemill_core::eval::MetricSummary>) {
    for (m, s) in summary {
        println!(
            "{:<12} mean {:.4}  sd {}  [{:.4}, {:.4}]",
            m.name(),
            s.mean,
            s.stddev.map(|v| format!("{v:.4}")).unwrap_or_else(|| "n/a".into()),
            s.min,
            s.max
        );
    }
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
