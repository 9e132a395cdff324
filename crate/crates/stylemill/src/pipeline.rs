//! End-to-end runs: config, stages, manifest and rerun.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use stylemill_core::dataset::assemble_dataset;
use stylemill_core::eval::{compare_methods, cross_validate, ratio_sweep, CompareSpec, CvOptions, ProtocolOptions};
use stylemill_core::features::build_profiles;
use stylemill_core::learners::{ModelKind, TrainConfig};
use stylemill_core::rng::derive_seed;
use stylemill_core::sampling::{split_labeled_unlabeled, under_sample_indices, SplitSpec};
use stylemill_core::semisup::{self_train, LabelingConfig};
use stylemill_core::{Dimension, LearningDataset, Pole};

use crate::error::{Error, Result};
use crate::ingest::{remove_incomplete_users, write_canonical, ParseOptions};
use crate::report::{emit_chart, to_table, write_report, DimensionReport, Report, RunSummary};
use crate::store;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Paths {
    /// Raw or canonical event log.
    pub events: PathBuf,
    /// ILS answer file.
    pub ils: PathBuf,
    /// Feature mapping; the bundled default when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mapping: Option<PathBuf>,
    /// Extra header aliases (JSON object header → field).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aliases: Option<PathBuf>,
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IngestConfig {
    pub min_events: usize,
    pub strict: bool,
}

impl Default for IngestConfig {
    fn default() -> Self {
        Self {
            min_events: 1,
            strict: false,
        }
    }
}

/// The model trained on `D′`. The kind has no default: it must be chosen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FinalModel {
    pub kind: ModelKind,
    #[serde(default)]
    pub config: TrainConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitConfig {
    /// Fraction of the ILS-labeled rows kept as `L`.
    pub labeled_ratio: f64,
    pub stratified: bool,
    /// Under-sample the labeled rows before the L/U split instead of
    /// balancing only the labeling SVM's training pool afterwards.
    pub balance_before_split: bool,
}

impl Default for SplitConfig {
    fn default() -> Self {
        Self {
            labeled_ratio: 1.0,
            stratified: true,
            balance_before_split: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    pub k: usize,
    /// Under-sample each CV training part.
    pub balance_cv: bool,
    /// Labeled ratios for the sweep; no sweep when empty.
    pub ratios: Vec<f64>,
    /// Final-model kinds for the sweep; the configured final model when empty.
    pub sweep_models: Vec<ModelKind>,
    /// Seeds for the sweep and the comparison; the run seed when empty.
    pub seeds: Vec<u64>,
    pub compare: bool,
    pub compare_ratio: f64,
    pub tri_training: bool,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            k: 10,
            balance_cv: false,
            ratios: Vec::new(),
            sweep_models: Vec::new(),
            seeds: Vec::new(),
            compare: false,
            compare_ratio: 0.1,
            tri_training: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum EmitFormat {
    Json,
    Csv,
    Svg,
}

fn all_dimensions() -> Vec<Dimension> {
    Dimension::ALL.to_vec()
}

fn default_emit() -> Vec<EmitFormat> {
    vec![EmitFormat::Json]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    /// Root seed; every random stream derives from it.
    pub seed: u64,
    pub paths: Paths,
    #[serde(default)]
    pub ingest: IngestConfig,
    #[serde(default = "all_dimensions")]
    pub dimensions: Vec<Dimension>,
    #[serde(default)]
    pub labeling: LabelingConfig,
    pub final_model: FinalModel,
    #[serde(default)]
    pub split: SplitConfig,
    #[serde(default)]
    pub eval: EvalConfig,
    #[serde(default = "default_emit")]
    pub emit: Vec<EmitFormat>,
}

impl PipelineConfig {
    /// Reads a config file; relative paths are taken relative to the file.
    pub fn load(path: &Path) -> Result<Self> {
        let mut config: PipelineConfig = store::read_plain_json(path).map_err(|e| match e {
            Error::Json { path, source } => Error::Config(format!("{}: {source}", path.display())),
            other => other,
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        let base = std::path::absolute(base).map_err(|e| Error::io(base, e))?;
        config.paths.resolve(&base);
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        let mut inputs = vec![("events", &self.paths.events), ("ils", &self.paths.ils)];
        if let Some(m) = &self.paths.mapping {
            inputs.push(("mapping", m));
        }
        if let Some(a) = &self.paths.aliases {
            inputs.push(("aliases", a));
        }
        for (what, p) in inputs {
            if !p.is_file() {
                return Err(Error::Config(format!("{what} file {} does not exist", p.display())));
            }
        }
        if self.dimensions.is_empty() {
            return Err(Error::Config("no dimensions selected".into()));
        }
        if self.eval.k < 2 {
            return Err(Error::Config(format!("eval.k must be at least 2, got {}", self.eval.k)));
        }
        SplitSpec::new(self.split.labeled_ratio, 0).validate()?;
        for &r in &self.eval.ratios {
            SplitSpec::new(r, 0).validate()?;
        }
        if self.eval.compare {
            SplitSpec::new(self.eval.compare_ratio, 0).validate()?;
        }
        self.final_model.config.validate()?;
        Ok(())
    }

    fn eval_seeds(&self) -> Vec<u64> {
        if self.eval.seeds.is_empty() {
            vec![self.seed]
        } else {
            self.eval.seeds.clone()
        }
    }
}

impl Paths {
    fn resolve(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.events);
        fix(&mut self.ils);
        fix(&mut self.out_dir);
        if let Some(p) = self.mapping.as_mut() {
            fix(p);
        }
        if let Some(p) = self.aliases.as_mut() {
            fix(p);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputFile {
    /// Relative to the output directory.
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Ok,
    Failed { stage: String, error: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config: PipelineConfig,
    /// Input name → SHA-256 of its bytes.
    pub inputs: BTreeMap<String, String>,
    /// Crate name → version, plus the file schema version.
    pub versions: BTreeMap<String, String>,
    /// Stage → wall time in milliseconds.
    pub timings_ms: BTreeMap<String, u128>,
    pub outputs: Vec<OutputFile>,
    pub status: RunStatus,
    /// True when the run failed after writing some outputs.
    pub partial: bool,
}

pub const MANIFEST_FILE: &str = "manifest.json";

struct Run<'a> {
    config: &'a PipelineConfig,
    out_dir: PathBuf,
    outputs: Vec<OutputFile>,
    timings: BTreeMap<String, u128>,
    stage: String,
}

impl Run<'_> {
    fn record(&mut self, path: &Path) -> Result<()> {
        let rel = path
            .strip_prefix(&self.out_dir)
            .unwrap_or(path)
            .to_string_lossy()
            .replace('\\', "/");
        self.outputs.push(OutputFile {
            path: rel,
            sha256: store::digest_file(path)?,
        });
        Ok(())
    }

    fn timed<T>(&mut self, stage: &str, f: impl FnOnce(&mut Self) -> Result<T>) -> Result<T> {
        self.stage = stage.to_string();
        let start = Instant::now();
        let out = f(self)?;
        self.timings.insert(stage.to_string(), start.elapsed().as_millis());
        Ok(out)
    }

    fn emit(&mut self, stem: &str, report: &Report) -> Result<()> {
        for format in self.config.emit.clone() {
            let path = self.out_dir.join(format!(
                "{stem}.{}",
                match format {
                    EmitFormat::Json => "json",
                    EmitFormat::Csv => "csv",
                    EmitFormat::Svg => "svg",
                }
            ));
            match format {
                EmitFormat::Json => write_report(&path, report)?,
                EmitFormat::Csv => store::write_text(&path, &to_table(report)?)?,
                EmitFormat::Svg => {
                    emit_chart(report, None, &path)?;
                }
            }
            self.record(&path)?;
        }
        Ok(())
    }

    fn execute(&mut self) -> Result<()> {
        let config = self.config;
        let seed = config.seed;
        let events = self.timed("ingest", |run| {
            let mut options = ParseOptions {
                strict: config.ingest.strict,
                ..ParseOptions::default()
            };
            if let Some(a) = &config.paths.aliases {
                let extra: BTreeMap<String, String> = store::read_plain_json(a)?;
                options = options.with_aliases(&extra)?;
            }
            let (records, mut report) = store::read_events(&config.paths.events, &options)?;
            let (records, removed) = remove_incomplete_users(records, config.ingest.min_events);
            report.users_removed_incomplete = removed.users_removed_incomplete;
            let path = run.out_dir.join("events.csv");
            write_canonical(&records, store::create(&path)?)?;
            run.record(&path)?;
            let path = run.out_dir.join("cleaning.json");
            store::write_json(&path, "cleaning_report", &report)?;
            run.record(&path)?;
            Ok(records)
        })?;

        let dataset = self.timed("features", |run| {
            let mapping = store::load_mapping(config.paths.mapping.as_deref())?;
            let profiles = build_profiles(&events, &mapping)?;
            let labels = store::read_ils(&config.paths.ils)?;
            let (dataset, rejects) = assemble_dataset(mapping.feature_names.clone(), &profiles, &labels)?;
            let path = run.out_dir.join("dataset.json");
            store::write_json(&path, "dataset", &dataset)?;
            run.record(&path)?;
            let path = run.out_dir.join("rejected_labels.json");
            store::write_json(&path, "assemble_report", &rejects)?;
            run.record(&path)?;
            Ok(dataset)
        })?;

        let mut reports = Vec::new();
        for &dim in &config.dimensions {
            let dseed = derive_seed(seed, 10 + dim.index() as u64);
            let name = dim.name();
            let report = self.timed(&format!("dimension:{name}"), |run| {
                let spec = SplitSpec {
                    labeled_ratio: config.split.labeled_ratio,
                    seed: dseed,
                    stratified: config.split.stratified,
                };
                let source = if config.split.balance_before_split {
                    balanced_for(&dataset, dim, derive_seed(dseed, 4))?
                } else {
                    dataset.clone()
                };
                let (l, u, _withheld) = split_labeled_unlabeled(&source, dim, &spec)?;
                let labeling = LabelingConfig {
                    seed: derive_seed(dseed, 1),
                    ..config.labeling.clone()
                };
                let cv = CvOptions {
                    k: config.eval.k,
                    seed: derive_seed(dseed, 2),
                    stratified: true,
                    balance_training: config.eval.balance_cv,
                };
                let svm_only = TrainConfig {
                    svm: labeling.svm.clone(),
                    ..TrainConfig::default()
                };
                let labeling_cv = cross_validate(&l, dim, ModelKind::Svm, &svm_only, &cv)?;
                let final_config = config.final_model.config.reseeded(derive_seed(dseed, 3));
                let st = self_train(&l, &u, dim, &labeling, config.final_model.kind, &final_config)?;
                let final_cv = cross_validate(
                    &st.d_prime,
                    dim,
                    config.final_model.kind,
                    &config.final_model.config,
                    &cv,
                )?;

                let dir = run.out_dir.join(name);
                for (file, kind, value) in [
                    ("labeling_model.json", "model", &st.labeling_model),
                    ("final_model.json", "model", &st.final_model),
                ] {
                    let path = dir.join(file);
                    store::write_json(&path, kind, value)?;
                    run.record(&path)?;
                }
                let path = dir.join("d_prime.json");
                store::write_json(&path, "dataset", &st.d_prime)?;
                run.record(&path)?;

                let protocol = ProtocolOptions {
                    folds: config.eval.k,
                    stratified: true,
                    labeling: labeling.clone(),
                    final_config: config.final_model.config.clone(),
                };
                let sweep = if config.eval.ratios.is_empty() {
                    None
                } else {
                    let kinds = if config.eval.sweep_models.is_empty() {
                        vec![config.final_model.kind]
                    } else {
                        config.eval.sweep_models.clone()
                    };
                    Some(ratio_sweep(
                        &source,
                        dim,
                        &config.eval.ratios,
                        &kinds,
                        &config.eval_seeds(),
                        &protocol,
                    )?)
                };
                let comparison = if config.eval.compare {
                    let spec = CompareSpec {
                        ratio: config.eval.compare_ratio,
                        final_kind: config.final_model.kind,
                        seeds: config.eval_seeds(),
                        include_tri_training: config.eval.tri_training,
                        protocol,
                    };
                    Some(compare_methods(&source, dim, &spec)?)
                } else {
                    None
                };
                let report = DimensionReport {
                    dimension: dim,
                    rows: source.len(),
                    labeled: l.len(),
                    unlabeled: u.len(),
                    labeling_cv,
                    self_training: st.counts,
                    final_cv,
                    sweep,
                    comparison,
                };
                run.emit(&format!("report_{name}"), &Report::Dimension(Box::new(report.clone())))?;
                Ok(report)
            })?;
            reports.push(report);
        }
        self.timed("summary", |run| {
            let summary = RunSummary::from_reports(&reports)?;
            run.emit("summary", &Report::Summary(summary))
        })
    }
}

fn versions() -> BTreeMap<String, String> {
    [
        ("stylemill".to_string(), env!("CARGO_PKG_VERSION").to_string()),
        ("schema".to_string(), store::SCHEMA_VERSION.to_string()),
    ]
    .into_iter()
    .collect()
}

fn input_digests(config: &PipelineConfig) -> Result<BTreeMap<String, String>> {
    let mut inputs = BTreeMap::new();
    inputs.insert("events".into(), store::digest_file(&config.paths.events)?);
    inputs.insert("ils".into(), store::digest_file(&config.paths.ils)?);
    inputs.insert(
        "mapping".into(),
        match &config.paths.mapping {
            Some(p) => store::digest_file(p)?,
            None => store::digest_bytes(store::DEFAULT_MAPPING.as_bytes()),
        },
    );
    if let Some(a) = &config.paths.aliases {
        inputs.insert("aliases".into(), store::digest_file(a)?);
    }
    Ok(inputs)
}

/// The dataset with the majority pole's surplus labeled rows removed.
fn balanced_for(dataset: &LearningDataset, dim: Dimension, seed: u64) -> Result<LearningDataset> {
    let labeled = dataset.labeled_indices(dim);
    let poles: Vec<Pole> = dataset.labeled_xy(dim).1;
    let mut keep: Vec<usize> = under_sample_indices(&poles, seed)?
        .into_iter()
        .map(|i| labeled[i])
        .collect();
    keep.extend(dataset.unlabeled_indices(dim));
    keep.sort_unstable();
    Ok(dataset.subset(&keep))
}

/// Runs every stage and writes outputs plus `manifest.json` to the output
/// directory. A failed run still writes a manifest flagging what it left.
pub fn run_pipeline(config: &PipelineConfig) -> Result<RunManifest> {
    config.validate()?;
    let inputs = input_digests(config)?;
    let out_dir = config.paths.out_dir.clone();
    std::fs::create_dir_all(&out_dir).map_err(|e| Error::io(&out_dir, e))?;
    let mut run = Run {
        config,
        out_dir: out_dir.clone(),
        outputs: Vec::new(),
        timings: BTreeMap::new(),
        stage: String::new(),
    };
    let result = run.execute();
    let status = match &result {
        Ok(()) => RunStatus::Ok,
        Err(e) => RunStatus::Failed {
            stage: run.stage.clone(),
            error: e.to_string(),
        },
    };
    let manifest = RunManifest {
        config: config.clone(),
        inputs,
        versions: versions(),
        timings_ms: run.timings,
        partial: result.is_err() && !run.outputs.is_empty(),
        outputs: run.outputs,
        status,
    };
    store::write_json(&out_dir.join(MANIFEST_FILE), "run_manifest", &manifest)?;
    result.map(|()| manifest)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RerunOutcome {
    pub manifest: RunManifest,
    /// Outputs whose bytes differ from the original run.
    pub mismatched: Vec<String>,
}

/// Re-executes the run recorded in a manifest, optionally into another
/// directory, and compares every output digest with the recorded one.
pub fn rerun(manifest_path: &Path, out_dir: Option<&Path>) -> Result<RerunOutcome> {
    let original: RunManifest = store::read_json(manifest_path, "run_manifest")?;
    let mut config = original.config.clone();
    if let Some(d) = out_dir {
        config.paths.out_dir = d.to_path_buf();
    }
    let now = input_digests(&config)?;
    for (name, digest) in &original.inputs {
        if now.get(name) != Some(digest) {
            return Err(Error::Data(format!("input '{name}' changed since the recorded run")));
        }
    }
    let manifest = run_pipeline(&config)?;
    let recorded: BTreeMap<&str, &str> = original
        .outputs
        .iter()
        .map(|o| (o.path.as_str(), o.sha256.as_str()))
        .collect();
    let mut mismatched = Vec::new();
    for o in &manifest.outputs {
        if recorded.get(o.path.as_str()) != Some(&o.sha256.as_str()) {
            mismatched.push(o.path.clone());
        }
    }
    for path in recorded.keys() {
        if !manifest.outputs.iter().any(|o| o.path == *path) {
            mismatched.push(path.to_string());
        }
    }
    Ok(RerunOutcome { manifest, mismatched })
}
