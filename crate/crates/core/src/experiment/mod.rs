//! Experiment driver behind the `rcgp` binary.
//!
//! An experiment manifest names a dataset manifest, a mode (single split or
//! cross-validation) and the search settings. A run writes everything it
//! produced into one output directory:
//!
//! ```text
//! out/
//!   manifest.json          effective manifest (after command-line overrides)
//!   runs.csv | rotations.csv
//!   metrics.csv            test-set metrics, one row per evolved classifier
//!   summary.csv            mean and SD per partition
//!   runs/run_000/          genotype.json, classifier.dot, adasyn_audit.csv
//!   rotations/rep_00_rot_00/
//! ```
//!
//! The directory contents depend only on the input files and the manifest.

mod synth;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cgp::{self, EvolutionConfig, Genotype};
use crate::crossval::{self, CvReport, CvSettings};
use crate::dataset::{self, Dataset, DatasetManifest, Fractions, LayoutKind};
use crate::error::{Error, Result};
use crate::imbalance::{self, AdasynConfig, SyntheticSample};
use crate::report::{self, MetricsBundle};
use crate::seed::{self, stream};
use crate::stats::Summary;

pub use synth::{write_synthetic, SynthKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    SingleSplit,
    CrossValidation,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingleSplitParams {
    pub fractions: Fractions,
}

impl Default for SingleSplitParams {
    fn default() -> Self {
        SingleSplitParams {
            fractions: Fractions::SINGLE_SPLIT,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossValidationParams {
    pub k: usize,
    pub repetitions: usize,
}

impl Default for CrossValidationParams {
    fn default() -> Self {
        CrossValidationParams {
            k: 10,
            repetitions: 10,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdasynSection {
    pub enabled: bool,
    #[serde(flatten)]
    pub config: AdasynConfig,
}

impl Default for AdasynSection {
    fn default() -> Self {
        AdasynSection {
            enabled: true,
            config: AdasynConfig::default(),
        }
    }
}

fn default_runs() -> usize {
    10
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentManifest {
    /// Dataset manifest, relative to this manifest's directory.
    pub dataset: PathBuf,
    /// Overrides the dataset manifest's layout.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layout: Option<LayoutKind>,
    pub mode: Mode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub single_split: Option<SingleSplitParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cross_validation: Option<CrossValidationParams>,
    /// The `seed` field is ignored; run seeds derive from `master_seed`.
    #[serde(default)]
    pub evolution: EvolutionConfig,
    #[serde(default)]
    pub adasyn: AdasynSection,
    /// Independent single-split runs.
    #[serde(default = "default_runs")]
    pub runs: usize,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

impl ExperimentManifest {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn validate(&self) -> Result<()> {
        match (self.mode, &self.single_split, &self.cross_validation) {
            (Mode::SingleSplit, Some(p), None) => p.fractions.validate()?,
            (Mode::CrossValidation, None, Some(p)) => {
                if p.k < 3 {
                    return Err(Error::Config(format!("cross_validation.k = {} (< 3)", p.k)));
                }
                if p.repetitions == 0 {
                    return Err(Error::Config(
                        "cross_validation.repetitions must be >= 1".into(),
                    ));
                }
            }
            _ => {
                return Err(Error::Config(format!(
                    "mode {:?} needs exactly its own parameter block",
                    self.mode
                )))
            }
        }
        if self.runs == 0 {
            return Err(Error::Config("runs must be at least 1".into()));
        }
        self.evolution.validate()?;
        self.adasyn.config.validate()
    }

    fn adasyn(&self) -> Option<AdasynConfig> {
        self.adasyn.enabled.then_some(self.adasyn.config)
    }
}

/// Command-line values that replace manifest fields.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub nodes: Option<usize>,
    pub mutation_rate: Option<f64>,
    pub iterations: Option<usize>,
    pub lambda: Option<usize>,
    pub recurrent_prob: Option<f64>,
    pub runs: Option<usize>,
    pub folds: Option<usize>,
    pub reps: Option<usize>,
    pub beta: Option<f64>,
    pub k_neighbors: Option<usize>,
    pub adasyn: Option<bool>,
    pub layout: Option<LayoutKind>,
    pub output_dir: Option<PathBuf>,
}

impl Overrides {
    pub fn apply(&self, m: &mut ExperimentManifest) {
        fn set<T: Clone>(slot: &mut T, v: &Option<T>) {
            if let Some(v) = v {
                *slot = v.clone();
            }
        }
        set(&mut m.master_seed, &self.seed);
        set(&mut m.evolution.n_nodes, &self.nodes);
        set(&mut m.evolution.mutation_rate, &self.mutation_rate);
        set(&mut m.evolution.max_iterations, &self.iterations);
        set(&mut m.evolution.offspring, &self.lambda);
        set(
            &mut m.evolution.recurrence_probability,
            &self.recurrent_prob,
        );
        set(&mut m.runs, &self.runs);
        set(&mut m.adasyn.config.beta, &self.beta);
        set(&mut m.adasyn.config.k_neighbors, &self.k_neighbors);
        set(&mut m.adasyn.enabled, &self.adasyn);
        if self.layout.is_some() {
            m.layout = self.layout;
        }
        if self.output_dir.is_some() {
            m.output_dir = self.output_dir.clone();
        }
        if (self.folds.is_some() || self.reps.is_some()) && m.mode == Mode::CrossValidation {
            let cv = m.cross_validation.get_or_insert_with(Default::default);
            set(&mut cv.k, &self.folds);
            set(&mut cv.repetitions, &self.reps);
        }
    }
}

/// A manifest together with the directory its relative paths resolve from.
#[derive(Clone, Debug)]
pub struct Experiment {
    pub manifest: ExperimentManifest,
    pub base_dir: PathBuf,
}

impl Experiment {
    pub fn load(path: &Path, overrides: &Overrides) -> Result<Experiment> {
        let mut manifest = ExperimentManifest::from_file(path)?;
        overrides.apply(&mut manifest);
        manifest.validate()?;
        Ok(Experiment {
            manifest,
            base_dir: path.parent().unwrap_or(Path::new(".")).to_path_buf(),
        })
    }

    pub fn load_dataset(&self) -> Result<Dataset> {
        let path = self.base_dir.join(&self.manifest.dataset);
        let mut dm = DatasetManifest::from_file(&path)?;
        if let Some(layout) = self.manifest.layout {
            dm.layout = layout;
        }
        dm.load(path.parent().unwrap_or(Path::new(".")))
    }

    fn output_dir(&self) -> Result<PathBuf> {
        let dir = self
            .manifest
            .output_dir
            .as_ref()
            .ok_or_else(|| Error::Config("no output directory given".into()))?;
        Ok(if dir.is_absolute() {
            dir.clone()
        } else {
            self.base_dir.join(dir)
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunRecord {
    pub run: usize,
    pub n_train: usize,
    pub n_train_synthetic: usize,
    pub n_val: usize,
    pub n_test: usize,
    pub acc_train: f64,
    pub acc_val: Option<f64>,
    pub acc_test: f64,
    pub genotype: Genotype,
    pub metrics: MetricsBundle,
    pub synthetic: Vec<SyntheticSample>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SplitReport {
    pub runs: Vec<RunRecord>,
    pub train: Summary,
    pub validation: Summary,
    pub test: Summary,
}

fn single_run(
    dataset: &Dataset,
    fractions: Fractions,
    evo: &EvolutionConfig,
    adasyn: Option<&AdasynConfig>,
    master_seed: u64,
    run: usize,
) -> Result<RunRecord> {
    let r = run as u64;
    let split = dataset::stratified_split(
        dataset,
        fractions,
        seed::derive_seed(master_seed, &[stream::SPLIT, r]),
    )?;
    let mut train = dataset.select(&split.train);
    let validation = dataset.select(&split.validation);
    let test = dataset.select(&split.test);
    let mut synthetic = Vec::new();
    if let Some(cfg) = adasyn {
        let mut rng = seed::derived_rng(master_seed, &[stream::ADASYN, r]);
        let balanced = imbalance::balance_training(&train, cfg, &mut rng)?;
        train = balanced.samples;
        // provenance against dataset indices
        synthetic = balanced.synthetic;
        for s in &mut synthetic {
            s.parent = split.train[s.parent];
            s.neighbor = s.neighbor.map(|n| split.train[n]);
        }
    }

    let layout = dataset.layout();
    let config = evo
        .clone()
        .with_seed(seed::derive_seed(master_seed, &[stream::EVOLVE, r]));
    let result = cgp::evolve(&train, &validation, layout, &config)?;
    let outputs = cgp::outputs(
        &result.best_genotype,
        &test,
        layout,
        config.static_update_passes,
    );
    let labels: Vec<u8> = test.iter().map(|s| s.label).collect();
    let metrics = report::compute_metrics(&outputs, &labels, config.decision_threshold)?;
    Ok(RunRecord {
        run,
        n_train: split.train.len(),
        n_train_synthetic: synthetic.len(),
        n_val: split.validation.len(),
        n_test: split.test.len(),
        acc_train: result.best_train_accuracy,
        acc_val: result.best_validation_accuracy,
        acc_test: metrics.accuracy,
        genotype: result.best_genotype,
        metrics,
        synthetic,
    })
}

/// Independent stratified-split runs, in parallel, reported in run order.
pub fn single_split_report(
    dataset: &Dataset,
    fractions: Fractions,
    evo: &EvolutionConfig,
    adasyn: Option<&AdasynConfig>,
    runs: usize,
    master_seed: u64,
) -> Result<SplitReport> {
    let runs = (0..runs)
        .into_par_iter()
        .map(|r| single_run(dataset, fractions, evo, adasyn, master_seed, r))
        .collect::<Result<Vec<_>>>()?;
    let train: Vec<f64> = runs.iter().map(|r| r.acc_train).collect();
    let val: Vec<f64> = runs.iter().filter_map(|r| r.acc_val).collect();
    let test: Vec<f64> = runs.iter().map(|r| r.acc_test).collect();
    Ok(SplitReport {
        train: Summary::of(&train),
        validation: Summary::of(&val),
        test: Summary::of(&test),
        runs,
    })
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn csv_text(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
}

const METRICS_HEADER: [&str; 10] = [
    "model",
    "accuracy",
    "sensitivity",
    "specificity",
    "roc_auc",
    "tp",
    "fp",
    "tn",
    "fn",
    "n",
];

fn metrics_row(model: String, m: &MetricsBundle) -> Vec<String> {
    vec![
        model,
        m.accuracy.to_string(),
        opt(m.sensitivity),
        opt(m.specificity),
        opt(m.roc_auc),
        m.confusion.tp.to_string(),
        m.confusion.fp.to_string(),
        m.confusion.tn.to_string(),
        m.confusion.fn_.to_string(),
        m.confusion.total().to_string(),
    ]
}

pub const SUMMARY_HEADER: [&str; 5] = ["partition", "n", "mean", "sd", "percent"];

/// Rows of `summary.csv`: full-precision mean and SD plus the two-decimal
/// `mean % (SD)` cell.
pub fn summary_csv(train: &Summary, validation: &Summary, test: &Summary) -> String {
    let rows: Vec<Vec<String>> = [("train", train), ("validation", validation), ("test", test)]
        .iter()
        .map(|(name, s)| {
            vec![
                name.to_string(),
                s.n.to_string(),
                if s.n == 0 {
                    String::new()
                } else {
                    s.mean.to_string()
                },
                if s.n == 0 {
                    String::new()
                } else {
                    s.sd.to_string()
                },
                s.percent_cell(),
            ]
        })
        .collect();
    csv_text(&SUMMARY_HEADER, &rows)
}

/// One-line, table-style summary: `train | validation | test`.
pub fn table_row(label: &str, train: &Summary, validation: &Summary, test: &Summary) -> String {
    format!(
        "{label}\ttrain {}\tvalidation {}\ttest {}",
        train.percent_cell(),
        validation.percent_cell(),
        test.percent_cell()
    )
}

fn manifest_copy(m: &ExperimentManifest) -> String {
    let mut m = m.clone();
    m.output_dir = None;
    m.evolution.seed = 0;
    let mut text = serde_json::to_string_pretty(&m).expect("manifest serialises");
    text.push('\n');
    text
}

fn write_classifier(dir: &Path, genotype: &Genotype, names: &[String]) -> Result<()> {
    write_file(&dir.join("genotype.json"), &(genotype.to_json() + "\n"))?;
    write_file(
        &dir.join("classifier.dot"),
        &report::export_dot(genotype, names),
    )
}

pub fn write_split_report(
    out: &Path,
    exp: &Experiment,
    dataset: &Dataset,
    report: &SplitReport,
) -> Result<()> {
    write_file(&out.join("manifest.json"), &manifest_copy(&exp.manifest))?;
    let header = [
        "run",
        "n_train",
        "n_train_synthetic",
        "n_val",
        "n_test",
        "acc_train",
        "acc_val",
        "acc_test",
        "active_nodes",
        "used_inputs",
    ];
    let rows: Vec<Vec<String>> = report
        .runs
        .iter()
        .map(|r| {
            vec![
                r.run.to_string(),
                r.n_train.to_string(),
                r.n_train_synthetic.to_string(),
                r.n_val.to_string(),
                r.n_test.to_string(),
                r.acc_train.to_string(),
                opt(r.acc_val),
                r.acc_test.to_string(),
                r.genotype.active_nodes().len().to_string(),
                r.genotype.used_inputs().len().to_string(),
            ]
        })
        .collect();
    write_file(&out.join("runs.csv"), &csv_text(&header, &rows))?;
    let metrics: Vec<Vec<String>> = report
        .runs
        .iter()
        .map(|r| metrics_row(format!("run_{:03}", r.run), &r.metrics))
        .collect();
    write_file(
        &out.join("metrics.csv"),
        &csv_text(&METRICS_HEADER, &metrics),
    )?;
    write_file(
        &out.join("summary.csv"),
        &summary_csv(&report.train, &report.validation, &report.test),
    )?;
    for r in &report.runs {
        let dir = out.join("runs").join(format!("run_{:03}", r.run));
        write_classifier(&dir, &r.genotype, dataset.input_names())?;
        if exp.manifest.adasyn.enabled {
            std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
            imbalance::write_audit(&dir.join("adasyn_audit.csv"), &r.synthetic)?;
        }
    }
    Ok(())
}

pub const ROTATION_HEADER: [&str; 11] = [
    "repetition",
    "rotation",
    "n_train",
    "n_train_synthetic",
    "n_val",
    "n_test",
    "acc_train",
    "acc_val",
    "acc_test",
    "skipped",
    "reason",
];
// `reason` explains a skip, or annotates a rotation whose held-out folds
// miss a class.

pub fn write_cv_report(
    out: &Path,
    exp: &Experiment,
    dataset: &Dataset,
    report: &CvReport,
) -> Result<()> {
    write_file(&out.join("manifest.json"), &manifest_copy(&exp.manifest))?;
    let rows: Vec<Vec<String>> = report
        .records
        .iter()
        .map(|r| {
            vec![
                r.repetition.to_string(),
                r.rotation.to_string(),
                r.n_train.to_string(),
                r.n_train_synthetic.to_string(),
                r.n_val.to_string(),
                r.n_test.to_string(),
                opt(r.acc_train),
                opt(r.acc_val),
                opt(r.acc_test),
                r.is_skipped().to_string(),
                r.skipped
                    .clone()
                    .or_else(|| r.annotation.clone())
                    .unwrap_or_default(),
            ]
        })
        .collect();
    write_file(
        &out.join("rotations.csv"),
        &csv_text(&ROTATION_HEADER, &rows),
    )?;
    let metrics: Vec<Vec<String>> = report
        .records
        .iter()
        .filter_map(|r| {
            r.test_metrics
                .as_ref()
                .map(|m| metrics_row(format!("rep_{:02}_rot_{:02}", r.repetition, r.rotation), m))
        })
        .collect();
    write_file(
        &out.join("metrics.csv"),
        &csv_text(&METRICS_HEADER, &metrics),
    )?;
    write_file(
        &out.join("summary.csv"),
        &summary_csv(&report.train, &report.validation, &report.test),
    )?;
    for r in &report.records {
        if let Some(g) = &r.genotype {
            let dir = out
                .join("rotations")
                .join(format!("rep_{:02}_rot_{:02}", r.repetition, r.rotation));
            write_classifier(&dir, g, dataset.input_names())?;
        }
    }
    Ok(())
}

/// What a finished run reports back to the caller.
#[derive(Clone, Debug, PartialEq)]
pub struct RunOutcome {
    pub output_dir: PathBuf,
    pub train: Summary,
    pub validation: Summary,
    pub test: Summary,
    pub records: usize,
    pub skipped: usize,
    pub table_row: String,
}

pub fn run_single_split(exp: &Experiment) -> Result<RunOutcome> {
    let m = &exp.manifest;
    let params = match (m.mode, &m.single_split) {
        (Mode::SingleSplit, Some(p)) => p,
        _ => return Err(Error::Config("manifest is not in single_split mode".into())),
    };
    let out = exp.output_dir()?;
    let dataset = exp.load_dataset()?;
    let report = single_split_report(
        &dataset,
        params.fractions,
        &m.evolution,
        m.adasyn().as_ref(),
        m.runs,
        m.master_seed,
    )?;
    write_split_report(&out, exp, &dataset, &report)?;
    Ok(RunOutcome {
        output_dir: out,
        table_row: table_row("CGP", &report.train, &report.validation, &report.test),
        train: report.train,
        validation: report.validation,
        test: report.test,
        records: report.runs.len(),
        skipped: 0,
    })
}

pub fn run_cross_validation(exp: &Experiment) -> Result<RunOutcome> {
    let m = &exp.manifest;
    let params = match (m.mode, &m.cross_validation) {
        (Mode::CrossValidation, Some(p)) => p,
        _ => {
            return Err(Error::Config(
                "manifest is not in cross_validation mode".into(),
            ))
        }
    };
    let out = exp.output_dir()?;
    let dataset = exp.load_dataset()?;
    let settings = CvSettings {
        k: params.k,
        repetitions: params.repetitions,
        master_seed: m.master_seed,
        adasyn: m.adasyn(),
    };
    let report = crossval::run_cv(&dataset, &m.evolution, &settings)?;
    write_cv_report(&out, exp, &dataset, &report)?;
    Ok(RunOutcome {
        output_dir: out,
        table_row: table_row("CGP (CV)", &report.train, &report.validation, &report.test),
        train: report.train,
        validation: report.validation,
        test: report.test,
        records: report.records.len(),
        skipped: report.skipped(),
    })
}

/// Class counts and the majority-class accuracy in percent.
pub fn baseline_text(dataset: &Dataset) -> Result<String> {
    let [zeros, ones] = dataset.class_counts();
    let baseline = report::majority_baseline(&dataset.labels())?;
    let mut text = String::new();
    let _ = writeln!(text, "class 0: {zeros}");
    let _ = writeln!(text, "class 1: {ones}");
    let _ = writeln!(text, "majority baseline: {:.2}", 100.0 * baseline);
    Ok(text)
}

pub fn cmd_baseline(dataset_manifest: &Path) -> Result<String> {
    baseline_text(&dataset::load_manifest(dataset_manifest)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn manifest(mode: Mode) -> ExperimentManifest {
        ExperimentManifest {
            dataset: "d.json".into(),
            layout: None,
            mode,
            single_split: None,
            cross_validation: None,
            evolution: EvolutionConfig::default(),
            adasyn: AdasynSection::default(),
            runs: 10,
            master_seed: 0,
            output_dir: None,
        }
    }

    #[test]
    fn exactly_one_mode_block() {
        let mut m = manifest(Mode::SingleSplit);
        assert!(m.validate().is_err());
        m.single_split = Some(SingleSplitParams::default());
        assert!(m.validate().is_ok());
        m.cross_validation = Some(CrossValidationParams::default());
        assert!(matches!(m.validate(), Err(Error::Config(_))));
        let mut m = manifest(Mode::CrossValidation);
        m.cross_validation = Some(CrossValidationParams::default());
        assert!(m.validate().is_ok());
        m.runs = 0;
        assert!(m.validate().is_err());
    }

    #[test]
    fn overrides_replace_fields() {
        let mut m = manifest(Mode::CrossValidation);
        let o = Overrides {
            seed: Some(9),
            nodes: Some(20),
            iterations: Some(100),
            recurrent_prob: Some(0.1),
            folds: Some(9),
            adasyn: Some(false),
            ..Default::default()
        };
        o.apply(&mut m);
        assert_eq!(m.master_seed, 9);
        assert_eq!(m.evolution.n_nodes, 20);
        assert_eq!(m.evolution.max_iterations, 100);
        assert_eq!(m.evolution.recurrence_probability, 0.1);
        assert_eq!(m.cross_validation.unwrap().k, 9);
        assert!(!m.adasyn.enabled);
    }

    #[test]
    fn manifest_defaults_from_minimal_json() {
        let m: ExperimentManifest = serde_json::from_str(
            r#"{"dataset":"d.json","mode":"single_split","single_split":{"fractions":{"train":0.7,"validation":0.15,"test":0.15}}}"#,
        )
        .unwrap();
        assert_eq!(m.runs, 10);
        assert_eq!(m.evolution, EvolutionConfig::default());
        assert!(m.adasyn.enabled);
        assert_eq!(m.adasyn.config.k_neighbors, 5);
        m.validate().unwrap();
    }

    #[test]
    fn summary_csv_shape() {
        let s = Summary::of(&[0.5, 1.0]);
        let text = summary_csv(&s, &Summary::of(&[]), &s);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "partition,n,mean,sd,percent");
        assert_eq!(lines[1], "train,2,0.75,0.3535533905932738,75.00 (35.36)");
        assert_eq!(lines[2], "validation,0,,,NA");
    }
}
