//! Stratified, repeated k-fold cross-validation with rotating roles.
//!
//! In rotation `t` fold `t` is the test set, fold `(t + 1) mod k` the
//! validation set and the remaining `k - 2` folds the training set. Only the
//! training part is oversampled.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cgp::{self, EvolutionConfig, Genotype};
use crate::dataset::{Dataset, Sample};
use crate::error::{Error, Result};
use crate::imbalance::{self, AdasynConfig};
use crate::report::{self, MetricsBundle};
use crate::seed::{self, stream};
use crate::stats::Summary;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub k: usize,
    /// Fold of every sample.
    pub assignment: Vec<usize>,
    /// `class_counts[c][f]`: samples of class `c` in fold `f`.
    pub class_counts: [Vec<usize>; 2],
}

impl FoldPlan {
    /// Sample indices in fold `f`, ascending.
    pub fn fold(&self, f: usize) -> Vec<usize> {
        self.assignment
            .iter()
            .enumerate()
            .filter(|&(_, &a)| a == f)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        (0..self.k)
            .map(|f| self.class_counts[0][f] + self.class_counts[1][f])
            .collect()
    }
}

/// Shuffles each class with the seeded stream and deals it round-robin into
/// `k` folds. Dealing continues across classes (class 0 first), so both the
/// per-class and the overall fold sizes differ by at most one.
pub fn make_folds(dataset: &Dataset, k: usize, seed: u64) -> Result<FoldPlan> {
    if k < 3 {
        return Err(Error::Fold(format!(
            "k = {k}; at least 3 folds are needed for train, validation and test"
        )));
    }
    if k > dataset.len() {
        return Err(Error::Fold(format!(
            "k = {k} exceeds the {} samples",
            dataset.len()
        )));
    }
    let mut rng = seed::rng_from_seed(seed);
    let mut assignment = vec![0; dataset.len()];
    let mut class_counts = [vec![0; k], vec![0; k]];
    let mut next = 0;
    for (class, mut members) in dataset.class_indices().into_iter().enumerate() {
        seed::shuffle(&mut rng, &mut members);
        for i in members {
            assignment[i] = next;
            class_counts[class][next] += 1;
            next = (next + 1) % k;
        }
    }
    Ok(FoldPlan {
        k,
        assignment,
        class_counts,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CvSettings {
    pub k: usize,
    pub repetitions: usize,
    pub master_seed: u64,
    /// `None` disables oversampling.
    pub adasyn: Option<AdasynConfig>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RotationRecord {
    pub repetition: usize,
    pub rotation: usize,
    pub n_train: usize,
    pub n_train_synthetic: usize,
    pub n_val: usize,
    pub n_test: usize,
    /// Accuracy on the (oversampled) training set.
    pub acc_train: Option<f64>,
    pub acc_val: Option<f64>,
    pub acc_test: Option<f64>,
    /// Why the rotation produced no classifier.
    pub skipped: Option<String>,
    /// Set when a held-out fold lacks one class, e.g. a control-free test
    /// fold. The rotation still runs; its test metrics are one-sided.
    pub annotation: Option<String>,
    pub validation_indices: Vec<usize>,
    pub test_indices: Vec<usize>,
    pub genotype: Option<Genotype>,
    pub test_metrics: Option<MetricsBundle>,
}

impl RotationRecord {
    pub fn is_skipped(&self) -> bool {
        self.skipped.is_some()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub records: Vec<RotationRecord>,
    pub train: Summary,
    pub validation: Summary,
    pub test: Summary,
}

impl CvReport {
    /// Aggregates over the non-skipped records, in record order.
    pub fn from_records(records: Vec<RotationRecord>) -> CvReport {
        let collect = |f: fn(&RotationRecord) -> Option<f64>| -> Vec<f64> {
            records.iter().filter_map(f).collect()
        };
        let train = Summary::of(&collect(|r| r.acc_train));
        let validation = Summary::of(&collect(|r| r.acc_val));
        let test = Summary::of(&collect(|r| r.acc_test));
        CvReport {
            records,
            train,
            validation,
            test,
        }
    }

    pub fn skipped(&self) -> usize {
        self.records.iter().filter(|r| r.is_skipped()).count()
    }
}

fn run_rotation(
    dataset: &Dataset,
    plan: &FoldPlan,
    repetition: usize,
    rotation: usize,
    evo: &EvolutionConfig,
    settings: &CvSettings,
) -> Result<RotationRecord> {
    let k = plan.k;
    let val_fold = (rotation + 1) % k;
    let test_indices = plan.fold(rotation);
    let validation_indices = plan.fold(val_fold);
    let train_indices: Vec<usize> = (0..dataset.len())
        .filter(|&i| plan.assignment[i] != rotation && plan.assignment[i] != val_fold)
        .collect();

    let mut record = RotationRecord {
        repetition,
        rotation,
        n_train: train_indices.len(),
        n_train_synthetic: 0,
        n_val: validation_indices.len(),
        n_test: test_indices.len(),
        acc_train: None,
        acc_val: None,
        acc_test: None,
        skipped: None,
        annotation: None,
        validation_indices,
        test_indices,
        genotype: None,
        test_metrics: None,
    };

    let mut train = dataset.select(&train_indices);
    let validation = dataset.select(&record.validation_indices);
    let test = dataset.select(&record.test_indices);

    let missing = |part: &[Sample]| (0..2u8).find(|&c| part.iter().all(|s| s.label != c));
    let notes: Vec<String> = [("test", &test), ("validation", &validation)]
        .iter()
        .filter_map(|(name, part)| {
            missing(part).map(|c| format!("{name} fold has no class {c} samples"))
        })
        .collect();
    if !notes.is_empty() {
        record.annotation = Some(notes.join("; "));
    }

    let mut present = [0usize; 2];
    for s in &train {
        present[s.label as usize] += 1;
    }
    if let Some(class) = present.iter().position(|&n| n == 0) {
        record.skipped = Some(format!("training folds contain no class {class} samples"));
        return Ok(record);
    }

    if let Some(cfg) = &settings.adasyn {
        let mut rng = seed::derived_rng(
            settings.master_seed,
            &[stream::ADASYN, repetition as u64, rotation as u64],
        );
        match imbalance::balance_training(&train, cfg, &mut rng) {
            Ok(balanced) => {
                record.n_train_synthetic = balanced.synthetic_count();
                train = balanced.samples;
            }
            Err(e @ (Error::Config(_) | Error::Imbalance(_))) => {
                record.skipped = Some(format!("oversampling failed: {e}"));
                return Ok(record);
            }
            Err(e) => return Err(e),
        }
    }
    assert!(
        validation.iter().chain(&test).all(|s| !s.synthetic),
        "synthetic sample outside the training set"
    );

    let layout = dataset.layout();
    let config = evo.clone().with_seed(seed::derive_seed(
        settings.master_seed,
        &[stream::EVOLVE, repetition as u64, rotation as u64],
    ));
    let result = cgp::evolve(&train, &validation, layout, &config)?;
    let outputs = cgp::outputs(
        &result.best_genotype,
        &test,
        layout,
        config.static_update_passes,
    );
    let labels: Vec<u8> = test.iter().map(|s| s.label).collect();
    let metrics = report::compute_metrics(&outputs, &labels, config.decision_threshold)?;

    record.acc_train = Some(result.best_train_accuracy);
    record.acc_val = result.best_validation_accuracy;
    record.acc_test = Some(metrics.accuracy);
    record.test_metrics = Some(metrics);
    record.genotype = Some(result.best_genotype);
    Ok(record)
}

/// Runs `repetitions` full k-fold rotations. Each repetition draws a fresh
/// fold plan; every rotation evolves one classifier with its own derived
/// seed. Rotations run in parallel and are reported in (repetition,
/// rotation) order.
pub fn run_cv(dataset: &Dataset, evo: &EvolutionConfig, settings: &CvSettings) -> Result<CvReport> {
    evo.validate()?;
    if let Some(cfg) = &settings.adasyn {
        cfg.validate()?;
    }
    if settings.repetitions == 0 {
        return Err(Error::Config("repetitions must be at least 1".into()));
    }
    if dataset.class_counts().contains(&0) {
        return Err(Error::Imbalance(
            "cross-validation needs samples of both classes".into(),
        ));
    }
    let plans = (0..settings.repetitions)
        .map(|r| {
            make_folds(
                dataset,
                settings.k,
                seed::derive_seed(settings.master_seed, &[stream::FOLDS, r as u64]),
            )
        })
        .collect::<Result<Vec<_>>>()?;

    let jobs: Vec<(usize, usize)> = (0..settings.repetitions)
        .flat_map(|r| (0..settings.k).map(move |t| (r, t)))
        .collect();
    let records = jobs
        .par_iter()
        .map(|&(r, t)| run_rotation(dataset, &plans[r], r, t, evo, settings))
        .collect::<Result<Vec<_>>>()?;
    Ok(CvReport::from_records(records))
}
