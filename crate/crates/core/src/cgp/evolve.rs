//! (1 + lambda) evolutionary strategy over CGP genotypes.

use serde::{Deserialize, Serialize};

use super::function::Function;
use super::genotype::Genotype;
use super::program::Program;
use crate::dataset::{Layout, Sample};
use crate::error::{Error, Result};
use crate::seed;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvolutionConfig {
    pub n_nodes: usize,
    pub functions: Vec<Function>,
    /// Per-gene resampling probability.
    pub mutation_rate: f64,
    /// Generations; each generation evaluates `offspring` children.
    pub max_iterations: usize,
    pub offspring: usize,
    /// Chance that a connection gene is drawn from the full address range.
    /// Zero yields feed-forward genotypes.
    pub recurrence_probability: f64,
    /// Outputs strictly above this are class 1.
    pub decision_threshold: f64,
    /// Sweeps per static evaluation of a recurrent program.
    pub static_update_passes: usize,
    pub seed: u64,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        EvolutionConfig {
            n_nodes: 50,
            functions: Function::ALL.to_vec(),
            mutation_rate: 0.1,
            max_iterations: 15_000,
            offspring: 4,
            recurrence_probability: 0.0,
            decision_threshold: 0.0,
            static_update_passes: 1,
            seed: 0,
        }
    }
}

impl EvolutionConfig {
    pub const RECURRENCE_PROBABILITY: f64 = 0.1;

    /// Defaults with recurrent connections enabled.
    pub fn recurrent() -> Self {
        EvolutionConfig {
            recurrence_probability: Self::RECURRENCE_PROBABILITY,
            ..Self::default()
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.n_nodes == 0 {
            return bad("n_nodes must be positive".into());
        }
        if self.functions.is_empty() {
            return bad("function set is empty".into());
        }
        if !(self.mutation_rate > 0.0 && self.mutation_rate <= 1.0) {
            return bad(format!(
                "mutation_rate {} not in (0, 1]",
                self.mutation_rate
            ));
        }
        if self.offspring == 0 {
            return bad("offspring count must be at least 1".into());
        }
        if !(0.0..=1.0).contains(&self.recurrence_probability) {
            return bad(format!(
                "recurrence_probability {} not in [0, 1]",
                self.recurrence_probability
            ));
        }
        if !self.decision_threshold.is_finite() {
            return bad("decision_threshold must be finite".into());
        }
        if self.static_update_passes == 0 {
            return bad("static_update_passes must be at least 1".into());
        }
        Ok(())
    }

    pub fn decision(&self) -> Decision {
        Decision {
            threshold: self.decision_threshold,
            passes: self.static_update_passes,
        }
    }
}

/// How raw program outputs become classes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Decision {
    pub threshold: f64,
    pub passes: usize,
}

impl Default for Decision {
    fn default() -> Self {
        EvolutionConfig::default().decision()
    }
}

impl Decision {
    /// Class 1 iff `output > threshold`; NaN and ties go to class 0.
    pub fn classify(&self, output: f64) -> u8 {
        u8::from(output > self.threshold)
    }
}

pub fn predict(genotype: &Genotype, sample: &Sample, layout: Layout, decision: Decision) -> u8 {
    let program = Program::compile(genotype);
    decision.classify(program.output_for(sample, layout, decision.passes, &mut program.scratch()))
}

/// Raw outputs for every sample, in order.
pub fn outputs(genotype: &Genotype, samples: &[Sample], layout: Layout, passes: usize) -> Vec<f64> {
    let program = Program::compile(genotype);
    let mut buf = program.scratch();
    samples
        .iter()
        .map(|s| program.output_for(s, layout, passes, &mut buf))
        .collect()
}

fn correct_count(
    program: &Program,
    samples: &[Sample],
    layout: Layout,
    decision: Decision,
    buf: &mut Vec<f64>,
) -> usize {
    samples
        .iter()
        .filter(|s| {
            decision.classify(program.output_for(s, layout, decision.passes, buf)) == s.label
        })
        .count()
}

/// Fraction of samples classified correctly.
pub fn fitness(
    genotype: &Genotype,
    samples: &[Sample],
    layout: Layout,
    decision: Decision,
) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::Contract("accuracy of an empty sample set".into()));
    }
    let program = Program::compile(genotype);
    let mut buf = program.scratch();
    let hits = correct_count(&program, samples, layout, decision, &mut buf);
    Ok(hits as f64 / samples.len() as f64)
}

/// Something the strategy maximises.
pub trait Objective {
    fn score(&self, program: &Program, buf: &mut Vec<f64>) -> f64;

    /// Scores at which the search may stop early.
    fn is_solved(&self, score: f64) -> bool;
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Improvement {
    pub iteration: usize,
    pub score: f64,
}

/// Parent as seen by an observer after each generation.
pub struct ParentView<'a> {
    pub iteration: usize,
    pub genotype: &'a Genotype,
    pub program: &'a Program,
    pub score: f64,
    /// False when the new parent has the same phenotype as the previous one.
    pub phenotype_changed: bool,
}

pub struct SearchOutcome {
    pub parent: Genotype,
    pub score: f64,
    pub iterations: usize,
    pub history: Vec<Improvement>,
}

/// Runs the strategy from a seeded random parent. Children whose phenotype
/// equals the parent's inherit its score without evaluation. The best child
/// replaces the parent when it scores at least as well, so the parent drifts
/// across neutral genotypes. `observe` sees the initial parent and the parent
/// after every generation.
pub fn search<O: Objective>(
    config: &EvolutionConfig,
    n_inputs: usize,
    objective: &O,
    mut observe: impl FnMut(ParentView<'_>),
) -> SearchOutcome {
    let mut rng = seed::rng_from_seed(config.seed);
    let mut parent = Genotype::random(config, n_inputs, &mut rng);
    let mut program = Program::compile(&parent);
    let mut buf = program.scratch();
    let mut score = objective.score(&program, &mut buf);
    let mut history = vec![Improvement {
        iteration: 0,
        score,
    }];
    observe(ParentView {
        iteration: 0,
        genotype: &parent,
        program: &program,
        score,
        phenotype_changed: true,
    });

    let mut iteration = 0;
    while iteration < config.max_iterations && !objective.is_solved(score) {
        iteration += 1;
        let mut best: Option<(Genotype, Program, f64)> = None;
        for _ in 0..config.offspring {
            let child = parent.mutate(config, &mut rng);
            let child_program = Program::compile(&child);
            let child_score = if child_program == program {
                score
            } else {
                objective.score(&child_program, &mut buf)
            };
            if best.as_ref().is_none_or(|b| child_score > b.2) {
                best = Some((child, child_program, child_score));
            }
        }
        let (child, child_program, child_score) = best.expect("at least one offspring");
        let mut changed = false;
        if child_score >= score {
            changed = child_program != program;
            if child_score > score {
                history.push(Improvement {
                    iteration,
                    score: child_score,
                });
            }
            parent = child;
            program = child_program;
            score = child_score;
        }
        observe(ParentView {
            iteration,
            genotype: &parent,
            program: &program,
            score,
            phenotype_changed: changed,
        });
    }

    SearchOutcome {
        parent,
        score,
        iterations: iteration,
        history,
    }
}

struct Accuracy<'a> {
    samples: &'a [Sample],
    layout: Layout,
    decision: Decision,
}

impl Objective for Accuracy<'_> {
    fn score(&self, program: &Program, buf: &mut Vec<f64>) -> f64 {
        correct_count(program, self.samples, self.layout, self.decision, buf) as f64
            / self.samples.len() as f64
    }

    fn is_solved(&self, score: f64) -> bool {
        score >= 1.0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvolutionResult {
    pub best_genotype: Genotype,
    pub best_train_accuracy: f64,
    pub best_validation_accuracy: Option<f64>,
    /// Generations run.
    pub iterations: usize,
    /// Strict improvements of the parent's training accuracy.
    pub history: Vec<Improvement>,
}

/// Evolves a binary classifier. Training accuracy drives selection; the
/// returned genotype is the parent with the best validation accuracy seen
/// during the run (ties keep the earlier parent unless its training accuracy
/// is lower). Without validation samples the final parent is returned.
pub fn evolve(
    train: &[Sample],
    validation: &[Sample],
    layout: Layout,
    config: &EvolutionConfig,
) -> Result<EvolutionResult> {
    config.validate()?;
    if train.is_empty() {
        return Err(Error::Contract("evolution needs training samples".into()));
    }
    for s in train.iter().chain(validation) {
        if s.features.len() != layout.len() {
            return Err(Error::Input(format!(
                "sample {:?} does not match layout {layout:?}",
                s.id
            )));
        }
    }
    let decision = config.decision();
    let objective = Accuracy {
        samples: train,
        layout,
        decision,
    };

    let mut best: Option<(Genotype, f64, f64)> = None;
    let mut val_buf = Vec::new();
    let outcome = search(config, layout.n_inputs(), &objective, |view| {
        if validation.is_empty() || !view.phenotype_changed {
            return;
        }
        let val = correct_count(view.program, validation, layout, decision, &mut val_buf) as f64
            / validation.len() as f64;
        let better = best
            .as_ref()
            .is_none_or(|&(_, bv, bt)| val > bv || (val == bv && view.score > bt));
        if better {
            best = Some((view.genotype.clone(), val, view.score));
        }
    });

    let (best_genotype, best_train_accuracy, best_validation_accuracy) = match best {
        Some((g, val, train_acc)) => (g, train_acc, Some(val)),
        None => (outcome.parent, outcome.score, None),
    };
    Ok(EvolutionResult {
        best_genotype,
        best_train_accuracy,
        best_validation_accuracy,
        iterations: outcome.iterations,
        history: outcome.history,
    })
}

struct AbsoluteError<'a> {
    inputs: &'a [Vec<f64>],
    targets: &'a [f64],
    passes: usize,
    tolerance: f64,
}

impl Objective for AbsoluteError<'_> {
    fn score(&self, program: &Program, buf: &mut Vec<f64>) -> f64 {
        let total: f64 = self
            .inputs
            .iter()
            .zip(self.targets)
            .map(|(x, &y)| (program.run_static(x, self.passes, buf) - y).abs())
            .sum();
        if total.is_finite() {
            -total
        } else {
            f64::NEG_INFINITY
        }
    }

    fn is_solved(&self, score: f64) -> bool {
        -score < self.tolerance
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegressionResult {
    pub genotype: Genotype,
    pub sum_abs_error: f64,
    pub max_abs_error: f64,
    pub iterations: usize,
}

/// Symbolic regression with the same strategy: minimises the summed absolute
/// error and stops once it drops below `tolerance`.
pub fn evolve_regression(
    inputs: &[Vec<f64>],
    targets: &[f64],
    config: &EvolutionConfig,
    tolerance: f64,
) -> Result<RegressionResult> {
    config.validate()?;
    let n_inputs = inputs
        .first()
        .map(Vec::len)
        .ok_or_else(|| Error::Contract("regression needs at least one point".into()))?;
    if inputs.len() != targets.len() || inputs.iter().any(|x| x.len() != n_inputs) || n_inputs == 0
    {
        return Err(Error::Input("ragged regression data".into()));
    }
    let objective = AbsoluteError {
        inputs,
        targets,
        passes: config.static_update_passes,
        tolerance,
    };
    let outcome = search(config, n_inputs, &objective, |_| {});
    let program = Program::compile(&outcome.parent);
    let mut buf = program.scratch();
    let max_abs_error = inputs
        .iter()
        .zip(targets)
        .map(|(x, &y)| (program.run_static(x, config.static_update_passes, &mut buf) - y).abs())
        .fold(0.0, f64::max);
    Ok(RegressionResult {
        genotype: outcome.parent,
        sum_abs_error: -outcome.score,
        max_abs_error,
        iterations: outcome.iterations,
    })
}
