//! Cartesian genetic programming: genotypes, evaluation and evolution.

mod evolve;
mod function;
mod genotype;
mod program;

pub use evolve::{
    evolve, evolve_regression, fitness, outputs, predict, search, Decision, EvolutionConfig,
    EvolutionResult, Improvement, Objective, ParentView, RegressionResult, SearchOutcome,
};
pub use function::{Function, DIV_EPSILON};
pub use genotype::{Genotype, Node, GENES_PER_NODE};
pub use program::{evaluate_sequential, evaluate_static, Program};
