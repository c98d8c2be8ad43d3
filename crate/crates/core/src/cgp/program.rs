//! Decoded phenotypes and their evaluation.
//!
//! Node values live in one buffer indexed by address. Inputs are written to
//! the front of the buffer and active nodes are updated in place in ascending
//! address order, so a node reading a lower address sees the value from the
//! current sweep while a node reading its own or a higher address sees the
//! value left by the previous sweep. Node state starts at zero.

use super::function::Function;
use super::genotype::Genotype;
use crate::dataset::{Layout, Sample};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Step {
    address: usize,
    function: Function,
    inputs: [usize; Function::ARITY],
}

/// The active part of a genotype. Two genotypes with equal programs compute
/// the same function bit for bit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Program {
    n_inputs: usize,
    size: usize,
    steps: Vec<Step>,
    output: usize,
    recurrent: bool,
}

impl Program {
    pub fn compile(genotype: &Genotype) -> Program {
        let steps = genotype
            .active_nodes()
            .into_iter()
            .map(|address| {
                let node = genotype.node_at(address).expect("active address is a node");
                Step {
                    address,
                    function: node.function,
                    inputs: node.inputs,
                }
            })
            .collect();
        Program {
            n_inputs: genotype.n_inputs(),
            size: genotype.address_count(),
            steps,
            output: genotype.output(),
            recurrent: genotype.is_recurrent(),
        }
    }

    pub fn n_inputs(&self) -> usize {
        self.n_inputs
    }

    pub fn active_count(&self) -> usize {
        self.steps.len()
    }

    pub fn scratch(&self) -> Vec<f64> {
        vec![0.0; self.size]
    }

    fn reset(&self, buf: &mut Vec<f64>) {
        buf.resize(self.size, 0.0);
        for step in &self.steps {
            buf[step.address] = 0.0;
        }
    }

    #[inline]
    fn sweep(&self, buf: &mut [f64]) {
        for step in &self.steps {
            debug_assert!(
                self.recurrent || step.inputs.iter().all(|&a| a < step.address),
                "feed-forward program read an uncomputed value"
            );
            let v = step
                .function
                .apply(buf[step.inputs[0]], buf[step.inputs[1]]);
            buf[step.address] = v;
        }
    }

    /// Evaluates one input vector with `passes` sweeps (one is exact for
    /// feed-forward programs). Lengths are not checked.
    pub fn run_static(&self, inputs: &[f64], passes: usize, buf: &mut Vec<f64>) -> f64 {
        self.reset(buf);
        buf[..self.n_inputs].copy_from_slice(inputs);
        let passes = if self.recurrent { passes } else { 1 };
        for _ in 0..passes {
            self.sweep(buf);
        }
        buf[self.output]
    }

    /// Evaluates a row-major `T x n_inputs` sequence, one sweep per row.
    /// State is reset before the first row. Lengths are not checked.
    pub fn run_sequential(&self, rows: &[f64], buf: &mut Vec<f64>) -> f64 {
        self.reset(buf);
        for row in rows.chunks_exact(self.n_inputs) {
            buf[..self.n_inputs].copy_from_slice(row);
            self.sweep(buf);
        }
        buf[self.output]
    }

    /// Raw output for a sample in the given layout.
    pub fn output_for(
        &self,
        sample: &Sample,
        layout: Layout,
        passes: usize,
        buf: &mut Vec<f64>,
    ) -> f64 {
        if layout.is_sequential() {
            self.run_sequential(&sample.features, buf)
        } else {
            self.run_static(&sample.features, passes, buf)
        }
    }
}

fn check_finite(values: &[f64]) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(i) => Err(Error::Input(format!(
            "input value {} at position {i} is not finite",
            values[i]
        ))),
        None => Ok(()),
    }
}

/// Evaluates a genotype on one input vector.
pub fn evaluate_static(genotype: &Genotype, inputs: &[f64], passes: usize) -> Result<f64> {
    if inputs.len() != genotype.n_inputs() {
        return Err(Error::Input(format!(
            "{} inputs given, genotype takes {}",
            inputs.len(),
            genotype.n_inputs()
        )));
    }
    check_finite(inputs)?;
    let program = Program::compile(genotype);
    Ok(program.run_static(inputs, passes, &mut program.scratch()))
}

/// Evaluates a genotype on a row-major sequence of `n_inputs`-wide rows.
pub fn evaluate_sequential(genotype: &Genotype, rows: &[f64]) -> Result<f64> {
    let width = genotype.n_inputs();
    if rows.is_empty() || !rows.len().is_multiple_of(width) {
        return Err(Error::Input(format!(
            "{} values do not form one or more rows of {width}",
            rows.len()
        )));
    }
    check_finite(rows)?;
    let program = Program::compile(genotype);
    Ok(program.run_sequential(rows, &mut program.scratch()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cgp::genotype::Node;

    fn node(function: Function, a: usize, b: usize) -> Node {
        Node {
            function,
            inputs: [a, b],
        }
    }

    #[test]
    fn add_node() {
        let g = Genotype::new(2, vec![node(Function::Add, 0, 1)], 2, false).unwrap();
        assert_eq!(evaluate_static(&g, &[2.0, 3.0], 1).unwrap(), 5.0);
    }

    #[test]
    fn protected_division_by_zero() {
        let g = Genotype::new(2, vec![node(Function::DivProtected, 0, 1)], 2, false).unwrap();
        assert_eq!(evaluate_static(&g, &[3.0, 0.0], 1).unwrap(), 3.0);
    }

    #[test]
    fn self_loop_starts_from_zero() {
        let g = Genotype::new(1, vec![node(Function::Add, 0, 1)], 1, true).unwrap();
        assert_eq!(evaluate_static(&g, &[1.0], 1).unwrap(), 1.0);
        assert_eq!(evaluate_static(&g, &[1.0], 3).unwrap(), 3.0);
    }

    #[test]
    fn accumulator_sums_sequence() {
        let g = Genotype::new(1, vec![node(Function::Add, 0, 1)], 1, true).unwrap();
        assert_eq!(evaluate_sequential(&g, &[1.0, 2.0, 3.0]).unwrap(), 6.0);
    }

    #[test]
    fn forward_reference_reads_previous_sweep() {
        // node0 = in + node1(previous), node1 = node0 * 2
        let g = Genotype::new(
            1,
            vec![node(Function::Add, 0, 2), node(Function::Add, 1, 1)],
            2,
            true,
        )
        .unwrap();
        // t1: n0 = 1 + 0 = 1, n1 = 2; t2: n0 = 1 + 2 = 3, n1 = 6
        assert_eq!(evaluate_sequential(&g, &[1.0, 1.0]).unwrap(), 6.0);
    }

    #[test]
    fn rejects_bad_input() {
        let g = Genotype::new(2, vec![node(Function::Add, 0, 1)], 2, false).unwrap();
        assert!(matches!(
            evaluate_static(&g, &[1.0], 1),
            Err(Error::Input(_))
        ));
        assert!(matches!(
            evaluate_static(&g, &[1.0, f64::NAN], 1),
            Err(Error::Input(_))
        ));
        assert!(matches!(
            evaluate_sequential(&g, &[1.0, 2.0, f64::INFINITY, 0.0]),
            Err(Error::Input(_))
        ));
        assert!(matches!(evaluate_sequential(&g, &[]), Err(Error::Input(_))));
        assert!(matches!(
            evaluate_sequential(&g, &[1.0, 2.0, 3.0]),
            Err(Error::Input(_))
        ));
    }

    #[test]
    fn output_on_input_returns_last_row() {
        let g = Genotype::new(2, vec![node(Function::Add, 0, 1)], 1, false).unwrap();
        assert_eq!(evaluate_sequential(&g, &[1.0, 2.0, 3.0, 4.0]).unwrap(), 4.0);
    }
}
