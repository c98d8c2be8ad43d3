use serde::{Deserialize, Serialize};

use super::evolve::EvolutionConfig;
use super::function::Function;
use crate::error::{Error, Result};
use crate::seed::{self, Rng};

/// Genes per node: one function gene and one connection gene per argument.
pub const GENES_PER_NODE: usize = 1 + Function::ARITY;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Node {
    pub function: Function,
    pub inputs: [usize; Function::ARITY],
}

/// A single-row CGP genotype with levels-back covering the whole graph.
///
/// Addresses `0..n_inputs` are program inputs; node `i` lives at address
/// `n_inputs + i`. In a feed-forward genotype node `i` may only read addresses
/// below its own. A recurrent genotype may read any address, including itself
/// and later nodes.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "GenotypeJson", into = "GenotypeJson")]
pub struct Genotype {
    n_inputs: usize,
    nodes: Vec<Node>,
    output: usize,
    recurrent: bool,
}

impl Genotype {
    pub fn new(n_inputs: usize, nodes: Vec<Node>, output: usize, recurrent: bool) -> Result<Self> {
        let g = Genotype {
            n_inputs,
            nodes,
            output,
            recurrent,
        };
        g.check()?;
        Ok(g)
    }

    fn check(&self) -> Result<()> {
        if self.n_inputs == 0 || self.nodes.is_empty() {
            return Err(Error::Config(
                "genotype needs at least one input and one node".into(),
            ));
        }
        let size = self.address_count();
        if self.output >= size {
            return Err(Error::Config(format!(
                "output gene {} out of range 0..{size}",
                self.output
            )));
        }
        for (i, node) in self.nodes.iter().enumerate() {
            let limit = if self.recurrent {
                size
            } else {
                self.n_inputs + i
            };
            if let Some(&bad) = node.inputs.iter().find(|&&a| a >= limit) {
                return Err(Error::Config(format!(
                    "node {i} connects to address {bad}, legal range is 0..{limit}"
                )));
            }
        }
        Ok(())
    }

    /// Random genotype. Function genes are uniform over the configured set.
    /// Each connection gene is drawn from the full address range with
    /// probability `recurrence_probability`, and from the feed-forward range
    /// otherwise.
    pub fn random(config: &EvolutionConfig, n_inputs: usize, rng: &mut Rng) -> Genotype {
        assert!(n_inputs >= 1, "a genotype needs at least one input");
        let recurrence = config.recurrence_probability;
        let mut g = Genotype {
            n_inputs,
            nodes: Vec::with_capacity(config.n_nodes),
            output: 0,
            recurrent: recurrence > 0.0,
        };
        for i in 0..config.n_nodes {
            let function = sample_function(config, rng);
            let a = sample_connection(n_inputs, config.n_nodes, i, recurrence, rng);
            let b = sample_connection(n_inputs, config.n_nodes, i, recurrence, rng);
            g.nodes.push(Node {
                function,
                inputs: [a, b],
            });
        }
        g.output = seed::index(rng, n_inputs + config.n_nodes);
        g
    }

    pub fn n_inputs(&self) -> usize {
        self.n_inputs
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn output(&self) -> usize {
        self.output
    }

    pub fn is_recurrent(&self) -> bool {
        self.recurrent
    }

    pub fn address_count(&self) -> usize {
        self.n_inputs + self.nodes.len()
    }

    pub fn gene_count(&self) -> usize {
        GENES_PER_NODE * self.nodes.len() + 1
    }

    /// Node at an address, or `None` for an input address.
    pub fn node_at(&self, address: usize) -> Option<&Node> {
        address
            .checked_sub(self.n_inputs)
            .and_then(|i| self.nodes.get(i))
    }

    /// Node addresses reachable backwards from the output gene, ascending.
    /// Cycles are followed once.
    pub fn active_nodes(&self) -> Vec<usize> {
        let mut seen = vec![false; self.address_count()];
        let mut stack = vec![self.output];
        while let Some(address) = stack.pop() {
            if address < self.n_inputs || seen[address] {
                continue;
            }
            seen[address] = true;
            stack.extend_from_slice(&self.nodes[address - self.n_inputs].inputs);
        }
        (self.n_inputs..self.address_count())
            .filter(|&a| seen[a])
            .collect()
    }

    /// Input indices read by an active node or by the output gene.
    pub fn used_inputs(&self) -> Vec<usize> {
        let mut used = vec![false; self.n_inputs];
        if self.output < self.n_inputs {
            used[self.output] = true;
        }
        for address in self.active_nodes() {
            for &src in &self.nodes[address - self.n_inputs].inputs {
                if src < self.n_inputs {
                    used[src] = true;
                }
            }
        }
        (0..self.n_inputs).filter(|&i| used[i]).collect()
    }

    /// Child with every gene independently resampled with probability
    /// `config.mutation_rate`.
    pub fn mutate(&self, config: &EvolutionConfig, rng: &mut Rng) -> Genotype {
        self.mutate_traced(config, rng).0
    }

    /// As [`Genotype::mutate`], also returning the indices of the genes that
    /// were resampled (whether or not the new value differs).
    pub fn mutate_traced(&self, config: &EvolutionConfig, rng: &mut Rng) -> (Genotype, Vec<usize>) {
        let rate = config.mutation_rate;
        let recurrence = if self.recurrent {
            config.recurrence_probability
        } else {
            0.0
        };
        let mut child = self.clone();
        let mut touched = Vec::new();
        for gene in 0..self.gene_count() {
            if seed::unit(rng) >= rate {
                continue;
            }
            touched.push(gene);
            let node = gene / GENES_PER_NODE;
            if node == self.nodes.len() {
                child.output = seed::index(rng, self.address_count());
                continue;
            }
            match gene % GENES_PER_NODE {
                0 => child.nodes[node].function = sample_function(config, rng),
                slot => {
                    child.nodes[node].inputs[slot - 1] =
                        sample_connection(self.n_inputs, self.nodes.len(), node, recurrence, rng)
                }
            }
        }
        (child, touched)
    }

    /// Flat gene list: `[f, c0, c1]` per node followed by the output gene.
    pub fn genes(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.gene_count());
        for n in &self.nodes {
            out.push(n.function.id());
            out.extend_from_slice(&n.inputs);
        }
        out.push(self.output);
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("genotype serialises")
    }

    pub fn from_json(text: &str) -> Result<Genotype> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("genotype JSON: {e}")))
    }
}

fn sample_connection(
    n_inputs: usize,
    n_nodes: usize,
    node: usize,
    recurrence: f64,
    rng: &mut Rng,
) -> usize {
    let full = recurrence > 0.0 && seed::unit(rng) < recurrence;
    let limit = if full {
        n_inputs + n_nodes
    } else {
        n_inputs + node
    };
    seed::index(rng, limit)
}

fn sample_function(config: &EvolutionConfig, rng: &mut Rng) -> Function {
    config.functions[seed::index(rng, config.functions.len())]
}

#[derive(Serialize, Deserialize)]
struct GenotypeJson {
    n_inputs: usize,
    n_nodes: usize,
    genes: Vec<[usize; GENES_PER_NODE]>,
    output: usize,
    recurrent: bool,
}

impl From<Genotype> for GenotypeJson {
    fn from(g: Genotype) -> Self {
        GenotypeJson {
            n_inputs: g.n_inputs,
            n_nodes: g.nodes.len(),
            genes: g
                .nodes
                .iter()
                .map(|n| [n.function.id(), n.inputs[0], n.inputs[1]])
                .collect(),
            output: g.output,
            recurrent: g.recurrent,
        }
    }
}

impl TryFrom<GenotypeJson> for Genotype {
    type Error = Error;

    fn try_from(j: GenotypeJson) -> Result<Self> {
        if j.genes.len() != j.n_nodes {
            return Err(Error::Config(format!(
                "n_nodes is {} but {} node genes given",
                j.n_nodes,
                j.genes.len()
            )));
        }
        let nodes = j
            .genes
            .iter()
            .enumerate()
            .map(|(i, &[f, a, b])| {
                let function = Function::from_id(f)
                    .ok_or_else(|| Error::Config(format!("node {i}: unknown function id {f}")))?;
                Ok(Node {
                    function,
                    inputs: [a, b],
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Genotype::new(j.n_inputs, nodes, j.output, j.recurrent)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::rng_from_seed;

    fn node(function: Function, a: usize, b: usize) -> Node {
        Node {
            function,
            inputs: [a, b],
        }
    }

    #[test]
    fn feed_forward_random_genotype_is_acyclic() {
        let config = EvolutionConfig::default();
        for s in 0..50 {
            let g = Genotype::random(&config, 7, &mut rng_from_seed(s));
            assert!(!g.is_recurrent());
            assert_eq!(g.gene_count(), 151);
            for (i, n) in g.nodes().iter().enumerate() {
                assert!(n.inputs.iter().all(|&a| a < 7 + i));
            }
        }
    }

    #[test]
    fn random_genotype_is_deterministic() {
        let config = EvolutionConfig::recurrent();
        let a = Genotype::random(&config, 4, &mut rng_from_seed(11));
        let b = Genotype::random(&config, 4, &mut rng_from_seed(11));
        assert_eq!(a, b);
    }

    // Oracle: with recurrence probability 1 every connection gene of node i
    // is uniform over all n_inputs + n_nodes addresses, so it lands at or
    // after its own address with probability (n_nodes - i) / (n_inputs + n_nodes).
    #[test]
    fn full_recurrence_backward_share_matches_closed_form() {
        let n_inputs = 4usize;
        let n_nodes = 1000usize;
        let config = EvolutionConfig {
            n_nodes,
            recurrence_probability: 1.0,
            ..EvolutionConfig::default()
        };
        let g = Genotype::random(&config, n_inputs, &mut rng_from_seed(5));
        let size = (n_inputs + n_nodes) as f64;
        let mut mean = 0.0;
        let mut var = 0.0;
        let mut hits = 0usize;
        for (i, n) in g.nodes().iter().enumerate() {
            let p = (n_nodes - i) as f64 / size;
            mean += 2.0 * p;
            var += 2.0 * p * (1.0 - p);
            hits += n.inputs.iter().filter(|&&a| a >= n_inputs + i).count();
        }
        let sigma = var.sqrt();
        assert!(
            (hits as f64 - mean).abs() <= 3.0 * sigma,
            "hits {hits}, expected {mean} +- {}",
            3.0 * sigma
        );
    }

    #[test]
    fn output_on_input_has_no_active_nodes() {
        let g = Genotype::new(2, vec![node(Function::Add, 0, 1); 3], 0, false).unwrap();
        assert!(g.active_nodes().is_empty());
        assert_eq!(g.used_inputs(), vec![0]);
    }

    #[test]
    fn chain_activates_only_its_nodes() {
        let mut nodes = vec![node(Function::Mul, 0, 0); 50];
        nodes[0] = node(Function::Add, 0, 1);
        nodes[49] = node(Function::Sub, 2, 2);
        nodes[49].inputs = [2, 0];
        let g = Genotype::new(2, nodes, 51, false).unwrap();
        assert_eq!(g.active_nodes(), vec![2, 51]);
    }

    #[test]
    fn recurrent_cycle_is_followed_once() {
        // node0 <- node1 <- node0
        let nodes = vec![node(Function::Add, 0, 2), node(Function::Add, 1, 1)];
        let g = Genotype::new(1, nodes, 1, true).unwrap();
        assert_eq!(g.active_nodes(), vec![1, 2]);
        assert_eq!(g.used_inputs(), vec![0]);
    }

    #[test]
    fn validation_rejects_backward_edges_when_feed_forward() {
        let nodes = vec![node(Function::Add, 0, 1)];
        assert!(Genotype::new(1, nodes.clone(), 1, false).is_err());
        assert!(Genotype::new(1, nodes, 1, true).is_ok());
        assert!(Genotype::new(1, vec![node(Function::Add, 0, 0)], 2, false).is_err());
    }

    #[test]
    fn full_rate_mutation_touches_every_gene() {
        let config = EvolutionConfig {
            mutation_rate: 1.0,
            ..EvolutionConfig::default()
        };
        let mut rng = rng_from_seed(1);
        let parent = Genotype::random(&config, 3, &mut rng);
        let before = parent.clone();
        let (child, touched) = parent.mutate_traced(&config, &mut rng);
        assert_eq!(touched, (0..151).collect::<Vec<_>>());
        assert_eq!(parent, before);
        assert_ne!(child, parent);
    }

    // Binomial(151, 0.1) has mean 15.1; the standard error over 10000 trials
    // is sqrt(151 * 0.09 / 10000) = 0.037.
    #[test]
    fn mutation_count_matches_binomial_mean() {
        let config = EvolutionConfig::default();
        let mut rng = rng_from_seed(2024);
        let parent = Genotype::random(&config, 5, &mut rng);
        let trials = 10_000;
        let total: usize = (0..trials)
            .map(|_| parent.mutate_traced(&config, &mut rng).1.len())
            .sum();
        let mean = total as f64 / trials as f64;
        assert!((mean - 15.1).abs() < 0.5, "mean mutated genes {mean}");
    }

    #[test]
    fn mutation_keeps_feed_forward_invariant() {
        let config = EvolutionConfig {
            recurrence_probability: 0.5,
            mutation_rate: 1.0,
            ..EvolutionConfig::default()
        };
        let ff = Genotype::random(&EvolutionConfig::default(), 3, &mut rng_from_seed(4));
        let mut rng = rng_from_seed(9);
        for _ in 0..100 {
            let child = ff.mutate(&config, &mut rng);
            assert!(child.check().is_ok());
            assert!(!child.is_recurrent());
        }
    }

    #[test]
    fn json_round_trip_is_exact() {
        let config = EvolutionConfig::recurrent();
        let g = Genotype::random(&config, 16, &mut rng_from_seed(77));
        let text = g.to_json();
        let back = Genotype::from_json(&text).unwrap();
        assert_eq!(back, g);
        assert_eq!(back.to_json(), text);
        assert!(text.starts_with("{\"n_inputs\":16,\"n_nodes\":50,\"genes\":[["));
    }

    #[test]
    fn json_rejects_illegal_genes() {
        let bad = r#"{"n_inputs":1,"n_nodes":1,"genes":[[0,1,0]],"output":0,"recurrent":false}"#;
        assert!(Genotype::from_json(bad).is_err());
        let bad = r#"{"n_inputs":1,"n_nodes":1,"genes":[[7,0,0]],"output":0,"recurrent":false}"#;
        assert!(Genotype::from_json(bad).is_err());
        let bad = r#"{"n_inputs":1,"n_nodes":2,"genes":[[0,0,0]],"output":0,"recurrent":false}"#;
        assert!(Genotype::from_json(bad).is_err());
    }
}
