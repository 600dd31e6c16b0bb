//! Genome layout, decoding into an executable program graph, active-node
//! tracing and stepwise stateful evaluation.
//!
//! A genome holds `n_output` output genes followed by four genes per program
//! node: `x` connection, `y` connection, function and parameter. The graph
//! has `N = n_input + C` nodes, the first `n_input` of which are the program
//! inputs.

use rand::Rng;

use crate::error::{CgpError, Result};
use crate::functions::{apply, Function};
use crate::value::{constrain, scalar_of, Value};

/// Genes per program node.
pub const GENES_PER_NODE: usize = 4;

#[derive(Clone, Debug, PartialEq)]
pub struct Genome {
    n_input: usize,
    n_output: usize,
    columns: usize,
    recurrency: f64,
    genes: Vec<f64>,
}

impl Genome {
    pub fn new(
        n_input: usize,
        n_output: usize,
        columns: usize,
        recurrency: f64,
        genes: Vec<f64>,
    ) -> Result<Self> {
        if n_input == 0 || n_output == 0 || columns == 0 {
            return Err(CgpError::Structure(
                "n_input, n_output and C must be positive".into(),
            ));
        }
        if !(0.0..=1.0).contains(&recurrency) {
            return Err(CgpError::Structure(format!(
                "recurrency {recurrency} is outside [0, 1]"
            )));
        }
        let expected = gene_count(n_output, columns);
        if genes.len() != expected {
            return Err(CgpError::GeneCount {
                expected,
                actual: genes.len(),
            });
        }
        if let Some((index, &value)) = genes
            .iter()
            .enumerate()
            .find(|(_, g)| !(0.0..1.0).contains(*g))
        {
            return Err(CgpError::GeneRange { index, value });
        }
        Ok(Genome {
            n_input,
            n_output,
            columns,
            recurrency,
            genes,
        })
    }

    /// Draws every gene uniformly from `[0, 1)`.
    pub fn random<R: Rng + ?Sized>(
        n_input: usize,
        n_output: usize,
        columns: usize,
        recurrency: f64,
        rng: &mut R,
    ) -> Result<Self> {
        let genes = (0..gene_count(n_output, columns))
            .map(|_| rng.gen::<f64>())
            .collect();
        Genome::new(n_input, n_output, columns, recurrency, genes)
    }

    pub fn n_input(&self) -> usize {
        self.n_input
    }

    pub fn n_output(&self) -> usize {
        self.n_output
    }

    /// Number of program nodes, `C`.
    pub fn columns(&self) -> usize {
        self.columns
    }

    pub fn recurrency(&self) -> f64 {
        self.recurrency
    }

    /// Total node count `N = n_input + C`.
    pub fn node_count(&self) -> usize {
        self.n_input + self.columns
    }

    pub fn genes(&self) -> &[f64] {
        &self.genes
    }

    /// Index of the first gene of graph node `node` (must be a program node).
    pub fn node_gene_offset(&self, node: usize) -> usize {
        debug_assert!(node >= self.n_input && node < self.node_count());
        self.n_output + GENES_PER_NODE * (node - self.n_input)
    }

    /// Replaces one gene. The value must lie in `[0, 1)`.
    pub fn set_gene(&mut self, index: usize, value: f64) {
        assert!((0.0..1.0).contains(&value), "gene {value} outside [0, 1)");
        self.genes[index] = value;
    }

    pub fn decode(&self) -> Program {
        Program::decode(self)
    }
}

/// `n_output + 4·C`.
pub fn gene_count(n_output: usize, columns: usize) -> usize {
    n_output + GENES_PER_NODE * columns
}

/// Connection index for node `n` of an `N`-node graph:
/// `⌊gene · ((N − n)·r + n)⌋`, clamped to `N − 1`.
///
/// With `r = 0` the result is strictly below `n`; with `r = 1` it spans the
/// whole graph.
pub fn connection_index(gene: f64, n: usize, node_count: usize, recurrency: f64) -> usize {
    let span = (node_count - n) as f64 * recurrency + n as f64;
    let idx = (gene * span).floor();
    if idx <= 0.0 {
        0
    } else {
        (idx as usize).min(node_count - 1)
    }
}

/// Output gene to node index: `⌊gene · N⌋`, clamped to `N − 1`.
pub fn output_index(gene: f64, node_count: usize) -> usize {
    let idx = (gene * node_count as f64).floor();
    if idx <= 0.0 {
        0
    } else {
        (idx as usize).min(node_count - 1)
    }
}

/// A decoded program node.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Node {
    pub x: usize,
    pub y: usize,
    pub function: Function,
    /// Parameter scaled to `[-1, 1)` as `2p − 1`.
    pub param: f64,
}

impl Node {
    /// Graph nodes this node reads when evaluated.
    pub fn predecessors(&self) -> impl Iterator<Item = usize> {
        let x = self.function.reads_x().then_some(self.x);
        let y = self.function.reads_y().then_some(self.y);
        x.into_iter().chain(y)
    }
}

/// Executable phenotype with its per-node output state.
#[derive(Clone, Debug)]
pub struct Program {
    n_input: usize,
    nodes: Vec<Node>,
    outputs: Vec<usize>,
    active: Vec<bool>,
    state: Vec<Value>,
}

impl Program {
    pub fn decode(genome: &Genome) -> Program {
        let n = genome.node_count();
        let r = genome.recurrency();
        let genes = genome.genes();
        let outputs = genes[..genome.n_output()]
            .iter()
            .map(|&g| output_index(g, n))
            .collect();
        let nodes = (genome.n_input()..n)
            .map(|k| {
                let o = genome.node_gene_offset(k);
                Node {
                    x: connection_index(genes[o], k, n, r),
                    y: connection_index(genes[o + 1], k, n, r),
                    function: Function::from_gene(genes[o + 2]),
                    param: 2.0 * genes[o + 3] - 1.0,
                }
            })
            .collect();
        let mut program = Program {
            n_input: genome.n_input(),
            nodes,
            outputs,
            active: vec![false; n],
            state: vec![Value::ZERO; n],
        };
        program.active = program.trace_active();
        program
    }

    pub fn n_input(&self) -> usize {
        self.n_input
    }

    pub fn n_output(&self) -> usize {
        self.outputs.len()
    }

    pub fn node_count(&self) -> usize {
        self.n_input + self.nodes.len()
    }

    /// Decoded record of graph node `index`, `None` for input nodes.
    pub fn node(&self, index: usize) -> Option<&Node> {
        index
            .checked_sub(self.n_input)
            .and_then(|i| self.nodes.get(i))
    }

    pub fn outputs(&self) -> &[usize] {
        &self.outputs
    }

    pub fn is_active(&self, index: usize) -> bool {
        self.active[index]
    }

    /// Active node indices in ascending order.
    pub fn active_nodes(&self) -> Vec<usize> {
        (0..self.node_count()).filter(|&i| self.active[i]).collect()
    }

    /// Current output value of graph node `index`.
    pub fn state(&self, index: usize) -> &Value {
        &self.state[index]
    }

    /// Marks every node reachable from the outputs through the connections
    /// each function actually reads. Already-marked nodes are not revisited,
    /// so recurrent cycles terminate.
    pub fn trace_active(&self) -> Vec<bool> {
        let mut active = vec![false; self.node_count()];
        let mut stack: Vec<usize> = self.outputs.clone();
        while let Some(i) = stack.pop() {
            if active[i] {
                continue;
            }
            active[i] = true;
            if let Some(node) = self.node(i) {
                stack.extend(node.predecessors().filter(|&p| !active[p]));
            }
        }
        active
    }

    /// Sets every node's output back to scalar 0.
    pub fn reset_state(&mut self) {
        self.state.iter_mut().for_each(|s| *s = Value::ZERO);
    }

    /// One evaluation pass: inputs are loaded, then active program nodes are
    /// computed in ascending order, updating state in place. A connection to
    /// a lower index therefore sees this pass's value, a connection to the
    /// same or a higher index sees the previous pass's value.
    pub fn step(&mut self, inputs: &[Value]) -> Result<Vec<Value>> {
        if inputs.len() != self.n_input {
            return Err(CgpError::InputCount {
                expected: self.n_input,
                actual: inputs.len(),
            });
        }
        for (slot, input) in self.state.iter_mut().zip(inputs) {
            *slot = constrain(input.clone());
        }
        for (offset, node) in self.nodes.iter().enumerate() {
            let index = self.n_input + offset;
            if !self.active[index] {
                continue;
            }
            let out = apply(
                node.function,
                &self.state[node.x],
                &self.state[node.y],
                node.param,
            );
            self.state[index] = out;
        }
        Ok(self
            .outputs
            .iter()
            .map(|&o| self.state[o].clone())
            .collect())
    }

    /// Steps once and selects the action.
    pub fn act(&mut self, inputs: &[Value]) -> Result<usize> {
        let outputs = self.step(inputs)?;
        Ok(select_action(&outputs))
    }
}

/// Argmax over the scalarized outputs; ties go to the lowest index.
pub fn select_action(outputs: &[Value]) -> usize {
    let mut best = 0;
    let mut best_value = f64::NEG_INFINITY;
    for (i, v) in outputs.iter().enumerate() {
        let s = scalar_of(v);
        if s > best_value {
            best = i;
            best_value = s;
        }
    }
    best
}
