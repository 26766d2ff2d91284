//! Gate dependency graph with a mutable frontier.
//!
//! Edges link each gate to the most recent earlier gate on each of its
//! operand qubits, so a gate has at most two incoming edges and the graph
//! is built in a single pass over the circuit.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::circuit::{Circuit, GateOp};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DagError {
    #[error("gate {0} is not in the frontier")]
    NotInFrontier(usize),
}

#[derive(Debug, Clone)]
pub struct DependencyDag {
    gates: Vec<GateOp>,
    successors: Vec<Vec<usize>>,
    predecessors: Vec<Vec<usize>>,
    in_degree: Vec<usize>,
    removed: Vec<bool>,
    frontier: BTreeSet<usize>,
    remaining: usize,
}

/// Work counters from [`DependencyDag::build_counted`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BuildStats {
    pub operand_visits: usize,
    pub edges: usize,
}

impl BuildStats {
    pub fn steps(&self) -> usize {
        self.operand_visits + self.edges
    }
}

impl DependencyDag {
    pub fn build(circuit: &Circuit) -> Self {
        Self::build_counted(circuit).0
    }

    pub fn build_counted(circuit: &Circuit) -> (Self, BuildStats) {
        let g = circuit.gates.len();
        let mut stats = BuildStats::default();
        let mut last_on_qubit: Vec<Option<usize>> = vec![None; circuit.num_qubits];
        let mut successors = vec![Vec::new(); g];
        let mut predecessors: Vec<Vec<usize>> = vec![Vec::new(); g];
        for gate in &circuit.gates {
            for &q in &gate.qubits {
                stats.operand_visits += 1;
                if let Some(prev) = last_on_qubit[q] {
                    if !predecessors[gate.id].contains(&prev) {
                        predecessors[gate.id].push(prev);
                        successors[prev].push(gate.id);
                        stats.edges += 1;
                    }
                }
                last_on_qubit[q] = Some(gate.id);
            }
        }
        let in_degree: Vec<usize> = predecessors.iter().map(Vec::len).collect();
        let frontier = (0..g).filter(|&i| in_degree[i] == 0).collect();
        (
            DependencyDag {
                gates: circuit.gates.clone(),
                successors,
                predecessors,
                in_degree,
                removed: vec![false; g],
                frontier,
                remaining: g,
            },
            stats,
        )
    }

    pub fn gate(&self, id: usize) -> &GateOp {
        &self.gates[id]
    }

    pub fn num_gates(&self) -> usize {
        self.gates.len()
    }

    pub fn frontier(&self) -> &BTreeSet<usize> {
        &self.frontier
    }

    pub fn is_empty(&self) -> bool {
        self.remaining == 0
    }

    pub fn remaining(&self) -> usize {
        self.remaining
    }

    pub fn in_degree(&self, id: usize) -> usize {
        self.in_degree[id]
    }

    pub fn successors(&self, id: usize) -> &[usize] {
        &self.successors[id]
    }

    pub fn predecessors(&self, id: usize) -> &[usize] {
        &self.predecessors[id]
    }

    pub fn is_removed(&self, id: usize) -> bool {
        self.removed[id]
    }

    /// All edges of the original graph, in insertion order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.successors
            .iter()
            .enumerate()
            .flat_map(|(from, succ)| succ.iter().map(move |&to| (from, to)))
            .collect()
    }

    /// First-come-first-served rank; equal to the source-order id.
    pub fn fcfs_rank(&self, id: usize) -> usize {
        self.gates[id].id
    }

    /// Removes a frontier gate and promotes successors that become ready.
    pub fn pop_gate(&mut self, id: usize) -> Result<(), DagError> {
        if !self.frontier.remove(&id) {
            return Err(DagError::NotInFrontier(id));
        }
        self.removed[id] = true;
        self.remaining -= 1;
        for &s in &self.successors[id] {
            self.in_degree[s] -= 1;
            if self.in_degree[s] == 0 {
                self.frontier.insert(s);
            }
        }
        Ok(())
    }

    /// Peels up to `depth` layers of two-qubit gates off a virtual copy of
    /// the remaining graph. Single-qubit gates are transparent: they are
    /// released within the layer that frees them and never occupy a layer.
    pub fn two_qubit_layers(&self, depth: usize) -> Vec<Vec<usize>> {
        use std::collections::HashMap;
        let mut layers = Vec::new();
        let mut pending: HashMap<usize, usize> = HashMap::new();
        let mut current: Vec<usize> = Vec::new();
        let mut stack: Vec<usize> = self.frontier.iter().copied().collect();

        // Resolve transparent single-qubit gates reachable from `stack`,
        // pushing newly ready two-qubit gates into `into`.
        let release = |stack: &mut Vec<usize>,
                       into: &mut Vec<usize>,
                       pending: &mut HashMap<usize, usize>| {
            while let Some(g) = stack.pop() {
                if self.gates[g].is_two_qubit() {
                    into.push(g);
                    continue;
                }
                for &s in &self.successors[g] {
                    let left = pending.entry(s).or_insert(self.in_degree[s]);
                    *left -= 1;
                    if *left == 0 {
                        stack.push(s);
                    }
                }
            }
        };

        release(&mut stack, &mut current, &mut pending);
        while !current.is_empty() && layers.len() < depth {
            current.sort_unstable();
            let mut next = Vec::new();
            for &g in &current {
                for &s in &self.successors[g] {
                    let left = pending.entry(s).or_insert(self.in_degree[s]);
                    *left -= 1;
                    if *left == 0 {
                        stack.push(s);
                    }
                }
            }
            release(&mut stack, &mut next, &mut pending);
            layers.push(std::mem::replace(&mut current, next));
        }
        layers
    }
}
