//! Gate-level circuit representation.
//!
//! Circuits are flat, ordered lists of one- and two-qubit operations over
//! logical qubits `0..num_qubits`. Gate ids are the source-order index and
//! double as the first-come-first-served rank during scheduling.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Logical qubit index.
pub type Qubit = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GateKind {
    SingleQubit,
    TwoQubit,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateOp {
    pub id: usize,
    pub kind: GateKind,
    pub qubits: Vec<Qubit>,
    pub label: String,
}

impl GateOp {
    pub fn is_two_qubit(&self) -> bool {
        self.kind == GateKind::TwoQubit
    }

    /// The two operands of a two-qubit gate.
    ///
    /// Panics on single-qubit gates.
    pub fn pair(&self) -> (Qubit, Qubit) {
        assert!(self.is_two_qubit(), "gate {} is not a two-qubit gate", self.id);
        (self.qubits[0], self.qubits[1])
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CircuitError {
    #[error("gate {gate} references qubit {qubit} but the circuit has {num_qubits} qubits")]
    QubitOutOfRange {
        gate: usize,
        qubit: Qubit,
        num_qubits: usize,
    },
    #[error("two-qubit gate {gate} repeats operand {qubit}")]
    DuplicateOperand { gate: usize, qubit: Qubit },
    #[error("gate {gate} has {arity} operands; only 1 and 2 are supported")]
    UnsupportedArity { gate: usize, arity: usize },
}

/// Tally of statements that were accepted but do not take part in scheduling.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IgnoredTally {
    pub barriers: usize,
    pub measurements: usize,
    pub resets: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Circuit {
    pub num_qubits: usize,
    pub gates: Vec<GateOp>,
    #[serde(default)]
    pub ignored: IgnoredTally,
}

impl Circuit {
    pub fn new(num_qubits: usize) -> Self {
        Circuit {
            num_qubits,
            gates: Vec::new(),
            ignored: IgnoredTally::default(),
        }
    }

    /// Appends a gate, assigning the next sequence id.
    pub fn push(&mut self, label: &str, qubits: &[Qubit]) -> Result<usize, CircuitError> {
        let id = self.gates.len();
        let kind = match qubits.len() {
            1 => GateKind::SingleQubit,
            2 => GateKind::TwoQubit,
            arity => return Err(CircuitError::UnsupportedArity { gate: id, arity }),
        };
        for &q in qubits {
            if q >= self.num_qubits {
                return Err(CircuitError::QubitOutOfRange {
                    gate: id,
                    qubit: q,
                    num_qubits: self.num_qubits,
                });
            }
        }
        if kind == GateKind::TwoQubit && qubits[0] == qubits[1] {
            return Err(CircuitError::DuplicateOperand {
                gate: id,
                qubit: qubits[0],
            });
        }
        self.gates.push(GateOp {
            id,
            kind,
            qubits: qubits.to_vec(),
            label: label.to_string(),
        });
        Ok(id)
    }

    /// Convenience for builders whose operands are known to be valid.
    pub fn cx(&mut self, control: Qubit, target: Qubit) -> usize {
        self.push("cx", &[control, target])
            .expect("cx operands must be distinct and in range")
    }

    pub fn one(&mut self, label: &str, qubit: Qubit) -> usize {
        self.push(label, &[qubit])
            .expect("single-qubit operand must be in range")
    }

    pub fn num_two_qubit(&self) -> usize {
        self.gates.iter().filter(|g| g.is_two_qubit()).count()
    }

    /// Same gates in reverse order, renumbered so ids stay in source order.
    pub fn reversed(&self) -> Circuit {
        let gates = self
            .gates
            .iter()
            .rev()
            .enumerate()
            .map(|(id, g)| GateOp { id, ..g.clone() })
            .collect();
        Circuit {
            num_qubits: self.num_qubits,
            gates,
            ignored: self.ignored.clone(),
        }
    }

    pub fn validate(&self) -> Result<(), CircuitError> {
        for (idx, g) in self.gates.iter().enumerate() {
            debug_assert_eq!(g.id, idx);
            let expected = match g.kind {
                GateKind::SingleQubit => 1,
                GateKind::TwoQubit => 2,
            };
            if g.qubits.len() != expected {
                return Err(CircuitError::UnsupportedArity {
                    gate: g.id,
                    arity: g.qubits.len(),
                });
            }
            for &q in &g.qubits {
                if q >= self.num_qubits {
                    return Err(CircuitError::QubitOutOfRange {
                        gate: g.id,
                        qubit: q,
                        num_qubits: self.num_qubits,
                    });
                }
            }
            if g.is_two_qubit() && g.qubits[0] == g.qubits[1] {
                return Err(CircuitError::DuplicateOperand {
                    gate: g.id,
                    qubit: g.qubits[0],
                });
            }
        }
        Ok(())
    }
}
