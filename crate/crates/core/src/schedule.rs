//! Time-stamped schedule events and their JSON-lines encoding.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::Qubit;
use crate::cost::Summary;
use crate::device::{ModuleId, ZoneId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Gate1q,
    Gate2q,
    FiberGate,
    Split,
    Move,
    PhysSwap,
    Merge,
    InsertedSwapGate,
}

impl EventKind {
    pub fn is_gate(self) -> bool {
        matches!(
            self,
            EventKind::Gate1q | EventKind::Gate2q | EventKind::FiberGate | EventKind::InsertedSwapGate
        )
    }

    pub fn is_shuttle(self) -> bool {
        !self.is_gate()
    }
}

/// One physical operation.
///
/// Zone conventions: `Move` lists the hop as `[from, to]`; fiber-class
/// events list both optical zones in operand order; everything else lists
/// its single hosting zone. `PhysSwap` lists the moving ion and the
/// neighbour it trades places with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleEvent {
    pub kind: EventKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gate: Option<usize>,
    pub qubits: Vec<Qubit>,
    pub zones: Vec<ZoneId>,
    pub start: f64,
    pub duration: f64,
    pub fidelity: f64,
    pub heat: f64,
    /// Chain length of the hosting zone, for two-qubit gates.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ions: Option<usize>,
}

impl ScheduleEvent {
    pub fn end(&self) -> f64 {
        self.start + self.duration
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "decision", rename_all = "snake_case")]
pub enum Decision {
    Evict {
        gate: usize,
        victim: Qubit,
        from: ZoneId,
        to: ZoneId,
        lru: u64,
    },
    InsertSwap {
        after_gate: usize,
        qubit: Qubit,
        partner: Qubit,
        home: ModuleId,
        target: ModuleId,
        weight_home: usize,
        weight_target: usize,
    },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub events: Vec<ScheduleEvent>,
    pub shuttle_count: usize,
    pub makespan: f64,
    pub decisions: Vec<Decision>,
}

impl Schedule {
    pub fn inserted_swaps(&self) -> usize {
        self.events
            .iter()
            .filter(|e| e.kind == EventKind::InsertedSwapGate)
            .count()
    }

    /// Event lines followed by one summary line.
    pub fn to_jsonl(&self, summary: &Summary) -> String {
        let mut out = String::new();
        for e in &self.events {
            out.push_str(&serde_json::to_string(e).expect("event serializes"));
            out.push('\n');
        }
        let tail = SummaryLine { summary: summary.clone() };
        out.push_str(&serde_json::to_string(&tail).expect("summary serializes"));
        out.push('\n');
        out
    }
}

#[derive(Serialize, Deserialize)]
struct SummaryLine {
    summary: Summary,
}

#[derive(Debug, Error)]
pub enum ScheduleFileError {
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
    #[error("schedule file has no summary line")]
    MissingSummary,
}

/// Parses a schedule file written by [`Schedule::to_jsonl`].
pub fn read_jsonl(text: &str) -> Result<(Vec<ScheduleEvent>, Summary), ScheduleFileError> {
    let mut events = Vec::new();
    let mut summary = None;
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        if summary.is_some() {
            return Err(ScheduleFileError::Line {
                line: i + 1,
                message: "content after summary".into(),
            });
        }
        let err = |e: serde_json::Error| ScheduleFileError::Line {
            line: i + 1,
            message: e.to_string(),
        };
        if line.starts_with("{\"summary\"") {
            summary = Some(serde_json::from_str::<SummaryLine>(line).map_err(err)?.summary);
        } else {
            events.push(serde_json::from_str(line).map_err(err)?);
        }
    }
    Ok((events, summary.ok_or(ScheduleFileError::MissingSummary)?))
}
